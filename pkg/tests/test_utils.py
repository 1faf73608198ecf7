import numpy as np
import pytest

from app.utils import format_real, format_sig, frozen_array, make_rng, random_string


def test_random_string():
    s = random_string()
    assert len(s) == 10


def test_make_rng_is_deterministic():
    a = make_rng(1).standard_normal(5)
    b = make_rng(1).standard_normal(5)
    assert np.array_equal(a, b)


def test_make_rng_substreams_differ():
    a = make_rng(1, 0).standard_normal(5)
    b = make_rng(1, 1).standard_normal(5)
    assert not np.array_equal(a, b)


def test_format_real_is_exact():
    for x in [0.1, 1 / 3, -123.456e-7, 2 ** 0.5, 1e300]:
        assert float(format_real(x)) == x


def test_format_sig():
    assert format_sig(34337.1234) == "34337.1"
    assert format_sig(float("nan")) == ""
    assert format_sig(None) == ""


def test_frozen_array():
    arr = frozen_array([1, 2, 3])
    with pytest.raises(ValueError):
        arr[0] = 5
