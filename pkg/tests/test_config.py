import pytest

from app.config import getenv_literal, get_abs_path, ROOT_DIR


def test_getenv_literal(monkeypatch):
    monkeypatch.setenv("ABT_KEY_1", "(0, 21)")
    assert getenv_literal("ABT_KEY_1") == (0, 21)

    assert getenv_literal("ABT_KEY_2", default_factory=list) == []

    with pytest.raises(TypeError):
        getenv_literal("ABT_KEY_3")


def test_get_abs_path():
    assert get_abs_path("/tmp/a.env") == "/tmp/a.env"
    assert get_abs_path("tests/test.env").startswith(ROOT_DIR)


def test_test_env_loaded():
    from app.config import FIT_N_STARTS, DEFAULT_SEED

    assert FIT_N_STARTS == 3
    assert DEFAULT_SEED == 7
