import os

import pandas as pd
import pytest

from app.storage import atomic_write, write_frame, write_text


def test_write_text(tmp_path):
    path = str(tmp_path / "sub" / "a.txt")
    write_text(path, "hello\n")
    assert open(path).read() == "hello\n"


def test_failed_write_leaves_nothing(tmp_path):
    path = str(tmp_path / "a.csv")
    with pytest.raises(RuntimeError):
        with atomic_write(path) as f:
            f.write("half")
            raise RuntimeError("boom")

    assert os.listdir(tmp_path) == []


def test_failed_write_keeps_previous_file(tmp_path):
    path = str(tmp_path / "a.csv")
    write_text(path, "old\n")
    with pytest.raises(RuntimeError):
        with atomic_write(path) as f:
            f.write("new")
            raise RuntimeError("boom")

    assert open(path).read() == "old\n"
    assert os.listdir(tmp_path) == ["a.csv"]


def test_write_frame_full_precision(tmp_path):
    path = str(tmp_path / "a.csv")
    write_frame(path, pd.DataFrame({"x": [0.1, 2.0]}))
    assert open(path).read() == "x\n0.10000000000000001\n2\n"
