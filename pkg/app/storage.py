import os
import tempfile
from contextlib import contextmanager

from app.log import LOG


@contextmanager
def atomic_write(file_path: str, mode="w"):
    """Write to a temp file next to file_path, rename it over file_path on success.

    Readers never see a partially written file: on error the temp file is
    removed and file_path is left untouched.
    """
    file_dir = os.path.dirname(os.path.abspath(file_path))
    os.makedirs(file_dir, exist_ok=True)

    fd, tmp_path = tempfile.mkstemp(
        dir=file_dir, prefix="." + os.path.basename(file_path) + ".", suffix=".tmp"
    )
    try:
        with os.fdopen(fd, mode, encoding="utf-8", newline="") as f:
            yield f
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_path, file_path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise

    LOG.d("write %s", file_path)


def write_text(file_path: str, content: str):
    with atomic_write(file_path) as f:
        f.write(content)


def write_frame(file_path: str, df, float_format="%.17g"):
    """write a pandas DataFrame as UTF-8 CSV with a header, atomically"""
    with atomic_write(file_path) as f:
        df.to_csv(f, index=False, float_format=float_format)
