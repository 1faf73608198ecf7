import random
import string

import numpy as np

# the only bit generator used for simulation and EM initialisation,
# recorded in run metadata so outputs can be replayed
GENERATOR_ALGORITHM = "PCG64"


def random_string(length=10):
    """Generate a random string of fixed length """
    letters = string.ascii_lowercase
    return "".join(random.choice(letters) for _ in range(length))


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Seeded generator, optionally on a substream derived from (seed, *stream).

    Substreams only depend on their keys, so work split across threads draws
    the same numbers as a serial loop.
    """
    entropy = [int(seed)] + [int(s) for s in stream]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def frozen_array(values, dtype=float) -> np.ndarray:
    """copy values into a read-only array"""
    arr = np.array(values, dtype=dtype)
    arr.flags.writeable = False
    return arr


def format_real(x: float) -> str:
    """17 significant digits: parses back to the same double"""
    return format(float(x), ".17g")


def format_sig(x: float, digits: int = 6) -> str:
    if x is None or (isinstance(x, float) and np.isnan(x)):
        return ""
    return format(float(x), f".{digits}g")
