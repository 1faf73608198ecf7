from typing import List, Sequence

import numpy as np

from app.models import FittedModel, LongitudinalDataset, TimeGrid
from app.simulate import GroupSpec, ScenarioSpec


def make_dataset(times: Sequence[float], rows: List[Sequence[float]], bounds=(0, 21)):
    return LongitudinalDataset(
        grid=TimeGrid(tuple(times)),
        ids=tuple(str(i + 1) for i in range(len(rows))),
        scores=np.array(rows, dtype=float),
        bounds=bounds,
    )


def make_model(times, coefficients, mixing_proportions=None, sigma=1.0, n_individuals=10):
    coefficients = np.atleast_2d(np.array(coefficients, dtype=float))
    K, p = coefficients.shape
    if mixing_proportions is None:
        mixing_proportions = np.full(K, 1.0 / K)
    return FittedModel(
        grid=TimeGrid(tuple(times)),
        degree=p - 1,
        mixing_proportions=np.array(mixing_proportions, dtype=float),
        coefficients=coefficients,
        sigma=sigma,
        log_likelihood=-123.456,
        n_individuals=n_individuals,
        converged=True,
        iterations=17,
        seed=5,
    )


def constant_scenario(levels, noise_sd, n, seed, grid=None, proportions=None):
    proportions = proportions or [1.0 / len(levels)] * len(levels)
    return ScenarioSpec(
        grid=grid or TimeGrid.regular(0, 16, 2),
        n_individuals=n,
        groups=tuple(
            GroupSpec(f"g{i + 1}", p, (level,), noise_sd)
            for i, (level, p) in enumerate(zip(levels, proportions))
        ),
        bounds=(0, 21),
        seed=seed,
    )


def write_csv(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)
