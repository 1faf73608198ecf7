"""Synthetic longitudinal score data from predefined trajectory groups."""
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from app.abt import polynomial_gap_area
from app.config import DEFAULT_SEED, SCORE_BOUNDS
from app.errors import ScenarioError
from app.log import LOG
from app.models import LongitudinalDataset, TimeGrid
from app.utils import make_rng

_MAX_SEED = 2 ** 64 - 1


@dataclass(frozen=True)
class GroupSpec:
    label: str
    proportion: float
    # ascending power order, degree <= 3
    mean_curve: Tuple[float, ...]
    noise_sd: float

    def mean_values(self, times) -> np.ndarray:
        return P.polyval(np.asarray(times, dtype=float), np.array(self.mean_curve))


@dataclass(frozen=True)
class ScenarioSpec:
    grid: TimeGrid
    n_individuals: int
    groups: Tuple[GroupSpec, ...]
    bounds: Tuple[float, float] = field(default_factory=lambda: SCORE_BOUNDS)
    seed: int = DEFAULT_SEED
    round_to_integer: bool = False

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))
        object.__setattr__(self, "bounds", tuple(float(b) for b in self.bounds))
        self.validate()

    def validate(self):
        if not isinstance(self.n_individuals, int) or self.n_individuals < 1:
            raise ScenarioError(
                f"n_individuals must be a positive integer, got {self.n_individuals}"
            )
        if not self.groups:
            raise ScenarioError("a scenario needs at least one group")
        if len({g.label for g in self.groups}) != len(self.groups):
            raise ScenarioError("group labels must be unique")

        for g in self.groups:
            if not 0 < g.proportion <= 1:
                raise ScenarioError(f"proportion of {g.label} must be in (0, 1]")
            if not 1 <= len(g.mean_curve) <= 4:
                raise ScenarioError(
                    f"mean curve of {g.label} needs 1 to 4 coefficients, "
                    f"got {len(g.mean_curve)}"
                )
            if not np.all(np.isfinite(g.mean_curve)):
                raise ScenarioError(f"mean curve of {g.label} is not finite")
            if not g.noise_sd >= 0:
                raise ScenarioError(f"noise_sd of {g.label} must be nonnegative")

        total = sum(g.proportion for g in self.groups)
        if abs(total - 1.0) > 1e-9:
            raise ScenarioError(f"group proportions sum to {total}, not 1")

        if len(self.bounds) != 2 or not self.bounds[0] < self.bounds[1]:
            raise ScenarioError(f"invalid score bounds {self.bounds}")
        if not isinstance(self.seed, int) or not 0 <= self.seed <= _MAX_SEED:
            raise ScenarioError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def labels(self) -> List[str]:
        return [g.label for g in self.groups]

    def group(self, label: str) -> GroupSpec:
        for g in self.groups:
            if g.label == label:
                return g
        raise ScenarioError(f"unknown group label {label}")


def generate_dataset(spec: ScenarioSpec) -> Tuple[LongitudinalDataset, Dict[str, str]]:
    """Draw a dataset and the id -> generating group label mapping.

    Group membership is an independent categorical draw per individual, then
    one N x T block of standard normal draws is scaled by each individual's
    group noise. Both come from one PCG64 stream seeded by spec.seed, so the
    output only depends on the spec.
    """
    rng = make_rng(spec.seed)
    times = spec.grid.as_array()
    n, n_times = spec.n_individuals, spec.grid.n_points

    proportions = np.array([g.proportion for g in spec.groups])
    assigned = rng.choice(len(spec.groups), size=n, p=proportions / proportions.sum())
    noise = rng.standard_normal((n, n_times))

    means = np.stack([g.mean_values(times) for g in spec.groups])
    noise_sd = np.array([g.noise_sd for g in spec.groups])

    scores = means[assigned] + noise_sd[assigned][:, None] * noise
    scores = np.clip(scores, spec.bounds[0], spec.bounds[1])
    if spec.round_to_integer:
        scores = np.rint(scores)

    ids = [str(i + 1) for i in range(n)]
    labels = {id_: spec.groups[g].label for id_, g in zip(ids, assigned)}

    LOG.d(
        "simulate %s individuals, group counts %s",
        n,
        dict(zip(spec.labels, np.bincount(assigned, minlength=len(spec.groups)).tolist())),
    )

    dataset = LongitudinalDataset(
        grid=spec.grid, ids=tuple(ids), scores=scores, bounds=spec.bounds
    )
    return dataset, labels


def default_scenario() -> ScenarioSpec:
    """Five sleep-quality-like groups on weeks 0, 2, ..., 16 with N=1000.

    The two "good" groups share their shape and differ by a constant 0.6
    score units. Every group has the same noise sd: the fitted model shares
    one sd across groups.
    """
    good = (5.0, -0.05, 0.0025)
    groups = (
        GroupSpec("good_stable", 0.25, good, 1.0),
        GroupSpec("good_stable_high", 0.25, (good[0] + 0.6,) + good[1:], 1.0),
        GroupSpec("poor_stable", 0.18, (15.8, 0.1), 1.0),
        GroupSpec("improving", 0.16, (15.0, -1.05, 0.025, 0.0003), 1.0),
        GroupSpec("worsening", 0.16, (6.0, 0.25, 0.02), 1.0),
    )
    return ScenarioSpec(
        grid=TimeGrid.regular(0, 16, 2),
        n_individuals=1000,
        groups=groups,
        bounds=(0, 21),
        seed=DEFAULT_SEED,
    )


def scenario_pair_abt(spec: ScenarioSpec, label_a: str, label_b: str) -> List[float]:
    """Per-interval area between two generating curves, in closed form"""
    a, b = spec.group(label_a), spec.group(label_b)
    return [
        polynomial_gap_area(a.mean_curve, b.mean_curve, t0, t1)
        for t0, t1 in spec.grid.intervals()
    ]
