"""Domain types shared by every module.

All types are immutable after construction: arrays are stored read-only.
Group indices are 0-based in the library and shown as "Group #k" (1-based)
to users.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from app.errors import (
    DatasetParseError,
    GridMismatchError,
    InvalidGroupError,
    ScoreRangeError,
    UnknownIndividualError,
)
from app.utils import frozen_array

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class TimeGrid:
    times: Tuple[float, ...]

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        object.__setattr__(self, "times", times)

        if len(times) < 2:
            raise ValueError(f"a time grid needs at least 2 points, got {len(times)}")
        if not np.all(np.isfinite(times)):
            raise ValueError(f"non-finite time in grid {times}")
        if not all(a < b for a, b in zip(times, times[1:])):
            raise ValueError(f"time grid must be strictly increasing: {times}")

    @classmethod
    def regular(cls, start: float, stop: float, step: float) -> "TimeGrid":
        n = int(round((stop - start) / step))
        return cls(tuple(start + i * step for i in range(n + 1)))

    @property
    def n_points(self) -> int:
        return len(self.times)

    @property
    def n_intervals(self) -> int:
        return len(self.times) - 1

    @property
    def span(self) -> Tuple[float, float]:
        return self.times[0], self.times[-1]

    def intervals(self) -> List[Tuple[float, float]]:
        return list(zip(self.times, self.times[1:]))

    def as_array(self) -> np.ndarray:
        return np.array(self.times, dtype=float)

    def __len__(self):
        return len(self.times)


@dataclass(frozen=True, eq=False)
class IndividualTrajectory:
    """An individual's observed path, piecewise-linear between measurements"""

    id: str
    times: np.ndarray
    scores: np.ndarray

    @property
    def points(self) -> List[Tuple[float, float]]:
        return list(zip(self.times.tolist(), self.scores.tolist()))

    def __call__(self, t):
        return np.interp(t, self.times, self.scores)


@dataclass(frozen=True, eq=False)
class LongitudinalDataset:
    grid: TimeGrid
    ids: Tuple[str, ...]
    scores: np.ndarray
    bounds: Tuple[float, float] = (0.0, 21.0)
    _index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ids = tuple(str(i) for i in self.ids)
        scores = frozen_array(self.scores)
        bounds = (float(self.bounds[0]), float(self.bounds[1]))
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "bounds", bounds)

        if bounds[0] >= bounds[1]:
            raise ValueError(f"invalid score bounds {bounds}")
        if scores.ndim != 2 or scores.shape != (len(ids), self.grid.n_points):
            raise DatasetParseError(
                f"score matrix shape {scores.shape} does not match "
                f"{len(ids)} individuals x {self.grid.n_points} times"
            )
        if len(set(ids)) != len(ids):
            raise DatasetParseError("individual ids must be unique")
        if not np.all(np.isfinite(scores)):
            row = int(np.argwhere(~np.isfinite(scores))[0][0])
            raise DatasetParseError(f"non-finite score for individual {ids[row]}")

        outside = (scores < bounds[0]) | (scores > bounds[1])
        if np.any(outside):
            row, col = np.argwhere(outside)[0]
            raise ScoreRangeError(
                f"score {scores[row, col]} of individual {ids[row]} at time "
                f"{self.grid.times[col]} is outside {bounds}"
            )

        object.__setattr__(self, "_index", {id_: i for i, id_ in enumerate(ids)})

    @property
    def n_individuals(self) -> int:
        return len(self.ids)

    def index_of(self, individual_id: str) -> int:
        try:
            return self._index[str(individual_id)]
        except KeyError:
            raise UnknownIndividualError(f"unknown individual {individual_id}")

    def trajectory(self, individual_id: str) -> IndividualTrajectory:
        i = self.index_of(individual_id)
        return IndividualTrajectory(
            id=self.ids[i], times=frozen_array(self.grid.times), scores=self.scores[i]
        )

    def equals(self, other: "LongitudinalDataset") -> bool:
        return (
            self.grid == other.grid
            and self.ids == other.ids
            and self.bounds == other.bounds
            and np.array_equal(self.scores, other.scores)
        )


@dataclass(frozen=True, eq=False)
class FittedModel:
    """K polynomial trajectory groups sharing one residual sd.

    coefficients[k] is in ascending power order; groups are sorted by their
    mean fitted value over the grid, so Group #1 is the lowest trajectory.
    """

    grid: TimeGrid
    degree: int
    mixing_proportions: np.ndarray
    coefficients: np.ndarray
    sigma: float
    log_likelihood: float
    n_individuals: int
    converged: bool = True
    iterations: int = 0
    seed: Optional[int] = None

    def __post_init__(self):
        pi = frozen_array(self.mixing_proportions)
        beta = frozen_array(np.atleast_2d(self.coefficients))
        object.__setattr__(self, "mixing_proportions", pi)
        object.__setattr__(self, "coefficients", beta)
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "log_likelihood", float(self.log_likelihood))

        if not 0 <= self.degree <= 3:
            raise ValueError(f"degree must be within 0..3, got {self.degree}")
        if pi.ndim != 1 or len(pi) < 1:
            raise ValueError("mixing proportions must be a non-empty vector")
        if beta.shape != (len(pi), self.degree + 1):
            raise ValueError(
                f"coefficients shape {beta.shape} does not match "
                f"K={len(pi)}, degree={self.degree}"
            )
        if np.any(pi <= 0) or abs(pi.sum() - 1.0) > 1e-9:
            raise ValueError(f"mixing proportions must be a positive simplex: {pi}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    @property
    def K(self) -> int:
        return len(self.mixing_proportions)

    @property
    def n_params(self) -> int:
        return self.K * (self.degree + 1) + (self.K - 1) + 1

    def check_group(self, g: int):
        if not 0 <= g < self.K:
            raise InvalidGroupError(f"group index {g} outside 0..{self.K - 1}")

    def group_values(self, times) -> np.ndarray:
        """fitted values, shape (K, len(times))"""
        t = np.asarray(times, dtype=float)
        return np.stack([P.polyval(t, beta) for beta in self.coefficients])

    def check_grid(self, data: LongitudinalDataset):
        if data.grid != self.grid:
            raise GridMismatchError(
                f"dataset grid {data.grid.times} differs from model grid {self.grid.times}"
            )

    def equals(self, other: "FittedModel") -> bool:
        return (
            self.grid == other.grid
            and self.degree == other.degree
            and np.array_equal(self.mixing_proportions, other.mixing_proportions)
            and np.array_equal(self.coefficients, other.coefficients)
            and self.sigma == other.sigma
            and self.log_likelihood == other.log_likelihood
            and self.n_individuals == other.n_individuals
            and self.converged == other.converged
            and self.iterations == other.iterations
            and self.seed == other.seed
        )


@dataclass(frozen=True, eq=False)
class PosteriorMatrix:
    ids: Tuple[str, ...]
    probs: np.ndarray
    modal: np.ndarray

    @classmethod
    def from_probs(cls, ids: Sequence[str], probs) -> "PosteriorMatrix":
        probs = np.asarray(probs, dtype=float)
        # argmax keeps the first maximum: ties go to the lowest group index
        return cls(ids=tuple(ids), probs=probs, modal=np.argmax(probs, axis=1))

    def __post_init__(self):
        object.__setattr__(self, "probs", frozen_array(self.probs))
        object.__setattr__(self, "modal", frozen_array(self.modal, dtype=int))
        if self.probs.ndim != 2 or self.probs.shape[0] != len(self.ids):
            raise ValueError(f"posterior shape {self.probs.shape} does not match ids")

    @property
    def N(self) -> int:
        return self.probs.shape[0]

    @property
    def K(self) -> int:
        return self.probs.shape[1]

    def modal_counts(self) -> np.ndarray:
        return np.bincount(self.modal, minlength=self.K)
