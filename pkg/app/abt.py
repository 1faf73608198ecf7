"""Area between trajectories (ABT).

The area between two curves over [t0, t1] is the integral of |f_a - f_b|,
approximated by the composite trapezoid rule on equal-width segments. Areas
are always reported per grid interval (each interval gets the same number of
segments whatever its width) together with their total.
"""
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.integrate import trapezoid

from app.config import ABT_SEGMENTS
from app.errors import NumericError
from app.log import LOG
from app.models import FittedModel, LongitudinalDataset, PosteriorMatrix, TimeGrid

Curve = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CurveRef:
    """Either a fitted group polynomial or an individual's observed path"""

    kind: str  # "group" or "individual"
    key: Union[int, str]

    @property
    def label(self) -> str:
        if self.kind == "group":
            return f"Group #{self.key + 1}"
        return f"Individual #{self.key}"


@dataclass(frozen=True)
class AbtResult:
    curve_a: CurveRef
    curve_b: CurveRef
    grid: TimeGrid
    interval_areas: Tuple[float, ...]
    total: float
    segments_per_interval: int


@dataclass(frozen=True)
class PairSummary:
    mean: float
    sd: float
    min: float
    max: float


@dataclass(frozen=True)
class AbtDistribution:
    # unordered group pairs (a < b), lexicographic order
    pairs: Tuple[Tuple[int, int], ...]
    values: Dict[Tuple[int, int], Tuple[float, ...]]
    summaries: Dict[Tuple[int, int], PairSummary]
    bin_edges: Tuple[float, ...]
    counts: Dict[Tuple[int, int], Tuple[int, ...]]

    def n_values(self) -> int:
        return sum(len(v) for v in self.values.values())


def trapezoid_area(
    f_a: Curve, f_b: Curve, t0: float, t1: float, n_segments: int = ABT_SEGMENTS
) -> float:
    """Composite trapezoid approximation of the integral of |f_a - f_b| on [t0, t1].

    n_segments equal-width segments, i.e. n_segments + 1 curve evaluations.
    """
    if not t1 > t0:
        raise ValueError(f"empty interval [{t0}, {t1}]")
    if n_segments < 1:
        raise ValueError(f"n_segments must be >= 1, got {n_segments}")

    nodes = np.linspace(t0, t1, n_segments + 1)
    gap = np.abs(np.asarray(f_a(nodes), dtype=float) - np.asarray(f_b(nodes), dtype=float))
    if not np.all(np.isfinite(gap)):
        raise NumericError(f"non-finite curve value on [{t0}, {t1}]")

    return float(trapezoid(gap, nodes))


def _group_curve(model: FittedModel, g: int) -> Curve:
    model.check_group(g)
    beta = model.coefficients[g]
    return lambda t: P.polyval(t, beta)


def _abt(
    f_a: Curve,
    f_b: Curve,
    ref_a: CurveRef,
    ref_b: CurveRef,
    grid: TimeGrid,
    n_segments: int,
) -> AbtResult:
    areas = tuple(trapezoid_area(f_a, f_b, t0, t1, n_segments) for t0, t1 in grid.intervals())
    return AbtResult(
        curve_a=ref_a,
        curve_b=ref_b,
        grid=grid,
        interval_areas=areas,
        total=math.fsum(areas),
        segments_per_interval=n_segments,
    )


def group_pair_abt(
    model: FittedModel, g_a: int, g_b: int, n_segments: int = ABT_SEGMENTS
) -> AbtResult:
    """Areas between two fitted groups over every grid interval"""
    return _abt(
        _group_curve(model, g_a),
        _group_curve(model, g_b),
        CurveRef("group", g_a),
        CurveRef("group", g_b),
        model.grid,
        n_segments,
    )


def interval_abt(
    model: FittedModel, g_a: int, g_b: int, interval_index: int, n_segments: int = ABT_SEGMENTS
) -> float:
    """Area between two fitted groups within one grid interval"""
    intervals = model.grid.intervals()
    if not 0 <= interval_index < len(intervals):
        raise IndexError(f"interval index {interval_index} outside 0..{len(intervals) - 1}")

    t0, t1 = intervals[interval_index]
    return trapezoid_area(_group_curve(model, g_a), _group_curve(model, g_b), t0, t1, n_segments)


def individual_to_group_abt(
    data: LongitudinalDataset,
    individual_id: str,
    model: FittedModel,
    g: int,
    n_segments: int = ABT_SEGMENTS,
) -> AbtResult:
    """Areas between an individual's observed path and a fitted group"""
    model.check_grid(data)
    trajectory = data.trajectory(individual_id)
    return _abt(
        trajectory,
        _group_curve(model, g),
        CurveRef("individual", trajectory.id),
        CurveRef("group", g),
        model.grid,
        n_segments,
    )


def assigned_group_abts(
    data: LongitudinalDataset,
    model: FittedModel,
    post: PosteriorMatrix,
    n_segments: int = ABT_SEGMENTS,
) -> List[AbtResult]:
    """Every individual's areas to its own modal group, in dataset order"""
    model.check_grid(data)
    return [
        individual_to_group_abt(data, id_, model, int(g), n_segments)
        for id_, g in zip(post.ids, post.modal)
    ]


def _summarize(values: Sequence[float]) -> PairSummary:
    arr = np.asarray(values, dtype=float)
    return PairSummary(
        mean=float(arr.mean()),
        sd=float(arr.std(ddof=1)) if len(arr) > 1 else 0.0,
        min=float(arr.min()),
        max=float(arr.max()),
    )


def pairwise_distributions(model: FittedModel, n_segments: int = ABT_SEGMENTS) -> AbtDistribution:
    """Interval areas of every unordered group pair, their summaries and a shared histogram"""
    if model.K < 2:
        raise ValueError(f"pairwise distributions need at least 2 groups, got {model.K}")

    pairs = tuple(itertools.combinations(range(model.K), 2))
    values = {pair: group_pair_abt(model, *pair, n_segments).interval_areas for pair in pairs}

    all_values = np.concatenate([np.asarray(v) for v in values.values()])
    n_bins = max(10, math.ceil(math.sqrt(len(all_values))))
    top = float(all_values.max())
    # all curves identical: keep a valid bin range
    edges = np.linspace(0.0, top if top > 0 else 1.0, n_bins + 1)

    counts = {
        pair: tuple(int(c) for c in np.histogram(values[pair], bins=edges)[0]) for pair in pairs
    }
    LOG.d("ABT distributions for %s pairs, %s bins", len(pairs), n_bins)

    return AbtDistribution(
        pairs=pairs,
        values=values,
        summaries={pair: _summarize(values[pair]) for pair in pairs},
        bin_edges=tuple(float(e) for e in edges),
        counts=counts,
    )


def polynomial_gap_area(
    coef_a: Sequence[float], coef_b: Sequence[float], t0: float, t1: float
) -> float:
    """Exact integral of |p_a - p_b| over [t0, t1] (ascending-power coefficients).

    The difference polynomial is integrated piecewise between its real roots.
    """
    diff = P.polytrim(P.polysub(np.asarray(coef_a, float), np.asarray(coef_b, float)))
    if not np.any(diff):
        return 0.0

    breaks = [t0]
    if len(diff) > 1:
        for r in P.polyroots(diff):
            if abs(r.imag) < 1e-12 and t0 < r.real < t1:
                breaks.append(float(r.real))
    breaks.append(t1)
    breaks.sort()

    anti = P.polyint(diff)
    values = P.polyval(np.array(breaks), anti)
    return float(np.abs(np.diff(values)).sum())
