"""Group-based trajectory models.

A K-group model is a finite mixture of degree-d polynomial regressions on
time with Gaussian residuals and one residual sd shared by all groups. An
individual belongs to one group for all of its measurements. Parameters are
estimated by EM from several random starts; time (weeks) and scores are used
on their raw scale.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg
from scipy.special import logsumexp

from app.config import (
    DEFAULT_SEED,
    FIT_MAX_ITERATIONS,
    FIT_N_STARTS,
    FIT_REL_TOL,
    FIT_WORKERS,
    SIGMA_FLOOR,
)
from app.errors import DegenerateFitError, InsufficientDataError, InvalidDegreeError
from app.log import LOG
from app.models import FittedModel, LongitudinalDataset, PosteriorMatrix
from app.utils import make_rng

MAX_DEGREE = 3

# a group whose summed responsibility drops below this has collapsed
_MIN_GROUP_WEIGHT = 1e-10


@dataclass(frozen=True)
class FitConfig:
    n_starts: int = FIT_N_STARTS
    max_iterations: int = FIT_MAX_ITERATIONS
    rel_tol: float = FIT_REL_TOL
    sigma_floor: float = SIGMA_FLOOR
    seed: int = DEFAULT_SEED
    workers: int = FIT_WORKERS

    def __post_init__(self):
        if self.n_starts < 1:
            raise ValueError(f"n_starts must be >= 1, got {self.n_starts}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be > 0, got {self.rel_tol}")
        if not self.sigma_floor > 0:
            raise ValueError(f"sigma_floor must be > 0, got {self.sigma_floor}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class EmStartResult:
    start: int
    failed: bool
    reason: str = ""
    mixing_proportions: Optional[np.ndarray] = None
    coefficients: Optional[np.ndarray] = None
    sigma: float = float("nan")
    log_likelihood: float = float("-inf")
    converged: bool = False
    iterations: int = 0
    # log-likelihood after every iteration
    trace: Tuple[float, ...] = ()


def _check_degree(degree: int):
    if not 0 <= degree <= MAX_DEGREE:
        raise InvalidDegreeError(f"degree must be within 0..{MAX_DEGREE}, got {degree}")


def design_row(t: float, degree: int) -> np.ndarray:
    """(1, t, t^2, ..., t^degree)"""
    _check_degree(degree)
    return np.array([float(t) ** p for p in range(degree + 1)])


def design_matrix(times, degree: int) -> np.ndarray:
    _check_degree(degree)
    return np.vander(np.asarray(times, dtype=float), degree + 1, increasing=True)


def _squared_residuals(scores: np.ndarray, means: np.ndarray) -> np.ndarray:
    """sum over time of (y_it - mean_kt)^2, shape (N, K)"""
    return ((scores[:, None, :] - means[None, :, :]) ** 2).sum(axis=2)


def _log_joint(
    scores: np.ndarray, means: np.ndarray, mixing_proportions: np.ndarray, sigma: float
) -> np.ndarray:
    """log pi_k + log prod_t N(y_it; mean_kt, sigma), shape (N, K)"""
    n_times = scores.shape[1]
    ss = _squared_residuals(scores, means)
    log_density = -0.5 * n_times * np.log(2 * np.pi * sigma ** 2) - ss / (2 * sigma ** 2)
    return np.log(mixing_proportions) + log_density


def _model_log_joint(model: FittedModel, data: LongitudinalDataset) -> np.ndarray:
    model.check_grid(data)
    means = model.group_values(model.grid.times)
    return _log_joint(data.scores, means, model.mixing_proportions, model.sigma)


def log_likelihood(model: FittedModel, data: LongitudinalDataset) -> float:
    return float(logsumexp(_model_log_joint(model, data), axis=1).sum())


def posterior_probabilities(model: FittedModel, data: LongitudinalDataset) -> PosteriorMatrix:
    log_joint = _model_log_joint(model, data)
    # shift by the row maximum so the largest term is exp(0) = 1
    weights = np.exp(log_joint - log_joint.max(axis=1, keepdims=True))
    return PosteriorMatrix.from_probs(data.ids, weights / weights.sum(axis=1, keepdims=True))


def group_curves(model: FittedModel, times) -> np.ndarray:
    """fitted group values at arbitrary times, shape (K, len(times))"""
    return model.group_values(times)


def run_em(
    data: LongitudinalDataset,
    degree: int,
    responsibilities: np.ndarray,
    config: FitConfig,
    start: int = 0,
) -> EmStartResult:
    """EM from given initial responsibilities (N x K)"""
    scores = data.scores
    n, n_times = scores.shape
    x = design_matrix(data.grid.times, degree)
    gram = x.T @ x
    r = np.array(responsibilities, dtype=float)
    sigma2_floor = config.sigma_floor ** 2

    trace = []
    converged = False
    pi = beta = None
    sigma = float("nan")
    for _ in range(config.max_iterations):
        # M-step
        weight = r.sum(axis=0)
        if np.any(weight <= _MIN_GROUP_WEIGHT):
            group = int(np.argmin(weight))
            return EmStartResult(
                start, True, f"weight of group {group + 1} collapsed", trace=tuple(trace)
            )

        pi = weight / n
        # weighted normal equations: every individual shares the grid design,
        # so X'WX = n_k X'X and X'Wy = X' sum_i r_ik y_i
        rhs = (r.T @ scores) @ x
        try:
            beta = np.stack(
                [linalg.solve(weight[k] * gram, rhs[k], assume_a="pos") for k in range(len(pi))]
            )
        except (linalg.LinAlgError, ValueError) as e:
            return EmStartResult(start, True, f"singular design: {e}", trace=tuple(trace))

        means = beta @ x.T
        sigma2 = max(float((r * _squared_residuals(scores, means)).sum()) / (n * n_times), sigma2_floor)
        sigma = float(np.sqrt(sigma2))

        # E-step
        log_joint = _log_joint(scores, means, pi, sigma)
        log_norm = logsumexp(log_joint, axis=1)
        ll = float(log_norm.sum())
        if not np.isfinite(ll):
            return EmStartResult(start, True, "non-finite log-likelihood", trace=tuple(trace))
        r = np.exp(log_joint - log_norm[:, None])

        previous = trace[-1] if trace else None
        trace.append(ll)
        if previous is not None and ll - previous < config.rel_tol * max(
            abs(previous), np.finfo(float).tiny
        ):
            converged = True
            break

    return EmStartResult(
        start=start,
        failed=False,
        mixing_proportions=pi,
        coefficients=beta,
        sigma=sigma,
        log_likelihood=trace[-1],
        converged=converged,
        iterations=len(trace),
        trace=tuple(trace),
    )


def run_em_start(
    data: LongitudinalDataset, K: int, degree: int, config: FitConfig, start: int
) -> EmStartResult:
    """One EM start from per-individual random simplex responsibilities.

    The start draws from the substream (config.seed, start), so its result
    does not depend on which thread runs it or in which order.
    """
    rng = make_rng(config.seed, start)
    responsibilities = rng.dirichlet(np.ones(K), size=data.n_individuals)
    return run_em(data, degree, responsibilities, config, start)


def _relabel(result: EmStartResult, grid_times) -> Tuple[np.ndarray, np.ndarray]:
    """sort groups by mean fitted value over the grid, ascending"""
    x = design_matrix(grid_times, result.coefficients.shape[1] - 1)
    grid_means = (result.coefficients @ x.T).mean(axis=1)
    order = np.argsort(grid_means, kind="stable")
    return result.mixing_proportions[order], result.coefficients[order]


def fit_em(
    data: LongitudinalDataset, K: int, degree: int, config: FitConfig = None
) -> Tuple[FittedModel, PosteriorMatrix]:
    config = config or FitConfig()
    _check_degree(degree)
    if K < 1:
        raise InsufficientDataError(f"number of groups must be >= 1, got {K}")
    if data.n_individuals <= K:
        raise InsufficientDataError(
            f"need more individuals than groups: N={data.n_individuals}, K={K}"
        )
    if data.grid.n_points <= degree:
        raise DegenerateFitError(
            f"degree {degree} needs at least {degree + 1} time points, grid has {data.grid.n_points}"
        )

    LOG.d(
        "fit K=%s degree=%s on N=%s with %s starts, seed %s",
        K,
        degree,
        data.n_individuals,
        config.n_starts,
        config.seed,
    )

    def _start(s):
        return run_em_start(data, K, degree, config, s)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            results = list(executor.map(_start, range(config.n_starts)))
    else:
        results = [_start(s) for s in range(config.n_starts)]

    best = None
    for res in results:
        if res.failed:
            LOG.w("K=%s start %s failed: %s", K, res.start, res.reason)
            continue

        LOG.d(
            "K=%s start %s: logL %s after %s iterations, converged %s",
            K,
            res.start,
            res.log_likelihood,
            res.iterations,
            res.converged,
        )
        # strict comparison: ties keep the lowest start index
        if best is None or res.log_likelihood > best.log_likelihood:
            best = res

    if best is None:
        raise DegenerateFitError(f"degenerate fit: all {config.n_starts} starts failed for K={K}")

    pi, beta = _relabel(best, data.grid.times)
    model = FittedModel(
        grid=data.grid,
        degree=degree,
        mixing_proportions=pi,
        coefficients=beta,
        sigma=best.sigma,
        log_likelihood=best.log_likelihood,
        n_individuals=data.n_individuals,
        converged=best.converged,
        iterations=best.iterations,
        seed=config.seed,
    )
    return model, posterior_probabilities(model, data)
