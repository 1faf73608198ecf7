"""Model-selection diagnostics and the ascending-K model scan.

BIC uses the number of individuals as sample size. The model-level APPA is
the minimum over groups; per-group values are always kept.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.config import MIN_GROUP_PCT, SCAN_MAX_GROUPS, SCAN_MIN_GROUPS
from app.errors import DegenerateFitError, EmptyGroupError, FitError, InsufficientDataError
from app.gbtm import FitConfig, fit_em
from app.log import LOG
from app.models import FittedModel, LongitudinalDataset, PosteriorMatrix

STATUS_OK = "ok"
STATUS_FAILED = "failed"


def n_params(K: int, degree: int) -> int:
    """K polynomials, K - 1 free mixing proportions and one sigma"""
    return K * (degree + 1) + (K - 1) + 1


def bic(log_likelihood: float, n_params: int, n: int) -> float:
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    return n_params * math.log(n) - 2 * log_likelihood


def sabic(log_likelihood: float, n_params: int, n: int) -> float:
    """BIC with the sample size adjusted to (n + 2) / 24"""
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    return n_params * math.log((n + 2) / 24) - 2 * log_likelihood


def appa(post: PosteriorMatrix) -> Tuple[List[float], float]:
    """Average posterior probability of assignment, per group and model-level (min)"""
    per_group = []
    for k in range(post.K):
        members = post.modal == k
        if not np.any(members):
            raise EmptyGroupError(k)
        per_group.append(float(post.probs[members, k].mean()))

    return per_group, min(per_group)


def smallest_group_pct(post: PosteriorMatrix) -> float:
    if post.N < 1:
        raise ValueError("posterior matrix has no individual")
    return 100.0 * int(post.modal_counts().min()) / post.N


@dataclass(frozen=True)
class FitDiagnostics:
    K: int
    n_params: int
    bic: float
    sabic: float
    # NaN for a group without modal member
    appa_per_group: Tuple[float, ...]
    appa_model: float
    smallest_group_pct: float
    excluded_by_size_rule: bool
    log_likelihood: float = float("nan")
    status: str = STATUS_OK
    error: str = ""

    @classmethod
    def failed(cls, K: int, degree: int, error: str) -> "FitDiagnostics":
        nan = float("nan")
        return cls(
            K=K,
            n_params=n_params(K, degree),
            bic=nan,
            sabic=nan,
            appa_per_group=(),
            appa_model=nan,
            smallest_group_pct=nan,
            excluded_by_size_rule=False,
            status=STATUS_FAILED,
            error=error,
        )


def diagnose(
    model: FittedModel, post: PosteriorMatrix, min_group_pct: float = MIN_GROUP_PCT
) -> FitDiagnostics:
    k_params = model.n_params
    try:
        per_group, model_level = appa(post)
    except EmptyGroupError as e:
        LOG.d("K=%s: %s", model.K, e)
        per_group = [
            float(post.probs[post.modal == k, k].mean()) if np.any(post.modal == k) else float("nan")
            for k in range(post.K)
        ]
        model_level = float("nan")

    pct = smallest_group_pct(post)
    return FitDiagnostics(
        K=model.K,
        n_params=k_params,
        bic=bic(model.log_likelihood, k_params, post.N),
        sabic=sabic(model.log_likelihood, k_params, post.N),
        appa_per_group=tuple(per_group),
        appa_model=model_level,
        smallest_group_pct=pct,
        excluded_by_size_rule=pct < min_group_pct,
        log_likelihood=model.log_likelihood,
    )


@dataclass(frozen=True)
class ScanResult:
    degree: int
    rows: Tuple[FitDiagnostics, ...]
    candidate_set: Tuple[int, ...]
    recommended_by_bic: Optional[int]
    # fitted models of every successful row, by K
    fits: Dict[int, Tuple[FittedModel, PosteriorMatrix]] = field(default_factory=dict, repr=False)

    def row(self, K: int) -> FitDiagnostics:
        for r in self.rows:
            if r.K == K:
                return r
        raise KeyError(K)


def scan_models(
    data: LongitudinalDataset,
    degree: int,
    config: FitConfig = None,
    k_min: int = SCAN_MIN_GROUPS,
    k_max: int = SCAN_MAX_GROUPS,
    min_group_pct: float = MIN_GROUP_PCT,
) -> ScanResult:
    """Fit K = k_min, k_min + 1, ... and stop after the first K violating the size rule.

    The violating K is still reported. A K whose fit fails is reported as
    failed and the scan goes on. If every K fails, raise DegenerateFitError.
    """
    config = config or FitConfig()
    if k_min < 1:
        raise ValueError(f"k_min must be >= 1, got {k_min}")
    if k_max < k_min:
        raise ValueError(f"k_max ({k_max}) must be >= k_min ({k_min})")
    if data.n_individuals <= k_min:
        raise InsufficientDataError(
            f"need more individuals than groups: N={data.n_individuals}, K={k_min}"
        )

    rows = []
    fits = {}
    for K in range(k_min, k_max + 1):
        try:
            model, post = fit_em(data, K, degree, config)
        except FitError as e:
            LOG.w("scan K=%s failed: %s", K, e)
            rows.append(FitDiagnostics.failed(K, degree, str(e)))
            continue

        diag = diagnose(model, post, min_group_pct)
        rows.append(diag)
        fits[K] = (model, post)
        LOG.d(
            "scan K=%s: BIC %s, smallest group %.1f%%, APPA %s",
            K,
            diag.bic,
            diag.smallest_group_pct,
            diag.appa_model,
        )

        if diag.excluded_by_size_rule:
            LOG.i("K=%s violates the %s%% size rule, stop scan", K, min_group_pct)
            break

    if not fits:
        raise DegenerateFitError(
            f"every fit from K={k_min} to K={k_max} failed: " + rows[-1].error
        )

    candidates = tuple(r.K for r in rows if r.status == STATUS_OK and not r.excluded_by_size_rule)
    recommended = None
    if candidates:
        # lowest BIC, ties to the smaller K
        recommended = min(candidates, key=lambda K: (next(r.bic for r in rows if r.K == K), K))

    return ScanResult(
        degree=degree,
        rows=tuple(rows),
        candidate_set=candidates,
        recommended_by_bic=recommended,
        fits=fits,
    )


def fit_index_table(scan: ScanResult) -> List[dict]:
    """one dict per scan row, the columns of the fit-indices report"""
    k_top = max((len(r.appa_per_group) for r in scan.rows), default=0)
    table = []
    for r in scan.rows:
        row = {
            "K": r.K,
            "smallest_group_pct": r.smallest_group_pct,
            "bic": r.bic,
            "sabic": r.sabic,
            "appa_model": r.appa_model,
        }
        for k in range(k_top):
            row[f"appa_g{k + 1}"] = r.appa_per_group[k] if k < len(r.appa_per_group) else None
        row["excluded"] = r.excluded_by_size_rule
        row["status"] = r.status
        table.append(row)
    return table
