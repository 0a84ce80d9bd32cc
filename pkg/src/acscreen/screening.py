"""Retained feature sets and screening-accuracy metrics."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .aggregation import EstimateVector

__all__ = [
    "ScreenResult",
    "MetricsReport",
    "threshold_screen",
    "top_k_screen",
    "oracle_threshold",
    "evaluate_repetitions",
    "lower_median",
    "rmse",
]


@dataclass(frozen=True, eq=False)
class ScreenResult:
    """Sorted 0-based indices of retained features, with the rule that made them."""

    retained: tuple[int, ...]
    gamma: float
    rule: str
    estimates: EstimateVector | None = None


def threshold_screen(est: EstimateVector, gamma: float) -> ScreenResult:
    """Keep ``{j : values[j] >= gamma}``, skipping degenerate features."""
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    keep = (est.values >= gamma) & ~est.degenerate
    return ScreenResult(tuple(int(j) for j in np.flatnonzero(keep)), float(gamma), "threshold", est)


def top_k_screen(est: EstimateVector, k: int) -> ScreenResult:
    """Keep the ``k`` largest estimates; ties go to the lower index.

    Degenerate features rank below every valid one.
    """
    p = est.p
    if not 1 <= k <= p:
        raise ValueError(f"k must be in 1..{p}, got {k}")
    # stable sort on (-value) keeps lower indices first among ties
    key = np.where(est.degenerate, np.inf, -est.values)
    order = np.argsort(key, kind="stable")[:k]
    gamma = float(est.values[order[-1]])
    return ScreenResult(tuple(sorted(int(j) for j in order)), gamma, "top-k", est)


def oracle_threshold(centralized: EstimateVector, true_active: Iterable[int], rho: float) -> float:
    """``rho * min_{j in active} centralized[j]``, used only to score simulations."""
    active = sorted(set(int(j) for j in true_active))
    if not active:
        raise ValueError("true active set is empty")
    if not 0 < rho <= 1:
        raise ValueError(f"rho must be in (0, 1], got {rho}")
    bad = [j for j in active if centralized.degenerate[j]]
    if bad:
        raise ValueError(f"active feature(s) {bad} have degenerate centralized estimates")
    return float(rho * min(centralized.values[j] for j in active))


def lower_median(values: Sequence[float]) -> float:
    """Median; for an even count, the lower of the two middle order statistics."""
    v = sorted(values)
    if not v:
        raise ValueError("median of an empty sequence")
    return v[(len(v) - 1) // 2]


METRIC_COLUMNS = ("SSR", "MS", "Std(MS)", "PSR", "FDR")


@dataclass(frozen=True)
class MetricsReport:
    ssr: float
    ms: float
    std_ms: float
    psr: float
    fdr: float
    sizes: tuple[int, ...] = ()
    psrs: tuple[float, ...] = ()
    fdrs: tuple[float, ...] = ()
    retained_sets: tuple[tuple[int, ...], ...] = field(default=(), repr=False)

    @property
    def T(self) -> int:
        return len(self.sizes)

    def row(self) -> dict:
        return dict(zip(METRIC_COLUMNS, (self.ssr, self.ms, self.std_ms, self.psr, self.fdr)))

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(METRIC_COLUMNS)
        w.writerow([repr(float(v)) for v in self.row().values()])
        return out.getvalue()

    def to_json(self, **kw) -> str:
        d = self.row()
        d.update(sizes=list(self.sizes), psrs=list(self.psrs), fdrs=list(self.fdrs),
                 retained_sets=[list(s) for s in self.retained_sets])
        return json.dumps(d, **kw)


def evaluate_repetitions(results: Sequence, true_active: Iterable[int]) -> MetricsReport:
    """SSR, median model size, its sample SD, median PSR and median FDR.

    ``results`` holds :class:`ScreenResult` objects or plain index collections.
    An empty retained set has FDR 0.
    """
    truth = set(int(j) for j in true_active)
    if not results:
        raise ValueError("no repetitions to evaluate")
    sets = [set(r.retained if isinstance(r, ScreenResult) else r) for r in results]
    sizes = [len(s) for s in sets]
    hits = [truth <= s for s in sets]
    psrs = [len(truth & s) / len(truth) if truth else 1.0 for s in sets]
    fdrs = [len(s - truth) / len(s) if s else 0.0 for s in sets]
    std = float(np.std(sizes, ddof=1)) if len(sizes) > 1 else 0.0
    return MetricsReport(
        ssr=sum(hits) / len(sets),
        ms=float(lower_median(sizes)),
        std_ms=std,
        psr=float(lower_median(psrs)),
        fdr=float(lower_median(fdrs)),
        sizes=tuple(sizes),
        psrs=tuple(psrs),
        fdrs=tuple(fdrs),
        retained_sets=tuple(tuple(sorted(s)) for s in sets),
    )


def rmse(estimates: Sequence[float], truth: float = 0.0) -> float:
    """Root mean squared deviation of replicated estimates from ``truth``."""
    v = np.asarray(list(estimates), dtype=float)
    if v.size == 0:
        raise ValueError("rmse of an empty list")
    return math.sqrt(float(np.mean((v - truth) ** 2)))


def rmse_se(estimates: Sequence[float], truth: float = 0.0) -> float:
    """Delta-method standard error of :func:`rmse`."""
    sq = (np.asarray(list(estimates), dtype=float) - truth) ** 2
    r = math.sqrt(float(sq.mean()))
    if sq.size < 2 or r == 0.0:
        return 0.0
    return float(sq.std(ddof=1) / math.sqrt(sq.size) / (2.0 * r))
