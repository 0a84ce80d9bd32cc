"""Per-feature correlation estimates from segment-level U-statistics.

``acs``
    Average each component's local U-statistics over segments, then apply
    ``g`` once.
``sas``
    Apply ``g`` to each segment's own components, then average the local
    correlation estimates.
``racs``
    Like ``acs`` but component means are further averaged over ``R``
    independent random partitions before ``g``.
``centralized``
    ``acs`` on a single segment holding all rows.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, Partition, partition, standardize
from .exceptions import DegenerateDenominator
from .kernels import ComponentTable, component_table
from .measures import MeasureSpec, builtin_measure

__all__ = [
    "EstimateVector",
    "acs_estimate",
    "sas_estimate",
    "racs_estimate",
    "centralized_estimate",
    "estimate",
    "prepare",
    "METHODS",
]

METHODS = ("acs", "sas", "racs", "centralized")


@dataclass(frozen=True, eq=False)
class EstimateVector:
    """Correlation estimates for every feature.

    Features whose aggregator hit a degenerate denominator carry the sentinel
    value 0.0, ``degenerate[j] = True`` and a message in ``errors[j]``; they
    are never retained by screening.
    """

    method: str
    measure: str
    m: int
    values: np.ndarray
    R: int = 1
    seed: int | None = None
    feature_names: tuple[str, ...] = ()
    degenerate: np.ndarray | None = None
    errors: dict = field(default_factory=dict)
    dropped: np.ndarray | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if self.degenerate is None:
            object.__setattr__(self, "degenerate", np.zeros(v.shape, dtype=bool))
        if not self.feature_names:
            object.__setattr__(
                self, "feature_names", tuple(f"x{j + 1}" for j in range(v.shape[0]))
            )

    @property
    def p(self) -> int:
        return self.values.shape[0]

    def rows(self):
        for j in range(self.p):
            yield {
                "index": j,
                "feature": self.feature_names[j],
                "estimate": repr(float(self.values[j])),
                "method": self.method,
                "m": self.m,
                "flag": "degenerate" if self.degenerate[j] else "",
            }

    def to_csv(self, fh=None) -> str | None:
        """Write ``index, feature, estimate, method, m, flag`` rows."""
        out = io.StringIO() if fh is None else fh
        w = csv.DictWriter(
            out, ["index", "feature", "estimate", "method", "m", "flag"], lineterminator="\n"
        )
        w.writeheader()
        w.writerows(self.rows())
        return out.getvalue() if fh is None else None

    def to_dict(self):
        return {
            "method": self.method,
            "measure": self.measure,
            "m": self.m,
            "R": self.R,
            "seed": self.seed,
            "features": list(self.feature_names),
            "values": [float(v) for v in self.values],
            "degenerate": [int(j) for j in np.flatnonzero(self.degenerate)],
            "errors": {str(k): v for k, v in sorted(self.errors.items())},
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def prepare(ds: Dataset, spec: MeasureSpec) -> Dataset:
    """Standardize globally when the measure needs it."""
    if spec.requires_standardized_features and not ds.standardized:
        ds, _ = standardize(ds)
    return ds


def _resolve(spec):
    return builtin_measure(spec) if isinstance(spec, str) else spec


def _apply_g(spec, means):
    p = means.shape[0]
    values = np.zeros(p)
    degenerate = np.zeros(p, dtype=bool)
    errors = {}
    for j in range(p):
        try:
            values[j] = spec.g(means[j])
        except DegenerateDenominator as exc:
            degenerate[j] = True
            errors[j] = str(exc)
    return values, degenerate, errors


def _from_table(table: ComponentTable, spec, method, seed, R=1, names=()):
    values, degenerate, errors = _apply_g(spec, table.means)
    return EstimateVector(
        method, spec.name, table.m, values, R, seed, names, degenerate, errors
    )


def acs_estimate(ds: Dataset, part: Partition, spec, naive=False, table=None) -> EstimateVector:
    """Aggregated correlation estimate ``g(mean_l U^l_1, ..., mean_l U^l_s)``.

    Parameters
    ----------
    ds : Dataset
    part : Partition
    spec : MeasureSpec or str
    naive : bool
        Use enumeration instead of the fast estimators.
    table : ComponentTable, optional
        Reuse precomputed local U-statistics for ``(ds, part)``.
    """
    spec = _resolve(spec)
    ds = prepare(ds, spec)
    if table is None:
        table = component_table(ds, part, spec, naive=naive)
    return _from_table(table, spec, "acs", part.seed, names=ds.names)


def sas_estimate(ds: Dataset, part: Partition, spec, naive=False, table=None,
                 local: str = "u") -> EstimateVector:
    """Simple average of per-segment plug-in estimates ``g(U^l_1, ..., U^l_s)``.

    With ``local="v"`` each segment's estimate plugs in V-statistics instead,
    i.e. the classic biased sample version of the measure (for DC this is the
    usual sample distance correlation).  A degenerate segment is dropped from
    its feature's average and counted in ``dropped``; a feature with no usable
    segment is flagged degenerate.
    """
    spec = _resolve(spec)
    ds = prepare(ds, spec)
    if table is None:
        table = component_table(ds, part, spec, naive=naive, statistic=local)
    vals = table.values
    p, _, m = vals.shape
    values = np.zeros(p)
    degenerate = np.zeros(p, dtype=bool)
    dropped = np.zeros(p, dtype=np.int64)
    errors = {}
    for j in range(p):
        acc = 0.0
        used = 0
        for l in range(m):
            try:
                acc += spec.g(vals[j, :, l])
                used += 1
            except DegenerateDenominator as exc:
                dropped[j] += 1
                errors.setdefault(j, f"segment {l}: {exc}")
        if used:
            values[j] = acc / used
        else:
            degenerate[j] = True
    return EstimateVector(
        "sas", spec.name, m, values, 1, part.seed, ds.names, degenerate, errors, dropped
    )


def racs_partitions(n_rows: int, m: int, R: int, seed: int):
    """The ``R`` random partitions used by :func:`racs_estimate`."""
    return [partition(n_rows, m, seed=seed + r, mode="random") for r in range(R)]


def racs_estimate(ds: Dataset, spec, m: int, R: int, seed: int = 0, naive=False,
                  partitions=None, tables=None) -> EstimateVector:
    """Reinforced aggregate: component means averaged over ``R`` partitions.

    Partition ``r`` is the random split seeded with ``seed + r``; ``R = 1``
    therefore equals :func:`acs_estimate` on ``partition(ds, m, seed, "random")``.
    """
    spec = _resolve(spec)
    if R < 1:
        raise ValueError(f"R must be >= 1, got {R}")
    ds = prepare(ds, spec)
    if tables is None:
        if partitions is None:
            partitions = racs_partitions(ds.n_rows, m, R, seed)
        tables = [component_table(ds, part, spec, naive=naive) for part in partitions]
    acc = tables[0].means.copy()
    for t in tables[1:]:
        acc += t.means
    means = acc / len(tables)
    values, degenerate, errors = _apply_g(spec, means)
    return EstimateVector(
        "racs", spec.name, m, values, len(tables), seed, ds.names, degenerate, errors
    )


def centralized_estimate(ds: Dataset, spec, naive=False) -> EstimateVector:
    """Full-sample estimate: ``acs`` with one segment."""
    spec = _resolve(spec)
    est = acs_estimate(ds, partition(ds, 1), spec, naive=naive)
    return EstimateVector(
        "centralized", est.measure, 1, est.values, 1, None, est.feature_names,
        est.degenerate, est.errors,
    )


def estimate(ds: Dataset, spec, method: str = "acs", m: int = 1, seed: int = 0,
             R: int = 3, mode: str = "random", naive: bool = False,
             sas_local: str = "u") -> EstimateVector:
    """Dispatch on ``method`` in ``{"acs", "sas", "racs", "centralized"}``."""
    if method == "centralized":
        return centralized_estimate(ds, spec, naive=naive)
    if method == "racs":
        return racs_estimate(ds, spec, m, R, seed, naive=naive)
    part = partition(ds, m, seed=seed, mode=mode)
    if method == "acs":
        return acs_estimate(ds, part, spec, naive=naive)
    if method == "sas":
        return sas_estimate(ds, part, spec, naive=naive, local=sas_local)
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")

