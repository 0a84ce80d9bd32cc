"""Symmetric component kernels and exact U-statistics by enumeration.

A kernel of degree ``k`` takes ``k`` observations ``(x, y)`` and returns a
real number.  Kernels here are symmetrized: the value is the average of a base
function over all ``k!`` orderings of the arguments.  :func:`u_statistic_naive`
averages a kernel over every unordered ``k``-subset of a segment and is the
reference every fast estimator is checked against.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .data import Dataset, Partition
from .exceptions import SegmentTooSmall

__all__ = [
    "ComponentKernel",
    "ComponentTable",
    "u_statistic_naive",
    "v_statistic_naive",
    "component_table",
    "PEARSON_KERNELS",
    "KENDALL_KERNEL",
    "SIRS_KERNEL",
    "DC_KERNELS",
]

MAX_DEGREE = 3


@dataclass(frozen=True)
class ComponentKernel:
    """Symmetrized kernel built from a base function of ``degree`` points.

    Calling the kernel with ``degree`` observations ``(x, y)`` returns the mean
    of ``base`` over all orderings of the arguments.
    """

    name: str
    degree: int
    base: Callable[..., float]

    def __post_init__(self):
        if not 1 <= self.degree <= MAX_DEGREE:
            raise ValueError(f"kernel degree must be in 1..{MAX_DEGREE}, got {self.degree}")

    def __call__(self, *points) -> float:
        if len(points) != self.degree:
            raise TypeError(
                f"kernel {self.name!r} takes {self.degree} observations, got {len(points)}"
            )
        if self.degree == 1:
            return float(self.base(*points))
        vals = [self.base(*perm) for perm in itertools.permutations(points)]
        return math.fsum(vals) / len(vals)

    evaluate = __call__


def _lt(a, b):
    return 1.0 if a < b else 0.0


# Pearson: degree-1 moments, theta = (E XY, E X, E Y, E X^2, E Y^2)
PEARSON_KERNELS = (
    ComponentKernel("xy", 1, lambda z: z[0] * z[1]),
    ComponentKernel("x", 1, lambda z: z[0]),
    ComponentKernel("y", 1, lambda z: z[1]),
    ComponentKernel("x2", 1, lambda z: z[0] * z[0]),
    ComponentKernel("y2", 1, lambda z: z[1] * z[1]),
)

# Kendall: E I(X < X') I(Y < Y')
KENDALL_KERNEL = ComponentKernel(
    "concordance", 2, lambda a, b: _lt(a[0], b[0]) * _lt(a[1], b[1])
)

# SIRS: X_1 X_2 I(Y_1 < Y_3) I(Y_2 < Y_3), third point is the anchor
SIRS_KERNEL = ComponentKernel(
    "sirs", 3, lambda a, b, c: a[0] * b[0] * _lt(a[1], c[1]) * _lt(b[1], c[1])
)

# Distance correlation components theta_1 .. theta_8
DC_KERNELS = (
    ComponentKernel("dydx", 2, lambda a, b: abs(a[1] - b[1]) * abs(a[0] - b[0])),
    ComponentKernel("dy", 2, lambda a, b: abs(a[1] - b[1])),
    ComponentKernel("dx", 2, lambda a, b: abs(a[0] - b[0])),
    ComponentKernel("dy_dx_anchor", 3, lambda a, b, c: abs(a[1] - c[1]) * abs(b[0] - c[0])),
    ComponentKernel("dy2", 2, lambda a, b: (a[1] - b[1]) ** 2),
    ComponentKernel("dy_dy_anchor", 3, lambda a, b, c: abs(a[1] - c[1]) * abs(b[1] - c[1])),
    ComponentKernel("dx2", 2, lambda a, b: (a[0] - b[0]) ** 2),
    ComponentKernel("dx_dx_anchor", 3, lambda a, b, c: abs(a[0] - c[0]) * abs(b[0] - c[0])),
)


def u_statistic_naive(xs, ys, kernel: ComponentKernel) -> float:
    """U-statistic of ``kernel`` over one segment, by full enumeration.

    Sums the kernel over all ``C(n, k)`` unordered index subsets in
    lexicographic order and divides by ``C(n, k)``.
    """
    xs = [float(v) for v in xs]
    ys = [float(v) for v in ys]
    n, k = len(xs), kernel.degree
    if len(ys) != n:
        raise ValueError("xs and ys differ in length")
    if n < k:
        raise SegmentTooSmall(f"segment smaller than kernel degree ({n} < {k})")
    pts = list(zip(xs, ys))
    total = math.fsum(
        kernel(*(pts[i] for i in idx)) for idx in itertools.combinations(range(n), k)
    )
    return total / math.comb(n, k)


def v_statistic_naive(xs, ys, kernel: ComponentKernel) -> float:
    """V-statistic: the kernel averaged over all ``n^k`` ordered index tuples."""
    xs = [float(v) for v in xs]
    ys = [float(v) for v in ys]
    n, k = len(xs), kernel.degree
    if len(ys) != n:
        raise ValueError("xs and ys differ in length")
    if n < 1:
        raise SegmentTooSmall("empty segment")
    pts = list(zip(xs, ys))
    total = math.fsum(
        kernel(*(pts[i] for i in idx)) for idx in itertools.product(range(n), repeat=k)
    )
    return total / n**k


@dataclass(frozen=True, eq=False)
class ComponentTable:
    """Local U-statistics ``values[j, h, l]`` and their segment means ``means[j, h]``."""

    values: np.ndarray
    means: np.ndarray
    kernel_names: tuple[str, ...]
    feature_names: tuple[str, ...]
    features: tuple[int, ...]

    @property
    def m(self) -> int:
        return self.values.shape[2]

    def to_dict(self):
        return {
            name: {
                kname: [float(v) for v in self.values[j, h]]
                for h, kname in enumerate(self.kernel_names)
            }
            for j, name in enumerate(self.feature_names)
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def segment_means(values):
    # fixed left-to-right reduction over the segment axis
    acc = values[..., 0].copy()
    for l in range(1, values.shape[-1]):
        acc += values[..., l]
    return acc / values.shape[-1]


def ordered_data(ds: Dataset, part: Partition, features=None):
    """Rows laid out segment by segment; features transposed to ``(q, N)``."""
    order, offsets = part.flat()
    cols = np.arange(ds.n_features) if features is None else np.asarray(features, dtype=np.int64)
    Xt = np.ascontiguousarray(ds.features[order][:, cols].T)
    y = np.ascontiguousarray(ds.response[order])
    return Xt, y, offsets


def _naive_values(Xt, y, offsets, kernels, statistic="u"):
    stat = v_statistic_naive if statistic == "v" else u_statistic_naive
    q, m = Xt.shape[0], len(offsets) - 1
    out = np.empty((q, len(kernels), m))
    for j in range(q):
        for l in range(m):
            lo, hi = offsets[l], offsets[l + 1]
            for h, kern in enumerate(kernels):
                out[j, h, l] = stat(Xt[j, lo:hi], y[lo:hi], kern)
    return out


def component_table(
    ds: Dataset,
    part: Partition,
    kernels,
    features: Sequence[int] | None = None,
    naive: bool = False,
    statistic: str = "u",
) -> ComponentTable:
    """Local U-statistics for every (feature, kernel, segment).

    Parameters
    ----------
    ds : Dataset
    part : Partition
    kernels : sequence of ComponentKernel, or a MeasureSpec
        A measure contributes its vectorized fast path unless ``naive``.
    features : sequence of int, optional
        Feature indices to evaluate; all by default.
    naive : bool
        Force enumeration with :func:`u_statistic_naive`.
    statistic : {"u", "v"}
        ``"v"`` computes V-statistics (classic plug-in sample moments) instead.
    """
    if statistic not in ("u", "v"):
        raise ValueError(f"statistic must be 'u' or 'v', got {statistic!r}")
    fast = getattr(kernels, "batch", None)
    kerns = tuple(getattr(kernels, "kernels", kernels))
    if part.n_rows != ds.n_rows:
        raise ValueError("partition does not match dataset size")
    kmax = max(k.degree for k in kerns)
    nmin = min(part.sizes)
    if statistic == "u" and nmin < kmax:
        raise SegmentTooSmall(
            f"segment smaller than kernel degree: smallest segment has {nmin} rows, "
            f"kernels need {kmax}"
        )
    Xt, y, offsets = ordered_data(ds, part, features)
    if fast is not None and not naive:
        values = fast(Xt, y, offsets, vstat=statistic == "v")
    else:
        values = _naive_values(Xt, y, offsets, kerns, statistic)
    feats = tuple(range(ds.n_features)) if features is None else tuple(int(j) for j in features)
    names = ds.names
    return ComponentTable(
        values,
        segment_means(values),
        tuple(k.name for k in kerns),
        tuple(names[j] for j in feats),
        feats,
    )
