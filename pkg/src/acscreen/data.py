"""Datasets, standardization and row partitions.

A :class:`Dataset` is an immutable ``N x p`` feature matrix plus a length-``N``
response.  A :class:`Partition` splits its rows into ``m`` disjoint segments
whose sizes differ by at most one.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import DataValidationError

__all__ = [
    "Dataset",
    "Partition",
    "StandardizationMoments",
    "load_csv",
    "standardize",
    "partition",
    "segment_sizes",
]

STD_EPS = 1e-12


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix ``features`` (``N x p``) and response ``response`` (``N``)."""

    features: np.ndarray
    response: np.ndarray
    feature_names: tuple[str, ...] | None = None
    response_name: str | None = None
    standardized: bool = False

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.response, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2:
            raise DataValidationError("features must be a 2-d array")
        if y.ndim != 1:
            raise DataValidationError("response must be a 1-d array")
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise DataValidationError(f"empty table: shape {X.shape}")
        if y.shape[0] != X.shape[0]:
            raise DataValidationError(
                f"response length {y.shape[0]} != number of rows {X.shape[0]}"
            )
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
            raise DataValidationError("data contain NaN or Inf")
        names = self.feature_names
        if names is not None:
            names = tuple(str(s) for s in names)
            if len(names) != X.shape[1]:
                raise DataValidationError("feature_names length does not match p")
        object.__setattr__(self, "features", _frozen(X))
        object.__setattr__(self, "response", _frozen(y))
        object.__setattr__(self, "feature_names", names)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def names(self) -> tuple[str, ...]:
        if self.feature_names is not None:
            return self.feature_names
        return tuple(f"x{j + 1}" for j in range(self.n_features))

    def with_features(self, features, standardized=None) -> "Dataset":
        return Dataset(
            features,
            self.response,
            self.feature_names,
            self.response_name,
            self.standardized if standardized is None else standardized,
        )


@dataclass(frozen=True)
class StandardizationMoments:
    """Per-feature mean and sample variance (divisor ``N - 1``)."""

    mean: np.ndarray
    variance: np.ndarray

    def apply(self, X):
        return (np.asarray(X, dtype=float) - self.mean) / np.sqrt(self.variance)


@dataclass(frozen=True, eq=False)
class Partition:
    """Disjoint cover of ``range(n_rows)`` by ``m`` segments."""

    n_rows: int
    segments: tuple[np.ndarray, ...]
    seed: int | None = None
    mode: str = "contiguous"

    @property
    def m(self) -> int:
        return len(self.segments)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.segments)

    def flat(self):
        """Row order with segments laid out back to back, and segment offsets."""
        order = np.concatenate(self.segments).astype(np.int64)
        offsets = np.zeros(self.m + 1, dtype=np.int64)
        offsets[1:] = np.cumsum(self.sizes)
        return order, offsets

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.n_rows == other.n_rows and len(self.segments) == len(
            other.segments
        ) and all(np.array_equal(a, b) for a, b in zip(self.segments, other.segments))


def _parse_float(cell, row, col):
    try:
        v = float(cell)
    except ValueError:
        raise DataValidationError(
            f"non-numeric cell {cell!r} at row {row}, column {col!r}"
        ) from None
    if not math.isfinite(v):
        raise DataValidationError(f"non-finite cell {cell!r} at row {row}, column {col!r}")
    return v


def load_csv(path, response_column: str | int) -> Dataset:
    """Read a comma-delimited numeric table with a header row.

    Parameters
    ----------
    path : path-like
        CSV file (UTF-8, header row required).
    response_column : str or int
        Column name, or 0-based column index, holding the response.  A string
        of digits that is not a header name is treated as an index.

    Returns
    -------
    Dataset
        Remaining columns become features, in file order.
    """
    path = Path(path)
    if not path.is_file():
        raise DataValidationError(f"input file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise DataValidationError(f"empty table: {path}")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if not body:
        raise DataValidationError(f"empty table: {path} has no data rows")

    if isinstance(response_column, str) and response_column in header:
        ycol = header.index(response_column)
    elif isinstance(response_column, int) or str(response_column).isdigit():
        ycol = int(response_column)
        if not 0 <= ycol < len(header):
            raise DataValidationError(f"response column not found: {response_column}")
    else:
        raise DataValidationError(f"response column not found: {response_column}")
    if len(header) < 2:
        raise DataValidationError("table needs a response column and at least one feature")

    values = np.empty((len(body), len(header)))
    for i, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise DataValidationError(
                f"row {i} has {len(r)} cells, header has {len(header)}"
            )
        for k, cell in enumerate(r):
            values[i - 2, k] = _parse_float(cell.strip(), i, header[k])

    feat_cols = [k for k in range(len(header)) if k != ycol]
    return Dataset(
        values[:, feat_cols],
        values[:, ycol],
        feature_names=tuple(header[k] for k in feat_cols),
        response_name=header[ycol],
    )


def _chunk_moments(X, bounds):
    # Chan et al. pairwise merge of (count, mean, M2), reduced in chunk order
    count = 0
    mean = np.zeros(X.shape[1])
    m2 = np.zeros(X.shape[1])
    for lo, hi in bounds:
        c = X[lo:hi]
        nb = hi - lo
        if nb == 0:
            continue
        mb = c.mean(axis=0)
        m2b = ((c - mb) ** 2).sum(axis=0)
        delta = mb - mean
        tot = count + nb
        mean = mean + delta * (nb / tot)
        m2 = m2 + m2b + delta**2 * (count * nb / tot)
        count = tot
    return mean, m2


def standardize(ds: Dataset, eps: float = STD_EPS, chunks: int = 1):
    """Center and scale every feature to sample mean 0 and variance 1.

    Moments are global (divisor ``N - 1``), reduced from ``chunks`` contiguous
    row blocks so the same numbers come out of a segment-wise pass.

    Returns
    -------
    (Dataset, StandardizationMoments)
    """
    X = ds.features
    N = ds.n_rows
    if N < 2:
        raise DataValidationError("standardization needs at least 2 rows")
    edges = np.linspace(0, N, max(1, min(chunks, N)) + 1).astype(int)
    mean, m2 = _chunk_moments(X, zip(edges[:-1], edges[1:]))
    var = m2 / (N - 1)
    bad = np.flatnonzero(var <= eps)
    if bad.size:
        name = ds.names[bad[0]]
        raise DataValidationError(
            f"feature {name!r} is near-constant (variance {var[bad[0]]:.3g}); cannot standardize"
        )
    moments = StandardizationMoments(mean, var)
    return ds.with_features(moments.apply(X), standardized=True), moments


def segment_sizes(n_rows: int, m: int) -> list[int]:
    """Equal split with the remainder spread one row per leading segment."""
    base, extra = divmod(n_rows, m)
    return [base + 1 if l < extra else base for l in range(m)]


def partition(ds: Dataset | int, m: int, seed: int | None = 0, mode: str = "contiguous") -> Partition:
    """Split rows into ``m`` segments.

    Parameters
    ----------
    ds : Dataset or int
        The data (or just its row count ``N``).
    m : int
        Number of segments, ``1 <= m <= N``.
    seed : int
        Seed for ``mode="random"``; ignored for contiguous splits.
    mode : {"contiguous", "random"}
        ``"random"`` shuffles row indices with ``numpy.random.default_rng(seed)``
        before splitting.
    """
    N = ds if isinstance(ds, (int, np.integer)) else ds.n_rows
    N = int(N)
    if isinstance(m, bool) or int(m) != m:
        raise DataValidationError(f"m must be an integer, got {m!r}")
    m = int(m)
    if m < 1:
        raise DataValidationError(f"m must be >= 1, got {m}")
    if m > N:
        raise DataValidationError(f"m = {m} exceeds the number of rows N = {N}")
    if mode in ("random", "random-shuffle", "shuffle"):
        idx = np.random.default_rng(seed).permutation(N)
        mode = "random"
    elif mode == "contiguous":
        idx = np.arange(N)
    else:
        raise DataValidationError(f"unknown partition mode {mode!r}")
    bounds = np.concatenate([[0], np.cumsum(segment_sizes(N, m))])
    segs = tuple(_frozen(idx[lo:hi], dtype=np.int64) for lo, hi in zip(bounds[:-1], bounds[1:]))
    return Partition(N, segs, seed if mode == "random" else None, mode)


def single_segment(ds: Dataset) -> Partition:
    return partition(ds, 1, mode="contiguous")

