"""Synthetic benchmarks: estimator accuracy under independence and screening
accuracy on the six regression models (a)-(f)."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .aggregation import (
    acs_estimate,
    centralized_estimate,
    prepare,
    racs_estimate,
    racs_partitions,
    sas_estimate,
)
from .data import Dataset, partition
from .kernels import component_table
from .measures import builtin_measure
from .screening import (
    MetricsReport,
    evaluate_repetitions,
    oracle_threshold,
    rmse,
    rmse_se,
    threshold_screen,
    top_k_screen,
)

log = logging.getLogger(__name__)

__all__ = [
    "SimConfig",
    "ScreeningOutcome",
    "gen_design",
    "gen_coefficients",
    "gen_response",
    "run_rmse_experiment",
    "run_screening_experiment",
    "ACTIVE",
    "PAPER_CONFIGS",
    "DESK_CONFIGS",
]

MODELS = ("a", "b", "c", "d", "e", "f")

# 0-based indices of the features each model's response depends on
ACTIVE = {
    "a": tuple(range(8)),
    "b": (0, 3, 6, 9),
    "c": (0, 3, 6, 9),
    "d": (0, 3, 6, 9),
    "e": (0, 3, 6, 9),
    "f": (0, 1, 11, 21),
}
N_COEF = {"a": 8, "b": 4, "c": 4, "d": 4, "e": 4, "f": 3}

PAPER_CONFIGS = {
    "a": dict(N=1500, p=1500, m=15, T=100),
    "b": dict(N=1200, p=1500, m=20, T=100),
    "c": dict(N=2400, p=2500, m=40, T=100),
    "d": dict(N=3600, p=3600, m=50, T=100),
    "e": dict(N=4800, p=4800, m=60, T=100),
    "f": dict(N=10000, p=10000, m=100, T=100),
}
DESK_CONFIGS = {
    "a": dict(N=1500, p=300, m=15, T=10),
    "b": dict(N=1200, p=300, m=20, T=10),
    "c": dict(N=1200, p=300, m=20, T=10),
    "d": dict(N=1200, p=300, m=20, T=10),
    "e": dict(N=1200, p=300, m=20, T=10),
    "f": dict(N=1000, p=300, m=10, T=10),
}

AR_RHO = 0.5


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def gen_design(N: int, p: int, cov: str = "identity", seed=None) -> np.ndarray:
    """``N x p`` Gaussian design, i.i.d. or AR(1) with ``cov(X_j, X_r) = 0.5^|j-r|``.

    The AR rows follow ``X_1 = e_1``, ``X_j = 0.5 X_{j-1} + sqrt(0.75) e_j``.
    """
    if p < 1 or N < 1:
        raise ValueError("N and p must be >= 1")
    E = _rng(seed).standard_normal((N, p))
    if cov == "identity":
        return E
    if cov not in ("ar", "ar1"):
        raise ValueError(f"unknown covariance {cov!r}")
    X = np.empty_like(E)
    X[:, 0] = E[:, 0]
    scale = np.sqrt(1.0 - AR_RHO**2)
    for j in range(1, p):
        X[:, j] = AR_RHO * X[:, j - 1] + scale * E[:, j]
    return X


def gen_coefficients(count: int, seed=None) -> np.ndarray:
    """``(-1)^W (2 + |V|)`` with ``W ~ Bernoulli(0.6)``, ``V ~ N(0, 1)``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = _rng(seed)
    W = rng.random(count) < 0.6
    V = rng.standard_normal(count)
    return np.where(W, -1.0, 1.0) * (2.0 + np.abs(V))


def gen_response(model: str, X, betas, seed=None, noise_scale: float = 1.0) -> np.ndarray:
    """Response for one of models (a)-(f) with ``N(0, noise_scale^2)`` noise."""
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    X = np.asarray(X, dtype=float)
    b = np.asarray(betas, dtype=float)
    need = max(ACTIVE[model]) + 1
    if X.shape[1] < need:
        raise ValueError(f"model ({model}) needs p >= {need}, got p = {X.shape[1]}")
    if b.shape[0] < N_COEF[model]:
        raise ValueError(f"model ({model}) needs {N_COEF[model]} coefficients")
    eps = noise_scale * _rng(seed).standard_normal(X.shape[0])
    x1, x4, x7, x10 = X[:, 0], X[:, 3], X[:, 6], (X[:, 9] if X.shape[1] > 9 else None)
    if model == "a":
        return X[:, :8] @ b[:8] + eps
    if model == "b":
        return b[0] * x1 + b[1] * x4 + b[2] * x7 + b[3] * x10 + eps
    if model == "c":
        return np.exp(b[0] * x1 + b[1] * x4 + b[2] * x7 + b[3] * x10 + eps)
    if model == "d":
        return b[0] * x1 + b[1] * x4 + np.exp(abs(b[2]) * x7 + abs(b[3]) * x10) + eps
    if model == "e":
        return b[0] * x1 + b[1] * x4**2 + b[2] * (x7 > 0) + b[3] * np.abs(x10) + eps
    return 2 * b[0] * X[:, 0] * X[:, 1] + 2 * b[1] * (X[:, 11] > 0) + 3 * b[2] * X[:, 21] + eps


def default_cov(model: str) -> str:
    return "identity" if model == "a" else "ar"


@dataclass(frozen=True)
class SimConfig:
    model: str = "a"
    N: int = 1500
    p: int = 300
    m: int = 15
    measure: str = "pearson"
    T: int = 10
    rho: float = 0.8
    R: int = 3
    seed: int = 0
    cov: str | None = None
    methods: tuple[str, ...] = ("sas", "acs", "racs")
    top_k: int | None = None
    sas_local: str = "u"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        for name in ("N", "p", "T", "m", "R"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        need = max(ACTIVE[self.model]) + 1
        if self.p < need:
            raise ValueError(f"model ({self.model}) needs p >= {need}, got p = {self.p}")
        if self.m > self.N:
            raise ValueError(f"m = {self.m} exceeds N = {self.N}")
        if self.top_k is None and not 0 < self.rho <= 1:
            raise ValueError("rho must be in (0, 1]")
        if self.top_k is not None and not 1 <= self.top_k <= self.p:
            raise ValueError("top_k must be in 1..p")
        bad = set(self.methods) - {"sas", "acs", "racs"}
        if bad:
            raise ValueError(f"unknown methods {sorted(bad)}")
        builtin_measure(self.measure)
        if self.sas_local not in ("u", "v"):
            raise ValueError("sas_local must be 'u' or 'v'")
        if self.cov is None:
            object.__setattr__(self, "cov", default_cov(self.model))

    @property
    def active(self) -> tuple[int, ...]:
        return ACTIVE[self.model]

    def with_(self, **kw) -> "SimConfig":
        return replace(self, **kw)


@dataclass
class ScreeningOutcome:
    config: SimConfig
    reports: dict[str, MetricsReport]
    time_n: dict[str, float]
    time_N: float
    skipped: list[tuple[int, str]] = field(default_factory=list)

    def rows(self):
        for method in self.config.methods:
            if method not in self.reports:
                continue
            r = self.reports[method].row()
            yield dict(model=self.config.model, m=self.config.m, measure=self.config.measure,
                       method=method.upper() if method != "racs" else "rACS", **r,
                       **{"Time^n": self.time_n[method], "Time^N": self.time_N})


def simulate_dataset(cfg: SimConfig, rng) -> Dataset:
    X = gen_design(cfg.N, cfg.p, cfg.cov, rng)
    betas = gen_coefficients(N_COEF[cfg.model], rng)
    y = gen_response(cfg.model, X, betas, rng)
    return Dataset(X, y)


def run_screening_experiment(cfg: SimConfig) -> ScreeningOutcome:
    """Repeat generate, estimate, screen ``cfg.T`` times and score each method.

    Repetition ``t`` draws its design, coefficients, noise and partitions from
    ``SeedSequence(cfg.seed).spawn(T)[t]``.  With ``cfg.top_k`` unset the
    threshold is ``rho`` times the smallest centralized estimate over the true
    active set; repetitions where that is not computable are skipped and logged.
    """
    spec = builtin_measure(cfg.measure)
    results = {k: [] for k in cfg.methods}
    t_n = {k: 0.0 for k in cfg.methods}
    t_N = 0.0
    skipped = []
    for t, child in enumerate(np.random.SeedSequence(cfg.seed).spawn(cfg.T)):
        rng = np.random.default_rng(child)
        ds = prepare(simulate_dataset(cfg, rng), spec)
        part_seed = int(rng.integers(2**31 - 1))

        if cfg.top_k is None:
            t0 = time.perf_counter()
            cent = centralized_estimate(ds, spec)
            t_N += time.perf_counter() - t0
            try:
                gamma = oracle_threshold(cent, cfg.active, cfg.rho)
                if not gamma > 0:
                    raise ValueError(f"oracle threshold {gamma} is not positive")
            except ValueError as exc:
                log.warning("repetition %d skipped: %s", t, exc)
                skipped.append((t, str(exc)))
                continue

        def screen(est):
            if cfg.top_k is not None:
                return top_k_screen(est, cfg.top_k)
            return threshold_screen(est, gamma)

        parts = racs_partitions(ds.n_rows, cfg.m, cfg.R if "racs" in cfg.methods else 1, part_seed)
        t0 = time.perf_counter()
        table = component_table(ds, parts[0], spec)
        t_table = time.perf_counter() - t0
        for method in cfg.methods:
            t0 = time.perf_counter()
            if method == "acs":
                est = acs_estimate(ds, parts[0], spec, table=table)
                extra = t_table
            elif method == "sas":
                if cfg.sas_local == "u":
                    est = sas_estimate(ds, parts[0], spec, table=table)
                    extra = t_table
                else:
                    est = sas_estimate(ds, parts[0], spec, local=cfg.sas_local)
                    extra = 0.0
            else:
                tables = [table] + [component_table(ds, q, spec) for q in parts[1:]]
                est = racs_estimate(ds, spec, cfg.m, len(tables), part_seed, tables=tables)
                extra = t_table
            t_n[method] += time.perf_counter() - t0 + extra
            results[method].append(screen(est))

    done = cfg.T - len(skipped)
    reports = {k: evaluate_repetitions(v, cfg.active) for k, v in results.items() if v}
    time_n = {k: (v / done if done else float("nan")) for k, v in t_n.items()}
    time_N = t_N / done if (done and cfg.top_k is None) else float("nan")
    return ScreeningOutcome(cfg, reports, time_n, time_N, skipped)


@dataclass
class RmseResult:
    rows: list[dict]
    estimates: dict[tuple[str, str, int], np.ndarray]

    def get(self, measure, method, m) -> dict:
        for r in self.rows:
            if (r["measure"], r["method"], r["m"]) == (measure, method, m):
                return r
        raise KeyError((measure, method, m))


def run_rmse_experiment(N: int = 2700, m_list=(45, 90, 180), T: int = 500,
                        measures=("kendall", "sirs", "dc"), seed: int = 0,
                        R: int = 3, sas_local: str = "u") -> RmseResult:
    """Accuracy of SA, AC and rAC estimators when ``X`` and ``Y`` are independent.

    Every repetition draws one ``N``-row sample of independent standard normal
    ``(Y, X)``; the true correlation is 0 for every measure, so RMSE is
    ``sqrt(mean(estimate^2))``.  All ``m`` and measures share that sample.  At
    ``m = 1`` only the centralized estimate is reported (as SA and AC).
    """
    m_list = [int(m) for m in m_list]
    specs = [builtin_measure(name) for name in measures]
    est = {}
    secs = {}

    def put(key, value, dt):
        est.setdefault(key, []).append(value)
        secs[key] = secs.get(key, 0.0) + dt

    for child in np.random.SeedSequence(seed).spawn(T):
        rng = np.random.default_rng(child)
        raw = Dataset(rng.standard_normal((N, 1)), rng.standard_normal(N))
        part_seeds = {m: int(rng.integers(2**31 - 1)) for m in m_list}
        for spec in specs:
            ds = prepare(raw, spec)
            for m in m_list:
                parts = racs_partitions(N, m, R if m > 1 else 1, part_seeds[m])
                t0 = time.perf_counter()
                table = component_table(ds, parts[0], spec)
                t_tab = time.perf_counter() - t0
                t0 = time.perf_counter()
                v = acs_estimate(ds, parts[0], spec, table=table).values[0]
                put((spec.name, "AC", m), v, t_tab + time.perf_counter() - t0)
                t0 = time.perf_counter()
                if sas_local == "u":
                    v = sas_estimate(ds, parts[0], spec, table=table).values[0]
                    dt = t_tab
                else:
                    v = sas_estimate(ds, parts[0], spec, local=sas_local).values[0]
                    dt = 0.0
                put((spec.name, "SA", m), v, dt + time.perf_counter() - t0)
                if m > 1:
                    t0 = time.perf_counter()
                    tables = [table] + [component_table(ds, q, spec) for q in parts[1:]]
                    v = racs_estimate(ds, spec, m, R, tables=tables).values[0]
                    put((spec.name, "rAC", m), v, t_tab + time.perf_counter() - t0)

    rows = []
    arrays = {}
    for (name, method, m), vals in est.items():
        a = np.asarray(vals)
        arrays[(name, method, m)] = a
        rows.append(dict(measure=name, method=method, m=m, RMSE=rmse(a), SE=rmse_se(a),
                         time=secs[(name, method, m)] / len(a)))
    return RmseResult(rows, arrays)


def replicate_component_means(N: int, m: int, T: int, measure: str, seed: int = 0,
                              standardize: bool = False) -> np.ndarray:
    """Segment-averaged components ``(T, s)`` over ``T`` independent-normal samples."""
    spec = builtin_measure(measure)
    out = np.empty((T, spec.s))
    for t, child in enumerate(np.random.SeedSequence(seed).spawn(T)):
        rng = np.random.default_rng(child)
        ds = Dataset(rng.standard_normal((N, 1)), rng.standard_normal(N))
        if standardize:
            ds = prepare(ds, spec)
        part = partition(ds, m, seed=int(rng.integers(2**31 - 1)), mode="random")
        out[t] = component_table(ds, part, spec).means[0]
    return out
