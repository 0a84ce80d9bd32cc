"""Acceptance criteria, each run at its stated tolerance.

Every test prints one ``PASS``/``FAIL`` line; the lines are collected into an
"acceptance criteria" section at the end of the pytest report.  Run directly
with ``python tests/test_acceptance.py`` for just the summary.
"""
import math
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from acscreen import fast  # noqa: E402
from acscreen.aggregation import acs_estimate, centralized_estimate  # noqa: E402
from acscreen.data import Dataset, partition  # noqa: E402
from acscreen.kernels import (  # noqa: E402
    DC_KERNELS,
    KENDALL_KERNEL,
    PEARSON_KERNELS,
    SIRS_KERNEL,
    u_statistic_naive,
)
from acscreen.simbench import (  # noqa: E402
    SimConfig,
    replicate_component_means,
    run_rmse_experiment,
    run_screening_experiment,
)

RESULTS = []


def report(label, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {label}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok


# 1. Pearson ACS coincides with the centralized estimate


def test_criterion_1_pearson_coincidence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    X = rng.standard_normal((900, 20))
    y = X[:, :3] @ np.array([1.0, -0.5, 0.25]) + rng.standard_normal(900)
    ds = Dataset(X, y)
    cent = centralized_estimate(ds, "pearson").values
    worst = 0.0
    for m in (1, 5, 15, 45):
        for mode in ("contiguous", "random"):
            acs = acs_estimate(ds, partition(ds, m, seed=m, mode=mode), "pearson").values
            worst = max(worst, float(np.max(np.abs(acs - cent))))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-10 and dt < 5
    assert report("1", ok, f"max |ACS - centralized| = {worst:.2e} (<= 1e-10), {dt:.2f}s (< 5s)")


# 2. Fast estimators equal naive enumeration


def test_criterion_2_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = 0.0
    for inst in range(200):
        n = int(rng.integers(3, 31))
        x, y = rng.standard_normal(n), rng.standard_normal(n)
        if inst % 4 == 0:  # include ties
            x, y = np.round(x), np.round(y)
        offsets = np.array([0, n])
        got = {
            "pearson": fast.pearson_table(x[None], y, offsets)[0, :, 0],
            "kendall": fast.kendall_table(x[None], y, offsets)[0, :, 0],
            "sirs": fast.sirs_table(x[None], y, offsets)[0, :, 0],
            "dc": fast.dc_table(x[None], y, offsets)[0, :, 0],
        }
        kerns = {"pearson": PEARSON_KERNELS, "kendall": (KENDALL_KERNEL,),
                 "sirs": (SIRS_KERNEL,), "dc": DC_KERNELS}
        for name, ks in kerns.items():
            ref = np.array([u_statistic_naive(x, y, k) for k in ks])
            scale = np.maximum(np.abs(ref), 1e-300)
            err = np.where(ref == 0, np.abs(got[name]), np.abs(got[name] - ref) / scale)
            worst = max(worst, float(err.max()))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-10 and dt < 60
    assert report("2", ok, f"max relative error over 200 instances = {worst:.2e} (<= 1e-10), {dt:.1f}s")


# 3. Component unbiasedness under independence


def test_criterion_3_component_unbiasedness():
    t0 = time.perf_counter()
    ok = True
    parts = []
    for name, truth in (("kendall", 0.25), ("sirs", 0.0)):
        reps = replicate_component_means(2700, 90, 500, name, seed=3)[:, 0]
        se = reps.std(ddof=1) / math.sqrt(len(reps))
        dev = abs(reps.mean() - truth)
        ok &= dev <= 3 * se
        parts.append(f"{name} mean {reps.mean():.3e} vs {truth} (|dev| = {dev / se:.2f} SE)")
    dt = time.perf_counter() - t0
    ok &= dt < 300
    assert report("3", ok, "; ".join(parts) + f"; {dt:.1f}s")


# 4. RMSE behaviour across m (one shared run)


@pytest.fixture(scope="module")
def rmse_run():
    t0 = time.perf_counter()
    res = run_rmse_experiment(N=2700, m_list=(45, 90, 180), T=500, seed=11, R=3)
    return res, time.perf_counter() - t0


def test_criterion_4i_ac_flat_in_m(rmse_run):
    res, dt = rmse_run
    ratios = {name: res.get(name, "AC", 180)["RMSE"] / res.get(name, "AC", 45)["RMSE"]
              for name in ("kendall", "sirs", "dc")}
    ok = all(r <= 1.2 for r in ratios.values()) and dt < 900
    detail = ", ".join(f"{k} {v:.3f}" for k, v in ratios.items())
    assert report("4(i)", ok, f"AC RMSE ratio m=180/m=45: {detail} (each <= 1.2); run {dt:.0f}s")


def test_criterion_4ii_sa_increasing(rmse_run):
    res, _ = rmse_run
    parts, ok = [], True
    for name in ("sirs", "dc"):
        r = [res.get(name, "SA", m)["RMSE"] for m in (45, 90, 180)]
        ok &= r[0] < r[1] < r[2]
        parts.append(f"{name} " + " < ".join(f"{v:.3e}" for v in r))
    assert report("4(ii)", ok, "SA RMSE strictly increasing: " + "; ".join(parts))


def test_criterion_4iii_racs_not_worse(rmse_run):
    res, _ = rmse_run
    bad = []
    for name in ("kendall", "sirs", "dc"):
        for m in (45, 90, 180):
            ac, rac = res.get(name, "AC", m), res.get(name, "rAC", m)
            if not rac["RMSE"] <= ac["RMSE"] + 2 * ac["SE"]:
                bad.append(f"{name} m={m}")
    assert report("4(iii)", not bad, "rAC <= AC + 2 SE at every m"
                  + (f"; violations: {bad}" if bad else ""))


# 5. Model (a) screening with Pearson and Kendall ACS


def test_criterion_5_model_a_acs():
    t0 = time.perf_counter()
    parts, ok = [], True
    for measure in ("pearson", "kendall"):
        cfg = SimConfig(model="a", N=1500, p=1500, m=15, measure=measure, T=30, rho=0.8,
                        seed=5, methods=("acs",))
        rep = run_screening_experiment(cfg).reports["acs"]
        ok &= rep.ssr >= 0.95 and rep.ms == 8 and rep.fdr == 0
        parts.append(f"{measure} SSR={rep.ssr:.2f} MS={rep.ms:g} FDR={rep.fdr:g}")
    dt = time.perf_counter() - t0
    ok &= dt < 1200
    assert report("5", ok, "; ".join(parts) + f" (need SSR>=0.95, MS=8, FDR=0); {dt:.0f}s")


# 6. SAS over-selects relative to ACS for DC


def test_criterion_6_sas_overselection():
    base = SimConfig(model="a", N=1500, p=300, m=30, measure="dc", T=10, rho=0.6, seed=6,
                     methods=("sas", "acs"))
    out_v = run_screening_experiment(base.with_(sas_local="v"))
    out_u = run_screening_experiment(base.with_(sas_local="u", methods=("sas",)))
    ms_sas, ms_acs = out_v.reports["sas"].ms, out_v.reports["acs"].ms
    ok = ms_sas >= 5 * ms_acs
    assert report("6", ok, f"median MS SAS={ms_sas:g} vs ACS={ms_acs:g} (need >= 5x); "
                  f"SAS with V-statistic local estimates; for reference the U-plug-in SAS "
                  f"gives MS={out_u.reports['sas'].ms:g}")


# 7. Sure-screening trend in N


def test_criterion_7_psr_trend():
    t0 = time.perf_counter()
    psr = []
    for N in (300, 600, 1200):
        cfg = SimConfig(model="b", N=N, p=1500, m=N // 60, measure="kendall", T=30, seed=7,
                        top_k=20, methods=("acs",))
        psr.append(run_screening_experiment(cfg).reports["acs"].psr)
    dt = time.perf_counter() - t0
    ok = psr[0] <= psr[1] <= psr[2] and psr[2] == 1.0 and dt < 600
    assert report("7", ok, f"median PSR at N=300,600,1200: {psr} (nondecreasing, 1.0 at 1200); {dt:.0f}s")


# 8. Determinism and thread invariance


def _cli(args, threads_env="2"):
    env = dict(os.environ, NUMBA_NUM_THREADS=threads_env)
    env.pop("ACSCREEN_THREADS", None)
    return subprocess.run([sys.executable, "-m", "acscreen", *args], env=env,
                          capture_output=True, text=True)


def _files(d):
    return {p.name: p.read_bytes() for p in sorted(Path(d).iterdir())}


def test_criterion_8_determinism(tmp_path):
    rng = np.random.default_rng(8)
    X = rng.standard_normal((400, 12))
    y = np.exp(X[:, 0]) - X[:, 5] + rng.standard_normal(400)
    data = tmp_path / "data.csv"
    with open(data, "w") as fh:
        fh.write("y," + ",".join(f"v{j}" for j in range(12)) + "\n")
        for i in range(400):
            fh.write(",".join(repr(float(v)) for v in (y[i], *X[i])) + "\n")

    problems = []
    commands = {
        "screen": ["screen", "--input", str(data), "--response", "y", "--measure", "dc",
                   "--m", "8", "--method", "racs", "--top-k", "4", "--seed", "3",
                   "--dump-components", "--no-timing"],
        "simulate": ["simulate", "--model", "b", "--measure", "sirs", "--N", "240", "--p", "40",
                     "--m", "4", "--T", "2", "--seed", "2", "--no-timing"],
        "rmse-bench": ["rmse-bench", "--N", "180", "--m-list", "3,6", "--T", "3",
                       "--measures", "kendall,dc", "--no-timing"],
    }
    for name, args in commands.items():
        out = tmp_path / name
        snaps = []
        for _ in range(2):
            proc = _cli(args + ["--output", str(out)])
            if proc.returncode != 0:
                problems.append(f"{name} exit {proc.returncode}: {proc.stderr.strip()[-200:]}")
                break
            snaps.append(_files(out))
        if len(snaps) == 2 and snaps[0] != snaps[1]:
            diff = [k for k in snaps[0] if snaps[0][k] != snaps[1].get(k)]
            problems.append(f"{name} rerun differs in {diff}")

    est = {}
    for threads in ("1", "2"):
        for measure in ("pearson", "kendall", "sirs", "dc"):
            out = tmp_path / f"t{threads}_{measure}"
            proc = _cli(["screen", "--input", str(data), "--response", "y", "--measure", measure,
                         "--m", "5", "--gamma", "0.01", "--threads", threads,
                         "--output", str(out)])
            if proc.returncode != 0:
                problems.append(f"threads={threads} {measure}: {proc.stderr.strip()[-200:]}")
                continue
            est[threads, measure] = (out / "estimates.csv").read_bytes()
    for measure in ("pearson", "kendall", "sirs", "dc"):
        if est.get(("1", measure)) != est.get(("2", measure)):
            problems.append(f"{measure} estimates differ between 1 and 2 threads")
    assert report("8", not problems, "byte-identical reruns of screen, simulate and rmse-bench; "
                  "estimates identical at 1 and 2 threads" + (f"; problems: {problems}" if problems else ""))


if __name__ == "__main__":
    code = pytest.main([__file__, "-q", "-p", "no:cacheprovider"])
    print("\n".join(RESULTS))
    sys.exit(code)
