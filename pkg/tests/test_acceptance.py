"""Acceptance criteria, one test per criterion.

Each test prints a ``CRITERION <id>: PASS|FAIL`` line with the measured
values (visible even when pytest captures output) and then asserts.  Run
``python3 tests/test_acceptance.py`` for the report without pytest.
"""

import math
import sys
import time

import numpy as np
import pytest
from scipy import stats

from cvinfer import datasets, dist, gpv, mslr, sim
from cvinfer.model import Dataset, ParamVector, constrained_theta, fit_mle, log_likelihood, \
    observed_info, score

Z975 = stats.norm.ppf(0.975)
GV_DRAWS = 100_000
GV_SEED = 42
SIM_SEED = 7
_CAP = None


@pytest.fixture(autouse=True)
def _grab_capture(pytestconfig):
    global _CAP
    _CAP = pytestconfig.pluginmanager.getplugin("capturemanager")
    yield
    _CAP = None


def report(cid, ok, detail):
    line = f"CRITERION {cid}: {'PASS' if ok else 'FAIL'}  {detail}"
    if _CAP is not None:
        with _CAP.global_and_fixture_disabled():
            print("\n" + line, flush=True)
    else:
        print(line, flush=True)
    return ok


def _within(got, want, tol):
    return all(abs(g - w) <= tol for g, w in zip(got, want))


def _fmt(pair, digits=4):
    return f"({pair[0]:.{digits}f}, {pair[1]:.{digits}f})"


# -- 1 ----------------------------------------------------------------------

def test_criterion_1_hospital_mslr():
    data = datasets.hospital()
    t0 = time.perf_counter()
    ci = mslr.ci_mslr(data, 0.95)
    elapsed = time.perf_counter() - t0
    want = (0.4748, 0.5988)
    got = (ci.lower, ci.upper)
    ok = _within(got, want, 5e-4) and elapsed < 1.0
    report(1, ok, f"MSLR 95% CI {_fmt(got, 5)} vs {want} +-5e-4; {elapsed:.3f}s")
    assert ok


def test_criterion_1_related_examples():
    # operation-level examples that share the published hospital interval
    data = datasets.hospital()
    fit = fit_mle(data)
    lo = mslr.r_star(0.4748, data, fit).r_star
    hi = mslr.r_star(0.5988, data, fit).r_star
    p1 = mslr.pvalue_mslr(data, 1.0, fit)
    checks = {
        "tau_hat in (0.4748, 0.5988)": 0.4748 < fit.tau_hat < 0.5988,
        "r*(0.4748) = 1.960 +-0.01": abs(lo - Z975) < 0.01,
        "r*(0.5988) = -1.960 +-0.01": abs(hi + Z975) < 0.01,
        "p(tau0=1.0) < 0.05": p1 < 0.05,
    }
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    report("1-related", ok, f"tau_hat={fit.tau_hat:.6f} r*(0.4748)={lo:.4f} "
           f"r*(0.5988)={hi:.4f} p(1.0)={p1:.4f}; failed: {failed or 'none'}")
    assert ok


# -- 2 ----------------------------------------------------------------------

def test_criterion_2_hospital_gv():
    data = datasets.hospital()
    want = {"GV1": ((-1.7855, 3.6561), 0.06), "GV2": ((0.4568, 1.1759), 0.03),
            "GV3": ((-0.5457, 2.2563), 0.05)}
    matched = {m: [] for m in want}
    details = []
    for variant in gpv.GV1Variant:
        cfg = gpv.PivotalConfig(GV_DRAWS, variant, GV_SEED)
        cis = gpv.gpv_cis(data, 0.95, cfg)
        for m, (target, tol) in want.items():
            got = (cis[m].lower, cis[m].upper)
            if _within(got, target, tol):
                matched[m].append(variant.value)
            details.append(f"{m}[{variant.value}]={_fmt(got)}")
    ok = all(matched.values())
    summary = "; ".join(f"{m} matches {v or 'no variant'}" for m, v in matched.items())
    report(2, ok, f"{summary} | " + " ".join(details))
    assert ok


# -- 3 ----------------------------------------------------------------------

BLOOD_TABLE = {
    "MSLR": {"rbc": (0.017, 0.022), "mcv": (0.033, 0.042), "hct": (0.039, 0.050),
             "wbc": (0.056, 0.071), "plt": (0.072, 0.092)},
    "GV1": {"rbc": (0.017, 0.022), "mcv": (0.034, 0.042), "hct": (0.039, 0.050),
            "wbc": (0.056, 0.071), "plt": (0.072, 0.092)},
    "GV2": {"rbc": (0.017, 0.022), "mcv": (0.033, 0.041), "hct": (0.039, 0.049),
            "wbc": (0.056, 0.071), "plt": (0.071, 0.090)},
    "GV3": {"rbc": (0.017, 0.022), "mcv": (0.034, 0.041), "hct": (0.039, 0.050),
            "wbc": (0.056, 0.071), "plt": (0.072, 0.091)},
}


def test_criterion_3_blood():
    misses = []
    cells = 0
    for name in datasets.BLOOD:
        data = datasets.blood(name)
        got = {"MSLR": mslr.ci_mslr(data)}
        got.update(gpv.gpv_cis(data, 0.95, gpv.PivotalConfig(GV_DRAWS, seed=GV_SEED)))
        for m, table in BLOOD_TABLE.items():
            cells += 1
            rounded = (round(got[m].lower, 3), round(got[m].upper, 3))
            if rounded != table[name]:
                misses.append(f"{m}/{name} {_fmt((got[m].lower, got[m].upper))} "
                              f"vs {table[name]}")
    ok = not misses
    report(3, ok, f"{cells - len(misses)}/{cells} cells match at 3 decimals; "
           f"mismatches: {misses or 'none'}")
    assert ok


# -- 4-6: scaled simulation cells -------------------------------------------

def _cell(family, tau, methods, reps):
    sc = sim.SimScenario(family=family, n=(4, 4, 4), location=sim.LOCATIONS[3], tau=tau,
                         reps=reps, methods=methods, master_seed=SIM_SEED)
    return sim.run_study(sc).stats


def test_criterion_4_normal_coverage():
    t0 = time.perf_counter()
    a = _cell("normal", 0.1, ("MSLR",), 2000)["MSLR"]
    b = _cell("normal", 0.3, ("GV1",), 2000)["GV1"]
    elapsed = time.perf_counter() - t0
    ok = (abs(a.coverage - 0.950) <= 0.015 and abs(a.expected_length - 0.108) <= 0.010
          and b.coverage >= 0.99 and elapsed < 600)
    report(4, ok, f"tau=0.1 MSLR CP={a.coverage:.4f} EL={a.expected_length:.4f} "
           f"(fail {a.failures}); tau=0.3 GV1 CP={b.coverage:.4f}; {elapsed:.0f}s")
    assert ok


def test_criterion_5_weibull_coverage():
    a = _cell("weibull", 0.1, ("MSLR",), 2000)["MSLR"]
    b = _cell("weibull", 0.3, ("MSLR",), 2000)["MSLR"]
    ok = abs(a.coverage - 0.900) <= 0.020 and abs(b.coverage - 0.962) <= 0.015
    report(5, ok, f"tau=0.1 MSLR CP={a.coverage:.4f} (0.900+-0.020); "
           f"tau=0.3 MSLR CP={b.coverage:.4f} (0.962+-0.015)")
    assert ok


def test_criterion_6_ordering():
    st = _cell("normal", 0.2, ("MSLR", "SLR"), 5000)
    gap_m = abs(st["MSLR"].coverage - 0.95)
    gap_s = abs(st["SLR"].coverage - 0.95)
    ok = gap_m < gap_s
    report(6, ok, f"CP MSLR={st['MSLR'].coverage:.4f} SLR={st['SLR'].coverage:.4f}; "
           f"|gap| {gap_m:.4f} < {gap_s:.4f}")
    assert ok


# -- 7: property suites -----------------------------------------------------

def _random_data(rng):
    k = int(rng.integers(1, 6))
    mu = rng.uniform(0.5, 20.0, k)
    tau = rng.uniform(0.05, 0.4)
    return Dataset.from_groups([np.abs(m + tau * m * rng.standard_normal(int(rng.integers(2, 12))))
                                + 1e-3 for m in mu])


def _prop_score_zero(rng):
    worst = 0.0
    for _ in range(100):
        data = _random_data(rng)
        th = constrained_theta(rng.uniform(0.02, 2.0), data)
        worst = max(worst, np.max(np.abs(score(th, data)[1:]) * th.mu / data.n))
    return worst < 1e-6, f"score-zero {worst:.1e}"


def _prop_fd(rng):
    worst_s = worst_j = 0.0
    for _ in range(100):
        data = _random_data(rng)
        x = np.r_[rng.uniform(0.05, 0.8), data.mean * rng.uniform(0.7, 1.3, data.k)]
        f = lambda y: log_likelihood(ParamVector.from_array(y), data)
        g = lambda y: score(ParamVector.from_array(y), data)
        hs = 1e-6 * np.maximum(1.0, np.abs(x))
        E = np.diag(hs)
        fd_s = np.array([(f(x + e) - f(x - e)) / (2 * h) for e, h in zip(E, hs)])
        fd_j = -np.column_stack([(g(x + e) - g(x - e)) / (2 * h) for e, h in zip(E, hs)])
        s = g(x)
        j = observed_info(ParamVector.from_array(x), data)
        worst_s = max(worst_s, np.max(np.abs(s - fd_s)) / np.max(np.abs(fd_s)))
        worst_j = max(worst_j, np.max(np.abs(j - fd_j)) / np.max(np.abs(fd_j)))
    return worst_s < 1e-5 and worst_j < 1e-4, f"FD score {worst_s:.1e} info {worst_j:.1e}"


def _prop_scale(data):
    other = data.scaled([0.001, 17.0, 3.5, 1e4])
    fa, fb = fit_mle(data), fit_mle(other)
    diffs = [abs(fa.tau_hat - fb.tau_hat)]
    for t in (0.4, 0.7, 1.3):
        diffs.append(abs(mslr.slr_r(t, data, fa) - mslr.slr_r(t, other, fb)))
        diffs.append(abs(mslr.r_star(t, data, fa).r_star - mslr.r_star(t, other, fb).r_star))
    for f in (mslr.ci_mslr, mslr.ci_slr):
        a, b = f(data, 0.95, fa), f(other, 0.95, fb)
        diffs += [abs(a.lower - b.lower), abs(a.upper - b.upper)]
    for m, ci in gpv.gpv_cis(data, 0.95, gpv.PivotalConfig(20000, seed=1)).items():
        o = gpv.gpv_ci(other, m, 0.95, gpv.PivotalConfig(20000, seed=1))
        diffs += [abs(ci.lower - o.lower), abs(ci.upper - o.upper)]
    worst = max(diffs)
    return worst < 1e-8, f"scale {worst:.1e}"


def _prop_sufficiency(data):
    summ = Dataset.from_summaries(data.n.astype(int), data.mean, data.sd)
    worst = 0.0
    for f in (mslr.ci_mslr, mslr.ci_slr):
        a, b = f(data), f(summ)
        worst = max(worst, abs(a.lower - b.lower), abs(a.upper - b.upper))
    return worst < 1e-9, f"raw-vs-summary {worst:.1e}"


def _prop_parallel():
    scs = [sim.SimScenario("normal", (4, 4, 4), (20, 10, 10), 0.2, reps=40, gpv_draws=500,
                           methods=sim.ALL_METHODS, master_seed=SIM_SEED),
           sim.SimScenario("weibull", (4, 5, 6), (20, 10, 10), 0.3, reps=40, gpv_draws=500,
                           methods=sim.ALL_METHODS, master_seed=SIM_SEED)]
    one = sim.emit_table([(s, sim.run_study(s, threads=1)) for s in scs]).encode()
    eight = sim.emit_table([(s, sim.run_study(s, threads=8)) for s in scs]).encode()
    return one == eight, f"1-vs-8 threads {'identical' if one == eight else 'DIFFER'}"


def _prop_at_mle(data):
    fit = fit_mle(data)
    r = mslr.slr_r(fit.tau_hat, data, fit)
    q = mslr.q_statistic(fit.tau_hat, data, fit)
    return r == 0 and abs(q) < 1e-8, f"r(tau_hat)={r:.1e} Q(tau_hat)={q:.1e}"


def _prop_residuals():
    worst = 0.0
    for data in [datasets.hospital()] + [datasets.blood(m) for m in datasets.BLOOD]:
        fit = fit_mle(data)
        ci = mslr.ci_mslr(data, 0.95, fit)
        worst = max(worst, abs(mslr.r_star(ci.lower, data, fit).r_star - Z975),
                    abs(mslr.r_star(ci.upper, data, fit).r_star + Z975))
    return worst < 1e-6, f"endpoint residual {worst:.1e}"


def _prop_weibull():
    worst = max(abs(dist.weibull_cv(dist.weibull_shape_for_cv(t)) - t)
                for t in np.linspace(0.05, 0.9, 86))
    return worst < 1e-10, f"weibull round-trip {worst:.1e}"


def test_criterion_7_properties():
    rng = np.random.default_rng(2024)
    hosp = datasets.hospital()
    results = [_prop_score_zero(rng), _prop_fd(rng), _prop_scale(hosp), _prop_sufficiency(hosp),
               _prop_parallel(), _prop_at_mle(hosp), _prop_residuals(), _prop_weibull()]
    ok = all(r[0] for r in results)
    report(7, ok, "; ".join(f"{d} {'ok' if p else 'FAIL'}" for p, d in results))
    assert ok


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
