"""Acceptance criteria, one test per criterion.

Each test records a ``PASS``/``FAIL`` line (shown in the pytest terminal
summary, or directly with ``python tests/test_acceptance.py``) before
asserting.
"""
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from nvbayes.bench import SweepConfig, run_mse_sweep
from nvbayes.bounds import conjugate_variance, crlb_exceedance, fisher_information, prior_variance, ps_variance
from nvbayes.calibration import calibrate
from nvbayes.config import load_config, rate_parameters
from nvbayes.dynamics import (
    ReadoutSchedule,
    build_rate_matrix,
    evolve_populations,
    readout_schedule,
    steady_state,
)
from nvbayes.estimators import (
    grid_posterior_batch,
    iter_updates,
    posterior_init,
    posterior_means,
    posterior_update_batch,
)
from nvbayes.photon import sample_trace
from nvbayes.priors import Prior
from nvbayes.rabi import SpinParameters, integrate_spin, propagate_spin, spin_drift
from oracles import random_rate_parameters, rk4

RESULTS = []


def check(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def base():
    return rate_parameters(load_config())


def random_schedule(rng, n):
    A = rng.uniform(-2.0, 20.0, n)
    B = rng.uniform(0.0, 20.0, n) + np.maximum(-A, 0.0)
    return ReadoutSchedule.from_coefficients(A, B)


def test_01_propagation_conservation_and_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    sets = random_rate_parameters(rng, 20)
    p0 = rng.dirichlet(np.ones(5), size=20)
    times = [0.0, 1.0, 10.0, 100.0, 1000.0, 2500.0, 5000.0, 10000.0]
    _, saved = rk4(sets, p0, 10000.0, 0.1, record=times)
    worst_sum = worst_err = 0.0
    for i, q in enumerate(sets):
        m = build_rate_matrix(q)
        for t in times:
            p = evolve_populations(m, p0[i], t)
            worst_sum = max(worst_sum, abs(p.sum() - 1.0))
            worst_err = max(worst_err, np.max(np.abs(p - saved[t][i])))
    elapsed = time.perf_counter() - start
    ok = worst_sum <= 1e-9 and worst_err <= 1e-8 and elapsed < 10
    check(1, "conservation and RK4 oracle", ok,
          f"max |sum-1|={worst_sum:.2e}, max |expm-RK4|={worst_err:.2e}, {elapsed:.1f}s")


def test_02_ps_versus_crlb():
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    worst_eq = 0.0
    for _ in range(1000):
        sched = random_schedule(rng, 1)
        if sched.A[0] == 0:
            continue
        rho = rng.uniform()
        crlb = 1.0 / fisher_information(sched, rho)
        worst_eq = max(worst_eq, abs(ps_variance(sched, rho) / crlb - 1.0))
    min_ratio = np.inf
    for _ in range(1000):
        sched = random_schedule(rng, int(rng.integers(2, 501)))
        rho = rng.uniform()
        ratio = ps_variance(sched, rho) * fisher_information(sched, rho)
        min_ratio = min(min_ratio, ratio)
    elapsed = time.perf_counter() - start
    ok = worst_eq <= 1e-12 and min_ratio > 1.0 and elapsed < 5
    check(2, "PS variance vs CRLB", ok,
          f"N=1 max rel diff={worst_eq:.1e}; min PS/CRLB over 1000 heterogeneous={min_ratio:.6f}; {elapsed:.2f}s")


def test_03_flat_and_jeffreys_variance():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(500):
        sched = random_schedule(rng, int(rng.integers(1, 300)))
        rho = rng.uniform()
        inv_info = 1.0 / np.sum(sched.A**2 / (sched.A * rho + sched.B))
        for prior in (Prior.flat(), Prior.jeffreys()):
            worst = max(worst, abs(prior_variance(sched, rho, prior) / inv_info - 1.0))
    check(3, "flat = Jeffreys = 1/I", worst <= 1e-12, f"max rel diff={worst:.1e} over 500 schedules")


def test_04_conjugate_exceedance_identity():
    rng = np.random.default_rng(4)
    info = 10 ** rng.uniform(-2, 6, 10_000)
    k = 10 ** rng.uniform(-2, 2, 10_000)
    worst = 0.0
    for i_, k_ in zip(info, k):
        crlb = 1.0 / i_
        s2 = crlb / k_
        target = (1.0 - 1.0 / (k_ + 1.0) ** 2) * crlb
        direct = crlb - conjugate_variance(i_, s2)
        worst = max(worst, abs(direct / target - 1.0), abs(crlb_exceedance(crlb, s2) / target - 1.0))
    quarter = conjugate_variance(250.0, 1.0 / 250.0) * 250.0
    ok = worst <= 1e-12 and abs(quarter - 0.25) <= 1e-12
    check(4, "conjugate exceedance identity", ok, f"max rel diff={worst:.1e}; k=1 ratio={quarter:.15f}")


def high_count_schedule(base):
    sched = readout_schedule(base, 600.0, 20.0)
    assert sched.means(0.5).min() >= 10
    return sched


def test_05_flat_bayes_attains_crlb(base):
    start = time.perf_counter()
    sched = high_count_schedule(base)
    trials = 10_000
    rng = np.random.default_rng(5)
    counts = rng.poisson(sched.means(0.5), size=(trials, len(sched)))
    grid, lw = grid_posterior_batch(counts, sched, Prior.flat(), 400)
    est = posterior_means(grid, lw)
    crlb = 1.0 / fisher_information(sched, 0.5)
    rel = np.var(est, ddof=1) / crlb - 1.0
    elapsed = time.perf_counter() - start
    ok = abs(rel) <= 0.15 and elapsed < 300
    check(5, "flat grid-Bayes variance vs CRLB", ok,
          f"var/CRLB-1={rel:+.3f} (min bin mean {sched.means(0.5).min():.0f}), {elapsed:.1f}s")


def test_06_conjugate_prior_beats_crlb(base):
    sched = high_count_schedule(base)
    trials, rho = 10_000, 0.5
    crlb = 1.0 / fisher_information(sched, rho)
    rng = np.random.default_rng(6)
    counts = rng.poisson(sched.means(rho), size=(trials, len(sched)))
    grid, lw = grid_posterior_batch(counts, sched, Prior.conjugate(rho, crlb), 400)
    mse = np.mean((posterior_means(grid, lw) - rho) ** 2)
    rel = mse / (crlb / 4) - 1.0
    ok = mse < crlb and abs(rel) <= 0.25
    check(6, "conjugate prior MSE below CRLB", ok, f"MSE/CRLB={mse / crlb:.3f}, MSE/(CRLB/4)-1={rel:+.3f}")


def test_07_readout_time_sweep_structure(base):
    cfg = SweepConfig("readout_time", [100, 200, 300, 400, 600, 800, 1200, 1600, 2400, 3200], base,
                      dt=1.0, trials_per_point=100, methods=("PS", "BayesFlat"), seed=1)
    summary = run_mse_sweep(cfg).summary
    ps_min = summary["PS.interior_minimum"]
    mono = summary["BayesFlat.non_increasing"]
    ok = ps_min != "none" and mono
    check(7, "readout-time sweep structure", ok, f"PS interior minimum at {ps_min} ns; Bayes non-increasing={mono}")


def test_08_dt_crossover(base):
    cfg = SweepConfig("dt", [1, 2, 5, 10, 20, 30, 50, 100, 150, 200, 300], base, dt=1.0,
                      readout_time=600.0, trials_per_point=100, methods=("PS", "BayesFlat"), seed=1)
    cross = run_mse_sweep(cfg).summary["BayesFlat.crossover_dt"]
    check(8, "bin-width crossover", cross != "none", f"Bayes MSE first exceeds PS at dt={cross} ns")


def test_09_batch_equals_sequential(base):
    rng = np.random.default_rng(9)
    full = readout_schedule(base, 600.0, 1.0)
    priors = (Prior.flat(), Prior.jeffreys(), Prior.conjugate(0.5, 0.01))
    worst = 0.0
    for i in range(100):
        n = int(rng.integers(1, 301))
        sched = full.truncate(n)
        trace = sample_trace(sched, rng.uniform(), [9, i])
        post = posterior_init(priors[i % 3], 200, sched)
        seq = post
        for seq in iter_updates(post, trace):
            pass
        batch = posterior_update_batch(post, trace.counts)
        finite = np.isfinite(batch.log_weights)
        assert np.array_equal(finite, np.isfinite(seq.log_weights))
        worst = max(worst, np.max(np.abs(seq.log_weights[finite] - batch.log_weights[finite])))
    check(9, "batch = sequential posterior", worst <= 1e-9, f"max |log-weight diff|={worst:.1e} over 100 traces")


def test_10_rabi_oracles():
    ideal = SpinParameters.from_mhz(5.11, t2_star=1e12, t1=1e15)
    p_pi = integrate_spin(ideal, ideal.pi_time).p1
    t1 = 1000.0
    idle = SpinParameters.from_mhz(0.0, t2_star=288.0, t1=t1)
    decay = max(abs(integrate_spin(idle, t).p1 - 0.5 * (1 + np.exp(-2 * t / t1))) for t in (50.0, 700.0, 3000.0))
    drift = 0.0
    for omega, delta, t2 in ((5.11, 0.0, 288.0), (3.0, 2.0, 100.0), (10.0, -4.0, 50.0)):
        p = SpinParameters.from_mhz(omega, t2, 1.03e6, detuning_mhz=delta)
        for t in np.linspace(0, 1000, 21):
            drift = max(drift, spin_drift(propagate_spin(p, t)))
    ok = abs(p_pi) <= 1e-6 and decay <= 1e-6 and drift <= 1e-9
    check(10, "Rabi oracles", ok, f"p1(pi)={p_pi:.1e}, T1 decay err={decay:.1e}, trace drift={drift:.1e}")


@pytest.mark.parametrize("tail", [1000.0, 4000.0])
def test_11_calibration_round_trip(base, tail):
    params = base.replace(lam=1.0)
    dt = 10.0
    excited = steady_state(build_rate_matrix(params))[2:4].sum()
    lam = tail / (excited * dt)
    sched = readout_schedule(params.replace(lam=lam), 5000.0, dt)
    lam_err = L_err = 0.0
    for seed in range(100):
        report = calibrate(sample_trace(sched, 1.0, [11, seed]), params)
        lam_err = max(lam_err, abs(report.lam / lam - 1.0))
        L_err = max(L_err, abs(report.L / params.L - 1.0))
    ok = lam_err <= 0.01 and L_err <= 0.05
    check(11, f"calibration round trip (tail {tail:.0f})", ok,
          f"max lambda err={lam_err:.2%}, max L err={L_err:.2%} over 100 seeds")


def test_12_cli_determinism(tmp_path):
    trace = tmp_path / "trace.csv"
    ref = tmp_path / "ref.csv"
    commands = {
        "simulate": ["simulate", "--rho", "0.6", "--seed", "5", "--out", str(trace)],
        "simulate-ref": ["simulate", "--rho", "1", "--seed", "6", "--dt", "10", "--readout-time", "5000",
                         "--lambda", "3500", "--out", str(ref)],
        "estimate-ps": ["estimate", "--trace", str(trace), "--method", "ps", "--seed", "5"],
        "estimate-bayes": ["estimate", "--trace", str(trace), "--prior", "jeffreys", "--seed", "5"],
        "estimate-conjugate": ["estimate", "--trace", str(trace), "--prior", "conjugate", "--seed", "5"],
        "estimate-closed-form": ["estimate", "--trace", str(trace), "--method", "closed-form", "--seed", "5"],
        "bounds": ["bounds", "--rho", "0.3", "--sigma0-sq", "0.002"],
        "rabi": ["rabi", "--t-max", "300", "--points", "7"],
        "calibrate": ["calibrate", "--trace", str(ref), "--dt", "10", "--readout-time", "5000"],
        "bench": ["bench", "--sweep", "readout_time", "--values", "100,400", "--trials", "10", "--dt", "5",
                  "--method", "ps,flat,jeffreys,conjugate", "--seed", "3"],
    }
    differing = []
    for name, argv in commands.items():
        outputs = []
        for _ in range(2):
            proc = subprocess.run([sys.executable, "-m", "nvbayes", *argv], capture_output=True)
            assert proc.returncode == 0, proc.stderr.decode()
            out_path = argv[argv.index("--out") + 1] if "--out" in argv else None
            outputs.append(Path(out_path).read_bytes() if out_path else proc.stdout)
        if outputs[0] != outputs[1]:
            differing.append(name)
    check(12, "CLI byte reproducibility", not differing,
          f"{len(commands) - len(differing)}/{len(commands)} paths identical" + (f"; differ: {differing}" if differing else ""))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
