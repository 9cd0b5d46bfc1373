"""Acceptance criteria, one test each, at their stated tolerances.

Every test records a one-line PASS/FAIL verdict in RESULTS; conftest.py prints
them in the terminal summary.
"""

import math
import time

import numpy as np
import pytest

from coupled_cavities import cli
from coupled_cavities.entanglement import (
    cat_concurrence,
    eof_from_concurrence,
    qubit_block,
    wootters_concurrence,
)
from coupled_cavities.evolution import (
    CatSpec,
    ModelParams,
    SuperpositionSpec,
    bell_state_vector,
    cat_density_matrix,
    cat_initial_state,
    cat_trajectory,
    closed_form_bell_state,
    closed_form_single_photon,
    closed_form_superposition,
    evolved_bell_state,
    kraus_evolve,
    lindblad_trajectory,
    superposition_initial_state,
)
from coupled_cavities.fock import default_cutoff, fock_ket, ket_to_dm, linear_entropy, partial_trace
from coupled_cavities.nonlocality import (
    TSIRELSON,
    WIGNER_SCALE,
    BellSettings,
    CatWignerEvaluator,
    ParityEvaluator,
    bell_measure,
    maximize_bell,
    wigner_discrepancy,
    wigner_numeric,
)

RESULTS: dict[int, str] = {}

KT_GRID = np.linspace(0.0, 2.0, 50)
THETAS = (0.0, math.pi / 3, math.pi / 2, math.pi)


def record(number, passed, detail, elapsed):
    verdict = "PASS" if passed else "FAIL"
    line = f"[{verdict}] criterion {number:2d}: {detail} ({elapsed:.1f} s)"
    RESULTS[number] = line
    print(line)
    return passed


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def test_criterion_01_single_photon_concurrence():
    worst = 0.0
    with Timer() as clock:
        for ratio in (1.0, 6.0):
            p = ModelParams(k=1.0, gamma=ratio)
            rho0 = ket_to_dm(fock_ket(1, 0, 1))
            for kt in KT_GRID:
                c = wootters_concurrence(kraus_evolve(rho0, p, kt))
                worst = max(worst, abs(c - abs(math.exp(-2 * kt) * math.sin(2 * ratio * kt))))
    ok = worst <= 1e-9 and clock.elapsed < 1.0
    assert record(1, ok, f"single-photon concurrence, max deviation {worst:.2e} (tol 1e-9)", clock.elapsed)


def test_criterion_02_linear_entropy():
    worst = 0.0
    with Timer() as clock:
        for ratio in (1.0, 6.0):
            p = ModelParams(k=1.0, gamma=ratio)
            for kt in KT_GRID:
                x = math.exp(-2 * kt) * math.cos(ratio * kt) ** 2
                m = linear_entropy(partial_trace(closed_form_single_photon(p, kt), "A"))
                worst = max(worst, abs(m - 2 * x * (1 - x)))
    ok = worst <= 1e-10 and clock.elapsed < 1.0
    assert record(2, ok, f"linear entropy of mode A, max deviation {worst:.2e} (tol 1e-10)", clock.elapsed)


def test_criterion_03_superposition_pure_and_mixed():
    pure_vs_mixed = formula = 0.0
    with Timer() as clock:
        for ratio in (1.0, 6.0):
            p = ModelParams(omega=1.0, k=1.0, gamma=ratio)
            for theta in THETAS:
                for kt in KT_GRID:
                    cp = wootters_concurrence(closed_form_superposition(SuperpositionSpec(theta, 0.3, "pure"), p, kt))
                    cm = wootters_concurrence(closed_form_superposition(SuperpositionSpec(theta, 0.3, "mixed"), p, kt))
                    ref = abs(math.exp(-2 * kt) * math.cos(theta / 2) ** 2 * math.sin(2 * ratio * kt))
                    pure_vs_mixed = max(pure_vs_mixed, abs(cp - cm))
                    formula = max(formula, abs(cp - ref), abs(cm - ref))
    ok = pure_vs_mixed <= 1e-10 and formula <= 1e-9 and clock.elapsed < 2.0
    detail = f"superposition, pure vs mixed {pure_vs_mixed:.2e} (tol 1e-10), vs formula {formula:.2e} (tol 1e-9)"
    assert record(3, ok, detail, clock.elapsed)


def test_criterion_04_bell_state_decay():
    worst = spread = 0.0
    with Timer() as clock:
        for index in (1, 2):
            p = ModelParams(k=1.0, gamma=0.0)
            for kt in KT_GRID:
                c = wootters_concurrence(qubit_block(evolved_bell_state(index, p, kt)))
                worst = max(worst, abs(c - math.exp(-4 * kt)))
        for index in (3, 4):
            for kt in KT_GRID:
                cs = [wootters_concurrence(qubit_block(evolved_bell_state(index, ModelParams(k=1.0, gamma=g), kt))) for g in (0.0, 3.0, 6.0)]
                worst = max(worst, *(abs(c - math.exp(-2 * kt)) for c in cs))
                spread = max(spread, max(cs) - min(cs))
    ok = worst <= 1e-9 and spread <= 1e-9 and clock.elapsed < 2.0
    detail = f"Bell-state decay, max deviation {worst:.2e}, coupling dependence {spread:.2e} (tol 1e-9)"
    assert record(4, ok, detail, clock.elapsed)


def _fock_scenarios(p):
    # (label, initial state, closed form at time t or None) at n_max = 2, which holds every state exactly
    n = 2
    cases = [("single photon", ket_to_dm(fock_ket(1, 0, n)), lambda t: closed_form_single_photon(p, t, n))]
    for theta in THETAS:
        for kind in ("pure", "mixed"):
            spec = SuperpositionSpec(theta, 0.3, kind)
            rho0 = superposition_initial_state(spec, n)
            cases.append((f"superposition {kind} theta={theta:.3f}", rho0, lambda t, s=spec: closed_form_superposition(s, p, t, n)))
    for index in (1, 2, 3, 4):
        closed = None if index in (1, 2) else (lambda t, i=index: closed_form_bell_state(i, p, t, n))
        cases.append((f"Bell {index}", ket_to_dm(bell_state_vector(index, n)), closed))
    return cases


def test_criterion_05_channel_equivalence():
    kts = (0.1, 0.2, 0.5, 1.0)
    p = ModelParams(omega=0.5, k=1.0, gamma=6.0)
    worst, where = 0.0, ""
    with Timer() as clock:
        for label, rho0, closed in _fock_scenarios(p):
            rk = lindblad_trajectory(rho0, p, kts, dt_max=1e-3)
            for kt, r in zip(kts, rk):
                k = kraus_evolve(rho0, p, kt)
                devs = [np.max(np.abs(k - r))]
                if closed is not None:
                    c = closed(kt)
                    devs += [np.max(np.abs(k - c)), np.max(np.abs(c - r))]
                if max(devs) > worst:
                    worst, where = max(devs), f"{label} kt={kt}"
        # Bell 1 and 2 with coupling leave the two-qubit space; with gamma = 0 they have a closed form
        p0 = ModelParams(omega=0.5, k=1.0, gamma=0.0)
        for index in (1, 2):
            rho0 = ket_to_dm(bell_state_vector(index, 2))
            rk = lindblad_trajectory(rho0, p0, kts, dt_max=1e-3)
            for kt, r in zip(kts, rk):
                k, c = kraus_evolve(rho0, p0, kt), closed_form_bell_state(index, p0, kt)
                dev = max(np.max(np.abs(k - r)), np.max(np.abs(k - c)), np.max(np.abs(c - r)))
                if dev > worst:
                    worst, where = dev, f"Bell {index} uncoupled kt={kt}"
        n_max = 25
        for theta in (0.0, math.pi):
            spec = CatSpec(1.0, math.pi / 2, theta)
            rho0 = cat_initial_state(spec, n_max)
            rk = lindblad_trajectory(rho0, p, kts, dt_max=1e-3)
            for kt, r in zip(kts, rk):
                k = kraus_evolve(rho0, p, kt)
                c = cat_density_matrix(cat_trajectory(spec, p, kt), n_max)
                dev = max(np.max(np.abs(k - r)), np.max(np.abs(k - c)), np.max(np.abs(c - r)))
                if dev > worst:
                    worst, where = dev, f"cat theta={theta:.3f} kt={kt}"
    ok = worst <= 1e-5 and clock.elapsed < 120.0
    detail = f"Kraus vs closed form vs RK4, max deviation {worst:.2e} at {where} (tol 1e-5, cat n_max=25)"
    assert record(5, ok, detail, clock.elapsed)


def test_criterion_06_wigner_parity_identity():
    with Timer() as clock:
        p = ModelParams(k=1.0, gamma=6.0)
        traj = cat_trajectory(CatSpec(1.0, math.pi / 2, math.pi), p, 0.2)
        rho = cat_density_matrix(traj, default_cutoff(1.0))
        grid = np.linspace(-1.0, 1.0, 5)
        mu, nu = np.meshgrid(grid, grid, indexing="ij")
        identity = float(np.max(np.abs(wigner_numeric(rho, mu, nu) - WIGNER_SCALE * ParityEvaluator(rho)(mu, nu))))
        dev = wigner_discrepancy(traj, rho, grid, grid)
        # away from phi = pi/2, theta in {0, pi} the expanded closed form is reported, not used
        other = cat_trajectory(CatSpec(1.0, math.pi / 3, 0.0), p, 0.2)
        report = wigner_discrepancy(other, cat_density_matrix(other, default_cutoff(1.0)), grid, grid)
        numeric = maximize_bell(ParityEvaluator(rho), radius=2.0)
        analytic = maximize_bell(CatWignerEvaluator(traj), radius=2.0)
    ok = identity == 0.0 and dev["derived"] <= 1e-6 and abs(numeric.value - analytic.value) <= 1e-6 and clock.elapsed < 60
    detail = (
        f"Wigner/parity identity {identity:.1e}; analytic vs numeric {dev['derived']:.2e} (tol 1e-6); "
        f"expanded form {dev['expanded']:.2e} here, {report['expanded']:.2e} at phi=pi/3 (reported); "
        f"optimizer on numeric path {numeric.value:.6f}"
    )
    assert record(6, ok, detail, clock.elapsed)


def test_criterion_07_bell_bounds():
    rng = np.random.default_rng(2024)
    worst = 0.0
    with Timer() as clock:
        for _ in range(200):
            n_max = int(rng.integers(1, 5))
            dim = (n_max + 1) ** 2
            rank = int(rng.integers(1, dim + 1))
            g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
            rho = g @ g.conj().T
            rho /= np.trace(rho).real
            z = (rng.normal(size=4) + 1j * rng.normal(size=4)) * rng.uniform(0.1, 1.5)
            worst = max(worst, bell_measure(ParityEvaluator(rho), BellSettings(*z)))
        vac = maximize_bell(ParityEvaluator(ket_to_dm(fock_ket(0, 0, 6))), "fixed")
    ok = worst <= TSIRELSON + 1e-9 and vac.value <= 2 + 1e-6 and clock.elapsed < 60
    detail = f"max |B| over 200 random pairs {worst:.6f} (bound 2.828427); vacuum optimum {vac.value:.9f} (bound 2+1e-6)"
    assert record(7, ok, detail, clock.elapsed)


def _bell_max(alpha, theta, gamma_t):
    p = ModelParams(k=1.0, gamma=100.0)
    traj = cat_trajectory(CatSpec(alpha, math.pi / 2, theta), p, gamma_t / p.gamma)
    rho = cat_density_matrix(traj, default_cutoff(alpha))
    return maximize_bell(ParityEvaluator(rho), radius=max(1.0, 2.0 * alpha)).value


def _last_violation(grid, values):
    hits = grid[values > 2.0]
    return float(hits.max()) if hits.size else -math.inf


def test_criterion_08_nonlocality_under_decay():
    early = np.arange(1, 13) * 0.25  # gamma t in (0, 3]
    long_grid = np.arange(1, 25) * 0.25  # gamma t in (0, 6]
    late_kt = (2.0, 2.5, 3.0)
    with Timer() as clock:
        curves = {}
        for alpha in (0.5, 1.0, 2.0):
            grid = long_grid if alpha == 0.5 else early
            curves[alpha] = (grid, np.array([_bell_max(alpha, math.pi, g) for g in grid]))
        late = {alpha: max(_bell_max(alpha, math.pi, 100.0 * kt) for kt in late_kt) for alpha in (0.5, 1.0, 2.0)}
        even = np.array([_bell_max(0.5, 0.0, g) for g in long_grid])
    early_max = {a: float(v[g <= 3.0].max()) for a, (g, v) in curves.items()}
    odd_span = _last_violation(*curves[0.5])
    even_span = _last_violation(long_grid, even)
    ok = (
        all(v > 2.0 for v in early_max.values())
        and all(v <= 2.0 for v in late.values())
        and early_max[2.0] >= early_max[0.5]
        and even_span > odd_span
        and clock.elapsed < 600
    )
    detail = (
        "odd cat, gamma/k=100: early max "
        + ", ".join(f"alpha={a}: {v:.4f}" for a, v in early_max.items())
        + "; max at kt>=2: "
        + ", ".join(f"{v:.4f}" for v in late.values())
        + f"; last violation gamma t: even {even_span}, odd {odd_span}"
    )
    assert record(8, ok, detail, clock.elapsed)


def _eof_curve(alpha, theta, d):
    p = ModelParams(k=1.0, gamma=6.0)
    kt = -0.5 * np.log1p(-d * d)
    return np.array([eof_from_concurrence(cat_concurrence(cat_trajectory(CatSpec(alpha, math.pi / 2, theta), p, t))) for t in kt])


def _local_maxima(y):
    return int(np.sum((y[1:-1] > y[:-2]) & (y[1:-1] > y[2:])))


def test_criterion_09_entanglement_surfaces():
    d = np.linspace(0.0, 0.99, 100)
    alphas = np.linspace(0.05, 3.0, 60)
    with Timer() as clock:
        even = np.array([_eof_curve(a, 0.0, d) for a in alphas])
        odd_small = np.array([_eof_curve(a, math.pi, d) for a in alphas[alphas <= 0.5]])
        thetas = np.linspace(0.0, math.pi, 13)
        spread = {}
        for alpha in (0.5, 1.5):
            surf = np.array([_eof_curve(alpha, th, d) for th in thetas])
            spread[alpha] = float(np.max(surf.max(axis=0) - surf.min(axis=0)))
    start_zero = float(np.max(even[:, 0]))
    end_ratio = float(np.max(even[:, -1]) / even.max())
    maxima = min(_local_maxima(row) for row in odd_small)
    ok = (
        start_zero == 0.0
        and even.max() > 0.0
        and end_ratio < 0.01
        and maxima >= 2
        and spread[1.5] < spread[0.5]
        and clock.elapsed < 600
    )
    detail = (
        f"even cat E(d=0)={start_zero:g}, max E {even.max():.4f}, E(0.99)/max {end_ratio:.1e}; "
        f"odd cat small alpha local maxima in E(d) >= {maxima}; "
        f"theta spread alpha=1.5: {spread[1.5]:.4f} < alpha=0.5: {spread[0.5]:.4f}"
    )
    assert record(9, ok, detail, clock.elapsed)


def test_criterion_10_determinism(tmp_path):
    config = tmp_path / "fig5.cfg"
    config.write_text(
        "scenario = cat\nk = 1\ngamma = 100\nphi = pi/2\ntheta = pi\nalpha = 0.5\n"
        "axis1 = gamma_t, 0.25, 2, 8\noutputs = concurrence, eof, linear_entropy, bell_max\n"
    )
    with Timer() as clock:
        outs = []
        for threads in ("1", "1", "3"):
            path = tmp_path / f"run{len(outs)}.csv"
            code = cli.main(["sweep", str(config), "--out", str(path), "--seed", "11", "--threads", threads])
            outs.append((code, path.read_bytes()))
    ok = all(code == 0 for code, _ in outs) and outs[0][1] == outs[1][1] == outs[2][1]
    detail = "two sweeps with the same seed give byte-identical CSV (also with 3 threads)"
    assert record(10, ok, detail, clock.elapsed)
