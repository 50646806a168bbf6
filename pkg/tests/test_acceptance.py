"""Acceptance criteria, one test each, at the stated tolerances.

Each test records a PASS/FAIL line; the lines are repeated in a summary
section at the end of the pytest run.
"""

import time

import numpy as np

from hybrid_nls import operators, resonance, solver, trees, verify
from hybrid_nls.boxes import make_partition
from hybrid_nls.spectral import LineGrid


def test_tree_census_exact(accept):
    t0 = time.perf_counter()
    first = (trees.census_recursive(1).N, trees.census_recursive(2).N)
    agree = True
    for J in range(1, trees.J_MAX + 1):
        e, r = trees.census_enumerated(J), trees.census_recursive(J)
        agree &= e.row() == r.row() and e.per_tree == r.per_tree
    dt = time.perf_counter() - t0
    accept(first == (5, 51) and agree and dt < 10,
           f"N(1), N(2) = {first}; enumeration == recursion for J<=5: {agree}; {dt:.1f}s")


def test_growth_bound(accept):
    t0 = time.perf_counter()
    rows = [trees.bound_check(J) for J in range(1, 11)]
    dt = time.perf_counter() - t0
    ok = all(r[3] for r in rows) and rows[0][0] == rows[0][1] == 5 and dt < 1
    accept(ok, f"N(J) <= 5^J (2J-1)!! for J<=10, equality at J=1; N(10) = {rows[-1][0]} <= {rows[-1][1]}")


def test_phase_identity(accept):
    t0 = time.perf_counter()
    bad, rel = verify.phi_identity_errors(seed=0, count=10_000)
    dt = time.perf_counter() - t0
    accept(bad == 0 and rel <= 1e-12 and dt < 1,
           f"integer mismatches {bad}/10000, real relative error {rel:.2e}, {dt:.2f}s")


def test_split_partition(accept):
    t0 = time.perf_counter()
    err, mult_ok, _ = verify.split_case(seed=0)
    dt = time.perf_counter() - t0
    accept(err <= 1e-10 and mult_ok and dt < 30,
           f"relative error {err:.2e}, multiplicity audit exact: {mult_ok}, {dt:.1f}s")


def test_fir_audits(accept):
    t0 = time.perf_counter()
    spreads = {k: verify.fir_spread(k, seed=0, count=100)[0] for k in operators.KINDS}
    dt = time.perf_counter() - t0
    detail = ", ".join(f"{k}: {s:.2f}" for k, s in spreads.items())
    accept(max(spreads.values()) < 5 and dt < 120, f"max/median per kind {detail}; {dt:.1f}s")


def test_gauge_relations(accept):
    t0 = time.perf_counter()
    worst = {t: verify.gauge_worst(t, seed=1, per_kind=3) for t in (0.1, 0.3, 1.0)}
    dt = time.perf_counter() - t0
    detail = ", ".join(f"t={t}: {r:.1e}" for t, r in worst.items())
    accept(max(worst.values()) <= 1e-9 and dt < 60, f"worst residual {detail}; {dt:.1f}s")


def test_solver_accuracy(accept):
    t0 = time.perf_counter()
    errs = [e for sign in (1, -1) for e in verify.plane_wave_error(sign=sign)]
    p, _ = verify.strang_order()
    dt = time.perf_counter() - t0
    accept(max(errs) <= 1e-8 and abs(p - 2) <= 0.2 and dt < 60,
           f"plane-wave L2 error {max(errs):.1e}, observed order {p:.3f}; {dt:.1f}s")


def test_conservation(accept):
    t0 = time.perf_counter()
    w_drift, u_drift = verify.mass_drift(steps=1000)
    dt = time.perf_counter() - t0
    accept(w_drift <= 1e-10 and u_drift <= 1e-10 and dt < 60,
           f"relative mass drift over 1000 steps: w {w_drift:.1e}, u {u_drift:.1e}; {dt:.1f}s")


def test_decomposition_oracle(accept):
    t0 = time.perf_counter()
    errs = {s: verify.decomposition_error(s) for s in solver.SCHEMES}
    dt = time.perf_counter() - t0
    detail = ", ".join(f"{s}: {e:.1e}" for s, e in errs.items())
    accept(max(errs.values()) <= 1e-5 and dt < 300, f"hybrid vs direct at T=0.5: {detail}; {dt:.1f}s")


def test_structural_invariants(accept):
    partition = make_partition()
    vz = verify.v_zero_max(200)
    gid = verify.g_identity_error()
    f = verify.random_line_field(LineGrid(16, 512), np.random.default_rng(1), band=6)
    rec = verify.reconstruction_error(f, partition)
    spread = verify.bernstein_spread(partition) - 1
    accept(vz == 0.0 and gid <= 1e-12 and rec <= 1e-12 and spread <= 0.10,
           f"v stays {vz:.0e}, G identity {gid:.1e}, reconstruction {rec:.1e}, Bernstein spread {spread:.1%}")


def test_lipschitz_probe(accept):
    r1, T = verify.lipschitz_case(1.0)
    r2, _ = verify.lipschitz_case(0.5)
    change = abs(r1 - r2) / r1
    # the sup is reached at t = 0 for this data, so also compare the end-time ratios
    p1, _ = verify.lipschitz_case(1.0, profile=True)
    p2, _ = verify.lipschitz_case(0.5, profile=True)
    end_change = abs(p1[-1] - p2[-1]) / p1[-1]
    ok = np.isfinite(r1) and r1 <= 10 and change < 0.2 and end_change < 0.2 and abs(T - 1 / 64) < 1e-15
    accept(ok, f"sup ratio {r1:.4f} on [0, {T:.6f}], end ratio {p1[-1]:.4f}; "
               f"change under halving {change:.1e} (sup), {end_change:.1e} (end)")
