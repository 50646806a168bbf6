"""Invariant suites shared by the CLI ``verify`` command and the test-suite.

Each check reports a measured value, its threshold and the verdict.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import boxes, operators, resonance, solver, spectral, trees
from .boxes import PartitionOfUnity, make_partition


@dataclass(frozen=True)
class Check:
    id: str
    measured: float
    threshold: float
    relation: str  # "<=", "<", ">=", "=="
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict} {self.id}: measured={self.measured:.6g} {self.relation} {self.threshold:.6g}"


def check(id: str, measured: float, threshold: float, relation: str = "<=") -> Check:
    measured = float(measured)
    ok = {
        "<=": measured <= threshold,
        "<": measured < threshold,
        ">=": measured >= threshold,
        ">": measured > threshold,
        "==": measured == threshold,
    }[relation]
    return Check(id, measured, float(threshold), relation, bool(ok))


class UnnormalizedPartition(PartitionOfUnity):
    """Raw bumps without the normalising denominator (deliberately broken)."""

    def sigma(self, k, xi):
        return self.profile(np.asarray(xi, dtype=float) - k)


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


# ----------------------------------------------------------------------------
# measurement helpers (also used directly by tests)


def random_line_field(grid: spectral.LineGrid, rng, band: float | None = None) -> spectral.LineField:
    z = rng.normal(size=grid.points) + 1j * rng.normal(size=grid.points)
    if band is not None:
        z = z * (np.abs(grid.xi) < band)
    return spectral.LineField.from_spectrum(grid, z)


def partition_sum_error(partition: PartitionOfUnity, lo: float = -2.0, hi: float = 2.0, k: int = 3) -> float:
    xi = np.linspace(lo, hi, 4001)
    total = sum(partition.sigma(j, xi) for j in range(-k, k + 1))
    return float(np.abs(total - 1).max())


def reconstruction_error(f: spectral.LineField, partition: PartitionOfUnity) -> float:
    total = sum(boxes.box_project(f, k, partition).spectrum for k in boxes.box_range(f.grid))
    return float(np.abs(total - f.spectrum).max() / np.abs(f.spectrum).max())


def bernstein_spread(partition: PartitionOfUnity, seed: int = 0, draws: int = 200, kmax: int = 20) -> float:
    """``max_k / median_k`` of the largest ``L^inf / L^2`` ratio per box.

    The same random profiles are modulated into every box, so differences
    between boxes isolate the ``k`` dependence from sampling noise.
    """
    grid = spectral.LineGrid(32, 2048)
    rng = _rng(seed)
    base = rng.normal(size=(draws, grid.points)) + 1j * rng.normal(size=(draws, grid.points))
    maxima = []
    for k in range(-kmax, kmax + 1):
        spectrum = np.roll(base, k * grid.box_length, axis=1) * partition.on_lattice(k, grid)
        vals = np.fft.ifft(spectrum / grid._shift(), axis=1) / grid.dx
        a = np.abs(vals)
        maxima.append(np.max(a.max(axis=1) / np.sqrt((a**2).sum(axis=1) * grid.dx)))
    maxima = np.array(maxima)
    return float(maxima.max() / np.median(maxima))


def product_estimate_ratios(seed: int = 0, count: int = 100, s1: float = 1.5) -> np.ndarray:
    rng = _rng(seed)
    g = spectral.LineGrid(16, 1024)
    tg = spectral.TorusGrid(8)
    n = tg.indices
    out = []
    for _ in range(count):
        c = (rng.normal(size=n.size) + 1j * rng.normal(size=n.size)) / (1 + n**2) ** 1.5
        w = spectral.PeriodicField(tg, c)
        x0, width, k = rng.uniform(-3, 3), rng.uniform(0.3, 2), rng.uniform(-4, 4)
        v = spectral.LineField.from_values(g, np.exp(-(((g.x - x0) / width) ** 2)) * np.exp(2j * np.pi * k * g.x))
        wv = spectral.LineField.from_values(g, spectral.embed_periodic_on_line(w, g).values * v.values)
        out.append(
            spectral.sobolev_norm_line(wv, s1)
            / (spectral.sobolev_norm_torus(w, s1 + 1) * spectral.sobolev_norm_line(v, s1))
        )
    return np.array(out)


def phi_identity_errors(seed: int = 0, count: int = 10_000) -> tuple[int, float]:
    """(integer mismatches, max relative real error) of the factorisation."""
    rng = _rng(seed)
    n1, n2, n3 = rng.integers(-10**4, 10**4, size=(3, count))
    n = n1 - n2 + n3
    bad = int(np.count_nonzero(resonance.phi(n, n1, n2, n3) != resonance.phi_factored(n, n1, n3)))
    x1, x2, x3 = rng.uniform(-50, 50, size=(3, count))
    x = x1 - x2 + x3
    lhs = resonance.phi(x, x1, x2, x3)
    rhs = resonance.phi_factored(x, x1, x3)
    scale = x**2 + x1**2 + x2**2 + x3**2
    return bad, float(np.max(np.abs(lhs - rhs) / scale))


def split_case(seed: int = 0, t: float = 0.37, N: float = 8, sign: int = 1, partition=None):
    """Random data on 8 boxes plus 8 tones; returns (relative error, multiplicity ok)."""
    partition = partition or make_partition()
    rng = _rng(seed)
    g = spectral.LineGrid(8, 512)
    spectrum = np.zeros(g.points, dtype=complex)
    for k in range(-4, 4):
        z = rng.normal(size=g.points) + 1j * rng.normal(size=g.points)
        spectrum += 0.1 * partition.sigma(k, g.xi) * z
    a = spectral.LineField.from_spectrum(g, spectrum)
    tg = spectral.TorusGrid(4)
    coeffs = 0.2 * (rng.normal(size=tg.indices.size) + 1j * rng.normal(size=tg.indices.size))
    coeffs[-1] = 0  # modes -4..3
    w = spectral.PeriodicField(tg, coeffs)
    res = resonance.apply_split_nonlinearity(a, w, N, t, sign, partition)
    direct = resonance.direct_interaction_derivative(a, w, t, sign)
    err = np.linalg.norm(res.total() - direct) / np.linalg.norm(direct)
    mult_ok = all(resonance.net_coefficient(q) == 1 for (_, q) in res.multiplicity)
    return float(err), mult_ok, res


def fir_spread(kind: str, seed: int = 0, count: int = 100) -> tuple[float, list]:
    rows = operators.fir_audit(kind, count, _rng(seed))
    r = np.array([x.ratio for x in rows])
    return float(r.max() / np.median(r)), rows


def gauge_worst(t: float, seed: int = 0, per_kind: int = 3) -> float:
    rng = _rng(seed)
    worst = 0.0
    for kind in operators.KINDS:
        for _ in range(per_kind):
            q = operators.random_nonresonant_quad(rng)
            inputs = operators.random_inputs(kind, q, 32, rng)
            worst = max(worst, operators.gauge_relation_check(kind, *q, inputs, t))
    return worst


def plane_wave_error(sign: int = 1, A: float = 0.7, k: int = 3, T: float = 1.0) -> tuple[float, float]:
    """(torus error, line error) against ``A exp(i (k^2 ± A^2) t)``."""
    cfg = solver.SolverConfig(sign=sign)
    w0 = spectral.PeriodicField.from_modes(cfg.torus_grid, {k: A})
    exact = A * np.exp(1j * (k**2 + sign * A**2) * T)
    wT = solver.evolve_periodic(w0, cfg, T)
    err_t = float(np.sqrt(abs(wT.coefficient(k) - exact) ** 2 + np.sum(np.abs(wT.coeffs) ** 2) - abs(wT.coefficient(k)) ** 2))
    g = cfg.line_grid
    u0 = spectral.embed_periodic_on_line(w0, g)
    uT = solver.direct_full_solve(u0, cfg, T, record_every=10**9).final
    ref = spectral.LineField.from_values(g, exact * np.exp(2j * np.pi * k * g.x))
    return err_t, float((uT - ref).l2() / math.sqrt(g.box_length))


def strang_order() -> tuple[float, list]:
    """Global error slope on two-mode periodic data against a fine reference."""
    base = solver.SolverConfig(modes=8, box_length=4, points=128)
    w0 = spectral.PeriodicField.from_modes(base.torus_grid, {0: 0.5, 1: 0.3})
    ref = solver.evolve_periodic(w0, solver.with_overrides(base, dt=1e-4), 1.0)
    dts = [0.02, 0.01, 0.005, 0.0025]
    errs = [
        float(np.linalg.norm(solver.evolve_periodic(w0, solver.with_overrides(base, dt=dt), 1.0).coeffs - ref.coeffs))
        for dt in dts
    ]
    return resonance.loglog_slope(dts, errs), errs


def coupled_order() -> tuple[float, list]:
    cfg = solver.SolverConfig(modes=7, box_length=8, points=256)
    g = cfg.line_grid
    w = spectral.PeriodicField.from_modes(cfg.torus_grid, {0: 0.5, 1: 0.3})
    v = spectral.LineField.from_values(g, 0.5 * np.exp(-g.x**2))
    state = solver.HybridState(w, v)
    ref = solver.co_evolve(state, solver.with_overrides(cfg, dt=1e-4), T=0.5).final.u()
    dts = [0.02, 0.01, 0.005, 0.0025]
    errs = [(solver.co_evolve(state, solver.with_overrides(cfg, dt=dt), T=0.5).final.u() - ref).l2() for dt in dts]
    return resonance.loglog_slope(dts, errs), errs


def mass_drift(steps: int = 1000, seed: int = 0) -> tuple[float, float]:
    """(w drift, u drift) after ``steps`` steps; full-band masks keep the steps unitary."""
    rng = _rng(seed)
    cfg = solver.SolverConfig(modes=16, box_length=8, points=512, dealias=1.0, T_final=steps * 1e-3)
    n = cfg.torus_grid.indices
    c = 0.5 * (rng.normal(size=n.size) + 1j * rng.normal(size=n.size)) / (1 + n**2)
    w0 = spectral.PeriodicField(spectral.TorusGrid(cfg.modes, 2 * cfg.modes + 1), c)
    # 2M+1 samples: the sample/coefficient maps are mutually inverse, no projection loss
    wT = solver.evolve_periodic(w0, solver.with_overrides(cfg, torus_samples=2 * cfg.modes + 1))
    g = cfg.line_grid
    u0 = spectral.LineField.from_values(g, 0.6 * np.exp(-g.x**2) * np.exp(2j * np.pi * 1.3 * g.x)) + spectral.embed_periodic_on_line(w0, g)
    uT = solver.direct_full_solve(u0, cfg, record_every=10**9).final
    return abs(wT.l2() - w0.l2()) / w0.l2(), abs(uT.l2() - u0.l2()) / u0.l2()


DECOMP_CONFIG = dict(modes=21, box_length=16, points=1024, dt=1e-3, T_final=0.5)


def decomposition_error(scheme: str = "strang-splitstep") -> float:
    cfg = solver.SolverConfig(scheme=scheme, **DECOMP_CONFIG)
    g = cfg.line_grid
    w = spectral.PeriodicField.from_modes(cfg.torus_grid, {0: 0.3, 1: 0.2j, -2: 0.1})
    v = spectral.LineField.from_values(g, 0.3 * np.exp(-g.x**2) * np.exp(2j * np.pi * 0.7 * g.x))
    state = solver.HybridState(w, v)
    hybrid = solver.co_evolve(state, cfg, record_every=10**9).final.u()
    direct = solver.direct_full_solve(state.u(), cfg, record_every=10**9).final
    return float((hybrid - direct).l2() / direct.l2())


def v_zero_max(steps: int = 200) -> float:
    cfg = solver.SolverConfig(modes=8, box_length=8, points=256, T_final=steps * 1e-3)
    w = spectral.PeriodicField.from_modes(cfg.torus_grid, {0: 0.8, 2: 0.4})
    traj = solver.co_evolve(solver.HybridState(w, spectral.LineField.zeros(cfg.line_grid)), cfg, record_every=1)
    return max(float(np.abs(s.v.values).max()) for s in traj.states)


def g_identity_error(seed: int = 0) -> float:
    rng = _rng(seed)
    g = spectral.LineGrid(8, 256)
    w = random_line_field(g, rng)
    v = random_line_field(g, rng)
    u = w + v
    lhs = np.abs(u.values) ** 2 * u.values
    rhs = np.abs(w.values) ** 2 * w.values + solver.g_nonlinearity(w, v).values
    return float(np.abs(lhs - rhs).max() / np.abs(lhs).max())


def lipschitz_case(scale: float = 1.0, seed: int = 0, profile: bool = False):
    """Unit-norm data, horizon from the existence estimate; returns (ratio, T).

    With ``profile`` the ratio at every step is returned instead of its sup.
    """
    cfg = solver.SolverConfig(modes=8, box_length=8, points=256, dt=1e-4)
    g = cfg.line_grid
    rng = _rng(seed)
    v0 = spectral.LineField.from_values(g, np.exp(-g.x**2) * np.exp(2j * np.pi * 0.5 * g.x))
    v0 = v0.scale(1 / v0.l2())
    w0 = spectral.PeriodicField.from_modes(cfg.torus_grid, {0: 0.8, 1: 0.6})
    T = solver.existence_time_estimate(v0.l2(), w0.l2())
    bump = spectral.LineField.from_values(g, np.exp(-((g.x - 1) ** 2)) * (rng.normal() + 1j * rng.normal()))
    dv = bump.scale(1e-3 * scale / bump.l2())
    if profile:
        a = solver.co_evolve(solver.HybridState(w0, v0), cfg, T, record_every=1)
        b = solver.co_evolve(solver.HybridState(w0, v0 + dv), cfg, T, record_every=1)
        return np.array([(x.v - y.v).l2() / dv.l2() for x, y in zip(a.states, b.states)]), T
    return solver.lipschitz_probe(v0, v0 + dv, w0, cfg, T), T


# ----------------------------------------------------------------------------
# suites


def suite_spectral(partition=None) -> list[Check]:
    rng = _rng(0)
    g = spectral.LineGrid(32, 2048)
    f = random_line_field(g, rng)
    back = spectral.transform_inverse(spectral.transform_forward(f.values, g), g)
    ratios = product_estimate_ratios()
    w = spectral.PeriodicField(spectral.TorusGrid(5), rng.normal(size=11) + 1j * rng.normal(size=11))
    return [
        check("spectral.inversion", np.abs(back - f.values).max() / np.abs(f.values).max(), 1e-12),
        check("spectral.parseval", abs(f.l2() - f.spectral_l2()) / f.l2(), 1e-12),
        check("spectral.free-evolve-unitary", abs(spectral.free_evolve(f, 0.37).l2() - f.l2()) / f.l2(), 1e-12),
        check(
            "spectral.embed-tiling",
            abs(spectral.embed_periodic_on_line(w, g).l2() - math.sqrt(g.box_length) * w.l2()) / w.l2(),
            1e-12,
        ),
        check("spectral.product-estimate-spread", ratios.max() / np.median(ratios), 10.0, "<"),
    ]


def suite_boxes(partition=None) -> list[Check]:
    partition = partition or make_partition()
    g = spectral.LineGrid(16, 512)
    f = random_line_field(g, _rng(1), band=6)
    return [
        check("boxes.partition-sum", partition_sum_error(partition), 1e-12),
        check("boxes.reconstruction", reconstruction_error(f, partition), 1e-12),
        check("boxes.bernstein-uniformity", bernstein_spread(partition) - 1, 0.10),
    ]


def suite_resonance(partition=None) -> list[Check]:
    bad, rel = phi_identity_errors()
    d = resonance.divisor_table(10**4)
    m = np.arange(1, d.size)
    ratio = d[1:] / np.sqrt(m)
    checks = [
        check("resonance.phi-integer-mismatches", bad, 0, "=="),
        check("resonance.phi-real-relative", rel, 1e-12),
        check("resonance.divisor-argmax", int(m[np.argmax(ratio)]), 12, "=="),
    ]
    checks.append(check("resonance.partition-audit", partition_sum_error(partition or make_partition()), 1e-12))
    return checks


def suite_operators(partition=None) -> list[Check]:
    spreads = [fir_spread(k, count=40)[0] for k in operators.KINDS]
    return [
        check("operators.fir-spread", max(spreads), 5.0, "<"),
        check("operators.gauge-t0.3", gauge_worst(0.3, per_kind=1), 1e-9),
    ]


def suite_solver(partition=None) -> list[Check]:
    err_t, err_l = plane_wave_error()
    w_drift, u_drift = mass_drift(steps=300)
    return [
        check("solver.plane-wave-torus", err_t, 1e-8),
        check("solver.plane-wave-line", err_l, 1e-8),
        check("solver.w-mass", w_drift, 1e-10),
        check("solver.u-mass", u_drift, 1e-10),
        check("solver.v-zero-preserved", v_zero_max(50), 1e-12),
        check("solver.g-identity", g_identity_error(), 1e-12),
    ]


def suite_trees(partition=None) -> list[Check]:
    ok = all(trees.census_enumerated(J).per_tree == trees.census_recursive(J).per_tree for J in range(1, 5))
    bounds = all(trees.bound_check(J)[3] for J in range(1, 11))
    return [
        check("trees.N2", trees.census_recursive(2).N, 51, "=="),
        check("trees.enumeration-matches-recursion", int(ok), 1, "=="),
        check("trees.growth-bound", int(bounds), 1, "=="),
    ]


SUITES: dict[str, Callable[..., list[Check]]] = {
    "spectral": suite_spectral,
    "boxes": suite_boxes,
    "resonance": suite_resonance,
    "operators": suite_operators,
    "solver": suite_solver,
    "trees": suite_trees,
}


def run_suite(name: str, partition: PartitionOfUnity | None = None) -> list[Check]:
    if name == "all":
        return [c for s in SUITES.values() for c in s(partition)]
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES) + ['all']}")
    return SUITES[name](partition)
