"""Coupled time stepping for ``u = v + w``.

The equation ``i u_t - u_yy ± |u|^2 u = 0`` in the transform coordinate has
linear flow ``free_evolve(., -tau)`` (symbol ``exp(+i tau xi^2)``) and local
nonlinear flow ``u' = ±i |u|^2 u``.  ``sign=+1`` is the defocusing case.

``w`` solves the periodic equation on its own; ``v`` solves the equation with
the coupling ``G(w, v) = |w+v|^2 (w+v) - |w|^2 w``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .spectral import (
    LineField,
    LineGrid,
    PeriodicField,
    TorusGrid,
    embed_periodic_on_line,
    sobolev_norm_line,
)

SCHEMES = ("strang-splitstep", "rk4-integrating-factor")
BLOWUP_THRESHOLD = 1e6


class BlowupError(RuntimeError):
    def __init__(self, t: float, last_state):
        super().__init__(f"solution blew up near t = {t:.6g}")
        self.t = t
        self.last_state = last_state


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 1e-3
    T_final: float = 1.0
    sign: int = 1
    modes: int = 32
    box_length: int = 32
    points: int = 4096
    dealias: float = 2.0 / 3.0
    scheme: str = "strang-splitstep"
    record_every: int = 10
    torus_samples: int | None = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.T_final < 0:
            raise ValueError("T_final must be non-negative")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if not 0 < self.dealias <= 1:
            raise ValueError("dealias fraction must lie in (0, 1]")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        # validates L and P
        g = self.line_grid
        if self.torus_samples is None and self.points % self.box_length == 0:
            if self.points // self.box_length < 2 * self.modes + 1:
                raise ValueError(
                    f"{self.points // self.box_length} samples per period cannot hold {self.modes} modes"
                )
        if self.modes >= g.nyquist:
            raise ValueError("torus modes must lie below the line Nyquist frequency")

    @property
    def line_grid(self) -> LineGrid:
        return LineGrid(self.box_length, self.points)

    @property
    def torus_grid(self) -> TorusGrid:
        samples = self.torus_samples
        if samples is None:
            samples = self.points // self.box_length
        return TorusGrid(self.modes, samples)

    @property
    def steps(self) -> int:
        return int(round(self.T_final / self.dt))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class HybridState:
    w: PeriodicField
    v: LineField
    t: float = 0.0

    def __post_init__(self):
        if self.w.grid.modes >= self.v.grid.nyquist:
            raise ValueError("torus modes not representable on the line lattice")

    def w_line(self) -> LineField:
        return embed_periodic_on_line(self.w, self.v.grid)

    def u(self) -> LineField:
        return self.v + self.w_line()


@dataclass(frozen=True)
class ExperimentSpec:
    amplitude: float = 1.0
    tooth_width: float = 0.1
    slots: tuple[int, ...] = ()
    smoothing: float = 0.05
    observables: tuple[str, ...] = ("w_mass", "v_l2", "v_hs", "slot_energy")

    def __post_init__(self):
        if self.smoothing <= 0:
            raise ValueError("smoothing width must be positive")
        if self.tooth_width <= 0:
            raise ValueError("tooth width must be positive")


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)

    def append(self, t, state):
        self.times.append(float(t))
        self.states.append(state)

    @property
    def final(self):
        return self.states[-1]


# ----------------------------------------------------------------------------
# nonlinearity and masks


def g_nonlinearity(w_line: LineField, v: LineField) -> LineField:
    """``|v|^2 v + v^2 conj(w) + w^2 conj(v) + 2 w |v|^2 + 2 v |w|^2``."""
    if w_line.grid != v.grid:
        raise ValueError("w and v live on different grids")
    return LineField.from_values(v.grid, _g_values(w_line.values, v.values))


def _g_values(w: np.ndarray, v: np.ndarray) -> np.ndarray:
    av2 = np.abs(v) ** 2
    return av2 * v + v * v * np.conj(w) + w * w * np.conj(v) + 2 * w * av2 + 2 * v * np.abs(w) ** 2


def torus_mask(cfg: SolverConfig, grid: TorusGrid | None = None) -> np.ndarray:
    grid = grid or cfg.torus_grid
    keep = min(grid.modes, math.floor(cfg.dealias * grid.samples / 2))
    return np.abs(grid.indices) <= keep


def line_mask(cfg: SolverConfig, grid: LineGrid | None = None) -> np.ndarray:
    grid = grid or cfg.line_grid
    return np.abs(grid.xi) <= cfg.dealias * grid.nyquist + 1e-12


def _check(t, arr, last_state):
    if not np.all(np.isfinite(arr)) or np.abs(arr).max() > BLOWUP_THRESHOLD:
        raise BlowupError(t, last_state)


def _torus_linear(c: np.ndarray, grid: TorusGrid, tau: float) -> np.ndarray:
    return c * np.exp(1j * tau * grid.indices.astype(float) ** 2)


def _line_linear(spectrum: np.ndarray, grid: LineGrid, tau: float) -> np.ndarray:
    return spectrum * np.exp(1j * tau * grid.xi**2)


def _torus_samples(c: np.ndarray, grid: TorusGrid) -> np.ndarray:
    full = np.zeros(grid.samples, dtype=complex)
    full[grid.indices % grid.samples] = c
    return np.fft.ifft(full) * grid.samples


def _torus_coeffs(s: np.ndarray, grid: TorusGrid) -> np.ndarray:
    return (np.fft.fft(s) / grid.samples)[grid.indices % grid.samples]


# ----------------------------------------------------------------------------
# Strang steps


def step_periodic(w: PeriodicField, dt: float, cfg: SolverConfig, t: float = 0.0) -> PeriodicField:
    """One step of the periodic equation (``dt`` may be negative)."""
    return _step_periodic(w, dt, cfg, t)[0]


def _step_periodic(w: PeriodicField, dt: float, cfg: SolverConfig, t: float):
    grid = w.grid
    mask = torus_mask(cfg, grid)
    if cfg.scheme == "strang-splitstep":
        c = _torus_linear(w.coeffs, grid, dt / 2)
        s_half = _torus_samples(c, grid)
        s = s_half * np.exp(cfg.sign * 1j * np.abs(s_half) ** 2 * dt)
        c = _torus_linear(_torus_coeffs(s, grid), grid, dt / 2) * mask
        _check(t + dt, c, w)
        return PeriodicField(grid, c), PeriodicField(grid, _torus_coeffs(s_half, grid))

    def nonlin(c):
        s = _torus_samples(c, grid)
        return cfg.sign * 1j * _torus_coeffs(np.abs(s) ** 2 * s, grid) * mask

    c, _ = _lawson(
        [w.coeffs], dt, [lambda a, tau: _torus_linear(a, grid, tau)], lambda ys: [nonlin(ys[0])]
    )
    c = c[0] * mask
    _check(t + dt, c, w)
    return PeriodicField(grid, c), None


def _rk4(y: np.ndarray, dt: float, f: Callable[[int, np.ndarray], np.ndarray]) -> np.ndarray:
    """Classical RK4; ``f(stage, y)`` with stage 0 = start, 1 = midpoint, 2 = end."""
    k1 = f(0, y)
    k2 = f(1, y + 0.5 * dt * k1)
    k3 = f(1, y + 0.5 * dt * k2)
    k4 = f(2, y + dt * k3)
    return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def step_line(
    v: LineField,
    w_snapshots: Sequence[np.ndarray] | None,
    dt: float,
    cfg: SolverConfig,
    t: float = 0.0,
) -> LineField:
    """One Strang step of the ``v`` equation.

    ``w_snapshots`` are the physical samples of ``w`` during the nonlinear
    substep at offsets ``0, dt/2, dt`` (after ``w``'s own linear half-step);
    ``None`` means ``w = 0``.
    """
    grid = v.grid
    if w_snapshots is not None and any(np.shape(s) != (grid.points,) for s in w_snapshots):
        raise ValueError("w snapshots do not match the line grid")
    half = np.fft.ifft(_line_linear(v.spectrum, grid, dt / 2) / grid._shift()) / grid.dx
    if w_snapshots is None:
        vals = half * np.exp(cfg.sign * 1j * np.abs(half) ** 2 * dt)
    else:
        vals = _rk4(half, dt, lambda k, y: cfg.sign * 1j * _g_values(w_snapshots[k], y))
    spectrum = grid.dx * np.fft.fft(vals) * grid._shift()
    spectrum = _line_linear(spectrum, grid, dt / 2) * line_mask(cfg, grid)
    _check(t + dt, spectrum, v)
    return LineField.from_spectrum(grid, spectrum)


def _w_snapshots(w_half: PeriodicField, line: LineGrid, dt: float, sign: int):
    base = embed_periodic_on_line(w_half, line).values
    rot = sign * 1j * np.abs(base) ** 2
    return [base * np.exp(rot * tau) for tau in (0.0, dt / 2, dt)]


def _lawson(ys, dt, lins, nonlin):
    """Integrating-factor RK4 for a list of components; returns (new, stage inputs)."""
    E = lambda zs, tau: [lin(z, tau) for lin, z in zip(lins, zs)]  # noqa: E731
    axpy = lambda a, xs, b, zs: [a * x + b * z for x, z in zip(xs, zs)]  # noqa: E731
    h = dt
    k1 = nonlin(ys)
    y2 = E(axpy(1, ys, h / 2, k1), h / 2)
    k2 = nonlin(y2)
    y3 = axpy(1, E(ys, h / 2), h / 2, k2)
    k3 = nonlin(y3)
    y4 = axpy(1, E(ys, h), h, E(k3, h / 2))
    k4 = nonlin(y4)
    out = [
        Ey + h / 6 * (Ek1 + 2 * (Ek2 + Ek3) + kk4)
        for Ey, Ek1, Ek2, Ek3, kk4 in zip(E(ys, h), E(k1, h), E(k2, h / 2), E(k3, h / 2), k4)
    ]
    return out, (ys, y2, y3, y4)


# ----------------------------------------------------------------------------
# drivers


def _coupled_step(state: HybridState, dt: float, cfg: SolverConfig) -> HybridState:
    w, v, t = state.w, state.v, state.t
    grid = v.grid
    if cfg.scheme == "strang-splitstep":
        w_new, w_half = _step_periodic(w, dt, cfg, t)
        snaps = _w_snapshots(w_half, grid, dt, cfg.sign)
        v_new = step_line(v, snaps, dt, cfg, t)
        return HybridState(w_new, v_new, t + dt)

    tmask = torus_mask(cfg, w.grid)
    lmask = line_mask(cfg, grid)

    def nonlin(ys):
        c, spectrum = ys
        s = _torus_samples(c, w.grid)
        dw = cfg.sign * 1j * _torus_coeffs(np.abs(s) ** 2 * s, w.grid) * tmask
        w_line = embed_periodic_on_line(PeriodicField(w.grid, c), grid).values
        vv = np.fft.ifft(spectrum / grid._shift()) / grid.dx
        g = grid.dx * np.fft.fft(_g_values(w_line, vv)) * grid._shift()
        return [dw, cfg.sign * 1j * g * lmask]

    (c, spectrum), _ = _lawson(
        [w.coeffs, v.spectrum],
        dt,
        [lambda a, tau: _torus_linear(a, w.grid, tau), lambda a, tau: _line_linear(a, grid, tau)],
        nonlin,
    )
    c, spectrum = c * tmask, spectrum * lmask
    _check(t + dt, c, state)
    _check(t + dt, spectrum, state)
    return HybridState(PeriodicField(w.grid, c), LineField.from_spectrum(grid, spectrum), t + dt)


def _nsteps(cfg: SolverConfig, T: float | None) -> int:
    T = cfg.T_final if T is None else T
    return int(round(abs(T) / cfg.dt))


def co_evolve(
    state: HybridState,
    cfg: SolverConfig,
    T: float | None = None,
    reverse: bool = False,
    record_every: int | None = None,
) -> Trajectory:
    """Advance ``(w, v)`` together; ``w`` leads within every step."""
    dt = -cfg.dt if reverse else cfg.dt
    n = _nsteps(cfg, T)
    every = record_every or cfg.record_every
    traj = Trajectory()
    traj.append(state.t, state)
    for k in range(1, n + 1):
        try:
            state = _coupled_step(state, dt, cfg)
        except BlowupError as exc:
            raise BlowupError(exc.t, state) from None
        if k % every == 0 or k == n:
            traj.append(state.t, state)
    return traj


def evolve_periodic(w: PeriodicField, cfg: SolverConfig, T: float | None = None, reverse: bool = False) -> PeriodicField:
    dt = -cfg.dt if reverse else cfg.dt
    t = 0.0
    for _ in range(_nsteps(cfg, T)):
        w = step_periodic(w, dt, cfg, t)
        t += dt
    return w


def direct_full_solve(
    u0: LineField,
    cfg: SolverConfig,
    T: float | None = None,
    reverse: bool = False,
    record_every: int | None = None,
) -> Trajectory:
    """Single-field solve of the full equation on the line box (reference)."""
    dt = -cfg.dt if reverse else cfg.dt
    grid = u0.grid
    mask = line_mask(cfg, grid)
    n = _nsteps(cfg, T)
    every = record_every or cfg.record_every
    traj = Trajectory()
    traj.append(0.0, u0)
    u, t = u0, 0.0
    for k in range(1, n + 1):
        if cfg.scheme == "strang-splitstep":
            u_next = step_line(u, None, dt, cfg, t)
        else:
            def nonlin(ys):
                vv = np.fft.ifft(ys[0] / grid._shift()) / grid.dx
                g = grid.dx * np.fft.fft(np.abs(vv) ** 2 * vv) * grid._shift()
                return [cfg.sign * 1j * g * mask]

            (spectrum,), _ = _lawson([u.spectrum], dt, [lambda a, tau: _line_linear(a, grid, tau)], nonlin)
            spectrum = spectrum * mask
            _check(t + dt, spectrum, u)
            u_next = LineField.from_spectrum(grid, spectrum)
        u, t = u_next, t + dt
        if k % every == 0 or k == n:
            traj.append(t, u)
    return traj


# ----------------------------------------------------------------------------
# estimates and experiments


def existence_time_estimate(v0_norm: float, w0_norm: float, s1: float = 0.0, s2: float = 0.0) -> float:
    """``R / (16 (|v0| + |w0|)^3)`` with ``R = 2 |v0|``; ``inf`` for ``v0 = 0``.

    ``s1, s2`` only label which Sobolev norms were supplied.
    """
    if v0_norm < 0 or w0_norm < 0:
        raise ValueError("norms must be non-negative")
    if v0_norm == 0:
        return math.inf
    return 2 * v0_norm / (16 * (v0_norm + w0_norm) ** 3)


def lipschitz_probe(
    v0: LineField, v0_perturbed: LineField, w0: PeriodicField, cfg: SolverConfig, T: float | None = None
) -> float:
    """``sup_t ||v1(t) - v2(t)|| / ||v1(0) - v2(0)||`` over the recorded steps."""
    d0 = (v0 - v0_perturbed).l2()
    if d0 == 0:
        return 0.0
    a = co_evolve(HybridState(w0, v0), cfg, T, record_every=1)
    b = co_evolve(HybridState(w0, v0_perturbed), cfg, T, record_every=1)
    return max((x.v - y.v).l2() for x, y in zip(a.states, b.states)) / d0


def tooth_field(cfg: SolverConfig, amplitude: float = 1.0, width: float = 0.1) -> PeriodicField:
    """Periodic train of Gaussian teeth centred at the integers."""
    grid = cfg.torus_grid
    x = grid.x
    d = x - np.round(x)
    samples = amplitude * np.exp(-0.5 * (d / width) ** 2)
    return PeriodicField.from_samples(grid, samples)


def _smooth_step(x) -> np.ndarray:
    """``1`` for ``x <= 0``, ``0`` for ``x >= 1``, smooth in between."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    g = lambda y: np.where(y > 0, np.exp(-1.0 / np.where(y > 0, y, 1.0)), 0.0)  # noqa: E731
    return g(1 - x) / (g(1 - x) + g(x))


def slot_window(grid: LineGrid, slot: int, smoothing: float) -> np.ndarray:
    """Equal to 1 on ``[slot - 1/2, slot + 1/2]``, falls to 0 within ``smoothing``."""
    half = grid.box_length / 2
    if abs(slot) + 0.5 + smoothing > half:
        raise ValueError(f"slot {slot} with smoothing {smoothing} leaves the box [-{half}, {half})")
    dist = np.maximum(np.abs(grid.x - slot) - 0.5, 0.0)
    return _smooth_step(dist / smoothing)


def knock_out(w0: PeriodicField, experiment: ExperimentSpec, g: LineGrid) -> LineField:
    if not experiment.slots:
        return LineField.zeros(g)
    window = sum(slot_window(g, j, experiment.smoothing) for j in experiment.slots)
    w_line = embed_periodic_on_line(w0, g)
    return LineField.from_values(g, -w_line.values * window)


def slot_points(grid: LineGrid, slot: int) -> np.ndarray:
    return (grid.x >= slot - 0.5) & (grid.x < slot + 0.5)


def slot_energy(state: HybridState, slot: int) -> float:
    u = state.u()
    sel = slot_points(u.grid, slot)
    return float(np.sum(np.abs(u.values[sel]) ** 2) * u.grid.dx)


def ghost_pulse_metric(trajectory: Trajectory, slot: int) -> np.ndarray:
    return np.array([slot_energy(s, slot) for s in trajectory.states])


def observables(state: HybridState, slots: Sequence[int] = (), s: float = 1.0) -> dict[str, float]:
    row = {
        "t": state.t,
        "w_mass": state.w.l2(),
        "v_l2": state.v.l2(),
        "v_hs": sobolev_norm_line(state.v, s),
    }
    for j in slots:
        row[f"E_slot_{j}"] = slot_energy(state, j)
    return row


def with_overrides(cfg: SolverConfig, **kw) -> SolverConfig:
    return replace(cfg, **kw)
