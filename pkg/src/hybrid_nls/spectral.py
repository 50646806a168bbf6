"""Grids, transforms, free Schrödinger evolution and Sobolev norms.

Frequency units
---------------
Transforms use the kernel ``exp(-2*pi*i*xi*x)``, so the Fourier coefficient
``w_n`` of a 1-periodic function multiplies ``exp(2*pi*i*n*x)`` and torus
frequencies are the integers.  The PDE is posed in the rescaled variable
``y = 2*pi*x`` (see :data:`LENGTH_SCALE`), which makes the free-evolution
symbol exactly ``exp(-i*t*xi**2)`` with no stray ``2*pi`` factors.  All norms
are taken with respect to ``dx``.

The line ``R`` is replaced by the periodic box ``[-L/2, L/2)`` with integer
``L``; the spectral lattice then has spacing ``1/L`` and contains every
integer, so periodic fields embed exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Ratio between the PDE coordinate ``y`` and the transform coordinate ``x``.
LENGTH_SCALE = 2.0 * np.pi


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class TorusGrid:
    """Coefficients ``n in [-M, M]`` sampled on ``samples`` points of ``[0, 1)``."""

    modes: int
    samples: int | None = None

    def __post_init__(self):
        if int(self.modes) != self.modes or self.modes < 0:
            raise ValueError(f"modes must be a non-negative integer, got {self.modes}")
        minimum = 2 * self.modes + 1
        if self.samples is None:
            object.__setattr__(self, "samples", minimum)
        elif self.samples < minimum:
            raise ValueError(f"need at least {minimum} samples for M={self.modes}, got {self.samples}")
        elif self.samples != minimum and not _is_power_of_two(self.samples):
            raise ValueError("sample count must be 2M+1 or a power of two")

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.modes, self.modes + 1)

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.samples) / self.samples


@dataclass(frozen=True)
class LineGrid:
    """Periodic box ``[-L/2, L/2)`` with ``P`` equispaced points."""

    box_length: int = 32
    points: int = 2048

    def __post_init__(self):
        if float(self.box_length) != int(self.box_length) or self.box_length <= 0:
            raise ValueError(f"box_length must be a positive integer, got {self.box_length}")
        object.__setattr__(self, "box_length", int(self.box_length))
        if not _is_power_of_two(int(self.points)):
            raise ValueError(f"points must be a power of two, got {self.points}")

    @property
    def dx(self) -> float:
        return self.box_length / self.points

    @property
    def dxi(self) -> float:
        return 1.0 / self.box_length

    @property
    def x(self) -> np.ndarray:
        return -self.box_length / 2 + np.arange(self.points) * self.dx

    @property
    def xi(self) -> np.ndarray:
        # integer multiples of 1/L, FFT ordering
        return np.fft.fftfreq(self.points, d=self.dx)

    @property
    def nyquist(self) -> float:
        return self.points / (2.0 * self.box_length)

    def lattice_index(self, xi: float) -> int:
        """FFT-order index of lattice frequency ``xi`` (must lie on the lattice)."""
        k = xi * self.box_length
        if abs(k - round(k)) > 1e-9:
            raise ValueError(f"frequency {xi} is not on the lattice 1/{self.box_length}")
        k = int(round(k))
        if not -self.points // 2 <= k < self.points // 2:
            raise ValueError(f"frequency {xi} beyond Nyquist {self.nyquist}")
        return k % self.points

    def _shift(self) -> np.ndarray:
        # accounts for the box starting at -L/2 instead of 0
        return np.exp(-2j * np.pi * self.xi * self.x[0])


def transform_forward(values: np.ndarray, grid: LineGrid) -> np.ndarray:
    """Discrete ``int exp(-2 pi i xi x) f(x) dx`` on the lattice (FFT order)."""
    values = np.asarray(values)
    if values.shape != (grid.points,):
        raise ValueError(f"expected {grid.points} samples, got shape {values.shape}")
    return grid.dx * np.fft.fft(values) * grid._shift()


def transform_inverse(spectrum: np.ndarray, grid: LineGrid) -> np.ndarray:
    spectrum = np.asarray(spectrum)
    if spectrum.shape != (grid.points,):
        raise ValueError(f"expected {grid.points} spectral samples, got shape {spectrum.shape}")
    return np.fft.ifft(spectrum / grid._shift()) / grid.dx


@dataclass(frozen=True, eq=False)
class PeriodicField:
    grid: TorusGrid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (2 * self.grid.modes + 1,):
            raise ValueError(f"expected {2 * self.grid.modes + 1} coefficients, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_modes(cls, grid: TorusGrid, modes: dict[int, complex]) -> PeriodicField:
        c = np.zeros(2 * grid.modes + 1, dtype=complex)
        for n, val in modes.items():
            if abs(n) > grid.modes:
                raise ValueError(f"mode {n} outside [-{grid.modes}, {grid.modes}]")
            c[n + grid.modes] = val
        return cls(grid, c)

    @classmethod
    def from_samples(cls, grid: TorusGrid, samples: np.ndarray) -> PeriodicField:
        """Least-squares coefficients of ``samples`` on ``grid.x`` (modes beyond M dropped)."""
        s = np.asarray(samples, dtype=complex)
        if s.shape != (grid.samples,):
            raise ValueError(f"expected {grid.samples} samples, got {s.shape}")
        full = np.fft.fft(s) / grid.samples
        idx = grid.indices % grid.samples
        return cls(grid, full[idx])

    def coefficient(self, n: int) -> complex:
        if abs(n) > self.grid.modes:
            return 0j
        return complex(self.coeffs[n + self.grid.modes])

    def samples(self) -> np.ndarray:
        full = np.zeros(self.grid.samples, dtype=complex)
        full[self.grid.indices % self.grid.samples] = self.coeffs
        return np.fft.ifft(full) * self.grid.samples

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        phase = np.exp(2j * np.pi * np.multiply.outer(x, self.grid.indices))
        return phase @ self.coeffs

    def l2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))


@dataclass(frozen=True, eq=False)
class LineField:
    """Field on a :class:`LineGrid`; holds both physical samples and spectrum."""

    grid: LineGrid
    values: np.ndarray = field(repr=False)
    spectrum: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("values", "spectrum"):
            arr = np.array(getattr(self, name), dtype=complex)
            if arr.shape != (self.grid.points,):
                raise ValueError(f"{name} must have {self.grid.points} entries, got {arr.shape}")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @classmethod
    def from_values(cls, grid: LineGrid, values) -> LineField:
        values = np.asarray(values, dtype=complex)
        return cls(grid, values, transform_forward(values, grid))

    @classmethod
    def from_spectrum(cls, grid: LineGrid, spectrum) -> LineField:
        spectrum = np.asarray(spectrum, dtype=complex)
        return cls(grid, transform_inverse(spectrum, grid), spectrum)

    @classmethod
    def zeros(cls, grid: LineGrid) -> LineField:
        z = np.zeros(grid.points, dtype=complex)
        return cls(grid, z, z)

    def __add__(self, other: LineField) -> LineField:
        _check_same_grid(self.grid, other.grid)
        return LineField(self.grid, self.values + other.values, self.spectrum + other.spectrum)

    def __sub__(self, other: LineField) -> LineField:
        _check_same_grid(self.grid, other.grid)
        return LineField(self.grid, self.values - other.values, self.spectrum - other.spectrum)

    def scale(self, c: complex) -> LineField:
        return LineField(self.grid, c * self.values, c * self.spectrum)

    def l2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.dx))

    def spectral_l2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.spectrum) ** 2) * self.grid.dxi))

    def lp(self, p: float) -> float:
        a = np.abs(self.values)
        if np.isinf(p):
            return float(a.max())
        return float((np.sum(a**p) * self.grid.dx) ** (1.0 / p))


def _check_same_grid(a: LineGrid, b: LineGrid) -> None:
    if a != b:
        raise ValueError(f"grid mismatch: {a} vs {b}")


def japanese(x) -> np.ndarray:
    return np.sqrt(1.0 + np.asarray(x, dtype=float) ** 2)


def sobolev_norm_torus(w: PeriodicField, s: float) -> float:
    if s < 0:
        raise ValueError("negative Sobolev index")
    weights = japanese(w.grid.indices) ** (2 * s)
    return float(np.sqrt(np.sum(weights * np.abs(w.coeffs) ** 2)))


def sobolev_norm_line(v: LineField, s: float) -> float:
    """Riemann/trapezoid sum of ``<xi>^{2s} |v^(xi)|^2`` over the periodic lattice."""
    if s < 0:
        raise ValueError("negative Sobolev index")
    weights = japanese(v.grid.xi) ** (2 * s)
    return float(np.sqrt(np.sum(weights * np.abs(v.spectrum) ** 2) * v.grid.dxi))


def free_evolve(f, t: float):
    """Apply ``S(t) = exp(i t Laplacian)``: multiply the spectrum by ``exp(-i t xi^2)``.

    The linear NLS flow for time ``tau`` is ``free_evolve(f, -tau)``.
    """
    if isinstance(f, PeriodicField):
        n = f.grid.indices
        return PeriodicField(f.grid, f.coeffs * np.exp(-1j * t * n.astype(float) ** 2))
    if isinstance(f, LineField):
        return LineField.from_spectrum(f.grid, f.spectrum * np.exp(-1j * t * f.grid.xi**2))
    raise TypeError(f"cannot evolve {type(f).__name__}")


def embed_periodic_on_line(w: PeriodicField, g: LineGrid) -> LineField:
    """Periodic extension of ``w`` across the box; spectrum ``L * w_n`` at ``xi = n``."""
    if float(g.box_length) != int(g.box_length):
        raise ValueError("box length must be an integer to host periodic fields")
    if w.grid.modes >= g.nyquist:
        raise ValueError(f"torus modes {w.grid.modes} not below line Nyquist {g.nyquist}")
    spectrum = np.zeros(g.points, dtype=complex)
    for n, c in zip(w.grid.indices, w.coeffs):
        if c != 0:
            spectrum[g.lattice_index(n)] = g.box_length * c
    return LineField.from_spectrum(g, spectrum)


def restrict_line_to_torus(f: LineField, grid: TorusGrid) -> PeriodicField:
    """Coefficients at integer frequencies of a box-periodic field (inverse of embedding)."""
    c = [f.spectrum[f.grid.lattice_index(n)] / f.grid.box_length for n in grid.indices]
    return PeriodicField(grid, np.array(c))
