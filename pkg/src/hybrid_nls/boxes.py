"""Uniform frequency decomposition: partition of unity, box operators, modulation norms."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .spectral import LineField, LineGrid, japanese


def bump(x) -> np.ndarray:
    """``exp(-1/(1-x^2))`` on ``|x| < 1``, zero elsewhere."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


@dataclass(frozen=True)
class PartitionOfUnity:
    """``sigma_k(xi) = bump(xi - k) / sum_j bump(xi - j)``.

    Only the two integers bracketing ``xi`` contribute to the denominator, so
    the normalisation is exact up to rounding.  ``profile`` may be swapped
    for a custom one (used to build deliberately broken partitions).
    """

    profile: Callable[[np.ndarray], np.ndarray] = bump
    lower_bound: float = 0.5
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def sigma(self, k: int, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        lo = np.floor(xi)
        denom = self.profile(xi - lo) + self.profile(xi - lo - 1)
        return self.profile(xi - k) / denom

    def sigma0(self, xi) -> np.ndarray:
        return self.sigma(0, xi)

    def on_lattice(self, k: int, grid: LineGrid) -> np.ndarray:
        """``sigma_k`` sampled on ``grid.xi`` (cached per grid)."""
        key = (k, grid)
        if key not in self._cache:
            arr = self.sigma(k, grid.xi)
            arr.flags.writeable = False
            self._cache[key] = arr
        return self._cache[key]

    def export_csv(self, path, xi=None) -> None:
        if xi is None:
            xi = np.linspace(-1.5, 1.5, 601)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["xi", "sigma0"])
            for a, b in zip(xi, self.sigma0(xi)):
                writer.writerow([f"{a:.12g}", f"{b:.17g}"])


def make_partition() -> PartitionOfUnity:
    return PartitionOfUnity()


_DEFAULT = PartitionOfUnity()


def box_range(grid: LineGrid) -> range:
    """Every ``k`` whose box meets the lattice."""
    kmax = int(np.ceil(grid.nyquist))
    return range(-kmax, kmax + 1)


def box_project(f: LineField, k: int, partition: PartitionOfUnity = _DEFAULT) -> LineField:
    if abs(k) > np.ceil(f.grid.nyquist):
        raise IndexError(f"box {k} outside grid range (Nyquist {f.grid.nyquist})")
    return LineField.from_spectrum(f.grid, partition.on_lattice(k, f.grid) * f.spectrum)


def box_norms(f: LineField, p: float, partition: PartitionOfUnity = _DEFAULT) -> dict[int, float]:
    return {k: box_project(f, k, partition).lp(p) for k in box_range(f.grid)}


def modulation_norm(
    f: LineField, s: float, p: float, q: float, partition: PartitionOfUnity = _DEFAULT
) -> float:
    """``(sum_k <k>^{sq} ||box_k f||_p^q)^{1/q}``; ``q = inf`` takes the supremum."""
    if not (1 <= p <= np.inf) or not (1 <= q <= np.inf):
        raise ValueError(f"need 1 <= p, q <= inf, got p={p}, q={q}")
    norms = box_norms(f, p, partition)
    ks = np.array(list(norms))
    vals = np.array(list(norms.values())) * japanese(ks) ** s
    if np.isinf(q):
        return float(vals.max())
    return float(np.sum(vals**q) ** (1.0 / q))


def bernstein_check(
    f: LineField, k: int, p1: float, p2: float, partition: PartitionOfUnity = _DEFAULT
) -> float:
    """``||box_k f||_{p2} / ||box_k f||_{p1}``, 0 when the box is empty."""
    if p1 > p2:
        raise ValueError("need p1 <= p2")
    piece = box_project(f, k, partition)
    den = piece.lp(p1)
    return 0.0 if den == 0 else piece.lp(p2) / den


@dataclass(frozen=True, eq=False)
class CutoffMultiplier:
    """Symbol sampled on a grid's spectral lattice."""

    grid: LineGrid
    symbol: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.symbol, dtype=complex)
        if m.shape != (self.grid.points,):
            raise ValueError("symbol must be sampled on the full lattice")
        object.__setattr__(self, "symbol", m)

    @classmethod
    def from_function(cls, grid: LineGrid, fn: Callable) -> CutoffMultiplier:
        return cls(grid, fn(grid.xi))

    @property
    def bound(self) -> float:
        return float(np.abs(self.symbol).max())

    def kernel_l1(self) -> float:
        """``||m-check||_{L^1}`` of the inverse transform on the box."""
        return LineField.from_spectrum(self.grid, self.symbol).lp(1)


def smoothed_indicator(grid: LineGrid, N: int, partition: PartitionOfUnity = _DEFAULT) -> CutoffMultiplier:
    """``sum_{|k|<=N} sigma_k``: equal to 1 on ``[-N, N]``, supported in ``(-N-1, N+1)``."""
    m = sum(partition.on_lattice(k, grid) for k in range(-N, N + 1))
    return CutoffMultiplier(grid, m)


def multiplier_apply(m: CutoffMultiplier, f: LineField) -> LineField:
    if m.grid != f.grid:
        raise ValueError("multiplier sampled on a different lattice")
    return LineField.from_spectrum(f.grid, m.symbol * f.spectrum)
