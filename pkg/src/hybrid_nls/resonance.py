"""Phase function, resonance classes, the sets A_N(n), divisor counts and the
numerical splitting of the cubic interaction into resonant and non-resonant parts.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .spectral import LineField, PeriodicField


class FrequencyQuad(NamedTuple):
    n: int
    n1: int
    n2: int
    n3: int


class ResonanceClass(enum.Enum):
    R1 = "R1"
    R2 = "R2"
    N11 = "N11"
    N12 = "N12"


def phi(n, n1, n2, n3):
    """``n^2 - n1^2 + n2^2 - n3^2`` (works elementwise on arrays)."""
    return n * n - n1 * n1 + n2 * n2 - n3 * n3


def phi_factored(n, n1, n3):
    """``2 (n - n1)(n - n3)``; equals :func:`phi` when ``n = n1 - n2 + n3``."""
    return 2 * (n - n1) * (n - n3)


def approx(n, m) -> bool:
    return abs(n - m) <= 1


def classify_quad(q, N: float, window: int = 1) -> ResonanceClass:
    """Class of a constrained quad.

    ``window`` bounds ``|n - (n1 - n2 + n3)|``.  With pieces supported on
    ``(k-1, k+1)`` a summand with ``c`` continuous slots can reach boxes up to
    ``c`` away, so the operator sums pass ``window=c``; the default is the
    plain ``n1 - n2 + n3 ≈ n`` constraint.
    """
    n, n1, n2, n3 = q
    if abs(n - (n1 - n2 + n3)) > window:
        raise ValueError(f"constraint violated for quad {tuple(q)}")
    a, b = approx(n, n1), approx(n, n3)
    if a and b:
        return ResonanceClass.R1
    if a or b:
        return ResonanceClass.R2
    return ResonanceClass.N11 if abs(phi(n, n1, n2, n3)) <= N else ResonanceClass.N12


def split_multiplicity(q) -> dict[str, int]:
    """How often a quad enters each of R2, R1, N1 (R2 sums over n1≈n and n3≈n separately)."""
    n, n1, _, n3 = q
    a, b = approx(n, n1), approx(n, n3)
    return {"R2": int(a) + int(b), "R1": int(a and b), "N1": int(not (a or b))}


def net_coefficient(q) -> int:
    m = split_multiplicity(q)
    return m["R2"] - m["R1"] + m["N1"]


def _constrained_nonresonant(n: int, band: int):
    for n1 in range(-band, band + 1):
        if approx(n, n1):
            continue
        for n3 in range(-band, band + 1):
            if approx(n, n3):
                continue
            for d in (-1, 0, 1):
                n2 = n1 + n3 - n + d
                if abs(n2) <= band:
                    yield FrequencyQuad(n, n1, n2, n3)


def enumerate_A_N(n: int, N: float, band: int, complement: bool = False) -> list[FrequencyQuad]:
    """Quads of ``A_N(n)`` (or its complement) with all indices in ``[-band, band]``.

    Sorted lexicographically in ``(n1, n2, n3)``.
    """
    if band < 1:
        raise ValueError("band must be >= 1")
    out = [
        q
        for q in _constrained_nonresonant(n, band)
        if (abs(phi(*q)) <= N) != complement
    ]
    out.sort(key=lambda q: (q.n1, q.n2, q.n3))
    return out


def count_A_N(n: int, Ns: Iterable[float], band: int) -> list[int]:
    """``|A_N(n) ∩ band|`` for several ``N`` at once, row by row over ``n1``."""
    Ns = np.asarray(list(Ns), dtype=float)
    counts = np.zeros(len(Ns), dtype=np.int64)
    n3 = np.arange(-band, band + 1, dtype=np.int64)
    n3 = n3[np.abs(n3 - n) > 1]
    for n1 in range(-band, band + 1):
        if approx(n, n1):
            continue
        for d in (-1, 0, 1):
            n2 = n1 + n3 - n + d
            ok = np.abs(n2) <= band
            p = np.abs(phi(n, n1, n2[ok], n3[ok]))
            p = p[p <= Ns.max()]
            counts += (p[:, None] <= Ns[None, :]).sum(axis=0)
    return counts.tolist()


def loglog_slope(xs, ys) -> float:
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def divisor_count(m: int) -> int:
    if int(m) != m or m < 1:
        raise ValueError(f"divisor_count needs a positive integer, got {m}")
    m = int(m)
    count, i = 0, 1
    while i * i <= m:
        if m % i == 0:
            count += 1 if i * i == m else 2
        i += 1
    return count


def divisor_table(limit: int) -> np.ndarray:
    """``d(m)`` for ``m = 0 .. limit`` by sieving (entry 0 unused)."""
    d = np.zeros(limit + 1, dtype=np.int64)
    for i in range(1, limit + 1):
        d[i::i] += 1
    return d


def write_quads_csv(quads: Iterable, N: float, path, window: int = 1) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "n1", "n2", "n3", "phi", "class"])
        for q in quads:
            writer.writerow([*q, phi(*q), classify_quad(q, N, window).value])


# ----------------------------------------------------------------------------
# splitting of the interaction-picture nonlinearity

# Slot patterns of G(w, v) = |v|^2 v + v^2 w* + w^2 v* + 2 w|v|^2 + 2 v|w|^2,
# with each cross term written out as the two orderings it stands for.
PATTERNS = {
    "I": ("v", "v", "v"),
    "II": ("w", "w", "v"),
    "II*": ("v", "w", "w"),
    "III": ("w", "v", "w"),
    "IV": ("v", "v", "w"),
    "IV*": ("w", "v", "v"),
    "V": ("v", "w", "v"),
}

MAX_MODES = 16


@dataclass
class SplitResult:
    """Per-box contributions; each dict maps box ``n`` to a BoxPiece."""

    grid: object
    r2: dict = field(default_factory=dict)
    r1: dict = field(default_factory=dict)
    n11: dict = field(default_factory=dict)
    n12: dict = field(default_factory=dict)
    multiplicity: dict = field(default_factory=dict)

    def _spectrum(self, pieces: dict) -> np.ndarray:
        from .operators import piece_to_spectrum

        out = np.zeros(self.grid.points, dtype=complex)
        for p in pieces.values():
            out += piece_to_spectrum(p, self.grid)
        return out

    def spectra(self) -> dict[str, np.ndarray]:
        s = {k: self._spectrum(getattr(self, k)) for k in ("r2", "r1", "n11", "n12")}
        s["n1"] = s["n11"] + s["n12"]
        return s

    def total(self) -> np.ndarray:
        s = self.spectra()
        return s["r2"] - s["r1"] + s["n1"]


def apply_split_nonlinearity(
    a: LineField,
    w: PeriodicField,
    N: float,
    t: float,
    sign: int = 1,
    partition=None,
    max_modes: int = MAX_MODES,
) -> SplitResult:
    """Resonant/non-resonant pieces of ``d/dt a^`` in the interaction picture.

    ``a`` holds ``exp(-it xi^2) v^`` and ``w`` holds ``exp(-it n^2) w_n``.  Every
    constrained quad is summed once per class it belongs to: twice into R2 if
    it is in both resonant families, once into R1 if in both, once into N1
    (split N11/N12 by ``|Phi| <= N``) if in neither.
    """
    from .boxes import box_range, make_partition
    from .operators import BoxPiece, Tone, piece_from_line, reflect_conj, symbol_q, trilinear

    partition = partition or make_partition()
    grid = a.grid
    K = grid.box_length
    if w.grid.modes > max_modes:
        raise ValueError(f"{w.grid.modes} torus modes exceed the dense-summation guard {max_modes}")

    pieces = {}
    for k in box_range(grid):
        p = piece_from_line(a, k, partition) if abs(k) + 1 < grid.nyquist else None
        if p is not None and np.any(p.values != 0):
            pieces[k] = p
    if len(pieces) > 2 * max_modes + 1:
        raise ValueError(f"{len(pieces)} occupied boxes exceed the dense-summation guard")
    tones = {int(n): Tone(int(n), c) for n, c in zip(w.grid.indices, w.coeffs) if c != 0}
    slots_of = {"v": pieces, "w": tones}

    res = SplitResult(grid)
    symbol = symbol_q(t)
    factor = sign * 1j

    def accumulate(store, n, piece):
        store[n] = store[n] + piece if n in store else piece

    occupied = list(pieces) + list(tones)
    if not occupied:
        return res
    reach = max(abs(k) for k in occupied)
    out_boxes = [n for n in range(-3 * reach - 3, 3 * reach + 4) if abs(n) + 1 < grid.nyquist]

    for name, roles in PATTERNS.items():
        S1, S2, S3 = (slots_of[r] for r in roles)
        if not (S1 and S2 and S3):
            continue
        ncont = roles.count("v")
        for n in out_boxes:
            for n1, s1 in S1.items():
                for n3, s3 in S3.items():
                    for n2 in range(n1 + n3 - n - ncont, n1 + n3 - n + ncont + 1):
                        s2 = S2.get(n2)
                        if s2 is None:
                            continue
                        piece = trilinear(n, (s1, reflect_conj(s2), s3), symbol, K, partition)
                        if not np.any(piece.values != 0):
                            continue
                        piece = piece.scale(factor)
                        q = FrequencyQuad(n, n1, n2, n3)
                        cls = classify_quad(q, N, window=ncont)
                        mult = split_multiplicity(q)
                        res.multiplicity[(name, q)] = mult
                        if mult["R2"]:
                            accumulate(res.r2, n, piece.scale(mult["R2"]))
                        if mult["R1"]:
                            accumulate(res.r1, n, piece)
                        if cls is ResonanceClass.N11:
                            accumulate(res.n11, n, piece)
                        elif cls is ResonanceClass.N12:
                            accumulate(res.n12, n, piece)
    return res


def direct_interaction_derivative(a: LineField, w: PeriodicField, t: float, sign: int = 1) -> np.ndarray:
    """``±i exp(-it xi^2) F(G(w, v))`` computed pointwise on the grid."""
    from .solver import g_nonlinearity
    from .spectral import embed_periodic_on_line, free_evolve

    v = free_evolve(a, -t)
    w_now = PeriodicField(w.grid, w.coeffs * np.exp(1j * t * w.grid.indices.astype(float) ** 2))
    G = g_nonlinearity(embed_periodic_on_line(w_now, a.grid), v)
    return sign * 1j * np.exp(-1j * t * a.grid.xi**2) * G.spectrum
