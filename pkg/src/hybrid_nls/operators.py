"""First-generation trilinear operators on single frequency boxes.

Every operator here has the form

    out(xi) = sigma_n(xi) * sum  m(xi, z1, z3) * A1(z1) * B2(eta) * A3(z3)

over ``xi = z1 + eta + z3``, where ``A1, A3`` are box pieces ``v^_{n_i}`` or
point masses ``w_{n_i} delta_{n_i}`` and ``B2`` is the transform of the
conjugated middle slot (``B2(eta) = conj(v^_{n2}(-eta))``, or the point mass
``conj(w_{n2}) delta_{-n2}``).  Continuous slots live on the lattice
``center + j/K``, ``|j| < K``; integrals become lattice sums with weight
``1/K`` per free variable.

Symbols:

* ``Q``: ``exp(-2it(xi - z1)(xi - z3))``
* ``R``: ``1 / ((xi - z1)(xi - z3))``
* ``Q~``: ``exp(-2it(xi - z1)(xi - z3)) / (-2i(xi - z1)(xi - z3))``
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .boxes import PartitionOfUnity, bump, make_partition
from .resonance import approx
from .spectral import LineField

_PARTITION = make_partition()

KINDS = ("I", "II", "III", "IV", "V")

# slot pattern per kind: "v" = box piece, "w" = tone coefficient
KIND_SLOTS = {
    "I": ("v", "v", "v"),
    "II": ("w", "w", "v"),
    "III": ("w", "v", "w"),
    "IV": ("v", "v", "w"),
    "V": ("v", "w", "v"),
}

_CHUNK = 2_000_000


@dataclass(frozen=True, eq=False)
class BoxPiece:
    """Samples at ``center + j/K`` for ``j = -(K-1) .. K-1``."""

    center: int
    K: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (2 * self.K - 1,):
            raise ValueError(f"box piece needs {2 * self.K - 1} samples, got {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def h(self) -> float:
        return 1.0 / self.K

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(-(self.K - 1), self.K)

    @property
    def positions(self) -> np.ndarray:
        """Integer lattice positions (frequency times ``K``)."""
        return self.center * self.K + self.offsets

    @property
    def xi(self) -> np.ndarray:
        return self.positions / self.K

    def l2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) / self.K))

    def scale(self, c: complex) -> BoxPiece:
        return BoxPiece(self.center, self.K, c * self.values)

    def __add__(self, other: BoxPiece) -> BoxPiece:
        if (self.center, self.K) != (other.center, other.K):
            raise ValueError("pieces live on different boxes")
        return BoxPiece(self.center, self.K, self.values + other.values)

    def __sub__(self, other: BoxPiece) -> BoxPiece:
        return self + other.scale(-1)


@dataclass(frozen=True)
class Tone:
    center: int
    value: complex


Slot = Union[BoxPiece, Tone]


def zero_piece(n: int, K: int) -> BoxPiece:
    return BoxPiece(n, K, np.zeros(2 * K - 1, dtype=complex))


def piece_from_function(n: int, K: int, fn: Callable, partition: PartitionOfUnity = _PARTITION) -> BoxPiece:
    """``sigma_n * fn`` sampled on box ``n``."""
    xi = n + np.arange(-(K - 1), K) / K
    return BoxPiece(n, K, partition.sigma(n, xi) * fn(xi))


def piece_from_line(f: LineField, n: int, partition: PartitionOfUnity = _PARTITION) -> BoxPiece:
    """``(box_n f)^`` restricted to its support."""
    K = f.grid.box_length
    xi = n + np.arange(-(K - 1), K) / K
    idx = [f.grid.lattice_index(x) for x in xi]
    return BoxPiece(n, K, partition.sigma(n, xi) * f.spectrum[idx])


def piece_to_spectrum(piece: BoxPiece, grid) -> np.ndarray:
    """Scatter a piece onto a full line lattice (FFT order)."""
    if grid.box_length != piece.K:
        raise ValueError("piece lattice does not match grid")
    out = np.zeros(grid.points, dtype=complex)
    idx = np.mod(piece.positions, grid.points)
    if np.abs(piece.xi).max() >= grid.nyquist:
        raise ValueError("piece reaches beyond the grid Nyquist frequency")
    np.add.at(out, idx, piece.values)
    return out


def reflect_conj(slot: Slot) -> Slot:
    """Transform of the complex conjugate: ``eta -> conj(f^(-eta))``."""
    if isinstance(slot, Tone):
        return Tone(-slot.center, np.conj(slot.value))
    return BoxPiece(-slot.center, slot.K, np.conj(slot.values[::-1]))


def random_piece(n: int, K: int, rng: np.random.Generator, partition: PartitionOfUnity = _PARTITION) -> BoxPiece:
    """``sigma_n`` times a random smooth complex profile (low-order polynomial)."""
    c = rng.normal(size=4) + 1j * rng.normal(size=4)
    return piece_from_function(n, K, lambda xi: np.polynomial.chebyshev.chebval(xi - n, c), partition)


# ----------------------------------------------------------------------------
# symbols


def symbol_q(t: float):
    def m(xi, z1, z3):
        return np.exp(-2j * t * (xi - z1) * (xi - z3))

    return m


def symbol_r(xi, z1, z3):
    return 1.0 / ((xi - z1) * (xi - z3))


def symbol_qtilde(t: float):
    def m(xi, z1, z3):
        phase = (xi - z1) * (xi - z3)
        return np.exp(-2j * t * phase) / (-2j * phase)

    return m


# ----------------------------------------------------------------------------
# engine


def _slot_arrays(slot: Slot, K: int):
    if isinstance(slot, Tone):
        return np.array([slot.center * K]), np.array([complex(slot.value)]), False
    if slot.K != K:
        raise ValueError(f"lattice mismatch: K={slot.K} vs {K}")
    return slot.positions, slot.values, True


def trilinear(
    n: int,
    slots: Sequence[Slot],
    symbol: Callable,
    K: int,
    partition: PartitionOfUnity = _PARTITION,
) -> BoxPiece:
    """Evaluate the generic box operator; ``slots[1]`` is already conj-reflected."""
    arrays = [_slot_arrays(s, K) for s in slots]
    continuous = [i for i, a in enumerate(arrays) if a[2]]
    if not continuous:
        raise ValueError("at least one slot must be a box piece")

    offsets = np.arange(-(K - 1), K)
    xi_out = n + offsets / K
    sigma = partition.sigma(n, xi_out)
    out = np.zeros(2 * K - 1, dtype=complex)

    # sparse form of every slot
    sparse = []
    for pos, val, _ in arrays:
        keep = val != 0
        sparse.append((pos[keep], val[keep]))
    if any(len(p) == 0 for p, _ in sparse):
        return BoxPiece(n, K, out)

    # slot resolved by the constraint: the densest continuous one
    d = max(continuous, key=lambda i: len(sparse[i][0]))
    free = [i for i in range(3) if i != d]
    pa, va = sparse[free[0]]
    pb, vb = sparse[free[1]]
    pos_a = np.repeat(pa, len(pb))
    pos_b = np.tile(pb, len(pa))
    val_ab = np.repeat(va, len(pb)) * np.tile(vb, len(pa))

    dense_pos, dense_val, _ = arrays[d]
    start = dense_pos[0]
    weight = (1.0 / K) ** (len(continuous) - 1)

    p_out = n * K + offsets
    rows = max(1, _CHUNK // max(1, len(val_ab)))
    for lo in range(0, len(p_out), rows):
        po = p_out[lo : lo + rows, None]
        pd = po - pos_a[None, :] - pos_b[None, :]
        idx = pd - start
        valid = (idx >= 0) & (idx < len(dense_val))
        gathered = np.where(valid, dense_val[np.clip(idx, 0, len(dense_val) - 1)], 0)
        prod = gathered * val_ab[None, :]
        positions = [None, None, None]
        positions[d] = pd
        positions[free[0]] = pos_a[None, :]
        positions[free[1]] = pos_b[None, :]
        xi = po / K
        z1 = positions[0] / K
        z3 = positions[2] / K
        with np.errstate(divide="ignore", invalid="ignore"):
            m = symbol(xi, z1, z3)
        live = prod != 0
        bad = live & ~np.isfinite(m)
        if np.any(bad & (sigma[lo : lo + rows, None] != 0)):
            raise ZeroDivisionError(f"singular symbol on the support of box {n}")
        with np.errstate(invalid="ignore"):
            out[lo : lo + rows] = np.sum(np.where(live, m * prod, 0), axis=1)
    return BoxPiece(n, K, sigma * out * weight)


# ----------------------------------------------------------------------------
# public operators


def _prepare(kind: str, n: int, n1: int, n2: int, n3: int, inputs, K: int | None):
    if kind not in KIND_SLOTS:
        raise ValueError(f"unknown kind {kind!r}")
    if len(inputs) != 3:
        raise ValueError("need three inputs")
    slots = []
    for role, idx, x in zip(KIND_SLOTS[kind], (n1, n2, n3), inputs):
        if role == "v":
            if not isinstance(x, BoxPiece):
                raise TypeError(f"kind {kind} expects a box piece at index {idx}")
            if x.center != idx:
                raise ValueError(f"piece centred at {x.center}, expected {idx}")
            if K is None:
                K = x.K
            slots.append(x)
        else:
            if isinstance(x, BoxPiece):
                raise TypeError(f"kind {kind} expects a tone coefficient at index {idx}")
            slots.append(Tone(idx, complex(x.value if isinstance(x, Tone) else x)))
    if K is None:
        raise ValueError("cannot infer lattice resolution")
    ncont = KIND_SLOTS[kind].count("v")
    if abs(n - (n1 - n2 + n3)) > ncont:
        raise ValueError(f"box {n} unreachable from ({n1}, {n2}, {n3})")
    return [slots[0], reflect_conj(slots[1]), slots[2]], K


def q1_apply(kind, n, n1, n2, n3, inputs, t, partition=_PARTITION, K=None) -> BoxPiece:
    """Single summand of the first-generation operator ``Q^{1,t}`` of ``kind``.

    ``inputs`` are in slot order: box pieces for ``v`` slots, complex
    coefficients for ``w`` slots.  The middle slot is conjugated internally.
    """
    slots, K = _prepare(kind, n, n1, n2, n3, inputs, K)
    return trilinear(n, slots, symbol_q(t), K, partition)


def _require_nonresonant(n, n1, n3):
    if approx(n, n1) or approx(n, n3):
        raise ValueError(f"resonant indices: n={n}, n1={n1}, n3={n3}")


def r1_apply(kind, n, n1, n2, n3, inputs, partition=_PARTITION, K=None) -> BoxPiece:
    """Differentiated-by-parts counterpart ``R^{1,t}`` (time independent)."""
    _require_nonresonant(n, n1, n3)
    slots, K = _prepare(kind, n, n1, n2, n3, inputs, K)
    return trilinear(n, slots, symbol_r, K, partition)


def qtilde_apply(kind, n, n1, n2, n3, inputs, t, partition=_PARTITION, K=None) -> BoxPiece:
    _require_nonresonant(n, n1, n3)
    slots, K = _prepare(kind, n, n1, n2, n3, inputs, K)
    return trilinear(n, slots, symbol_qtilde(t), K, partition)


def gauge(x, t: float):
    """``V^ = exp(i t xi^2) v^`` for pieces, ``W = exp(i t n^2) w`` for tones."""
    if isinstance(x, BoxPiece):
        return BoxPiece(x.center, x.K, np.exp(1j * t * x.xi**2) * x.values)
    if isinstance(x, Tone):
        return Tone(x.center, np.exp(1j * t * x.center**2) * x.value)
    raise TypeError("gauge needs a BoxPiece or Tone")


def gauge_relation_check(kind, n, n1, n2, n3, inputs, t, partition=_PARTITION) -> float:
    """Relative mismatch between ``Q~`` and ``exp(-it xi^2) R(V, W) / (-2i)``.

    The ``1/(-2i)`` comes from the denominator of ``Q~``; the bare relation
    holds up to that constant.
    """
    tones = [Tone(i, x) if not isinstance(x, (BoxPiece, Tone)) else x for i, x in zip((n1, n2, n3), inputs)]
    lhs = qtilde_apply(kind, n, n1, n2, n3, tones, t, partition)
    gauged = [gauge(x, t) for x in tones]
    rhs = r1_apply(kind, n, n1, n2, n3, gauged, partition)
    rhs = BoxPiece(n, rhs.K, np.exp(-1j * t * rhs.xi**2) * rhs.values / (-2j))
    scale = max(lhs.l2(), rhs.l2())
    return 0.0 if scale == 0 else (lhs - rhs).l2() / scale


def rho1_eval(xi1, eta, xi3, n, partition=_PARTITION):
    """Kernel symbol ``sigma_n(xi1 + eta + xi3) / ((eta + xi1)(eta + xi3))``."""
    xi1, eta, xi3 = (np.asarray(a, dtype=float) for a in (xi1, eta, xi3))
    den = (eta + xi1) * (eta + xi3)
    if np.any(den == 0):
        raise ZeroDivisionError("kernel evaluated at a singular point")
    return partition.sigma(n, xi1 + eta + xi3) / den


def r1_kernel_route(n, n1, n2, n3, pieces, partition=_PARTITION) -> BoxPiece:
    """``R^{1,t}_{I,n}`` by scattering ``rho^(1)`` over all lattice triples."""
    _require_nonresonant(n, n1, n3)
    p1, p2, p3 = pieces
    K = p1.K
    b2 = reflect_conj(p2)
    z1, eta, z3 = np.meshgrid(p1.positions, b2.positions, p3.positions, indexing="ij")
    vals = (
        p1.values[:, None, None] * b2.values[None, :, None] * p3.values[None, None, :]
    )
    live = vals != 0
    z1, eta, z3, vals = z1[live], eta[live], z3[live], vals[live]
    target = z1 + eta + z3
    j = target - n * K + (K - 1)
    inside = (j >= 0) & (j < 2 * K - 1)
    contrib = rho1_eval(z1[inside] / K, eta[inside] / K, z3[inside] / K, n, partition) * vals[inside]
    out = np.zeros(2 * K - 1, dtype=complex)
    np.add.at(out, j[inside], contrib)
    return BoxPiece(n, K, out / K**2)


def delta_bump(center: int, width: float, K: int, mass: complex = 1.0) -> BoxPiece:
    """Discrete unit-mass bump of half-width ``width`` at ``center``, times ``mass``."""
    j = np.arange(-(K - 1), K)
    prof = bump(j / (K * width))
    prof = prof / (prof.sum() / K)
    return BoxPiece(center, K, mass * prof)


def delta_limit_check(
    widths: Sequence[float],
    n: int,
    n1: int,
    n2: int,
    n3: int,
    w1: complex,
    w2: complex,
    v3: BoxPiece,
    t: float,
    partition=_PARTITION,
) -> list[float]:
    """``||Q_I(bumps) - Q_II(tones)||_2`` as the bumps shrink onto ``n1, n2``."""
    K = v3.K
    target = q1_apply("II", n, n1, n2, n3, (w1, w2, v3), t, partition)
    errs = []
    for h in widths:
        b1 = delta_bump(n1, h, K, w1)
        b2 = delta_bump(n2, h, K, w2)
        approx_ = q1_apply("I", n, n1, n2, n3, (b1, b2, v3), t, partition)
        errs.append((approx_ - target).l2())
    return errs


# ----------------------------------------------------------------------------
# bound audits


def slot_norm(x) -> float:
    if isinstance(x, BoxPiece):
        return x.l2()
    if isinstance(x, Tone):
        return abs(x.value)
    return abs(complex(x))


def random_nonresonant_quad(rng: np.random.Generator, nmax: int = 20, spread: int = 12):
    n = int(rng.integers(-nmax, nmax + 1))
    d1 = int(rng.integers(2, spread + 1)) * int(rng.choice([-1, 1]))
    d3 = int(rng.integers(2, spread + 1)) * int(rng.choice([-1, 1]))
    n1, n3 = n + d1, n + d3
    n2 = n1 + n3 - n + int(rng.integers(-1, 2))
    return n, n1, n2, n3


def random_inputs(kind: str, quad, K: int, rng: np.random.Generator, partition=_PARTITION):
    _, n1, n2, n3 = quad
    out = []
    for role, idx in zip(KIND_SLOTS[kind], (n1, n2, n3)):
        if role == "v":
            out.append(random_piece(idx, K, rng, partition))
        else:
            out.append(complex(rng.normal(), rng.normal()))
    return out


@dataclass(frozen=True)
class AuditRow:
    kind: str
    n: int
    n1: int
    n2: int
    n3: int
    ratio: float


def fir_audit(kind: str, count: int, rng: np.random.Generator, K: int = 32, partition=_PARTITION) -> list[AuditRow]:
    """``||R|| |n-n1||n-n3| / prod(slot norms)`` over random non-resonant summands."""
    rows = []
    for _ in range(count):
        quad = random_nonresonant_quad(rng)
        n, n1, n2, n3 = quad
        inputs = random_inputs(kind, quad, K, rng, partition)
        r = r1_apply(kind, n, n1, n2, n3, inputs, partition)
        denom = np.prod([slot_norm(x) for x in inputs])
        rows.append(AuditRow(kind, n, n1, n2, n3, r.l2() * abs(n - n1) * abs(n - n3) / denom))
    return rows


def expl_audit(kind: str, count: int, rng: np.random.Generator, t: float = 0.3, K: int = 32, partition=_PARTITION) -> list[AuditRow]:
    """``||Q^{1,t}|| / prod(slot norms)`` over random summands."""
    rows = []
    for _ in range(count):
        quad = random_nonresonant_quad(rng)
        n, n1, n2, n3 = quad
        inputs = random_inputs(kind, quad, K, rng, partition)
        q = q1_apply(kind, n, n1, n2, n3, inputs, t, partition)
        denom = np.prod([slot_norm(x) for x in inputs])
        rows.append(AuditRow(kind, n, n1, n2, n3, q.l2() / denom))
    return rows


# Young's inequality on supports of length 2: ||f||_1 <= sqrt(2) ||f||_2 per
# box piece integrated against, so the ratio of expl_audit never exceeds these.
YOUNG_CONSTANT = {"I": 2.0, "II": 1.0, "III": 1.0, "IV": np.sqrt(2.0), "V": np.sqrt(2.0)}


def write_audit_csv(rows: Sequence[AuditRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "n", "n1", "n2", "n3", "ratio"])
        for r in rows:
            writer.writerow([r.kind, r.n, r.n1, r.n2, r.n3, f"{r.ratio:.10g}"])
