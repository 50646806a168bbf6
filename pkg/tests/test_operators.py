import csv

import numpy as np
import pytest

from hybrid_nls.boxes import bump
from hybrid_nls.operators import (
    KINDS,
    YOUNG_CONSTANT,
    BoxPiece,
    Tone,
    delta_limit_check,
    expl_audit,
    fir_audit,
    gauge_relation_check,
    piece_from_function,
    piece_from_line,
    piece_to_spectrum,
    q1_apply,
    r1_apply,
    r1_kernel_route,
    random_inputs,
    random_nonresonant_quad,
    random_piece,
    reflect_conj,
    rho1_eval,
    write_audit_csv,
    zero_piece,
)
from hybrid_nls.spectral import LineField, LineGrid


def bump_piece(n, K, partition):
    return piece_from_function(n, K, lambda xi: bump((xi - n) / 0.8) * (1 + 0.3j * (xi - n)), partition)


class TestPieces:
    def test_shape_validation(self):
        with pytest.raises(ValueError):
            BoxPiece(0, 4, np.zeros(3))

    def test_reflect_conj(self, rng):
        p = random_piece(3, 8, rng)
        r = reflect_conj(p)
        assert r.center == -3
        assert np.allclose(r.xi, -p.xi[::-1])
        assert np.allclose(r.values, np.conj(p.values[::-1]))
        assert reflect_conj(Tone(2, 1 + 1j)) == Tone(-2, 1 - 1j)

    def test_line_round_trip(self, rng, partition):
        g = LineGrid(8, 256)
        z = (rng.normal(size=g.points) + 1j * rng.normal(size=g.points)) * (np.abs(g.xi) < 4)
        f = LineField.from_spectrum(g, z)
        total = sum(piece_to_spectrum(piece_from_line(f, k, partition), g) for k in range(-5, 6))
        assert np.abs(total - f.spectrum).max() < 1e-12

    def test_piece_lattice_mismatch(self):
        with pytest.raises(ValueError):
            piece_to_spectrum(zero_piece(0, 4), LineGrid(8, 64))


class TestQ1:
    def test_kind_I_matches_dense_convolution(self, partition):
        K = 16
        n, n1, n2, n3 = 1, 3, 4, 2
        p1, p2, p3 = (bump_piece(k, K, partition) for k in (n1, n2, n3))
        got = q1_apply("I", n, n1, n2, n3, (p1, p2, p3), 0.0)
        # oracle: plain np.convolve on lattice arrays, positions tracked by hand
        b2 = np.conj(p2.values[::-1])
        conv = np.convolve(np.convolve(p1.values, b2), p3.values) / K**2
        start = p1.positions[0] + (-p2.positions[-1]) + p3.positions[0]
        pos = start + np.arange(conv.size)
        want = np.zeros(2 * K - 1, dtype=complex)
        for j, p in enumerate(got.positions):
            hit = np.nonzero(pos == p)[0]
            if hit.size:
                want[j] = conv[hit[0]]
        want *= partition.sigma(n, got.xi)
        assert np.abs(got.values - want).max() < 1e-10 * np.abs(want).max()

    def test_kind_II_at_t0_is_a_shift(self, rng, partition):
        K = 16
        w1, w2 = 0.7 - 0.1j, 0.2 + 0.4j
        v3 = random_piece(-1, K, rng)
        got = q1_apply("II", 2, 5, 2, -1, (w1, w2, v3), 0.0)
        xi = got.xi
        shifted = np.interp(xi - 5 + 2, v3.xi, v3.values.real, left=0, right=0) + 1j * np.interp(
            xi - 5 + 2, v3.xi, v3.values.imag, left=0, right=0
        )
        want = partition.sigma(2, xi) * w1 * np.conj(w2) * shifted
        assert np.abs(got.values - want).max() < 1e-14

    @pytest.mark.parametrize("kind", KINDS)
    def test_zero_slot_gives_zero(self, kind, rng):
        q = random_nonresonant_quad(rng)
        inputs = random_inputs(kind, q, 8, rng)
        inputs[0] = zero_piece(q[1], 8) if isinstance(inputs[0], BoxPiece) else 0.0
        assert np.all(q1_apply(kind, *q, inputs, 0.4).values == 0)
        assert np.all(r1_apply(kind, *q, inputs).values == 0)

    @pytest.mark.parametrize("kind", KINDS)
    def test_multilinear(self, kind, rng):
        q = random_nonresonant_quad(rng)
        a = random_inputs(kind, q, 8, rng)
        b = random_inputs(kind, q, 8, rng)
        alpha, beta = 0.3 - 1.1j, -0.7 + 0.2j
        for slot in range(3):
            mix = list(a)
            if isinstance(a[slot], BoxPiece):
                mix[slot] = a[slot].scale(alpha) + b[slot].scale(beta)
            else:
                mix[slot] = alpha * a[slot] + beta * b[slot]
            pb = list(a)
            pb[slot] = b[slot]
            lhs = q1_apply(kind, *q, mix, 0.3)
            # the middle slot is conjugated, so it is conjugate-linear
            ca, cb = (np.conj(alpha), np.conj(beta)) if slot == 1 else (alpha, beta)
            rhs = q1_apply(kind, *q, a, 0.3).scale(ca) + q1_apply(kind, *q, pb, 0.3).scale(cb)
            assert (lhs - rhs).l2() <= 1e-10 * max(1.0, rhs.l2())

    def test_input_validation(self, rng):
        p = random_piece(3, 8, rng)
        with pytest.raises(TypeError):
            q1_apply("II", 0, 3, 3, 3, (p, p, p), 0.0)
        with pytest.raises(ValueError):
            q1_apply("I", 0, 4, 3, 3, (p, p, p), 0.0)  # centre mismatch
        with pytest.raises(ValueError):
            q1_apply("I", 9, 3, 3, 3, (p, p, p), 0.0)  # unreachable box
        with pytest.raises(ValueError):
            q1_apply("VI", 0, 3, 3, 3, (p, p, p), 0.0)


class TestR1:
    def test_resonant_rejected(self, rng):
        p = [random_piece(k, 8, rng) for k in (1, 0, 5)]
        with pytest.raises(ValueError):
            r1_apply("I", 0, 1, 0, 5, p)

    @pytest.mark.parametrize("kind", KINDS)
    def test_fir_ratio_uniform(self, kind):
        rows = fir_audit(kind, 30, np.random.default_rng(11))
        r = np.array([x.ratio for x in rows])
        assert r.max() / np.median(r) < 5


class TestExplBounds:
    @pytest.mark.parametrize("kind", KINDS)
    def test_young_bound(self, kind):
        rows = expl_audit(kind, 30, np.random.default_rng(12))
        assert max(x.ratio for x in rows) <= YOUNG_CONSTANT[kind]

    def test_csv(self, tmp_path):
        rows = expl_audit("II", 3, np.random.default_rng(0))
        path = tmp_path / "a.csv"
        write_audit_csv(rows, path)
        data = list(csv.reader(open(path)))
        assert data[0] == ["kind", "n", "n1", "n2", "n3", "ratio"] and len(data) == 4


class TestGauge:
    @pytest.mark.parametrize("kind", KINDS)
    def test_trivial_at_t0(self, kind, rng):
        q = random_nonresonant_quad(rng)
        assert gauge_relation_check(kind, *q, random_inputs(kind, q, 16, rng), 0.0) <= 1e-12

    def test_phase_rotation_invariance(self, rng):
        q = random_nonresonant_quad(rng)
        inputs = random_inputs("IV", q, 16, rng)
        rot = [x.scale(np.exp(0.7j)) if isinstance(x, BoxPiece) else np.exp(0.7j) * x for x in inputs]
        a = gauge_relation_check("IV", *q, inputs, 0.3)
        b = gauge_relation_check("IV", *q, rot, 0.3)
        assert abs(a - b) <= 1e-12


class TestKernel:
    def test_support_and_symmetry(self):
        assert rho1_eval(0.1, 5.0, 0.2, 0) == 0
        args = np.array([0.3, -1.2, 2.5])
        assert rho1_eval(*args, 1) == rho1_eval(args[2], args[1], args[0], 1)

    def test_singular(self):
        with pytest.raises(ZeroDivisionError):
            rho1_eval(1.0, -1.0, 0.5, 0)

    def test_two_routes_agree(self, rng):
        q = (0, 4, 1, -3)
        pieces = [random_piece(k, 16, rng) for k in q[1:]]
        a = r1_kernel_route(*q, pieces)
        b = r1_apply("I", *q, pieces)
        assert (a - b).l2() <= 1e-8 * b.l2()


class TestDeltaLimit:
    def test_refinement(self, rng):
        v3 = random_piece(-3, 256, rng)
        widths = [1 / 8, 1 / 16, 1 / 32, 1 / 64]
        errs = delta_limit_check(widths, 0, 4, 1, -3, 0.7 + 0.2j, 0.3 - 0.5j, v3, 0.3)
        assert all(b < a for a, b in zip(errs, errs[1:]))
        assert errs[-1] < 0.5 * errs[0]

    def test_zero_amplitude(self, rng):
        v3 = random_piece(-3, 64, rng)
        assert delta_limit_check([1 / 4, 1 / 8], 0, 4, 1, -3, 0.0, 0.3, v3, 0.3) == [0.0, 0.0]
