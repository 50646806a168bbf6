import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybrid_nls.spectral import (
    LENGTH_SCALE,
    LineField,
    LineGrid,
    PeriodicField,
    TorusGrid,
    embed_periodic_on_line,
    free_evolve,
    restrict_line_to_torus,
    sobolev_norm_line,
    sobolev_norm_torus,
    transform_forward,
    transform_inverse,
)
from hybrid_nls.verify import product_estimate_ratios, random_line_field


def test_length_scale_is_two_pi():
    assert LENGTH_SCALE == pytest.approx(2 * np.pi)


class TestGrids:
    def test_torus_sample_rules(self):
        assert TorusGrid(3).samples == 7
        assert TorusGrid(3, 8).samples == 8
        with pytest.raises(ValueError):
            TorusGrid(3, 6)
        with pytest.raises(ValueError):
            TorusGrid(3, 12)

    def test_line_grid_validation(self):
        with pytest.raises(ValueError):
            LineGrid(2.5, 64)
        with pytest.raises(ValueError):
            LineGrid(8, 100)
        g = LineGrid(8, 64)
        assert g.dxi * g.box_length == 1
        assert g.lattice_index(3.0) == 24

    def test_off_lattice_frequency(self):
        with pytest.raises(ValueError):
            LineGrid(8, 64).lattice_index(0.1)


class TestTransform:
    def test_constant_maps_to_zero_frequency(self):
        g = LineGrid(8, 128)
        spectrum = transform_forward(np.ones(g.points), g)
        assert spectrum[0] == pytest.approx(g.box_length)
        assert np.abs(spectrum[1:]).max() < 1e-12

    def test_inversion_and_parseval(self, rng):
        g = LineGrid(32, 2048)
        f = random_line_field(g, rng)
        back = transform_inverse(transform_forward(f.values, g), g)
        assert np.abs(back - f.values).max() < 1e-12 * np.abs(f.values).max()
        assert abs(f.l2() - f.spectral_l2()) < 1e-12 * f.l2()

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            transform_forward(np.zeros(10), LineGrid(8, 64))
        with pytest.raises(ValueError):
            transform_inverse(np.zeros(10), LineGrid(8, 64))

    def test_fields_are_immutable(self, rng):
        f = random_line_field(LineGrid(4, 32), rng)
        with pytest.raises(ValueError):
            f.values[0] = 1


class TestSobolev:
    def test_torus_examples(self):
        g = TorusGrid(3)
        assert sobolev_norm_torus(PeriodicField.from_modes(g, {0: 1}), 4.2) == pytest.approx(1)
        assert sobolev_norm_torus(PeriodicField.from_modes(g, {1: 1}), 1) == pytest.approx(np.sqrt(2))
        w = PeriodicField(g, np.arange(7) + 1j)
        assert sobolev_norm_torus(w, 0) == pytest.approx(w.l2())

    def test_line_zero_and_parseval(self, rng):
        g = LineGrid(8, 256)
        assert sobolev_norm_line(LineField.zeros(g), 2) == 0
        f = random_line_field(g, rng)
        assert sobolev_norm_line(f, 0) == pytest.approx(f.l2(), rel=1e-12)

    def test_negative_index_rejected(self):
        with pytest.raises(ValueError):
            sobolev_norm_torus(PeriodicField.from_modes(TorusGrid(1), {0: 1}), -1)

    def test_gaussian_refinement(self):
        # dx fixed at 1/64 while the box grows; the tail beyond L/2 is exp(-pi L^2 / 4)
        vals = []
        for L in (16, 32, 64):
            g = LineGrid(L, 64 * L)
            vals.append(sobolev_norm_line(LineField.from_values(g, np.exp(-np.pi * g.x**2)), 1.0))
        assert abs(vals[1] - vals[0]) < 1e-8
        assert abs(vals[2] - vals[1]) < 1e-8

    @settings(max_examples=30, deadline=None)
    @given(s1=st.floats(0, 3), ds=st.floats(0, 3), seed=st.integers(0, 10**6))
    def test_monotone_in_s(self, s1, ds, seed):
        rng = np.random.default_rng(seed)
        f = random_line_field(LineGrid(4, 64), rng)
        assert sobolev_norm_line(f, s1) <= sobolev_norm_line(f, s1 + ds) * (1 + 1e-12)
        w = PeriodicField(TorusGrid(4), rng.normal(size=9))
        assert sobolev_norm_torus(w, s1) <= sobolev_norm_torus(w, s1 + ds) * (1 + 1e-12)


class TestFreeEvolution:
    def test_identity_and_group(self, rng):
        f = random_line_field(LineGrid(16, 512), rng)
        assert np.allclose(free_evolve(f, 0).values, f.values, atol=1e-13)
        back = free_evolve(free_evolve(f, 0.37), -0.37)
        assert np.abs(back.values - f.values).max() < 1e-12 * np.abs(f.values).max()

    @settings(max_examples=20, deadline=None)
    @given(t=st.floats(-50, 50), seed=st.integers(0, 10**6))
    def test_unitary(self, t, seed):
        f = random_line_field(LineGrid(8, 256), np.random.default_rng(seed))
        assert abs(free_evolve(f, t).l2() - f.l2()) < 1e-12 * f.l2()

    def test_symbol_on_torus(self):
        w = PeriodicField.from_modes(TorusGrid(3), {2: 1.0})
        assert free_evolve(w, 0.3).coefficient(2) == pytest.approx(np.exp(-1.2j))

    def test_rejects_other_types(self):
        with pytest.raises(TypeError):
            free_evolve(np.zeros(4), 1.0)


class TestEmbedding:
    def test_constant_and_tone(self):
        g = LineGrid(8, 256)
        tg = TorusGrid(3)
        one = embed_periodic_on_line(PeriodicField.from_modes(tg, {0: 1}), g)
        assert np.allclose(one.values, 1, atol=1e-13)
        tone = embed_periodic_on_line(PeriodicField.from_modes(tg, {1: 1}), g)
        assert np.allclose(tone.values, np.exp(2j * np.pi * g.x), atol=1e-12)

    def test_tiling_identity(self, rng):
        g = LineGrid(32, 2048)
        w = PeriodicField(TorusGrid(5), rng.normal(size=11) + 1j * rng.normal(size=11))
        assert abs(embed_periodic_on_line(w, g).l2() - np.sqrt(32) * w.l2()) < 1e-12 * w.l2()

    def test_round_trip(self, rng):
        g = LineGrid(8, 256)
        w = PeriodicField(TorusGrid(5), rng.normal(size=11) + 1j * rng.normal(size=11))
        assert np.allclose(restrict_line_to_torus(embed_periodic_on_line(w, g), w.grid).coeffs, w.coeffs)

    def test_modes_must_fit(self):
        with pytest.raises(ValueError):
            embed_periodic_on_line(PeriodicField.from_modes(TorusGrid(8), {0: 1}), LineGrid(2, 32))


def test_product_estimate_constant_is_uniform():
    ratios = product_estimate_ratios(seed=0, count=100, s1=1.5)
    assert np.all(np.isfinite(ratios))
    assert ratios.max() < 10 * np.median(ratios)
