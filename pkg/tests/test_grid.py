import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nnlif import (
    Grid,
    ModelParams,
    NonpositiveDiffusionError,
    diffusion,
    drift,
    g_bound_ok,
    g_half,
    g_half_all,
    harmonic_mean,
    maxwellian,
)
from nnlif.grid import heaviside_shift, interface_du

positive = st.floats(min_value=1e-6, max_value=1e6)


class TestGrid:
    def test_basic_layout(self):
        g = Grid(-4.0, 1.0, 2.0, 300)
        assert g.h == pytest.approx(0.02)
        assert g.l == 250
        v = g.nodes
        assert v[0] == -4.0
        assert v[-1] == 2.0
        assert v[g.l] == pytest.approx(1.0, abs=1e-14)
        assert len(g.half_nodes) == g.n

    def test_reset_off_node_rejected(self):
        with pytest.raises(ValueError, match="not a grid node"):
            Grid(-4.0, 1.003, 2.0, 300)

    def test_reset_must_be_interior(self):
        with pytest.raises(ValueError):
            Grid(-4.0, 1.0, 2.0, 3)  # h = 2, reset not a node
        with pytest.raises(ValueError, match="v_min < v_reset < v_fire"):
            Grid(-4.0, 2.0, 2.0, 300)

    def test_refine_preserves_reset_node(self):
        g = Grid(-4.0, 1.0, 2.0, 24)
        f = g.refine()
        assert f.n == 48
        assert f.l == 2 * g.l
        assert np.allclose(f.nodes[::2], g.nodes)


class TestCoefficients:
    def test_drift_examples(self):
        assert drift(0.0, 0.0, ModelParams(b=7.0)) == 0.0
        assert drift(1.0, 2.0, ModelParams(b=1.5)) == pytest.approx(2.0)
        assert drift(1.0, 0.0, ModelParams(b=-4.0, v_ext=10.0)) == pytest.approx(9.0)

    def test_diffusion_examples(self):
        assert diffusion(0.0, ModelParams(a0=1.0)) == 1.0
        assert diffusion(0.1420, ModelParams(a0=1.0, a1=0.1)) == pytest.approx(1.01420)
        with pytest.raises(NonpositiveDiffusionError):
            diffusion(20.0, ModelParams(a0=1.0, a1=-0.1))

    def test_bad_a0_rejected(self):
        with pytest.raises(NonpositiveDiffusionError):
            ModelParams(a0=0.0)

    def test_maxwellian_peak_and_value(self):
        p = ModelParams(a0=1.0, b=0.5, v_ext=0.25)
        center = p.b * 2.0 + p.v_ext
        assert maxwellian(center, 2.0, p) == pytest.approx(1.0)
        assert maxwellian(1.0, 0.0, ModelParams()) == pytest.approx(math.exp(-0.5))

    @given(
        v=st.floats(min_value=-10, max_value=10),
        n=st.floats(min_value=0, max_value=5),
        b=st.floats(min_value=-2, max_value=2),
    )
    def test_maxwellian_bounded_and_symmetric(self, v, n, b):
        p = ModelParams(a0=1.0, a1=0.0, b=b, v_ext=0.3)
        m = maxwellian(v, n, p)
        assert 0 < m <= 1.0
        mirror = 2 * (b * n + p.v_ext) - v
        assert maxwellian(mirror, n, p) == pytest.approx(m, rel=1e-12)


class TestHarmonicMean:
    def test_examples(self):
        assert harmonic_mean(0.7, 0.7) == pytest.approx(0.7)
        assert harmonic_mean(1.0, 1.0 / 3.0) == pytest.approx(0.5)

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            harmonic_mean(0.0, 1.0)
        with pytest.raises(ValueError):
            harmonic_mean(1.0, -2.0)

    @given(a=positive, b=positive)
    def test_symmetric_and_ordered(self, a, b):
        hm = harmonic_mean(a, b)
        assert hm == pytest.approx(harmonic_mean(b, a), rel=1e-12)
        assert min(a, b) * (1 - 1e-12) <= hm <= max(a, b) * (1 + 1e-12)
        geometric = math.sqrt(a * b)
        arithmetic = 0.5 * (a + b)
        assert hm <= geometric * (1 + 1e-12) <= arithmetic * (1 + 1e-12)


def direct_g(v_left, h, n_rate, params):
    # independent route: the defining ratio of node Maxwellians, plain math
    a = params.a0 + params.a1 * n_rate
    c = params.b * n_rate + params.v_ext
    m_l = math.exp(-((v_left - c) ** 2) / (2 * a))
    m_r = math.exp(-((v_left + h - c) ** 2) / (2 * a))
    return (2.0 / h) * (m_l - m_r) / (m_l + m_r)


class TestGHalf:
    def test_closed_form_value(self, linear_params):
        # nodes at 0 and 0.1 with unit diffusion: frozen from the direct formula
        g = Grid(-4.0, 1.0, 2.0, 60)  # h = 0.1, node 40 sits at v = 0
        assert g.nodes[40] == pytest.approx(0.0, abs=1e-13)
        value = g_half(40, 0.0, g, linear_params)
        assert value == pytest.approx(0.04999989583359368, rel=1e-12)
        assert value == pytest.approx(direct_g(0.0, 0.1, 0.0, linear_params), rel=1e-12)
        assert abs(value - 0.05) < 2e-7  # close to the interface coordinate

    def test_zero_at_symmetric_nodes(self):
        # center b*N lands exactly on an interface: neighboring weights match
        g = Grid(-4.0, 1.0, 2.0, 300)
        p = ModelParams(a0=1.0, b=1.0)
        center = g.half_nodes[120]
        assert g_half(120, center, g, p) == 0.0

    def test_second_order_in_h(self, linear_params):
        # fixed interface coordinate, shrinking spacing; direct two-node formula
        v_half = 0.6
        errs = []
        for h in (0.2, 0.1, 0.05):
            errs.append(abs(direct_g(v_half - h / 2, h, 0.0, linear_params) - v_half))
        orders = [math.log2(errs[k] / errs[k + 1]) for k in range(2)]
        assert all(abs(o - 2.0) < 0.2 for o in orders)

    def test_rate_independent_without_coupling(self, grid300, linear_params):
        a = g_half_all(grid300, 0.0, linear_params)
        b = g_half_all(grid300, 5.0, linear_params)
        assert np.array_equal(a, b)

    def test_interior_index_required(self, grid300, linear_params):
        with pytest.raises(ValueError):
            g_half(0, 0.0, grid300, linear_params)
        with pytest.raises(ValueError):
            g_half(grid300.n - 1, 0.0, grid300, linear_params)

    def test_bound_holds_even_on_coarse_grids(self, linear_params):
        for n in (6, 12, 24, 300):
            g = Grid(-4.0, 1.0, 2.0, n)
            assert g_bound_ok(g, 0.0, linear_params)
            gs = g_half_all(g, 0.0, linear_params)[1 : n - 1]
            assert np.all(np.abs(gs) < 2.0 / g.h)

    def test_du_matches_definition(self, grid300):
        p = ModelParams(a0=1.3, a1=0.2, b=0.7, v_ext=0.1)
        du = interface_du(grid300, 0.4, p)
        a = diffusion(0.4, p)
        c = p.b * 0.4 + p.v_ext
        v = grid300.nodes
        expected = ((v[1:] - c) ** 2 - (v[:-1] - c) ** 2) / (2 * a)
        assert np.allclose(du, expected, rtol=1e-12, atol=1e-14)


def test_heaviside_switches_at_reset(grid300):
    hv = heaviside_shift(grid300)
    assert hv[grid300.l - 1] == 0.0
    assert hv[grid300.l] == 1.0
    assert set(np.unique(hv)) == {0.0, 1.0}
