import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lltw.grid import make_grid
from lltw.kernels import (
    LC_NORM_BOUND,
    FarFieldLimit,
    KernelSymbol,
    denom,
    eval_symbol,
    farfield_comparison,
    farfield_limit,
    farfield_sum_check,
    kernel_physical,
    lc_norm_43,
    lc_norm_43_c1_closed_form,
)

from .oracles import lc_norm_43_polar

# frozen from the nested-quadrature oracle in tests/oracles.py
NORM_TABLE = {
    0.1: 5.38577851231387,
    0.2: 5.406446412660648,
    0.3: 5.442305740676124,
    0.4: 5.49580027267426,
    0.5: 5.571171145459689,
    0.6: 5.675851919406546,
    0.7: 5.823879571226192,
    0.8: 6.046128087734626,
    0.9: 6.435942325368022,
}
# (3 B(1/6, 1/2))^{3/4} from Gamma values
NORM_C1 = 10.108941140222909

unit = st.floats(min_value=0.0, max_value=2 * math.pi).map(lambda t: (math.cos(t), math.sin(t)))
speed = st.floats(min_value=0.01, max_value=0.99)


class TestDenominator:
    def test_examples(self):
        assert denom(1.0, [1.0, 0.0]) == 1.0
        xi = [np.array(0.3), np.array(-0.7)]
        k2 = 0.3**2 + 0.7**2
        assert denom(0.0, xi) == pytest.approx(k2**2 + k2)
        t = 1e-3
        assert denom(1.0, [t, 0.0]) == pytest.approx(t**4, rel=1e-12)

    def test_rejects_supersonic(self):
        with pytest.raises(ValueError):
            denom(1.01, [1.0, 0.0])

    def test_positive_on_lattice(self):
        g = make_grid(2, 512, 100.0)
        xi = g.frequency_mesh()
        nonzero = (xi[0] ** 2 + xi[1] ** 2) > 0
        for c in np.linspace(0, 1, 11):
            assert np.all(denom(c, xi)[nonzero] > 0)


class TestSymbols:
    def test_examples(self):
        assert eval_symbol(KernelSymbol("Lc", 1.0), [1, 0]) == 1.0
        assert eval_symbol(KernelSymbol("Rjk", 0.0, 1, 2), [1, 1]) == 0.5
        assert eval_symbol(KernelSymbol("Tcjk", 0.0, 1, 1), [1, 0]) == 0.5

    def test_rejects_zero_frequency(self):
        with pytest.raises(ValueError):
            eval_symbol(KernelSymbol("Lc", 0.5), [0, 0])

    def test_rejects_bad_indices_and_kind(self):
        with pytest.raises(ValueError):
            KernelSymbol("Lcj", 0.5, 3)
        with pytest.raises(ValueError):
            KernelSymbol("Xx", 0.5)
        with pytest.raises(ValueError):
            KernelSymbol("Lc", 1.5)

    @settings(max_examples=100, deadline=None)
    @given(
        st.sampled_from(["Lc", "Lcj", "Tcjk", "Rjk"]),
        st.floats(0, 1),
        st.integers(1, 2),
        st.integers(1, 2),
        st.floats(-50, 50),
        st.floats(-50, 50),
    )
    def test_even_in_xi(self, kind, c, j, k, a, b):
        if a * a + b * b < 1e-6:
            return
        s = KernelSymbol(kind, c, j, k)
        assert abs(eval_symbol(s, [a, b]) - eval_symbol(s, [-a, -b])) <= 1e-15

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0, 0.99), st.floats(-20, 20), st.floats(-20, 20))
    def test_lc_bounded(self, c, a, b):
        if a * a + b * b < 1e-6:
            return
        assert 0 < eval_symbol(KernelSymbol("Lc", c), [a, b]) <= 1 / (1 - c * c) + 1e-12

    def test_lattice_zero_mode(self):
        g = make_grid(2, 16, 10.0)
        m = KernelSymbol("Lcj", 0.5, 1, 2).lattice(g)
        assert m[0, 0] == 0.0 and np.all(np.isfinite(m))


class TestNorm:
    def test_c1_closed_form_from_gamma(self):
        assert lc_norm_43_c1_closed_form() == pytest.approx(NORM_C1, rel=1e-14)
        beta = math.gamma(1 / 6) * math.gamma(1 / 2) / math.gamma(2 / 3)
        assert (3 * beta) ** 0.75 == pytest.approx(NORM_C1, rel=1e-14)

    def test_c1_matches_closed_form(self):
        assert lc_norm_43(1.0) == pytest.approx(NORM_C1, rel=1e-10)

    @pytest.mark.parametrize("c", sorted(NORM_TABLE))
    def test_table(self, c):
        assert lc_norm_43(c) == pytest.approx(NORM_TABLE[c], rel=1e-11)
        assert lc_norm_43(c) <= LC_NORM_BOUND

    def test_oracle_agrees_at_fresh_speed(self):
        assert lc_norm_43(0.37) == pytest.approx(lc_norm_43_polar(0.37), rel=1e-10)

    def test_small_speed_limit(self):
        assert lc_norm_43(1e-6) == pytest.approx((3 * math.pi) ** 0.75, rel=1e-10)

    def test_monotone(self):
        vals = [lc_norm_43(c) for c in np.linspace(0.05, 1.0, 20)]
        assert np.all(np.diff(vals) > 0)

    @pytest.mark.parametrize("c", [0.0, -0.1, 1.1])
    def test_rejects(self, c):
        with pytest.raises(ValueError):
            lc_norm_43(c)


class TestFarFieldLimits:
    def test_riesz_example(self):
        v = farfield_limit(FarFieldLimit("Rjk", 0.0, 1, 1, 2), (0.0, 1.0))
        assert v == pytest.approx(1 / (2 * math.pi), rel=1e-15)

    @pytest.mark.parametrize("c", [0.2, 0.5, 0.9])
    def test_lc_on_axis(self, c):
        v = farfield_limit(FarFieldLimit("Lc", c, 1, 1, 2), (1.0, 0.0))
        assert v == pytest.approx(-(c**2) / (2 * math.pi * math.sqrt(1 - c * c)), rel=1e-14)

    def test_rejects_non_unit_and_speed(self):
        with pytest.raises(ValueError):
            farfield_limit(FarFieldLimit("Lc", 0.5, 1, 1, 2), (1.0, 1.0))
        with pytest.raises(ValueError):
            farfield_limit(FarFieldLimit("Lc", 1.0, 1, 1, 2), (1.0, 0.0))

    @pytest.mark.parametrize("c,sigma", [(0.5, (1.0, 0.0)), (0.9, (0.0, 1.0))])
    def test_sum_examples(self, c, sigma):
        rl, rt = farfield_sum_check(c, sigma)
        assert rl <= 1e-12 and max(rt) <= 1e-12

    @settings(max_examples=100, deadline=None)
    @given(speed, unit)
    def test_sum_identities(self, c, sigma):
        rl, rt = farfield_sum_check(c, sigma)
        assert rl <= 1e-10 and max(rt) <= 1e-10

    @settings(max_examples=50, deadline=None)
    @given(st.sampled_from(["Lc", "Lcj", "Tcjk", "Rjk"]), speed, st.integers(1, 2), st.integers(1, 2), unit)
    def test_bounded(self, kind, c, j, k, sigma):
        v = farfield_limit(FarFieldLimit(kind, c, j, k, 2), sigma)
        assert np.isfinite(v) and abs(v) < 1e3


@pytest.fixture(scope="module")
def lc():
    return kernel_physical("Lc", 0.5, make_grid(2, 1024, 200.0))


class TestPhysicalKernel:
    def test_decay_window(self, lc):
        assert 0.5 <= lc.decay_rate <= 2.3
        assert lc.in_decay_window

    def test_farfield_on_axis(self, lc):
        dirs, meas, pred = farfield_comparison(lc, 20.0, 16)
        assert abs(meas[0] - pred[0]) <= 0.05 * abs(pred[0])

    def test_farfield_all_directions_relative_to_max(self, lc):
        dirs, meas, pred = farfield_comparison(lc, 20.0, 16)
        assert np.max(np.abs(meas - pred)) <= 0.05 * np.max(np.abs(pred))

    def test_error_shrinks_with_radius(self, lc):
        err = []
        for R in (10.0, 20.0, 40.0):
            _, meas, pred = farfield_comparison(lc, R, 16)
            err.append(np.max(np.abs(meas - pred)))
        assert err[0] > err[1] > err[2]

    def test_subtracted_beats_periodic(self):
        g = make_grid(2, 512, 200.0)
        e = {}
        for m in ("subtracted", "periodic"):
            K = kernel_physical("Lc", 0.5, g, method=m)
            _, meas, pred = farfield_comparison(K, 20.0, 16)
            e[m] = np.max(np.abs(meas - pred))
        assert e["subtracted"] < e["periodic"]

    @pytest.mark.parametrize("kind,j,k", [("Lcj", 1, 1), ("Lcj", 2, 1), ("Tcjk", 1, 2), ("Rjk", 2, 2)])
    def test_other_kinds_converge(self, kind, j, k):
        K = kernel_physical(kind, 0.5, make_grid(2, 512, 200.0), j, k)
        _, meas, pred = farfield_comparison(K, 20.0, 16)
        assert np.max(np.abs(meas - pred)) <= 0.08 * np.max(np.abs(pred))

    def test_coarse_grid_rejected(self):
        with pytest.raises(ValueError):
            kernel_physical("Lc", 0.5, make_grid(2, 16, 200.0))

    def test_periodic_kernel_of_zero_input(self):
        from lltw.grid import apply_multiplier

        g = make_grid(2, 64, 20.0)
        assert np.all(apply_multiplier(np.zeros(g.shape), g, KernelSymbol("Lc", 0.5)) == 0)
