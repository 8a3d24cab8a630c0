import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from srexit import specfun as sf
from srexit.errors import DomainError, SymmetryError

mp.mp.dps = 30


def rel(a, b):
    return abs(complex(a) - complex(b)) / abs(complex(b))


def e1_by_quadrature(x):
    val, _ = integrate.quad(lambda s: math.exp(-x * math.exp(s)), 0.0, 60.0, epsabs=1e-14, epsrel=1e-13)
    # substituting y = x e^s turns the integral into int exp(-x e^s) ds over s > 0
    return val


class TestEvalAccuracy:
    def test_defaults(self):
        acc = sf.EvalAccuracy()
        assert (acc.abs_tol, acc.rel_tol, acc.max_terms, acc.quad_max_depth) == (1e-12, 1e-10, 500, 40)

    @pytest.mark.parametrize("kw", [{"abs_tol": 0}, {"rel_tol": -1e-3}, {"max_terms": 0}])
    def test_rejects_bad_values(self, kw):
        with pytest.raises(DomainError):
            sf.EvalAccuracy(**kw)


class TestExpIntegral:
    def test_value_at_one(self):
        assert sf.exp_integral_e1(1.0) == pytest.approx(0.21938393439552027, abs=1e-15)
        assert sf.exp_integral_e1(1.0) == pytest.approx(e1_by_quadrature(1.0), abs=1e-12)

    @pytest.mark.parametrize("x", [0.003, 0.2, 2.5, 17.0])
    def test_matches_quadrature(self, x):
        assert sf.exp_integral_e1(x) == pytest.approx(e1_by_quadrature(x), abs=1e-12)

    def test_decreasing_to_zero(self):
        xs = np.geomspace(1e-3, 200, 60)
        vals = [sf.exp_integral_e1(x) for x in xs]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 1e-80

    @pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            sf.exp_integral_e1(bad)
        with pytest.raises(DomainError):
            sf.scaled_e1(bad)


class TestScaledE1:
    def test_value_at_one_inside_sandwich(self):
        v = sf.scaled_e1(1.0)
        assert v == pytest.approx(0.59634736232319407, abs=1e-15)
        assert 0.5 * math.log(3) < v < math.log(2)

    def test_large_argument(self):
        assert sf.scaled_e1(1e6) == pytest.approx(1e-6, rel=1e-2)
        assert sf.scaled_e1(1e6) == pytest.approx(float(mp.e**mp.mpf(10**6) * mp.e1(10**6)), rel=1e-14)

    def test_small_argument_sandwich(self):
        v = sf.scaled_e1(0.01)
        assert 0.5 * math.log(201) < v < math.log(101)

    def test_continuous_across_series_switch(self):
        below = sf.scaled_e1(np.nextafter(50.0, 0))
        above = sf.scaled_e1(50.0)
        assert above == pytest.approx(below, rel=1e-13)

    @given(st.floats(min_value=1e-6, max_value=1e6))
    def test_sandwich(self, x):
        v = sf.scaled_e1(x)
        assert 0.5 * math.log1p(2.0 / x) < v < math.log1p(1.0 / x)

    @pytest.mark.parametrize("x", [1e-8, 0.3, 7.0, 49.9, 50.0, 120.0, 1e4])
    def test_against_mpmath(self, x):
        ref = mp.e**mp.mpf(x) * mp.e1(x)
        assert rel(sf.scaled_e1(x), ref) < 1e-13


class TestKummerM:
    @pytest.mark.parametrize("a,z", [(0.7, 3.0), (2.5, -1.5), (-1.3, 20.0)])
    def test_equal_parameters_give_exponential(self, a, z):
        assert rel(sf.kummer_m(a, a, z), math.exp(z)) < 1e-13

    @pytest.mark.parametrize("b,z", [(0.4, 30.0), (3.0, -2.0), (1 + 2j, 5.0)])
    def test_a_zero(self, b, z):
        assert sf.kummer_m(0.0, b, z) == 1.0

    def test_closed_form(self):
        assert rel(sf.kummer_m(1, 2, 1), math.e - 1) < 1e-14

    def test_large_argument_switches_strategy(self):
        # the series would cancel catastrophically here
        for a, b, z in [(-2.5, 2.0, 30.0), (0.2, 3.0, 600.0), (-7.3, 1.5, 90.0)]:
            assert rel(sf.kummer_m(a, b, z), mp.hyp1f1(a, b, z)) < 1e-11

    @settings(max_examples=60, deadline=None)
    @given(
        st.floats(-5, 5),
        st.floats(0.1, 6),
        st.floats(-20, 60),
    )
    def test_against_mpmath(self, a, b, z):
        ref = mp.hyp1f1(a, b, z, zeroprec=300)
        assert abs(complex(sf.kummer_m(a, b, z)) - complex(ref)) <= 1e-10 * abs(ref) + 1e-14

    @pytest.mark.parametrize("b", [0.0, -3.0, -2.0 + 1e-10])
    def test_nonpositive_integer_b(self, b):
        with pytest.raises(DomainError):
            sf.kummer_m(0.5, b, 1.0)


class TestTricomiU:
    @pytest.mark.parametrize("z", [1e-5, 0.3, 2.0, 9.0, 40.0, 800.0])
    def test_u_1_2_is_reciprocal(self, z):
        assert rel(sf.tricomi_u(1, 2, z), 1.0 / z) < 1e-12

    def test_power_law_at_large_z(self):
        assert rel(sf.tricomi_u(1, 2.7, 1e3), 1e-3) < 1e-2

    @pytest.mark.parametrize("a,b,z", [(0.3, 1.7, 0.8), (1.2, 0.4, 5.0), (0.05, 2.05, 25.0)])
    def test_kummer_transformation(self, a, b, z):
        lhs = z ** (1 - b) * sf.tricomi_u(a - b + 1, 2 - b, z)
        assert rel(lhs, sf.tricomi_u(a, b, z)) < 1e-11

    @pytest.mark.parametrize(
        "a,b,z",
        [
            (-3, 1.5, 2.0),            # terminating polynomial
            (2.5, 4.5, 0.7),           # a - b + 1 = -1
            (0.3, 1.3, 1e-7),          # connection formula, tiny z
            (0.0015, 2.003, 1.0),      # near-integer b
            (2.5e-7, 2.0000005, 3e-6),
            (0.5, 3.0, 2.9),           # integer b, connection formula
            (1.5, 5.0, 1e-7),
            (-0.45, 1.1, 7.0),         # Laplace integral with recurrence
            (0.3, 2.6, 12.0),
            (-0.5 + 1.2j, 1 + 2.4j, 0.4),   # complex index
            (-0.5 + 1.2j, 1 + 2.4j, 6.0),
            (-0.5 + 0.25j, 1 + 0.5j, 30.0),
            (-0.5 + 0.063j, 1 + 0.126j, 0.2),   # complex b near an integer
        ],
    )
    def test_against_mpmath(self, a, b, z):
        assert rel(sf.tricomi_u(a, b, z), mp.hyperu(a, b, z)) < 1e-10

    @settings(max_examples=80, deadline=None)
    @given(st.floats(-0.3, 5.0), st.floats(0.5, 1.5), st.floats(-7.0, 3.3))
    def test_eigenfunction_family(self, lam, mu, log10z):
        # the parameter family (d/2, 2 + d) with d = xi(lam) - 1 drives everything downstream
        q = 1 + 8 * lam / mu**2
        d = complex(-1, math.sqrt(-q)) if q < 0 else complex(math.sqrt(q) - 1)
        z = 10.0**log10z
        ref = mp.hyperu(d / 2, 2 + d, z)
        assert rel(sf.tricomi_u(d / 2, 2 + d, z), ref) < 1e-10

    def test_domain(self):
        with pytest.raises(DomainError):
            sf.tricomi_u(1, 2, 0.0)

    @pytest.mark.parametrize("a,b,z", [(0.2, 2.4, 0.5), (-0.5 + 0.3j, 1 + 0.6j, 40.0), (3.0, 1.5, 1e200)])
    def test_scaled(self, a, b, z):
        ref = mp.mpf(z) ** a * mp.hyperu(a, b, z)
        assert rel(sf.tricomi_u_scaled(a, b, z), ref) < 1e-12


class TestWhittakerW:
    @pytest.mark.parametrize("z", [0.1, 0.5, 1.0, 2.0, 10.0])
    def test_reduction_identity(self, z):
        exact = z * math.exp(-z / 2)
        assert abs(sf.whittaker_w(1, 0.5, z) - exact) <= 1e-12 * (1 + exact)

    def test_examples(self):
        assert sf.whittaker_w(1, 0.5, 2.0) == pytest.approx(2 * math.exp(-1), rel=1e-14)
        assert sf.whittaker_w(1, 0.5, 0.1) == pytest.approx(0.1 * math.exp(-0.05), rel=1e-14)

    @pytest.mark.parametrize("b", [0.3, 1.7, 0.4j, 2.5j])
    def test_index_symmetry(self, b):
        assert rel(sf.whittaker_w(1, b, 1.0), sf.whittaker_w(1, -b, 1.0)) < 1e-10

    @pytest.mark.parametrize("a,b,z", [(1, 0.8j, 0.05), (1, 1.3j, 3.0), (0.3, 0.77, 4.0), (1, 0.999, 0.02)])
    def test_against_mpmath(self, a, b, z):
        ref = mp.whitw(a, b, z)
        assert rel(sf.whittaker_w(a, b, z), ref.real) < 1e-10
        assert isinstance(sf.whittaker_w(a, b, z), float)

    @pytest.mark.parametrize("b", [1.3, 2.2])
    def test_small_argument_law(self, b):
        def ratio(z):
            return sf.whittaker_w(1, b, z) * math.gamma(b - 0.5) / (
                math.gamma(2 * b) * z ** (0.5 - b) * math.exp(-z / 2))

        dev = [abs(ratio(10.0**-k) - 1) for k in range(2, 7)]
        assert all(x > y for x, y in zip(dev, dev[1:]))
        assert dev[-1] < 1e-3

    def test_mixed_index_rejected(self):
        with pytest.raises(DomainError):
            sf.whittaker_w(1, 0.3 + 0.3j, 1.0)

    def test_complex_first_index_fails_reality_check(self):
        with pytest.raises(SymmetryError):
            sf.whittaker_w(1 + 0.5j, 0.3, 1.0)


class TestWhittakerM:
    @pytest.mark.parametrize("a,z", [(1.0, 0.7), (2.5, 3.0), (0.8, 12.0)])
    def test_terminating_case(self, a, z):
        assert rel(sf.whittaker_m(a, a - 0.5, z), math.exp(-z / 2) * z**a) < 1e-13

    def test_leading_power(self):
        for b in (0.25, 1.0, 2.5):
            assert sf.whittaker_m(1, b, 1e-9) / 1e-9 ** (b + 0.5) == pytest.approx(1, abs=1e-8)

    def test_series_oracle(self):
        z = mp.mpf(1)
        a, b = 1, 1
        series = mp.nsum(lambda k: mp.rf(b - a + 0.5, k) / mp.rf(1 + 2 * b, k) * z**k / mp.factorial(k),
                         [0, 200])
        ref = mp.e ** (-z / 2) * z ** (b + 0.5) * series
        assert rel(sf.whittaker_m(1, 1, 1.0), ref) < 1e-10

    @pytest.mark.parametrize("a,b,z", [(1, 0.7, 40.0), (1, 1.5, 300.0), (0.2, 0.1, 2.0)])
    def test_against_mpmath(self, a, b, z):
        assert rel(sf.whittaker_m(a, b, z), mp.whitm(a, b, z)) < 1e-10


class TestMeijerG:
    def test_value_at_one(self):
        assert sf.meijer_g3123(1.0) == pytest.approx(0.74519595638609668, abs=1e-14)

    def test_large_argument(self):
        assert sf.meijer_g3123(1e3) == pytest.approx(1e-3, rel=0.02)

    def test_strictly_decreasing(self):
        xs = np.geomspace(1e-3, 1e3, 50)
        vals = [sf.meijer_g3123(x) for x in xs]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_blows_up_at_zero(self):
        assert sf.meijer_g3123(1e-12) > 300

    @pytest.mark.parametrize("x", [1e-6, 0.01, 0.1, 1.0, 10.0, 49.5, 50.0, 77.0, 1e3])
    def test_two_routes_and_mpmath(self, x):
        ref = mp.meijerg([[0], [1]], [[0, 0, 0], []], x)
        assert rel(sf.meijer_g3123(x), ref) < 1e-12
        assert rel(sf.meijer_g3123_alt(x), ref) < 1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            sf.meijer_g3123(-1.0)


class TestLFunc:
    def test_value_at_one(self):
        assert sf.l_func(1.0) == pytest.approx(0.34154331870929076, abs=1e-14)

    def test_y_times_l_decreases(self):
        vals = [y * sf.l_func(y) for y in 10.0 ** -np.arange(1, 7)]
        assert all(v > 0 for v in vals)
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_large_argument_small(self):
        assert abs(sf.l_func(1e3)) <= 0.01
        assert sf.l_func(1e3) == pytest.approx(1 / 2e3, rel=0.01)

    def test_positive_near_origin(self):
        assert all(sf.l_func(x) > 0 for x in np.geomspace(1e-3, 1, 25))

    @pytest.mark.parametrize("x", [1e-4, 0.5, 3.0, 60.0])
    def test_against_mpmath(self, x):
        ref = mp.e**x * mp.e1(x) - 1 + x * mp.meijerg([[0], [1]], [[0, 0, 0], []], x)
        assert rel(sf.l_func(x), ref) < 1e-11
