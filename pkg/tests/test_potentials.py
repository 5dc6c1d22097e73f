import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hopgeo import CustomPotential, DomainError, Quadratic, SeparablePotential, Softplus, legendre_dual, softplus_chain
from hopgeo.errors import ConvergenceError
from hopgeo.potentials import from_dual, to_dual

# Reference values from tools/oracles.py (40-digit mpmath).
SOFTPLUS_TABLE = [
    (-3.0, 0.048587351573742058759, 0.047425873177566780879, 0.045176659730912132649, 0.040891574660943478616),
    (0.0, 0.69314718055994530942, 0.5, 0.25, 0.0),
    (math.log(2.0), 1.0986122886681096914, 2.0 / 3.0, 2.0 / 9.0, -2.0 / 27.0),
    (2.5, 2.5788897342925496233, 0.92414181997875644881, 0.070103716545108156932, -0.059467835845434067774),
    (40.0, 40.000000000000000004, 0.99999999999999999575, 4.2483542552915889592e-18, -4.2483542552915889231e-18),
    (700.0, 700.0, 1.0, 9.8596765437597708567e-305, -9.8596765437597708567e-305),
]

DUAL_TABLE = [
    (0.1, -0.3250829733914482517),
    (0.5, -0.69314718055994530942),
    (2.0 / 3.0, -0.63651416829481281845),
    (0.9, -0.32508297339144819072),
]


def cubic_quartic():
    # psi(x) = x^2/2 + x^4/12 on the whole line; psi' is a bijection onto R.
    return CustomPotential(
        lambda x: 0.5 * x * x + x**4 / 12.0,
        lambda x: x + x**3 / 3.0,
        lambda x: 1.0 + x * x,
        domain=(-math.inf, math.inf),
        dual_domain=(-math.inf, math.inf),
    )


def entropy_like():
    # psi(x) = exp(x): psi' maps R onto (0, inf).
    return CustomPotential(math.exp, math.exp, math.exp, domain=(-math.inf, math.inf), dual_domain=(0.0, math.inf), d3=math.exp)


class TestSoftplusChain:
    @pytest.mark.parametrize("x, psi, d1, d2, d3", SOFTPLUS_TABLE)
    def test_reference_values(self, x, psi, d1, d2, d3):
        out = softplus_chain(x)
        np.testing.assert_allclose(out, (psi, d1, d2, d3), rtol=1e-14, atol=0)

    def test_symmetry_point(self):
        assert softplus_chain(0.0) == pytest.approx((math.log(2), 0.5, 0.25, 0.0), abs=1e-15)

    def test_no_overflow_for_large_negative(self):
        psi, d1, d2, d3 = softplus_chain(-700.0)
        assert all(math.isfinite(v) for v in (psi, d1, d2, d3))
        assert psi == pytest.approx(math.exp(-700.0), rel=1e-12)

    @pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
    def test_non_finite_rejected(self, bad):
        with pytest.raises(DomainError):
            softplus_chain(bad)

    def test_third_derivative_by_differences(self):
        x = math.log(2.0)
        h = 1e-4
        p = Softplus()
        fd = (p.d2(x + h) - p.d2(x - h)) / (2 * h)
        assert fd == pytest.approx(-2.0 / 27.0, rel=1e-7)

    def test_d1_is_derivative_of_eval(self):
        p = Softplus()
        x = np.linspace(-20, 20, 401)
        h = 1e-5
        fd = (p.eval(x + h) - p.eval(x - h)) / (2 * h)
        np.testing.assert_allclose(fd, p.d1(x), rtol=1e-6)

    def test_vectorized_matches_scalar(self):
        p = Softplus()
        x = np.array([-5.0, -0.3, 0.0, 1.7, 36.0, 50.0])
        for fn in (p.eval, p.d1, p.d2, p.d3):
            np.testing.assert_array_equal(fn(x), [fn(float(v)) for v in x])


class TestLegendreDual:
    @pytest.mark.parametrize("v, expected", DUAL_TABLE)
    def test_softplus_dual_values(self, v, expected):
        x, psi_star = legendre_dual(Softplus(), v)
        assert psi_star == pytest.approx(expected, rel=1e-14)
        assert x == pytest.approx(math.log(v / (1 - v)), abs=1e-14)

    def test_symmetric_point(self):
        x, psi_star = legendre_dual(Softplus(), 0.5)
        assert x == 0.0
        assert psi_star == pytest.approx(-math.log(2.0), rel=1e-15)

    def test_unit_quadratic(self):
        assert legendre_dual(Quadratic(1.0), 3.0) == pytest.approx((3.0, 4.5))

    def test_scaled_quadratic(self):
        x, psi_star = legendre_dual(Quadratic(2.0), 3.0)
        assert x == pytest.approx(1.5)
        assert psi_star == pytest.approx(9.0 / 4.0)

    def test_two_thirds_pairing(self):
        p = Softplus()
        x, psi_star = legendre_dual(p, 2.0 / 3.0)
        assert x == pytest.approx(math.log(2.0), abs=1e-15)
        assert p.eval(x) + psi_star == pytest.approx(x * 2.0 / 3.0, abs=1e-15)

    @pytest.mark.parametrize("v", [0.0, 1.0, -0.1, 1.5])
    def test_boundary_rejected(self, v):
        with pytest.raises(DomainError):
            legendre_dual(Softplus(), v)

    def test_custom_matches_closed_form_inverse(self):
        p = cubic_quartic()
        for v in (-5.0, -0.2, 0.0, 1.0, 30.0):
            x, psi_star = legendre_dual(p, v)
            assert abs(p.d1(x) - v) <= 1e-12 * max(1.0, abs(v))
            assert p.eval(x) + psi_star == pytest.approx(x * v, abs=1e-10)

    def test_custom_half_line_dual(self):
        p = entropy_like()
        x, psi_star = legendre_dual(p, 2.5)
        assert x == pytest.approx(math.log(2.5), abs=1e-12)
        assert psi_star == pytest.approx(2.5 * math.log(2.5) - 2.5, abs=1e-12)
        with pytest.raises(DomainError):
            legendre_dual(p, 0.0)

    def test_custom_nonconvergence(self):
        # d1 saturates below the requested value, so no root exists in any bracket.
        p = CustomPotential(
            lambda x: x,
            lambda x: math.tanh(x),
            lambda x: 1.0 / math.cosh(x) ** 2,
            domain=(-math.inf, math.inf),
            dual_domain=(-2.0, 2.0),
        )
        with pytest.raises(ConvergenceError):
            p.inverse_d1(1.5)


class TestCustomPotential:
    def test_third_derivative_defaults_to_differences(self):
        p = cubic_quartic()
        for x in (-3.0, 0.0, 0.5, 10.0):
            assert p.d3(x) == pytest.approx(2.0 * x, abs=1e-6 * max(1.0, abs(x)))

    def test_supplied_third_derivative_is_used(self):
        assert entropy_like().d3(1.0) == math.exp(1.0)

    def test_empty_domain_rejected(self):
        with pytest.raises(DomainError):
            CustomPotential(abs, abs, abs, domain=(1.0, 1.0), dual_domain=(0.0, 1.0))


class TestSeparablePotential:
    def test_round_trip(self, rng):
        sp = SeparablePotential(Softplus(), 5)
        U = rng.uniform(-10, 10, size=(50, 5))
        np.testing.assert_allclose(from_dual(sp, to_dual(sp, U)), U, rtol=1e-9, atol=1e-10)

    def test_value_is_sum(self):
        sp = SeparablePotential(Softplus(), 3)
        U = np.array([-1.0, 0.0, 2.0])
        assert sp.value(U) == pytest.approx(sum(Softplus().eval(u) for u in U))

    def test_dual_index_in_error(self):
        sp = SeparablePotential(Softplus(), 3)
        with pytest.raises(DomainError, match=r"V\[2\]"):
            sp.from_dual([0.2, 0.5, 1.0])

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            SeparablePotential(Softplus(), 3).to_dual([0.0, 1.0])

    def test_bad_dimension(self):
        with pytest.raises(DomainError):
            SeparablePotential(Softplus(), 0)

    def test_non_finite_primal(self):
        with pytest.raises(DomainError):
            SeparablePotential(Softplus(), 2).to_dual([0.0, math.nan])


finite_x = st.floats(min_value=-30.0, max_value=30.0, allow_nan=False)
interior_v = st.floats(min_value=1e-9, max_value=1 - 1e-9, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(finite_x)
def test_involution_property(x):
    p = Softplus()
    assert abs(p.eval(x) + p.dual_eval(p.d1(x)) - x * p.d1(x)) <= 1e-12 * max(1.0, abs(x))


@settings(max_examples=300, deadline=None)
@given(finite_x)
def test_strict_convexity_property(x):
    assert Softplus().d2(x) > 0.0


@settings(max_examples=300, deadline=None)
@given(interior_v)
def test_dual_inverse_property(v):
    p = Softplus()
    assert p.d1(p.inverse_d1(v)) == pytest.approx(v, rel=1e-12, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=-50.0, max_value=50.0, allow_nan=False))
def test_custom_newton_residual_property(v):
    p = cubic_quartic()
    assert abs(p.d1(p.inverse_d1(v)) - v) <= 1e-12 * max(1.0, abs(p.inverse_d1(v)), abs(v))
