import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hopgeo import GeometryError, HopfieldEnergy, NetworkSpec, Quadratic, QuadraticIdentity, SeparablePotential, Softplus
from hopgeo.compressibility import kappa_closed_form
from hopgeo.errors import NumericalError
from hopgeo.geometry import (
    EuclideanMetric,
    GeneralPotential,
    closedness_tolerance,
    coderivative_of,
    dual_metric_check,
    laplace_beltrami,
    metric_at,
    metric_dual_one_form,
    one_form_closedness,
)
from hopgeo.models import GeneralizedHopfield, hopfield_rhs

from conftest import make_network


class TestMetricAt:
    def test_softplus_origin(self):
        m = metric_at(SeparablePotential(Softplus(), 2), np.zeros(2))
        np.testing.assert_allclose(m.g, [0.25, 0.25])
        np.testing.assert_allclose(m.g_inv, [4.0, 4.0])
        assert m.sqrt_det == pytest.approx(0.25)

    def test_softplus_log_two(self):
        m = metric_at(SeparablePotential(Softplus(), 1), [math.log(2.0)])
        np.testing.assert_allclose(m.g, [2.0 / 9.0], rtol=1e-15)
        np.testing.assert_allclose(m.g_inv, [4.5], rtol=1e-15)

    def test_quadratic_is_flat(self):
        m = metric_at(SeparablePotential(Quadratic(1.0), 3), [5.0, -2.0, 0.3])
        np.testing.assert_array_equal(m.g, np.ones(3))
        assert m.sqrt_det == 1.0

    def test_inverse_and_determinant(self, rng):
        sp = SeparablePotential(Softplus(), 4)
        for _ in range(20):
            m = metric_at(sp, rng.uniform(-5, 5, 4))
            np.testing.assert_allclose(m.matrix() @ m.inverse_matrix(), np.eye(4), atol=1e-10)
            assert m.sqrt_det == pytest.approx(math.sqrt(np.prod(m.g)), rel=1e-12)

    def test_flat_direction_rejected(self):
        # psi'' underflows to zero far out on the softplus tail.
        with pytest.raises(GeometryError, match=r"U\[1\]"):
            metric_at(SeparablePotential(Softplus(), 2), [0.0, 800.0])

    def test_non_finite_rejected(self):
        with pytest.raises(GeometryError):
            metric_at(SeparablePotential(Softplus(), 1), [math.nan])

    def test_lower_and_raise_are_inverse(self, rng):
        m = metric_at(SeparablePotential(Softplus(), 3), rng.uniform(-2, 2, 3))
        x = rng.normal(size=3)
        np.testing.assert_allclose(m.raise_(m.lower(x)), x, rtol=1e-14)
        assert m.norm_squared(x) == pytest.approx(float(np.sum(m.g * x * x)))


class TestDualMetric:
    def test_softplus_origin(self):
        assert dual_metric_check(SeparablePotential(Softplus(), 1), [0.0]) <= 1e-5

    def test_quadratic(self):
        assert dual_metric_check(SeparablePotential(Quadratic(1.0), 1), [5.0]) <= 1e-8

    @pytest.mark.parametrize("n", [1, 2, 4])
    def test_random_points(self, rng, n):
        sp = SeparablePotential(Softplus(), n)
        worst = max(dual_metric_check(sp, rng.uniform(-3, 3, n)) for _ in range(100))
        assert worst <= 1e-5


class TestLaplaceBeltrami:
    def test_flat_quadratic(self):
        sp = SeparablePotential(Quadratic(1.0), 3)
        val = laplace_beltrami(sp, lambda U: float(np.sum(U**2)), np.array([0.3, -1.0, 2.0]))
        assert val == pytest.approx(6.0, abs=1e-6)

    def test_coordinate_function_at_origin(self):
        sp = SeparablePotential(Softplus(), 1)
        assert laplace_beltrami(sp, lambda U: float(U[0]), np.zeros(1)) == pytest.approx(0.0, abs=1e-6)

    def test_coordinate_function_at_log_two(self):
        sp = SeparablePotential(Softplus(), 1)
        val = laplace_beltrami(sp, lambda U: float(U[0]), np.array([math.log(2.0)]))
        assert val == pytest.approx(0.75, abs=1e-5)

    def test_linearity(self, rng):
        sp = SeparablePotential(Softplus(), 3)
        f = lambda U: float(np.sin(U).sum())  # noqa: E731
        g = lambda U: float(np.prod(np.cos(U)))  # noqa: E731
        U = rng.uniform(-2, 2, 3)
        combo = laplace_beltrami(sp, lambda x: 2.0 * f(x) - 3.0 * g(x), U)
        parts = 2.0 * laplace_beltrami(sp, f, U) - 3.0 * laplace_beltrami(sp, g, U)
        assert combo == pytest.approx(parts, abs=1e-6)

    def test_richardson_improves_accuracy(self):
        sp = SeparablePotential(Softplus(), 1)
        U = np.array([math.log(2.0)])
        plain = laplace_beltrami(sp, lambda x: float(x[0]), U, rel_step=1e-2)
        extrap = laplace_beltrami(sp, lambda x: float(x[0]), U, rel_step=1e-2, richardson=True)
        assert abs(extrap - 0.75) < abs(plain - 0.75)

    def test_general_route_matches_diagonal(self, rng):
        sp = SeparablePotential(Softplus(), 2)
        general = GeneralPotential(lambda U: float(np.sum(np.logaddexp(0.0, U))), 2)
        f = lambda U: float(U[0] ** 2 - U[0] * U[1] + np.sin(U[1]))  # noqa: E731
        U = rng.uniform(-1.5, 1.5, 2)
        assert laplace_beltrami(general, f, U) == pytest.approx(laplace_beltrami(sp, f, U), rel=1e-4, abs=1e-5)

    def test_euclidean_provider(self):
        val = laplace_beltrami(EuclideanMetric(2), lambda U: float(U[0] ** 2 + 3 * U[1] ** 2), np.array([0.4, 0.1]))
        assert val == pytest.approx(8.0, abs=1e-5)

    def test_non_finite_stencil(self):
        sp = SeparablePotential(Softplus(), 1)
        with pytest.raises(NumericalError):
            laplace_beltrami(sp, lambda U: math.inf, np.zeros(1))


class TestGeneralPotential:
    def test_non_separable_metric(self):
        A = np.array([[2.0, 0.5], [0.5, 1.0]])
        p = GeneralPotential(lambda U: 0.5 * U @ A @ U, 2, grad=lambda U: A @ U, hess=lambda U: A)
        m = p.metric_at(np.zeros(2))
        assert not m.is_diagonal
        assert m.sqrt_det == pytest.approx(math.sqrt(np.linalg.det(A)))

    def test_indefinite_rejected(self):
        p = GeneralPotential(lambda U: U[0] ** 2 - U[1] ** 2, 2)
        with pytest.raises(GeometryError):
            p.metric_at(np.zeros(2))


class TestClosedness:
    def test_gradient_system(self, rng):
        sp = SeparablePotential(Softplus(), 3)
        model = GeneralizedHopfield(QuadraticIdentity(3), sp)
        U = rng.uniform(-2, 2, 3)
        assert one_form_closedness(model.field, sp, U) <= closedness_tolerance(model.field, sp, U)

    def test_symmetric_hopfield(self, rng):
        sp = SeparablePotential(Softplus(), 3)
        model = GeneralizedHopfield(HopfieldEnergy(make_network(rng, 3), Softplus()), sp)
        for _ in range(20):
            U = rng.uniform(-2, 2, 3)
            assert one_form_closedness(model.field, sp, U) <= closedness_tolerance(model.field, sp, U)

    def test_asymmetric_negative_control(self):
        sp = SeparablePotential(Softplus(), 3)
        J = np.array([[0.0, 0.8, 0.1], [-0.2, 0.0, 0.3], [0.1, 0.3, 0.0]])
        field = lambda U: hopfield_rhs(J, [1.0, 1.0, 1.0], [0.0, 0.0, 0.0], Softplus(), U)  # noqa: E731
        U = np.array([0.2, -0.4, 0.9])
        assert one_form_closedness(field, sp, U) > closedness_tolerance(field, sp, U)

    def test_one_dimension_is_trivially_closed(self):
        sp = SeparablePotential(Softplus(), 1)
        assert one_form_closedness(lambda U: -np.sin(U), sp, np.array([0.3])) == 0.0


class TestCoderivative:
    def test_gradient_example_origin(self):
        sp = SeparablePotential(Softplus(), 1)
        model = GeneralizedHopfield(QuadraticIdentity(1), sp)
        val = coderivative_of(metric_dual_one_form(model.field, sp), sp, np.zeros(1))
        assert val == pytest.approx(-0.25, abs=1e-6)

    def test_zero_form(self):
        sp = SeparablePotential(Softplus(), 2)
        assert coderivative_of(lambda U: np.zeros(2), sp, np.array([0.5, -1.0])) == 0.0

    def test_hopfield_steady_state(self):
        from hopgeo.dynamics import find_steady_state

        spec = NetworkSpec([[0.0, 0.3], [0.3, 0.0]], [1.0, 2.0], [0.0, 0.0])
        sp = SeparablePotential(Softplus(), 2)
        model = GeneralizedHopfield(HopfieldEnergy(spec, Softplus()), sp)
        Ustar, _ = find_steady_state(model, np.zeros(2))
        val = coderivative_of(metric_dual_one_form(model.field, sp), sp, Ustar)
        assert val == pytest.approx(-1.5, abs=1e-6)

    def test_equals_kappa(self, rng):
        sp = SeparablePotential(Softplus(), 3)
        model = GeneralizedHopfield(HopfieldEnergy(make_network(rng, 3), Softplus()), sp)
        w = metric_dual_one_form(model.field, sp)
        for _ in range(10):
            U = rng.uniform(-3, 3, 3)
            assert coderivative_of(w, sp, U) == pytest.approx(kappa_closed_form(model.energy, sp, U), abs=1e-4)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(min_value=-3.0, max_value=3.0, allow_nan=False), min_size=1, max_size=4))
def test_pairing_property(U):
    m = metric_at(SeparablePotential(Softplus(), len(U)), np.array(U))
    np.testing.assert_allclose(m.g * m.g_inv, 1.0, atol=1e-12)
