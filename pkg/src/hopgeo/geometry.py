"""Hessian metric of a convex potential and the calculus built on it.

Metric providers are any object with a ``metric_at(U)`` method returning a
:class:`HessianMetricPoint`.  :class:`~hopgeo.potentials.SeparablePotential`
is one (diagonal metric, analytic third derivatives), as are
:class:`GeneralPotential` (full Hessian, analytic or finite-difference) and
:class:`EuclideanMetric`.

Derivatives of scalar fields and one-forms are central differences with
per-axis step ``rel_step * max(1, |U^a|)``; metric data comes from the
provider directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _fd
from .errors import GeometryError, NumericalError
from .potentials import SeparablePotential

GENERAL_OUTER_REL_STEP = 1e-3


@dataclass(frozen=True)
class HessianMetricPoint:
    """Metric data at one point.

    For diagonal metrics ``g`` and ``g_inv`` are length-``n`` vectors of the
    diagonal entries and ``third`` holds ``psi'''(U^a)``; otherwise they are
    ``n x n`` matrices and ``third`` is ``None``.
    """

    point_U: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    sqrt_det: float
    third: Optional[np.ndarray] = None

    @property
    def is_diagonal(self):
        return self.g.ndim == 1

    def matrix(self):
        return np.diag(self.g) if self.is_diagonal else self.g

    def inverse_matrix(self):
        return np.diag(self.g_inv) if self.is_diagonal else self.g_inv

    def lower(self, vector):
        """Lower an index: ``g_ab X^b``."""
        return self.g * vector if self.is_diagonal else self.g @ vector

    def raise_(self, form):
        """Raise an index: ``g^ab w_b``."""
        return self.g_inv * form if self.is_diagonal else self.g_inv @ form

    def norm_squared(self, vector):
        return float(np.dot(vector, self.lower(vector)))


def metric_at(sp: SeparablePotential, U) -> HessianMetricPoint:
    U = np.asarray(U, dtype=float)
    if not np.all(np.isfinite(U)):
        raise GeometryError("non-finite point")
    g = np.asarray(sp.potential.d2(U), dtype=float).reshape(U.shape)
    if not np.all(np.isfinite(g)) or np.any(g <= 0.0):
        bad = int(np.argmax(~(np.isfinite(g) & (g > 0))))
        raise GeometryError(f"potential not strictly convex at U[{bad}] = {U[bad]!r} (psi'' = {g[bad]!r})")
    third = np.asarray(sp.potential.d3(U), dtype=float).reshape(U.shape)
    return HessianMetricPoint(U, g, 1.0 / g, float(np.sqrt(np.prod(g))), third)


class EuclideanMetric:
    """Flat metric ``delta_ab`` in ``n`` dimensions."""

    def __init__(self, n):
        self.n = int(n)

    def metric_at(self, U):
        U = np.asarray(U, dtype=float)
        return HessianMetricPoint(U, np.ones(self.n), np.ones(self.n), 1.0, np.zeros(self.n))


class GeneralPotential:
    """A possibly non-separable strictly convex ``Psi`` on R^n.

    ``grad`` and ``hess`` are optional analytic derivatives; missing ones
    are filled in by finite differences (five-point gradient, central
    Hessian), which limits downstream Laplacians to roughly 1e-5 accuracy.
    """

    def __init__(self, psi: Callable, n: int, grad: Optional[Callable] = None, hess: Optional[Callable] = None):
        self.psi = psi
        self.n = int(n)
        self._grad = grad
        self._hess = hess

    def value(self, U):
        return float(self.psi(np.asarray(U, dtype=float)))

    def to_dual(self, U):
        U = np.asarray(U, dtype=float)
        if self._grad is not None:
            return np.asarray(self._grad(U), dtype=float)
        return _fd.gradient(self.psi, U, _fd.axis_steps(U, 1e-3), accurate=True)

    def hessian(self, U):
        U = np.asarray(U, dtype=float)
        if self._hess is not None:
            return np.asarray(self._hess(U), dtype=float)
        return _fd.hessian(self.psi, U)

    def metric_at(self, U):
        U = np.asarray(U, dtype=float)
        G = self.hessian(U)
        G = 0.5 * (G + G.T)
        try:
            L = np.linalg.cholesky(G)
        except np.linalg.LinAlgError:
            raise GeometryError(f"Hessian not positive definite at U = {U.tolist()}") from None
        sqrt_det = float(np.prod(np.diag(L)))
        return HessianMetricPoint(U, G, np.linalg.inv(G), sqrt_det, None)


def _dual_steps(sp, V):
    lo, hi = sp.potential.dual_domain
    room = np.minimum(V - lo, hi - V)
    return 1e-3 * np.minimum(np.maximum(1.0, np.abs(V)), room)


def dual_metric_check(sp: SeparablePotential, U) -> float:
    """Largest entry of ``|g^{ab} - d^2 Psi*/dV_a dV_b|`` at ``U``.

    The dual Hessian is a finite-difference Hessian of the Legendre dual,
    an oracle independent of the analytic inverse metric.
    """
    U = np.asarray(U, dtype=float)
    V = sp.check_V(sp.to_dual(U))
    dual_hess = _fd.hessian(sp.dual_value, V, _dual_steps(sp, V))
    g_inv = metric_at(sp, U).inverse_matrix()
    return float(np.max(np.abs(g_inv - dual_hess)))


def _laplacian_diagonal(m, f, U, steps):
    f0 = float(f(U))
    total = 0.0
    for a in range(U.size):
        e = np.zeros_like(U)
        e[a] = steps[a]
        fp, fm = float(f(U + e)), float(f(U - e))
        if not np.isfinite(fp) or not np.isfinite(fm):
            raise NumericalError("non-finite value in Laplacian stencil")
        d1 = (fp - fm) / (2 * steps[a])
        d2 = (fp - 2 * f0 + fm) / steps[a] ** 2
        # (1/sqrt g) d_a(sqrt g g^aa d_a f) with d_a ln sqrt g = psi'''/(2 psi'')
        total += (d2 - 0.5 * m.third[a] / m.g[a] * d1) / m.g[a]
    return total


def _laplacian_general(metric_field, f, U, steps):
    def flux(x):
        grad = _fd.gradient(f, x, steps)
        m = metric_field.metric_at(x)
        return m.sqrt_det * m.raise_(grad)

    return weighted_divergence(flux, metric_field, U, steps, presqrt=True)


def laplace_beltrami(metric_field, f: Callable, U, rel_step=None, richardson=False) -> float:
    """Laplace-Beltrami operator of the scalar ``f`` at ``U``.

    Diagonal metrics use the closed diagonal form with analytic metric
    derivatives; general metrics use the nested divergence form.
    ``richardson=True`` combines steps ``h`` and ``h/2`` to cancel the
    leading truncation term.
    """
    U = np.asarray(U, dtype=float)
    m = metric_field.metric_at(U)
    if rel_step is None:
        rel_step = _fd.DEFAULT_REL_STEP if m.is_diagonal and m.third is not None else GENERAL_OUTER_REL_STEP

    def once(h):
        steps = _fd.axis_steps(U, h)
        if m.is_diagonal and m.third is not None:
            return _laplacian_diagonal(m, f, U, steps)
        return _laplacian_general(metric_field, f, U, steps)

    if richardson:
        return (4.0 * once(0.5 * rel_step) - once(rel_step)) / 3.0
    return once(rel_step)


def weighted_divergence(vector: Callable, metric_field, U, steps=None, presqrt=False) -> float:
    """``(1/sqrt|g|) sum_a d_a(sqrt|g| X^a)`` by central differences.

    With ``presqrt=True`` the callable already returns ``sqrt|g| X``.
    """
    U = np.asarray(U, dtype=float)
    if steps is None:
        steps = _fd.axis_steps(U)

    if presqrt:
        flux = vector
    else:
        def flux(x):
            return metric_field.metric_at(x).sqrt_det * np.asarray(vector(x), dtype=float)

    total = 0.0
    for a in range(U.size):
        total += _fd.partial(lambda x: flux(x)[a], U, a, steps[a])
    return float(total / metric_field.metric_at(U).sqrt_det)


def metric_dual_one_form(field: Callable, metric_field) -> Callable:
    """One-form ``w_b = g_ab X^a`` of a vector field, in the U basis."""

    def one_form(U):
        U = np.asarray(U, dtype=float)
        return metric_field.metric_at(U).lower(np.asarray(field(U), dtype=float))

    return one_form


def one_form_closedness(field: Callable, metric_field, U, rel_step=None) -> float:
    """Largest antisymmetric part ``|d_a w_b - d_b w_a|`` of ``w = g(X, -)``.

    Compare against :func:`closedness_tolerance`; zero means ``dw = 0``.
    """
    U = np.asarray(U, dtype=float)
    w = metric_dual_one_form(field, metric_field)
    steps = _fd.axis_steps(U, rel_step or _fd.DEFAULT_REL_STEP)
    Dw = _fd.jacobian(w, U, steps)
    if U.size < 2:
        return 0.0
    return float(np.max(np.abs(Dw - Dw.T)))


def closedness_tolerance(field: Callable, metric_field, U) -> float:
    w = metric_dual_one_form(field, metric_field)(U)
    return 1e-5 * max(1.0, float(np.linalg.norm(w)))


def coderivative_of(one_form: Callable, metric_field, U, rel_step=None) -> float:
    """Co-derivative ``(1/sqrt|g|) d_a(sqrt|g| g^ab w_b)`` of a one-form.

    Taken with a plus sign, so that applied to ``g(X_H, -)`` it returns the
    compressibility of ``X_H``.
    """
    U = np.asarray(U, dtype=float)

    def raised(x):
        return metric_field.metric_at(x).raise_(np.asarray(one_form(x), dtype=float))

    steps = _fd.axis_steps(U, rel_step or _fd.DEFAULT_REL_STEP)
    return weighted_divergence(raised, metric_field, U, steps)
