"""Phase-space compressibility of generalized Hopfield flows.

Three independent routes to ``kappa``, the rate at which the Riemannian
volume ``sqrt|g| dU`` contracts along the flow:

* :func:`kappa_closed_form` - separable potentials only; analytic derivative
  chains of ``psi`` and ``H``.
* :func:`kappa_laplacian` - minus the Laplace-Beltrami operator of ``H``
  (finite differences of ``H`` composed with the dual map).
* :func:`kappa_divergence_oracle` - weighted divergence of the vector field
  itself, knowing nothing about ``H``.

:func:`volume_contraction_run` checks the same quantity dynamically, by
propagating the tangent map along a trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
from itertools import combinations
from typing import Callable

import numpy as np
from scipy import integrate

from . import _fd, kernels
from .errors import NumericalError, UnsupportedRouteError
from .geometry import EuclideanMetric, laplace_beltrami, weighted_divergence
from .models import EnergyFunction, GeneralizedHopfield
from .potentials import SeparablePotential


@dataclass(frozen=True)
class KappaReport:
    point_U: np.ndarray
    kappa_closed_form: float
    kappa_laplacian: float
    kappa_divergence: float
    max_pairwise_residual: float

    def values(self):
        return (self.kappa_closed_form, self.kappa_laplacian, self.kappa_divergence)

    def within_tolerance(self, rel=1e-4):
        return self.max_pairwise_residual <= rel * max(1.0, abs(self.kappa_closed_form))

    def to_dict(self):
        d = asdict(self)
        d["point_U"] = np.asarray(self.point_U).tolist()
        return d


def kappa_closed_form(energy: EnergyFunction, sp, U):
    """``-sum_a (psi''' dH/dV_a / 2 + psi''^2 d2H/dV_a^2) / psi''``.

    Broadcasts over leading axes of ``U``.
    """
    if not isinstance(sp, SeparablePotential):
        raise UnsupportedRouteError("closed-form compressibility needs a separable potential; use kappa_laplacian")
    U = np.asarray(U, dtype=float)
    V = sp.check_V(sp.to_dual(U))
    d2 = np.asarray(sp.potential.d2(U), dtype=float)
    d3 = np.asarray(sp.potential.d3(U), dtype=float)
    dH = energy.grad(V, U)
    d2H = energy.hess_diag(V, U)
    out = -np.sum(0.5 * d3 / d2 * dH + d2 * d2H, axis=-1)
    return float(out) if out.ndim == 0 else out


def energy_in_primal(energy: EnergyFunction, potential) -> Callable:
    """``U -> H(V(U))`` for a separable or general potential."""
    if isinstance(potential, SeparablePotential):
        return lambda x: float(energy.value(potential.check_V(potential.to_dual(x)), x))
    return lambda x: float(energy.value(potential.to_dual(x)))


def gradient_flow_field(energy: EnergyFunction, potential) -> Callable:
    """``U -> -dH/dV`` at ``V = dPsi/dU``."""
    if isinstance(potential, SeparablePotential):
        return lambda x: -energy.grad(potential.check_V(potential.to_dual(x)), np.asarray(x, dtype=float))
    return lambda x: -np.asarray(energy.grad(potential.to_dual(x)), dtype=float)


def kappa_laplacian(energy: EnergyFunction, potential, U, rel_step=None, richardson=False) -> float:
    """``-Delta_g H`` with ``H`` pulled back to the primal chart."""
    return -laplace_beltrami(potential, energy_in_primal(energy, potential), U, rel_step, richardson)


def kappa_divergence_oracle(field: Callable, metric_field, U, rel_step=None) -> float:
    """``(1/sqrt|g|) sum_a d_a(sqrt|g| X^a)`` by central differences."""
    U = np.asarray(U, dtype=float)
    return weighted_divergence(field, metric_field, U, _fd.axis_steps(U, rel_step or _fd.DEFAULT_REL_STEP))


def kappa_report(energy: EnergyFunction, sp: SeparablePotential, U) -> KappaReport:
    U = np.asarray(U, dtype=float)
    values = (
        float(kappa_closed_form(energy, sp, U)),
        float(kappa_laplacian(energy, sp, U)),
        float(kappa_divergence_oracle(gradient_flow_field(energy, sp), sp, U)),
    )
    if not all(np.isfinite(values)):
        raise NumericalError(f"non-finite compressibility at U = {U.tolist()}")
    residual = max(abs(a - b) for a, b in combinations(values, 2))
    return KappaReport(U, *values, residual)


class LinearField:
    """``dq^a/dt = -rate_a q^a`` with the flat volume; ``kappa = -sum rate_a``."""

    def __init__(self, rates):
        self.rates = np.asarray(rates, dtype=float)
        self.n = self.rates.size

    def field(self, U):
        return -self.rates * np.asarray(U, dtype=float)

    def jacobian(self, U):
        return -np.diag(self.rates)

    def kappa(self, U):
        return -float(np.sum(self.rates))

    def metric_field(self):
        return EuclideanMetric(self.n)

    def kernel_form(self):
        z = np.zeros(self.n)
        return np.zeros((self.n, self.n)), self.rates.copy(), z, 1, 1.0


class PlanarHamiltonianField:
    """Harmonic oscillator ``(dq/dt, dp/dt) = (p, -q)``; volume preserving."""

    n = 2

    def field(self, U):
        q, p = np.asarray(U, dtype=float)
        return np.array([p, -q])

    def jacobian(self, U):
        return np.array([[0.0, 1.0], [-1.0, 0.0]])

    def kappa(self, U):
        return 0.0

    def metric_field(self):
        return EuclideanMetric(2)

    def kernel_form(self):
        return None


@dataclass(frozen=True)
class VolumeLedger:
    """Log volume ratio from the tangent map versus the integrated ``kappa``."""

    T: float
    dt: float
    n_steps: int
    log_volume_ratio: float
    integrated_kappa: float
    abs_discrepancy: float
    rel_discrepancy: float
    completed: bool

    def to_dict(self):
        return asdict(self)


class VolumeRunError(NumericalError):
    def __init__(self, message, ledger):
        super().__init__(message)
        self.ledger = ledger


def _rk4_variational(flow, U0, dt, n_steps):
    def rhs(u, M):
        return np.asarray(flow.field(u), dtype=float), np.asarray(flow.jacobian(u), dtype=float) @ M

    u = np.array(U0, dtype=float)
    M = np.eye(u.size)
    states = [u.copy()]
    for k in range(n_steps):
        k1 = rhs(u, M)
        k2 = rhs(u + 0.5 * dt * k1[0], M + 0.5 * dt * k1[1])
        k3 = rhs(u + 0.5 * dt * k2[0], M + 0.5 * dt * k2[1])
        k4 = rhs(u + dt * k3[0], M + dt * k3[1])
        u_new = u + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        M_new = M + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(M_new))):
            return np.array(states), M, kernels.NONFINITE, k + 1
        u, M = u_new, M_new
        states.append(u.copy())
    return np.array(states), M, kernels.T_MAX, -1


def _kappa_along(flow, states):
    if isinstance(flow, GeneralizedHopfield):
        return np.asarray(flow.kappa(states), dtype=float)
    return np.array([flow.kappa(u) for u in states], dtype=float)


def _ledger(lhs, rhs, T, dt, n_steps, completed):
    diff = abs(lhs - rhs)
    return VolumeLedger(T, dt, n_steps, lhs, rhs, diff, diff / max(1.0, abs(rhs)), completed)


def volume_contraction_run(flow, U0, T, dt, backend=None) -> VolumeLedger:
    """Compare ``ln[det M(T) sqrt|g(U_T)| / sqrt|g(U_0)|]`` with ``int_0^T kappa dt``.

    ``M`` solves the variational equation ``dM/dt = DF(U) M``, ``M(0) = I``,
    co-integrated with the state by RK4; the ``kappa`` integral is composite
    Simpson on the same step nodes.  The relative discrepancy is scaled by
    ``max(1, |int kappa|)``.
    """
    n_steps = int(round(T / dt))
    if n_steps < 1:
        raise ValueError("T must span at least one step")
    dt = T / n_steps
    form = flow.kernel_form()
    if form is not None:
        states, M, status, fail = kernels.integrate_affine_variational(*form, np.asarray(U0, dtype=float), dt, n_steps, backend=backend)
    else:
        states, M, status, fail = _rk4_variational(flow, U0, dt, n_steps)

    metric = flow.metric_field()
    kappas = _kappa_along(flow, states)
    done = len(states) - 1
    rhs = float(integrate.simpson(kappas, dx=dt)) if done >= 1 else 0.0
    sign, logdet = np.linalg.slogdet(M)
    if status != kernels.T_MAX or sign <= 0 or not np.all(np.isfinite(kappas)):
        partial = _ledger(float(logdet) if sign > 0 else float("nan"), rhs, done * dt, dt, done, False)
        raise VolumeRunError(f"volume run failed at step {fail if fail >= 0 else done}", partial)
    lhs = float(logdet) + np.log(metric.metric_at(states[-1]).sqrt_det) - np.log(metric.metric_at(states[0]).sqrt_det)
    return _ledger(float(lhs), rhs, T, dt, n_steps, True)
