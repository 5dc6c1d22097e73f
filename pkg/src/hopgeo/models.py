"""Generalized Hopfield systems ``dU/dt = -dH/dV`` and their Lyapunov data.

An energy ``H(V)`` and a separable potential determine the flow in the
primal chart.  Energies take an optional ``U`` hint alongside ``V`` so that
``U = (psi')^{-1}(V)`` need not be recomputed (and lose precision where the
activation saturates) when the caller already has it.

Also here: the restricted Cohen-Grossberg class with state-dependent
amplification ``A^a(U^a)`` and its Lyapunov function ``H'``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate

from . import _fd
from .errors import DomainError, ModelError, NumericalError
from .potentials import ConvexPotential, PotentialKind, Quadratic, SeparablePotential, Softplus

SYMMETRY_TOL = 1e-12
STEADY_TOL = 1e-10


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _check_symmetric(M, name):
    asym = float(np.max(np.abs(M - M.T))) if M.size else 0.0
    if asym > SYMMETRY_TOL:
        raise ModelError(f"{name} must be symmetric: max |{name} - {name}^T| = {asym:.3g} > {SYMMETRY_TOL:g}")


@dataclass(frozen=True)
class NetworkSpec:
    """Couplings ``J`` (symmetric), resistances ``R > 0``, currents ``I_ext``."""

    J: np.ndarray
    R: np.ndarray
    I_ext: np.ndarray

    def __post_init__(self):
        J = _frozen(np.atleast_2d(self.J))
        R = _frozen(np.atleast_1d(self.R))
        I_ext = _frozen(np.atleast_1d(self.I_ext))
        n = R.size
        if J.shape != (n, n) or I_ext.shape != (n,):
            raise ModelError(f"inconsistent shapes: J {J.shape}, R {R.shape}, I_ext {I_ext.shape}")
        if not (np.all(np.isfinite(J)) and np.all(np.isfinite(R)) and np.all(np.isfinite(I_ext))):
            raise ModelError("network parameters must be finite")
        _check_symmetric(J, "J")
        if np.any(R <= 0):
            raise ModelError(f"resistances must be positive, got {R.tolist()}")
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "I_ext", I_ext)

    @property
    def n(self):
        return self.R.size


class EnergyFunction:
    """Lyapunov function ``H(V)`` with first and second derivatives.

    Methods broadcast over leading axes of ``V`` (shape ``(..., n)``).
    """

    n: int

    def value(self, V, U=None):
        raise NotImplementedError

    def grad(self, V, U=None):
        raise NotImplementedError

    def hess(self, V, U=None):
        raise NotImplementedError

    def hess_diag(self, V, U=None):
        return np.diagonal(self.hess(V, U), axis1=-2, axis2=-1)

    def affine_form(self):
        """``(W, d, b)`` with ``-dH/dV = W V - d*U + b``, or ``None``."""
        return None


class QuadraticIdentity(EnergyFunction):
    """``H = sum_a V_a^2 / 2``; the flow is the gradient system ``dU/dt = -V``."""

    def __init__(self, n):
        self.n = int(n)

    def value(self, V, U=None):
        V = np.asarray(V, dtype=float)
        return 0.5 * np.sum(V * V, axis=-1)

    def grad(self, V, U=None):
        return np.array(V, dtype=float)

    def hess(self, V, U=None):
        V = np.asarray(V, dtype=float)
        return np.broadcast_to(np.eye(self.n), V.shape + (self.n,)).copy()

    def hess_diag(self, V, U=None):
        return np.ones(np.shape(V))

    def affine_form(self):
        return -np.eye(self.n), np.zeros(self.n), np.zeros(self.n)


class HopfieldEnergy(EnergyFunction):
    """Hopfield network energy with unit capacitances.

    ``H(V) = -sum_a [ 1/2 sum_b J^ab V_a V_b - (1/R_a) int_0^{V_a} (psi')^{-1}
    + V_a I_ext^a ]``.
    """

    def __init__(self, spec: NetworkSpec, potential: ConvexPotential):
        self.spec = spec
        self.potential = potential
        self.n = spec.n

    def _U(self, V, U):
        return self.potential.inverse_d1(V) if U is None else np.asarray(U, dtype=float)

    def value(self, V, U=None):
        V = np.asarray(V, dtype=float)
        s = self.spec
        quad = 0.5 * np.einsum("...a,ab,...b->...", V, s.J, V)
        leak = np.sum(np.asarray(self.potential.inverse_integral(V)) / s.R, axis=-1)
        return -quad + leak - np.einsum("...a,a->...", V, s.I_ext)

    def grad(self, V, U=None):
        # einsum rather than matmul: BLAS rounds batched and single-row
        # products differently, and recorded rows must match pointwise
        # re-evaluation bit for bit near steady states.
        V = np.asarray(V, dtype=float)
        s = self.spec
        return -(np.einsum("...b,ab->...a", V, s.J) - self._U(V, U) / s.R + s.I_ext)

    def hess(self, V, U=None):
        V = np.asarray(V, dtype=float)
        diag = self._leak_curvature(V, U)
        out = np.broadcast_to(-self.spec.J, V.shape + (self.n,)).copy()
        idx = np.arange(self.n)
        out[..., idx, idx] += diag
        return out

    def hess_diag(self, V, U=None):
        V = np.asarray(V, dtype=float)
        return -np.diag(self.spec.J) + self._leak_curvature(V, U)

    def _leak_curvature(self, V, U):
        # d(psi')^{-1}/dV = 1/psi''(U)
        return 1.0 / (self.spec.R * self.potential.d2(self._U(V, U)))

    def affine_form(self):
        s = self.spec
        return np.array(s.J), 1.0 / s.R, np.array(s.I_ext)


class CustomEnergy(EnergyFunction):
    """Energy from user callables on single points; Hessian by differences if absent."""

    def __init__(self, n, value: Callable, grad: Callable, hess: Optional[Callable] = None):
        self.n = int(n)
        self._value = value
        self._grad = grad
        self._hess = hess

    @staticmethod
    def _rows(fn, V, out_shape):
        V = np.asarray(V, dtype=float)
        if V.ndim == 1:
            return np.asarray(fn(V), dtype=float)
        flat = V.reshape(-1, V.shape[-1])
        res = np.array([np.asarray(fn(v), dtype=float) for v in flat])
        return res.reshape(V.shape[:-1] + out_shape)

    def value(self, V, U=None):
        return self._rows(lambda v: float(self._value(v)), V, ())

    def grad(self, V, U=None):
        return self._rows(self._grad, V, (self.n,))

    def hess(self, V, U=None):
        if self._hess is not None:
            return self._rows(self._hess, V, (self.n, self.n))

        def fd(v):
            return _fd.jacobian(self._grad, v)

        return self._rows(fd, V, (self.n, self.n))


def _dual_point(sp, U):
    U = np.asarray(U, dtype=float)
    V = sp.to_dual(U)
    return U, sp.check_V(V)


def vector_field(energy: EnergyFunction, sp: SeparablePotential, U):
    """``dU^a/dt = -dH/dV_a`` evaluated at ``V = psi'(U)``."""
    U, V = _dual_point(sp, U)
    return -energy.grad(V, U)


def hopfield_rhs(J, R, I_ext, potential: ConvexPotential, U):
    """Textbook Hopfield right-hand side ``J V - U/R + I_ext``.

    No symmetry requirement on ``J``; used for equivalence checks and
    negative controls.
    """
    U = np.asarray(U, dtype=float)
    V = np.asarray(potential.d1(U), dtype=float)
    return V @ np.asarray(J, dtype=float).T - U / np.asarray(R, dtype=float) + np.asarray(I_ext, dtype=float)


def hopfield_energy_value(spec: NetworkSpec, p: ConvexPotential, V):
    V = np.asarray(V, dtype=float)
    p.check_dual(V)
    return float(HopfieldEnergy(spec, p).value(V))


def lyapunov_rate(energy: EnergyFunction, sp: SeparablePotential, U):
    """Return ``(dH/dt, -g(X, X))`` at ``U``.

    ``dH/dt`` is the chain rule ``sum_a dH/dV_a dV_a/dt``; the second value
    is the metric form.  Both vanish at steady states.
    """
    U, V = _dual_point(sp, U)
    grad = energy.grad(V, U)
    X = -grad
    g = np.asarray(sp.potential.d2(U), dtype=float)
    dHdt = float(np.sum(grad * g * X))
    minus_gXX = float(-np.sum(g * X * X))
    return dHdt, minus_gXX


def is_steady(X, tol=STEADY_TOL):
    return float(np.max(np.abs(X))) < tol


def potential_code(p: ConvexPotential):
    """``(kind, scale)`` for the compiled kernels, or ``None``."""
    if isinstance(p, Softplus):
        return 0, 1.0
    if isinstance(p, Quadratic):
        return 1, float(p.coefficient)
    return None


class GeneralizedHopfield:
    """The flow of ``energy`` on the Hessian manifold of ``sp``."""

    def __init__(self, energy: EnergyFunction, sp: SeparablePotential):
        if energy.n != sp.n:
            raise ModelError(f"energy dimension {energy.n} != potential dimension {sp.n}")
        self.energy = energy
        self.sp = sp
        self.n = sp.n

    def field(self, U):
        return vector_field(self.energy, self.sp, U)

    def jacobian(self, U):
        U, V = _dual_point(self.sp, U)
        return -self.energy.hess(V, U) * np.asarray(self.sp.potential.d2(U))[None, :]

    def energy_at(self, U):
        U, V = _dual_point(self.sp, U)
        return float(self.energy.value(V, U))

    def kappa(self, U):
        from .compressibility import kappa_closed_form

        return kappa_closed_form(self.energy, self.sp, U)

    def metric_field(self):
        return self.sp

    def kernel_form(self):
        """Arguments for the affine-activation kernels, or ``None``."""
        affine = self.energy.affine_form()
        code = potential_code(self.sp.potential)
        if affine is None or code is None:
            return None
        return affine + code

    def observables(self, Us):
        """Per-row ``V, H, dH/dt, kappa, |X|_g`` for states ``Us`` of shape ``(m, n)``."""
        from .compressibility import kappa_closed_form

        Us = np.asarray(Us, dtype=float)
        V = self.sp.check_V(self.sp.to_dual(Us))
        grad = self.energy.grad(V, Us)
        X = -grad
        g = np.asarray(self.sp.potential.d2(Us), dtype=float)
        return {
            "V": V,
            "H": np.asarray(self.energy.value(V, Us), dtype=float),
            "dHdt": np.sum(grad * g * X, axis=-1),
            "kappa": np.asarray(kappa_closed_form(self.energy, self.sp, Us), dtype=float),
            "field_norm_g": np.sqrt(np.sum(g * X * X, axis=-1)),
        }


@dataclass(frozen=True)
class CohenGrossbergSpec:
    """``dU^a/dt = (B^a(U^a) - sum_j C^aj psi'(U^j)) A^a(U^a)``.

    ``A`` and ``B`` are per-coordinate callables of one float (numpy
    ``Polynomial`` objects work); ``C`` is a symmetric constant matrix.
    """

    A: Sequence[Callable]
    B: Sequence[Callable]
    C: np.ndarray
    psi: ConvexPotential

    def __post_init__(self):
        C = _frozen(np.atleast_2d(self.C))
        n = C.shape[0]
        if C.shape != (n, n) or len(self.A) != n or len(self.B) != n:
            raise ModelError(f"inconsistent dimensions: C {C.shape}, len(A) {len(self.A)}, len(B) {len(self.B)}")
        _check_symmetric(C, "C")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "A", tuple(self.A))
        object.__setattr__(self, "B", tuple(self.B))

    @property
    def n(self):
        return self.C.shape[0]

    def amplification(self, U):
        A = np.array([float(self.A[a](U[a])) for a in range(self.n)])
        if not np.all(A > 0):
            bad = int(np.argmax(~(A > 0)))
            raise ModelError(f"amplification A^{bad}(U) = {A[bad]!r} must be positive")
        return A

    def drive(self, U):
        return np.array([float(self.B[a](U[a])) for a in range(self.n)])


def _cg_point(spec, U):
    U = np.asarray(U, dtype=float)
    if U.shape != (spec.n,) or not np.all(np.isfinite(U)):
        raise DomainError(f"expected finite vector of length {spec.n}")
    return U


def cohen_grossberg_dH_dV(spec: CohenGrossbergSpec, U):
    """``dH'/dV_a = -B^a + sum_j C^aj psi'(U^j)``."""
    U = _cg_point(spec, U)
    return -spec.drive(U) + spec.C @ np.asarray(spec.psi.d1(U), dtype=float)


def cohen_grossberg_field(spec: CohenGrossbergSpec, U, form="direct"):
    """Right-hand side of the restricted Cohen-Grossberg system.

    ``form="lyapunov"`` evaluates the same field as ``-A^a dH'/dV_a``.
    """
    U = _cg_point(spec, U)
    A = spec.amplification(U)
    if form == "lyapunov":
        return -A * cohen_grossberg_dH_dV(spec, U)
    if form != "direct":
        raise ValueError(f"unknown form {form!r}")
    return (spec.drive(U) - spec.C @ np.asarray(spec.psi.d1(U), dtype=float)) * A


def _drive_integral(spec, a, u):
    B, d2 = spec.B[a], spec.psi.d2
    val, err = integrate.quad(lambda s: float(B(s)) * float(d2(s)), 0.0, float(u), epsabs=1e-13, epsrel=1e-13, limit=200)
    if not np.isfinite(val):
        raise NumericalError(f"quadrature failed for coordinate {a}")
    return val


def cohen_grossberg_energy(spec: CohenGrossbergSpec, U):
    """``H'(U)``, with the indefinite integrals taken from 0."""
    U = _cg_point(spec, U)
    V = np.asarray(spec.psi.d1(U), dtype=float)
    integral = sum(_drive_integral(spec, a, U[a]) for a in range(spec.n))
    return float(-integral + 0.5 * V @ spec.C @ V)


def cohen_grossberg_lyapunov(spec: CohenGrossbergSpec, U):
    """Return ``(H'(U), dH'/dt)``; the rate is ``-sum psi''/A (dU/dt)^2``."""
    U = _cg_point(spec, U)
    X = cohen_grossberg_field(spec, U)
    A = spec.amplification(U)
    rate = float(-np.sum(np.asarray(spec.psi.d2(U)) / A * X * X))
    return cohen_grossberg_energy(spec, U), rate


class CohenGrossbergModel:
    """Flow of a :class:`CohenGrossbergSpec` with ``H'`` as Lyapunov function.

    Compressibility is taken by the weighted-divergence oracle since the
    field is not a metric gradient unless ``A`` is constant.
    """

    def __init__(self, spec: CohenGrossbergSpec):
        self.spec = spec
        self.sp = SeparablePotential(spec.psi, spec.n)
        self.n = spec.n

    def field(self, U):
        return cohen_grossberg_field(self.spec, U)

    def jacobian(self, U):
        return _fd.jacobian(self.field, np.asarray(U, dtype=float))

    def energy_at(self, U):
        return cohen_grossberg_energy(self.spec, U)

    def kappa(self, U):
        from .compressibility import kappa_divergence_oracle

        return kappa_divergence_oracle(self.field, self.sp, U)

    def metric_field(self):
        return self.sp

    def kernel_form(self):
        return None

    def observables(self, Us):
        Us = np.asarray(Us, dtype=float)
        V = self.sp.to_dual(Us)
        H = np.empty(len(Us))
        dHdt = np.empty(len(Us))
        kappa = np.empty(len(Us))
        norm = np.empty(len(Us))
        g = np.asarray(self.spec.psi.d2(Us), dtype=float)
        for k, U in enumerate(Us):
            H[k], dHdt[k] = cohen_grossberg_lyapunov(self.spec, U)
            X = self.field(U)
            kappa[k] = self.kappa(U)
            norm[k] = np.sqrt(np.sum(g[k] * X * X))
        return {"V": V, "H": H, "dHdt": dHdt, "kappa": kappa, "field_norm_g": norm}
