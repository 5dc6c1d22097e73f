"""Strictly convex potentials, their Legendre duals and coordinate maps.

A :class:`ConvexPotential` is a one-variable strictly convex function
``psi`` together with derivatives up to third order and its convex
conjugate ``psi*``.  A :class:`SeparablePotential` sums one of them over
``n`` coordinates, ``Psi(U) = sum_a psi(U^a)``, and provides the maps
between primal coordinates ``U`` and dual coordinates ``V = dPsi/dU``.

All evaluation methods broadcast over numpy arrays.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import integrate, special

from .errors import ConvergenceError, DomainError

SOFTPLUS_SWITCH = 35.0
NEWTON_MAX_ITER = 200
NEWTON_TOL = 1e-12


class PotentialKind(enum.Enum):
    SOFTPLUS = "softplus"
    QUADRATIC = "quadratic"
    CUSTOM = "custom"


def _check_finite(x, what="input"):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError(f"non-finite {what}")
    return x


def _scalar_or_array(out):
    return float(out) if np.ndim(out) == 0 else out


class ConvexPotential:
    """Base class; subclasses supply the derivative chain and the dual."""

    kind: PotentialKind
    dual_domain: Tuple[float, float]
    domain: Tuple[float, float] = (-math.inf, math.inf)

    def eval(self, x):
        raise NotImplementedError

    def d1(self, x):
        raise NotImplementedError

    def d2(self, x):
        raise NotImplementedError

    def d3(self, x):
        raise NotImplementedError

    def inverse_d1(self, x_star):
        """Primal point ``x`` with ``psi'(x) = x_star``."""
        raise NotImplementedError

    def dual_eval(self, x_star):
        """Convex conjugate ``psi*(x_star) = x x_star - psi(x)``."""
        raise NotImplementedError

    def inverse_integral(self, v):
        """``int_0^v (psi')^{-1}(s) ds``, the Hopfield leak integral."""
        raise NotImplementedError

    def in_dual_domain(self, x_star):
        lo, hi = self.dual_domain
        x_star = np.asarray(x_star, dtype=float)
        return (x_star > lo) & (x_star < hi)

    def check_dual(self, x_star):
        x_star = _check_finite(x_star, "dual coordinate")
        if not np.all(self.in_dual_domain(x_star)):
            lo, hi = self.dual_domain
            raise DomainError(f"dual coordinate outside open interval ({lo}, {hi})")
        return x_star


@dataclass(frozen=True)
class Softplus(ConvexPotential):
    """``psi(x) = ln(1 + e^x)``; ``psi'`` is the logistic sigmoid."""

    kind = PotentialKind.SOFTPLUS
    dual_domain = (0.0, 1.0)

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        low = np.log1p(np.exp(np.minimum(x, SOFTPLUS_SWITCH)))
        high = x + np.log1p(np.exp(-np.maximum(x, SOFTPLUS_SWITCH)))
        return _scalar_or_array(np.where(x > SOFTPLUS_SWITCH, high, low))

    def d1(self, x):
        return _scalar_or_array(special.expit(x))

    def d2(self, x):
        # sigma(x) sigma(-x) keeps full relative precision in both tails
        return _scalar_or_array(special.expit(x) * special.expit(-np.asarray(x, dtype=float)))

    def d3(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(self.d2(x) * -np.tanh(0.5 * x))

    def inverse_d1(self, x_star):
        x_star = self.check_dual(x_star)
        return _scalar_or_array(np.log(x_star) - np.log1p(-x_star))

    def dual_eval(self, x_star):
        x_star = self.check_dual(x_star)
        return _scalar_or_array(special.xlogy(x_star, x_star) + special.xlogy(1.0 - x_star, 1.0 - x_star))

    def inverse_integral(self, v):
        # psi*(0) = 0 by continuity, so the integral is psi* itself
        return self.dual_eval(v)


@dataclass(frozen=True)
class Quadratic(ConvexPotential):
    """``psi(x) = c x^2 / 2`` with ``c > 0``."""

    coefficient: float = 1.0

    kind = PotentialKind.QUADRATIC
    dual_domain = (-math.inf, math.inf)

    def __post_init__(self):
        if not (self.coefficient > 0 and math.isfinite(self.coefficient)):
            raise DomainError(f"quadratic coefficient must be positive, got {self.coefficient}")

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(0.5 * self.coefficient * x * x)

    def d1(self, x):
        return _scalar_or_array(self.coefficient * np.asarray(x, dtype=float))

    def d2(self, x):
        return _scalar_or_array(np.full(np.shape(x), self.coefficient))

    def d3(self, x):
        return _scalar_or_array(np.zeros(np.shape(x)))

    def inverse_d1(self, x_star):
        x_star = self.check_dual(x_star)
        return _scalar_or_array(x_star / self.coefficient)

    def dual_eval(self, x_star):
        x_star = self.check_dual(x_star)
        return _scalar_or_array(x_star * x_star / (2.0 * self.coefficient))

    def inverse_integral(self, v):
        return self.dual_eval(v)


class CustomPotential(ConvexPotential):
    """User-supplied strictly convex potential.

    ``psi``, ``d1`` and ``d2`` are required callables of one float.  When
    ``d3`` is omitted it is taken from central differences of ``d2``.
    Both the primal ``domain`` and the open ``dual_domain`` (the range of
    ``d1``) must be declared.
    """

    kind = PotentialKind.CUSTOM

    def __init__(
        self,
        psi: Callable[[float], float],
        d1: Callable[[float], float],
        d2: Callable[[float], float],
        *,
        domain: Tuple[float, float],
        dual_domain: Tuple[float, float],
        d3: Optional[Callable[[float], float]] = None,
    ):
        if not domain[0] < domain[1] or not dual_domain[0] < dual_domain[1]:
            raise DomainError("domain and dual_domain must be non-empty open intervals")
        self._psi = psi
        self._d1 = d1
        self._d2 = d2
        self._d3 = d3
        self.domain = (float(domain[0]), float(domain[1]))
        self.dual_domain = (float(dual_domain[0]), float(dual_domain[1]))

    def _map(self, fn, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            return float(fn(float(x)))
        return np.vectorize(lambda t: float(fn(t)), otypes=[float])(x)

    def eval(self, x):
        return self._map(self._psi, x)

    def d1(self, x):
        return self._map(self._d1, x)

    def d2(self, x):
        return self._map(self._d2, x)

    def _fd_d3(self, x):
        h = np.cbrt(np.finfo(float).eps) * max(1.0, abs(x))
        return (self._d2(x + h) - self._d2(x - h)) / (2.0 * h)

    def d3(self, x):
        return self._map(self._d3 if self._d3 is not None else self._fd_d3, x)

    def _bracket(self, x_star):
        lo, hi = self.domain
        if lo < 0.0 < hi:
            x0 = 0.0
        elif math.isfinite(lo) and math.isfinite(hi):
            x0 = 0.5 * (lo + hi)
        else:
            x0 = lo + 1.0 if math.isfinite(lo) else hi - 1.0
        a = b = x0
        step = 1.0
        # psi' is increasing, so expanding outward from x0 must bracket x_star
        for _ in range(NEWTON_MAX_ITER):
            if self._d1(a) <= x_star <= self._d1(b):
                return a, b
            if self._d1(b) < x_star:
                a = b
                b = min(b + step, 0.5 * (b + hi)) if math.isfinite(hi) else b + step
            else:
                b = a
                a = max(a - step, 0.5 * (a + lo)) if math.isfinite(lo) else a - step
            step *= 2.0
        raise ConvergenceError(f"could not bracket psi'(x) = {x_star}")

    def _solve(self, x_star):
        tol = NEWTON_TOL * max(1.0, abs(x_star))
        lo, hi = self._bracket(x_star)
        x = 0.5 * (lo + hi)
        for _ in range(NEWTON_MAX_ITER):
            r = self._d1(x) - x_star
            if abs(r) <= tol:
                return x
            if r < 0:
                lo = x
            else:
                hi = x
            if np.nextafter(lo, hi) >= hi:
                # bracket collapsed to adjacent floats: best representable root
                return x
            slope = self._d2(x)
            x_new = x - r / slope if slope > 0 else math.nan
            if not (lo < x_new < hi):
                x_new = 0.5 * (lo + hi)
            x = x_new
        raise ConvergenceError(f"Newton iteration for psi'(x) = {x_star} did not converge")

    def inverse_d1(self, x_star):
        x_star = self.check_dual(x_star)
        return self._map(self._solve, x_star)

    def dual_eval(self, x_star):
        x = self.inverse_d1(x_star)
        return _scalar_or_array(np.asarray(x) * np.asarray(x_star, dtype=float) - self.eval(x))

    def _integral(self, v):
        lo, hi = self.dual_domain
        if not lo <= 0.0 <= hi:
            raise DomainError("leak integral from 0 requires 0 in the closure of the dual domain")
        val, _ = integrate.quad(lambda s: self._solve(s) if lo < s < hi else math.nan, 0.0, v, epsabs=1e-13, epsrel=1e-12, limit=200)
        return val

    def inverse_integral(self, v):
        v = self.check_dual(v)
        return self._map(self._integral, v)


def softplus_chain(x):
    """Return ``(psi, psi', psi'', psi''')`` of the softplus at ``x``."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"non-finite input {x}")
    sp = Softplus()
    return sp.eval(x), sp.d1(x), sp.d2(x), sp.d3(x)


def legendre_dual(p: ConvexPotential, x_star):
    """Return ``(x, psi*(x_star))`` where ``psi'(x) = x_star``."""
    x = p.inverse_d1(x_star)
    if p.kind is PotentialKind.CUSTOM:
        psi_star = _scalar_or_array(np.asarray(x) * np.asarray(x_star, dtype=float) - p.eval(x))
    else:
        psi_star = p.dual_eval(x_star)
    return x, psi_star


@dataclass(frozen=True)
class SeparablePotential:
    """``Psi(U) = sum_a psi(U^a)`` over ``n`` coordinates."""

    potential: ConvexPotential
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"dimension must be a positive integer, got {self.n}")

    def _check_U(self, U):
        U = _check_finite(U, "primal coordinate")
        if U.shape[-1:] != (self.n,):
            raise DomainError(f"expected trailing dimension {self.n}, got shape {U.shape}")
        return U

    def value(self, U):
        U = self._check_U(U)
        return _scalar_or_array(np.sum(self.potential.eval(U), axis=-1))

    def dual_value(self, V):
        """Total Legendre transform ``Psi*(V) = sum_a psi*(V_a)``."""
        V = self.check_V(V)
        return _scalar_or_array(np.sum(self.potential.dual_eval(V), axis=-1))

    def to_dual(self, U):
        U = self._check_U(U)
        return np.asarray(self.potential.d1(U), dtype=float)

    def check_V(self, V):
        V = _check_finite(V, "dual coordinate")
        if V.shape[-1:] != (self.n,):
            raise DomainError(f"expected trailing dimension {self.n}, got shape {V.shape}")
        bad = ~self.potential.in_dual_domain(V)
        if np.any(bad):
            idx = int(np.argwhere(bad)[0][-1])
            lo, hi = self.potential.dual_domain
            raise DomainError(f"V[{idx}] = {V[..., idx].ravel()[0]!r} outside open dual domain ({lo}, {hi})")
        return V

    def from_dual(self, V):
        V = self.check_V(V)
        return np.asarray(self.potential.inverse_d1(V), dtype=float)

    def metric_at(self, U):
        from .geometry import metric_at

        return metric_at(self, U)


def to_dual(sp: SeparablePotential, U):
    return sp.to_dual(U)


def from_dual(sp: SeparablePotential, V):
    return sp.from_dual(V)
