"""Seeded property suites behind ``hopgeo verify``.

Each suite returns a list of :class:`Check` rows with the measured residual,
the tolerance it is held to and whether it passed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List

import warnings

import numpy as np
from scipy import integrate

from .compressibility import LinearField, PlanarHamiltonianField, kappa_closed_form, kappa_report, volume_contraction_run
from .dynamics import IntegratorConfig, find_steady_state, integrate as integrate_ode, lyapunov_audit
from .geometry import closedness_tolerance, coderivative_of, dual_metric_check, metric_at, metric_dual_one_form, one_form_closedness
from .models import GeneralizedHopfield, HopfieldEnergy, NetworkSpec, QuadraticIdentity, hopfield_rhs, lyapunov_rate
from .potentials import SeparablePotential, Softplus

DEFAULT_SEED = 20240611


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    tolerance: float
    passed: bool
    relation: str = "<="

    def row(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status:4}  {self.name:<48} {self.measured:>12.3e} {self.relation} {self.tolerance:<10.1e}"


def _at_most(name, measured, tol):
    return Check(name, float(measured), tol, bool(measured <= tol))


def _exceeds(name, measured, tol):
    return Check(name, float(measured), tol, bool(measured > tol), ">")


def random_network(rng, n, zero_diagonal=False, scale=1.0):
    A = rng.uniform(-scale, scale, size=(n, n))
    J = 0.5 * (A + A.T)
    if zero_diagonal:
        np.fill_diagonal(J, 0.0)
    return NetworkSpec(J, rng.uniform(0.5, 2.0, size=n), rng.uniform(-0.5, 0.5, size=n))


def suite_legendre(seed=DEFAULT_SEED) -> List[Check]:
    rng = np.random.default_rng(seed)
    p = Softplus()
    x = rng.uniform(-10, 10, 1000)
    involution = np.max(np.abs(p.eval(x) + p.dual_eval(p.d1(x)) - x * p.d1(x)))
    sp = SeparablePotential(p, 4)
    V = rng.uniform(0.01, 0.99, size=(200, 4))
    roundtrip = np.max(np.abs(sp.to_dual(sp.from_dual(V)) - V))
    quad = 0.0
    for v in np.linspace(0.02, 0.98, 25):
        with warnings.catch_warnings():
            # the logit endpoint singularity trips quad's roundoff heuristic
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(lambda s: float(p.inverse_d1(s)), 0.0, v, epsabs=1e-14, epsrel=1e-13, limit=200)
        quad = max(quad, abs(val - p.dual_eval(v)))
    xs = rng.uniform(-30, 30, 1000)
    h = 1e-5
    fd = (p.eval(xs + h) - p.eval(xs - h)) / (2 * h)
    slope = np.max(np.abs(fd - p.d1(xs)) / np.maximum(p.d1(xs), 1e-300))
    return [
        _at_most("softplus Legendre involution", involution, 1e-10),
        _at_most("dual map round trip", roundtrip, 1e-12),
        _at_most("int_0^V logit = psi*(V)", quad, 1e-8),
        _at_most("psi' vs differenced psi (relative)", slope, 1e-6),
        Check("psi'' > 0 on [-30, 30]", float(np.min(p.d2(xs))), 0.0, bool(np.all(p.d2(xs) > 0)), ">"),
    ]


def suite_geometry(seed=DEFAULT_SEED) -> List[Check]:
    rng = np.random.default_rng(seed)
    dual = 0.0
    pairing = 0.0
    for n in (1, 2, 4):
        sp = SeparablePotential(Softplus(), n)
        for _ in range(34):
            U = rng.uniform(-3, 3, n)
            dual = max(dual, dual_metric_check(sp, U))
            m = metric_at(sp, U)
            pairing = max(pairing, np.max(np.abs(m.g * m.g_inv - 1.0)))
    sp3 = SeparablePotential(Softplus(), 3)
    spec = random_network(rng, 3)
    model = GeneralizedHopfield(HopfieldEnergy(spec, Softplus()), sp3)
    closed = 0.0
    for _ in range(30):
        U = rng.uniform(-2, 2, 3)
        closed = max(closed, one_form_closedness(model.field, sp3, U) / closedness_tolerance(model.field, sp3, U))
    J_asym = np.array(spec.J)
    J_asym[0, 1] += 0.5
    asym_field = lambda u: hopfield_rhs(J_asym, spec.R, spec.I_ext, Softplus(), u)  # noqa: E731
    U = np.zeros(3)
    asym = one_form_closedness(asym_field, sp3, U) / closedness_tolerance(asym_field, sp3, U)
    coder = 0.0
    for _ in range(20):
        U = rng.uniform(-3, 3, 3)
        k = kappa_closed_form(model.energy, sp3, U)
        coder = max(coder, abs(coderivative_of(metric_dual_one_form(model.field, sp3), sp3, U) - k))
    return [
        _at_most("dual metric vs Hessian of Psi*", dual, 1e-5),
        _at_most("g_aa g^aa = 1", pairing, 1e-12),
        _at_most("dX~ = 0 (residual / tolerance)", closed, 1.0),
        _exceeds("asymmetric J breaks closedness (ratio)", asym, 1.0),
        _at_most("co-derivative of X~ = kappa", coder, 1e-4),
    ]


def suite_lyapunov(seed=DEFAULT_SEED) -> List[Check]:
    rng = np.random.default_rng(seed)
    rate = 0.0
    for n in (1, 2, 4):
        sp = SeparablePotential(Softplus(), n)
        for energy in (QuadraticIdentity(n), HopfieldEnergy(random_network(rng, n), Softplus())):
            for _ in range(20):
                a, b = lyapunov_rate(energy, sp, rng.uniform(-3, 3, n))
                rate = max(rate, abs(a - b) / max(abs(b), 1e-300))
    audit = -np.inf
    pointwise = 0.0
    sp2 = SeparablePotential(Softplus(), 2)
    cfg = IntegratorConfig(dt=1e-3, t_max=20.0)
    for _ in range(5):
        model = GeneralizedHopfield(HopfieldEnergy(random_network(rng, 2), Softplus()), sp2)
        rec = integrate_ode(model, rng.uniform(-3, 3, 2), cfg)
        audit = max(audit, lyapunov_audit(rec))
        mgxx = -rec.field_norm_g**2
        mask = np.abs(mgxx) > 0
        if mask.any():
            pointwise = max(pointwise, np.max(np.abs(rec.dHdt[mask] - mgxx[mask]) / np.abs(mgxx[mask])))
    stiff = GeneralizedHopfield(HopfieldEnergy(NetworkSpec([[0.0]], [0.25], [0.0]), Softplus()), SeparablePotential(Softplus(), 1))
    broken = integrate_ode(stiff, np.array([2.0]), IntegratorConfig(dt=1.0, t_max=20.0))
    return [
        _at_most("dH/dt = -g(X, X) (relative)", rate, 1e-10),
        _at_most("Lyapunov audit, 5 Hopfield runs", audit, 1e-9),
        _at_most("recorded dHdt vs -|X|_g^2 (relative)", pointwise, 1e-8),
        _exceeds("coarse-step negative control violation", lyapunov_audit(broken), 1e-9),
    ]


def suite_kappa(seed=DEFAULT_SEED) -> List[Check]:
    rng = np.random.default_rng(seed)
    checks = []
    for n in (1, 2, 4, 16):
        sp = SeparablePotential(Softplus(), n)
        rep = kappa_report(QuadraticIdentity(n), sp, np.zeros(n))
        err = max(abs(v + n / 4) for v in rep.values())
        checks.append(_at_most(f"kappa(0) = -n/4, n = {n}", err, 1e-5))
    steady_cases = (
        ([[0.0, 0.3], [0.3, 0.0]], (1.0, 2.0), (0.0, 0.0)),
        ([[0.0, 0.3, -0.3], [0.3, 0.0, 0.3], [-0.3, 0.3, 0.0]], (1.0, 2.0, 4.0), (0.1, -0.2, 0.0)),
    )
    for J, R, I_ext in steady_cases:
        n = len(R)
        model = GeneralizedHopfield(HopfieldEnergy(NetworkSpec(J, R, I_ext), Softplus()), SeparablePotential(Softplus(), n))
        Ustar, _ = find_steady_state(model, np.zeros(n))
        rep = kappa_report(model.energy, model.sp, Ustar)
        target = -sum(1.0 / r for r in R)
        err = max(abs(v - target) for v in rep.values())
        checks.append(_at_most(f"steady-state kappa = {target:g}", err, 1e-5))
    worst = 0.0
    for _ in range(50):
        n = int(rng.choice([1, 2, 4]))
        sp = SeparablePotential(Softplus(), n)
        energy = QuadraticIdentity(n) if rng.random() < 0.5 else HopfieldEnergy(random_network(rng, n), Softplus())
        rep = kappa_report(energy, sp, rng.uniform(-3, 3, n))
        worst = max(worst, rep.max_pairwise_residual / max(1.0, abs(rep.kappa_closed_form)))
    checks.append(_at_most("three-route agreement (scaled residual)", worst, 1e-4))
    return checks


def suite_volume(seed=DEFAULT_SEED) -> List[Check]:
    lin = volume_contraction_run(LinearField([1.0, 2.0, 3.0]), np.ones(3), 1.0, 1e-3)
    ham = volume_contraction_run(PlanarHamiltonianField(), np.array([1.0, 0.0]), 10.0, 1e-3)
    sp = SeparablePotential(Softplus(), 2)
    ex = volume_contraction_run(GeneralizedHopfield(QuadraticIdentity(2), sp), np.array([1.0, -1.0]), 5.0, 1e-3)
    return [
        _at_most("linear field log volume = -6", abs(lin.log_volume_ratio + 6.0), 1e-6),
        _at_most("linear field int kappa = -6", abs(lin.integrated_kappa + 6.0), 1e-6),
        _at_most("Hamiltonian log volume = 0", abs(ham.log_volume_ratio), 1e-6),
        _at_most("Hamiltonian int kappa = 0", abs(ham.integrated_kappa), 1e-6),
        _at_most("gradient system ledger (relative)", ex.rel_discrepancy, 1e-3),
    ]


SUITES: Dict[str, Callable[..., List[Check]]] = {
    "legendre": suite_legendre,
    "geometry": suite_geometry,
    "lyapunov": suite_lyapunov,
    "kappa": suite_kappa,
    "volume": suite_volume,
}


def run_suite(name, seed=DEFAULT_SEED) -> List[Check]:
    if name == "all":
        return [c for suite in SUITES.values() for c in suite(seed)]
    return SUITES[name](seed)

