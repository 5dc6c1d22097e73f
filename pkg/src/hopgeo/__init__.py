"""Generalized Hopfield dynamics on Hessian manifolds.

The flow ``dU/dt = -dH/dV`` with ``V = dPsi/dU`` is a gradient flow for the
Hessian metric of ``Psi``.  This package integrates it, monitors ``H`` as a
Lyapunov function, and computes the phase-space compressibility ``kappa``
by three independent routes.
"""

from .compressibility import (
    KappaReport,
    VolumeLedger,
    kappa_closed_form,
    kappa_divergence_oracle,
    kappa_laplacian,
    kappa_report,
    volume_contraction_run,
)
from .dynamics import IntegratorConfig, TerminationReason, TrajectoryRecord, find_steady_state, integrate, lyapunov_audit
from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    GeometryError,
    HopgeoError,
    ModelError,
    NumericalError,
    UnsupportedRouteError,
)
from .geometry import (
    HessianMetricPoint,
    coderivative_of,
    dual_metric_check,
    laplace_beltrami,
    metric_at,
    one_form_closedness,
)
from .kernels import BACKEND
from .models import (
    CohenGrossbergModel,
    CohenGrossbergSpec,
    GeneralizedHopfield,
    HopfieldEnergy,
    NetworkSpec,
    QuadraticIdentity,
    vector_field,
)
from .potentials import CustomPotential, Quadratic, SeparablePotential, Softplus, legendre_dual, softplus_chain

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CohenGrossbergModel",
    "CohenGrossbergSpec",
    "ConfigError",
    "ConvergenceError",
    "CustomPotential",
    "DomainError",
    "GeneralizedHopfield",
    "GeometryError",
    "HessianMetricPoint",
    "HopfieldEnergy",
    "HopgeoError",
    "IntegratorConfig",
    "KappaReport",
    "ModelError",
    "NetworkSpec",
    "NumericalError",
    "Quadratic",
    "QuadraticIdentity",
    "SeparablePotential",
    "Softplus",
    "TerminationReason",
    "TrajectoryRecord",
    "UnsupportedRouteError",
    "VolumeLedger",
    "coderivative_of",
    "dual_metric_check",
    "find_steady_state",
    "integrate",
    "kappa_closed_form",
    "kappa_divergence_oracle",
    "kappa_laplacian",
    "kappa_report",
    "laplace_beltrami",
    "legendre_dual",
    "lyapunov_audit",
    "metric_at",
    "one_form_closedness",
    "softplus_chain",
    "vector_field",
    "volume_contraction_run",
]
