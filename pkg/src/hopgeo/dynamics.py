"""Fixed-step RK4 integration with Lyapunov monitoring.

Models expose ``field``, ``observables`` and ``kernel_form``; those with an
affine-activation form run through the compiled kernels, the rest through
a Python RK4 loop with identical stepping and termination rules.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .errors import ConfigError, DomainError, NumericalError

LYAPUNOV_SLACK = 1e-9
FLOAT_FMT = "{:.17g}"


class TerminationReason(enum.Enum):
    T_MAX_REACHED = "TMaxReached"
    STEADY_STATE = "SteadyState"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float
    t_max: float
    steady_tol: float = 1e-10
    record_every: int = 1

    def __post_init__(self):
        for name in ("dt", "t_max", "steady_tol"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigError(f"integrator.{name} must be a positive number, got {v!r}")
        if not (isinstance(self.record_every, int) and self.record_every >= 1):
            raise ConfigError(f"integrator.record_every must be a positive integer, got {self.record_every!r}")
        if not self.dt < self.t_max:
            raise ConfigError(f"integrator.dt ({self.dt}) must be smaller than t_max ({self.t_max})")

    @property
    def n_steps(self):
        return int(math.ceil(self.t_max / self.dt - 1e-9))


@dataclass
class TrajectoryRecord:
    t: np.ndarray
    U: np.ndarray
    V: np.ndarray
    H: np.ndarray
    dHdt: np.ndarray
    kappa: np.ndarray
    field_norm_g: np.ndarray
    termination_reason: TerminationReason
    failure_step: Optional[int] = None

    def __len__(self):
        return len(self.t)

    @property
    def n(self):
        return self.U.shape[1]

    def header(self):
        n = self.n
        return ["t"] + [f"U_{i}" for i in range(1, n + 1)] + [f"V_{i}" for i in range(1, n + 1)] + ["H", "dHdt", "kappa", "field_norm_g"]

    def rows(self):
        for k in range(len(self)):
            yield [self.t[k], *self.U[k], *self.V[k], self.H[k], self.dHdt[k], self.kappa[k], self.field_norm_g[k]]

    def write_csv(self, fh):
        fh.write(",".join(self.header()) + "\n")
        for row in self.rows():
            fh.write(",".join(FLOAT_FMT.format(float(x)) for x in row) + "\n")

    def write_jsonl(self, fh):
        for k in range(len(self)):
            fields = {
                "t": self.t[k],
                "U": self.U[k],
                "V": self.V[k],
                "H": self.H[k],
                "dHdt": self.dHdt[k],
                "kappa": self.kappa[k],
                "field_norm_g": self.field_norm_g[k],
            }
            parts = []
            for key, val in fields.items():
                if np.ndim(val):
                    text = "[" + ",".join(FLOAT_FMT.format(float(x)) for x in val) + "]"
                else:
                    text = FLOAT_FMT.format(float(val))
                parts.append(f"{json.dumps(key)}:{text}")
            fh.write("{" + ",".join(parts) + "}\n")


def _rk4_generic(field, U0, dt, n_steps, steady_tol, record_every):
    u = np.array(U0, dtype=float)
    rows, steps = [], []
    status, fail_step = kernels.T_MAX, -1
    k = 0
    while True:
        try:
            k1 = field(u)
        except (DomainError, NumericalError):
            status, fail_step = kernels.NONFINITE, k
            break
        if np.max(np.abs(k1)) < steady_tol:
            status = kernels.STEADY
            break
        if k == n_steps:
            break
        if k % record_every == 0:
            rows.append(u.copy())
            steps.append(k)
        try:
            k2 = field(u + 0.5 * dt * k1)
            k3 = field(u + 0.5 * dt * k2)
            k4 = field(u + dt * k3)
        except (DomainError, NumericalError):
            status, fail_step = kernels.NONFINITE, k + 1
            break
        u_new = u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(u_new)):
            status, fail_step = kernels.NONFINITE, k + 1
            break
        u = u_new
        k += 1
    if not steps or steps[-1] != k:
        rows.append(u.copy())
        steps.append(k)
    return np.array(rows), np.array(steps, dtype=np.int64), status, fail_step


def _valid_prefix(model, rows):
    sp = model.metric_field()
    V = np.asarray(sp.potential.d1(rows), dtype=float)
    ok = np.all(sp.potential.in_dual_domain(V), axis=-1) & np.all(np.isfinite(rows), axis=-1)
    bad = np.flatnonzero(~ok)
    return len(rows) if bad.size == 0 else int(bad[0])


def integrate(model, U0, cfg: IntegratorConfig, backend=None) -> TrajectoryRecord:
    """Integrate ``model`` from ``U0`` and record the monitored observables.

    Stops when ``max|dU/dt| < cfg.steady_tol``, at ``cfg.t_max``, or on
    failure.  A recorded row whose energy exceeds its predecessor's by more
    than ``LYAPUNOV_SLACK`` ends the record there (the offending row is kept)
    with reason ``NumericalFailure``.
    """
    U0 = np.asarray(U0, dtype=float)
    if U0.shape != (model.n,):
        raise ConfigError(f"initial condition has shape {U0.shape}, model dimension is {model.n}")
    if not np.all(np.isfinite(U0)):
        raise DomainError("initial condition must be finite")

    form = model.kernel_form()
    args = (U0, cfg.dt, cfg.n_steps, cfg.steady_tol, cfg.record_every)
    if form is not None:
        rows, steps, status, fail = kernels.integrate_affine(*form, *args, backend=backend)
    else:
        rows, steps, status, fail = _rk4_generic(model.field, *args)

    reason = {
        kernels.T_MAX: TerminationReason.T_MAX_REACHED,
        kernels.STEADY: TerminationReason.STEADY_STATE,
        kernels.NONFINITE: TerminationReason.NUMERICAL_FAILURE,
    }[status]
    failure = int(fail) if fail >= 0 else None

    keep = _valid_prefix(model, rows)
    if keep < len(rows):
        reason, failure = TerminationReason.NUMERICAL_FAILURE, int(steps[keep])
        rows, steps = rows[:keep], steps[:keep]
    if len(rows) == 0:
        raise NumericalError("initial condition outside the dual domain of the potential")

    obs = model.observables(rows)
    cut, fail_at = len(rows), None
    finite = np.isfinite(obs["H"]) & np.isfinite(obs["kappa"]) & np.isfinite(obs["dHdt"])
    if not np.all(finite):
        cut = int(np.flatnonzero(~finite)[0])
        fail_at = int(steps[cut])
        if cut == 0:
            raise NumericalError("non-finite observables at the initial condition")
    rises = np.flatnonzero(np.diff(obs["H"][:cut]) > LYAPUNOV_SLACK)
    if rises.size:
        cut = int(rises[0]) + 2
        fail_at = int(steps[cut - 1])
    if fail_at is not None:
        reason, failure = TerminationReason.NUMERICAL_FAILURE, fail_at
        rows, steps = rows[:cut], steps[:cut]
        obs = {k: v[:cut] for k, v in obs.items()}

    return TrajectoryRecord(
        t=steps * cfg.dt,
        U=rows,
        V=obs["V"],
        H=obs["H"],
        dHdt=obs["dHdt"],
        kappa=obs["kappa"],
        field_norm_g=obs["field_norm_g"],
        termination_reason=reason,
        failure_step=failure,
    )


def lyapunov_audit(record: TrajectoryRecord) -> float:
    """Largest energy increase ``H_{k+1} - H_k`` between consecutive rows."""
    if len(record) < 2:
        return 0.0
    return float(np.max(np.diff(record.H)))


def find_steady_state(model, U0, dt=0.05, t_max=2000.0, tol=1e-10, backend=None):
    """Integrate until ``max|dU/dt| < tol``; returns ``(U*, record)``."""
    cfg = IntegratorConfig(dt=dt, t_max=t_max, steady_tol=tol, record_every=max(1, int(1.0 / dt)))
    record = integrate(model, U0, cfg, backend=backend)
    if record.termination_reason is not TerminationReason.STEADY_STATE:
        raise NumericalError(f"no steady state within t_max = {t_max} ({record.termination_reason.value})")
    return record.U[-1].copy(), record
