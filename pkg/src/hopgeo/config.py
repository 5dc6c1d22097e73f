"""JSON run configuration for the command-line tools.

Schema (all matrices row-major flat arrays of length ``n*n``)::

    {
      "dimension": 2,
      "potential": {"name": "softplus"},          # or {"name": "quadratic", "parameters": {"coefficient": 1.0}}
      "model": {"kind": "hopfield", "J": [...], "R": [...], "I_ext": [...]},
               # or {"kind": "gradient"}
               # or {"kind": "cohen_grossberg", "C": [...], "A": [[a0, a1, ...], ...], "B": [[b0, b1, ...], ...]}
      "initial_conditions": [[0.1, -0.2], ...],   # or {"random": 4, "seed": 7, "box": [-3, 3]}
      "integrator": {"dt": 0.001, "t_max": 20.0, "steady_tol": 1e-10, "record_every": 1},
      "outputs": {"format": "csv", "path": "out"}
    }

Cohen-Grossberg ``A`` and ``B`` entries are ascending polynomial
coefficients per coordinate.  Relative output paths resolve against the
config file's directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from numpy.polynomial import Polynomial

from .dynamics import IntegratorConfig
from .errors import ConfigError, DomainError, ModelError
from .models import (
    CohenGrossbergModel,
    CohenGrossbergSpec,
    GeneralizedHopfield,
    HopfieldEnergy,
    NetworkSpec,
    QuadraticIdentity,
)
from .potentials import Quadratic, SeparablePotential, Softplus

MODEL_KINDS = ("hopfield", "gradient", "cohen_grossberg")
OUTPUT_FORMATS = ("csv", "jsonl")


def _line_of(text: Optional[str], path: str) -> Optional[int]:
    """1-based line of the last key in dotted ``path``, searching nested keys in order."""
    if not text or not path:
        return None
    pos = 0
    found = None
    for key in path.split("."):
        idx = text.find(f'"{key}"', pos)
        if idx < 0:
            break
        pos = idx
        found = idx
    return None if found is None else text.count("\n", 0, found) + 1


@dataclass
class RunConfig:
    dimension: int
    potential: Dict[str, Any]
    model: Dict[str, Any]
    initial_conditions: Any
    integrator: Dict[str, Any]
    outputs: Dict[str, Any] = field(default_factory=lambda: {"format": "csv", "path": "out"})
    source: Optional[Path] = field(default=None, compare=False, repr=False)

    def to_dict(self):
        return {
            "dimension": self.dimension,
            "potential": self.potential,
            "model": self.model,
            "initial_conditions": self.initial_conditions,
            "integrator": self.integrator,
            "outputs": self.outputs,
        }

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def build_potential(self):
        name = self.potential["name"]
        if name == "softplus":
            return Softplus()
        return Quadratic(float(self.potential.get("parameters", {}).get("coefficient", 1.0)))

    def build_model(self):
        n = self.dimension
        p = self.build_potential()
        kind = self.model["kind"]
        if kind == "gradient":
            return GeneralizedHopfield(QuadraticIdentity(n), SeparablePotential(p, n))
        if kind == "hopfield":
            spec = NetworkSpec(np.reshape(self.model["J"], (n, n)), self.model["R"], self.model["I_ext"])
            return GeneralizedHopfield(HopfieldEnergy(spec, p), SeparablePotential(p, n))
        spec = CohenGrossbergSpec(
            A=[Polynomial(c) for c in self.model["A"]],
            B=[Polynomial(c) for c in self.model["B"]],
            C=np.reshape(self.model["C"], (n, n)),
            psi=p,
        )
        return CohenGrossbergModel(spec)

    def integrator_config(self):
        return IntegratorConfig(**self.integrator)

    def initial_points(self, seed: Optional[int] = None) -> np.ndarray:
        ic = self.initial_conditions
        if isinstance(ic, dict):
            rng = np.random.default_rng(ic["seed"] if seed is None else seed)
            lo, hi = ic.get("box", [-3.0, 3.0])
            return rng.uniform(lo, hi, size=(int(ic["random"]), self.dimension))
        return np.asarray(ic, dtype=float).reshape(-1, self.dimension)

    def output_dir(self) -> Path:
        path = Path(self.outputs.get("path", "out"))
        if not path.is_absolute() and self.source is not None:
            path = self.source.parent / path
        return path


def _require(cond, message, text, path):
    if not cond:
        raise ConfigError(message, _line_of(text, path))


def _numbers(value, length, text, path):
    _require(isinstance(value, list), f"{path} must be an array", text, path)
    _require(len(value) == length, f"{path} must have length {length}, got {len(value)}", text, path)
    _require(
        all(isinstance(v, (int, float)) and not isinstance(v, bool) and np.isfinite(v) for v in value),
        f"{path} must contain finite numbers",
        text,
        path,
    )
    return [float(v) for v in value]


def _coeff_lists(value, n, text, path):
    _require(isinstance(value, list) and len(value) == n, f"{path} must be a list of {n} coefficient arrays", text, path)
    out = []
    for row in value:
        _require(isinstance(row, list) and len(row) >= 1, f"{path} entries must be non-empty coefficient arrays", text, path)
        out.append(_numbers(row, len(row), text, path))
    return out


def from_dict(data: Dict[str, Any], text: Optional[str] = None, source: Optional[Path] = None) -> RunConfig:
    """Validate a decoded config; ``text`` enables line-anchored messages."""
    _require(isinstance(data, dict), "config must be a JSON object", text, "")
    for key in ("dimension", "potential", "model", "initial_conditions", "integrator"):
        _require(key in data, f"missing required key {key!r}", text, key)
    n = data["dimension"]
    _require(isinstance(n, int) and not isinstance(n, bool) and n >= 1, "dimension must be a positive integer", text, "dimension")

    pot = data["potential"]
    _require(isinstance(pot, dict) and pot.get("name") in ("softplus", "quadratic"), "potential.name must be 'softplus' or 'quadratic'", text, "potential")
    pot = {"name": pot["name"]}
    if pot["name"] == "quadratic":
        c = data["potential"].get("parameters", {}).get("coefficient", 1.0)
        _require(isinstance(c, (int, float)) and c > 0, "potential coefficient must be positive", text, "potential.coefficient")
        pot["parameters"] = {"coefficient": float(c)}

    model = data["model"]
    _require(isinstance(model, dict) and model.get("kind") in MODEL_KINDS, f"model.kind must be one of {MODEL_KINDS}", text, "model")
    kind = model["kind"]
    if kind == "hopfield":
        model = {
            "kind": kind,
            "J": _numbers(model.get("J"), n * n, text, "model.J"),
            "R": _numbers(model.get("R"), n, text, "model.R"),
            "I_ext": _numbers(model.get("I_ext"), n, text, "model.I_ext"),
        }
    elif kind == "cohen_grossberg":
        model = {
            "kind": kind,
            "C": _numbers(model.get("C"), n * n, text, "model.C"),
            "A": _coeff_lists(model.get("A"), n, text, "model.A"),
            "B": _coeff_lists(model.get("B"), n, text, "model.B"),
        }
    else:
        model = {"kind": kind}

    ic = data["initial_conditions"]
    if isinstance(ic, dict):
        _require(isinstance(ic.get("random"), int) and ic["random"] >= 1, "initial_conditions.random must be a positive integer", text, "initial_conditions.random")
        _require(isinstance(ic.get("seed"), int), "initial_conditions.seed is required for random initial conditions", text, "initial_conditions")
        box = ic.get("box", [-3.0, 3.0])
        box = _numbers(box, 2, text, "initial_conditions.box")
        _require(box[0] < box[1], "initial_conditions.box must satisfy lo < hi", text, "initial_conditions.box")
        ic = {"random": ic["random"], "seed": ic["seed"], "box": box}
    else:
        _require(isinstance(ic, list) and len(ic) >= 1, "initial_conditions must be a non-empty list or a random spec", text, "initial_conditions")
        ic = [_numbers(v, n, text, "initial_conditions") for v in ic]

    integ = data["integrator"]
    _require(isinstance(integ, dict), "integrator must be an object", text, "integrator")
    unknown = set(integ) - {"dt", "t_max", "steady_tol", "record_every"}
    _require(not unknown, f"unknown integrator keys {sorted(unknown)}", text, "integrator")
    integ = dict(integ)
    try:
        IntegratorConfig(**integ)
    except (ConfigError, TypeError) as exc:
        raise ConfigError(str(exc), _line_of(text, "integrator")) from None

    outputs = dict(data.get("outputs", {"format": "csv", "path": "out"}))
    outputs.setdefault("format", "csv")
    outputs.setdefault("path", "out")
    _require(outputs["format"] in OUTPUT_FORMATS, f"outputs.format must be one of {OUTPUT_FORMATS}", text, "outputs.format")

    cfg = RunConfig(n, pot, model, ic, integ, outputs, source)
    try:
        cfg.build_model()
    except (ModelError, DomainError) as exc:
        anchor = {"hopfield": "model.J", "cohen_grossberg": "model.C"}.get(kind, "model")
        raise ConfigError(str(exc), _line_of(text, anchor)) from None
    return cfg


def loads(text: str, source: Optional[Path] = None) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (column {exc.colno})", exc.lineno) from None
    return from_dict(data, text, source)


def load(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return loads(text, path)


def parse_points(spec: str, dimension: int, box=(-3.0, 3.0), seed_override: Optional[int] = None) -> np.ndarray:
    """Point source for ``kappa``: ``random:k:seed``, ``grid[:lo:hi:m]`` or a file path.

    Files hold a JSON array of vectors or comma-separated rows.
    """
    if spec.startswith("random:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError("--points random spec must be random:k:seed")
        k, seed = int(parts[1]), int(parts[2])
        rng = np.random.default_rng(seed if seed_override is None else seed_override)
        return rng.uniform(box[0], box[1], size=(k, dimension))
    if spec == "grid" or spec.startswith("grid:"):
        parts = spec.split(":")
        lo, hi, m = (float(parts[1]), float(parts[2]), int(parts[3])) if len(parts) == 4 else (box[0], box[1], 5)
        axes = [np.linspace(lo, hi, m)] * dimension
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dimension)
    path = Path(spec[5:] if spec.startswith("file:") else spec)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read points file {path}: {exc.strerror}") from None
    try:
        pts = np.asarray(json.loads(text), dtype=float)
    except json.JSONDecodeError:
        pts = np.loadtxt(path, delimiter=",", ndmin=2)
    if pts.ndim != 2 or pts.shape[1] != dimension:
        raise ConfigError(f"points file {path} must hold vectors of length {dimension}")
    return pts


__all__: List[str] = ["RunConfig", "load", "loads", "from_dict", "parse_points"]
