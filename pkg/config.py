"""
Run configuration: defaults, key = value files, environment and flag overrides
"""
import logging
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple, Union

from errors import ConfigError
from models import Domain, MaterialParams, ModelKind, NewtonConfig, TemperatureCase

logger = logging.getLogger(__name__)

OUTDIR_ENV = "LIMITFEM_OUTDIR"
MECHANICS_SOLVERS = ("direct", "cg")

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_case(text: str) -> TemperatureCase:
    return TemperatureCase(int(text.strip().lower().replace("case", "")))


@dataclass(frozen=True)
class RunConfig:
    domain: Domain = Domain.EXAMPLE1
    case: TemperatureCase = TemperatureCase.CASE1
    model: ModelKind = ModelKind.NONLINEAR
    refinements: int = 7
    lam: float = 1.0
    mu: float = 1.0
    a: float = 0.5
    beta: float = 0.02
    k: float = 20.0
    g: float = -10.0
    alpha_t: float = 0.1
    tol: float = 1e-8
    max_iter: int = 50
    outdir: str = "output"
    workers: int = 1
    export_vtk: bool = True
    export_csv: bool = True
    export_profile: bool = True
    total_stress: bool = False
    profile_samples: int = 0  # 0 samples at the grid nodes
    mechanics_solver: str = "direct"

    def material(self) -> MaterialParams:
        return MaterialParams(lam=self.lam, mu=self.mu, a=self.a, beta=self.beta,
                              k=self.k, g=self.g, alpha_t=self.alpha_t)

    def newton(self) -> NewtonConfig:
        return NewtonConfig(tol=self.tol, max_iter=self.max_iter)

    def violations(self) -> List[Tuple[str, str]]:
        """(key, message) for every broken invariant"""
        found = []
        if self.model is ModelKind.NONLINEAR and not self.beta > 0:
            found.append(("beta", "the nonlinear model requires beta > 0"))
        minimum = 1 if self.domain is Domain.EXAMPLE2 else 0
        if self.refinements < minimum:
            found.append(("refinements", f"must be at least {minimum} for {self.domain.value}"))
        if not self.tol > 0:
            found.append(("tol", "must be positive"))
        if self.max_iter < 1:
            found.append(("max_iter", "must be at least 1"))
        if self.workers < 1:
            found.append(("workers", "must be at least 1"))
        if self.profile_samples == 1 or self.profile_samples < 0:
            found.append(("profile_samples", "use 0 (grid nodes) or at least 2 samples"))
        if self.mechanics_solver not in MECHANICS_SOLVERS:
            found.append(("mechanics_solver", f"expected one of {', '.join(MECHANICS_SOLVERS)}"))
        checks = {"mu must be positive": "mu", "lambda + mu must be positive": "lambda",
                  "a must be positive": "a", "beta must be non-negative": "beta",
                  "k must be positive": "k"}
        for message in self.material().validate()["errors"]:
            found.append((checks.get(message, "material"), message))
        return found

    def validate(self) -> Dict[str, Any]:
        """Validate the configuration"""
        errors = [f"{key}: {message}" for key, message in self.violations()]
        return {"valid": len(errors) == 0, "errors": errors}


# file key -> (RunConfig attribute, parser, formatter)
_KEYS: Dict[str, Tuple[str, Callable[[str], Any], Callable[[Any], str]]] = {
    "domain": ("domain", lambda s: Domain(s.strip().lower()), lambda v: v.value),
    "case": ("case", _parse_case, lambda v: str(v.value)),
    "model": ("model", lambda s: ModelKind(s.strip().lower()), lambda v: v.value),
    "refinements": ("refinements", int, str),
    "lambda": ("lam", float, repr),
    "mu": ("mu", float, repr),
    "a": ("a", float, repr),
    "beta": ("beta", float, repr),
    "k": ("k", float, repr),
    "g": ("g", float, repr),
    "alpha_t": ("alpha_t", float, repr),
    "tol": ("tol", float, repr),
    "max_iter": ("max_iter", int, str),
    "outdir": ("outdir", str.strip, str),
    "workers": ("workers", int, str),
    "export_vtk": ("export_vtk", _parse_bool, lambda v: "true" if v else "false"),
    "export_csv": ("export_csv", _parse_bool, lambda v: "true" if v else "false"),
    "export_profile": ("export_profile", _parse_bool, lambda v: "true" if v else "false"),
    "total_stress": ("total_stress", _parse_bool, lambda v: "true" if v else "false"),
    "profile_samples": ("profile_samples", int, str),
    "mechanics_solver": ("mechanics_solver", lambda s: s.strip().lower(), str),
}
_ATTR_TO_KEY = {attr: key for key, (attr, _, _) in _KEYS.items()}


def parse_config_text(text: str) -> Tuple[Dict[str, Any], Dict[str, int]]:
    """Attribute values and their source line numbers from key = value text"""
    values: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=number)
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if key not in _KEYS:
            raise ConfigError("unknown key", key=key, line=number)
        attr, parser, _ = _KEYS[key]
        try:
            values[attr] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"invalid value {value!r} ({exc})", key=key, line=number) from exc
        lines[attr] = number
    return values, lines


def parse_config(path: Optional[Union[str, Path]] = None,
                 overrides: Optional[Mapping[str, Any]] = None,
                 environ: Optional[Mapping[str, str]] = None) -> RunConfig:
    """Defaults < config file < LIMITFEM_OUTDIR < flags; raises ConfigError on any violation"""
    values: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        values, lines = parse_config_text(text)
        logger.debug("Loaded %d keys from %s", len(values), path)

    flags = {name: value for name, value in (overrides or {}).items() if value is not None}
    known = {f.name for f in fields(RunConfig)}
    for name in flags:
        if name not in known:
            raise ConfigError("unknown setting", key=name)

    env = os.environ if environ is None else environ
    if "outdir" not in values and "outdir" not in flags and env.get(OUTDIR_ENV):
        values["outdir"] = env[OUTDIR_ENV]

    values.update(flags)
    config = replace(RunConfig(), **values)
    for attr, message in config.violations():
        attr_name = "lam" if attr == "lambda" else attr
        line = lines.get(attr_name) if attr_name not in flags else None
        raise ConfigError(message, key=_ATTR_TO_KEY.get(attr_name, attr), line=line)
    return config


def format_config(config: RunConfig) -> str:
    """Serialise every setting as key = value, readable by parse_config"""
    out = []
    for key, (attr, _, formatter) in _KEYS.items():
        out.append(f"{key} = {formatter(getattr(config, attr))}")
    return "\n".join(out) + "\n"
