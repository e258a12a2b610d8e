"""Run configuration: defaults < CMPKIT_* environment < key=value file < CLI flags."""

import os
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .constants import GAMMA_GHZ_PER_T, MU0_MS_T, PhysicalConstants

ENV_PREFIX = "CMPKIT_"


@dataclass(frozen=True)
class RunConfig:
    gamma: float = GAMMA_GHZ_PER_T  # GHz/T, gamma/2pi
    mu0_ms: float = MU0_MS_T  # T
    spin_density: float = 4.22e27  # m^-3
    moment: float = 5.0  # Bohr magnetons per spin site
    lande_g: float = 2.0
    xtol: float = 1e-9
    gtol: float = 1e-10
    max_iter: int = 200
    output_dir: str = "."
    verbosity: int = 0

    def __post_init__(self):
        for name in ("gamma", "mu0_ms", "spin_density", "moment", "lande_g", "xtol", "gtol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"config value {name} must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")

    def constants(self):
        import math
        return PhysicalConstants(lande_g=self.lande_g, moment_per_site=self.moment,
                                 spin_density=self.spin_density,
                                 gyromagnetic_ratio=2 * math.pi * self.gamma * 1e9)

    def check_output_dir(self):
        path = Path(self.output_dir)
        path.mkdir(parents=True, exist_ok=True)
        if not os.access(path, os.W_OK):
            raise PermissionError(f"output directory {path} is not writable")
        return path


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name, text):
    kind = _TYPES[name]
    if kind in (int, "int"):
        return int(text)
    if kind in (float, "float"):
        return float(text)
    return str(text)


def parse_key_values(text, source="config"):
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower().replace("-", "_")
        if key not in _TYPES:
            raise ValueError(f"{source}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def from_env(environ=None):
    environ = os.environ if environ is None else environ
    out = {}
    for key, value in environ.items():
        if key.startswith(ENV_PREFIX):
            name = key[len(ENV_PREFIX):].lower()
            if name in _TYPES:
                out[name] = _coerce(name, value)
    return out


def load_config(path=None, overrides=None, environ=None):
    values = from_env(environ)
    if path is not None:
        values.update(parse_key_values(Path(path).read_text(), str(path)))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return replace(RunConfig(), **values)
