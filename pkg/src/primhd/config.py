"""Plain-text run configuration.

One ``key = value`` pair per line; ``#`` starts a comment.  Unknown keys,
duplicate keys and malformed values are rejected with their line number.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .errors import ConfigError
from .initial import PRESETS
from .pem import StepperConfig
from .spectral import Grid

MODELS = ("PEM", "SMHD")
KINDS = ("run", "twin", "sweep", "inequality")
LEMMAS = ("t24", "t25", "t26", "t27", "l22a", "l22b", "l23")


def _bool(text):
    low = text.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _int(text):
    value = float(text)
    if value != int(value):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _names(text):
    return tuple(v.strip() for v in text.split(",") if v.strip())


_RUN_KEYS = {
    "model": str,
    "T_final": float,
    "eps": float,
    "L1": float,
    "L2": float,
    "N": _int,
    "Nx": _int,
    "Ny": _int,
    "Nz": _int,
    "dt": float,
    "scheme": str,
    "cfl_limit": float,
    "clean_magnetic_barotropic": _bool,
    "record_every": _int,
    "initial_condition": str,
    "ic_amplitude": float,
    "output_dir": str,
    "seed": _int,
    "C_user": float,
}
_EXTRA_KEYS = {
    "run": {},
    "twin": {"delta": float, "perturbation_seed": _int},
    "sweep": {"eps_values": _floats},
    "inequality": {
        "samples": _int,
        "lemmas": _names,
        "N_check": _int,
        "band": _int,
        "alpha": float,
    },
}


@dataclass(frozen=True)
class SimConfig:
    model: str
    T_final: float
    eps: float | None = None
    L1: float = 1.0
    L2: float = 1.0
    Nx: int = 32
    Ny: int = 32
    Nz: int = 32
    dt: float = 1e-3
    scheme: str = "RK3"
    cfl_limit: float = 0.5
    clean_magnetic_barotropic: bool = False
    record_every: int = 1
    initial_condition: str = "random-smooth"
    ic_amplitude: float = 1.0
    output_dir: str = "output"
    seed: int = 0
    C_user: float = 1.0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}, got {self.model!r}")
        if not self.T_final > 0:
            raise ConfigError(f"T_final must be positive, got {self.T_final}")
        if self.model == "SMHD":
            if self.eps is None:
                raise ConfigError("eps is required for model = SMHD")
            if not self.eps > 0:
                raise ConfigError(f"eps must be positive, got {self.eps}")
        elif self.eps is not None:
            raise ConfigError("eps not applicable for model = PEM")
        if self.record_every < 1:
            raise ConfigError(f"record_every must be >= 1, got {self.record_every}")
        ic = self.initial_condition
        if ic not in PRESETS and not ic.startswith("snapshot:"):
            raise ConfigError(f"unknown initial_condition {ic!r}")
        try:
            self.grid
            self.stepper
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def grid(self):
        return Grid(self.Nx, self.Ny, self.Nz, self.L1, self.L2)

    @property
    def stepper(self):
        return StepperConfig(self.dt, self.scheme, self.cfl_limit, self.clean_magnetic_barotropic)

    @property
    def n_steps(self):
        return max(1, int(round(self.T_final / self.dt)))


@dataclass(frozen=True)
class TwinRunJob:
    base: SimConfig
    delta: float = 1e-3
    perturbation_seed: int = 1

    def __post_init__(self):
        if not self.delta >= 0:
            raise ConfigError(f"delta must be nonnegative, got {self.delta}")
        if self.base.model != "PEM":
            raise ConfigError("twin runs use model = PEM")


@dataclass(frozen=True)
class EpsSweepJob:
    """Runs SMHD at each eps and PEM from the same horizontal data."""

    base: SimConfig
    eps_values: tuple = (0.2, 0.1, 0.05)

    def __post_init__(self):
        if not self.eps_values or any(not e > 0 for e in self.eps_values):
            raise ConfigError("eps_values must be a nonempty list of positive numbers")


@dataclass(frozen=True)
class InequalityJob:
    base: SimConfig
    samples: int = 1000
    lemmas: tuple = LEMMAS
    N_check: int = 64
    band: int = 8
    alpha: float = 2.0

    def __post_init__(self):
        if self.samples < 1:
            raise ConfigError("samples must be >= 1")
        bad = [name for name in self.lemmas if name not in LEMMAS]
        if bad:
            raise ConfigError(f"unknown lemma ids {bad}; expected a subset of {LEMMAS}")


_JOB_TYPES = {"twin": TwinRunJob, "sweep": EpsSweepJob, "inequality": InequalityJob}


def parse_config(text, kind="run", overrides=None, defaults=None):
    """Parse configuration text for an experiment ``kind``.

    ``overrides`` (a mapping) replaces parsed values, as used for command
    line flags; ``defaults`` fills keys the text leaves out.  Returns a :class:`SimConfig` for ``kind='run'`` and the
    matching job object otherwise.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    allowed = dict(_RUN_KEYS, **_EXTRA_KEYS[kind])
    values = {}
    lines = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        if value == "":
            raise ConfigError(f"empty value for {key!r}", lineno)
        try:
            values[key] = allowed[key](value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno) from None
        lines[key] = lineno
    values.update(overrides or {})
    for key, value in (defaults or {}).items():
        values.setdefault(key, value)
    if "model" in values:
        values["model"] = str(values["model"]).upper()

    if kind in ("sweep", "inequality", "twin"):
        values.setdefault("model", "PEM")
        values.setdefault("T_final", 1.0)
    for key in ("model", "T_final"):
        if key not in values:
            raise ConfigError(f"missing required key {key!r}")
    if "eps" in values and values["model"] != "SMHD":
        raise ConfigError("eps not applicable for model = " + str(values["model"]), lines.get("eps"))
    if "N" in values:
        n = values.pop("N")
        for axis in ("Nx", "Ny", "Nz"):
            if axis in values:
                raise ConfigError(f"N conflicts with {axis}", lines.get(axis))
            values[axis] = n

    extras = {k: values.pop(k) for k in list(values) if k in _EXTRA_KEYS[kind]}
    base = SimConfig(**values)
    if kind == "run":
        return base
    return _JOB_TYPES[kind](base=base, **extras)


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    return str(value)


def serialize_config(job):
    """Text that :func:`parse_config` maps back to an equal object."""
    if isinstance(job, SimConfig):
        base, extra = job, {}
    else:
        base = job.base
        extra = {f.name: getattr(job, f.name) for f in dataclasses.fields(job) if f.name != "base"}
    out = []
    for f in dataclasses.fields(base):
        value = getattr(base, f.name)
        if value is None:
            continue
        out.append(f"{f.name} = {_fmt(value)}")
    out += [f"{k} = {_fmt(v)}" for k, v in extra.items()]
    return "\n".join(out) + "\n"


def kind_of(job):
    for kind, cls in _JOB_TYPES.items():
        if isinstance(job, cls):
            return kind
    return "run"
