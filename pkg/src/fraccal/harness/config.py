"""Experiment configuration and the shipped presets (INI files)."""

from __future__ import annotations

import configparser
import enum
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

__all__ = [
    "Experiment",
    "ExperimentConfig",
    "ConfigError",
    "SCHEME_NAMES",
    "preset_names",
    "load_preset",
    "load_config",
    "parse_config",
]

SCHEME_NAMES = ("DE1", "DE2", "DE3", "DE", "sinc", "balakrishnan")


class ConfigError(ValueError):
    pass


class Experiment(enum.Enum):
    SCALAR_POWER = "ScalarPower"
    SCALAR_ML = "ScalarML"
    LAMBDA_SWEEP = "LambdaSweep"
    ELLIPTIC_2D = "Elliptic2D"
    PARABOLIC_2D = "Parabolic2D"
    POLE_MAP = "PoleMap"

    @classmethod
    def parse(cls, text: str) -> "Experiment":
        key = text.replace("-", "").replace("_", "").lower()
        for e in cls:
            if e.value.lower() == key:
                return e
        raise ConfigError(f"unknown experiment {text!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one experiment.

    ``sigma``/``theta`` shape the custom ``DE`` scheme; the named presets
    DE1-DE3 keep their own shapes. ``rho`` and ``r`` only feed the
    predicted-rate metadata.
    """

    experiment: Experiment
    schemes: tuple[str, ...]
    n_q: tuple[int, ...]
    kappa: float = 3.0
    beta: float = 0.5
    alpha: float = 1.0
    t: float = 1.0
    omega: float = 1.0
    sigma: float = 0.5
    theta: float = 4.0
    rho: float = 0.0
    r: float = 0.0
    mode_cutoff: int = 40
    lambdas: tuple[float, ...] = ()
    lambda_samples_nq_max: int | None = None
    name: str = "experiment"
    output: str = "results/experiment.csv"
    extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.schemes:
            raise ConfigError("at least one scheme is required")
        for s in self.schemes:
            if s not in SCHEME_NAMES:
                raise ConfigError(f"unknown scheme {s!r}; choose from {', '.join(SCHEME_NAMES)}")
        if "balakrishnan" in self.schemes and self.experiment not in (
            Experiment.SCALAR_POWER,
            Experiment.ELLIPTIC_2D,
        ):
            raise ConfigError("the Balakrishnan scheme is only available for power functions")
        if not self.n_q or min(self.n_q) < 2:
            raise ConfigError("n_q values must be >= 2")
        if not self.kappa > 0:
            raise ConfigError("kappa must be positive")
        if not self.beta > 0:
            raise ConfigError("beta must be positive")
        if self.experiment in (Experiment.SCALAR_ML, Experiment.PARABOLIC_2D) and not 0 < self.alpha <= 1:
            raise ConfigError("alpha must lie in (0, 1]")
        if self.sigma not in (0.5, 1.0):
            raise ConfigError("sigma must be 0.5 or 1")

    @property
    def n_q_max(self) -> int:
        return max(self.n_q)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(eval_number(x)) for x in text.replace(",", " ").split())


def eval_number(text: str) -> float:
    """Parse a float, also accepting ``sqrt(x)`` and ``1/sqrt(x)`` for exact presets."""
    t = text.strip()
    if t.startswith("1/sqrt(") and t.endswith(")"):
        return 1.0 / math.sqrt(float(t[7:-1]))
    if t.startswith("sqrt(") and t.endswith(")"):
        return math.sqrt(float(t[5:-1]))
    return float(t)


def _int_range(text: str) -> tuple[int, ...]:
    """``"2:120"``, ``"20:120:5"`` or a list of integers."""
    t = text.strip()
    if ":" in t:
        parts = [int(p) for p in t.split(":")]
        if len(parts) == 2:
            parts.append(1)
        a, b, s = parts
        return tuple(range(a, b + 1, s))
    return tuple(int(x) for x in t.replace(",", " ").split())


def parse_config(parser: configparser.ConfigParser, *, name: str = "experiment") -> ExperimentConfig:
    if "experiment" not in parser:
        raise ConfigError("missing [experiment] section")
    sec = parser["experiment"]
    kw: dict = {"name": sec.get("name", name)}
    kw["experiment"] = Experiment.parse(sec["type"])
    kw["schemes"] = tuple(s.strip() for s in sec.get("schemes", "").split(",") if s.strip())
    kw["n_q"] = _int_range(sec.get("n_q", "2:120"))
    for key in ("kappa", "beta", "alpha", "t", "omega", "sigma", "theta", "rho", "r"):
        if key in sec:
            kw[key] = eval_number(sec[key])
    if "mode_cutoff" in sec:
        kw["mode_cutoff"] = int(sec["mode_cutoff"])
    if "lambdas" in sec:
        kw["lambdas"] = _floats(sec["lambdas"])
    if "lambda_samples_nq_max" in sec:
        kw["lambda_samples_nq_max"] = int(sec["lambda_samples_nq_max"])
    kw["output"] = sec.get("output", f"results/{kw['name']}.csv")
    known = {"name", "type", "schemes", "n_q", "kappa", "beta", "alpha", "t", "omega", "sigma", "theta",
             "rho", "r", "mode_cutoff", "lambdas", "lambda_samples_nq_max", "output"}
    kw["extra"] = {k: v for k, v in sec.items() if k not in known}
    return ExperimentConfig(**kw)


def load_config(path: str | Path) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    return parse_config(parser, name=Path(path).stem)


def _preset_dir():
    return resources.files("fraccal").joinpath("presets")


def preset_names() -> list[str]:
    return sorted(p.name[:-4] for p in _preset_dir().iterdir() if p.name.endswith(".ini"))


def load_preset(name: str) -> ExperimentConfig:
    path = _preset_dir().joinpath(f"{name}.ini")
    if not path.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    parser = configparser.ConfigParser()
    parser.read_string(path.read_text(encoding="utf-8"))
    return parse_config(parser, name=name)
