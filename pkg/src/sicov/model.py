"""Instrumentation overhead metrics and fitted cost models.

Metric definitions:

* IFR, instrumented function ratio: ``|SIC| / |F|``.
* PER, profile extraction ratio: extraction wall time / baseline wall time.
* t_CPU: instrumented build CPU time / baseline CPU time.
* FPS ratio: average instrumented frame rate / average baseline frame rate.

Defaults are the coefficients measured on a large production C++ engine:
t_CPU grows linearly in IFR with slope 128.08 (frontend instrumentation)
and 139.84 (IR instrumentation), and extraction costs about 8.33 % of the
baseline build per changed file (median).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Mapping, NamedTuple

__all__ = [
    "DomainError",
    "InstrumentationMode",
    "ContextKind",
    "OverheadModel",
    "FpsEntry",
    "ModelConfig",
    "DEFAULT_MODEL",
    "DEFAULT_FPS_REFERENCE",
    "SIC_TAXONOMY_IFR",
    "FULL_INSTRUMENTATION_TCPU",
    "DEFAULT_IFR_CAP",
    "compute_ifr",
    "profile_extraction_ratio",
    "tcpu_ratio",
    "fps_ratio",
    "estimate_per",
    "estimate_tcpu",
    "max_ifr_within_budget",
    "estimate_commit_budget",
    "fps_reference",
    "load_model_config",
]


class DomainError(ValueError):
    pass


class InstrumentationMode(str, enum.Enum):
    FE = "fe"
    IR = "ir"

    @classmethod
    def parse(cls, value: "str | InstrumentationMode") -> "InstrumentationMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"unknown instrumentation mode {value!r}") from None


class ContextKind(str, enum.Enum):
    MEDIAN_COMMIT = "median-commit"
    LARGEST_COMMIT = "largest-commit"
    BATCH_100 = "batch-100"
    WORST_CASE = "worst-case"
    FULL = "full"


@dataclass(frozen=True)
class OverheadModel:
    slope_fe: float = 128.08
    slope_ir: float = 139.84
    intercept: float = 1.0
    per_file_coefficient: float = 0.0833

    def __post_init__(self):
        for name in ("slope_fe", "slope_ir", "intercept", "per_file_coefficient"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be a positive finite number, got {value!r}")

    def slope(self, mode: InstrumentationMode | str) -> float:
        mode = InstrumentationMode.parse(mode)
        return self.slope_fe if mode is InstrumentationMode.FE else self.slope_ir


DEFAULT_MODEL = OverheadModel()

# t_CPU of builds instrumented without any profile list; not on the list-size line
FULL_INSTRUMENTATION_TCPU = {InstrumentationMode.FE: 1.75, InstrumentationMode.IR: 1.00}

# IFR of the reference contexts measured on the production engine
SIC_TAXONOMY_IFR = {
    "baseline": 0.0,
    "full": 1.0,
    ContextKind.MEDIAN_COMMIT.value: 2.78e-6,
    ContextKind.LARGEST_COMMIT.value: 5.56e-4,
    ContextKind.BATCH_100.value: 1.11e-3,
    ContextKind.WORST_CASE.value: 5.56e-4,
}

# instrumentation budget stated as a share of the codebase (~2,000 commits)
DEFAULT_IFR_CAP = 0.01


class FpsEntry(NamedTuple):
    ratio: float
    qualifier: str  # "point", "lower-bound" or "approximate"

    @property
    def is_bound(self) -> bool:
        return self.qualifier == "lower-bound"


def _default_fps() -> dict[tuple[InstrumentationMode, ContextKind], FpsEntry]:
    table = {}
    for mode in InstrumentationMode:
        for kind in (ContextKind.MEDIAN_COMMIT, ContextKind.LARGEST_COMMIT, ContextKind.BATCH_100):
            table[(mode, kind)] = FpsEntry(0.9, "lower-bound")
        table[(mode, ContextKind.WORST_CASE)] = FpsEntry(0.5, "approximate")
    table[(InstrumentationMode.FE, ContextKind.FULL)] = FpsEntry(0.297, "point")
    table[(InstrumentationMode.IR, ContextKind.FULL)] = FpsEntry(0.369, "point")
    return table


DEFAULT_FPS_REFERENCE = _default_fps()


# -- metric definitions -----------------------------------------------------


def compute_ifr(sic_size: int, total_functions: int) -> float:
    if total_functions < 1:
        raise DomainError("total_functions must be at least 1")
    if sic_size < 0 or sic_size > total_functions:
        raise DomainError(f"sic_size must be within [0, {total_functions}], got {sic_size}")
    return sic_size / total_functions


def _ratio(numerator: float, baseline: float, what: str) -> float:
    if baseline <= 0:
        raise DomainError(f"baseline {what} must be positive")
    if numerator < 0:
        raise DomainError(f"{what} must be non-negative")
    return numerator / baseline


def profile_extraction_ratio(extraction_time: float, baseline_wall_time: float) -> float:
    return _ratio(extraction_time, baseline_wall_time, "wall-clock time")


def tcpu_ratio(total_cpu_time: float, baseline_cpu_time: float) -> float:
    return _ratio(total_cpu_time, baseline_cpu_time, "CPU time")


def fps_ratio(average_fps: float, baseline_fps: float) -> float:
    return _ratio(average_fps, baseline_fps, "frame rate")


# -- fitted models ----------------------------------------------------------


def estimate_per(files_changed: int, model: OverheadModel = DEFAULT_MODEL) -> float:
    if files_changed < 0:
        raise DomainError("files_changed must be non-negative")
    return files_changed * model.per_file_coefficient


def estimate_tcpu(model: OverheadModel, mode: InstrumentationMode | str, ifr: float) -> float:
    if not 0.0 <= ifr <= 1.0:
        raise DomainError(f"ifr must lie in [0, 1], got {ifr}")
    return model.intercept + model.slope(mode) * ifr


def max_ifr_within_budget(model: OverheadModel, mode: InstrumentationMode | str, budget: float) -> float:
    """Largest IFR whose predicted t_CPU stays within ``budget``."""
    if not budget > model.intercept:
        raise DomainError(f"budget {budget} leaves no headroom above the intercept {model.intercept}")
    return (budget - model.intercept) / model.slope(mode)


def _exact(x: float) -> Fraction:
    # the decimal value as written, so 0.01 / 5e-6 is exactly 2000
    return Fraction(repr(float(x)))


def estimate_commit_budget(
    model: OverheadModel,
    mode: InstrumentationMode | str,
    per_commit_ifr: float,
    budget: float | None = None,
    ifr_cap: float | None = None,
) -> int:
    """How many commits of ``per_commit_ifr`` fit before the limit.

    The limit is either a t_CPU ``budget`` (converted with the fitted slope)
    or an explicit ``ifr_cap``; exactly one must be given.
    """
    if (budget is None) == (ifr_cap is None):
        raise DomainError("give exactly one of budget or ifr_cap")
    if not per_commit_ifr > 0:
        raise DomainError("per_commit_ifr must be positive")
    if ifr_cap is not None:
        if not 0 < ifr_cap <= 1:
            raise DomainError("ifr_cap must lie in (0, 1]")
        cap = _exact(ifr_cap)
    else:
        if not budget > model.intercept:
            raise DomainError(f"budget {budget} leaves no headroom above the intercept {model.intercept}")
        cap = (_exact(budget) - _exact(model.intercept)) / _exact(model.slope(mode))
    return math.floor(cap / _exact(per_commit_ifr))


def fps_reference(
    mode: InstrumentationMode | str,
    context_kind: ContextKind | str,
    table: Mapping[tuple[InstrumentationMode, ContextKind], FpsEntry] | None = None,
) -> FpsEntry:
    table = DEFAULT_FPS_REFERENCE if table is None else table
    try:
        key = (InstrumentationMode.parse(mode), ContextKind(context_kind))
    except ValueError:
        raise LookupError(f"no FPS reference for ({mode}, {context_kind})") from None
    if key not in table:
        raise LookupError(f"no FPS reference for ({key[0].value}, {key[1].value})")
    return table[key]


@dataclass
class ModelConfig:
    model: OverheadModel = DEFAULT_MODEL
    fps: dict = field(default_factory=lambda: dict(DEFAULT_FPS_REFERENCE))
    settings: dict = field(default_factory=dict)


def load_model_config(path: str | Path) -> ModelConfig:
    """Read ``key=value`` overrides.

    Recognized keys are the :class:`OverheadModel` fields and
    ``fps.<mode>.<context-kind>``; anything else is kept in ``settings``
    for the caller (e.g. ``extensions`` or ``store``).
    """
    model_fields = {}
    fps = dict(DEFAULT_FPS_REFERENCE)
    settings = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, eq, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not eq or not key:
            raise DomainError(f"{path}:{lineno}: expected key=value")
        if key in ("slope_fe", "slope_ir", "intercept", "per_file_coefficient"):
            try:
                model_fields[key] = float(value)
            except ValueError:
                raise DomainError(f"{path}:{lineno}: {key} needs a number") from None
        elif key.startswith("fps."):
            parts = key.split(".")
            if len(parts) != 3:
                raise DomainError(f"{path}:{lineno}: expected fps.<mode>.<context>")
            try:
                k = (InstrumentationMode.parse(parts[1]), ContextKind(parts[2]))
                ratio = float(value)
            except ValueError:
                raise DomainError(f"{path}:{lineno}: bad FPS override {line!r}") from None
            if not 0 < ratio <= 1:
                raise DomainError(f"{path}:{lineno}: FPS ratio must lie in (0, 1]")
            fps[k] = FpsEntry(ratio, "point")
        else:
            settings[key] = value
    return ModelConfig(replace(DEFAULT_MODEL, **model_fields), fps, settings)
