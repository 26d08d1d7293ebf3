"""Run configuration: INI-style text with unit-suffixed keys.

Sections are ``[system]``, ``[environment]``, ``[drive]``, ``[sweep]``,
``[solver]`` and ``[output]``. Frequencies are omega/2pi in MHz, the
correlation time is in ns, temperature in K and angles in rad. Unknown
sections or keys are errors.

Detuning follows the carrier convention ``detuning = (omega_mu -
omega_e) / 2pi``, i.e. the negative of the shift-Hamiltonian offset.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
import re
from dataclasses import dataclass, field, fields

from .engine import TermFlags
from .model import TWO_PI_MHZ, SpinParams
from .sweep import Axis, Family

TRANSITIONS = ("zq", "dq", "oe", "custom")
METHODS = ("null-space", "propagation")

# user axis name -> (internal name, scale to canonical units, user unit suffix)
AXIS_UNITS = {
    "detuning": ("delta_omega", -TWO_PI_MHZ, "mhz"),
    "omega_1": ("omega_1", TWO_PI_MHZ, "mhz"),
    "omega_d": ("omega_d", TWO_PI_MHZ, "mhz"),
    "omega_el": ("omega_EL", TWO_PI_MHZ, "mhz"),
    "omega_nl": ("omega_NL", TWO_PI_MHZ, "mhz"),
    "tau_c": ("tau_c", 1e-9, "ns"),
    "temperature": ("temperature", 1.0, "k"),
    "theta": ("theta", 1.0, "rad"),
    "phi": ("phi", 1.0, "rad"),
}
INTERNAL_TO_USER = {v[0]: k for k, v in AXIS_UNITS.items()}


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


def _meta(section: str, kind: str, **extra):
    return {"section": section, "kind": kind, **extra}


@dataclass(frozen=True)
class RunConfig:
    """Resolved configuration in user units. Field order is emit order."""

    omega_n_mhz: float = field(default=300.0, metadata=_meta("system", "positive"))
    omega_e_mhz: float | None = field(default=None, metadata=_meta("system", "positive"))
    omega_d_mhz: float = field(default=3.0, metadata=_meta("system", "nonneg"))
    theta_rad: float = field(default=math.pi / 3, metadata=_meta("system", "real"))
    phi_rad: float = field(default=0.0, metadata=_meta("system", "real"))

    omega_el_mhz: float = field(default=10.0, metadata=_meta("environment", "nonneg"))
    omega_nl_mhz: float = field(default=0.2, metadata=_meta("environment", "nonneg"))
    tau_c_ns: float = field(default=1.0, metadata=_meta("environment", "positive"))
    temperature_k: float = field(default=65.0, metadata=_meta("environment", "positive"))

    omega_1_mhz: float = field(default=8.0, metadata=_meta("drive", "nonneg"))
    transition: str = field(default="zq", metadata=_meta("drive", "choice", choices=TRANSITIONS))
    detuning_mhz: float | None = field(default=None, metadata=_meta("drive", "real"))

    axis1: str | None = field(default=None, metadata=_meta("sweep", "choice", choices=tuple(AXIS_UNITS)))
    axis1_start: float | None = field(default=None, metadata=_meta("sweep", "real"))
    axis1_stop: float | None = field(default=None, metadata=_meta("sweep", "real"))
    axis1_points: int | None = field(default=None, metadata=_meta("sweep", "count"))
    axis2: str | None = field(default=None, metadata=_meta("sweep", "choice", choices=tuple(AXIS_UNITS)))
    axis2_start: float | None = field(default=None, metadata=_meta("sweep", "real"))
    axis2_stop: float | None = field(default=None, metadata=_meta("sweep", "real"))
    axis2_points: int | None = field(default=None, metadata=_meta("sweep", "count"))
    family: str | None = field(default=None, metadata=_meta("sweep", "choice", choices=tuple(AXIS_UNITS)))
    family_values: tuple[float, ...] | None = field(default=None, metadata=_meta("sweep", "reals"))

    terms: str = field(default="full", metadata=_meta("solver", "terms"))
    method: str = field(default="null-space", metadata=_meta("solver", "choice", choices=METHODS))
    null_tol: float = field(default=1e-12, metadata=_meta("solver", "positive"))
    sec_tol_mhz: float = field(default=0.0, metadata=_meta("solver", "nonneg"))

    prefix: str = field(default="dnp_run", metadata=_meta("output", "text"))
    plot_script: bool = field(default=False, metadata=_meta("output", "bool"))
    workers: int = field(default=1, metadata=_meta("output", "count"))

    def __post_init__(self):
        if self.detuning_mhz is not None and self.transition != "custom":
            raise ConfigError("detuning_mhz requires transition = custom")
        if self.transition == "custom" and self.detuning_mhz is None:
            raise ConfigError("transition = custom requires detuning_mhz")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        try:
            TermFlags.from_names(self.terms)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    # -- conversions --------------------------------------------------------

    def flags(self) -> TermFlags:
        return TermFlags.from_names(self.terms)

    def base_params(self) -> SpinParams:
        """The single user-unit -> canonical-unit conversion."""
        params = SpinParams.from_user_units(
            omega_n_mhz=self.omega_n_mhz,
            omega_e_mhz=self.omega_e_mhz,
            omega_1_mhz=self.omega_1_mhz,
            omega_d_mhz=self.omega_d_mhz,
            theta_rad=self.theta_rad,
            phi_rad=self.phi_rad,
            omega_el_mhz=self.omega_el_mhz,
            omega_nl_mhz=self.omega_nl_mhz,
            tau_c_ns=self.tau_c_ns,
            temperature_k=self.temperature_k,
            detuning_mhz=self.detuning_mhz or 0.0,
        )
        if self.transition != "custom":
            params = params.at_transition(self.transition)
        return params

    def axis(self, which: int) -> Axis | None:
        name = getattr(self, f"axis{which}")
        if name is None:
            return None
        start = getattr(self, f"axis{which}_start")
        stop = getattr(self, f"axis{which}_stop")
        num = getattr(self, f"axis{which}_points")
        if start is None or stop is None or num is None:
            raise ConfigError(f"axis{which} needs _start, _stop and _points")
        return user_axis(name, start, stop, num)

    def family_spec(self) -> Family | None:
        if self.family is None:
            return None
        if not self.family_values:
            raise ConfigError("family needs family_values")
        internal, scale, _ = AXIS_UNITS[self.family]
        return Family(internal, tuple(v * scale for v in self.family_values))


def user_axis(name: str, start: float, stop: float, num: int) -> Axis:
    """Axis from user units. A detuning range maps to an ascending offset range."""
    internal, scale, _ = AXIS_UNITS[name]
    lo, hi = start * scale, stop * scale
    if scale < 0:
        lo, hi = hi, lo
    try:
        return Axis(internal, lo, hi, num)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


# -- text format --------------------------------------------------------------

def _key_line(text: str, section: str, key: str) -> int | None:
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.fullmatch(r"\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip().lower()
        elif current == section and re.match(rf"{re.escape(key)}\s*[=:]", line, re.IGNORECASE):
            return lineno
    return None


_TOP = "__top__"


def _top_key_line(text: str, key: str) -> int | None:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("["):
            return None
        if re.match(rf"{re.escape(key)}\s*[=:]", line, re.IGNORECASE):
            return lineno
    return None


def _section_line(text: str, section: str) -> int | None:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if raw.strip().lower() == f"[{section}]":
            return lineno
    return None


def convert_value(f: dataclasses.Field, raw: str):
    kind = f.metadata["kind"]
    raw = raw.strip()
    if kind in ("positive", "nonneg", "real"):
        value = float(raw)
        if not math.isfinite(value):
            raise ValueError(f"{f.name} must be finite")
        if kind == "positive" and value <= 0:
            raise ValueError(f"{f.name} must be > 0, got {value!r}")
        if kind == "nonneg" and value < 0:
            raise ValueError(f"{f.name} must be >= 0, got {value!r}")
        return value
    if kind == "count":
        value = int(raw)
        if value < 1:
            raise ValueError(f"{f.name} must be >= 1")
        return value
    if kind == "reals":
        return tuple(float(v) for v in raw.split(",") if v.strip())
    if kind == "choice":
        value = raw.lower()
        if value not in f.metadata["choices"]:
            raise ValueError(f"{f.name} must be one of {', '.join(f.metadata['choices'])}")
        return value
    if kind == "bool":
        lowered = raw.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{f.name} must be a boolean")
    return raw


def parse_config(text: str) -> RunConfig:
    """Parse configuration text. Keys placed before any section header are
    accepted and resolved to their own section."""
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";"), strict=True
    )
    # lines before the first header land in a synthetic section; line numbers shift by one
    try:
        parser.read_string(f"[{_TOP}]\n" + text)
    except configparser.Error as exc:
        lineno = getattr(exc, "lineno", None)
        raise ConfigError(str(exc).replace("\n", " "), None if lineno is None else lineno - 1) from None

    by_key = {(f.metadata["section"], f.name): f for f in fields(RunConfig)}
    by_name = {f.name: f for f in fields(RunConfig)}
    sections = {f.metadata["section"] for f in fields(RunConfig)}
    values = {}
    for section in parser.sections():
        if section not in sections and section != _TOP:
            raise ConfigError(f"unknown section [{section}]", _section_line(text, section))
        for key, raw in parser.items(section):
            f = by_name.get(key) if section == _TOP else by_key.get((section, key))
            if f is None:
                line = _top_key_line(text, key) if section == _TOP else _key_line(text, section, key)
                raise ConfigError(f"unknown key {key!r} in [{section}]", line)
            try:
                values[f.name] = convert_value(f, raw)
            except ValueError as exc:
                line = _top_key_line(text, key) if section == _TOP else _key_line(text, section, key)
                raise ConfigError(f"[{f.metadata['section']}] {key}: {exc}", line) from None
    if values.get("detuning_mhz") is not None and "transition" not in values:
        values["transition"] = "custom"
    return RunConfig(**values)


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    return str(value)


def emit_config(cfg: RunConfig) -> str:
    """Text form of ``cfg``; ``parse_config(emit_config(cfg)) == cfg``."""
    out: list[str] = []
    current = None
    for f in fields(RunConfig):
        value = getattr(cfg, f.name)
        if value is None:
            continue
        section = f.metadata["section"]
        if section != current:
            if out:
                out.append("")
            out.append(f"[{section}]")
            current = section
        out.append(f"{f.name} = {_format(value)}")
    return "\n".join(out) + "\n"
