"""Parameter sweeps: spectra, 1-D optimality scans and 2-D grids.

Every grid point is an independent steady-state solve. Points may be
dispatched to a process pool; results are written back into pre-indexed
slots so the row order is always the cartesian order of the axes
(family value outermost, then axis 1, then axis 2).
"""

from __future__ import annotations

import datetime as _dt
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.signal import find_peaks

from .engine import TermFlags, assemble
from .model import TWO_PI_MHZ, SpinParams, thermal_state
from .steady import Observables, SteadyStateError, observables, solve_steady_state

SWEEPABLE = (
    "delta_omega", "omega_1", "omega_d", "omega_EL", "omega_NL",
    "tau_c", "temperature", "theta", "phi",
)


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    num: int

    def __post_init__(self):
        if self.name not in SWEEPABLE:
            raise ValueError(f"cannot sweep {self.name!r}; choose from {SWEEPABLE}")
        if self.num < 2:
            raise ValueError("an axis needs at least 2 points")
        if not self.start < self.stop:
            raise ValueError(f"axis {self.name}: start must be < stop")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.num)


@dataclass(frozen=True)
class Family:
    name: str
    values: tuple[float, ...]

    def __post_init__(self):
        if self.name not in SWEEPABLE:
            raise ValueError(f"cannot sweep {self.name!r}")
        if not self.values:
            raise ValueError("family needs at least one value")


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple[Axis, ...]
    base: SpinParams
    flags: TermFlags = TermFlags()
    family: Family | None = None
    null_tol: float = 1e-12
    sec_tol: float = 0.0
    method: str = "null-space"

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 2:
            raise ValueError("a sweep has one or two axes")

    @property
    def names(self) -> tuple[str, ...]:
        head = (self.family.name,) if self.family else ()
        return head + tuple(a.name for a in self.axes)

    def grid(self) -> list[tuple[float, ...]]:
        """Cartesian grid in row order."""
        lists = [list(self.family.values)] if self.family else []
        lists += [a.values().tolist() for a in self.axes]
        return list(itertools.product(*lists))


@dataclass(frozen=True)
class SweepRow:
    values: tuple[float, ...]
    observables: Observables | None
    residual: float
    method: str
    status: str


@dataclass
class SweepResult:
    names: tuple[str, ...]
    rows: list[SweepRow]
    metadata: dict = field(default_factory=dict)

    def column(self, attr: str) -> np.ndarray:
        """Observable column; NaN for rows without observables."""
        return np.array(
            [getattr(r.observables, attr) if r.observables is not None else math.nan for r in self.rows]
        )

    def axis_values(self, i: int) -> np.ndarray:
        return np.array([r.values[i] for r in self.rows])

    @property
    def all_ok(self) -> bool:
        return all(r.status == "ok" for r in self.rows)


@dataclass(frozen=True)
class OptimumReport:
    location: float
    value: float
    bracket: tuple[float, float]
    refined: bool
    interior: bool
    family_value: float | None = None


def _solve_point(args) -> SweepRow:
    base, names, values, flags, null_tol, sec_tol, method = args
    params = base.replace(**dict(zip(names, values)))
    L = assemble(params, flags, sec_tol)
    try:
        ss = solve_steady_state(L, method=method, tol=null_tol)
    except SteadyStateError as exc:
        return SweepRow(values, None, getattr(exc, "residual", math.nan), method, exc.status)
    obs = observables(ss, thermal_state(params))
    return SweepRow(values, obs, ss.residual, ss.method, "ok")


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Solve every grid point. ``workers > 1`` uses a process pool."""
    points = spec.grid()
    tasks = [
        (spec.base, spec.names, values, spec.flags, spec.null_tol, spec.sec_tol, spec.method)
        for values in points
    ]
    if workers <= 1 or len(tasks) < 2:
        rows = [_solve_point(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_solve_point, tasks, chunksize=chunk))
    return SweepResult(names=spec.names, rows=rows, metadata=_metadata(spec))


def _metadata(spec: SweepSpec) -> dict:
    from . import __version__

    return {
        "base": {k: getattr(spec.base, k) for k in spec.base.__dataclass_fields__},
        "flags": spec.flags.to_dict(),
        "axes": [vars(a) for a in spec.axes],
        "family": None if spec.family is None else {"name": spec.family.name, "values": list(spec.family.values)},
        "null_tol": spec.null_tol,
        "sec_tol": spec.sec_tol,
        "method": spec.method,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "version": __version__,
    }


# -- spectrum ---------------------------------------------------------------

def spectrum_spec(
    base: SpinParams,
    half_width: float | None = None,
    num: int = 701,
    flags: TermFlags = TermFlags(),
) -> SweepSpec:
    """Offset sweep over +-(omega_n + 2 pi 50 MHz) by default."""
    if half_width is None:
        half_width = base.omega_n + 50.0 * TWO_PI_MHZ
    return SweepSpec(axes=(Axis("delta_omega", -half_width, half_width, num),), base=base, flags=flags)


def sweep_spectrum(spec: SweepSpec, workers: int = 1) -> SweepResult:
    if len(spec.axes) != 1 or spec.axes[0].name != "delta_omega":
        raise ValueError("a spectrum sweeps delta_omega only")
    return run_sweep(spec, workers)


def spectrum_extrema(
    detuning: Sequence[float], enhancement: Sequence[float], prominence_fraction: float = 0.01
) -> np.ndarray:
    """Indices of local maxima of |eps - 1| with prominence above
    ``prominence_fraction * max|eps - 1|``, in ascending order."""
    order = np.argsort(detuning)
    dev = np.abs(np.asarray(enhancement, dtype=float)[order] - 1.0)
    floor = prominence_fraction * np.nanmax(dev)
    peaks, _ = find_peaks(dev, prominence=floor)
    return np.sort(order[peaks])


# -- 1-D scans --------------------------------------------------------------

def locate_optimum(x: Sequence[float], y: Sequence[float]) -> OptimumReport:
    """Best grid point refined by a 3-point parabola; endpoints are flagged."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    finite = np.where(np.isfinite(y), y, -np.inf)
    i = int(np.argmax(finite))
    if i == 0 or i == len(x) - 1:
        lo = x[max(i - 1, 0)]
        hi = x[min(i + 1, len(x) - 1)]
        return OptimumReport(float(x[i]), float(y[i]), (float(lo), float(hi)), refined=False, interior=False)
    x0, x1, x2 = x[i - 1 : i + 2]
    y0, y1, y2 = y[i - 1 : i + 2]
    bracket = (float(x0), float(x2))
    # uniform spacing assumed; fall back to the raw point otherwise
    h = x1 - x0
    curvature = y0 - 2.0 * y1 + y2
    if not all(np.isfinite((y0, y2))) or curvature >= 0 or not math.isclose(x2 - x1, h, rel_tol=1e-9):
        return OptimumReport(float(x1), float(y1), bracket, refined=False, interior=True)
    shift = 0.5 * (y0 - y2) / curvature
    value = y1 - 0.125 * (y0 - y2) ** 2 / curvature
    return OptimumReport(float(x1 + shift * h), float(max(value, y1)), bracket, refined=True, interior=True)


def enhancement_magnitude(row: SweepRow) -> float:
    return abs(row.observables.enhancement) if row.observables is not None else math.nan


def scan_1d(
    spec: SweepSpec,
    workers: int = 1,
    objective: Callable[[SweepRow], float] = enhancement_magnitude,
) -> tuple[SweepResult, list[OptimumReport]]:
    """1-D scan with one optimum per family value.

    The default objective is ``|eps|`` so that negative (DQ) enhancements
    are optimized by magnitude.
    """
    if len(spec.axes) != 1:
        raise ValueError("scan_1d takes exactly one axis")
    result = run_sweep(spec, workers)
    n = spec.axes[0].num
    x = spec.axes[0].values()
    families = spec.family.values if spec.family else (None,)
    reports = []
    for k, fam in enumerate(families):
        rows = result.rows[k * n : (k + 1) * n]
        rep = locate_optimum(x, [objective(r) for r in rows])
        if fam is not None:
            rep = OptimumReport(rep.location, rep.value, rep.bracket, rep.refined, rep.interior, fam)
        reports.append(rep)
    return result, reports


# -- 2-D grids --------------------------------------------------------------

def grid_2d(spec: SweepSpec, workers: int = 1) -> SweepResult:
    if len(spec.axes) != 2:
        raise ValueError("grid_2d takes exactly two axes")
    return run_sweep(spec, workers)


def grid_matrix(result: SweepResult, spec: SweepSpec, attr: str = "enhancement") -> np.ndarray:
    """Reshape a 2-D result into ``[axis1, axis2]`` (family-free grids only)."""
    if spec.family is not None:
        raise ValueError("grid_matrix expects a grid without a family")
    return result.column(attr).reshape(spec.axes[0].num, spec.axes[1].num)
