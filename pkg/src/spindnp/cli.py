"""Command-line front end.

Commands: ``spectrum``, ``scan1d``, ``grid2d``, ``steady``, ``populations``.
Each writes ``<prefix>.csv`` and a ``<prefix>.json`` sidecar, and
optionally ``<prefix>_plot.py``. Exit status is 0 when every row solved,
2 when some rows failed numerically and 1 on configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import platform
import sys
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import (
    INTERNAL_TO_USER,
    AXIS_UNITS,
    ConfigError,
    RunConfig,
    convert_value,
    emit_config,
    parse_config,
)
from .engine import assemble
from .model import LEVEL_LABELS, TWO_PI_MHZ, thermal_state
from .steady import SteadyStateError, observables, solve_steady_state
from .sweep import (
    Axis,
    Family,
    SweepResult,
    SweepRow,
    SweepSpec,
    grid_2d,
    scan_1d,
    sweep_spectrum,
)

COMMANDS = ("spectrum", "scan1d", "grid2d", "steady", "populations")
OBSERVABLE_COLUMNS = (
    "enhancement", "electron_polarization", "nuclear_polarization",
    "p1", "p2", "p3", "p4", "residual", "status",
)

DETUNING_SIGN_DOC = """\
Detuning sign convention
------------------------
The master equation is written with the offset
    delta_omega = omega_e - omega_mu   (H_shift = delta_omega S_z + omega_n I_z)
while spectra are reported against the carrier detuning
    Delta_omega = omega_mu - omega_e = -delta_omega.
Config keys (detuning_mhz, axis = detuning) and the CSV column
delta_omega_mhz all use Delta_omega / 2pi in MHz.

  zero-quantum drive:   omega_mu = omega_e - omega_n  ->  Delta_omega = -omega_n
  double-quantum drive: omega_mu = omega_e + omega_n  ->  Delta_omega = +omega_n
"""

# defaults per command when the [sweep] block is empty
_SWEEP_DEFAULTS = {
    "scan1d": dict(axis1="omega_1", axis1_start=0.2, axis1_stop=40.0, axis1_points=200,
                   family="omega_nl", family_values=(0.1, 0.2, 0.4)),
    "grid2d": dict(axis1="omega_1", axis1_start=1.0, axis1_stop=40.0, axis1_points=40,
                   axis2="omega_d", axis2_start=0.3, axis2_stop=12.0, axis2_points=40),
}


def _user_column(internal: str) -> str:
    user = INTERNAL_TO_USER[internal]
    if user == "detuning":
        return "delta_omega_mhz"
    return f"{user}_{AXIS_UNITS[user][2]}"


def _to_user(internal: str, value: float) -> float:
    # + 0.0 folds a negative zero from the detuning sign flip
    return value / AXIS_UNITS[INTERNAL_TO_USER[internal]][1] + 0.0


def _num(x: float) -> str:
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else format(x, ".17g")


def rows_to_csv(names: tuple[str, ...], rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([_user_column(n) for n in names] + list(OBSERVABLE_COLUMNS))
    for row in rows:
        cells = [_num(_to_user(n, v)) for n, v in zip(names, row.values)]
        obs = row.observables
        if obs is None:
            cells += [""] * 7
        else:
            cells += [_num(obs.enhancement), _num(obs.electron_polarization), _num(obs.nuclear_polarization)]
            cells += [_num(p) for p in obs.populations_x100]
        cells += [_num(row.residual), row.status]
        writer.writerow(cells)
    return buf.getvalue()


# -- plot scripts -----------------------------------------------------------

_PLOT_HEADER = '''\
"""Plot {csv} (generated by spindnp {command})."""
import csv
import matplotlib.pyplot as plt
import numpy as np

with open({csv!r}) as fh:
    rows = [r for r in csv.DictReader(fh) if r["status"] == "ok"]
'''

_PLOT_BODY = {
    "spectrum": '''\
x = np.array([float(r["delta_omega_mhz"]) for r in rows])
y = np.array([float(r["enhancement"]) for r in rows])
order = np.argsort(x)
plt.plot(x[order], y[order])
plt.xlabel("detuning / 2pi (MHz)")
plt.ylabel("enhancement")
''',
    "scan1d": '''\
xcol, fcol = {xcol!r}, {fcol!r}
groups = {{}}
for r in rows:
    groups.setdefault(r[fcol] if fcol else "", []).append(r)
for key, grp in groups.items():
    plt.plot([float(r[xcol]) for r in grp], [abs(float(r["enhancement"])) for r in grp], label=key)
plt.xlabel(xcol)
plt.ylabel("|enhancement|")
if fcol:
    plt.legend(title=fcol)
''',
    "grid2d": '''\
xcol, ycol = {xcol!r}, {ycol!r}
xs = sorted({{float(r[xcol]) for r in rows}})
ys = sorted({{float(r[ycol]) for r in rows}})
z = np.full((len(xs), len(ys)), np.nan)
for r in rows:
    z[xs.index(float(r[xcol])), ys.index(float(r[ycol]))] = float(r["enhancement"])
plt.contourf(ys, xs, z, 30)
plt.colorbar(label="enhancement")
plt.xlabel(ycol)
plt.ylabel(xcol)
''',
    "populations": '''\
labels = ["1 |uu>", "2 |ud>", "3 |du>", "4 |dd>"]
for k, r in enumerate(rows):
    plt.bar(np.arange(4) + 0.4 * k, [float(r[p]) for p in ("p1", "p2", "p3", "p4")], 0.4, label=r["case"])
plt.xticks(np.arange(4) + 0.2, labels)
plt.ylabel("100 x population")
plt.legend()
''',
}


def plot_script(command: str, csv_path: str, columns: list[str]) -> str | None:
    if command not in _PLOT_BODY:
        return None
    param_cols = [c for c in columns if c not in OBSERVABLE_COLUMNS and c != "case"]
    fmt = {}
    if command == "scan1d":
        fmt = {"xcol": param_cols[-1], "fcol": param_cols[0] if len(param_cols) > 1 else None}
    elif command == "grid2d":
        fmt = {"xcol": param_cols[-2], "ycol": param_cols[-1]}
    body = _PLOT_BODY[command].format(**fmt)
    return _PLOT_HEADER.format(csv=csv_path, command=command) + "\n" + body + "plt.show()\n"


# -- commands ---------------------------------------------------------------

def _spec(cfg: RunConfig, axes: tuple[Axis, ...], family: Family | None = None) -> SweepSpec:
    return SweepSpec(
        axes=axes,
        base=cfg.base_params(),
        flags=cfg.flags(),
        family=family,
        null_tol=cfg.null_tol,
        sec_tol=cfg.sec_tol_mhz * TWO_PI_MHZ,
        method=cfg.method,
    )


def resolve_sweep_defaults(command: str, cfg: RunConfig) -> RunConfig:
    if cfg.axis1 is not None:
        return cfg
    if command == "spectrum":
        half = cfg.omega_n_mhz + 50.0
        return cfg.replace(axis1="detuning", axis1_start=-half, axis1_stop=half, axis1_points=701)
    if command in _SWEEP_DEFAULTS:
        return cfg.replace(**_SWEEP_DEFAULTS[command])
    return cfg


def _run_sweep_command(command: str, cfg: RunConfig) -> tuple[SweepResult, dict]:
    extra: dict = {}
    axis1 = cfg.axis(1)
    axis2 = cfg.axis(2)
    family = cfg.family_spec()
    if command == "spectrum":
        if axis1.name != "delta_omega" or axis2 is not None:
            raise ConfigError("spectrum sweeps detuning only")
        result = sweep_spectrum(_spec(cfg, (axis1,), family), cfg.workers)
    elif command == "scan1d":
        if axis2 is not None:
            raise ConfigError("scan1d takes a single axis")
        result, reports = scan_1d(_spec(cfg, (axis1,), family), cfg.workers)
        extra["optima"] = [
            {
                "family_value": None if r.family_value is None else _to_user(family.name, r.family_value),
                "location": _to_user(axis1.name, r.location),
                "value": r.value,
                "bracket": [_to_user(axis1.name, b) for b in r.bracket],
                "refined": r.refined,
                "interior": r.interior,
            }
            for r in reports
        ]
    else:
        if axis2 is None:
            raise ConfigError("grid2d needs axis2")
        result = grid_2d(_spec(cfg, (axis1, axis2), family), cfg.workers)
    return result, extra


def _single_point(cfg: RunConfig, case: str) -> tuple[dict, SweepRow]:
    params = cfg.base_params()
    L = assemble(params, cfg.flags(), cfg.sec_tol_mhz * TWO_PI_MHZ)
    values = (params.delta_omega,)
    try:
        ss = solve_steady_state(L, method=cfg.method, tol=cfg.null_tol)
    except SteadyStateError as exc:
        return {"case": case, "status": exc.status}, SweepRow(values, None, math.nan, cfg.method, exc.status)
    obs = observables(ss, thermal_state(params))
    row = SweepRow(values, obs, ss.residual, ss.method, "ok")
    return {"case": case, "status": "ok", "method": ss.method, **asdict(obs), "residual": ss.residual}, row


def _populations_csv(cfg: RunConfig, row: SweepRow) -> str:
    params = cfg.base_params()
    eq = observables(thermal_state(params), thermal_state(params))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["case", "delta_omega_mhz"] + list(OBSERVABLE_COLUMNS))
    det = _num(_to_user("delta_omega", params.delta_omega))
    writer.writerow(
        ["equilibrium", det, _num(eq.enhancement), _num(eq.electron_polarization), _num(eq.nuclear_polarization)]
        + [_num(p) for p in eq.populations_x100] + ["0", "ok"]
    )
    obs = row.observables
    steady = ["steady", det]
    if obs is None:
        steady += [""] * 7
    else:
        steady += [_num(obs.enhancement), _num(obs.electron_polarization), _num(obs.nuclear_polarization)]
        steady += [_num(p) for p in obs.populations_x100]
    writer.writerow(steady + [_num(row.residual), row.status])
    return buf.getvalue()


def run_command(command: str, cfg: RunConfig, out=None) -> int:
    """Execute ``command`` and write its files. Returns the exit status."""
    out = sys.stdout if out is None else out
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    cfg = resolve_sweep_defaults(command, cfg)
    extra: dict = {}
    if command in ("spectrum", "scan1d", "grid2d"):
        result, extra = _run_sweep_command(command, cfg)
        text = rows_to_csv(result.names, result.rows)
        rows = result.rows
    else:
        summary, row = _single_point(cfg, "steady")
        rows = [row]
        extra["result"] = summary
        extra["level_labels"] = list(LEVEL_LABELS)
        if command == "steady":
            text = rows_to_csv(("delta_omega",), rows)
        else:
            text = _populations_csv(cfg, row)
        print(json.dumps(summary, indent=2), file=out)

    prefix = Path(cfg.prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    csv_path = prefix.with_name(prefix.name + ".csv")
    json_path = prefix.with_name(prefix.name + ".json")
    columns = text.splitlines()[0].split(",")
    statuses = [r.status for r in rows]

    sidecar = {
        "command": command,
        "config": emit_config(cfg),
        "params_si": {f.name: getattr(cfg.base_params(), f.name) for f in fields(cfg.base_params())},
        "omega_mu": cfg.base_params().omega_mu,
        "flags": cfg.flags().to_dict(),
        "columns": columns,
        "row_count": len(rows),
        "status_counts": {s: statuses.count(s) for s in sorted(set(statuses))},
        "versions": {
            "spindnp": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        **extra,
    }
    csv_path.write_text(text)
    json_path.write_text(json.dumps(sidecar, indent=2) + "\n")
    if cfg.plot_script:
        script = plot_script(command, csv_path.name, columns)
        if script is not None:
            prefix.with_name(prefix.name + "_plot.py").write_text(script)

    return 0 if all(s == "ok" for s in statuses) else 2


def apply_overrides(cfg: RunConfig, pairs: list[str]) -> RunConfig:
    """Apply ``key=value`` overrides (same keys and units as the file)."""
    by_name = {f.name: f for f in fields(RunConfig)}
    changes = {}
    for pair in pairs:
        key, sep, raw = pair.partition("=")
        key = key.strip()
        if not sep or key not in by_name:
            raise ConfigError(f"bad override {pair!r}")
        try:
            changes[key] = convert_value(by_name[key], raw)
        except ValueError as exc:
            raise ConfigError(f"override {key}: {exc}") from None
    if changes.get("detuning_mhz") is not None and "transition" not in changes:
        changes["transition"] = "custom"
    if changes.get("transition", "custom") != "custom":
        changes["detuning_mhz"] = None
    return cfg.replace(**changes) if changes else cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spindnp", description=__doc__.splitlines()[0])
    parser.add_argument("command", nargs="?", choices=COMMANDS)
    parser.add_argument("-c", "--config", type=Path, help="configuration file")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a configuration key (repeatable)")
    parser.add_argument("--flags", help="comma-separated terms, e.g. first_order,dissipators")
    parser.add_argument("--workers", type=int, help="worker processes for sweeps")
    parser.add_argument("-o", "--out", help="output prefix")
    parser.add_argument("--plot-script", action="store_true", help="also write a matplotlib script")
    parser.add_argument("--delta-omega-sign", action="store_true",
                        help="explain the detuning sign convention and exit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.delta_omega_sign:
        print(DETUNING_SIGN_DOC)
        return 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        text = args.config.read_text() if args.config else ""
        cfg = parse_config(text)
        cfg = apply_overrides(cfg, args.set)
        changes = {}
        if args.flags:
            changes["terms"] = args.flags
        if args.workers is not None:
            changes["workers"] = args.workers
        if args.out:
            changes["prefix"] = args.out
        if args.plot_script:
            changes["plot_script"] = True
        if changes:
            cfg = cfg.replace(**changes)
        return run_command(args.command, cfg)
    except (ValueError, OSError) as exc:
        print(f"spindnp: configuration error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
