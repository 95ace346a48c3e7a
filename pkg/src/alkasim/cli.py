"""Command-line interface: simulate, validate, steady-state.

Exit codes: 0 success, 1 configuration error, 2 integration failure.
A failed integration still writes the samples collected so far, so the
transient leading up to the abort can be inspected.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import dae
from .constants import M_H2
from .dae import (ALL_COLUMNS, U_NAMES, X_NAMES, Y_NAMES, Trajectory,
                  find_steady_state, simulate)
from .errors import AlkasimError, IntegrationError, ScenarioError
from .scenario import ScenarioConfig, initial_state, load_scenario


def write_csv(traj: Trajectory, path: Path,
              channels: tuple[str, ...] | None = None,
              header_only: bool = False) -> None:
    """Write sampled channels as CSV with unit-suffixed headers.

    Values are emitted with repr so parsing the file reproduces the
    trajectory bit for bit.
    """
    cols = list(channels) if channels else list(ALL_COLUMNS)
    if "t_s" not in cols:
        cols.insert(0, "t_s")
    bad = set(cols) - set(ALL_COLUMNS)
    if bad:
        raise ScenarioError(f"unknown output channels: {sorted(bad)}")
    idx = [ALL_COLUMNS.index(c) for c in cols]
    table = traj.table()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        if header_only:
            return
        for row in table:
            fh.write(",".join(repr(float(row[i])) for i in idx) + "\n")


def emit_plot_data(traj: Trajectory, channels: tuple[str, ...],
                   out_dir: Path, stem: str) -> list[Path]:
    """Write one two-column (t, value) text file per channel."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    t = traj.t
    for name in channels:
        series = traj.column(name)
        p = out_dir / f"{stem}_{name}.dat"
        with open(p, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# t_s {name}\n")
            for ti, vi in zip(t, series):
                fh.write(f"{ti!r} {float(vi)!r}\n")
        paths.append(p)
    return paths


def summary(traj: Trajectory, config: ScenarioConfig) -> str:
    """Human-readable run summary: temperatures, production, energy."""
    lines = [f"scenario: {config.name}"]
    if traj.t.size == 0:
        lines.append("no samples recorded")
        return "\n".join(lines)
    t_final = traj.t[-1]
    T = traj.x[-1, 0]
    lines.append(f"simulated time: {t_final:.1f} s "
                 f"({traj.stats.steps_accepted} steps, "
                 f"{traj.stats.wall_time_s:.2f} s wall)")
    lines.append(f"final stack temperature: {T:.2f} K ({T - 273.15:.2f} C)")
    if traj.t.size > 1:
        h2_mol = float(np.trapezoid(traj.z[:, 0], traj.t))
        h2_kg = h2_mol * M_H2
        e_in = float(np.trapezoid(traj.d[:, 1], traj.t))  # J
        lines.append(f"hydrogen produced: {h2_kg:.4f} kg "
                     f"({h2_mol:.2f} mol)")
        if h2_kg > 0.0:
            lines.append("specific energy: "
                         f"{e_in / 3.6e6 / h2_kg:.2f} kWh/kg")
        lines.append(f"peak cell voltage: {np.max(traj.y[:, 0]):.4f} V")
        lines.append(f"final tank pressure: {traj.y[-1, 10]/1e5:.3f} bar")
    if not traj.complete:
        lines.append(f"run INCOMPLETE: {traj.abort_reason}")
    return "\n".join(lines)


def run(config: ScenarioConfig, out_dir: str | Path = ".",
        channels: tuple[str, ...] | None = None,
        plot_channels: tuple[str, ...] | None = None
        ) -> tuple[Trajectory, Path]:
    """Simulate a scenario and write its CSV; returns (trajectory, path).

    Raises IntegrationError after writing the partial CSV if the run
    aborts.  A zero-horizon run writes a header-only CSV.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{config.name}.csv"
    x0 = initial_state(config)
    sel = channels or config.output_channels
    try:
        traj = simulate(x0, config.u_of_t, config.d_of_t, config.t_end,
                        plant=config.plant, settings=config.solver,
                        breakpoints=config.breakpoints)
    except IntegrationError as exc:
        if exc.partial is not None:
            write_csv(exc.partial, csv_path, sel)
        raise
    write_csv(traj, csv_path, sel, header_only=(config.t_end == 0.0))
    if plot_channels:
        emit_plot_data(traj, plot_channels, out_dir, config.name)
    return traj, csv_path


def _cmd_simulate(args) -> int:
    try:
        config = load_scenario(args.scenario)
        if args.sample_interval is not None:
            config.solver.sample_interval = args.sample_interval
        channels = tuple(args.channels.split(",")) if args.channels else None
        plot = tuple(args.plot_channels.split(",")) if args.plot_channels \
            else None
    except (ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        traj, csv_path = run(config, args.out, channels, plot)
    except (ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except IntegrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.partial is not None and exc.partial.t.size:
            print(f"partial results ({exc.partial.t.size} samples) "
                  f"written to {Path(args.out) / (config.name + '.csv')}",
                  file=sys.stderr)
        return 2
    except AlkasimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(summary(traj, config))
    print(f"results written to {csv_path}")
    return 0


def _cmd_validate(args) -> int:
    try:
        config = load_scenario(args.scenario)
        initial_state(config)
    except (ScenarioError, OSError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 1
    n_steps = round(config.t_end / config.solver.h)
    print(f"{args.scenario}: OK")
    print(f"scenario {config.name!r}: horizon {config.t_end:.0f} s, "
          f"{n_steps} steps of {config.solver.h} s, "
          f"{len(config.breakpoints)} input breakpoints")
    return 0


def _cmd_steady_state(args) -> int:
    try:
        config = load_scenario(args.scenario)
        x0 = initial_state(config)
    except (ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        result = find_steady_state(config.u_of_t(0.0), config.d_of_t(0.0),
                                   x0, plant=config.plant,
                                   settings=config.solver,
                                   balance=args.balance)
    except AlkasimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"steady state for scenario {config.name!r} "
          f"({'balanced inputs' if args.balance else 'inputs as given'}):")
    for name, val in zip(X_NAMES, result.state.x):
        print(f"  x  {name:12s} = {val:.6g}")
    for name, val in zip(Y_NAMES, result.state.y):
        print(f"  y  {name:12s} = {val:.6g}")
    if args.balance:
        for name, val in zip(U_NAMES, result.u):
            print(f"  u  {name:12s} = {val:.6g}")
    print("inventory drift (mol/s or W):")
    for name, val in zip(X_NAMES, result.drift):
        print(f"  d/dt {name:12s} = {val: .3e}")
    print(f"max scaled differential residual: "
          f"{np.max(np.abs(result.scaled_drift)):.3e}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="alkasim",
        description="Dynamic simulation of an alkaline electrolyzer plant")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="integrate a scenario and "
                           "write CSV results")
    p_sim.add_argument("scenario", help="scenario TOML file")
    p_sim.add_argument("--out", default=".", help="output directory")
    p_sim.add_argument("--sample-interval", type=float, default=None,
                       help="seconds between samples (overrides scenario)")
    p_sim.add_argument("--channels", default=None,
                       help="comma-separated CSV column selection")
    p_sim.add_argument("--plot-channels", default=None,
                       help="comma-separated channels to dump as "
                            "two-column plot files")
    p_sim.set_defaults(func=_cmd_simulate)

    p_val = sub.add_parser("validate", help="check a scenario file")
    p_val.add_argument("scenario")
    p_val.set_defaults(func=_cmd_validate)

    p_ss = sub.add_parser("steady-state", help="solve for an operating "
                          "point with frozen inventories")
    p_ss.add_argument("scenario")
    p_ss.add_argument("--balance", action="store_true",
                      help="adjust flows so all inventories hold steady")
    p_ss.set_defaults(func=_cmd_steady_state)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
