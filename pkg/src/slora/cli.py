"""Command-line entry point: ``slora-sim {run,budget,validate}``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ALOHA, PAIRED, SLOTTED, ConfigError, read_config_file
from .engine import slot_schedule
from .metrics import Cell, cell_config, load_experiment, run_grid
from .phy import FrameParams, time_on_air
from .timing import budget_for

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2

_MODES = {"aloha": ALOHA, "slotted": SLOTTED, "paired": PAIRED}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slora-sim", description="Slotted vs pure-ALOHA LoRaWAN simulator")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="TOML file with flat key = value overrides")
        sp.add_argument("--seed", type=int, help="base seed (run r of a cell uses seed + r)")
        sp.add_argument("--mode", choices=sorted(_MODES))
        sp.add_argument("--budget", type=int, help="messages generated per run")

    r = sub.add_parser("run", help="execute the experiment grid and write the CSV")
    common(r)
    r.add_argument("--out", required=True)
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--runs", type=int, help="runs per cell")

    b = sub.add_parser("budget", help="print the timing budget and slot schedule for one cell")
    common(b)
    b.add_argument("--sf", type=int)
    b.add_argument("--payload", type=int)
    b.add_argument("--t-tx", type=float)
    b.add_argument("--n", type=int)

    v = sub.add_parser("validate", help="check a config file without simulating")
    common(v)
    return p


def _load(args):
    values = read_config_file(args.config) if args.config else {}
    if args.seed is not None:
        values["seed"] = args.seed
    if args.mode is not None:
        values["mode"] = _MODES[args.mode]
    if args.budget is not None:
        values["budget"] = args.budget
    if getattr(args, "runs", None) is not None:
        values["runs_per_cell"] = args.runs
    base, grid = load_experiment(values)
    grid.validate(base.t_sync)
    return base, grid


def _print_budget(base, grid, args) -> None:
    cell = Cell(
        sf=args.sf if args.sf is not None else base.sf,
        payload_bytes=args.payload if args.payload is not None else base.payload_bytes,
        t_tx=args.t_tx if args.t_tx is not None else base.t_tx,
        n_devices=args.n if args.n is not None else base.n_devices,
    )
    cfg = cell_config(base, cell, SLOTTED).validate()
    toa = time_on_air(FrameParams.from_config(cfg))
    sched = slot_schedule(cfg, toa)
    b = budget_for(cfg)
    print(f"cell: SF{cell.sf} payload={cell.payload_bytes} B t_tx={cell.t_tx:g} s N={cell.n_devices}")
    print(f"time_on_air      {toa * 1e3:12.3f} ms")
    print(f"k                {sched.k:12d}")
    print(f"guard t_g        {sched.t_g * 1e3:12.3f} ms")
    print(f"slot t_slot      {sched.t_slot * 1e3:12.3f} ms")
    print(f"slots M          {sched.m_slots:12d}")
    for name in ("u_tx", "u_pd", "u_v", "u_combined", "u_td", "u_t0", "u_t0q", "u_t0s", "u_tsync"):
        print(f"{name:<16} {getattr(b, name) * 1e3:12.6f} ms")
    print(f"{'u_beta':<16} {b.u_beta:12.6f} ticks/s")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        base, grid = _load(args)
        if args.command == "validate":
            for cell in grid.cells():
                for mode in grid.modes():
                    cell_config(base, cell, mode).validate()
            print(f"ok: {sum(1 for _ in grid.cells())} cells, modes {', '.join(grid.modes())}")
        elif args.command == "budget":
            _print_budget(base, grid, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command != "run":
        return EXIT_OK
    try:
        out = run_grid(grid, args.out, base, workers=max(1, args.workers))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - mapped to the runtime exit code
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {out}", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
