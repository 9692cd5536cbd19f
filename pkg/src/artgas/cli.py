"""Command line entry point: ``artgas run | compare | sweep``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import config as cfgmod
from . import experiments as ex
from .engine import ConfigError, Scheme

EXIT_CONFIG = 2


def parse_int_list(text: str) -> list[int]:
    """``"0,5,10"`` or ``"1..5"`` (inclusive) or a mix of both."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo_i, hi_i = int(lo), int(hi)
            if hi_i < lo_i:
                raise argparse.ArgumentTypeError(f"empty range {part!r}")
            out.extend(range(lo_i, hi_i + 1))
        else:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _int_list(text):
    try:
        return parse_int_list(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _str_list(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="artgas", description="IEEE 802.15.4 GTS allocation simulator (FCFS vs ART-GAS)")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="flat key = value config file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one config key")
        sp.add_argument("--superframes", type=int, help="simulation length in superframes")
        sp.add_argument("--out", required=True, help="CSV output path ('-' for stdout)")
        sp.add_argument("--by-scenario", action="store_true", help="add one row per priority scenario group")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes")

    r = sub.add_parser("run", help="single simulation")
    common(r)
    r.add_argument("--scheme", choices=[s.value for s in Scheme])
    r.add_argument("--seed", type=int)

    c = sub.add_parser("compare", help="paired-seed FCFS vs ART-GAS grid over N_h")
    common(c)
    c.add_argument("--loads", type=_int_list, default=[0, 5, 10, 15, 20])
    c.add_argument("--seeds", type=_int_list, default=[1, 2, 3, 4, 5])
    c.add_argument("--schemes", type=_str_list, default=["fcfs", "artgas"])
    c.add_argument("--scenarios", type=_str_list, help="repeat the grid per preset, e.g. scenario1,scenario5")

    s = sub.add_parser("sweep", help="vary one config key")
    common(s)
    s.add_argument("--param", required=True)
    s.add_argument("--values", type=_str_list, required=True)
    s.add_argument("--seeds", type=_int_list)
    return p


def _load(args) -> dict:
    overrides = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, raw = item.split("=", 1)
        overrides[cfgmod.canonical_key(key)] = cfgmod.parse_value(key, raw)
    try:
        values = cfgmod.load(args.config, overrides)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    values = ex.with_superframes(values, args.superframes)
    cfgmod.build(values)  # fail fast before any cell runs
    return values


def _emit(rows, path, columns):
    text = ex.to_csv(rows, columns)
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            extra = {}
            if args.scheme:
                extra["scheme"] = Scheme(args.scheme)
            if args.seed is not None:
                extra["seed"] = args.seed
            values = _load(args)
            values.update(extra)
            cfgmod.build(values)
            rows = ex.run_cell(values, args.by_scenario)
            _emit(rows, args.out, ex.COLUMNS)
        elif args.command == "compare":
            values = _load(args)
            schemes = [Scheme(s.lower()) for s in args.schemes]
            for name in args.scenarios or []:
                cfgmod.scenario_of(0, {**values, "scenario": name})
            rows = ex.compare(values, schemes, args.loads, args.seeds, args.by_scenario, args.scenarios, args.jobs)
            _emit(rows, args.out, ex.COLUMNS)
        else:
            values = _load(args)
            key = cfgmod.canonical_key(args.param)
            for raw in args.values:
                cfgmod.parse_value(key, raw)
            rows = ex.sweep(values, args.param, args.values, args.seeds, args.by_scenario, args.jobs)
            _emit(rows, args.out, ex.SWEEP_COLUMNS)
    except ValueError as exc:  # ConfigError and enum/number parse failures
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
