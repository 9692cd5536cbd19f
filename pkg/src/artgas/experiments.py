"""Cells, sweeps and CSV output for scheme and scenario comparisons."""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, Mapping, Sequence

from . import config as cfgmod
from .engine import Scheme, SimConfig, run
from .metrics import summarize
from .traffic import offered_load

log = logging.getLogger(__name__)

COLUMNS = (
    "scheme",
    "scenario",
    "n_heavy",
    "gamma",
    "seed",
    "success_prob",
    "avg_delay_s",
    "avg_wait_s",
    "bandwidth_util",
    "frames_generated",
    "frames_delivered",
    "frames_dropped",
    "error",
)
SWEEP_COLUMNS = ("param", "value") + COLUMNS
ALL_SCENARIOS = "all"


def network_gamma(sim: SimConfig, device_ids: Iterable[int] | None = None) -> float:
    ids = None if device_ids is None else set(device_ids)
    return sum(d.profile.rate for d in sim.devices if ids is None or d.device_id in ids)


def run_cell(values: Mapping[str, object], by_scenario: bool = False) -> list[dict]:
    """Run one configuration; one row for the network plus one per scenario group."""
    sim = cfgmod.build(values)
    ledger = run(sim)
    n_heavy = int(values["traffic.n_heavy"])
    util = str(values["metrics.utilization"])
    base = {"scheme": sim.scheme.value, "n_heavy": n_heavy, "seed": sim.seed, "error": ""}

    def row(scenario, counters, gamma):
        s = summarize(counters, gamma, ledger.horizon_s, util, ledger.n_superframes)
        return {
            **base,
            "scenario": scenario,
            "gamma": gamma,
            "success_prob": s.success_prob,
            "avg_delay_s": s.avg_delay_s,
            "avg_wait_s": s.avg_wait_s,
            "bandwidth_util": s.bandwidth_util,
            "frames_generated": counters.frames_generated,
            "frames_delivered": counters.frames_delivered,
            "frames_dropped": counters.frames_dropped,
        }

    label = str(values["scenario"])
    if label in ("none", "table2"):
        label = ALL_SCENARIOS
    rows = [row(label, ledger.totals, network_gamma(sim))]
    if by_scenario:
        groups: dict[int, list[int]] = {}
        for d in sim.devices:
            scen = cfgmod.scenario_of(d.device_id, values)
            if scen is not None:
                groups.setdefault(scen, []).append(d.device_id)
        for scen in sorted(groups):
            ids = groups[scen]
            rows.append(row(str(scen), ledger.subset(ids), network_gamma(sim, ids)))
    return rows


def _error_row(values: Mapping[str, object], exc: Exception) -> dict:
    row = {c: None for c in COLUMNS}
    scheme = values.get("scheme")
    row.update(
        scheme=getattr(scheme, "value", scheme),
        scenario=ALL_SCENARIOS,
        n_heavy=values.get("traffic.n_heavy"),
        seed=values.get("seed"),
        error=f"{type(exc).__name__}: {exc}",
    )
    try:
        row["gamma"] = offered_load(int(values["traffic.n_devices"]), int(values["traffic.n_heavy"]), values["traffic.chi_h"], values["traffic.chi_l"])
    except Exception:
        pass
    return row


def _safe_cell(args) -> list[dict]:
    values, by_scenario, extra = args
    try:
        rows = run_cell(values, by_scenario)
    except Exception as exc:  # one bad cell must not sink the sweep
        log.error("cell failed: %s", exc)
        rows = [_error_row(values, exc)]
    for r in rows:
        r.update(extra)
    return rows


def _execute(cells: list, jobs: int) -> list[dict]:
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_safe_cell, cells))
    else:
        chunks = [_safe_cell(c) for c in cells]
    return [r for chunk in chunks for r in chunk]


def _scenario_key(s) -> tuple:
    s = str(s)
    if s == ALL_SCENARIOS:
        return (0, 0, "")
    if s.isdigit():
        return (1, int(s), "")
    return (2, 0, s)


def compare(
    base: Mapping[str, object],
    schemes: Sequence[Scheme] = (Scheme.FCFS, Scheme.ARTGAS),
    loads: Sequence[int] = (0, 5, 10, 15, 20),
    seeds: Sequence[int] = (1, 2, 3, 4, 5),
    by_scenario: bool = False,
    scenarios: Sequence[str] | None = None,
    jobs: int = 1,
) -> list[dict]:
    """Every (scheme, N_h, seed) cell, paired on seed across schemes.

    ``scenarios`` repeats the grid once per named preset (``scenario1`` ..
    ``scenario5`` or ``table2``); ``by_scenario`` adds per-group rows for
    mixed layouts.
    """
    cells = []
    for scenario in scenarios or [None]:
        for scheme in schemes:
            for nh in loads:
                for seed in seeds:
                    values = dict(base)
                    values.update({"scheme": Scheme(scheme), "traffic.n_heavy": nh, "seed": seed})
                    if scenario is not None:
                        values["scenario"] = scenario
                    cells.append((values, by_scenario, {}))
    rows = _execute(cells, jobs)
    rows.sort(key=lambda r: (str(r["scheme"]), _scenario_key(r["scenario"]), r["n_heavy"], r["seed"]))
    return rows


def sweep(
    base: Mapping[str, object],
    param: str,
    values: Sequence[str],
    seeds: Sequence[int] | None = None,
    by_scenario: bool = False,
    jobs: int = 1,
) -> list[dict]:
    """Re-run the base configuration with ``param`` set to each of ``values``."""
    key = cfgmod.canonical_key(param)
    seeds = list(seeds) if seeds else [int(base["seed"])]
    cells = []
    for raw in values:
        parsed = cfgmod.parse_value(key, str(raw))
        for seed in seeds:
            cfg = dict(base)
            cfg.update({key: parsed, "seed": seed})
            cells.append((cfg, by_scenario, {"param": param, "value": str(raw)}))
    rows = _execute(cells, jobs)
    order = {str(v): i for i, v in enumerate(values)}
    rows.sort(key=lambda r: (order[r["value"]], str(r["scheme"]), _scenario_key(r["scenario"]), r["n_heavy"], r["seed"]))
    return rows


def _fmt(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, float):
        return format(v, ".10g")
    return str(v)


def to_csv(rows: Sequence[Mapping[str, object]], columns: Sequence[str] = COLUMNS) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def write_csv(rows, path: str, columns: Sequence[str] = COLUMNS):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(to_csv(rows, columns))


def with_superframes(values: Mapping[str, object], n: int | None) -> dict:
    out = dict(values)
    if n is not None:
        out["duration_superframes"] = n
    return out

