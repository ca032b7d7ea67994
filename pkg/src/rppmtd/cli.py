"""Command-line surface: instance generation, solving, benchmark sweeps,
and convergence-trace extraction.

All commands are deterministic under --seed: every primary output file
(instances, plans, summaries, result/trace CSVs) is byte-identical across
re-runs.  Wall-clock measurements are written to separate *_timing.csv
sidecar files, which are the only non-reproducible outputs.
"""

from __future__ import annotations

import argparse
import csv
import glob
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from .evolution import GaConfig, RunTrace, solve
from .instances import (
    DEFAULT_GRID_KM,
    Instance,
    InstanceError,
    generate_instance,
    load_instance,
    save_instance,
    tau_from_beta,
)
from .oracle import OracleSizeError, exhaustive_solve
from .routing import FleetConfig


class CliError(Exception):
    pass


def _parse_key_value(pairs: list[str]) -> dict:
    out = {}
    for item in pairs:
        if "=" not in item:
            raise CliError(f"--param expects key=value, got '{item}'")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _coerce_config(overrides: dict) -> dict:
    defaults = GaConfig()
    coerced = {}
    for key, value in overrides.items():
        if key not in GaConfig.field_names():
            raise CliError(f"unknown config field '{key}'")
        current = getattr(defaults, key)
        coerced[key] = type(current)(value)
    return coerced


def _resolve_config(args, seed: int) -> GaConfig:
    """CLI --param overrides beat the --config file, which beats defaults."""
    settings: dict = {}
    config_path = getattr(args, "config", None)
    if config_path:
        with open(config_path, "r", encoding="utf-8") as fh:
            file_settings = json.load(fh)
        if not isinstance(file_settings, dict):
            raise CliError(f"{config_path}: expected a JSON object")
        settings.update(_coerce_config({k: str(v) for k, v in file_settings.items()}))
    settings.update(_coerce_config(_parse_key_value(getattr(args, "param", []) or [])))
    settings["seed"] = seed
    return GaConfig(**settings)


def _parse_seeds(text: str) -> list[int]:
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(tok) for tok in text.split(",") if tok]


def _parse_grid(text: str) -> tuple[list[int], list[int]]:
    ks: list[int] | None = None
    ms: list[int] | None = None
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        key, _, values = part.partition("=")
        nums = [int(tok) for tok in values.split(",") if tok]
        if key.strip().upper() == "K":
            ks = nums
        elif key.strip().upper() == "M":
            ms = nums
        else:
            raise CliError(f"--grid expects K=...;M=..., got '{part}'")
    if not ks or ms is None:
        raise CliError("--grid must define both K and M, e.g. 'K=1,2;M=1'")
    return ks, ms


def _config_echo(config: GaConfig, fleet: FleetConfig, instance_name: str, extra=None) -> dict:
    echo = {
        "instance": instance_name,
        "trucks": fleet.trucks,
        "drones": fleet.drones,
        "delta": fleet.delta,
        "tau_h": fleet.tau,
    }
    echo.update({name: getattr(config, name) for name in GaConfig.field_names()})
    if extra:
        echo.update(extra)
    return echo


def _write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_generate(args) -> int:
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for i in range(1, args.count + 1):
        inst = generate_instance(
            args.nodes,
            args.edges,
            args.required,
            grid_size=args.grid_size,
            seed=args.seed * 100003 + i,
        )
        name = f"N{args.nodes}E{args.edges}R{args.required}_s{args.seed}_{i}.rpp"
        path = os.path.join(out_dir, name)
        save_instance(inst, path)
        written.append(path)
    for path in written:
        print(path)
    return 0


def _make_fleet(args, instance: Instance) -> FleetConfig:
    if args.beta is not None and args.tau is not None:
        raise CliError("--tau and --beta are mutually exclusive")
    if args.beta is not None:
        tau = tau_from_beta(instance, args.beta)
    elif args.tau is not None:
        tau = args.tau
    else:
        tau = instance.tau
    return FleetConfig(trucks=args.trucks, drones=args.drones, delta=args.delta, tau=tau)


def cmd_solve(args) -> int:
    instance = load_instance(args.instance)
    fleet = _make_fleet(args, instance)
    config = _resolve_config(args, args.seed)
    started = time.perf_counter()
    result = solve(instance, fleet, config)
    elapsed = time.perf_counter() - started

    stem = os.path.splitext(os.path.basename(args.instance))[0]
    prefix = os.path.join(args.out, f"{stem}_K{fleet.trucks}M{fleet.drones}_s{args.seed}")
    os.makedirs(args.out, exist_ok=True)

    ev = result.best.evaluation
    echo = _config_echo(config, fleet, instance.name)
    summary = {
        "config": echo,
        "makespan_min": ev.makespan * 60.0,
        "makespan_h": ev.makespan,
        "feasible": result.feasible,
        "violation_h": ev.violation,
        "generations": config.generations,
    }
    _write_json(prefix + "_summary.json", summary)
    plan_doc = {
        "config": echo,
        "makespan_min": ev.makespan * 60.0,
        "feasible": result.feasible,
        "violation_h": ev.violation,
        "plan": result.best.plan.to_dict(),
    }
    _write_json(prefix + "_plan.json", plan_doc)
    result.trace.write_csv(prefix + "_trace.csv")
    result.trace.write_timing_csv(prefix + "_timing.csv")

    print(
        f"{instance.name}: makespan {ev.makespan * 60.0:.2f} min, "
        f"feasible={result.feasible}, violation {ev.violation:.4f} h, "
        f"wall clock {elapsed:.1f} s -> {prefix}_*"
    )
    return 0


def _benchmark_cell(cell):
    path, trucks, drones, tau, delta, seed, overrides, units = cell
    instance = load_instance(path)
    fleet = FleetConfig(
        trucks=trucks,
        drones=drones,
        delta=delta,
        tau=instance.tau if tau is None else tau,
    )
    config = GaConfig(**overrides).replace(seed=seed)
    started = time.perf_counter()
    result = solve(instance, fleet, config)
    elapsed_min = (time.perf_counter() - started) / 60.0
    ev = result.best.evaluation
    objective = ev.makespan * 60.0 if units == "minutes" else ev.makespan
    return {
        "instance": os.path.basename(path),
        "trucks": trucks,
        "drones": drones,
        "tau_h": fleet.tau,
        "delta": "inf" if delta is None else delta,
        "seed": seed,
        "objective": objective,
        "feasible": int(result.feasible),
        "violation_h": ev.violation,
        "wall_clock_min": elapsed_min,
    }


def cmd_benchmark(args) -> int:
    files = sorted(glob.glob(args.instances))
    if not files:
        raise CliError(f"no instance files match '{args.instances}'")
    ks, ms = _parse_grid(args.grid)
    taus = [float(t) for t in args.tau_list.split(",")] if args.tau_list else [None]
    seeds = _parse_seeds(args.seeds)
    overrides = _coerce_config(_parse_key_value(args.param or []))
    merged = {name: getattr(GaConfig(), name) for name in GaConfig.field_names()}
    merged.update(overrides)

    cells = [
        (path, k, m, tau, args.delta, seed, merged, args.units)
        for path in files
        for k in ks
        for m in ms
        for tau in taus
        for seed in seeds
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_benchmark_cell, cells))
    else:
        rows = [_benchmark_cell(cell) for cell in cells]

    rows.sort(key=lambda r: (r["instance"], r["trucks"], r["drones"], r["tau_h"], r["seed"]))

    objective_col = "objective_min" if args.units == "minutes" else "objective_h"
    fieldnames = ["instance", "trucks", "drones", "tau_h", "delta", "seed",
                  objective_col, "feasible", "violation_h"]
    out_path = args.out
    os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fieldnames)
        groups: dict[tuple, list[dict]] = {}
        for r in rows:
            writer.writerow([
                r["instance"], r["trucks"], r["drones"], repr(r["tau_h"]), r["delta"],
                r["seed"], repr(r["objective"]), r["feasible"], repr(r["violation_h"]),
            ])
            groups.setdefault(
                (r["instance"], r["trucks"], r["drones"], r["tau_h"], r["delta"]), []
            ).append(r)
        for key in sorted(groups):
            bucket = groups[key]
            mean_obj = sum(r["objective"] for r in bucket) / len(bucket)
            mean_vio = sum(r["violation_h"] for r in bucket) / len(bucket)
            all_feas = int(all(r["feasible"] for r in bucket))
            writer.writerow([
                key[0], key[1], key[2], repr(key[3]), key[4],
                "mean", repr(mean_obj), all_feas, repr(mean_vio),
            ])

    config_echo = dict(merged)
    config_echo.update({
        "instances": args.instances,
        "grid": args.grid,
        "tau_list": args.tau_list,
        "delta": args.delta,
        "seeds": args.seeds,
        "units": args.units,
    })
    _write_json(os.path.splitext(out_path)[0] + "_config.json", config_echo)

    timing_path = os.path.splitext(out_path)[0] + "_timing.csv"
    with open(timing_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["instance", "trucks", "drones", "tau_h", "delta", "seed",
                         "wall_clock_min"])
        for r in rows:
            writer.writerow([
                r["instance"], r["trucks"], r["drones"], repr(r["tau_h"]), r["delta"],
                r["seed"], repr(r["wall_clock_min"]),
            ])
    print(f"{len(rows)} runs -> {out_path} (timing sidecar: {timing_path})")
    return 0


def cmd_trace_plot_data(args) -> int:
    trace = RunTrace.read_csv(args.trace)
    if not trace.rows:
        raise CliError(f"{args.trace}: trace has no rows")
    out = sys.stdout if args.out is None else open(args.out, "w", encoding="utf-8", newline="\n")
    try:
        out.write("generation,best_makespan_min\n")
        for row in trace.rows:
            if math.isnan(row.best_feasible_makespan):
                continue
            out.write(f"{row.generation},{row.best_feasible_makespan * 60.0!r}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_oracle(args) -> int:
    instance = load_instance(args.instance)
    fleet = _make_fleet(args, instance)
    result = exhaustive_solve(instance, fleet)
    print(
        f"{instance.name}: optimum {result.makespan * 60.0:.4f} min, "
        f"feasible={result.feasible}, violation {result.violation:.6f} h, "
        f"{result.n_plans} plans enumerated"
    )
    if args.out:
        _write_json(args.out, {
            "makespan_min": result.makespan * 60.0,
            "makespan_h": result.makespan,
            "feasible": result.feasible,
            "violation_h": result.violation,
            "service_seq": result.chromosome.service_seq,
            "assignment": result.chromosome.assignment,
            "plan": result.plan.to_dict(),
        })
    return 0


def _add_fleet_flags(parser) -> None:
    parser.add_argument("--trucks", type=int, default=1, help="number of trucks (K)")
    parser.add_argument("--drones", type=int, default=1, help="drones per truck (M)")
    parser.add_argument("--tau", type=float, default=None,
                        help="drone endurance in hours (default: instance value)")
    parser.add_argument("--beta", type=float, default=None,
                        help="derive tau from the mean flight-graph edge length")
    parser.add_argument("--delta", type=int, default=None,
                        help="hop window; omit for unbounded")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rppmtd",
        description="Truck-and-drone arc routing: generate instances, solve, benchmark.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate random instances")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--edges", type=int, required=True)
    p.add_argument("--required", type=int, required=True)
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--grid-size", type=float, default=DEFAULT_GRID_KM)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="run the hybrid genetic solver on one instance")
    p.add_argument("--instance", required=True)
    _add_fleet_flags(p)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--config", default=None, help="JSON file of solver settings")
    p.add_argument("--param", action="append", default=[],
                   help="override one solver setting, e.g. --param generations=50")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("benchmark", help="cross-product sweep over instances and fleets")
    p.add_argument("--instances", required=True, help="glob of instance files")
    p.add_argument("--grid", default="K=1;M=1", help="e.g. 'K=1,2,3;M=1,2,3'")
    p.add_argument("--tau-list", default=None, help="comma list of tau hours")
    p.add_argument("--delta", type=int, default=None)
    p.add_argument("--seeds", default="1..5", help="'1..5' or '1,2,3'")
    p.add_argument("--units", choices=("minutes", "raw"), default="minutes")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--param", action="append", default=[])
    p.add_argument("--out", default="benchmark.csv")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("trace-plot-data", help="emit (generation, best makespan) pairs")
    p.add_argument("--trace", required=True, help="RunTrace CSV from solve")
    p.add_argument("--out", default=None, help="output CSV (default stdout)")
    p.set_defaults(func=cmd_trace_plot_data)

    p = sub.add_parser("oracle")  # exhaustive check for desk-scale instances
    p.add_argument("--instance", required=True)
    _add_fleet_flags(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, InstanceError, OracleSizeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
