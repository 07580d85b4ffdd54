"""Experiment runner: ``gossipbench stats | run | sweep``.

Configuration is a flat ``key = value`` file; every key can be overridden by
a same-named flag (``fanout_abs`` -> ``--fanout-abs``).
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import random
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Callable, Sequence

from .engine import ClockConfig, RunMode, SimConfig, run_simulation
from .graphio import (
    EdgeListError,
    Graph,
    GraphKind,
    Group,
    GroupAssignment,
    SignPolicy,
    classify_groups,
    generate_pa,
    graph_stats,
    largest_connected_component,
    read_edge_list,
)
from .metrics import FractionNotReached, mean_std, network_load, time_to_fraction
from .netmodel import LinkConfig, assign_links
from .policies import Policy
from .protocol import FanoutConfig, FanoutMode
from .stopping import Criterion, StoppingConfig

DATA_ENV = "GOSSIPBENCH_DATA"

CSV_HEADER = [
    "run", "seed", "dataset", "policy", "memory", "stopping", "fanout_mode",
    "fanout_value", "originator", "target_pct", "time_s", "messages", "load_mps", "final_pct",
]
SUMMARY_HEADER = [
    "summary_target_pct", "runs", "reached", "reach_rate", "mean_time_s", "std_time_s",
    "mean_messages", "mean_load_mps", "std_load_mps", "mean_final_pct",
]
SWEEP_AXES = ("policy", "memory", "stopping", "f_abs", "f_rel", "originator")

MASK64 = (1 << 64) - 1


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(base_seed: int, run: int) -> int:
    """Seed of replication ``run``; distinct runs get distinct seeds."""
    # splitmix64 is a bijection, so distinct inputs never collide
    return splitmix64((base_seed * 0x9E3779B97F4A7C15 + run) & MASK64)


def _fraction(text: str) -> float:
    text = text.strip()
    if text.endswith("%"):
        return float(text[:-1]) / 100.0
    return float(text)


def _targets(text: str) -> tuple[float, ...]:
    values = tuple(_fraction(tok) for tok in text.split(",") if tok.strip())
    if not values or any(not 0 < v <= 1 for v in values):
        raise ValueError("targets must lie in (0, 1]")
    if list(values) != sorted(values):
        raise ValueError("targets must be sorted ascending")
    return values


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise ValueError("must be >= 1")
    return value


def _optional_int(text: str) -> int | None:
    return None if text.strip().lower() in ("", "auto", "none") else int(text)


def _choice(*allowed: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        text = text.strip().lower()
        if text not in allowed:
            raise ValueError(f"expected one of {', '.join(allowed)}")
        return text

    return parse


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str = ""
    kind: str = "undirected"
    sign_policy: str = "keep_positive_only"
    component: str = "weak"
    preset: str = "none"
    policy: str = "random"
    memory: int = 0
    stopping: str = "none"
    log_base: float = 10.0
    c_lnln: float = 4.0
    c_log: float = 1.0
    c_logsq: float = 1.0
    c_nlogn: float = 1.0
    mc_ctr_max: int | None = None
    mc_c_phase: int | None = None
    mc_safety: int = 4
    fanout_mode: str = "absolute"
    fanout_abs: int = 1
    fanout_rel: float = 0.04
    hybrid_middle_abs: int = 2
    group_percentile: float = 0.90
    clock_mean: float = 1.0
    originator: str = "max_degree"
    reps: int = 50
    seed: int = 0
    run_mode: str = "auto"
    max_sim_time: float = 1e5
    removed_replies: str = "empty"
    targets: tuple[float, ...] = (0.5, 0.9, 0.97, 0.99, 1.0)
    lat_min_ms: float = 10.0
    lat_max_ms: float = 100.0
    bw_min_mbps: float = 3.0
    bw_max_mbps: float = 50.0
    out: str = "-"
    trace: str = ""
    workers: int = 1

    def resolved_fanout_mode(self, kind: GraphKind) -> FanoutMode:
        if self.fanout_mode == "auto":
            return FanoutMode.HYBRID if kind is GraphKind.UNDIRECTED else FanoutMode.RELATIVE
        return FanoutMode(self.fanout_mode)


PARSERS: dict[str, Callable[[str], Any]] = {
    "dataset": str.strip,
    "kind": _choice(*(k.value for k in GraphKind)),
    "sign_policy": _choice(*(p.value for p in SignPolicy)),
    "component": _choice("weak", "strong"),
    "preset": _choice("none", "enhanced"),
    "policy": _choice(*(p.value for p in Policy)),
    "memory": int,
    "stopping": _choice(*(c.value for c in Criterion)),
    "log_base": float,
    "c_lnln": float,
    "c_log": float,
    "c_logsq": float,
    "c_nlogn": float,
    "mc_ctr_max": _optional_int,
    "mc_c_phase": _optional_int,
    "mc_safety": _positive_int,
    "fanout_mode": _choice("absolute", "relative", "hybrid", "auto"),
    "fanout_abs": _positive_int,
    "fanout_rel": _fraction,
    "hybrid_middle_abs": _positive_int,
    "group_percentile": float,
    "clock_mean": float,
    "originator": str.strip,
    "reps": _positive_int,
    "seed": int,
    "run_mode": _choice("auto", *(m.value for m in RunMode)),
    "max_sim_time": float,
    "removed_replies": _choice("empty", "rumour"),
    "targets": _targets,
    "lat_min_ms": float,
    "lat_max_ms": float,
    "bw_min_mbps": float,
    "bw_max_mbps": float,
    "out": str.strip,
    "trace": str.strip,
    "workers": _positive_int,
}
assert set(PARSERS) == {f.name for f in fields(ExperimentConfig)}

ENHANCED_PRESET = {
    "policy": "qpu",
    "stopping": "log2n",
    "fanout_mode": "auto",
    "fanout_rel": "0.04",
    "hybrid_middle_abs": "2",
}


def read_config_file(path: str | os.PathLike) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for number, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {number}", "expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key] = value
    return values


def build_config(raw: dict[str, str]) -> ExperimentConfig:
    """Validate string settings; unknown keys are errors."""
    for key in raw:
        if key not in PARSERS:
            raise ConfigError(key, "unknown configuration key")
    merged: dict[str, str] = {}
    preset = raw.get("preset", "none").strip().lower()
    if preset == "enhanced":
        merged.update(ENHANCED_PRESET)
    merged.update(raw)
    values: dict[str, Any] = {}
    for key, text in merged.items():
        try:
            values[key] = PARSERS[key](text)
        except ValueError as exc:
            raise ConfigError(key, f"invalid value {text!r} ({exc})") from None
    cfg = ExperimentConfig(**values)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.memory < 0:
        raise ConfigError("memory", "must be >= 0")
    if cfg.memory > 0 and cfg.policy != "random":
        raise ConfigError("memory", "neighbor memory applies to the random policy only")
    if cfg.log_base <= 1:
        raise ConfigError("log_base", "must exceed 1")
    if not 0 < cfg.group_percentile < 1:
        raise ConfigError("group_percentile", "must lie in (0, 1)")
    if cfg.clock_mean <= 0:
        raise ConfigError("clock_mean", "must be positive")
    if cfg.max_sim_time <= 0:
        raise ConfigError("max_sim_time", "must be positive")
    try:
        LinkConfig(cfg.lat_min_ms, cfg.lat_max_ms, cfg.bw_min_mbps, cfg.bw_max_mbps)
    except ValueError as exc:
        raise ConfigError("lat_min_ms", str(exc)) from None
    try:
        parse_originator(cfg.originator)
    except ValueError as exc:
        raise ConfigError("originator", str(exc)) from None


_CALL_FORM = re.compile(r"^(node_id|group_sample)\((.*)\)$")


def parse_originator(text: str) -> tuple[str, Any]:
    """``max_degree`` | ``node:K`` | ``group:G1:0.1``

    The call forms ``node_id(K)`` and ``group_sample(G1, 10%)`` are accepted too.
    """
    text = text.strip()
    call = _CALL_FORM.match(text.replace(" ", ""))
    if call:
        scheme = "node" if call.group(1) == "node_id" else "group"
        text = ":".join([scheme, *call.group(2).split(",")])
    parts = text.split(":")
    if parts == ["max_degree"]:
        return ("max_degree", None)
    if parts[0] == "node" and len(parts) == 2:
        return ("node", int(parts[1]))
    if parts[0] == "group" and len(parts) in (2, 3):
        group = Group(parts[1].upper())
        fraction = _fraction(parts[2]) if len(parts) == 3 else 0.1
        if not 0 < fraction <= 1:
            raise ValueError("group sample fraction must lie in (0, 1]")
        return ("group", (group, fraction))
    raise ValueError(f"unknown originator scheme {text!r}")


def resolve_dataset(path: str) -> Path:
    candidate = Path(path)
    if candidate.exists() or candidate.is_absolute():
        return candidate
    data_dir = os.environ.get(DATA_ENV)
    if data_dir and (Path(data_dir) / path).exists():
        return Path(data_dir) / path
    return candidate


def load_graph(cfg: ExperimentConfig) -> tuple[Graph, str]:
    """LCC of the configured dataset and a short dataset name.

    ``pa:N:ATTACH[:SEED]`` generates a preferential-attachment graph.
    """
    source = cfg.dataset
    if not source:
        raise ConfigError("dataset", "no dataset given")
    if source.startswith("pa:"):
        parts = source.split(":")
        try:
            n, attach = int(parts[1]), int(parts[2])
            gen_seed = int(parts[3]) if len(parts) > 3 else 0
            g = generate_pa(n, attach, random.Random(gen_seed))
        except (IndexError, ValueError) as exc:
            raise ConfigError("dataset", f"bad generator source {source!r} ({exc})") from None
        return g, source
    path = resolve_dataset(source)
    g = read_edge_list(path, cfg.kind, cfg.sign_policy)
    return largest_connected_component(g, cfg.component), path.name


@dataclass
class RunJob:
    run: int
    seed: int


@dataclass
class RunResult:
    run: int
    seed: int
    originator: int
    final_pct: float
    times: list[float | None]
    messages: list[int]
    loads: list[float | None]
    trace: str = ""


@dataclass
class _Setup:
    cfg: ExperimentConfig
    graph: Graph
    groups: GroupAssignment
    sim: SimConfig
    link_cfg: LinkConfig
    origin_pool: list[int] | None = None
    fixed_origin: int | None = None


def _prepare(cfg: ExperimentConfig, graph: Graph) -> _Setup:
    groups = classify_groups(graph, cfg.group_percentile)
    stopping = StoppingConfig(
        criterion=Criterion(cfg.stopping),
        log_base=cfg.log_base,
        c_lnln=cfg.c_lnln,
        c_log=cfg.c_log,
        c_logsq=cfg.c_logsq,
        c_nlogn=cfg.c_nlogn,
        mc_ctr_max=cfg.mc_ctr_max,
        mc_c_phase=cfg.mc_c_phase,
        mc_safety=cfg.mc_safety,
    )
    fanout = FanoutConfig(
        mode=cfg.resolved_fanout_mode(graph.kind),
        f_abs=cfg.fanout_abs,
        f_rel=cfg.fanout_rel,
        hybrid_middle_abs=cfg.hybrid_middle_abs,
    )
    sim = SimConfig(
        policy=Policy(cfg.policy),
        memory=cfg.memory,
        stopping=stopping,
        fanout=fanout,
        clock=ClockConfig(cfg.clock_mean),
        run_mode=None if cfg.run_mode == "auto" else RunMode(cfg.run_mode),
        max_sim_time=cfg.max_sim_time,
        removed_replies=cfg.removed_replies,
    )
    setup = _Setup(cfg, graph, groups, sim, LinkConfig(cfg.lat_min_ms, cfg.lat_max_ms, cfg.bw_min_mbps, cfg.bw_max_mbps))
    scheme, arg = parse_originator(cfg.originator)
    if scheme == "max_degree":
        setup.fixed_origin = graph.max_degree_node()
    elif scheme == "node":
        try:
            setup.fixed_origin = graph.node_labels.index(arg)
        except ValueError:
            raise ConfigError("originator", f"node {arg} is not in the largest component") from None
    else:
        group, fraction = arg
        members = groups.members(group)
        if not members:
            raise ConfigError("originator", f"group {group.value} is empty")
        size = max(1, round(fraction * len(members)))
        # the sampled source set is shared by all replications
        pool_rng = random.Random(splitmix64(cfg.seed ^ 0x5EED))
        setup.origin_pool = sorted(pool_rng.sample(members, size))
    return setup


def _execute(setup: _Setup, job: RunJob, want_trace: bool) -> RunResult:
    g = setup.graph
    rng = random.Random(job.seed)
    links = assign_links(g.node_count, rng, setup.link_cfg)
    if setup.origin_pool is not None:
        originator = setup.origin_pool[rng.randrange(len(setup.origin_pool))]
    else:
        originator = setup.fixed_origin
    sim = replace(setup.sim, originator=originator)
    buffer = io.StringIO() if want_trace else None
    outcome = run_simulation(g, links, sim, rng, setup.groups, buffer)
    m = outcome.metrics
    times, messages, loads = [], [], []
    for pct in setup.cfg.targets:
        try:
            t = time_to_fraction(m, pct)
        except FractionNotReached:
            times.append(None)
            messages.append(m.total_sent)
            loads.append(None)
            continue
        times.append(t)
        messages.append(m.total_messages(t))
        loads.append(network_load(m, pct) if t > 0 else None)
    return RunResult(
        run=job.run,
        seed=job.seed,
        originator=originator,
        final_pct=m.final_informed_pct,
        times=times,
        messages=messages,
        loads=loads,
        trace=buffer.getvalue() if buffer is not None else "",
    )


_WORKER_SETUP: _Setup | None = None


def _worker_init(setup: _Setup) -> None:
    global _WORKER_SETUP
    _WORKER_SETUP = setup


def _worker_run(args: tuple[RunJob, bool]) -> RunResult:
    assert _WORKER_SETUP is not None
    return _execute(_WORKER_SETUP, *args)


def run_replications(cfg: ExperimentConfig, graph: Graph) -> list[RunResult]:
    setup = _prepare(cfg, graph)
    jobs = [RunJob(r, derive_seed(cfg.seed, r)) for r in range(cfg.reps)]
    want_trace = bool(cfg.trace)
    if cfg.workers <= 1 or len(jobs) == 1:
        results = [_execute(setup, job, want_trace) for job in jobs]
    else:
        with ProcessPoolExecutor(cfg.workers, initializer=_worker_init, initargs=(setup,)) as pool:
            results = list(pool.map(_worker_run, [(job, want_trace) for job in jobs]))
    results.sort(key=lambda r: r.run)
    return results


def fmt(value: float | int | None) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return f"{value:.6g}"


def result_rows(cfg: ExperimentConfig, graph: Graph, dataset: str, results: Sequence[RunResult]) -> list[list[str]]:
    fanout_mode = cfg.resolved_fanout_mode(graph.kind)
    fanout = FanoutConfig(fanout_mode, cfg.fanout_abs, cfg.fanout_rel, cfg.hybrid_middle_abs)
    rows = []
    for res in results:
        for i, pct in enumerate(cfg.targets):
            rows.append([
                str(res.run), str(res.seed), dataset, cfg.policy, str(cfg.memory), cfg.stopping,
                fanout_mode.value, fanout.describe(), str(graph.node_labels[res.originator]),
                fmt(pct), fmt(res.times[i]), fmt(res.messages[i]), fmt(res.loads[i]), fmt(res.final_pct),
            ])
    return rows


def summary_rows(cfg: ExperimentConfig, results: Sequence[RunResult]) -> list[list[str]]:
    """Mean/stddev per target over the runs that reached it."""
    rows = []
    runs = len(results)
    mean_final, _ = mean_std([r.final_pct for r in results])
    for i, pct in enumerate(cfg.targets):
        reached = [r for r in results if r.times[i] is not None]
        mean_t, std_t = mean_std([r.times[i] for r in reached])
        mean_msg, _ = mean_std([float(r.messages[i]) for r in reached])
        loads = [r.loads[i] for r in reached if r.loads[i] is not None]
        mean_l, std_l = mean_std(loads)
        rows.append([
            fmt(pct), str(runs), str(len(reached)), fmt(len(reached) / runs),
            _fmt_nan(mean_t), _fmt_nan(std_t), _fmt_nan(mean_msg), _fmt_nan(mean_l), _fmt_nan(std_l),
            fmt(mean_final),
        ])
    return rows


def _fmt_nan(x: float) -> str:
    return "" if x != x else fmt(x)


def _open_out(path: str):
    if path in ("", "-"):
        return _NoClose(sys.stdout)
    return open(path, "w", encoding="utf-8", newline="")


class _NoClose:
    def __init__(self, stream):
        self.stream = stream

    def __enter__(self):
        return self.stream

    def __exit__(self, *exc):
        self.stream.flush()


def _write_trace(path: str, results: Sequence[RunResult], label: str = "") -> None:
    with open(path, "a" if label else "w", encoding="utf-8") as fh:
        for res in results:
            fh.write(f"# {label}run {res.run} seed {res.seed}\n")
            fh.write(res.trace)


def cmd_run(cfg: ExperimentConfig) -> list[RunResult]:
    graph, dataset = load_graph(cfg)
    results = run_replications(cfg, graph)
    with _open_out(cfg.out) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(result_rows(cfg, graph, dataset, results))
        fh.write("\n")
        writer.writerow(SUMMARY_HEADER)
        writer.writerows(summary_rows(cfg, results))
    if cfg.trace:
        _write_trace(cfg.trace, results)
    return results


def parse_values(text: str) -> list[str]:
    """Comma list; ``a..b`` expands to an inclusive integer range."""
    values = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if ".." in tok:
            lo, hi = tok.split("..", 1)
            values.extend(str(v) for v in range(int(lo), int(hi) + 1))
        else:
            values.append(tok)
    return values


def sweep_config(base: dict[str, str], axis: str, value: str) -> dict[str, str]:
    raw = dict(base)
    if axis == "f_abs":
        raw.update(fanout_mode="absolute", fanout_abs=value)
    elif axis == "f_rel":
        raw.update(fanout_mode="relative", fanout_rel=value)
    elif axis == "memory":
        raw.update(policy="random", memory=value)
    else:
        raw[axis] = value
    return raw


def cmd_sweep(base: dict[str, str], axis: str, values: Sequence[str]) -> int:
    if axis not in SWEEP_AXES:
        raise ConfigError("axis", f"unknown sweep axis {axis!r}; expected one of {', '.join(SWEEP_AXES)}")
    if not values:
        raise ConfigError("values", "no sweep values given")
    configs = [build_config(sweep_config(base, axis, v)) for v in values]
    first = configs[0]
    graph, dataset = load_graph(first)
    blocks = []
    for value, cfg in zip(values, configs):
        results = run_replications(cfg, graph)
        blocks.append((value, cfg, results))
    with _open_out(first.out) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["axis_value"] + CSV_HEADER)
        for value, cfg, results in blocks:
            for row in result_rows(cfg, graph, dataset, results):
                writer.writerow([value] + row)
        fh.write("\n")
        writer.writerow(["axis_value"] + SUMMARY_HEADER)
        for value, cfg, results in blocks:
            for row in summary_rows(cfg, results):
                writer.writerow([value] + row)
    if first.trace:
        Path(first.trace).write_text("", encoding="utf-8")
        for value, cfg, results in blocks:
            _write_trace(first.trace, results, label=f"{axis}={value} ")
    return len(blocks)


def cmd_stats(path: str, kind: str = "undirected", sign_policy: str = "keep_positive_only",
              component: str = "weak", percentile: float = 0.90) -> list[tuple[str, str]]:
    g = read_edge_list(resolve_dataset(path), kind, sign_policy)
    lcc = largest_connected_component(g, component)
    stats = graph_stats(lcc)
    groups = classify_groups(lcc, percentile)
    sizes = groups.sizes()
    return [
        ("dataset_nodes", str(g.node_count)),
        ("dataset_edges", str(g.edge_count)),
        ("lcc_nodes", str(stats.n)),
        ("lcc_edges", str(stats.e)),
        ("min_degree", str(stats.min_degree)),
        ("max_degree", str(stats.max_degree)),
        ("mean_degree", str(round(stats.mean_degree, 6))),
        ("clustering", str(round(stats.avg_local_clustering, 6))),
        ("group_threshold", str(groups.threshold_degree)),
        ("group_g1", str(sizes[Group.G1_SINGLETON])),
        ("group_g2", str(sizes[Group.G2_MIDDLE])),
        ("group_g3", str(sizes[Group.G3_GIANT])),
    ]


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value configuration file")
    for name in PARSERS:
        parser.add_argument("--" + name.replace("_", "-"), dest=name, default=None, metavar="VALUE")


def _collect(args: argparse.Namespace) -> dict[str, str]:
    raw = read_config_file(args.config) if args.config else {}
    for name in PARSERS:
        value = getattr(args, name, None)
        if value is not None:
            raw[name] = value
    return raw


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gossipbench", description="Asynchronous push & pull rumour spreading simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    stats = sub.add_parser("stats", help="structural statistics of a dataset's largest component")
    stats.add_argument("dataset")
    stats.add_argument("--kind", default="undirected", choices=[k.value for k in GraphKind])
    stats.add_argument("--sign-policy", default="keep_positive_only", choices=[p.value for p in SignPolicy])
    stats.add_argument("--component", default="weak", choices=["weak", "strong"])
    stats.add_argument("--group-percentile", type=float, default=0.90)

    run = sub.add_parser("run", help="run replications of one configuration")
    _add_config_flags(run)

    sweep = sub.add_parser("sweep", help="run one configuration per value of a parameter axis")
    _add_config_flags(sweep)
    sweep.add_argument("--axis", required=True)
    sweep.add_argument("--values", required=True, help="comma list; a..b for integer ranges")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "stats":
            for key, value in cmd_stats(args.dataset, args.kind, args.sign_policy, args.component, args.group_percentile):
                print(f"{key}\t{value}")
        elif args.command == "run":
            cmd_run(build_config(_collect(args)))
        else:
            cmd_sweep(_collect(args), args.axis, parse_values(args.values))
    except ConfigError as exc:
        print(f"gossipbench: configuration error: {exc}", file=sys.stderr)
        return 2
    except (OSError, EdgeListError) as exc:
        print(f"gossipbench: input error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
