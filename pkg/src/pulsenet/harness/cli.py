"""Command-line front end: ``pulsenet {gen,run,explore,sweep,check}``.

Every subcommand accepts ``--config FILE``, a JSON object whose keys mirror
the long flags (``n_bound`` or ``n-bound``); flags given on the command line
win.  The exit code is 0 iff the verdict is ok.  Files written are JSON line
records ending in one ``{"kind": "summary", ...}`` record.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..sim import (
    DELIVERY,
    SimulationError,
    TwoEdgeConnected,
    init_network,
    protocol_from_name,
    read_trace,
    run,
    write_trace,
)
from ..topology import TopologyError, load_topology, save_topology
from ..verify import StepMonitor, build_oracles, check_event_order, check_terminal
from .explore import DEFAULT_STATE_CAP, explore_all
from .schedulers import ScheduleInfeasible, Scripted, make_scheduler
from .sweep import build_instance, build_topology, parse_seed_range, seed_sweep

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _write_records(path: str | None, records: list[dict], summary: dict) -> None:
    lines = [json.dumps(r) for r in records] + [json.dumps({"kind": "summary", **summary})]
    if path:
        Path(path).write_text("\n".join(lines) + "\n")


def _print(summary: dict) -> None:
    print(json.dumps({"kind": "summary", **summary}, default=str))


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _parse_edges(text) -> list[tuple[int, int]]:
    """``"0:1,2:0"`` or a JSON-style list of pairs -> directed edges."""
    if text is None:
        return []
    if isinstance(text, list):
        return [tuple(e) for e in text]
    out = []
    for part in str(text).split(","):
        if part.strip():
            v, i = part.split(":")
            out.append((int(v), int(i)))
    return out


def _protocol(args, topo):
    name = args.protocol or ("ring" if topo.is_ring() and topo.port_base() == 0 else "2ec")
    return protocol_from_name(name, args.n_bound if args.n_bound is not None else topo.n)


def _verdict_summary(verdict, monitor_violations=()) -> dict:
    return {
        "ok": verdict.ok and not monitor_violations,
        "leader": verdict.leader,
        "quiescent": verdict.quiescent,
        "leader_last": verdict.leader_last,
        "total_messages": verdict.total_messages,
        "reason": verdict.reason,
        "violations": [str(v) for v in verdict.violations] + [str(v) for v in monitor_violations],
    }


# -- subcommands ----------------------------------------------------------


def cmd_gen(args) -> int:
    _need(args, "kind", "n", "out")
    spec = {"kind": args.kind, "n": args.n, "flip_mask": args.flip_mask, "extra_edges": args.extra_edges,
            "seed": args.seed, "max_id": args.max_id, "chords": [tuple(c) for c in _parse_edges(args.chords)]}
    if args.ids:
        spec["node_ids"] = [int(x) for x in str(args.ids).split(",")]
    topo = build_topology(spec)
    save_topology(topo, args.out)
    _print({"ok": True, "topology": args.out, "n": topo.n, "m": topo.m, "node_ids": list(topo.node_ids)})
    return EXIT_OK


def cmd_run(args) -> int:
    _need(args, "topology")
    topo = load_topology(args.topology)
    proto = _protocol(args, topo)
    script = []
    if args.scheduler == "script":
        _need(args, "script")
        script = json.loads(Path(args.script).read_text())
    sched = make_scheduler(args.scheduler, args.seed, _parse_edges(args.starve), script)
    state = init_network(topo, proto, record_trace=args.trace is not None)
    mon = None
    if args.monitor == "all":
        mon = StepMonitor(state)
    elif args.monitor == "sampled":
        mon = StepMonitor(state, sample_every=args.sample_every)
    result = run(state, sched, max_steps=args.max_steps, observer=mon)
    verdict = check_terminal(result)
    mviol = mon.violations if mon else []
    order = []
    if isinstance(proto, TwoEdgeConnected) and state.trace is not None and verdict.reason is None:
        order = check_event_order(state.trace, build_oracles(topo).dfs)
    summary = {"command": "run", **proto.params(), "scheduler": args.scheduler, "seed": args.seed,
               "outcome": result.outcome.value, "steps": state.step_count,
               **_verdict_summary(verdict, list(mviol) + order)}
    if args.trace:
        write_trace(state.trace, args.trace, summary)
    _print(summary)
    return EXIT_OK if summary["ok"] else EXIT_FAIL


def cmd_explore(args) -> int:
    _need(args, "topology")
    topo = load_topology(args.topology)
    proto = _protocol(args, topo)
    report = explore_all(init_network(topo, proto, record_trace=False), args.state_cap)
    summary = {"command": "explore", **proto.params(), **report.to_dict()}
    records = [{"kind": "violation", "event_name": v.rule, "step": v.step, "node": v.node, "detail": str(v)}
               for v in report.violation_examples]
    _write_records(args.report, records, summary)
    _print(summary)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_sweep(args) -> int:
    _need(args, "spec", "seeds")
    data = json.loads(Path(args.spec).read_text())
    instances = data["instances"] if isinstance(data, dict) and "instances" in data else (
        data if isinstance(data, list) else [data])
    seeds = parse_seed_range(str(args.seeds))
    records = []
    ok = True
    for k, inst in enumerate(instances):
        topo, proto = build_instance(inst)
        table = seed_sweep(topo, proto, seeds, inst.get("scheduler", args.scheduler),
                           monitors=args.monitor != "off")
        for r in table.rows:
            records.append({"kind": "seed", "instance": k, "seed": r.seed, "ok": r.ok, "outcome": r.outcome,
                            "steps": r.steps, "total_messages": r.total_messages, "leader": r.leader,
                            "monitor_violations": r.monitor_violations})
        records.append({"kind": "instance", "instance": k, **proto.params(), **table.summary()})
        ok = ok and table.all_ok
    summary = {"command": "sweep", "ok": ok, "instances": len(instances), "seeds": [seeds.start, seeds.stop - 1],
               "runs": sum(1 for r in records if r["kind"] == "seed"),
               "failed": sum(1 for r in records if r["kind"] == "seed" and not r["ok"])}
    _write_records(args.out, records, summary)
    for r in records:
        if r["kind"] == "instance":
            print(json.dumps(r))
    _print(summary)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_check(args) -> int:
    _need(args, "trace", "topology")
    topo = load_topology(args.topology)
    events, recorded = read_trace(args.trace)
    recorded = recorded or {}
    if args.protocol is None and "protocol" in recorded:
        args.protocol = recorded["protocol"]
    if args.n_bound is None and "n_bound" in recorded:
        args.n_bound = recorded["n_bound"]
    proto = _protocol(args, topo)
    # deliveries are logged at the receiving end; the scheduler names the sender's edge
    script = [topo.peer(ev.node, ev.port) for ev in events if ev.kind == DELIVERY]
    state = init_network(topo, proto)
    mon = StepMonitor(state)
    sched = Scripted(script)
    try:
        result = run(state, sched, max_steps=max(len(script), 1), observer=mon)
    except ScheduleInfeasible as exc:
        _print({"command": "check", "ok": False, "reason": f"trace is not a valid schedule: {exc}"})
        return EXIT_FAIL
    verdict = check_terminal(result)
    faithful = list(state.trace) == list(events)
    order = []
    if isinstance(proto, TwoEdgeConnected) and verdict.reason is None:
        order = check_event_order(state.trace, build_oracles(topo).dfs)
    summary = {"command": "check", **proto.params(), "deliveries": len(script),
               "outcome": result.outcome.value, "trace_reproduced": faithful,
               **_verdict_summary(verdict, list(mon.violations) + order)}
    summary["ok"] = summary["ok"] and faithful
    _print(summary)
    return EXIT_OK if summary["ok"] else EXIT_FAIL


# -- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pulsenet", description="Content-oblivious leader election simulator")
    sub = p.add_subparsers(dest="command")

    def common(sp):
        sp.add_argument("--config", help="JSON file whose keys mirror the flags")
        return sp

    g = common(sub.add_parser("gen", help="write a topology file"))
    g.add_argument("--kind", choices=["ring", "complete", "cycle_chords", "random_2ec"])
    g.add_argument("--n", type=int)
    g.add_argument("--ids", help="comma-separated node IDs")
    g.add_argument("--flip-mask", type=int, default=0)
    g.add_argument("--extra-edges", type=int, default=0)
    g.add_argument("--chords", help="chords as u:w,u:w")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--max-id", type=int)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    def proto_flags(sp):
        sp.add_argument("--topology")
        sp.add_argument("--protocol", choices=["2ec", "ring"])
        sp.add_argument("--n-bound", type=int)

    r = common(sub.add_parser("run", help="simulate one schedule"))
    proto_flags(r)
    r.add_argument("--scheduler", choices=["random", "starve", "script"], default="random")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--starve", help="starved directed edges as v:i,v:i")
    r.add_argument("--script", help="JSON list of [v, i] directed edges")
    r.add_argument("--trace")
    r.add_argument("--monitor", choices=["all", "sampled", "off"], default="all")
    r.add_argument("--sample-every", type=int, default=50)
    r.add_argument("--max-steps", type=int)
    r.set_defaults(func=cmd_run)

    e = common(sub.add_parser("explore", help="exhaustively explore all schedules"))
    proto_flags(e)
    e.add_argument("--state-cap", type=int, default=DEFAULT_STATE_CAP)
    e.add_argument("--report")
    e.set_defaults(func=cmd_explore)

    s = common(sub.add_parser("sweep", help="seed sweep over instance specs"))
    s.add_argument("--spec")
    s.add_argument("--seeds")
    s.add_argument("--scheduler", choices=["random", "starve"], default="random")
    s.add_argument("--monitor", choices=["all", "off"], default="all")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    c = common(sub.add_parser("check", help="replay and verify a recorded trace"))
    proto_flags(c)
    c.add_argument("--trace")
    c.set_defaults(func=cmd_check)
    return p


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        cfg = json.loads(Path(args.config).read_text())
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        defaults = vars(parser.parse_args([args.command]))
        for key, value in cfg.items():
            dest = key.replace("-", "_")
            if dest not in defaults or dest in ("command", "func", "config"):
                raise UsageError(f"unknown config key {key!r} for {args.command}")
            # command-line flags override the file
            if getattr(args, dest) == defaults[dest]:
                setattr(args, dest, value)
    return args


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _apply_config(parser, argv)
        if args.command is None:
            parser.print_help()
            return EXIT_USAGE
        return args.func(args)
    except UsageError as exc:
        print(f"pulsenet: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SimulationError, TopologyError, OSError, ValueError, KeyError) as exc:
        print(f"pulsenet: error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
