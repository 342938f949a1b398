"""Command-line entry point.

Commands: `check` (safety verdict), `synth` (priority synthesis, optionally
through alphabet abstraction with --keep), `agsynth` (compositional
behavioral-safety synthesis), `generate` (benchmark and fixture models).
Exit codes: 0 safe/success, 1 unsafe/failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field

from .bdd import BddError
from .model import ModelError, parse_system, system_to_text
from .monitor import parse_dfa
from . import abstraction, aglearn, encoder, explicit, game, generators, resolver


@dataclass
class RunReport:
    command: str
    outcome: str
    priorities: list = field(default_factory=list)
    statistics: dict = field(default_factory=dict)
    trace: list = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"command": self.command, "outcome": self.outcome,
             "priorities": [list(p) for p in self.priorities],
             "statistics": self.statistics}
        if self.trace is not None:
            d["trace"] = list(self.trace)
        d.update(self.details)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = [f"{self.command}: {self.outcome}"]
        for low, high in self.priorities:
            lines.append(f"priority {low} < {high};")
        if self.trace is not None:
            lines.append("trace: " + (" ".join(self.trace) or "(empty)"))
        for k, v in self.details.items():
            lines.append(f"{k}: {v}")
        for k, v in sorted(self.statistics.items()):
            lines.append(f"  {k}: {v}")
        return "\n".join(lines)


def _emit(report: RunReport, args) -> None:
    print(report.to_json() if args.json else report.to_text())


def _load_system(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_system(fh.read())


def _order_stats(s, order) -> dict:
    es = encoder.encode(s, order)
    m = es.manager
    return {"variable_order": " ".join(m.names),
            "initial_nodes": m.node_count(es.p_ini),
            "deadlock_nodes": m.node_count(es.dead_cfg),
            "risk_nodes": m.node_count(es.risk_cfg)}


def cmd_check(args) -> int:
    s = _load_system(args.model)
    t0 = time.monotonic()
    engine = args.engine or "explicit"
    if engine == "explicit":
        v = explicit.verdict(s, args.mode, args.budget)
        trace = v.trace
    else:
        es = encoder.encode(s, args.ordering)
        v = game.symbolic_verdict(es, args.mode)
        trace = v.trace
    stats = {"wall_time_s": round(time.monotonic() - t0, 3), "engine": engine}
    if engine == "symbolic":
        stats["variables"] = es.varmap.total_variables
    if args.stats:
        stats.update(_order_stats(s, args.ordering))
    report = RunReport("check", "safe" if v.safe else f"unsafe ({v.reason})",
                       statistics=stats,
                       trace=None if v.safe else list(trace))
    _emit(report, args)
    return 0 if v.safe else 1


def cmd_synth(args) -> int:
    s = _load_system(args.model)
    t0 = time.monotonic()
    details = {}
    if args.keep:
        keep = [k.strip() for k in args.keep.split(",") if k.strip()]
        res, pairs, a = abstraction.abstract_synthesize(
            s, keep, args.repush_depth, args.ordering)
        details["abstracted_labels"] = len(a.sigma_phi)
        details["eliminated_components"] = ",".join(a.eliminated) or "(none)"
        priorities = pairs or []
        final = s.with_priorities(priorities) if res else s
    else:
        res = resolver.synthesize(s, args.mode, args.repush_depth, args.ordering)
        priorities = res.priorities
        final = s.with_priorities(priorities) if res else s
    stats = dict(res.stats)
    stats["wall_time_s"] = round(time.monotonic() - t0, 3)
    if res.repushed:
        details["repushed"] = "; ".join(f"{l} < {h}" for l, h in res.repushed)
    if res.reason:
        details["reason"] = res.reason
    if args.emit_cnf and res.cnf is not None:
        with open(args.emit_cnf, "w", encoding="utf-8") as fh:
            fh.write(res.cnf.to_dimacs())
    if res and (args.engine or "explicit") == "explicit":
        mode = "deadlock" if args.keep else args.mode
        try:
            details["verified"] = bool(explicit.verdict(final, mode, args.budget))
        except explicit.BudgetExceeded:
            details["verified"] = "skipped (budget)"
    if args.stats:
        stats.update(_order_stats(final, args.ordering))
    report = RunReport("synth", res.status, priorities=list(priorities),
                       statistics=stats, details=details)
    _emit(report, args)
    return 0 if res else 1


def cmd_agsynth(args) -> int:
    if args.mode == "deadlock":
        raise ModelError("agsynth handles behavioral safety only; the "
                         "assume-guarantee rule is unsound for deadlock "
                         "freedom")
    s = _load_system(args.model)
    with open(args.spec, "r", encoding="utf-8") as fh:
        spec = parse_dfa(fh.read())
    split = [c.strip() for c in args.split.split(",") if c.strip()]
    t0 = time.monotonic()
    problem = aglearn.AGProblem(s, tuple(split), spec)
    result = aglearn.ag_synthesize(problem, args.max_conjectures, args.ordering)
    stats = {"wall_time_s": round(time.monotonic() - t0, 3),
             "conjecture_sizes": result.conjecture_sizes}
    details = {}
    if result.p1:
        details["p1"] = "; ".join(f"{l} < {h}" for l, h in result.p1)
    if result.p2:
        details["p2"] = "; ".join(f"{l} < {h}" for l, h in result.p2)
    if result.reason:
        details["reason"] = result.reason
    report = RunReport("agsynth", result.status,
                       priorities=list(result.p1) + list(result.p2),
                       statistics=stats, details=details)
    _emit(report, args)
    return 0 if result else 1


_FIXTURES = {
    "dpu": generators.data_processing_unit,
    "attractor": generators.attractor_example,
    "repush": generators.repush_example,
    "abstraction": generators.abstraction_example,
    "shared": generators.shared_interaction_example,
}


def cmd_generate(args) -> int:
    if args.family == "philosophers":
        if args.n is None or args.n < 2:
            raise ModelError("philosophers needs --n of at least 2")
        s = generators.philosophers(args.n)
    else:
        s = _FIXTURES[args.family]()
    sys.stdout.write(system_to_text(s))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="prisyn",
        description="Priority synthesis for component-based systems")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--engine", choices=("explicit", "symbolic"),
                       help="verdict engine (default: explicit)")
        p.add_argument("--mode", choices=("deadlock", "risk", "both"),
                       default="both", help="which bad states count")
        p.add_argument("--ordering", choices=("decl", "force"), default="decl",
                       help="component variable ordering")
        p.add_argument("--repush-depth", type=int, default=2,
                       help="conflict repush rounds")
        p.add_argument("--budget", type=int, default=explicit.DEFAULT_BUDGET,
                       help="explicit-state budget")
        p.add_argument("--stats", action="store_true",
                       help="report variable order and diagram sizes")
        p.add_argument("--json", action="store_true",
                       help="machine-readable report")
        p.add_argument("--emit-cnf", metavar="PATH",
                       help="write the last SAT instance in DIMACS form")

    p = sub.add_parser("check", help="decide deadlock/risk safety")
    p.add_argument("model")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("synth", help="synthesize priorities")
    p.add_argument("model")
    p.add_argument("--keep", metavar="LIST",
                   help="comma-separated components kept concrete; the rest "
                        "of the alphabet is abstracted")
    common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("agsynth", help="compositional behavioral-safety "
                                       "synthesis")
    p.add_argument("model")
    p.add_argument("--split", required=True, metavar="LIST",
                   help="comma-separated components forming side 1")
    p.add_argument("--spec", required=True, metavar="DFA",
                   help="risk DFA file")
    p.add_argument("--max-conjectures", type=int, default=50)
    common(p)
    p.set_defaults(func=cmd_agsynth)

    p = sub.add_parser("generate", help="emit a benchmark or fixture model")
    p.add_argument("family", choices=("philosophers",) + tuple(_FIXTURES))
    p.add_argument("--n", type=int, help="philosophers ring size")
    p.set_defaults(func=cmd_generate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ModelError, BddError, explicit.BudgetExceeded, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
