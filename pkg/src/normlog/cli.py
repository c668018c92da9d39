"""``normlog`` command line: check formulas, monitor traces, replay scenarios.

Exit codes: 0 true / success, 1 false, 2 parse or validation error.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import deontic
from .evaluator import EvaluationError, Evaluator
from .model import ModelError, load_model_file
from .monitor import Monitor, MonitorError, parse_delta, read_trace
from .norms import NormError, derive_annotations, load_norm_file
from .scenarios import (
    PLAZA_AGENTS, littering_specs, littering_steps, metanorm_cascade_steps, rent_specs,
    rent_steps,
)
from .syntax import (
    And, Forbidden, FormulaError, Freeze, Not, Obliged, Resolved, StateFormula, Viol,
    free_time_variables, parse_raw, render, tt,
)

EXIT_TRUE, EXIT_FALSE, EXIT_ERROR = 0, 1, 2


class UsageError(ValueError):
    pass


# -- check ----------------------------------------------------------------------------

def parse_bindings(items) -> dict:
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep or not name or not value.isdigit():
            raise UsageError(f"bad binding {item!r}; expected var=natural")
        out[name] = int(value)
    return out


def explain(ev: Evaluator, state, node, tau) -> list[str]:
    """Lines naming the first failing conjunct of a false formula."""
    if isinstance(node, And):
        for part in (node.left, node.right):
            if not ev.state(state, part, tau):
                return explain(ev, state, part, tau)
        return []
    if isinstance(node, Freeze):
        return explain(ev, state, node.body, {**tau, node.var: ev.model.depth(state)})
    if isinstance(node, (Viol, Resolved, Forbidden, Obliged)):
        _, clause = deontic.evaluate(ev, state, node, dict(tau))
        return [f"{render(node)}: condition ({clause}) unmet"]
    if isinstance(node, Not) and isinstance(node.body, (Viol, Resolved, Forbidden, Obliged)):
        return [f"{render(node.body)} holds"]
    return [f"{render(node)} is false"]


def cmd_check(args, out) -> int:
    model = load_model_file(args.model)
    node = parse_raw(args.formula)
    if not isinstance(node, StateFormula):
        raise UsageError("formula must be a state formula (wrap path formulas in Apath/Epath)")
    tau = parse_bindings(args.bind)
    missing = sorted(free_time_variables(node) - set(tau))
    if missing:
        raise UsageError(f"unbound time variable(s) {missing}; pass --bind v=n")
    model.check_state(args.state)
    ev = Evaluator(model)
    value = ev.state(args.state, node, tau)
    print("true" if value else "false", file=out)
    if not value:
        for line in explain(ev, args.state, node, tau):
            print(f"  {line}", file=out)
    return EXIT_TRUE if value else EXIT_FALSE


# -- monitor --------------------------------------------------------------------------

def print_ledger(monitor: Monitor, out):
    records = monitor.ledger()
    resolved = sum(r.status != "open" for r in records)
    print(f"ledger: {len(records)} violation(s), {len(records) - resolved} open, "
          f"{resolved} resolved", file=out)
    if records:
        print(f"  {'norm':<6}{'agent':<7}{'kind':<10}{'tBegin':>7}{'tViol':>7}  status", file=out)
    for r in records:
        extra = []
        if r.t_repair is not None:
            extra.append(f"repaired@{r.t_repair}")
        if r.t_punish is not None:
            extra.append(f"punished@{r.t_punish}")
        print(f"  {r.norm:<6}{r.agent:<7}{r.kind:<10}{r.t_begin:>7}{r.t_viol:>7}  {r.status}"
              + (f" ({', '.join(extra)})" if extra else ""), file=out)


def cmd_monitor(args, out) -> int:
    doc = load_norm_file(args.norms)
    with open(args.trace, encoding="utf-8") as fh:
        trace = read_trace(fh)
    deltas = [parse_delta(t) for t in trace]
    agents = doc.agents
    if agents is None:
        agents = sorted({a for _, who in deltas for a in who})
    monitor = Monitor(doc.specs, agents, doc.atoms)
    sink = open(args.events_out, "w", encoding="utf-8") if args.events_out else out
    try:
        for delta in deltas:
            for event in monitor.append_state(delta):
                print(event.to_json(), file=sink)
    finally:
        if sink is not out:
            sink.close()
    print_ledger(monitor, out)
    return EXIT_TRUE


# -- scenarios --------------------------------------------------------------------------

PLAZA_ROLES = {
    "i": "prohibition on littering in the plaza",
    "j": "reparation: clean up the litter before leaving",
    "k": "metanorm: a bystander must call out the litterer",
    "l": "metanorm: a third party must call out the silent bystander",
    "rent": "pay the rent before every due date",
}


def narrate(event) -> str:
    p = event.payload
    who, norm = p.get("agent"), p.get("norm")
    role = PLAZA_ROLES.get(norm, norm)
    kind = event.type
    if kind == "normActivated":
        return f"norm {norm} ({role}) activated for {who}, tb={p['tBegin']}"
    if kind == "normDeactivated":
        return f"norm {norm} deactivated for {who}"
    if kind == "obligationActivated":
        return f"{who} is now obliged under {norm} (deadline: {p['deadline']})"
    if kind == "obligationDischarged":
        return f"obligation of {who} under {norm} discharged"
    if kind == "violationOpened":
        return f"fresh {p['kind']} violation of {norm} by {who} at t={p['tViol']}"
    if kind == "violationResolved":
        return f"violation of {norm} by {who} from t={p['tViol']} resolved by {p['via']}"
    return kind


def _run(specs, agents, steps, out) -> Monitor:
    monitor = Monitor(specs, agents)
    for delta in steps:
        for event in monitor.append_state(delta):
            print(f"  [{event.at}] {narrate(event)}", file=out)
    return monitor


def _derived_prohibitions(monitor: Monitor, out):
    model = derive_annotations(monitor.specs, monitor.model)
    ev = Evaluator(model)
    windows = [w for w in model.instances if w.norm == "i" and w.agent == "a"]
    for w in windows:
        end = w.t_end if w.t_end is not None else len(model.order)
        depths = range(w.t_begin, end)
        for atom in ("litter(a)", "throw_can(a)"):
            node = Forbidden("i", "a", tt("tb"), parse_raw(atom))
            holds = [d for d in depths
                     if ev.state(model.order[d], node, {"tb": w.t_begin})]
            verdict = "holds" if holds == list(depths) else f"holds at {holds}"
            print(f"  FORB[i,a,{w.t_begin}]{{{atom}}} while a is in the plaza "
                  f"(t={w.t_begin}..{end - 1}): {verdict}", file=out)


def _obligations(monitor: Monitor, agents, out):
    for agent in agents:
        obs = monitor.active_obligations(agent)
        text = ", ".join(f"{o.norm} (deadline {o.deadline}, tb={o.t_begin})" for o in obs)
        print(f"  {agent}: {text or 'none'}", file=out)


def cmd_scenario(args, out) -> int:
    name = args.name
    if name == "littering":
        print("littering: a throws a can in the plaza"
              + ("" if args.no_repair else " and picks it up")
              + ("; b stays silent" if args.silent_bystander else "; b calls a out"), file=out)
        steps = littering_steps(repair=not args.no_repair,
                                bystander_calls_out=not args.silent_bystander)
        monitor = _run(littering_specs(), PLAZA_AGENTS, steps, out)
        print("derived prohibitions:", file=out)
        _derived_prohibitions(monitor, out)
        agents = PLAZA_AGENTS
    elif name == "metanorm-cascade":
        print("metanorm cascade: a litters and never cleans up"
              + ("; b stays silent, c calls b out" if args.silent_bystander
                 else "; b calls a out"), file=out)
        if args.silent_bystander:
            steps = metanorm_cascade_steps()
        else:
            steps = littering_steps(repair=False, bystander_calls_out=True)
        monitor = _run(littering_specs(), PLAZA_AGENTS, steps, out)
        agents = PLAZA_AGENTS
    elif name == "repeating-obligation":
        cycles = args.cycles
        missed = (1,) if cycles > 1 else (0,)
        print(f"repeating obligation: {cycles} rent period(s), payment missed in period "
              f"{missed[0] + 1}", file=out)
        monitor = _run(rent_specs(), ["a"], rent_steps(cycles, missed), out)
        agents = ["a"]
    else:
        raise UsageError(f"unknown scenario {name!r}")
    print("obligations still pending at the end of the trace:", file=out)
    _obligations(monitor, agents, out)
    print_ledger(monitor, out)
    return EXIT_TRUE


# -- entry point ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="normlog", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="evaluate a state formula at a state of a model")
    check.add_argument("--model", required=True)
    check.add_argument("--formula", required=True)
    check.add_argument("--state", required=True)
    check.add_argument("--bind", action="append", default=[], metavar="VAR=N")
    check.set_defaults(func=cmd_check)

    mon = sub.add_parser("monitor", help="run the monitor over a JSONL trace")
    mon.add_argument("--norms", required=True)
    mon.add_argument("--trace", required=True)
    mon.add_argument("--events-out")
    mon.set_defaults(func=cmd_monitor)

    scen = sub.add_parser("scenario", help="replay a built-in scenario")
    scen.add_argument("name", choices=["littering", "metanorm-cascade", "repeating-obligation"])
    scen.add_argument("--no-repair", action="store_true")
    scen.add_argument("--silent-bystander", action="store_true")
    scen.add_argument("--cycles", type=int, default=3)
    scen.set_defaults(func=cmd_scenario)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_TRUE
    try:
        return args.func(args, out)
    except (FormulaError, ModelError, NormError, MonitorError, EvaluationError, UsageError,
            OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
