"""Incremental norm monitor over a growing linear trace.

Each appended state is annotated on the trace prefix ending in it, using
the same depth-ordered :class:`~normlog.norms.Engine` as
:func:`~normlog.norms.derive_annotations`.  Earlier states are never
revisited, so events at depth d depend on the prefix up to d only.
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field, replace
from typing import Iterable

from . import deontic
from .evaluator import Evaluator, UnboundVariable
from .model import Model, linear_model
from .norms import Engine, NormSpec, check_norm_set, derive_annotations, instantiate
from .syntax import render

_KIND_NAMES = {"act": "act", "omit": "omission"}


class MonitorError(ValueError):
    pass


@dataclass(frozen=True)
class ViolationRecord:
    norm: str
    agent: str
    kind: str  # "act" or "omission"
    t_begin: int
    t_viol: int
    status: str = "open"
    t_repair: int | None = None
    t_punish: int | None = None

    @property
    def key(self):
        return (self.norm, self.agent, self.t_begin, self.t_viol)

    def resolve(self, via: str, at: int) -> "ViolationRecord":
        if via == "repair":
            rec = replace(self, t_repair=at)
        else:
            rec = replace(self, t_punish=at)
        if rec.t_repair is not None and rec.t_punish is not None:
            status = "repairedAndPunished"
        else:
            status = "repaired" if rec.t_repair is not None else "punished"
        return replace(rec, status=status)

    def to_dict(self) -> dict:
        return {"norm": self.norm, "agent": self.agent, "kind": self.kind,
                "tBegin": self.t_begin, "tViol": self.t_viol, "status": self.status,
                "tRepair": self.t_repair, "tPunish": self.t_punish}


@dataclass(frozen=True)
class Event:
    at: int
    type: str
    payload: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"at": self.at, "type": self.type, **self.payload}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class ActiveObligation:
    norm: str
    deadline: str
    t_begin: int
    strict: bool  # the obliged operator itself at the trace head

    def __iter__(self):
        return iter((self.norm, self.deadline, self.t_begin))


def parse_delta(delta) -> tuple[frozenset, frozenset]:
    """``{atoms, acting}`` dict (``acting`` maps agent to atoms, or lists
    agents) or an ``(atoms, agents)`` pair."""
    if isinstance(delta, dict):
        extra = set(delta) - {"atoms", "acting"}
        if extra:
            raise MonitorError(f"unknown fields {sorted(extra)} in trace state")
        atoms = delta.get("atoms", [])
        acting = delta.get("acting", {})
    else:
        atoms, acting = delta
    if isinstance(atoms, str) or not all(isinstance(x, str) for x in atoms):
        raise MonitorError("trace state atoms must be a list of strings")
    if isinstance(acting, dict):
        agents = set(acting)
        atoms = set(atoms) | {x for v in acting.values() for x in v}
    else:
        agents = set(acting)
    return frozenset(atoms), frozenset(agents)


class Monitor:
    def __init__(self, specs: Iterable[NormSpec] = (), agents: Iterable[str] | None = None,
                 atoms: Iterable[str] | None = None):
        try:
            self.specs = check_norm_set(specs)
        except ValueError as exc:
            raise MonitorError(str(exc)) from None
        self.agents = tuple(sorted(agents)) if agents is not None else None
        self.atoms = frozenset(atoms) if atoms is not None else None
        self._engine = Engine(self.specs, self.agents or ())
        self._steps: list = []
        self._annotations = {k: {} for k in "VDRP"}
        self._records: dict = {}
        self._events: list[Event] = []
        self._model: Model | None = None
        self._lock = threading.RLock()
        self.evaluation_counts: list[int] = []

    @property
    def norm_ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.specs)

    @property
    def depth(self) -> int:
        return len(self._steps) - 1

    @property
    def events(self) -> list[Event]:
        with self._lock:
            return list(self._events)

    @property
    def model(self) -> Model | None:
        return self._model

    def _check(self, atoms, agents):
        if self.agents is not None:
            unknown = sorted(agents - set(self.agents))
            if unknown:
                raise MonitorError(f"unknown agent(s) {unknown}")
        elif self.specs and agents:
            raise MonitorError("monitor has norms but no declared agents")
        if self.atoms is not None:
            unknown = sorted(a for a in atoms
                             if a not in self.atoms and a.split("(")[0] not in self.atoms)
            if unknown:
                raise MonitorError(f"unknown atom(s) {unknown}")

    def append_state(self, delta) -> list[Event]:
        atoms, agents = parse_delta(delta)
        self._check(atoms, agents)
        with self._lock:
            self._steps.append((atoms, agents))
            base = linear_model(self._steps)
            model = Model(base.root, base.children, base.labels, base.valuation,
                          self._annotations, frozenset(self.agents or ()),
                          frozenset(self.norm_ids))
            head = model.order[-1]
            before = self._engine.evaluations
            raw = self._engine.advance(model, [head])[head]
            self.evaluation_counts.append(self._engine.evaluations - before)
            self._model = model
            d = self.depth
            out = [self._record_event(d, e) for e in raw]
            self._events.extend(out)
            return out

    def _record_event(self, d, e) -> Event:
        payload = {k: v for k, v in e.items() if k != "type"}
        if e["type"] == "violationOpened":
            rec = ViolationRecord(e["norm"], e["agent"], _KIND_NAMES[e["kind"]],
                                  e["tBegin"], e["tViol"])
            self._records.setdefault(rec.key, rec)
            payload["kind"] = rec.kind
        elif e["type"] == "violationResolved":
            key = (e["norm"], e["agent"], e["tBegin"], e["tViol"])
            rec = self._records[key]
            if (e["via"] == "repair" and rec.t_repair is None) or \
                    (e["via"] == "punish" and rec.t_punish is None):
                self._records[key] = rec.resolve(e["via"], d)
            payload["kind"] = _KIND_NAMES[e["kind"]]
        return Event(d, e["type"], payload)

    def ledger(self) -> list[ViolationRecord]:
        with self._lock:
            return sorted(self._records.values(), key=lambda r: (r.t_viol, r.norm, r.agent))

    def active_obligations(self, agent: str) -> list[ActiveObligation]:
        """Obligations of ``agent`` that are active at the trace head.

        On a finite trace the obliged operator is false while the deadline
        lies beyond the head; such obligations are still reported (the
        ``strict`` field carries the operator's own value).  Per norm only
        the earliest pending obligation is listed.
        """
        with self._lock:
            if self.agents is not None and agent not in self.agents:
                raise MonitorError(f"unknown agent {agent!r}")
            if self._model is None:
                return []
            model = self._model
            head = model.order[-1]
            ev = Evaluator(model)
            found = {}
            for inst in self._engine.instances:
                spec = inst.spec
                if spec.kind != "obligation" or spec.agent != agent:
                    continue
                slot = self._engine.slots[head].get(inst.key)
                if slot is None or not slot.active:
                    continue
                tau = {"tb": slot.tb}
                try:
                    strict = deontic.obliged(ev, head, spec.id, agent, slot.tb,
                                             inst.f["condition"], inst.f["deadline"], tau)[0]
                except UnboundVariable:
                    strict = False
                entry = ActiveObligation(spec.id, render(spec.deadline), slot.tb, strict)
                if spec.id not in found or entry.t_begin < found[spec.id].t_begin:
                    found[spec.id] = entry
            return sorted(found.values(), key=lambda o: (o.t_begin, o.norm))


def new_monitor(specs: Iterable[NormSpec] = (), agents=None, atoms=None) -> Monitor:
    return Monitor(specs, agents, atoms)


def append_state(monitor: Monitor, delta) -> list[Event]:
    return monitor.append_state(delta)


def ledger(monitor: Monitor) -> list[ViolationRecord]:
    return monitor.ledger()


def active_obligations(monitor: Monitor, agent: str) -> list[ActiveObligation]:
    return monitor.active_obligations(agent)


# -- batch counterpart --------------------------------------------------------------

def batch_ledger(specs: Iterable[NormSpec], steps, agents) -> list[ViolationRecord]:
    """Ledger of a whole trace: annotate it in one go, then probe every
    state of every activation window for fresh violations and every later
    state for their first repair and punishment."""
    specs = tuple(specs)
    steps = [parse_delta(s) for s in steps]
    if not steps:
        return []
    base = linear_model(steps)
    model = Model(base.root, base.children, base.labels, base.valuation, {},
                  frozenset(agents), frozenset(s.id for s in specs))
    annotated = derive_annotations(specs, model)
    by_id = {s.id: s for s in specs}
    path = annotated.order
    prefixes = {}

    def evaluator(d):
        if d not in prefixes:
            prefixes[d] = Evaluator(annotated.truncate(d))
        return prefixes[d]

    records = {}
    for window in annotated.instances:
        spec = instantiate(by_id[window.norm], dict(window.binding))
        kind = "omit" if spec.kind == "obligation" else "act"
        phi = spec.condition
        tb = window.t_begin
        end = window.t_end if window.t_end is not None else len(path)
        for d in range(tb, end):
            ev = evaluator(d)
            try:
                fresh = deontic.violation_at(ev, path[d], kind, spec.id, spec.agent, tb, phi,
                                             {"tb": tb})[0]
            except UnboundVariable:
                fresh = False
            if not fresh:
                continue
            rec = ViolationRecord(spec.id, spec.agent, _KIND_NAMES[kind], tb, d)
            if rec.key in records:
                continue
            for via in ("repair", "punish"):
                for later in range(d + 1, len(path)):
                    ev = evaluator(later)
                    if deontic.resolved(ev, path[later], via, spec.id, spec.agent, tb, d,
                                        later - 1, phi, {"tb": tb})[0]:
                        rec = rec.resolve(via, later)
                        break
            records[rec.key] = rec
    return sorted(records.values(), key=lambda r: (r.t_viol, r.norm, r.agent))


def read_trace(lines) -> list:
    out = []
    for n, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        try:
            out.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise MonitorError(f"trace line {n}: invalid JSON: {exc}") from None
    return out
