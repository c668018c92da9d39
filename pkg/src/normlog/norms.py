"""Norm specs, their macro expansion and annotation of models.

A norm is written once with *role* variables in its agent positions and is
instantiated for every injective assignment of concrete agents to roles.
An instance is active between a state where its activation formula holds
and the next state where its deactivation formula holds; the depth of the
activation state is the instance's ``tb``.  Other norms can read that value
through the time variable ``tb_<normId>`` after listing the norm in
``imports``; a norm's own ``tb`` is available to its deactivation, deadline
and consequence formulas.

:func:`derive_annotations` computes the V/D/R/P sets of a model from a set
of specs.  It works level by level: states of depth ``d`` are annotated on
the model truncated at ``d``, so the result at a state never depends on
anything below it.  The monitor drives the same :class:`Engine` one state
at a time.
"""
from __future__ import annotations

import dataclasses
import itertools
import json
from functools import lru_cache
from dataclasses import dataclass
from typing import Iterable

from . import deontic
from .evaluator import Evaluator
from .model import ANNOTATION_KINDS, Model
from .syntax import (
    FORWARD, And, Atom, Const, Forall, Forbidden, Formula, Freeze, Globally, Implies, Next,
    Not, Obliged, ParseError, Resolved, Special, StateFormula, Stit, TimeTerm, Until, Viol,
    free_time_variables, normalize_state, parse_raw, render, walk,
)

KINDS = ("obligation", "prohibition")
FORMULA_FIELDS = ("activation", "deactivation", "deadline", "condition", "repair", "punishment")
_SPEC_FIELDS = {"id", "kind", "agent", "roles", "imports", *FORMULA_FIELDS}
_DOC_FIELDS = {"norms", "agents", "atoms"}


class NormError(ValueError):
    pass


def import_var(norm_id: str) -> str:
    """Name under which an imported norm's activation time is visible."""
    return f"tb_{norm_id}"


@dataclass(frozen=True)
class NormSpec:
    id: str
    kind: str
    agent: str
    activation: StateFormula
    deactivation: StateFormula
    condition: StateFormula
    repair: StateFormula
    punishment: StateFormula
    deadline: StateFormula | None = None
    imports: tuple[str, ...] = ()
    roles: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise NormError(f"norm {self.id!r}: kind must be one of {KINDS}")
        if self.kind == "obligation" and self.deadline is None:
            raise NormError(f"norm {self.id!r}: obligation norm needs a deadline")
        if self.kind == "prohibition" and self.deadline is not None:
            raise NormError(f"norm {self.id!r}: prohibition norm takes no deadline")
        imported = {import_var(n) for n in self.imports}
        allowed = {"activation": imported}
        for name in FORMULA_FIELDS:
            phi = getattr(self, name)
            if phi is None:
                continue
            extra = free_time_variables(phi) - allowed.get(name, imported | {"tb"})
            if extra:
                raise NormError(
                    f"norm {self.id!r}: undeclared cross-norm variable(s) {sorted(extra)} "
                    f"in {name}")

    @property
    def role_names(self) -> tuple[str, ...]:
        """Explicit roles, or the agent plus every agent position and atom argument."""
        if self.roles is not None:
            return self.roles
        seen = [self.agent]
        for name in FORMULA_FIELDS:
            phi = getattr(self, name)
            if phi is None:
                continue
            for node in walk(phi):
                found = node.args if isinstance(node, Atom) else (
                    (node.agent,) if hasattr(node, "agent") else ())
                for x in found:
                    if x not in seen:
                        seen.append(x)
        return tuple(seen)

    def formulas(self) -> dict:
        return {name: getattr(self, name) for name in FORMULA_FIELDS
                if getattr(self, name) is not None}

    @classmethod
    def from_dict(cls, entry: dict) -> "NormSpec":
        extra = set(entry) - _SPEC_FIELDS
        if extra:
            raise NormError(f"unknown fields {sorted(extra)} in norm {entry.get('id')!r}")
        for name in ("id", "kind", "agent", "activation", "deactivation", "condition",
                     "repair", "punishment"):
            if name not in entry:
                raise NormError(f"norm {entry.get('id')!r}: missing field {name!r}")
        parsed = {}
        for name in FORMULA_FIELDS:
            text = entry.get(name)
            if text is None:
                continue
            try:
                parsed[name] = parse_raw(text)
            except ParseError as exc:
                raise NormError(f"norm {entry['id']!r}, {name}: {exc}") from None
            if not isinstance(parsed[name], StateFormula):
                raise NormError(f"norm {entry['id']!r}, {name}: expected a state formula")
        roles = entry.get("roles")
        return cls(id=entry["id"], kind=entry["kind"], agent=entry["agent"],
                   imports=tuple(entry.get("imports", ())),
                   roles=tuple(roles) if roles is not None else None, **parsed)

    def to_dict(self) -> dict:
        out = {"id": self.id, "kind": self.kind, "agent": self.agent}
        out.update({k: render(v) for k, v in self.formulas().items()})
        out["imports"] = list(self.imports)
        if self.roles is not None:
            out["roles"] = list(self.roles)
        return out


@dataclass(frozen=True)
class NormInstance:
    norm: str
    agent: str
    t_begin: int | None
    status: str  # "active" or "deactivated"
    binding: tuple = ()  # ((role, agent), ...)
    t_end: int | None = None


@dataclass(frozen=True)
class NormDocument:
    specs: tuple[NormSpec, ...]
    agents: tuple[str, ...] | None = None
    atoms: frozenset | None = None


def check_norm_set(specs: Iterable[NormSpec]) -> tuple[NormSpec, ...]:
    specs = tuple(specs)
    ids = [s.id for s in specs]
    dup = sorted({i for i in ids if ids.count(i) > 1})
    if dup:
        raise NormError(f"duplicate norm ids {dup}")
    for s in specs:
        missing = [n for n in s.imports if n not in ids]
        if missing:
            raise NormError(f"norm {s.id!r} imports unknown norms {missing}")
    return specs


def load_norm_document(document) -> NormDocument:
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise NormError(f"invalid JSON: {exc}") from None
    if not isinstance(document, dict) or "norms" not in document:
        raise NormError("norm document must be an object with a 'norms' list")
    extra = set(document) - _DOC_FIELDS
    if extra:
        raise NormError(f"unknown fields {sorted(extra)}")
    specs = check_norm_set(NormSpec.from_dict(e) for e in document["norms"])
    agents = document.get("agents")
    atoms = document.get("atoms")
    return NormDocument(specs, tuple(agents) if agents is not None else None,
                        frozenset(atoms) if atoms is not None else None)


def load_norms(document) -> tuple[NormSpec, ...]:
    return load_norm_document(document).specs


def load_norm_file(path) -> NormDocument:
    with open(path, encoding="utf-8") as fh:
        return load_norm_document(fh.read())


def dump_norms(specs: Iterable[NormSpec], agents=None) -> dict:
    doc = {"norms": [s.to_dict() for s in specs]}
    if agents is not None:
        doc["agents"] = list(agents)
    return doc


# -- instantiation and expansion ---------------------------------------------------

def substitute_agents(node, mapping: dict):
    """Rename agents (and atom arguments) according to ``mapping``."""
    if not isinstance(node, Formula) or not mapping:
        return node
    changes = {}
    for f in dataclasses.fields(node):
        value = getattr(node, f.name)
        if isinstance(value, Formula):
            new = substitute_agents(value, mapping)
        elif f.name == "agent":
            new = mapping.get(value, value)
        elif f.name == "args" and isinstance(node, Atom):
            new = tuple(mapping.get(x, x) for x in value)
        else:
            continue
        if new is not value:
            changes[f.name] = new
    return dataclasses.replace(node, **changes) if changes else node


def instantiate(spec: NormSpec, mapping: dict) -> NormSpec:
    fields = {k: substitute_agents(v, mapping) for k, v in spec.formulas().items()}
    return dataclasses.replace(spec, agent=mapping.get(spec.agent, spec.agent),
                               roles=tuple(mapping.get(r, r) for r in spec.role_names),
                               **fields)


_TB, _TV, _T = TimeTerm("tb"), TimeTerm("tv"), TimeTerm("t")


def resolution_event(kind: str, spec: NormSpec) -> StateFormula:
    """``t.RVIOL[i,a,tb,tv,t-1]{phi}``: the violation born at tv was just resolved."""
    return Freeze("t", Resolved(kind, spec.id, spec.agent, _TB, _TV, TimeTerm("t", -1),
                                spec.condition))


def _handling(spec: NormSpec, kind: str, trigger) -> StateFormula:
    target = spec.repair if kind == "repair" else spec.punishment
    done = resolution_event(kind, spec)
    duty = Obliged(spec.id, spec.agent, _TB, target, done)
    return Forall(Globally(FORWARD, Freeze("tv", Implies(trigger, Forall(
        Until(FORWARD, duty, done))))))


def expand_norm(spec: NormSpec) -> StateFormula:
    """The obligation or prohibition macro as a single state formula."""
    i, a, phi = spec.id, spec.agent, spec.condition
    if spec.kind == "obligation":
        if spec.deadline is None:
            raise NormError(f"norm {i!r}: obligation norm needs a deadline")
        delta = spec.deadline
        now = Obliged(i, a, _TB, phi, delta)
        renew = Forall(Until(FORWARD, Implies(delta, Forall(Next(FORWARD, now))),
                             spec.deactivation))
        trigger = And(delta, Viol("omit", i, a, _TB, _TV, phi))
        body = And(And(now, renew), And(_handling(spec, "repair", trigger),
                                        _handling(spec, "punish", trigger)))
    else:
        window = Forall(Until(FORWARD, Forbidden(i, a, _TB, phi), spec.deactivation))
        trigger = Viol("act", i, a, _TB, _TV, phi)
        body = And(window, And(_handling(spec, "repair", trigger),
                               _handling(spec, "punish", trigger)))
    return Implies(spec.activation, Freeze("tb", body))


def holds_norm(ctx, state, spec: NormSpec, bindings=None, roles: dict | None = None) -> bool:
    """Evaluate the expanded norm at ``state``.

    ``ctx`` is a :class:`Model` or an :class:`Evaluator`; ``bindings`` gives
    the values of imported ``tb_<normId>`` variables.
    """
    bindings = dict(bindings or {})
    missing = [n for n in spec.imports if import_var(n) not in bindings]
    if missing:
        raise NormError(f"unresolved import(s) {missing} for norm {spec.id!r}")
    if roles:
        spec = instantiate(spec, roles)
    ev = ctx if isinstance(ctx, Evaluator) else Evaluator(ctx)
    return ev.state(state, expand_norm(spec), bindings)


# -- annotation engine ----------------------------------------------------------------

def _topological(specs: tuple[NormSpec, ...]) -> list[NormSpec]:
    by_id = {s.id: s for s in specs}
    order, state = [], {}

    def visit(s):
        mark = state.get(s.id)
        if mark == "done":
            return
        if mark == "busy":
            raise NormError(f"import cycle through norm {s.id!r}")
        state[s.id] = "busy"
        for n in s.imports:
            if n != s.id:
                visit(by_id[n])
        state[s.id] = "done"
        order.append(s)

    for s in specs:
        visit(s)
    return order


@dataclass(frozen=True)
class _Slot:
    active: bool = False
    tb: int | None = None
    open_repair: tuple = ()  # (tb, tv, kind) of violations not yet repaired
    open_punish: tuple = ()


_EMPTY = _Slot()
_EVENT_RANK = {"normActivated": 0, "normDeactivated": 0, "obligationActivated": 1,
               "obligationDischarged": 1, "violationOpened": 2, "violationResolved": 3}


@dataclass
class _Instance:
    key: tuple
    spec: NormSpec  # instantiated
    binding: tuple
    imports: dict  # variable -> instance key
    f: dict  # normalized formulas


class Engine:
    """Depth-ordered annotator shared by batch derivation and the monitor."""

    def __init__(self, specs: Iterable[NormSpec], agents: Iterable[str]):
        self.specs = _topological(check_norm_set(specs))
        self.agents = tuple(sorted(agents))
        self.slots: dict = {}
        self.evaluations = 0
        self.instances: list[_Instance] = []
        self.windows: dict = {}  # instance key -> list of [tb, end]
        for spec in self.specs:
            roles = spec.role_names
            for combo in itertools.permutations(self.agents, len(roles)):
                mapping = dict(zip(roles, combo))
                inst = instantiate(spec, mapping)
                key = (spec.id, tuple(zip(roles, combo)))
                self.instances.append(_Instance(key, inst, key[1], {}, {
                    k: normalize_state(v) for k, v in inst.formulas().items()}))
        for inst in self.instances:
            mine = dict(inst.binding)
            for n in inst.spec.imports:
                for other in self.instances:
                    if other.key[0] != n:
                        continue
                    if all(mine.get(r, x) == x for r, x in other.binding):
                        inst.imports[import_var(n)] = other.key
                        break

    # each evaluator sees one fixed set of annotations
    def _evaluator(self, model):
        ev = Evaluator(model)
        self._live.append(ev)
        return ev

    def _slot(self, state, parent, key) -> _Slot:
        here = self.slots.get(state, {})
        if key in here:
            return here[key]
        if parent is None:
            return _EMPTY
        return self.slots[parent].get(key, _EMPTY)

    def _tau(self, inst, state, parent, tb=None):
        """Bindings for ``inst``; imports whose norm never activated are left out."""
        tau = {}
        for var, key in inst.imports.items():
            value = self._slot(state, parent, key).tb
            if value is not None:
                tau[var] = value
        if tb is not None:
            tau["tb"] = tb
        return tau

    def advance(self, model: Model, states: Iterable[str]) -> dict:
        """Annotate ``states`` (all of one depth, the deepest of ``model``).

        ``model`` is mutated in place; returns the events per state.
        """
        states = list(states)
        self._live = []
        events = {s: [] for s in states}
        for spec in self.specs:
            group = [x for x in self.instances if x.key[0] == spec.id]
            self._advance_norm(model, states, group, events)
        self.evaluations += sum(ev.misses for ev in self._live)
        self._live = []
        for s in states:
            events[s].sort(key=lambda e: _EVENT_RANK[e["type"]])
        return events

    def _advance_norm(self, model, states, group, events):
        ann = model.annotations
        spec = group[0].spec if group else None
        if spec is None:
            return
        obligation = spec.kind == "obligation"
        ev = self._evaluator(model)
        tentative = []
        for s in states:
            d = model.depths[s]
            parent = model.parent.get(s)
            for inst in group:
                prev = self._slot(s, parent, inst.key)
                slot = prev
                a = inst.spec.agent
                if prev.active:
                    tau = self._tau(inst, s, parent, prev.tb)
                    if _holds(ev, s, inst.f["deactivation"], tau):
                        slot = dataclasses.replace(prev, active=False)
                        self.windows[inst.key][-1][1] = d
                        events[s].append(_event("normDeactivated", inst, slot.tb))
                        if obligation:
                            events[s].append(_event("obligationDischarged", inst, slot.tb))
                else:
                    tau = self._tau(inst, s, parent)
                    if (_holds(ev, s, inst.f["activation"], tau)
                            and not _holds(ev, s, inst.f["deactivation"], {**tau, "tb": d})):
                        slot = dataclasses.replace(prev, active=True, tb=d)
                        self.windows.setdefault(inst.key, []).append([d, None])
                        events[s].append(_event("normActivated", inst, d))
                        if obligation:
                            e = _event("obligationActivated", inst, d)
                            e["deadline"] = render(inst.spec.deadline)
                            events[s].append(e)
                self.slots.setdefault(s, {})[inst.key] = slot
                if not slot.active:
                    continue
                tau = self._tau(inst, s, parent, slot.tb)
                phi_now = _holds(ev, s, inst.f["condition"], tau)
                if obligation:
                    if _holds(ev, s, inst.f["deadline"], tau):
                        _mark(ann, "D", inst.spec.id, a, s)
                        if not phi_now:
                            _mark(ann, "V", inst.spec.id, a, s)
                            tentative.append((s, inst, tau))
                elif phi_now:
                    _mark(ann, "V", inst.spec.id, a, s)

        if tentative:
            ev = self._evaluator(model)
            verdicts = [deontic.violation_at(ev, s, "omit", inst.spec.id, inst.spec.agent,
                                             self.slots[s][inst.key].tb, inst.f["condition"],
                                             tau)[0]
                        for s, inst, tau in tentative]
            for (s, inst, _), ok in zip(tentative, verdicts):
                if not ok:
                    _unmark(ann, "V", inst.spec.id, inst.spec.agent, s)

        # resolving actions: the agent saw to the repair/punishment at the parent
        ev = self._evaluator(model)
        marked = False
        for s in states:
            parent = model.parent.get(s)
            if parent is None:
                continue
            for inst in group:
                slot = self.slots[s][inst.key]
                a = inst.spec.agent
                for kind, field, pending in (("R", "repair", slot.open_repair),
                                             ("P", "punishment", slot.open_punish)):
                    if not pending:
                        continue
                    tau = self._tau(inst, s, parent, slot.tb)
                    target = inst.f[field]
                    if _holds(ev, s, target, tau) and _does(ev, parent, a, target, tau):
                        _mark(ann, kind, inst.spec.id, a, s)
                        marked = True
        if marked:
            ev = self._evaluator(model)

        for s in states:
            d = model.depths[s]
            for inst in group:
                slot = self.slots[s][inst.key]
                i, a = inst.spec.id, inst.spec.agent
                tau = self._tau(inst, s, model.parent.get(s), slot.tb)
                phi = inst.f["condition"]
                open_r, open_p = list(slot.open_repair), list(slot.open_punish)
                for via, pending in (("repair", open_r), ("punish", open_p)):
                    for rec in list(pending):
                        tb, tv, vkind = rec
                        if d > 0 and deontic.resolved(ev, s, via, i, a, tb, tv, d - 1, phi,
                                                      tau)[0]:
                            pending.remove(rec)
                            e = _event("violationResolved", inst, tb)
                            e.update(kind=vkind, tViol=tv, via=via)
                            events[s].append(e)
                if slot.active and model.annotated("V", i, a, s):
                    vkind = "omit" if inst.spec.kind == "obligation" else "act"
                    if deontic.violation_at(ev, s, vkind, i, a, slot.tb, phi, tau)[0]:
                        rec = (slot.tb, d, vkind)
                        open_r.append(rec)
                        open_p.append(rec)
                        e = _event("violationOpened", inst, slot.tb)
                        e.update(kind=vkind, tViol=d)
                        events[s].append(e)
                self.slots[s][inst.key] = dataclasses.replace(
                    slot, open_repair=tuple(open_r), open_punish=tuple(open_p))

    def instance_log(self) -> list[NormInstance]:
        out = []
        for inst in self.instances:
            for tb, end in self.windows.get(inst.key, ()):
                out.append(NormInstance(inst.spec.id, inst.spec.agent, tb,
                                        "active" if end is None else "deactivated",
                                        inst.binding, end))
        return out


def _event(kind, inst, tb) -> dict:
    return {"type": kind, "norm": inst.spec.id, "agent": inst.spec.agent, "tBegin": tb,
            "binding": {r: x for r, x in inst.binding}}


def _holds(ev, s, phi, tau) -> bool:
    missing = free_time_variables(phi) - set(tau)
    if missing:
        phi = _close(phi, frozenset(missing))
    return ev._state(s, phi, tau)


@lru_cache(maxsize=4096)
def _close(phi, unbound: frozenset):
    """Replace the smallest subformulas mentioning ``unbound`` variables by false."""
    if not free_time_variables(phi) & unbound:
        return phi
    if isinstance(phi, Not):
        return Not(_close(phi.body, unbound))
    if isinstance(phi, And):
        return And(_close(phi.left, unbound), _close(phi.right, unbound))
    if isinstance(phi, Freeze):
        return Freeze(phi.var, _close(phi.body, unbound - {phi.var}))
    return Const(False)


def _does(ev, s, agent, phi, tau) -> bool:
    return ev._state(s, Stit(agent, phi), tau)


def _mark(ann, kind, norm, agent, s):
    table = ann[kind]
    table[(norm, agent)] = table.get((norm, agent), frozenset()) | {s}


def _unmark(ann, kind, norm, agent, s):
    table = ann[kind]
    table[(norm, agent)] = table.get((norm, agent), frozenset()) - {s}


def _working_copy(model: Model, specs) -> Model:
    ids = {s.id for s in specs}
    ann = {k: {key: v for key, v in t.items() if key[0] not in ids}
           for k, t in model.annotations.items()}
    norms = model.norms | ids if model.norms else model.norms
    return Model(model.root, dict(model.children), dict(model.labels), dict(model.valuation),
                 ann, model.agents, frozenset(norms))


def derive_annotations(specs: Iterable[NormSpec], model: Model) -> Model:
    """Compute V/D/R/P for ``specs`` over ``model`` in depth order.

    Annotations of norms not in ``specs`` are kept.  The instance windows
    are available as ``result.instances`` afterwards.
    """
    specs = tuple(specs)
    work = _working_copy(model, specs)
    engine = Engine(specs, work.agents)
    if specs:
        by_depth: dict[int, list] = {}
        for s in work.order:
            by_depth.setdefault(work.depths[s], []).append(s)
        for d in sorted(by_depth):
            prefix = work.truncate(d)
            engine.advance(prefix, by_depth[d])
            for kind in ANNOTATION_KINDS:
                for key, members in prefix.annotations[kind].items():
                    current = work.annotations[kind].get(key, frozenset())
                    work.annotations[kind][key] = current | members
    work.instances = engine.instance_log()
    return work


from .scenarios import scenario_littering  # noqa: E402  (re-export)
