"""Finite trees of world states with agent-labelled transitions.

Time is tree depth.  Paths always start at the root and are maximal, i.e.
they end at a leaf; a model built from a simulation trace is a single path.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

ANNOTATION_KINDS = ("V", "D", "R", "P")

_STATE_FIELDS = {"id", "atoms", "children", "V", "D", "R", "P"}
_DOC_FIELDS = {"agents", "norms", "root", "states"}


class ModelError(ValueError):
    pass


Path = tuple  # tuple of state ids, path[0] is the root


@dataclass(eq=False)
class Model:
    root: str
    children: dict[str, tuple[str, ...]]
    labels: dict[tuple[str, str], frozenset]
    valuation: dict[str, frozenset]
    annotations: dict[str, dict[tuple[str, str], frozenset]]
    agents: frozenset = frozenset()
    norms: frozenset = frozenset()
    parent: dict[str, str] = field(init=False)
    depths: dict[str, int] = field(init=False)
    order: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        for kind in ANNOTATION_KINDS:
            self.annotations.setdefault(kind, {})
        self.parent = {}
        for p, kids in self.children.items():
            for c in kids:
                if c in self.parent:
                    raise ModelError(f"state {c!r} has multiple parents")
                self.parent[c] = p
        if self.root in self.parent:
            raise ModelError("cycle detected: root has a parent")
        self.depths = {self.root: 0}
        order = [self.root]
        k = 0
        while k < len(order):
            s = order[k]
            for c in self.children.get(s, ()):
                self.depths[c] = self.depths[s] + 1
                order.append(c)
            k += 1
        self.order = tuple(order)
        states = set(self.children) | set(self.parent) | {self.root} | set(self.valuation)
        unreachable = states - set(self.depths)
        if unreachable:
            raise ModelError(f"cycle detected or unreachable states: {sorted(unreachable)}")
        for s in self.order:
            self.children.setdefault(s, ())
            self.valuation.setdefault(s, frozenset())
        for kind, table in self.annotations.items():
            for key, members in table.items():
                bad = set(members) - set(self.depths)
                if bad:
                    raise ModelError(f"{kind}{list(key)} references unknown states {sorted(bad)}")

    @property
    def states(self) -> tuple[str, ...]:
        return self.order

    def __contains__(self, state) -> bool:
        return state in self.depths

    def __len__(self):
        return len(self.order)

    def check_state(self, state):
        if state not in self.depths:
            raise ModelError(f"unknown state {state!r}")

    def depth(self, state) -> int:
        self.check_state(state)
        return self.depths[state]

    def successors(self, state) -> tuple[str, ...]:
        return self.children[state]

    def label(self, parent, child) -> frozenset:
        return self.labels.get((parent, child), frozenset())

    def holds_atom(self, state, key: str) -> bool:
        return key in self.valuation[state]

    def annotated(self, kind: str, norm: str, agent: str, state) -> bool:
        return state in self.annotations[kind].get((norm, agent), ())

    def history(self, state) -> Path:
        """The unique root-to-``state`` prefix."""
        self.check_state(state)
        chain = [state]
        while chain[-1] != self.root:
            chain.append(self.parent[chain[-1]])
        return tuple(reversed(chain))

    def leaves_below(self, state) -> list[str]:
        out, stack = [], [state]
        while stack:
            s = stack.pop()
            kids = self.children[s]
            if not kids:
                out.append(s)
            else:
                stack.extend(reversed(kids))
        return out

    def max_depth(self) -> int:
        return max(self.depths.values())

    def truncate(self, max_depth: int) -> "Model":
        """Copy holding only the states of depth <= ``max_depth``."""
        keep = {s for s, d in self.depths.items() if d <= max_depth}
        children = {s: tuple(c for c in self.children[s] if c in keep) for s in keep}
        labels = {e: v for e, v in self.labels.items() if e[1] in keep}
        valuation = {s: self.valuation[s] for s in keep}
        ann = {k: {key: frozenset(m & keep) for key, m in t.items()}
               for k, t in self.annotations.items()}
        return Model(self.root, children, labels, valuation, ann, self.agents, self.norms)

    def with_annotations(self, annotations) -> "Model":
        return Model(self.root, dict(self.children), dict(self.labels), dict(self.valuation),
                     {k: dict(v) for k, v in annotations.items()}, self.agents, self.norms)


def depth(model: Model, state) -> int:
    return model.depth(state)


def paths_through(model: Model, state) -> list[Path]:
    """All maximal root-to-leaf paths containing ``state``, in child order."""
    prefix = model.history(state)
    paths = []
    for leaf in model.leaves_below(state):
        tail = model.history(leaf)[len(prefix):]
        paths.append(prefix + tail)
    return paths


def all_paths(model: Model) -> list[Path]:
    return paths_through(model, model.root)


def restrict(path: Path, i: int) -> Path:
    if not 0 <= i < len(path):
        raise IndexError(f"restriction index {i} out of range for path of length {len(path)}")
    return path[: i + 1]


def count_on_path(model: Model, path: Path, i: int, j: int, alpha, tau=None) -> int:
    """Number of positions k in [i, j] where ``alpha`` holds on ``path`` cut at j."""
    from .evaluator import Evaluator

    return Evaluator(model).count(path, i, j, alpha, tau or {})


# -- construction ----------------------------------------------------------------

def build_model(root: str, edges: Iterable = (), atoms: Mapping | None = None,
                agents: Iterable = (), norms: Iterable = (), **annotations) -> Model:
    """Build a model from ``(parent, child, agents)`` triples.

    ``annotations`` maps V/D/R/P to ``{(norm, agent): states}``.
    """
    children: dict[str, list] = {root: []}
    labels = {}
    for parent, child, who in edges:
        children.setdefault(parent, []).append(child)
        children.setdefault(child, [])
        labels[(parent, child)] = frozenset(who)
    valuation = {s: frozenset(v) for s, v in (atoms or {}).items()}
    ann = {k: {tuple(key): frozenset(v) for key, v in annotations.get(k, {}).items()}
           for k in ANNOTATION_KINDS}
    agent_set = set(agents) | {a for who in labels.values() for a in who}
    norm_set = set(norms)
    for table in ann.values():
        for n, a in table:
            norm_set.add(n)
            agent_set.add(a)
    return Model(root, {k: tuple(v) for k, v in children.items()}, labels, valuation, ann,
                 frozenset(agent_set), frozenset(norm_set))


def linear_model(steps: list, prefix: str = "s") -> Model:
    """A single-path model; ``steps`` holds ``(atoms, acting_agents)`` per state.

    ``acting_agents`` of state k labels the transition into it.
    """
    ids = [f"{prefix}{k}" for k in range(len(steps))]
    edges = [(ids[k - 1], ids[k], steps[k][1]) for k in range(1, len(steps))]
    atoms = {ids[k]: steps[k][0] for k in range(len(steps))}
    return build_model(ids[0], edges, atoms)


def load_model(document) -> Model:
    """Load and validate a model from a JSON string, bytes or parsed dict."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ModelError(f"invalid JSON: {exc}") from None
    if not isinstance(document, dict):
        raise ModelError("model document must be an object")
    unknown = set(document) - _DOC_FIELDS
    if unknown:
        raise ModelError(f"unknown fields {sorted(unknown)}")
    if "root" not in document:
        raise ModelError("missing field 'root'")
    agents = list(document.get("agents", []))
    norms = list(document.get("norms", []))
    agent_set, norm_set = set(agents), set(norms)
    root = document["root"]
    entries = document.get("states", [{"id": root}])
    seen = set()
    for entry in entries:
        extra = set(entry) - _STATE_FIELDS
        if extra:
            raise ModelError(f"unknown fields {sorted(extra)} in state {entry.get('id')!r}")
        if "id" not in entry:
            raise ModelError("state without 'id'")
        if entry["id"] in seen:
            raise ModelError(f"duplicate state id {entry['id']!r}")
        seen.add(entry["id"])
    if root not in seen:
        raise ModelError(f"root {root!r} is not a listed state")

    children, labels, valuation = {}, {}, {}
    ann = {k: {} for k in ANNOTATION_KINDS}
    for entry in entries:
        sid = entry["id"]
        valuation[sid] = frozenset(entry.get("atoms", []))
        kids = []
        for edge in entry.get("children", []):
            if set(edge) - {"to", "agents"}:
                raise ModelError(f"unknown fields in transition from {sid!r}")
            to = edge["to"]
            if to not in seen:
                raise ModelError(f"unknown child reference {to!r} from {sid!r}")
            who = frozenset(edge.get("agents", []))
            if agents and not who <= agent_set:
                raise ModelError(f"unknown agents {sorted(who - agent_set)} on {sid}->{to}")
            kids.append(to)
            labels[(sid, to)] = who
        children[sid] = tuple(kids)
        for kind in ANNOTATION_KINDS:
            for pair in entry.get(kind, []):
                norm, agent = pair
                if norms and norm not in norm_set:
                    raise ModelError(f"unknown norm {norm!r} in {kind} of {sid!r}")
                if agents and agent not in agent_set:
                    raise ModelError(f"unknown agent {agent!r} in {kind} of {sid!r}")
                ann[kind].setdefault((norm, agent), set()).add(sid)
    ann = {k: {key: frozenset(v) for key, v in t.items()} for k, t in ann.items()}
    if not agent_set:
        agent_set = {a for who in labels.values() for a in who}
    if not norm_set:
        norm_set = {n for t in ann.values() for n, _ in t}
    model = Model(root, children, labels, valuation, ann, frozenset(agent_set),
                  frozenset(norm_set))
    return model


def load_model_file(path) -> Model:
    with open(path, encoding="utf-8") as fh:
        return load_model(fh.read())


def dump_model(model: Model) -> dict:
    states = []
    for s in model.order:
        entry = {
            "id": s,
            "atoms": sorted(model.valuation[s]),
            "children": [{"to": c, "agents": sorted(model.label(s, c))}
                         for c in model.children[s]],
        }
        for kind in ANNOTATION_KINDS:
            pairs = sorted([n, a] for (n, a), members in model.annotations[kind].items()
                           if s in members)
            if pairs:
                entry[kind] = pairs
        states.append(entry)
    return {"agents": sorted(model.agents), "norms": sorted(model.norms),
            "root": model.root, "states": states}
