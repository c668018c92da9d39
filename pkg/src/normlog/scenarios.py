"""Fixture models and norm sets: the three figure models and the plaza scenarios.

Figure models share one shape: a main chain ``s0 .. s6`` (depth = index),
a side branch ``u<k>`` hanging off every ``s<k>`` for k < 6, and two
successors ``s7a``/``s7b`` of ``s6``.  Every transition is performed by
agent ``a``; the single norm is ``i``.
"""
from __future__ import annotations

from .model import Model, build_model, linear_model
from .norms import NormSpec

CHAIN = tuple(f"s{k}" for k in range(7))
SIDE = tuple(f"u{k}" for k in range(6))
LEAVES = ("s7a", "s7b")
DOTTED = CHAIN + LEAVES  # states carrying printed labels

_FIG_ATOMS = {
    "1a": {"s6": {"phi"}, "u5": {"phi"}},
    "1b": {"s3": {"phi", "due"}, "u2": {"phi"}, "s6": {"due"}},
    "2": {"s4": {"phi"}, "u3": {"phi"}, "s7a": {"fix"}, "s7b": {"fix"}},
}
_FIG_LABELS = {
    "1a": {"V": ["s6"]},
    "1b": {"V": ["s6"], "D": ["s3", "s6"]},
    "2": {"V": ["s4"], "R": ["s7a", "s7b"]},
}


def _figure_shape(atoms) -> Model:
    edges = [(p, c, {"a"}) for p, c in zip(CHAIN, CHAIN[1:])]
    edges += [(CHAIN[k], SIDE[k], {"a"}) for k in range(6)]
    edges += [("s6", leaf, {"a"}) for leaf in LEAVES]
    atoms = {s: set(v) for s, v in atoms.items()}
    atoms.setdefault("s1", set()).add("begin")
    return build_model("s0", edges, atoms, agents=["a"], norms=["i"])


def figure_model(name: str, annotated: bool = True) -> Model:
    """Model of figure ``name`` (``"1a"``, ``"1b"`` or ``"2"``).

    With ``annotated`` the V/D/R labels are the printed ones; otherwise the
    model carries atoms only and the labels can be derived from
    :func:`figure_specs`.
    """
    if name not in _FIG_ATOMS:
        raise KeyError(f"unknown figure {name!r}")
    model = _figure_shape(_FIG_ATOMS[name])
    if not annotated:
        return model
    ann = {kind: {("i", "a"): frozenset(states)}
           for kind, states in _FIG_LABELS[name].items()}
    return model.with_annotations(ann)


def figure_labels(name: str) -> dict:
    return {k: set(v) for k, v in _FIG_LABELS[name].items()}


def figure_specs(name: str) -> tuple[NormSpec, ...]:
    """A norm whose derived annotations reproduce the figure's labels."""
    common = dict(id="i", agent="a", activation="begin", deactivation="false",
                  condition="phi", repair="fix", punishment="false")
    if name == "1b":
        return (NormSpec.from_dict({**common, "kind": "obligation", "deadline": "due"}),)
    return (NormSpec.from_dict({**common, "kind": "prohibition"}),)


# -- plaza ------------------------------------------------------------------------

def _leaving(x):
    return f"!in_plaza({x}) & Apath X- in_plaza({x})"


LITTERING_NORMS = (
    {"id": "i", "kind": "prohibition", "agent": "a",
     "activation": "in_plaza(a)", "deactivation": "!in_plaza(a)",
     "condition": "litter(a)", "repair": "!litter(a)", "punishment": "!litter(a)"},
    {"id": "j", "kind": "obligation", "agent": "a", "imports": ["i"],
     "activation": "t.VIOLA[i,a,tb_i,t]{litter(a)}",
     "deactivation": "t.RVIOL[i,a,tb_i,tb,t-1]{litter(a)}",
     "deadline": _leaving("a"),
     "condition": "!litter(a)", "repair": "!litter(a)", "punishment": "pay_fine(a)"},
    {"id": "k", "kind": "obligation", "agent": "b", "imports": ["i"],
     "activation": "in_plaza(b) & t.VIOL[i,a,tb_i,t]{litter(a)}",
     "deactivation": "t.RVIOL[i,a,tb_i,tb,t-1]{litter(a)}",
     "deadline": _leaving("b"),
     "condition": "call_out(b,a)", "repair": "call_out(b,a)", "punishment": "call_out(b,a)"},
    {"id": "l", "kind": "obligation", "agent": "c", "imports": ["k"],
     "activation": "in_plaza(c) & t.VIOL[k,b,tb_k,t]{call_out(b,a)}",
     "deactivation": "t.RVIOL[k,b,tb_k,tb,t-1]{call_out(b,a)}",
     "deadline": _leaving("c"),
     "condition": "call_out(c,b)", "repair": "call_out(c,b)", "punishment": "call_out(c,b)"},
)

PLAZA_AGENTS = ("a", "b", "c")


def littering_specs() -> tuple[NormSpec, ...]:
    return tuple(NormSpec.from_dict(e) for e in LITTERING_NORMS)


def littering_steps(throws: int = 1, repair: bool = True, bystander_calls_out: bool = True,
                    third_party_calls_out: bool = False, litter: bool = True) -> list:
    """Trace of ``(atoms, acting)`` pairs.

    a, b and c enter the plaza; a throws ``throws`` cans; b calls a out or
    stays silent; a picks the litter up or not; then a, b and c leave in
    that order (c first calls b out when ``third_party_calls_out``).
    """
    present = {"a", "b", "c"}
    littered = False
    steps = [(set(), set())]

    def state(extra=(), acting=()):
        atoms = {f"in_plaza({x})" for x in present}
        if littered:
            atoms.add("litter(a)")
        steps.append((atoms | set(extra), set(acting)))

    state(acting="abc")
    for _ in range(throws if litter else 0):
        littered = True
        state(["throw_can(a)"], "a")
    if bystander_calls_out:
        state(["call_out(b,a)"], "b")
    else:
        state()
    if repair and littered:
        littered = False
        state(acting="a")
    else:
        state()
    for who in "abc":
        if who == "c" and third_party_calls_out:
            state(["call_out(c,b)"], "c")
        present.discard(who)
        state(acting=who)
    return [(frozenset(a), frozenset(w)) for a, w in steps]


def scenario_littering(**options) -> tuple[Model, tuple[NormSpec, ...]]:
    """The plaza trace as a linear model plus the four plaza norms."""
    steps = littering_steps(**options)
    model = linear_model(steps)
    model = Model(model.root, model.children, model.labels, model.valuation, {},
                  frozenset(PLAZA_AGENTS), frozenset("ijkl"))
    return model, littering_specs()


def metanorm_cascade_steps(third_party_calls_out: bool = True) -> list:
    return littering_steps(repair=False, bystander_calls_out=False,
                           third_party_calls_out=third_party_calls_out)


# -- rent ---------------------------------------------------------------------------

RENT_NORM = {
    "id": "rent", "kind": "obligation", "agent": "a",
    "activation": "lease(a)", "deactivation": "false", "deadline": "due(a)",
    "condition": "pays_rent(a)", "repair": "pays_rent(a)", "punishment": "pays_fine(a)",
}


def rent_specs() -> tuple[NormSpec, ...]:
    return (NormSpec.from_dict(RENT_NORM),)


def rent_steps(cycles: int = 3, missed=(1,)) -> list:
    """Lease signed, then ``cycles`` periods of work, payment, due date.

    Cycles listed in ``missed`` (0-based) skip the payment.
    """
    steps = [(frozenset(), frozenset()), (frozenset({"lease(a)"}), frozenset("a"))]
    for k in range(cycles):
        steps.append((frozenset({"work(a)"}), frozenset("a")))
        if k in missed:
            steps.append((frozenset(), frozenset()))
        else:
            steps.append((frozenset({"pays_rent(a)"}), frozenset("a")))
        steps.append((frozenset({"due(a)"}), frozenset()))
    return steps
