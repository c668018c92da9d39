"""Law checks shared by the property tests and the acceptance gate.

Each ``check_*`` function takes a model, an evaluator and a seeded RNG and
returns the list of counterexamples it found (empty when the property
holds on that model).  Formulas under the modalities are drawn from
:func:`body`; time parameters range over every interval
of every history.
"""
from collections import Counter

from normlog.syntax import (
    BACKWARD, FORWARD, And, Eq, Finally, Forall, Forbidden, Freeze, Globally, Implies, Less, Next,
    Not, Or, Resolved, Stit, TimeTerm, Viol,
)

from generators import NORM, random_base

TB, TV, TR = TimeTerm("x"), TimeTerm("y"), TimeTerm("z")

# premise instances seen per law, so the suites can rule out vacuous passes
HITS: Counter = Counter()


def viola(phi, agent="a"):
    return Viol("act", NORM, agent, TB, TV, phi)


def violo(phi, agent="a", tb=TB):
    return Viol("omit", NORM, agent, tb, TV, phi)


def viol(phi, agent="a"):
    return Viol("any", NORM, agent, TB, TV, phi)


def iff(a, b):
    return And(Implies(a, b), Implies(b, a))


def on_interval(body):
    """A G- t.(tb <= t <= tv -> body)."""
    t = TimeTerm("t")
    inside = And(Not(Less(t, TB)), Not(Less(TV, t)))
    return Forall(Globally(BACKWARD, Freeze("t", Implies(inside, body))))


def intervals(model):
    """(state, tau) for every state and every tb <= tv <= depth."""
    for s in model.states:
        d = model.depth(s)
        for tb in range(d + 1):
            for tv in range(tb, d + 1):
                yield s, {"x": tb, "y": tv}


def body(rng, depth=2):
    """A closed deontic-free formula (time comparisons only on frozen variables)."""
    return Freeze("t", random_base(rng, depth, ("t",), deontic=False))


def _pair(rng, depth=2):
    return body(rng, depth), body(rng, depth)


def equivalent(rng, phi):
    """A syntactically different formula equivalent to ``phi`` in every model."""
    chi = body(rng, 1)
    return rng.choice((
        Not(Not(phi)),
        And(phi, phi),
        And(phi, Or(chi, Not(chi))),
        Or(phi, And(phi, chi)),
        Implies(Not(phi), And(chi, Not(chi))),
    ))


def _valid(ev, model, phi, tau=None):
    return all(ev.state(s, phi, tau or {}) for s in model.states)


def check_valid_condition(model, ev, rng, rounds=1):
    """A formula true everywhere never yields a violation, repair or punishment."""
    bad = []
    for _ in range(rounds):
        phi = body(rng)
        phi = Or(phi, Not(phi)) if rng.random() < 0.5 else phi
        if not _valid(ev, model, phi):
            continue
        HITS["valid-condition"] += 1
        for s, tau in intervals(model):
            for agent in ("a", "b"):
                forms = [viola(phi, agent), violo(phi, agent)]
                forms += [Resolved(k, NORM, agent, TB, TV, TR, phi) for k in ("repair", "punish")]
                for f in forms:
                    for tr in range(tau["y"], model.depth(s) + 1):
                        if ev.state(s, f, {**tau, "z": tr}):
                            bad.append((s, tau, f))
    return bad


def check_act_omit_exclusive(model, ev, rng, rounds=1):
    """No state is in both an act and an omission violation of the same norm."""
    bad = []
    for _ in range(rounds):
        phi = body(rng)
        for s, tau in intervals(model):
            act, omit = ev.state(s, viola(phi), tau), ev.state(s, violo(phi), tau)
            HITS["act-omit-exclusive"] += act or omit
            if act and omit:
                bad.append((s, tau, phi))
    return bad


def check_omission_strengthening(model, ev, rng, rounds=1):
    """VIOLO(phi) and psi -> phi on [tb, tv] give VIOLO(psi)."""
    bad = []
    for _ in range(rounds):
        phi, psi = _pair(rng)
        premise = And(violo(phi), on_interval(Implies(psi, phi)))
        goal = violo(psi)
        for s, tau in intervals(model):
            if ev.state(s, premise, tau):
                HITS["omission-strengthening"] += 1
                if not ev.state(s, goal, tau):
                    bad.append((s, tau, phi, psi))
    return bad


def check_act_equivalence(model, ev, rng, rounds=1):
    """VIOLA(phi) and phi <-> psi on [tb, tv] give VIOLA(psi)."""
    bad = []
    for _ in range(rounds):
        phi, psi = _pair(rng)
        if rng.random() < 0.5:
            psi = equivalent(rng, phi)
        premise = And(viola(phi), on_interval(iff(phi, psi)))
        for s, tau in intervals(model):
            if ev.state(s, premise, tau):
                HITS["act-equivalence"] += 1
                if not ev.state(s, viola(psi), tau):
                    bad.append((s, tau, phi, psi))
    return bad


def check_omission_equivalence(model, ev, rng, rounds=1):
    """VIOLO(phi) gives VIOLO(psi) for psi equivalent to phi."""
    bad = []
    for _ in range(rounds):
        phi = body(rng)
        psi = equivalent(rng, phi)
        for s, tau in intervals(model):
            if ev.state(s, violo(phi), tau):
                HITS["omission-equivalence"] += 1
                if not ev.state(s, violo(psi), tau):
                    bad.append((s, tau, phi, psi))
    return bad


def check_connectives(model, ev, rng, rounds=1):
    """Items (i), (v) and (viii) of the connective laws."""
    bad = []
    for _ in range(rounds):
        phi, psi = _pair(rng)
        laws = {
            "i": (And(viola(phi), viola(psi)), viola(And(phi, psi))),
            "v": (violo(phi), violo(And(phi, psi))),
            "viii": (violo(Or(phi, psi)), violo(phi)),
        }
        for s, tau in intervals(model):
            for name, (pre, post) in laws.items():
                if ev.state(s, pre, tau):
                    HITS[f"connectives-{name}"] += 1
                    if not ev.state(s, post, tau):
                        bad.append((name, s, tau, phi, psi))
    return bad


def check_disjunct_choice(model, ev, rng, rounds=1):
    """An act violation of a disjunction is one of the disjunct that was acted on."""
    bad = []
    for _ in range(rounds):
        phi, psi = _pair(rng)
        t = TimeTerm("t")
        acted = Forall(Finally(BACKWARD, And(Stit("a", phi), Forall(Next(FORWARD, Freeze(
            "t", Eq(TV, t)))))))
        pre = And(viola(Or(phi, psi)), acted)
        for s, tau in intervals(model):
            if ev.state(s, pre, tau):
                HITS["disjunct-choice"] += 1
                if not ev.state(s, viola(phi), tau):
                    bad.append((s, tau, phi, psi))
    return bad


def check_persistence(model, ev, rng, rounds=1):
    """A violation holding at a state holds at every later state."""
    bad = []
    for _ in range(rounds):
        phi = body(rng)
        f = viol(phi, rng.choice("ab"))
        for s, tau in intervals(model):
            if ev.state(s, f, tau):
                HITS["persistence"] += 1
                for leaf in model.leaves_below(s):
                    for x in model.history(leaf)[model.depth(s):]:
                        if not ev.state(x, f, tau):
                            bad.append((s, x, tau, phi))
    return bad


def check_freshness(model, ev, rng, rounds=1):
    """``t.VIOL[i,a,tb,t]`` holds exactly where the violation time is now."""
    bad = []
    for _ in range(rounds):
        phi = body(rng)
        agent = rng.choice("ab")
        probe = Freeze("t", Viol("any", NORM, agent, TB, TimeTerm("t"), phi))
        for s, tau in intervals(model):
            d = model.depth(s)
            now = ev.state(s, viol(phi, agent), {**tau, "y": d})
            HITS["freshness"] += now
            if ev.state(s, probe, tau) != now:
                bad.append(("probe", s, tau, phi))
            tv = tau["y"]
            if tv < d and ev.state(s, viol(phi, agent), tau):
                anchor = model.history(s)[tv]
                if not ev.state(anchor, probe, tau):
                    bad.append(("origin", s, tau, phi))
    return bad


def check_prohibition_laws(model, ev, rng, rounds=1):
    """FORB(phi) with psi -> phi gives FORB(psi); FORB(phi | psi) splits."""
    bad = []
    for _ in range(rounds):
        phi, psi = _pair(rng)
        # E_a of a formula true everywhere is false, so FORB of it is vacuous
        stronger = _valid(ev, model, Implies(psi, phi)) and not _valid(ev, model, phi)
        split = not _valid(ev, model, Or(phi, psi))
        for s in model.states:
            for tb in range(model.depth(s) + 1):
                tau = {"x": tb}
                if stronger and ev.state(s, Stit("a", psi), tau):
                    HITS["prohibition-strengthen"] += 1
                if stronger and ev.state(s, Forbidden(NORM, "a", TB, phi), tau) and not ev.state(s, Forbidden(NORM, "a", TB, psi),
                                                                 tau):
                    bad.append(("strengthen", s, tau, phi, psi))
                if split and ev.state(s, Stit("a", Or(phi, psi)), tau):
                    HITS["prohibition-split"] += 1
                if split and ev.state(s, Forbidden(NORM, "a", TB, Or(phi, psi)), tau) and not ev.state(
                        s, And(Forbidden(NORM, "a", TB, phi), Forbidden(NORM, "a", TB, psi)), tau):
                    bad.append(("split", s, tau, phi, psi))
    return bad


UNIVERSAL = {
    "valid-condition": check_valid_condition,
    "act-omit-exclusive": check_act_omit_exclusive,
    "omission-strengthening": check_omission_strengthening,
    "act-equivalence": check_act_equivalence,
    "omission-equivalence": check_omission_equivalence,
    "connectives": check_connectives,
    "disjunct-choice": check_disjunct_choice,
    "persistence": check_persistence,
    "freshness": check_freshness,
    "prohibition": check_prohibition_laws,
}
