"""Violation, resolution, prohibition and deadline-obligation modalities.

A violation with violation time ``tv`` is a property of the history: every
path through the current state shares the ancestor at depth ``tv``, so all
violation conditions are checked at that *anchor* state.  This makes
violations persist into the future by construction.

Each check returns ``(truth, clause)`` where ``clause`` names the first
condition that failed (``None`` on success).  Clause labels:

``VIOLA``  interval, a (marked act one step earlier), b (condition implies V)
``VIOLO``  interval, a (V and D at tv), b (V implies not condition),
           c (no action since last deadline or tb), d (deadlines outnumber
           earlier violations plus actions)
``RVIOL``/``PVIOL``  interval, a (violation), b (resolving action at tr),
           c (enough resolving actions)
``FORB``   successor (some successor lacks the fresh act violation)
``OBL``    deadline-unreached, deadline-now, fresh-violation, missing-violation
"""
from __future__ import annotations

from .evaluator import NegativeTime, eval_time_term, _bindings
from .syntax import Forbidden, Obliged, Resolved, Special, Stit, Viol

CLAUSES = {
    "act": ("interval", "a", "b"),
    "omit": ("interval", "a", "b", "c", "d"),
    "repair": ("interval", "a", "b", "c"),
    "punish": ("interval", "a", "b", "c"),
    "forbidden": ("successor",),
    "obliged": ("deadline-unreached", "deadline-now", "fresh-violation", "missing-violation"),
}


class RecursionGuard(RuntimeError):
    """Raised when a modality re-enters itself; signals an implementation bug."""


def _times(tau, *terms):
    try:
        return tuple(eval_time_term(tau, t) for t in terms)
    except NegativeTime:
        return None


def evaluate(ev, s, node, tau) -> tuple[bool, str | None]:
    """Dispatch a deontic node at state ``s``."""
    if isinstance(node, Viol):
        times = _times(tau, node.tb, node.tv)
        if times is None:
            return False, "interval"
        tb, tv = times
        kinds = ("act", "omit") if node.kind == "any" else (node.kind,)
        first_fail = None
        for kind in kinds:
            ok, clause = violation(ev, s, kind, node.norm, node.agent, tb, tv, node.body, tau)
            if ok:
                return True, None
            first_fail = first_fail or clause
        return False, first_fail
    if isinstance(node, Resolved):
        times = _times(tau, node.tb, node.tv, node.tr)
        if times is None:
            return False, "interval"
        return resolved(ev, s, node.kind, node.norm, node.agent, *times, node.body, tau)
    if isinstance(node, Forbidden):
        times = _times(tau, node.tb)
        if times is None:
            return False, "successor"
        return forbidden(ev, s, node.norm, node.agent, times[0], node.body, tau)
    if isinstance(node, Obliged):
        times = _times(tau, node.tb)
        if times is None:
            return False, "deadline-unreached"
        return obliged(ev, s, node.norm, node.agent, times[0], node.body, node.deadline, tau)
    raise TypeError(f"not a deontic node: {node!r}")


def _special(ev, kind, norm, agent, s) -> bool:
    return ev._state(s, Special(kind, norm, agent), {})


def _does(ev, s, agent, phi, tau) -> bool:
    return ev._state(s, Stit(agent, phi), tau)


def _memo(ev, key, compute):
    hit = ev.deontic_memo.get(key)
    if hit is not None:
        return hit
    if key in ev.deontic_active:
        raise RecursionGuard(f"modality re-entered itself: {key[:2]}")
    ev.deontic_active.add(key)
    try:
        value = compute()
    finally:
        ev.deontic_active.discard(key)
    ev.deontic_memo[key] = value
    return value


# -- violations ---------------------------------------------------------------

def violation(ev, s, kind, norm, agent, tb, tv, phi, tau):
    """``VIOLA``/``VIOLO`` at ``s`` with numeric ``tb``/``tv``."""
    d = ev.model.depths[s]
    if tb > tv or tv > d:
        return False, "interval"
    anchor = ev.model.history(s)[tv] if tv < d else s
    return violation_at(ev, anchor, kind, norm, agent, tb, phi, tau)


def violation_at(ev, anchor, kind, norm, agent, tb, phi, tau):
    """Violation whose violation time is the depth of ``anchor``."""
    key = (kind, anchor, norm, agent, tb, phi, _bindings(phi, tau))
    if kind == "act":
        return _memo(ev, key, lambda: _viol_act(ev, anchor, norm, agent, tb, phi, tau))
    return _memo(ev, key, lambda: _viol_omit(ev, anchor, norm, agent, tb, phi, tau))


def _viol_act(ev, anchor, norm, agent, tb, phi, tau):
    hist = ev.model.history(anchor)
    tv = len(hist) - 1
    if tb > tv:
        return False, "interval"
    if not (tv > 0 and _special(ev, "V", norm, agent, anchor)
            and _does(ev, hist[tv - 1], agent, phi, tau)):
        return False, "a"
    for k in range(tb, tv + 1):
        if ev._state(hist[k], phi, tau) and not _special(ev, "V", norm, agent, hist[k]):
            return False, "b"
    return True, None


def _viol_omit(ev, anchor, norm, agent, tb, phi, tau):
    hist = ev.model.history(anchor)
    tv = len(hist) - 1
    if tb > tv:
        return False, "interval"
    if not (_special(ev, "V", norm, agent, anchor) and _special(ev, "D", norm, agent, anchor)):
        return False, "a"
    for k in range(tb, tv + 1):
        if _special(ev, "V", norm, agent, hist[k]) and ev._state(hist[k], phi, tau):
            return False, "b"
    # backwards until, left operand on the open interval (witness, tv)
    found = False
    for k in range(tv - 1, -1, -1):
        if k == tb or _special(ev, "D", norm, agent, hist[k]):
            found = True
            break
        if _does(ev, hist[k], agent, phi, tau):
            break
    if not found:
        return False, "c"
    deadlines = sum(_special(ev, "D", norm, agent, hist[k]) for k in range(tb, tv + 1))
    handled = 0
    for k in range(tb, tv + 1):
        if _does(ev, hist[k], agent, phi, tau):
            handled += 1
        elif k < tv and violation_at(ev, hist[k], "omit", norm, agent, tb, phi, tau)[0]:
            handled += 1
    if deadlines <= handled:
        return False, "d"
    return True, None


def viol_act(ev, s, norm, agent, tb, tv, phi, tau=None):
    return violation(ev, s, "act", norm, agent, tb, tv, phi, dict(tau or {}))[0]


def viol_omit(ev, s, norm, agent, tb, tv, phi, tau=None):
    return violation(ev, s, "omit", norm, agent, tb, tv, phi, dict(tau or {}))[0]


def viol_either(ev, s, norm, agent, tb, tv, phi, tau=None):
    return viol_act(ev, s, norm, agent, tb, tv, phi, tau) or \
        viol_omit(ev, s, norm, agent, tb, tv, phi, tau)


# -- repair and punishment ----------------------------------------------------------

def resolved(ev, s, kind, norm, agent, tb, tv, tr, phi, tau):
    """``RVIOL`` (kind ``repair``) or ``PVIOL`` (kind ``punish``)."""
    d = ev.model.depths[s]
    if tb > tv or tv > tr:
        return False, "interval"
    key = ("resolved", kind, s, norm, agent, tb, tv, tr, phi, _bindings(phi, tau))
    return _memo(ev, key, lambda: _resolved(ev, s, d, kind, norm, agent, tb, tv, tr, phi, tau))


def _resolved(ev, s, d, kind, norm, agent, tb, tv, tr, phi, tau):
    marker = Special("R" if kind == "repair" else "P", norm, agent)
    if tv > d or not _either_at(ev, s, norm, agent, tb, tv, phi, tau):
        return False, "a"
    hist = ev.model.history(s)
    if not (tr < d and _does(ev, hist[tr], agent, marker, {})):
        return False, "b"
    actions = sum(_does(ev, hist[k], agent, marker, {}) for k in range(tv, tr + 1))
    pending = 0
    for k in range(tb, tv + 1):
        if not _either_at(ev, hist[k], norm, agent, tb, k, phi, tau):
            continue
        # F+ on the path cut at tv: a later resolution of the violation born at k
        if any(resolved(ev, hist[i], kind, norm, agent, tb, k, i, phi, tau)[0]
               for i in range(k + 1, tv + 1)):
            continue
        pending += 1
    if actions < pending:
        return False, "c"
    return True, None


def _either_at(ev, s, norm, agent, tb, tv, phi, tau) -> bool:
    return (violation(ev, s, "act", norm, agent, tb, tv, phi, tau)[0]
            or violation(ev, s, "omit", norm, agent, tb, tv, phi, tau)[0])


def viol_resolved(ev, s, kind, norm, agent, tb, tv, tr, phi, tau=None):
    return resolved(ev, s, kind, norm, agent, tb, tv, tr, phi, dict(tau or {}))[0]


# -- prohibition and obligation ------------------------------------------------------

def forbidden(ev, s, norm, agent, tb, phi, tau):
    if not _does(ev, s, agent, phi, tau):
        return True, None
    for c in ev.model.children[s]:
        if not violation_at(ev, c, "act", norm, agent, tb, phi, tau)[0]:
            return False, "successor"
    return True, None


def obliged(ev, s, norm, agent, tb, phi, deadline, tau):
    m = ev.model
    if ev._state(s, deadline, tau):
        return False, "deadline-now"

    def fresh(x):
        return violation_at(ev, x, "omit", norm, agent, tb, phi, tau)[0]

    # walk every branch below s up to its first deadline state
    stack = [(s, False)]
    while stack:
        x, acted = stack.pop()
        if fresh(x):
            return False, "fresh-violation"
        acted = acted or _does(ev, x, agent, phi, tau)
        kids = m.children[x]
        if not kids:
            return False, "deadline-unreached"
        for c in kids:
            if ev._state(c, deadline, tau):
                if not acted and not fresh(c):
                    return False, "missing-violation"
            else:
                stack.append((c, acted))
    return True, None


def forbidden_at(ev, s, norm, agent, tb, phi, tau=None):
    return forbidden(ev, s, norm, agent, tb, phi, dict(tau or {}))[0]


def obliged_at(ev, s, norm, agent, tb, phi, deadline, tau=None):
    return obliged(ev, s, norm, agent, tb, phi, deadline, dict(tau or {}))[0]
