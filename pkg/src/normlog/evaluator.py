"""Satisfaction relations for state formulas, path formulas and counting.

Path formulas are evaluated a whole path at a time: :meth:`Evaluator.vector`
returns one truth byte per position and the temporal operators are applied
by the kernels in :mod:`normlog.kernels`.  Results are memoized per
evaluator on the bindings that are actually free in the subformula, so an
evaluator must not outlive the model it was created for.
"""
from __future__ import annotations

from typing import Mapping

from . import kernels
from .model import Model, ModelError, paths_through
from .syntax import (
    And, Atom, Const, Eq, Exists, Forall, Forbidden, Formula, Freeze, Less, Lift,
    Next, Not, Obliged, Or, Implies, PAnd, PFreeze, PNot, Finally, Globally, Resolved,
    Special, Stit, TimeTerm, Until, Viol, free_time_variables, normalize_path, normalize_state,
)

Assignment = Mapping[str, int]


class EvaluationError(ValueError):
    pass


class UnboundVariable(EvaluationError):
    pass


class NegativeTime(EvaluationError):
    pass


def eval_time_term(tau: Assignment, term: TimeTerm) -> int:
    try:
        value = tau[term.var] + term.offset
    except KeyError:
        raise UnboundVariable(f"unbound time variable {term.var!r}") from None
    if value < 0:
        raise NegativeTime(f"negative time {term} = {value}")
    return value


def _term(tau: Assignment, term: TimeTerm) -> int:
    """Integer value of a term; comparisons may go below zero."""
    try:
        return tau[term.var] + term.offset
    except KeyError:
        raise UnboundVariable(f"unbound time variable {term.var!r}") from None


def _bindings(formula, tau) -> tuple:
    free = free_time_variables(formula)
    if not free:
        return ()
    try:
        return tuple(sorted((v, tau[v]) for v in free))
    except KeyError:
        missing = sorted(v for v in free if v not in tau)
        raise UnboundVariable(f"unbound time variable(s) {missing}") from None


class Evaluator:
    """Model checker for one immutable model."""

    def __init__(self, model: Model):
        self.model = model
        self._state_memo: dict = {}
        self._vector_memo: dict = {}
        self._paths: dict = {}
        self._somewhere_false: dict = {}
        self.deontic_memo: dict = {}
        self.deontic_active: set = set()
        self.misses = 0

    # -- public entry points ---------------------------------------------------

    def state(self, s, phi, tau: Assignment | None = None) -> bool:
        self.model.check_state(s)
        return self._state(s, normalize_state(phi), dict(tau or {}))

    def path(self, path, j: int, alpha, tau: Assignment | None = None) -> bool:
        if not 0 <= j < len(path):
            raise IndexError(f"position {j} out of range for path of length {len(path)}")
        return bool(self.vector(tuple(path), normalize_path(alpha), dict(tau or {}))[j])

    def count(self, path, i: int, j: int, alpha, tau: Assignment | None = None) -> int:
        """``|{k : i <= k <= j and path cut at j satisfies alpha at k}|``."""
        if not 0 <= i <= j < len(path):
            raise IndexError(f"count range [{i}, {j}] invalid for path of length {len(path)}")
        vec = self.vector(tuple(path[: j + 1]), normalize_path(alpha), dict(tau or {}))
        return kernels.count_range(vec, i, j)

    def paths_through(self, s) -> list:
        cached = self._paths.get(s)
        if cached is None:
            cached = self._paths[s] = paths_through(self.model, s)
        return cached

    # -- state formulas ----------------------------------------------------------

    def _state(self, s, phi, tau) -> bool:
        key = (s, phi, _bindings(phi, tau))
        hit = self._state_memo.get(key)
        if hit is not None:
            return hit
        self.misses += 1
        value = self._compute_state(s, phi, tau)
        self._state_memo[key] = value
        return value

    def _compute_state(self, s, phi, tau) -> bool:
        m = self.model
        if isinstance(phi, Atom):
            return m.holds_atom(s, phi.key)
        if isinstance(phi, Const):
            return phi.value
        if isinstance(phi, Not):
            return not self._state(s, phi.body, tau)
        if isinstance(phi, And):
            return self._state(s, phi.left, tau) and self._state(s, phi.right, tau)
        if isinstance(phi, Less):
            return _term(tau, phi.left) < _term(tau, phi.right)
        if isinstance(phi, Eq):
            return _term(tau, phi.left) == _term(tau, phi.right)
        if isinstance(phi, Freeze):
            return self._state(s, phi.body, {**tau, phi.var: m.depths[s]})
        if isinstance(phi, Special):
            self._check_ids(phi.norm, phi.agent)
            return m.annotated(phi.kind, phi.norm, phi.agent, s)
        if isinstance(phi, Stit):
            return self.stit(s, phi.agent, phi.body, tau)
        if isinstance(phi, (Exists, Forall)):
            d = m.depths[s]
            results = (self.vector(p, phi.body, tau)[d] for p in self.paths_through(s))
            return any(results) if isinstance(phi, Exists) else all(results)
        if isinstance(phi, (Viol, Resolved, Forbidden, Obliged)):
            from . import deontic

            return deontic.evaluate(self, s, phi, tau)[0]
        if isinstance(phi, (Or, Implies, Lift, PNot, PAnd, PFreeze)):
            return self._state(s, normalize_state(phi), tau)
        raise EvaluationError(f"not a state formula: {phi!r}")

    def _check_ids(self, norm, agent):
        m = self.model
        if m.norms and norm not in m.norms:
            raise ModelError(f"unknown norm {norm!r}")
        if m.agents and agent not in m.agents:
            raise ModelError(f"unknown agent {agent!r}")

    def stit(self, s, agent, phi, tau) -> bool:
        """``E_a phi``: every successor satisfies phi via an a-labelled
        transition, and phi fails somewhere in the model."""
        m = self.model
        if m.agents and agent not in m.agents:
            raise ModelError(f"unknown agent {agent!r}")
        kids = m.children[s]
        if not kids:
            return False
        for c in kids:
            if agent not in m.label(s, c):
                return False
        for c in kids:
            if not self._state(c, phi, tau):
                return False
        return self.fails_somewhere(phi, tau)

    def fails_somewhere(self, phi, tau) -> bool:
        """The root does not satisfy ``A G+ phi``."""
        key = (phi, _bindings(phi, tau))
        hit = self._somewhere_false.get(key)
        if hit is None:
            hit = any(not self._state(x, phi, tau) for x in self.model.order)
            self._somewhere_false[key] = hit
        return hit

    # -- path formulas -----------------------------------------------------------

    def vector(self, path: tuple, alpha, tau) -> bytearray:
        key = (path, alpha, _bindings(alpha, tau))
        hit = self._vector_memo.get(key)
        if hit is not None:
            return hit
        self.misses += 1
        value = self._compute_vector(path, alpha, tau)
        self._vector_memo[key] = value
        return value

    def _compute_vector(self, path, alpha, tau) -> bytearray:
        if isinstance(alpha, Lift):
            return bytearray(1 if self._state(s, alpha.body, tau) else 0 for s in path)
        if isinstance(alpha, PNot):
            return bytearray(1 - b for b in self.vector(path, alpha.body, tau))
        if isinstance(alpha, PAnd):
            left = self.vector(path, alpha.left, tau)
            right = self.vector(path, alpha.right, tau)
            return bytearray(a & b for a, b in zip(left, right))
        if isinstance(alpha, PFreeze):
            return bytearray(self.vector(path, alpha.body, {**tau, alpha.var: k})[k]
                             for k in range(len(path)))
        forward = getattr(alpha, "direction", None) == "+"
        if isinstance(alpha, Until):
            left = self.vector(path, _as_path(alpha.left), tau)
            right = self.vector(path, _as_path(alpha.right), tau)
            op = kernels.until_forward if forward else kernels.until_backward
            return op(left, right)
        if isinstance(alpha, (Next, Finally, Globally)):
            body = self.vector(path, _as_path(alpha.body), tau)
            if isinstance(alpha, Next):
                op = kernels.next_forward if forward else kernels.next_backward
            elif isinstance(alpha, Finally):
                op = kernels.finally_forward if forward else kernels.finally_backward
            else:
                op = kernels.globally_forward if forward else kernels.globally_backward
            return op(body)
        if isinstance(alpha, Formula):
            return self._compute_vector(path, Lift(alpha), tau)
        raise EvaluationError(f"not a path formula: {alpha!r}")


def _as_path(node):
    from .syntax import PathFormula

    return node if isinstance(node, PathFormula) else Lift(node)


# -- module-level API -----------------------------------------------------------

def eval_state(model: Model, state, phi, tau: Assignment | None = None) -> bool:
    return Evaluator(model).state(state, phi, tau)


def eval_path(model: Model, path, j: int, alpha, tau: Assignment | None = None) -> bool:
    return Evaluator(model).path(path, j, alpha, tau)


def eval_stit(model: Model, state, agent, phi, tau: Assignment | None = None) -> bool:
    model.check_state(state)
    return Evaluator(model).stit(state, agent, phi, dict(tau or {}))
