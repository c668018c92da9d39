"""Brute-force reference semantics used to cross-check the evaluator.

Everything is computed from the raw model fields by quantifying over explicit
root-to-leaf paths, with no vectors, kernels or anchoring shortcuts.  The
deontic clauses follow the readings documented in ``normlog.deontic``:
intervals with ``tb > tv`` are empty, negative times make a modality false,
the backwards-until of VIOLO condition (c) looks back from position ``tv``
over the open interval, and its counting term skips position ``tv`` itself.
"""
from normlog.syntax import (
    And, Atom, Const, Eq, Exists, Finally, Forall, Forbidden, Freeze, Globally, Implies, Less,
    Lift, Next, Not, Obliged, Or, PAnd, PFreeze, PNot, Resolved, Special, Stit, Until, Viol,
)


class Oracle:
    def __init__(self, model):
        self.m = model
        self.kids = {s: list(model.children.get(s, ())) for s in model.order}
        self.depth = {}
        self.parent = {}
        stack = [(model.root, 0)]
        while stack:
            s, d = stack.pop()
            self.depth[s] = d
            for c in self.kids[s]:
                self.parent[c] = s
                stack.append((c, d + 1))
        self.all_paths = []
        self._collect([model.root])
        self.memo = {}

    def _collect(self, prefix):
        kids = self.kids[prefix[-1]]
        if not kids:
            self.all_paths.append(tuple(prefix))
        for c in kids:
            self._collect(prefix + [c])

    def paths(self, s):
        d = self.depth[s]
        return [p for p in self.all_paths if len(p) > d and p[d] == s]

    # -- state formulas ----------------------------------------------------------

    def state(self, s, phi, tau):
        key = (s, phi, tuple(sorted(tau.items())))
        if key not in self.memo:
            self.memo[key] = self._state(s, phi, dict(tau))
        return self.memo[key]

    def _state(self, s, phi, tau):
        m = self.m
        if isinstance(phi, Const):
            return phi.value
        if isinstance(phi, Atom):
            return phi.key in m.valuation.get(s, ())
        if isinstance(phi, Less):
            return _val(tau, phi.left) < _val(tau, phi.right)
        if isinstance(phi, Eq):
            return _val(tau, phi.left) == _val(tau, phi.right)
        if isinstance(phi, Not):
            return not self.state(s, phi.body, tau)
        if isinstance(phi, And):
            return self.state(s, phi.left, tau) and self.state(s, phi.right, tau)
        if isinstance(phi, Or):
            return self.state(s, phi.left, tau) or self.state(s, phi.right, tau)
        if isinstance(phi, Implies):
            return (not self.state(s, phi.left, tau)) or self.state(s, phi.right, tau)
        if isinstance(phi, Freeze):
            return self.state(s, phi.body, {**tau, phi.var: self.depth[s]})
        if isinstance(phi, Special):
            return s in m.annotations[phi.kind].get((phi.norm, phi.agent), ())
        if isinstance(phi, Stit):
            return self.stit(s, phi.agent, phi.body, tau)
        if isinstance(phi, Exists):
            return any(self.path(p, self.depth[s], phi.body, tau) for p in self.paths(s))
        if isinstance(phi, Forall):
            return all(self.path(p, self.depth[s], phi.body, tau) for p in self.paths(s))
        if isinstance(phi, (Viol, Resolved, Forbidden, Obliged)):
            return self.modal(s, phi, tau)
        if isinstance(phi, (Lift, PNot, PAnd, PFreeze)):
            raise TypeError("path formula used as state formula")
        raise TypeError(phi)

    def modal(self, s, phi, tau):
        terms = [getattr(phi, f) for f in ("tb", "tv", "tr") if hasattr(phi, f)]
        times = [oracle_modal_time(tau, t) for t in terms]
        if None in times:  # negative time
            return False
        if isinstance(phi, Viol):
            kinds = ("act", "omit") if phi.kind == "any" else (phi.kind,)
            return any(self.viol(s, k, phi.norm, phi.agent, *times, phi.body, tau) for k in kinds)
        if isinstance(phi, Resolved):
            return self.resolved(s, phi.kind, phi.norm, phi.agent, *times, phi.body, tau)
        if isinstance(phi, Forbidden):
            return self.forbidden(s, phi.norm, phi.agent, *times, phi.body, tau)
        return self.obliged(s, phi.norm, phi.agent, *times, phi.body, phi.deadline, tau)

    def stit(self, s, a, phi, tau):
        kids = self.kids[s]
        if not kids:
            return False
        if not all(a in self.m.labels.get((s, c), ()) for c in kids):
            return False
        if not all(self.state(c, phi, tau) for c in kids):
            return False
        # M, w |= not A G+ phi
        return not all(self.state(p[k], phi, tau) for p in self.all_paths for k in range(len(p)))

    # -- path formulas ------------------------------------------------------------

    def path(self, sigma, j, alpha, tau):
        if isinstance(alpha, Lift):
            return self.state(sigma[j], alpha.body, tau)
        if isinstance(alpha, PNot):
            return not self.path(sigma, j, alpha.body, tau)
        if isinstance(alpha, PAnd):
            return self.path(sigma, j, alpha.left, tau) and self.path(sigma, j, alpha.right, tau)
        if isinstance(alpha, PFreeze):
            return self.path(sigma, j, alpha.body, {**tau, alpha.var: j})
        n = len(sigma)
        fwd = getattr(alpha, "direction", None) == "+"
        if isinstance(alpha, Next):
            i = j + 1 if fwd else j - 1
            return 0 <= i < n and self.path(sigma, i, alpha.body, tau)
        if isinstance(alpha, Finally):
            rng = range(j + 1, n) if fwd else range(0, j)
            return any(self.path(sigma, i, alpha.body, tau) for i in rng)
        if isinstance(alpha, Globally):
            rng = range(j, n) if fwd else range(0, j + 1)
            return all(self.path(sigma, i, alpha.body, tau) for i in rng)
        if isinstance(alpha, Until):
            if fwd:
                return any(self.path(sigma, i, alpha.right, tau)
                           and all(self.path(sigma, k, alpha.left, tau) for k in range(j, i))
                           for i in range(j + 1, n))
            return any(self.path(sigma, i, alpha.right, tau)
                       and all(self.path(sigma, k, alpha.left, tau) for k in range(i + 1, j + 1))
                       for i in range(0, j))
        # a state formula in path position
        return self.state(sigma[j], alpha, tau)

    def count(self, sigma, i, j, alpha, tau):
        cut = tuple(sigma[: j + 1])
        return sum(1 for k in range(i, j + 1) if self.path(cut, k, alpha, tau))

    # -- deontic ----------------------------------------------------------------------

    def _sp(self, kind, i, a, s):
        return s in self.m.annotations[kind].get((i, a), ())

    def viol(self, s, kind, i, a, tb, tv, phi, tau):
        if tb is None or tv is None or tb > tv:
            return False
        d = self.depth[s]
        paths = self.paths(s)
        # (a): the marked state is at position tv on every path through s (t.(tv=t) ∨ A F- ...)
        for p in paths:
            hits = [k for k in range(0, d + 1) if k == tv]
            if not hits:
                return False
            x = p[tv]
            if kind == "act":
                if not (self._sp("V", i, a, x) and tv > 0 and self.stit(p[tv - 1], a, phi, tau)):
                    return False
            elif not (self._sp("V", i, a, x) and self._sp("D", i, a, x)):
                return False
        for p in paths:
            for k in range(0, d + 1):
                if not tb <= k <= tv:
                    continue
                if kind == "act" and self.state(p[k], phi, tau) and not self._sp("V", i, a, p[k]):
                    return False
                if kind == "omit" and self._sp("V", i, a, p[k]) and self.state(p[k], phi, tau):
                    return False
        if kind == "act":
            return True
        for p in paths:
            # (c) A (¬E_a phi ∧ ¬D) U- (D ∨ t.(tb = t)) looking back from tv
            ok = any((self._sp("D", i, a, p[w]) or w == tb)
                     and all(not self.stit(p[k], a, phi, tau) and not self._sp("D", i, a, p[k])
                             for k in range(w + 1, tv))
                     for w in range(0, tv))
            if not ok:
                return False
            # (d) counting on the path cut at tv
            deadlines = sum(self._sp("D", i, a, p[k]) for k in range(tb, tv + 1))
            handled = sum(1 for k in range(tb, tv + 1)
                          if self.stit(p[k], a, phi, tau)
                          or (k < tv and self.viol(p[k], "omit", i, a, tb, k, phi, tau)))
            if not deadlines > handled:
                return False
        return True

    def resolved(self, s, kind, i, a, tb, tv, tr, phi, tau):
        if tb > tv or tv > tr:
            return False
        if not (self.viol(s, "act", i, a, tb, tv, phi, tau)
                or self.viol(s, "omit", i, a, tb, tv, phi, tau)):
            return False
        marker = Special("R" if kind == "repair" else "P", i, a)
        d = self.depth[s]
        for p in self.paths(s):
            # A F- (t.(tr = t) ∧ E_a marker), strict past
            if not any(k == tr and self.stit(p[k], a, marker, tau) for k in range(0, d)):
                return False
            actions = sum(self.stit(p[k], a, marker, tau) for k in range(tv, tr + 1))
            pending = 0
            for k in range(tb, tv + 1):
                born = (self.viol(p[k], "act", i, a, tb, k, phi, tau)
                        or self.viol(p[k], "omit", i, a, tb, k, phi, tau))
                # ¬F+ t'.resolved(tb, k, t') on the path cut at tv
                later = any(self.resolved(p[x], kind, i, a, tb, k, x, phi, tau)
                            for x in range(k + 1, tv + 1))
                if born and not later:
                    pending += 1
            if actions < pending:
                return False
        return True

    def forbidden(self, s, i, a, tb, phi, tau):
        if not self.stit(s, a, phi, tau):
            return True
        d = self.depth[s]
        for p in self.paths(s):
            if d + 1 >= len(p):
                return False
            if not self.viol(p[d + 1], "act", i, a, tb, d + 1, phi, tau):
                return False
        return True

    def obliged(self, s, i, a, tb, phi, delta, tau):
        d = self.depth[s]
        for p in self.paths(s):
            good = False
            for j in range(d + 1, len(p)):
                if not self.state(p[j], delta, tau):
                    continue
                prefix = range(d, j)
                if not all(not self.viol(p[k], "omit", i, a, tb, k, phi, tau)
                           and not self.state(p[k], delta, tau) for k in prefix):
                    continue
                acted = any(self.stit(p[k], a, phi, tau) for k in prefix)
                if not acted and not self.viol(p[j], "omit", i, a, tb, j, phi, tau):
                    continue
                good = True
                break
            if not good:
                return False
        return True


def _val(tau, term):
    return tau[term.var] + term.offset


def oracle_modal_time(tau, term):
    value = _val(tau, term)
    return None if value < 0 else value
