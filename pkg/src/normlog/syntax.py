"""Formula AST, DSL parser and printer.

State formulas and path formulas live in separate node families.  The parser
accepts a single mixed surface syntax and sorts it: any subformula without a
temporal operator outside a path quantifier becomes a state formula, lifted
into path position with :class:`Lift` where needed.  ``or``, ``->`` and the
combined ``VIOL`` modality are sugar and are rewritten by :func:`normalize`.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

FORWARD = "+"
BACKWARD = "-"

SPECIAL_KINDS = ("V", "D", "R", "P")


@dataclass(frozen=True)
class TimeTerm:
    """``var``, ``var + offset`` or ``var - offset`` (negative offset)."""

    var: str
    offset: int = 0

    def __str__(self):
        if self.offset > 0:
            return f"{self.var}+{self.offset}"
        if self.offset < 0:
            return f"{self.var}-{-self.offset}"
        return self.var


class Formula:
    __slots__ = ()


class StateFormula(Formula):
    __slots__ = ()


class PathFormula(Formula):
    __slots__ = ()


# -- state formulas ---------------------------------------------------------

@dataclass(frozen=True)
class Const(StateFormula):
    value: bool


@dataclass(frozen=True)
class Atom(StateFormula):
    name: str
    args: tuple[str, ...] = ()

    @property
    def key(self) -> str:
        """The valuation key, e.g. ``litter(a)``."""
        if not self.args:
            return self.name
        return f"{self.name}({','.join(self.args)})"


@dataclass(frozen=True)
class Less(StateFormula):
    left: TimeTerm
    right: TimeTerm


@dataclass(frozen=True)
class Eq(StateFormula):
    left: TimeTerm
    right: TimeTerm


@dataclass(frozen=True)
class Not(StateFormula):
    body: Formula


@dataclass(frozen=True)
class And(StateFormula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(StateFormula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(StateFormula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Stit(StateFormula):
    agent: str
    body: StateFormula


@dataclass(frozen=True)
class Exists(StateFormula):
    body: PathFormula


@dataclass(frozen=True)
class Forall(StateFormula):
    body: PathFormula


@dataclass(frozen=True)
class Freeze(StateFormula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Special(StateFormula):
    kind: str  # one of SPECIAL_KINDS
    norm: str
    agent: str


@dataclass(frozen=True)
class Viol(StateFormula):
    kind: str  # "act", "omit" or "any" (sugar)
    norm: str
    agent: str
    tb: TimeTerm
    tv: TimeTerm
    body: StateFormula


@dataclass(frozen=True)
class Resolved(StateFormula):
    kind: str  # "repair" or "punish"
    norm: str
    agent: str
    tb: TimeTerm
    tv: TimeTerm
    tr: TimeTerm
    body: StateFormula


@dataclass(frozen=True)
class Forbidden(StateFormula):
    norm: str
    agent: str
    tb: TimeTerm
    body: StateFormula


@dataclass(frozen=True)
class Obliged(StateFormula):
    norm: str
    agent: str
    tb: TimeTerm
    body: StateFormula
    deadline: StateFormula


# -- path formulas ----------------------------------------------------------

@dataclass(frozen=True)
class Lift(PathFormula):
    body: StateFormula


@dataclass(frozen=True)
class PNot(PathFormula):
    body: PathFormula


@dataclass(frozen=True)
class PAnd(PathFormula):
    left: PathFormula
    right: PathFormula


@dataclass(frozen=True)
class PFreeze(PathFormula):
    var: str
    body: PathFormula


@dataclass(frozen=True)
class Next(PathFormula):
    direction: str
    body: Formula


@dataclass(frozen=True)
class Finally(PathFormula):
    direction: str
    body: Formula


@dataclass(frozen=True)
class Globally(PathFormula):
    direction: str
    body: Formula


@dataclass(frozen=True)
class Until(PathFormula):
    direction: str
    left: Formula
    right: Formula


AnyFormula = Union[StateFormula, PathFormula]


def _cache_hash(cls):
    # formulas are memo keys; the generated hash would walk the whole tree each lookup
    compute = cls.__hash__

    def __hash__(self):
        try:
            return self.__dict__["_hash"]
        except KeyError:
            value = compute(self)
            object.__setattr__(self, "_hash", value)
            return value

    cls.__hash__ = __hash__


for _cls in (Const, Atom, Less, Eq, Not, And, Or, Implies, Stit, Exists, Forall, Freeze, Special,
             Viol, Resolved, Forbidden, Obliged, Lift, PNot, PAnd, PFreeze, Next, Finally,
             Globally, Until):
    _cache_hash(_cls)

TRUE = Const(True)
FALSE = Const(False)

_TEMPORAL = (Next, Finally, Globally, Until)


class FormulaError(ValueError):
    pass


class ParseError(FormulaError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


# -- convenience constructors ------------------------------------------------

def lor(left, right):
    return Or(left, right)


def implies(left, right):
    return Implies(left, right)


def viol(norm, agent, tb, tv, body):
    return Viol("any", norm, agent, tb, tv, body)


def tt(term) -> TimeTerm:
    """Coerce ``"t"``/``("t", 2)`` into a :class:`TimeTerm`."""
    if isinstance(term, TimeTerm):
        return term
    if isinstance(term, str):
        return TimeTerm(term)
    var, offset = term
    return TimeTerm(var, offset)


# -- normalization ------------------------------------------------------------

def _has_temporal(node) -> bool:
    if isinstance(node, _TEMPORAL):
        return True
    if isinstance(node, (Not, PNot, Freeze, PFreeze)):
        return _has_temporal(node.body)
    if isinstance(node, (And, Or, Implies, PAnd)):
        return _has_temporal(node.left) or _has_temporal(node.right)
    return False


def _pnot(alpha: PathFormula) -> PathFormula:
    if isinstance(alpha, Lift):
        return Lift(Not(alpha.body))
    return PNot(alpha)


def _pand(left: PathFormula, right: PathFormula) -> PathFormula:
    if isinstance(left, Lift) and isinstance(right, Lift):
        return Lift(And(left.body, right.body))
    return PAnd(left, right)


@lru_cache(maxsize=65536)
def normalize_state(node) -> StateFormula:
    if _has_temporal(node):
        raise FormulaError("path formula used where a state formula is expected")
    if isinstance(node, Lift):
        return normalize_state(node.body)
    if isinstance(node, (Not, PNot)):
        return Not(normalize_state(node.body))
    if isinstance(node, (And, PAnd)):
        return And(normalize_state(node.left), normalize_state(node.right))
    if isinstance(node, Or):
        return Not(And(Not(normalize_state(node.left)), Not(normalize_state(node.right))))
    if isinstance(node, Implies):
        return Not(And(normalize_state(node.left), Not(normalize_state(node.right))))
    if isinstance(node, (Freeze, PFreeze)):
        return Freeze(node.var, normalize_state(node.body))
    if isinstance(node, Stit):
        return Stit(node.agent, normalize_state(node.body))
    if isinstance(node, Exists):
        return Exists(normalize_path(node.body))
    if isinstance(node, Forall):
        return Forall(normalize_path(node.body))
    if isinstance(node, Viol):
        body = normalize_state(node.body)
        if node.kind == "any":
            act = Viol("act", node.norm, node.agent, node.tb, node.tv, body)
            omit = Viol("omit", node.norm, node.agent, node.tb, node.tv, body)
            return Not(And(Not(act), Not(omit)))
        return Viol(node.kind, node.norm, node.agent, node.tb, node.tv, body)
    if isinstance(node, Resolved):
        return Resolved(node.kind, node.norm, node.agent, node.tb, node.tv, node.tr,
                        normalize_state(node.body))
    if isinstance(node, Forbidden):
        return Forbidden(node.norm, node.agent, node.tb, normalize_state(node.body))
    if isinstance(node, Obliged):
        return Obliged(node.norm, node.agent, node.tb, normalize_state(node.body),
                       normalize_state(node.deadline))
    if isinstance(node, (Const, Atom, Less, Eq, Special)):
        return node
    raise FormulaError(f"not a formula: {node!r}")


@lru_cache(maxsize=65536)
def normalize_path(node) -> PathFormula:
    if not _has_temporal(node):
        return Lift(normalize_state(node))
    if isinstance(node, (Not, PNot)):
        return _pnot(normalize_path(node.body))
    if isinstance(node, (And, PAnd)):
        return _pand(normalize_path(node.left), normalize_path(node.right))
    if isinstance(node, Or):
        return _pnot(_pand(_pnot(normalize_path(node.left)), _pnot(normalize_path(node.right))))
    if isinstance(node, Implies):
        return _pnot(_pand(normalize_path(node.left), _pnot(normalize_path(node.right))))
    if isinstance(node, (Freeze, PFreeze)):
        return PFreeze(node.var, normalize_path(node.body))
    if isinstance(node, Until):
        return Until(node.direction, normalize_path(node.left), normalize_path(node.right))
    if isinstance(node, (Next, Finally, Globally)):
        return type(node)(node.direction, normalize_path(node.body))
    raise FormulaError(f"not a path formula: {node!r}")


def normalize(node):
    """Eliminate sugar and sort the tree into state/path families.

    State formulas stay state formulas; anything with a temporal operator at
    its top level is returned as a path formula.
    """
    if isinstance(node, PathFormula) or _has_temporal(node):
        return normalize_path(node)
    return normalize_state(node)


# -- free variables -------------------------------------------------------------

def _term_vars(*terms):
    return frozenset(t.var for t in terms)


@lru_cache(maxsize=65536)
def free_time_variables(node) -> frozenset:
    """Time variables not captured by an enclosing freeze."""
    if isinstance(node, (Less, Eq)):
        return _term_vars(node.left, node.right)
    if isinstance(node, (Freeze, PFreeze)):
        return free_time_variables(node.body) - {node.var}
    if isinstance(node, (Not, PNot, Lift, Stit, Exists, Forall, Next, Finally, Globally)):
        return free_time_variables(node.body)
    if isinstance(node, (And, Or, Implies, PAnd, Until)):
        return free_time_variables(node.left) | free_time_variables(node.right)
    if isinstance(node, Viol):
        return _term_vars(node.tb, node.tv) | free_time_variables(node.body)
    if isinstance(node, Resolved):
        return _term_vars(node.tb, node.tv, node.tr) | free_time_variables(node.body)
    if isinstance(node, Forbidden):
        return _term_vars(node.tb) | free_time_variables(node.body)
    if isinstance(node, Obliged):
        return (_term_vars(node.tb) | free_time_variables(node.body)
                | free_time_variables(node.deadline))
    return frozenset()


# -- printer ----------------------------------------------------------------------

_P_FREEZE, _P_IMPLIES, _P_OR, _P_AND, _P_UNTIL, _P_UNARY, _P_ATOM = range(7)


def _wrap(node, minimum: int) -> str:
    text, prec = _render(node)
    return f"({text})" if prec < minimum else text


def _render(node) -> tuple[str, int]:
    if isinstance(node, Const):
        return ("true" if node.value else "false"), _P_ATOM
    if isinstance(node, Atom):
        return node.key, _P_ATOM
    if isinstance(node, Less):
        return f"{node.left} < {node.right}", _P_ATOM
    if isinstance(node, Eq):
        return f"{node.left} = {node.right}", _P_ATOM
    if isinstance(node, Lift):
        return _render(node.body)
    if isinstance(node, (Not, PNot)):
        return "!" + _wrap(node.body, _P_UNARY), _P_UNARY
    if isinstance(node, (And, PAnd)):
        return f"{_wrap(node.left, _P_AND)} & {_wrap(node.right, _P_AND + 1)}", _P_AND
    if isinstance(node, Or):
        return f"{_wrap(node.left, _P_OR)} | {_wrap(node.right, _P_OR + 1)}", _P_OR
    if isinstance(node, Implies):
        return f"{_wrap(node.left, _P_IMPLIES + 1)} -> {_wrap(node.right, _P_IMPLIES)}", _P_IMPLIES
    if isinstance(node, Until):
        op = "U" + node.direction
        return f"{_wrap(node.left, _P_UNTIL + 1)} {op} {_wrap(node.right, _P_UNTIL)}", _P_UNTIL
    if isinstance(node, (Next, Finally, Globally)):
        op = {Next: "X", Finally: "F", Globally: "G"}[type(node)] + node.direction
        return f"{op} {_wrap(node.body, _P_UNARY)}", _P_UNARY
    if isinstance(node, Stit):
        return f"E<{node.agent}> {_wrap(node.body, _P_UNARY)}", _P_UNARY
    if isinstance(node, Exists):
        return f"Epath {_wrap(node.body, _P_UNARY)}", _P_UNARY
    if isinstance(node, Forall):
        return f"Apath {_wrap(node.body, _P_UNARY)}", _P_UNARY
    if isinstance(node, (Freeze, PFreeze)):
        return f"{node.var}.({render(node.body)})", _P_FREEZE
    if isinstance(node, Special):
        return f"{node.kind}[{node.norm},{node.agent}]", _P_ATOM
    if isinstance(node, Viol):
        kw = {"act": "VIOLA", "omit": "VIOLO", "any": "VIOL"}[node.kind]
        return f"{kw}[{node.norm},{node.agent},{node.tb},{node.tv}]{{{render(node.body)}}}", _P_ATOM
    if isinstance(node, Resolved):
        kw = "RVIOL" if node.kind == "repair" else "PVIOL"
        return (f"{kw}[{node.norm},{node.agent},{node.tb},{node.tv},{node.tr}]"
                f"{{{render(node.body)}}}", _P_ATOM)
    if isinstance(node, Forbidden):
        return f"FORB[{node.norm},{node.agent},{node.tb}]{{{render(node.body)}}}", _P_ATOM
    if isinstance(node, Obliged):
        return (f"OBL[{node.norm},{node.agent},{node.tb}]{{{render(node.body)}}}"
                f"{{{render(node.deadline)}}}", _P_ATOM)
    raise FormulaError(f"cannot render {node!r}")


def render(node) -> str:
    """Print a formula in the DSL; ``parse(render(f)) == normalize(f)``."""
    return _render(node)[0]


# -- lexer ------------------------------------------------------------------------

_MODAL_ARITY = {
    "VIOLA": 4, "VIOLO": 4, "VIOL": 4, "RVIOL": 5, "PVIOL": 5,
    "FORB": 3, "OBL": 3, "V": 2, "D": 2, "R": 2, "P": 2,
}

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<bracket>[A-Za-z_][A-Za-z0-9_]*)\[
  | (?P<stit>E<)
  | (?P<temporal>[XFGU][+-])
  | (?P<arrow>->)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<nat>\d+)
  | (?P<sym>[<=!&|.(),{}\]>+\-])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Tok:
    kind: str
    value: str
    pos: int


def tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind == "bracket":
            word = m.group("bracket")
            if word not in _MODAL_ARITY:
                raise ParseError(f"unknown modality keyword {word!r}", pos)
            toks.append(_Tok("modal", word, pos))
        elif kind == "ident":
            word = m.group(kind)
            toks.append(_Tok("kw" if word in ("Apath", "Epath", "true", "false") else "ident",
                             word, pos))
        elif kind != "ws":
            toks.append(_Tok(kind, m.group(kind), pos))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


# -- parser -----------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k=1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def at(self, kind, value=None) -> bool:
        return self.tok.kind == kind and (value is None or self.tok.value == value)

    def expect(self, kind, value=None, what=None) -> _Tok:
        if not self.at(kind, value):
            want = what or repr(value or kind)
            got = self.tok.value or "end of input"
            raise ParseError(f"expected {want}, got {got!r}", self.tok.pos)
        return self.advance()

    def parse(self):
        node = self.formula()
        if not self.at("eof"):
            raise ParseError(f"unexpected {self.tok.value!r}", self.tok.pos)
        return node

    def formula(self):
        left = self.disjunction()
        if self.at("arrow"):
            self.advance()
            return Implies(left, self.formula())
        return left

    def disjunction(self):
        node = self.conjunction()
        while self.at("sym", "|"):
            self.advance()
            node = Or(node, self.conjunction())
        return node

    def conjunction(self):
        node = self.until()
        while self.at("sym", "&"):
            self.advance()
            node = And(node, self.until())
        return node

    def until(self):
        left = self.unary()
        if self.at("temporal") and self.tok.value[0] == "U":
            op = self.advance()
            return Until(op.value[1], left, self.until())
        return left

    def unary(self):
        tok = self.tok
        if self.at("sym", "!"):
            self.advance()
            return Not(self.unary())
        if tok.kind == "temporal":
            if tok.value[0] == "U":
                raise ParseError("until needs a left operand", tok.pos)
            self.advance()
            cls = {"X": Next, "F": Finally, "G": Globally}[tok.value[0]]
            return cls(tok.value[1], self.unary())
        if tok.kind == "stit":
            self.advance()
            agent = self.expect("ident", what="agent name").value
            self.expect("sym", ">")
            return Stit(agent, self.unary())
        if self.at("kw", "Apath"):
            self.advance()
            return Forall(self.unary())
        if self.at("kw", "Epath"):
            self.advance()
            return Exists(self.unary())
        return self.primary()

    def primary(self):
        tok = self.tok
        if self.at("sym", "("):
            self.advance()
            node = self.formula()
            self.expect("sym", ")")
            return node
        if tok.kind == "kw" and tok.value in ("true", "false"):
            self.advance()
            return Const(tok.value == "true")
        if tok.kind == "modal":
            return self.modal()
        if tok.kind == "ident":
            nxt = self.peek()
            if nxt.kind == "sym" and nxt.value == ".":
                self.advance()
                self.advance()
                return Freeze(tok.value, self.formula())
            if nxt.kind == "sym" and nxt.value in "+-<=":
                return self.comparison()
            return self.atom()
        got = tok.value or "end of input"
        raise ParseError(f"expected a formula, got {got!r}", tok.pos)

    def term(self) -> TimeTerm:
        var = self.expect("ident", what="time variable").value
        if self.at("sym", "+") or self.at("sym", "-"):
            sign = 1 if self.advance().value == "+" else -1
            const = int(self.expect("nat", what="natural constant").value)
            return TimeTerm(var, sign * const)
        return TimeTerm(var)

    def comparison(self):
        left = self.term()
        if self.at("sym", "<"):
            self.advance()
            return Less(left, self.term())
        if self.at("sym", "="):
            self.advance()
            return Eq(left, self.term())
        raise ParseError("expected '<' or '=' after time term", self.tok.pos)

    def atom(self):
        name = self.advance().value
        args = []
        if self.at("sym", "("):
            self.advance()
            args.append(self.expect("ident", what="atom argument").value)
            while self.at("sym", ","):
                self.advance()
                args.append(self.expect("ident", what="atom argument").value)
            self.expect("sym", ")")
        return Atom(name, tuple(args))

    def braced(self):
        self.expect("sym", "{")
        node = self.formula()
        self.expect("sym", "}")
        return node

    def modal(self):
        tok = self.advance()
        kw = tok.value
        ids = [self.expect("ident", what="norm id").value]
        self.expect("sym", ",")
        ids.append(self.expect("ident", what="agent").value)
        terms = []
        while self.at("sym", ","):
            self.advance()
            terms.append(self.term())
        self.expect("sym", "]")
        arity = _MODAL_ARITY[kw]
        if 2 + len(terms) != arity:
            raise ParseError(f"{kw} takes {arity} arguments, got {2 + len(terms)}", tok.pos)
        norm, agent = ids
        if kw in SPECIAL_KINDS:
            return Special(kw, norm, agent)
        if kw in ("VIOLA", "VIOLO", "VIOL"):
            kind = {"VIOLA": "act", "VIOLO": "omit", "VIOL": "any"}[kw]
            return Viol(kind, norm, agent, *terms, self.braced())
        if kw in ("RVIOL", "PVIOL"):
            return Resolved("repair" if kw == "RVIOL" else "punish", norm, agent, *terms,
                            self.braced())
        if kw == "FORB":
            return Forbidden(norm, agent, terms[0], self.braced())
        body = self.braced()
        return Obliged(norm, agent, terms[0], body, self.braced())


def parse_raw(text: str):
    """Parse without normalizing (sugar nodes preserved)."""
    return _Parser(text).parse()


def parse(text: str):
    """Parse and normalize; returns a state or a path formula."""
    try:
        return normalize(parse_raw(text))
    except ParseError:
        raise
    except FormulaError as exc:
        raise ParseError(str(exc), 0) from None


def parse_state_formula(text: str) -> StateFormula:
    node = parse_raw(text)
    try:
        return normalize_state(node)
    except FormulaError as exc:
        raise ParseError(str(exc), 0) from None


def parse_path_formula(text: str) -> PathFormula:
    try:
        return normalize_path(parse_raw(text))
    except FormulaError as exc:
        raise ParseError(str(exc), 0) from None


# -- traversal helpers --------------------------------------------------------------

def children(node) -> tuple:
    if isinstance(node, (Not, PNot, Lift, Stit, Exists, Forall, Freeze, PFreeze,
                         Next, Finally, Globally, Viol, Resolved, Forbidden)):
        return (node.body,)
    if isinstance(node, (And, Or, Implies, PAnd, Until)):
        return (node.left, node.right)
    if isinstance(node, Obliged):
        return (node.body, node.deadline)
    return ()


def walk(node):
    stack = [node]
    while stack:
        cur = stack.pop()
        yield cur
        stack.extend(children(cur))


def atoms(node) -> set[str]:
    return {n.key for n in walk(node) if isinstance(n, Atom)}


def depth(node) -> int:
    kids = children(node)
    return 1 + max((depth(k) for k in kids), default=0)
