"""AST, parser and printer for the hybrid logic-program subset.

Grammar (``%`` comments, UTF-8, decimal doubles)::

    program    := (statement '.')*
    statement  := fact | clause | query | evidence
    fact       := (number | polyexpr) '::' atom
    clause     := atom [':-' literal (',' literal)*]
    literal    := atom | '\\+' atom
    query      := 'query' '(' atom ')'
    evidence   := 'evidence' '(' literal ')'
    polyexpr   := arithmetic over numbers and the fact's variables: + - * ^
    builtins   := below(V,c) | above(V,c) | ininterval(V,c1,c2)

A bare number before ``::`` is a discrete probabilistic fact; any composite
expression (even a parenthesised constant) is a polynomial piece weight.
Adjacent factors multiply implicitly, so ``0.5 I`` reads as ``0.5*I``.

A piece weight is tied to a base attribute by its guard clause::

    -0.024719432823743857 + 0.0005171566890546171*I :: int_low(I).
    int_low(I) :- intelligence(I), ininterval(I, 50, 70).

The loader groups all pieces of one attribute, requires their guard
intervals to tile a finite support, and rejects the program unless the
pieces integrate to 1 (within LOAD_MASS_TOL).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Mapping, Union

from .errors import ParseError
from .polynomials import (
    HyperCube,
    MultivariatePP,
    MultivariatePolynomial,
    PiecewisePolynomial,
)

#: tolerance on the total mass of a program-declared density
LOAD_MASS_TOL = 1e-6

BUILTINS = {"below": 2, "above": 2, "ininterval": 3}


# --- AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Struct:
    """Predicate atom or compound term; constants are zero-arg structs."""

    name: str
    args: tuple["Term", ...] = ()

    @property
    def key(self) -> tuple[str, int]:
        return self.name, len(self.args)


Term = Union[Var, Num, Struct]


@dataclass(frozen=True)
class Literal:
    atom: Struct
    negated: bool = False


@dataclass(frozen=True)
class Clause:
    head: Struct
    body: tuple[Literal, ...] = ()


@dataclass(frozen=True)
class ProbFact:
    probability: float
    atom: Struct


@dataclass(frozen=True)
class ContinuousFact:
    """Polynomial-weighted atom; the atom's arguments are the continuous
    dimensions, in the order the weight's variables are indexed."""

    weight: MultivariatePolynomial
    atom: Struct


@dataclass(frozen=True)
class Piece:
    predicate: Struct
    box: HyperCube
    weight: MultivariatePolynomial  # indexed by the attribute's dimensions
    mass: float


@dataclass(frozen=True)
class AttributeDensity:
    """Assembled density of one continuous attribute predicate."""

    attribute: str
    dimension: int
    pieces: tuple[Piece, ...]
    pp: PiecewisePolynomial | None = None
    mpp: MultivariatePP | None = None

    @property
    def support(self) -> HyperCube:
        if self.pp is not None:
            return HyperCube((self.pp.support,))
        lows = [min(p.box.bounds[d][0] for p in self.pieces) for d in range(self.dimension)]
        highs = [max(p.box.bounds[d][1] for p in self.pieces) for d in range(self.dimension)]
        return HyperCube(tuple(zip(lows, highs)))

    def mass_in(self, box: HyperCube) -> float:
        if self.pp is not None:
            (a, b), = box.bounds
            return self.pp.integrate(a, b)
        return self.mpp.integrate_box(box)


@dataclass(frozen=True)
class Program:
    clauses: tuple[Clause, ...] = ()
    prob_facts: tuple[ProbFact, ...] = ()
    continuous_facts: tuple[ContinuousFact, ...] = ()
    queries: tuple[Struct, ...] = ()
    evidence: tuple[Literal, ...] = ()
    #: derived at load time: attribute predicate name -> density
    densities: Mapping[str, AttributeDensity] = field(default_factory=dict, compare=False)

    def defined_keys(self) -> set[tuple[str, int]]:
        keys = {c.head.key for c in self.clauses}
        keys |= {f.atom.key for f in self.prob_facts}
        keys |= {f.atom.key for f in self.continuous_facts}
        for density in self.densities.values():
            keys.add((density.attribute, density.dimension))
        return keys


def substitute(term: Term, theta: Mapping[str, Term]) -> Term:
    """Simultaneous substitution of variables by terms."""
    if isinstance(term, Var):
        return theta.get(term.name, term)
    if isinstance(term, Struct) and term.args:
        return Struct(term.name, tuple(substitute(a, theta) for a in term.args))
    return term


def term_vars(term: Term, acc: list[str] | None = None) -> list[str]:
    """Variable names in first-occurrence order."""
    if acc is None:
        acc = []
    if isinstance(term, Var):
        if term.name not in acc:
            acc.append(term.name)
    elif isinstance(term, Struct):
        for a in term.args:
            term_vars(a, acc)
    return acc


def is_ground(term: Term) -> bool:
    return not term_vars(term)


# --- tokenizer ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+|%[^\n]*)
      | (?P<number>\d+(\.\d+)?([eE][+-]?\d+)?)
      | (?P<ident>[a-z]\w*)
      | (?P<var>[A-Z_]\w*)
      | (?P<punct>:-|::|\\\+|[(),.+\-*^])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group(0)
        if kind != "ws":
            tokens.append(_Token(kind if kind != "punct" else chunk, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


# --- expression values -------------------------------------------------------


class _NamedPoly:
    """Polynomial over named variables, used only while parsing weights."""

    def __init__(self, terms: dict[tuple[tuple[str, int], ...], float]):
        self.terms = {k: v for k, v in terms.items() if v != 0.0} or {(): 0.0}

    @classmethod
    def const(cls, v: float) -> "_NamedPoly":
        return cls({(): v})

    @classmethod
    def var(cls, name: str) -> "_NamedPoly":
        return cls({((name, 1),): 1.0})

    def variables(self) -> set[str]:
        return {name for key in self.terms for name, _ in key}

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0.0) + v
        return _NamedPoly(out)

    def __neg__(self):
        return _NamedPoly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        out: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                exps: dict[str, int] = {}
                for name, e in k1 + k2:
                    exps[name] = exps.get(name, 0) + e
                key = tuple(sorted(exps.items()))
                out[key] = out.get(key, 0.0) + v1 * v2
        return _NamedPoly(out)

    def __pow__(self, n: int):
        acc = _NamedPoly.const(1.0)
        for _ in range(n):
            acc = acc * self
        return acc

    def bind(self, order: list[str]) -> MultivariatePolynomial:
        index = {name: i for i, name in enumerate(order)}
        nvars = max(len(order), 1)
        terms: dict[tuple[int, ...], float] = {}
        for key, v in self.terms.items():
            exps = [0] * nvars
            for name, e in key:
                exps[index[name]] = e
            terms[tuple(exps)] = terms.get(tuple(exps), 0.0) + v
        return MultivariatePolynomial(nvars, terms)


# --- parser ------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            raise ParseError(f"expected {kind!r}, found {tok.text!r}", tok.line, tok.col)
        return tok

    def fail(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.line, tok.col)

    # statements

    def statements(self):
        while self.peek().kind != "eof":
            yield self.statement()

    def statement(self):
        start = self.peek()
        if self._fact_ahead():
            weight_tok = self.peek()
            value = self.expression()
            is_bare_number = (
                weight_tok.kind == "number"
                and self.tokens[self.pos - 1] is weight_tok
            )
            self.expect("::")
            atom = self.atom()
            self.expect(".")
            return ("fact", value, is_bare_number, atom, start)
        if start.kind == "ident" and start.text in ("query", "evidence") and self.peek(1).kind == "(":
            self.next()
            self.expect("(")
            if start.text == "evidence":
                negated = self.peek().kind == "\\+"
                if negated:
                    self.next()
                inner = Literal(self.atom(), negated)
            else:
                inner = self.atom()
            self.expect(")")
            self.expect(".")
            return (start.text, inner, start)
        head = self.atom()
        if self.peek().kind == ":-":
            self.next()
            body = [self.literal()]
            while self.peek().kind == ",":
                self.next()
                body.append(self.literal())
            self.expect(".")
            return ("clause", Clause(head, tuple(body)), start)
        self.expect(".")
        return ("clause", Clause(head, ()), start)

    def _fact_ahead(self) -> bool:
        """Scan for '::' at paren depth 0 before the closing '.'."""
        depth = 0
        i = self.pos
        while i < len(self.tokens):
            kind = self.tokens[i].kind
            if kind == "(":
                depth += 1
            elif kind == ")":
                depth -= 1
            elif kind == "::" and depth == 0:
                return True
            elif kind in (".", "eof"):
                return False
            i += 1
        return False

    def literal(self) -> Literal:
        if self.peek().kind == "\\+":
            self.next()
            return Literal(self.atom(), negated=True)
        return Literal(self.atom())

    def atom(self) -> Struct:
        tok = self.expect("ident")
        args: list[Term] = []
        if self.peek().kind == "(":
            self.next()
            args.append(self.term())
            while self.peek().kind == ",":
                self.next()
                args.append(self.term())
            self.expect(")")
        return Struct(tok.text, tuple(args))

    def term(self) -> Term:
        tok = self.peek()
        if tok.kind == "var":
            self.next()
            return Var(tok.text)
        if tok.kind == "number":
            self.next()
            return Num(float(tok.text))
        if tok.kind == "-" and self.peek(1).kind == "number":
            self.next()
            return Num(-float(self.next().text))
        if tok.kind == "ident":
            return self.atom()
        raise self.fail(f"expected a term, found {tok.text!r}")

    # weight expressions

    def expression(self) -> _NamedPoly:
        value = self.exp_term()
        while self.peek().kind in ("+", "-"):
            op = self.next().kind
            rhs = self.exp_term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def exp_term(self) -> _NamedPoly:
        value = self.exp_factor()
        while True:
            kind = self.peek().kind
            if kind == "*":
                self.next()
                value = value * self.exp_factor()
            elif kind in ("number", "var", "("):
                value = value * self.exp_factor()  # implicit multiplication
            else:
                return value

    def exp_factor(self) -> _NamedPoly:
        tok = self.peek()
        if tok.kind == "-":
            self.next()
            return -self.exp_factor()
        if tok.kind == "+":
            self.next()
            return self.exp_factor()
        value = self.exp_primary()
        if self.peek().kind == "^":
            self.next()
            etok = self.expect("number")
            exponent = float(etok.text)
            if exponent != int(exponent) or exponent < 0:
                raise ParseError("exponents must be non-negative integers", etok.line, etok.col)
            value = value ** int(exponent)
        return value

    def exp_primary(self) -> _NamedPoly:
        tok = self.next()
        if tok.kind == "number":
            return _NamedPoly.const(float(tok.text))
        if tok.kind == "var":
            return _NamedPoly.var(tok.text)
        if tok.kind == "(":
            value = self.expression()
            self.expect(")")
            return value
        raise ParseError(f"expected a weight term, found {tok.text!r}", tok.line, tok.col)


# --- load: semantic validation and density assembly --------------------------


def parse(text: str) -> Program:
    """Parse program text, validate it, and assemble attribute densities."""
    parser = _Parser(text)
    clauses: list[Clause] = []
    prob_facts: list[ProbFact] = []
    cont_facts: list[ContinuousFact] = []
    queries: list[Struct] = []
    evidence: list[Literal] = []
    fact_pos: dict[tuple[str, int], _Token] = {}

    for stmt in parser.statements():
        if stmt[0] == "fact":
            _, value, is_bare_number, atom, tok = stmt
            if is_bare_number:
                (p,) = value.terms.values()
                if not 0.0 <= p <= 1.0:
                    raise ParseError(f"probability {p!r} outside [0, 1]", tok.line, tok.col)
                prob_facts.append(ProbFact(p, atom))
                continue
            cont_facts.append(_continuous_fact(value, atom, tok))
            fact_pos[atom.key] = tok
        elif stmt[0] == "clause":
            _validate_clause(stmt[1], stmt[2])
            clauses.append(stmt[1])
        elif stmt[0] == "query":
            queries.append(stmt[1])
        else:
            evidence.append(stmt[1])

    densities = _assemble_densities(cont_facts, clauses, fact_pos)
    program = Program(
        tuple(clauses), tuple(prob_facts), tuple(cont_facts),
        tuple(queries), tuple(evidence), densities,
    )
    defined = program.defined_keys()
    for q in queries:
        if q.key not in defined:
            raise ParseError(f"queried predicate {q.name}/{len(q.args)} is not defined")
    for e in evidence:
        if e.atom.key not in defined:
            raise ParseError(
                f"evidence predicate {e.atom.name}/{len(e.atom.args)} is not defined"
            )
    for c in clauses:
        density = densities.get(c.head.name)
        if c.body and density is not None and len(c.head.args) == density.dimension:
            raise ParseError(f"attribute predicate {c.head.name} cannot be a rule head")
    return program


def _continuous_fact(value: _NamedPoly, atom: Struct, tok: _Token) -> ContinuousFact:
    names = []
    for a in atom.args:
        if not isinstance(a, Var) or a.name in names:
            raise ParseError(
                "a weighted atom needs distinct variable arguments", tok.line, tok.col
            )
        names.append(a.name)
    if not names:
        raise ParseError(
            "a polynomial weight requires the atom to carry its variable", tok.line, tok.col
        )
    stray = value.variables() - set(names)
    if stray:
        raise ParseError(
            f"weight mentions {sorted(stray)} not among the atom's arguments",
            tok.line, tok.col,
        )
    return ContinuousFact(value.bind(names), atom)


def _validate_clause(clause: Clause, tok: _Token) -> None:
    for lit in clause.body:
        atom = lit.atom
        if atom.key in _BUILTIN_KEYS:
            if not isinstance(atom.args[0], Var):
                raise ParseError(
                    f"{atom.name} needs a variable as first argument", tok.line, tok.col
                )
            bounds = atom.args[1:]
            if not all(isinstance(b, Num) and not math.isnan(b.value) for b in bounds):
                raise ParseError(
                    f"{atom.name} bounds must be numeric constants", tok.line, tok.col
                )
            if atom.name == "ininterval" and bounds[0].value > bounds[1].value:
                raise ParseError(
                    f"empty interval [{bounds[0].value}, {bounds[1].value}]",
                    tok.line, tok.col,
                )
    if clause.head.key in _BUILTIN_KEYS:
        raise ParseError(f"cannot redefine builtin {clause.head.name}", tok.line, tok.col)


_BUILTIN_KEYS = {("below", 2), ("above", 2), ("ininterval", 3)}


def builtin_interval(atom: Struct) -> tuple[str, tuple[float, float]]:
    """Variable name and closed interval constrained by a builtin atom."""
    var = atom.args[0].name
    if atom.name == "below":
        return var, (-math.inf, atom.args[1].value)
    if atom.name == "above":
        return var, (atom.args[1].value, math.inf)
    return var, (atom.args[1].value, atom.args[2].value)


def _guard_of(clause: Clause) -> tuple[Struct, dict[str, tuple[float, float]]] | None:
    """If the clause is piece-guard shaped, return (attribute atom,
    per-variable interval); otherwise None."""
    base = None
    intervals: dict[str, tuple[float, float]] = {}
    if not clause.body:
        return None
    for lit in clause.body:
        if lit.negated:
            return None
        if lit.atom.key in _BUILTIN_KEYS:
            var, (lo, hi) = builtin_interval(lit.atom)
            cur = intervals.get(var, (-math.inf, math.inf))
            intervals[var] = (max(cur[0], lo), min(cur[1], hi))
        elif base is None:
            base = lit.atom
        else:
            return None
    if base is None or not intervals:
        return None
    head_vars = [a.name for a in clause.head.args if isinstance(a, Var)]
    base_vars = [a.name for a in base.args if isinstance(a, Var)]
    if len(head_vars) != len(clause.head.args) or len(base_vars) != len(base.args):
        return None
    if set(head_vars) != set(base_vars) or len(set(base_vars)) != len(base_vars):
        return None
    return base, intervals


def _assemble_densities(
    cont_facts: list[ContinuousFact],
    clauses: list[Clause],
    fact_pos: dict[tuple[str, int], _Token],
) -> dict[str, AttributeDensity]:
    seen: set[tuple[str, int]] = set()
    for f in cont_facts:
        if f.atom.key in seen:
            tok = fact_pos[f.atom.key]
            raise ParseError(
                f"duplicate weighted fact for {f.atom.name}", tok.line, tok.col
            )
        seen.add(f.atom.key)

    by_attr: dict[str, list[tuple[ContinuousFact, Struct, HyperCube]]] = {}
    for f in cont_facts:
        tok = fact_pos[f.atom.key]
        guards = [g for c in clauses if c.head.key == f.atom.key for g in [_guard_of(c)] if g]
        if len(guards) != 1:
            raise ParseError(
                f"piece {f.atom.name} needs exactly one guard clause "
                f"(attribute atom plus interval builtins), found {len(guards)}",
                tok.line, tok.col,
            )
        base, intervals = guards[0]
        if base.key == f.atom.key:
            raise ParseError(
                f"piece {f.atom.name} guards itself; it needs a base attribute",
                tok.line, tok.col,
            )
        base_vars = [a.name for a in base.args]
        if len(base_vars) != len(f.atom.args):
            raise ParseError(
                f"piece {f.atom.name}: attribute {base.name} has arity "
                f"{len(base_vars)}, weight has {len(f.atom.args)} dimensions",
                tok.line, tok.col,
            )
        box_bounds = []
        for v in base_vars:
            lo, hi = intervals.get(v, (-math.inf, math.inf))
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ParseError(
                    f"piece {f.atom.name}: dimension {v} has unbounded or empty "
                    f"support [{lo}, {hi}]; density pieces need finite boxes",
                    tok.line, tok.col,
                )
            box_bounds.append((lo, hi))
        # reindex the weight from the piece atom's variable order to the
        # attribute atom's dimension order, matching variables by name
        piece_order = [a.name for a in f.atom.args]
        perm = []
        for v in base_vars:
            if v not in piece_order:
                raise ParseError(
                    f"piece {f.atom.name}: guard variable {v} does not appear "
                    "in the weighted atom", tok.line, tok.col,
                )
            perm.append(piece_order.index(v))
        weight = MultivariatePolynomial(
            len(base_vars),
            {tuple(e[p] for p in perm): c for e, c in f.weight.terms.items()},
        )
        by_attr.setdefault(base.name, []).append((f, HyperCube(tuple(box_bounds)), weight))

    densities: dict[str, AttributeDensity] = {}
    for attr, entries in by_attr.items():
        dim = entries[0][1].dimension
        tok = fact_pos[entries[0][0].atom.key]
        if any(box.dimension != dim for _, box, _ in entries):
            raise ParseError(f"attribute {attr} has pieces of mixed dimension",
                             tok.line, tok.col)
        if dim == 1:
            densities[attr] = _univariate_density(attr, entries, fact_pos)
        else:
            densities[attr] = _multivariate_density(attr, entries, fact_pos)
    return densities


def _univariate_density(attr, entries, fact_pos) -> AttributeDensity:
    entries = sorted(entries, key=lambda e: e[1].bounds[0][0])
    cutpoints = [entries[0][1].bounds[0][0]]
    polys = []
    for f, box, weight in entries:
        (lo, hi), = box.bounds
        tok = fact_pos[f.atom.key]
        if lo != cutpoints[-1]:
            raise ParseError(
                f"pieces of {attr} do not tile: piece {f.atom.name} starts at "
                f"{lo!r} but the previous piece ends at {cutpoints[-1]!r}",
                tok.line, tok.col,
            )
        cutpoints.append(hi)
        polys.append(weight.to_univariate())
    raw = PiecewisePolynomial(tuple(cutpoints), tuple(polys))
    mass = raw.total_mass()
    tok = fact_pos[entries[0][0].atom.key]
    if abs(mass - 1.0) > LOAD_MASS_TOL:
        raise ParseError(
            f"pieces of {attr} integrate to {mass!r}, not 1", tok.line, tok.col
        )
    if raw.min_on_grid(257 * len(polys)) < -1e-9:
        raise ParseError(f"density of {attr} is negative on its support",
                         tok.line, tok.col)
    pp = PiecewisePolynomial(
        tuple(cutpoints), tuple(p * (1.0 / mass) for p in raw.pieces), is_density=True
    )
    pieces = tuple(
        Piece(f.atom, box, weight * (1.0 / mass), pp.integrate(*box.bounds[0]))
        for (f, box, weight), _ in zip(entries, polys)
    )
    return AttributeDensity(attr, 1, pieces, pp=pp)


def _multivariate_density(attr, entries, fact_pos) -> AttributeDensity:
    tok = fact_pos[entries[0][0].atom.key]
    raw = MultivariatePP(
        entries[0][1].dimension,
        tuple((box, weight) for _, box, weight in entries),
    )
    mass = raw.total_mass()
    if abs(mass - 1.0) > LOAD_MASS_TOL:
        raise ParseError(
            f"pieces of {attr} integrate to {mass!r}, not 1", tok.line, tok.col
        )
    scaled = tuple((box, weight * (1.0 / mass)) for _, box, weight in entries)
    mpp = MultivariatePP(raw.dimension, scaled, is_density=True)
    pieces = tuple(
        Piece(f.atom, box, w, w.integrate_box(box))
        for (f, box, _), (_, w) in zip(entries, scaled)
    )
    return AttributeDensity(attr, raw.dimension, pieces, mpp=mpp)


# --- printer -----------------------------------------------------------------


def format_number(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _format_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Num):
        return format_number(t.value)
    if t.args:
        return f"{t.name}({', '.join(_format_term(a) for a in t.args)})"
    return t.name


def format_atom(atom: Struct) -> str:
    return _format_term(atom)


def _format_literal(lit: Literal) -> str:
    return ("\\+ " if lit.negated else "") + format_atom(lit.atom)


def format_clause(clause: Clause) -> str:
    if not clause.body:
        return f"{format_atom(clause.head)}."
    body = ", ".join(_format_literal(l) for l in clause.body)
    return f"{format_atom(clause.head)} :- {body}."


def _format_monomial(coeff: float, var_powers: list[tuple[str, int]]) -> str:
    parts = [format_number(coeff)]
    for name, e in var_powers:
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts)


def format_weight(weight: MultivariatePolynomial, atom: Struct) -> str:
    names = [a.name for a in atom.args]
    items = sorted(weight.terms.items())
    rendered = []
    for exps, coeff in items:
        powers = [(names[i], e) for i, e in enumerate(exps) if e > 0]
        rendered.append((_format_monomial(abs(coeff), powers), coeff < 0.0, not powers))
    if len(rendered) == 1 and rendered[0][2]:
        # lone constant: parenthesise so it reads as a weight, not a probability
        sign = "-" if rendered[0][1] else ""
        return f"({sign}{rendered[0][0]})"
    out = []
    for i, (text, negative, _) in enumerate(rendered):
        if i == 0:
            out.append(("-" if negative else "") + text)
        else:
            out.append(("- " if negative else "+ ") + text)
    return " ".join(out)


def print_program(program: Program) -> str:
    """Render a program; parse(print_program(p)) equals p structurally."""
    lines = []
    for f in program.prob_facts:
        lines.append(f"{format_number(f.probability)} :: {format_atom(f.atom)}.")
    for f in program.continuous_facts:
        lines.append(f"{format_weight(f.weight, f.atom)} :: {format_atom(f.atom)}.")
    for c in program.clauses:
        lines.append(format_clause(c))
    for q in program.queries:
        lines.append(f"query({format_atom(q)}).")
    for e in program.evidence:
        lines.append(f"evidence({_format_literal(e)}).")
    return "\n".join(lines) + ("\n" if lines else "")
