"""Exact inference by enumeration over a partitioned choice space.

A world is one subset of the uncertain ground facts plus one cell per
continuous attribute.  Cells are the intervals (or boxes) cut from each
attribute's support by its density cutpoints and every comparison constant
that mentions it, so an interval builtin is either entirely true or
entirely false on a cell, never split.  The probability of a world is the
product of fact coin probabilities and cell masses; a query's success
probability sums the worlds whose minimal model entails it.

Continuous variables range over attribute dimensions, not numbers: each
attribute predicate carries a single random variable (one instance), and
grounding binds a clause's continuous variables to (attribute, dimension)
markers.  Negation is stratified and evaluated per world.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import ChoiceSpaceError, ContractError, InconsistentEvidenceError
from .polynomials import HyperCube
from .program import (
    BUILTINS,
    AttributeDensity,
    Clause,
    Literal,
    Num,
    Program,
    Struct,
    Term,
    Var,
    builtin_interval,
    is_ground,
    substitute,
)

DEFAULT_CHOICE_CAP = 2**24


@dataclass(frozen=True)
class RVDim:
    """Ground marker for dimension ``dim`` of an attribute's random variable."""

    attribute: str
    dim: int


@dataclass(frozen=True)
class CellCondition:
    """'the cell of ``attribute`` lies inside [lo, hi] along ``dim``'."""

    attribute: str
    dim: int
    lo: float
    hi: float
    negated: bool = False


@dataclass(frozen=True)
class GroundClause:
    head: Struct
    pos: tuple[Struct, ...]
    neg: tuple[Struct, ...]
    conditions: tuple[CellCondition, ...]


@dataclass
class GroundProgram:
    program: Program
    clauses: list[GroundClause]
    choice_facts: list[tuple[Struct, float]]
    true_atoms: set[Struct]
    attributes: dict[str, AttributeDensity]
    strata: dict[tuple[str, int], int]


@dataclass
class DomainPartition:
    """Per attribute: mutually exclusive, exhaustive cells and their masses."""

    cells: dict[str, list[HyperCube]]
    deltas: dict[str, list[float]]

    def total_cells(self) -> int:
        return sum(len(v) for v in self.cells.values())


@dataclass(frozen=True)
class QueryResult:
    query: Struct
    probability: float
    conditioned: bool
    cells: int
    choices: int


# --- grounding ---------------------------------------------------------------


def _collect_constants(program: Program) -> list[Term]:
    seen: dict[Term, None] = {}

    def visit(term: Term):
        if isinstance(term, (Num, Struct)) and is_ground(term):
            seen.setdefault(term)
        if isinstance(term, Struct):
            for a in term.args:
                visit(a)

    for clause in program.clauses:
        for atom in [clause.head] + [l.atom for l in clause.body]:
            if atom.key not in _BUILTIN_KEYS:
                for a in atom.args:
                    visit(a)
    for f in program.prob_facts:
        for a in f.atom.args:
            visit(a)
    for q in program.queries:
        for a in q.args:
            visit(a)
    for e in program.evidence:
        for a in e.atom.args:
            visit(a)
    return list(seen)


_BUILTIN_KEYS = {(name, arity) for name, arity in BUILTINS.items()}


def _continuous_positions(program: Program) -> dict[tuple[str, int], set[int]]:
    """Infer which argument positions of each predicate carry continuous
    values, propagating through clauses to a fixpoint."""
    cont: dict[tuple[str, int], set[int]] = {}
    for density in program.densities.values():
        cont[(density.attribute, density.dimension)] = set(range(density.dimension))
    for f in program.continuous_facts:
        cont[f.atom.key] = set(range(len(f.atom.args)))

    def positions(atom: Struct) -> set[int]:
        if atom.key in _BUILTIN_KEYS:
            return {0}
        return cont.get(atom.key, set())

    changed = True
    while changed:
        changed = False
        for clause in program.clauses:
            atoms = [clause.head] + [l.atom for l in clause.body]
            cvars: set[str] = set()
            for atom in atoms:
                marked = positions(atom)
                for i, a in enumerate(atom.args):
                    if i in marked and isinstance(a, Var):
                        cvars.add(a.name)
            for atom in atoms:
                if atom.key in _BUILTIN_KEYS:
                    continue
                for i, a in enumerate(atom.args):
                    if isinstance(a, Var) and a.name in cvars:
                        got = cont.setdefault(atom.key, set())
                        if i not in got:
                            got.add(i)
                            changed = True
    return cont


def _relevant_predicates(program: Program) -> set[tuple[str, int]]:
    targets = [q.key for q in program.queries] + [e.atom.key for e in program.evidence]
    by_head: dict[tuple[str, int], list[Clause]] = {}
    for c in program.clauses:
        by_head.setdefault(c.head.key, []).append(c)
    relevant: set[tuple[str, int]] = set()
    stack = list(targets)
    while stack:
        key = stack.pop()
        if key in relevant:
            continue
        relevant.add(key)
        for clause in by_head.get(key, ()):
            for lit in clause.body:
                if lit.atom.key not in relevant:
                    stack.append(lit.atom.key)
    return relevant


def _stratify(clauses: Iterable[Clause]) -> dict[tuple[str, int], int]:
    """Assign strata so negative dependencies strictly descend; rejects
    programs with negation through a cycle."""
    deps: list[tuple[tuple[str, int], tuple[str, int], bool]] = []
    preds: set[tuple[str, int]] = set()
    for c in clauses:
        preds.add(c.head.key)
        for lit in c.body:
            if lit.atom.key in _BUILTIN_KEYS:
                continue
            preds.add(lit.atom.key)
            deps.append((c.head.key, lit.atom.key, lit.negated))
    strata = {p: 0 for p in preds}
    for _ in range(len(preds) + 1):
        changed = False
        for head, body, negated in deps:
            need = strata[body] + (1 if negated else 0)
            if strata[head] < need:
                strata[head] = need
                changed = True
        if not changed:
            return strata
    raise ContractError("program is not stratified: negation occurs in a cycle")


def _check_finite_terms(clause: Clause) -> None:
    for atom in [clause.head] + [l.atom for l in clause.body]:
        for arg in atom.args:
            if isinstance(arg, Struct) and arg.args and not is_ground(arg):
                raise ContractError(
                    f"clause {clause.head.name}: compound term {arg.name}(...) over "
                    "variables would make the grounding infinite"
                )


def _clause_substitutions(
    clause: Clause,
    constants: list[Term],
    cont_pos: Mapping[tuple[str, int], set[int]],
    markers: list[RVDim],
    attributes: Mapping[str, AttributeDensity],
):
    """Yield substitution maps: continuous variables range over RV markers
    (pinned directly when an attribute atom names them), object variables
    over the program constants."""
    pinned: dict[str, Term] = {}
    cvars: set[str] = set()
    for lit in clause.body:
        atom = lit.atom
        marked = cont_pos.get(atom.key, {0} if atom.key in _BUILTIN_KEYS else set())
        for i, a in enumerate(atom.args):
            if isinstance(a, Var) and i in marked:
                cvars.add(a.name)
        if atom.name in attributes and not lit.negated:
            density = attributes[atom.name]
            if len(atom.args) == density.dimension:
                for i, a in enumerate(atom.args):
                    if isinstance(a, Var):
                        want = RVDim(atom.name, i)
                        if pinned.setdefault(a.name, want) != want:
                            return  # same variable pinned to two dimensions
    for i, a in enumerate(clause.head.args):
        if isinstance(a, Var) and i in cont_pos.get(clause.head.key, set()):
            cvars.add(a.name)

    all_vars: list[str] = []
    for atom in [clause.head] + [l.atom for l in clause.body]:
        for v in _atom_vars(atom):
            if v not in all_vars:
                all_vars.append(v)
    body_pos_vars = {
        v
        for lit in clause.body
        if not lit.negated and lit.atom.key not in _BUILTIN_KEYS
        for v in _atom_vars(lit.atom)
    }
    for v in all_vars:
        if v not in body_pos_vars:
            raise ContractError(
                f"clause {clause.head.name}: variable {v} does not occur in a "
                "positive body atom; grounding would be unsafe"
            )

    free = [v for v in all_vars if v not in pinned]
    # continuous typing widens a variable's domain with the RV markers; the
    # program constants stay in, so predicates with symbolic extensions keep
    # their ordinary bindings even when some clause compares the variable
    domains = [constants + markers if v in cvars else constants for v in free]
    for combo in itertools.product(*domains):
        theta = dict(pinned)
        theta.update(zip(free, combo))
        yield theta


def _atom_vars(atom: Struct) -> list[str]:
    out: list[str] = []

    def walk(t: Term):
        if isinstance(t, Var) and t.name not in out:
            out.append(t.name)
        elif isinstance(t, Struct):
            for a in t.args:
                walk(a)

    for a in atom.args:
        walk(a)
    return out


def _ground_literal(lit: Literal, theta, attributes) -> object:
    """Ground one body literal: True/False when decidable statically, a
    CellCondition for builtins on RV markers, or a (sign, atom) pair."""
    atom = substitute(lit.atom, theta)
    if atom.key in _BUILTIN_KEYS:
        _, (lo, hi) = builtin_interval(lit.atom)
        arg = substitute(lit.atom.args[0], theta)
        if isinstance(arg, RVDim):
            return CellCondition(arg.attribute, arg.dim, lo, hi, lit.negated)
        if isinstance(arg, Num):
            holds = lo <= arg.value <= hi
            return holds != lit.negated
        # a builtin over a symbolic constant never succeeds, so its
        # negation-as-failure does
        return lit.negated
    if atom.name in attributes and len(atom.args) == attributes[atom.name].dimension:
        expected = tuple(RVDim(atom.name, i) for i in range(len(atom.args)))
        holds = tuple(atom.args) == expected
        return holds != lit.negated
    return ("-" if lit.negated else "+", atom)


def ground(program: Program) -> GroundProgram:
    """Instantiate clauses over program constants and RV markers, pruned to
    predicates relevant to the queries and evidence."""
    constants = _collect_constants(program)
    cont_pos = _continuous_positions(program)
    markers: list[Term] = [
        RVDim(d.attribute, i)
        for d in program.densities.values()
        for i in range(d.dimension)
    ]
    relevant = _relevant_predicates(program)

    clauses: list[GroundClause] = []
    kept_attrs: set[str] = set()
    for clause in program.clauses:
        if clause.head.key not in relevant:
            continue
        _check_finite_terms(clause)
        for theta in _clause_substitutions(
            clause, constants, cont_pos, markers, program.densities
        ):
            head = substitute(clause.head, theta)
            pos, neg, conds = [], [], []
            dead = False
            for lit in clause.body:
                got = _ground_literal(lit, theta, program.densities)
                if got is True:
                    if lit.atom.name in program.densities:
                        kept_attrs.add(lit.atom.name)
                    continue
                if got is False:
                    dead = True
                    break
                if isinstance(got, CellCondition):
                    kept_attrs.add(got.attribute)
                    conds.append(got)
                elif got[0] == "+":
                    pos.append(got[1])
                else:
                    neg.append(got[1])
            if not dead:
                clauses.append(GroundClause(head, tuple(pos), tuple(neg), tuple(conds)))

    true_atoms: set[Struct] = set()
    choice_facts: list[tuple[Struct, float]] = []
    for f in program.prob_facts:
        if f.atom.key not in relevant:
            continue
        vs = _atom_vars(f.atom)
        combos = itertools.product(constants, repeat=len(vs)) if vs else [()]
        for combo in combos:
            atom = substitute(f.atom, dict(zip(vs, combo)))
            if f.probability >= 1.0:
                true_atoms.add(atom)
            elif f.probability > 0.0:
                choice_facts.append((atom, f.probability))

    attributes = {a: program.densities[a] for a in kept_attrs}
    strata = _stratify(program.clauses)
    return GroundProgram(program, clauses, choice_facts, true_atoms, attributes, strata)


# --- partitioning ------------------------------------------------------------


def partition_domains(gp: GroundProgram) -> DomainPartition:
    """Cut every attribute's support at its density cutpoints plus all
    comparison constants that mention it."""
    cells: dict[str, list[HyperCube]] = {}
    deltas: dict[str, list[float]] = {}
    for name, density in gp.attributes.items():
        per_dim: list[list[float]] = []
        support = density.support
        for dim in range(density.dimension):
            lo, hi = support.bounds[dim]
            bounds = set()
            if density.pp is not None:
                bounds.update(density.pp.cutpoints)
            else:
                for piece in density.pieces:
                    bounds.update(piece.box.bounds[dim])
            for clause in gp.clauses:
                for cond in clause.conditions:
                    if cond.attribute == name and cond.dim == dim:
                        for v in (cond.lo, cond.hi):
                            if math.isnan(v):
                                raise ContractError("comparison constant is NaN")
                            if lo < v < hi:
                                bounds.add(v)
            per_dim.append(sorted(bounds))
        boxes = []
        masses = []
        for combo in itertools.product(
            *[list(zip(bs, bs[1:])) for bs in per_dim]
        ):
            box = HyperCube(tuple(combo))
            boxes.append(box)
            masses.append(density.mass_in(box))
        cells[name] = boxes
        deltas[name] = masses
    return DomainPartition(cells, deltas)


# --- enumeration -------------------------------------------------------------


def _match(pattern: Term, ground_term: Term, binding: dict[str, Term]) -> bool:
    if isinstance(pattern, Var):
        bound = binding.get(pattern.name)
        if bound is None:
            binding[pattern.name] = ground_term
            return True
        return bound == ground_term
    if isinstance(pattern, Num):
        return pattern == ground_term
    if isinstance(pattern, Struct) and isinstance(ground_term, Struct):
        if pattern.name != ground_term.name or len(pattern.args) != len(ground_term.args):
            return False
        return all(_match(p, g, binding) for p, g in zip(pattern.args, ground_term.args))
    return False


def _atom_matcher(query: Struct):
    """True-on-model predicate for a (possibly non-ground) query atom,
    read existentially over its groundings."""
    if is_ground(query):
        return lambda model: query in model

    def check(model: set[Struct]) -> bool:
        for atom in model:
            if atom.key == query.key and _match(query, atom, {}):
                return True
        return False

    return check


class _WorldEvaluator:
    """Minimal-model computation shared across worlds: clauses grouped by
    stratum, with cell conditions resolved against the current assignment."""

    def __init__(self, gp: GroundProgram, partition: DomainPartition):
        self.gp = gp
        self.partition = partition
        order = sorted({gp.strata.get(c.head.key, 0) for c in gp.clauses})
        self.layers = [
            [c for c in gp.clauses if gp.strata.get(c.head.key, 0) == s] for s in order
        ]
        self.instance_names = sorted(gp.attributes)

    def conditions_hold(self, clause: GroundClause, cell_of: dict[str, HyperCube]) -> bool:
        for cond in clause.conditions:
            cell = cell_of[cond.attribute]
            a, b = cell.bounds[cond.dim]
            inside = cond.lo <= a and b <= cond.hi
            if not inside and not (b <= cond.lo or a >= cond.hi):
                raise AssertionError(
                    "cell partially overlaps a comparison interval; "
                    "the partition should have been refined at its bounds"
                )
            if inside == cond.negated:
                return False
        return True

    def minimal_model(self, chosen: set[Struct], cell_of: dict[str, HyperCube]) -> set[Struct]:
        model = set(self.gp.true_atoms) | chosen
        for layer in self.layers:
            live = [c for c in layer if self.conditions_hold(c, cell_of)]
            changed = True
            while changed:
                changed = False
                for clause in live:
                    if clause.head in model:
                        continue
                    if all(a in model for a in clause.pos) and not any(
                        a in model for a in clause.neg
                    ):
                        model.add(clause.head)
                        changed = True
        return model


def _enumerate(
    gp: GroundProgram,
    partition: DomainPartition,
    accept,
    cap: int = DEFAULT_CHOICE_CAP,
) -> tuple[float, float, int]:
    """Sum world weights; ``accept(model) -> (count_for_evidence,
    count_for_query)`` decides which sums a world contributes to."""
    evaluator = _WorldEvaluator(gp, partition)
    names = evaluator.instance_names
    n_cells = [len(partition.cells[n]) for n in names]
    size = float(2 ** len(gp.choice_facts)) * math.prod([float(c) for c in n_cells] or [1.0])
    if size > cap:
        raise ChoiceSpaceError(size, cap)

    facts = gp.choice_facts
    ev_mass = 0.0
    q_mass = 0.0
    worlds = 0
    for cell_idx in itertools.product(*[range(c) for c in n_cells]):
        cell_of = {n: partition.cells[n][i] for n, i in zip(names, cell_idx)}
        delta = math.prod(
            partition.deltas[n][i] for n, i in zip(names, cell_idx)
        ) if names else 1.0
        if delta == 0.0:
            worlds += 2 ** len(facts)
            continue
        for mask in range(2 ** len(facts)):
            worlds += 1
            weight = delta
            chosen = set()
            for b, (atom, p) in enumerate(facts):
                if mask >> b & 1:
                    weight *= p
                    chosen.add(atom)
                else:
                    weight *= 1.0 - p
            if weight == 0.0:
                continue
            model = evaluator.minimal_model(chosen, cell_of)
            in_ev, in_q = accept(model)
            if in_ev:
                ev_mass += weight
            if in_q:
                q_mass += weight
    return ev_mass, q_mass, worlds


def _evidence_checker(evidence: tuple[Literal, ...]):
    checks = [(_atom_matcher(e.atom), e.negated) for e in evidence]

    def holds(model: set[Struct]) -> bool:
        return all(matcher(model) != negated for matcher, negated in checks)

    return holds


def success_probability(
    gp: GroundProgram,
    partition: DomainPartition,
    query: Struct,
    cap: int = DEFAULT_CHOICE_CAP,
) -> QueryResult:
    """P(query): total weight of worlds whose minimal model entails it."""
    matcher = _atom_matcher(query)
    total, q_mass, worlds = _enumerate(
        gp, partition, lambda model: (True, matcher(model)), cap
    )
    if not math.isclose(total, 1.0, rel_tol=0, abs_tol=1e-6):
        raise ContractError(f"world weights sum to {total!r}, not 1")
    return QueryResult(
        query=query,
        probability=min(1.0, max(0.0, q_mass)),
        conditioned=False,
        cells=partition.total_cells(),
        choices=worlds,
    )


def conditioned_probability(
    gp: GroundProgram,
    partition: DomainPartition,
    query: Struct,
    evidence: tuple[Literal, ...],
    cap: int = DEFAULT_CHOICE_CAP,
) -> QueryResult:
    """P(query | evidence) over the same enumeration."""
    matcher = _atom_matcher(query)
    ev_holds = _evidence_checker(evidence)

    def accept(model):
        ev = ev_holds(model)
        return ev, ev and matcher(model)

    ev_mass, both, worlds = _enumerate(gp, partition, accept, cap)
    if ev_mass <= 0.0:
        raise InconsistentEvidenceError("evidence has probability zero")
    return QueryResult(
        query=query,
        probability=min(1.0, max(0.0, both / ev_mass)),
        conditioned=True,
        cells=partition.total_cells(),
        choices=worlds,
    )


def answer_queries(program: Program, cap: int = DEFAULT_CHOICE_CAP) -> list[QueryResult]:
    """Ground once, partition once, then answer every declared query,
    conditioning on the program's evidence when present."""
    gp = ground(program)
    partition = partition_domains(gp)
    results = []
    for q in program.queries:
        if program.evidence:
            results.append(conditioned_probability(gp, partition, q, program.evidence, cap))
        else:
            results.append(success_probability(gp, partition, q, cap))
    return results
