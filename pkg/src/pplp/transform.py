"""Hybrid-to-discrete program transformation for rule learning.

Every polynomial piece weight is integrated over its guard box and replaced
by a scalar probabilistic fact; guard clauses stay in the program verbatim.
When rules or evidence compare an attribute against constants inside a
piece, the piece is first refined at those constants so the discrete facts
can represent the finer intervals exactly.

The emitted piece coins are independent in the discrete program; the
mutual exclusivity of sibling cells is not representable there, matching
the scalar-fact target semantics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import ContractError
from .polynomials import HyperCube
from .program import (
    BUILTINS,
    ProbFact,
    Program,
    Struct,
    Var,
    builtin_interval,
    format_atom,
    is_ground,
    print_program,
)

_BUILTIN_KEYS = {(name, arity) for name, arity in BUILTINS.items()}


@dataclass(frozen=True)
class FactMapping:
    """Where a transformed fact came from: attribute, box, scalar mass."""

    atom: Struct
    attribute: str
    box: HyperCube
    probability: float


@dataclass(frozen=True)
class DiscretizedProgram:
    program: Program
    mapping: tuple[FactMapping, ...]

    def mapping_json(self) -> str:
        rows = [
            {
                "piece": format_atom(m.atom),
                "attribute": m.attribute,
                "box": [list(b) for b in m.box.bounds],
                "probability": m.probability,
            }
            for m in self.mapping
        ]
        return json.dumps(rows, indent=2, sort_keys=True) + "\n"


def _direct_cut_constants(program: Program) -> dict[str, dict[int, set[float]]]:
    """Comparison constants applied to an attribute's variable in clauses
    that mention the attribute atom directly (including evidence-defining
    rules); these refine the piece boxes before scalarisation."""
    cuts: dict[str, dict[int, set[float]]] = {}
    for clause in program.clauses:
        bound: dict[str, tuple[str, int]] = {}
        for lit in clause.body:
            atom = lit.atom
            if atom.name in program.densities and not lit.negated:
                density = program.densities[atom.name]
                if len(atom.args) == density.dimension:
                    for i, a in enumerate(atom.args):
                        if isinstance(a, Var):
                            bound[a.name] = (atom.name, i)
        if not bound:
            continue
        for lit in clause.body:
            if lit.atom.key not in _BUILTIN_KEYS:
                continue
            var, (lo, hi) = builtin_interval(lit.atom)
            if var not in bound:
                continue
            attr, dim = bound[var]
            support = program.densities[attr].support.bounds[dim]
            per_attr = cuts.setdefault(attr, {})
            for v in (lo, hi):
                if support[0] < v < support[1]:
                    per_attr.setdefault(dim, set()).add(v)
    return cuts


def _split_box(box: HyperCube, cuts: dict[int, set[float]]) -> list[HyperCube]:
    per_dim: list[list[tuple[float, float]]] = []
    for d, (lo, hi) in enumerate(box.bounds):
        edges = sorted({lo, hi} | {v for v in cuts.get(d, ()) if lo < v < hi})
        per_dim.append(list(zip(edges, edges[1:])))
    out = []

    def rec(d: int, acc: list[tuple[float, float]]):
        if d == len(per_dim):
            out.append(HyperCube(tuple(acc)))
            return
        for seg in per_dim[d]:
            rec(d + 1, acc + [seg])

    rec(0, [])
    return out


def discretize_program(program: Program) -> DiscretizedProgram:
    """Replace each piece weight by its integrated scalar probability."""
    cuts = _direct_cut_constants(program)
    new_facts: list[ProbFact] = list(program.prob_facts)
    mapping: list[FactMapping] = []
    for attr, density in program.densities.items():
        total = 0.0
        for piece in density.pieces:
            for a, b in piece.box.bounds:
                if not (math.isfinite(a) and math.isfinite(b)):
                    raise ContractError(
                        f"piece {piece.predicate.name} has unguarded infinite support"
                    )
            sub_boxes = _split_box(piece.box, cuts.get(attr, {}))
            for idx, box in enumerate(sub_boxes):
                mass = density.mass_in(box)
                total += mass
                if len(sub_boxes) == 1:
                    atom = piece.predicate
                else:
                    atom = Struct(f"{piece.predicate.name}_r{idx + 1}", piece.predicate.args)
                new_facts.append(ProbFact(min(1.0, max(0.0, mass)), atom))
                mapping.append(FactMapping(atom, attr, box, mass))
        if abs(total - 1.0) > 1e-6:
            raise ContractError(
                f"transformed probabilities for {attr} sum to {total!r}, not 1"
            )
    discrete = Program(
        clauses=program.clauses,
        prob_facts=tuple(new_facts),
        continuous_facts=(),
        queries=program.queries,
        evidence=program.evidence,
        densities={},
    )
    return DiscretizedProgram(discrete, tuple(mapping))


# --- learning-task emission --------------------------------------------------


@dataclass(frozen=True)
class LearningTask:
    """Inputs for deterministic rule induction over a discrete program."""

    background: Program
    target: tuple[str, int]
    positives: tuple[Struct, ...]
    negatives: tuple[Struct, ...]
    #: candidate body predicates, in declaration order (ties in the
    #: learner break by this order)
    bias: tuple[tuple[str, int], ...]


def emit_learning_task(
    dp: DiscretizedProgram,
    target: tuple[str, int],
    examples: list[Struct],
) -> LearningTask:
    """Closed-world task files: the positives are given; negatives are the
    remaining target atoms over the objects the examples mention."""
    name, arity = target
    if arity > 1:
        raise ContractError("induction targets of arity > 1 are not supported")
    if not examples:
        raise ContractError("the example set is empty")
    background = dp.program
    defined = background.defined_keys()
    if (name, arity) in defined:
        raise ContractError(f"target {name}/{arity} already appears in the background")
    for e in examples:
        if e.key != (name, arity) or not is_ground(e):
            raise ContractError(f"example {format_atom(e)} is not a ground {name}/{arity} fact")

    if arity == 0:
        positives = (Struct(name),)
        negatives: tuple[Struct, ...] = ()
    else:
        # example domain: objects named by the examples plus the objects the
        # background's ground facts describe; everything not listed positive
        # is negative by the closed-world assumption
        domain: dict[Struct, None] = {}
        for e in examples:
            domain.setdefault(e.args[0])
        ground_atoms = [f.atom for f in background.prob_facts if is_ground(f.atom)]
        ground_atoms += [c.head for c in background.clauses if not c.body and is_ground(c.head)]
        for atom in ground_atoms:
            for a in atom.args:
                if isinstance(a, Struct) and not a.args:
                    domain.setdefault(a)
        positives = tuple(dict.fromkeys(examples))
        pos_set = set(positives)
        negatives = tuple(
            Struct(name, (obj,)) for obj in domain if Struct(name, (obj,)) not in pos_set
        )

    bias: list[tuple[str, int]] = []
    for m in dp.mapping:
        if m.atom.key not in bias:
            bias.append(m.atom.key)
    for f in background.prob_facts:
        if f.atom.key not in bias:
            bias.append(f.atom.key)
    for c in background.clauses:
        if not c.body and c.head.key not in bias:
            bias.append(c.head.key)
    # propositional candidates always apply; unary ones only to unary targets
    bias = [
        key for key in bias
        if key != (name, arity)
        and key not in _BUILTIN_KEYS
        and (key[1] == 0 or (arity == 1 and key[1] == 1))
    ]
    if not bias:
        raise ContractError("no usable candidate predicates for the declared bias")
    return LearningTask(background, (name, arity), positives, negatives, tuple(bias))


def task_files(task: LearningTask) -> dict[str, str]:
    """Render the task as program-syntax files plus a bias listing."""
    examples_text = "".join(f"{format_atom(e)}.\n" for e in task.positives)
    bias_text = "".join(f"candidate({name}, {arity}).\n" for name, arity in task.bias)
    target_text = f"target({task.target[0]}, {task.target[1]}).\n"
    return {
        "background.pl": print_program(task.background),
        "examples.pl": examples_text,
        "bias.pl": target_text + bias_text,
    }
