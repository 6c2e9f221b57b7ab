"""Greedy FOIL-style rule induction over a discretized program.

Covering loop: grow one clause at a time by appending the literal with the
best information gain on expected counts, accept it once its expected
precision clears the threshold (or flag it best-effort when no literal
improves further), remove the positives it covers, repeat.  Probabilistic
background facts contribute their probabilities multiplicatively instead
of being thresholded, so counts are expectations.  Candidate literals come
from the task's bias in declaration order, positives before negations,
which fixes all tie-breaking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ContractError
from .program import Clause, Literal, Program, Struct, Var, format_clause, is_ground
from .transform import LearningTask

PRECISION_THRESHOLD = 0.99
MAX_BODY_LITERALS = 4
MIN_GAIN = 1e-12
#: an example counts as covered once its expected body probability reaches this
COVERAGE_CUTOFF = 0.5


@dataclass(frozen=True)
class LearnedClause:
    clause: Clause
    precision: float
    #: False when the clause was kept as a best effort below the threshold
    met_threshold: bool


@dataclass(frozen=True)
class Hypothesis:
    target: tuple[str, int]
    clauses: tuple[LearnedClause, ...]
    residual_positives: tuple[Struct, ...]

    def program_text(self) -> str:
        return "".join(format_clause(lc.clause) + "\n" for lc in self.clauses)


class _FactTable:
    """Probability lookup for ground background atoms.

    Ground probabilistic facts may stack (independent coins for the same
    atom); schema facts (with variables) apply the same probability to any
    object; bare clauses with empty bodies are deterministic facts.
    """

    def __init__(self, background: Program):
        self.ground: dict[Struct, float] = {}
        self.schema: dict[tuple[str, int], float] = {}
        for f in background.prob_facts:
            if is_ground(f.atom):
                miss = 1.0 - self.ground.get(f.atom, 0.0)
                self.ground[f.atom] = 1.0 - miss * (1.0 - f.probability)
            else:
                self.schema[f.atom.key] = f.probability
        for c in background.clauses:
            if not c.body and is_ground(c.head):
                self.ground[c.head] = 1.0

    def probability(self, atom: Struct) -> float:
        if atom in self.ground:
            return self.ground[atom]
        return self.schema.get(atom.key, 0.0)


def _literal_atom(key: tuple[str, int], example: Struct) -> Struct:
    name, arity = key
    return Struct(name, example.args[:arity])


def _body_probability(key_signs, table: _FactTable, example: Struct) -> float:
    prob = 1.0
    for key, negated in key_signs:
        p = table.probability(_literal_atom(key, example))
        prob *= (1.0 - p) if negated else p
    return prob


def _log2_precision(p: float, n: float) -> float:
    return math.log2(p / (p + n))


def induce(
    task: LearningTask,
    precision_threshold: float = PRECISION_THRESHOLD,
    max_body: int = MAX_BODY_LITERALS,
) -> Hypothesis:
    """Learn an ordered clause list for the task's target predicate."""
    if not task.positives:
        raise ContractError("need at least one positive example")
    if not task.bias:
        raise ContractError("the declarative bias is empty")
    table = _FactTable(task.background)
    name, arity = task.target
    head_var = (Var("X"),) if arity == 1 else ()

    remaining = list(task.positives)
    learned: list[LearnedClause] = []
    while remaining:
        grown = _grow_clause(
            remaining, task.negatives, task.bias, table, precision_threshold, max_body
        )
        if grown is None:
            break
        body_keys, precision, met = grown
        covered = [
            e for e in remaining
            if _body_probability(body_keys, table, e) >= COVERAGE_CUTOFF
        ]
        if not covered:
            break
        body = tuple(
            Literal(Struct(key[0], head_var[: key[1]]), negated)
            for key, negated in body_keys
        )
        learned.append(
            LearnedClause(Clause(Struct(name, head_var), body), precision, met)
        )
        covered_set = set(covered)
        remaining = [e for e in remaining if e not in covered_set]
        if not met:
            break  # a below-threshold clause is kept only as the final best effort
    return Hypothesis(task.target, tuple(learned), tuple(remaining))


def _grow_clause(positives, negatives, bias, table, precision_threshold, max_body):
    """Greedy literal refinement; returns (body, expected precision, met
    threshold flag) or None when no literal covers any positive."""
    body: list[tuple[tuple[str, int], bool]] = []
    p0 = float(len(positives))
    n0 = float(len(negatives))
    while len(body) < max_body:
        best = None
        for key in bias:
            for negated in (False, True):
                if (key, negated) in body or (key, not negated) in body:
                    continue
                trial = body + [(key, negated)]
                p1 = sum(_body_probability(trial, table, e) for e in positives)
                n1 = sum(_body_probability(trial, table, e) for e in negatives)
                if p1 <= 0.0:
                    continue
                gain = p1 * (_log2_precision(p1, n1) - _log2_precision(p0, n0))
                if best is None or gain > best[0] + MIN_GAIN:
                    best = (gain, key, negated, p1, n1)
        if best is None or best[0] <= MIN_GAIN:
            break
        _, key, negated, p0, n0 = best
        body.append((key, negated))
        if p0 / (p0 + n0) >= precision_threshold:
            return body, p0 / (p0 + n0), True
    if not body:
        return None
    return body, p0 / (p0 + n0), False


def coverage_table(hypothesis: Hypothesis, task: LearningTask) -> dict[Struct, float]:
    """Expected coverage weight per example under the whole hypothesis:
    clause bodies are independent products, clauses combine as a noisy-or."""
    table = _FactTable(task.background)
    out: dict[Struct, float] = {}
    for example in task.positives + task.negatives:
        miss = 1.0
        for lc in hypothesis.clauses:
            key_signs = [(l.atom.key, l.negated) for l in lc.clause.body]
            miss *= 1.0 - _body_probability(key_signs, table, example)
        out[example] = 1.0 - miss
    return out


def score_hypothesis(hypothesis: Hypothesis, task: LearningTask) -> dict:
    """Per-theory averages: rule precision, negations per body, literals
    per body, and the rule count (the usual rule-quality summary)."""
    table = _FactTable(task.background)
    rules = len(hypothesis.clauses)
    if rules == 0:
        return {"prec": None, "neg": None, "pred": None, "rules": 0}
    precisions = []
    negs = []
    lens = []
    for lc in hypothesis.clauses:
        key_signs = [(l.atom.key, l.negated) for l in lc.clause.body]
        p = sum(_body_probability(key_signs, table, e) for e in task.positives)
        n = sum(_body_probability(key_signs, table, e) for e in task.negatives)
        precisions.append(p / (p + n) if p + n > 0 else 0.0)
        negs.append(sum(1 for l in lc.clause.body if l.negated))
        lens.append(len(lc.clause.body))
    return {
        "prec": sum(precisions) / rules,
        "neg": sum(negs) / rules,
        "pred": sum(lens) / rules,
        "rules": rules,
    }
