import numpy as np
import pytest

from pplp.engine import answer_queries
from pplp.errors import ContractError
from pplp.program import Struct, parse
from pplp.rulelearn import coverage_table, induce, score_hypothesis
from pplp.transform import DiscretizedProgram, LearningTask, emit_learning_task


def planted_fixture(n_objects=60, seed=3):
    """Background where t(X) holds exactly when att_lo(X) and q(X); two
    decoy predicates keep the search honest."""
    rng = np.random.default_rng(seed)
    lines = []
    positives = []
    negatives = []
    for i in range(1, n_objects + 1):
        o = f"o{i}"
        lo = rng.random() < 0.5
        q = rng.random() < 0.5
        lines.append(f"att_lo({o})." if lo else f"att_hi({o}).")
        if q:
            lines.append(f"q({o}).")
        if rng.random() < 0.5:
            lines.append(f"r({o}).")
        (positives if lo and q else negatives).append(o)
    background = parse("\n".join(lines) + "\n")
    task = emit_learning_task(
        DiscretizedProgram(background, ()),
        ("t", 1),
        [Struct("t", (Struct(o),)) for o in positives],
    )
    return task, positives, negatives, "\n".join(lines) + "\n"


class TestInduce:
    def test_planted_rule_recovered_exactly(self):
        task, _, _, _ = planted_fixture()
        hypothesis = induce(task)
        assert len(hypothesis.clauses) == 1
        (lc,) = hypothesis.clauses
        assert lc.precision == pytest.approx(1.0)
        assert lc.met_threshold
        body = {(l.atom.name, l.negated) for l in lc.clause.body}
        assert body == {("att_lo", False), ("q", False)}
        assert hypothesis.residual_positives == ()

    def test_target_equal_to_background_predicate(self):
        text = "p(a).\np(b).\nq(c).\n"
        task = emit_learning_task(
            DiscretizedProgram(parse(text), ()),
            ("t", 1),
            [Struct("t", (Struct("a"),)), Struct("t", (Struct("b"),))],
        )
        hypothesis = induce(task)
        assert len(hypothesis.clauses) == 1
        (lc,) = hypothesis.clauses
        assert [l.atom.name for l in lc.clause.body] == ["p"]
        assert lc.precision == pytest.approx(1.0)

    def test_inconsistent_task_reports_residuals(self):
        # one positive and one negative with identical features: nothing
        # separates them
        text = "r(a).\nr(b).\n"
        task = emit_learning_task(
            DiscretizedProgram(parse(text), ()), ("t", 1), [Struct("t", (Struct("a"),))]
        )
        hypothesis = induce(task)
        assert hypothesis.clauses == ()
        assert hypothesis.residual_positives == (Struct("t", (Struct("a"),)),)

    def test_no_positive_examples_rejected(self):
        text = "r(a).\n"
        task = LearningTask(parse(text), ("t", 1), (), (), (("r", 1),))
        with pytest.raises(ContractError):
            induce(task)

    def test_empty_bias_rejected(self):
        text = "r(a).\n"
        task = LearningTask(parse(text), ("t", 1), (Struct("t", (Struct("a"),)),), (), ())
        with pytest.raises(ContractError):
            induce(task)

    def test_best_effort_clause_flagged_below_threshold(self):
        # f covers every positive but also a third of the negatives, and
        # nothing else separates: the clause is kept, flagged, and ends the
        # covering loop
        lines = []
        positives = []
        for i in range(30):
            o = f"o{i}"
            if i < 12:
                lines.append(f"f({o}).")
                positives.append(Struct("t", (Struct(o),)))
            elif i < 18:
                lines.append(f"f({o}).")
            else:
                lines.append(f"g({o}).")
        task = emit_learning_task(
            DiscretizedProgram(parse("\n".join(lines) + "\n"), ()), ("t", 1), positives
        )
        hypothesis = induce(task)
        assert len(hypothesis.clauses) == 1
        (lc,) = hypothesis.clauses
        assert not lc.met_threshold
        assert lc.precision == pytest.approx(12 / 18)
        assert hypothesis.residual_positives == ()

    def test_determinism(self):
        task, _, _, _ = planted_fixture(seed=9)
        assert induce(task) == induce(task)

    def test_probabilistic_background_expected_counts(self):
        lines = []
        positives = []
        for i in range(1, 11):
            o = f"o{i}"
            lines.append(f"obj({o}).")
            if i <= 5:
                lines.append(f"q({o}).")
                positives.append(Struct("t", (Struct(o),)))
        lines.append("0.6 :: s(X).")
        task = emit_learning_task(
            DiscretizedProgram(parse("\n".join(lines) + "\n"), ()), ("t", 1), positives
        )
        hypothesis = induce(task)
        (lc,) = hypothesis.clauses
        # the deterministic separator beats the uninformative 0.6 coin
        assert [l.atom.name for l in lc.clause.body] == ["q"]


class TestCoverageTable:
    def test_deterministic_fixture_weights(self):
        task, positives, negatives, _ = planted_fixture(n_objects=30, seed=4)
        hypothesis = induce(task)
        table = coverage_table(hypothesis, task)
        for e in task.positives:
            assert table[e] == pytest.approx(1.0)
        for e in task.negatives:
            assert table[e] == pytest.approx(0.0)
        assert all(0.0 <= w <= 1.0 for w in table.values())

    def test_probabilistic_weights_multiply(self):
        text = "obj(a).\n0.6 :: s(X).\n0.5 :: u(X).\n"
        task = LearningTask(
            parse(text), ("t", 1), (Struct("t", (Struct("a"),)),), (),
            (("s", 1), ("u", 1)),
        )
        from pplp.program import Clause, Literal, Var
        from pplp.rulelearn import Hypothesis, LearnedClause
        clause = Clause(
            Struct("t", (Var("X"),)),
            (Literal(Struct("s", (Var("X"),))), Literal(Struct("u", (Var("X"),)))),
        )
        h = Hypothesis(("t", 1), (LearnedClause(clause, 1.0, True),), ())
        table = coverage_table(h, task)
        assert table[Struct("t", (Struct("a"),))] == pytest.approx(0.3)


class TestScoreHypothesis:
    def test_single_clause_counts(self):
        text = "a(x1).\nb(x1).\nc(x2).\n"
        task = emit_learning_task(
            DiscretizedProgram(parse(text), ()), ("t", 1), [Struct("t", (Struct("x1"),))]
        )
        hypothesis = induce(task, max_body=4)
        stats = score_hypothesis(hypothesis, task)
        assert stats["rules"] == 1
        assert stats["prec"] == pytest.approx(1.0)
        assert stats["pred"] >= 1

    def test_empty_hypothesis(self):
        text = "r(a).\nr(b).\n"
        task = emit_learning_task(
            DiscretizedProgram(parse(text), ()), ("t", 1), [Struct("t", (Struct("a"),))]
        )
        stats = score_hypothesis(induce(task), task)
        assert stats == {"prec": None, "neg": None, "pred": None, "rules": 0}

    def test_mean_precision_of_two_clauses(self):
        from pplp.program import Clause, Literal, Var
        from pplp.rulelearn import Hypothesis, LearnedClause

        text = "\n".join(
            [f"a({o})." for o in ("x1", "x2", "x3")]
            + ["b(x4).", "b(x5).", "a(x6).", "b(x6)."]
        ) + "\n"
        task = emit_learning_task(
            DiscretizedProgram(parse(text), ()),
            ("t", 1),
            [Struct("t", (Struct(o),)) for o in ("x1", "x2", "x3", "x4", "x5")],
        )
        h = Hypothesis(
            ("t", 1),
            (
                LearnedClause(
                    Clause(Struct("t", (Var("X"),)), (Literal(Struct("a", (Var("X"),))),)),
                    0.0, True,
                ),
                LearnedClause(
                    Clause(Struct("t", (Var("X"),)), (Literal(Struct("b", (Var("X"),))),)),
                    0.0, True,
                ),
            ),
            (),
        )
        stats = score_hypothesis(h, task)
        # a covers x1,x2,x3 (pos) and x6 (neg): 3/4; b covers x4,x5 and x6: 2/3
        assert stats["prec"] == pytest.approx((3 / 4 + 2 / 3) / 2)
        assert stats["rules"] == 2


class TestSoundness:
    def test_learned_rules_cover_no_negative_via_engine(self):
        task, positives, negatives, background_text = planted_fixture(n_objects=40, seed=12)
        hypothesis = induce(task)
        program_text = background_text + hypothesis.program_text()
        for o in negatives[:8]:
            text = program_text + f"query(t({o})).\n"
            (res,) = answer_queries(parse(text))
            assert res.probability == 0.0
        for o in positives[:8]:
            text = program_text + f"query(t({o})).\n"
            (res,) = answer_queries(parse(text))
            assert res.probability == 1.0
