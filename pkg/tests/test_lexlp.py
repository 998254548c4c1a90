from fractions import Fraction

import pytest

from omnisolve.constraints import sgo_constraints, slo_constraints
from omnisolve.instance import Instance, random_instance
from omnisolve.lexlp import (
    Infeasible,
    LinearProgram,
    LinearRow,
    TooLarge,
    simplex_min,
    solve_lex,
    stage_program,
    verify_feasible,
    vertex_oracle,
)

from conftest import sample_instance

F = Fraction


def lp_of(rows, objective, variables):
    return LinearProgram(
        tuple(variables),
        [LinearRow({v: F(c) for v, c in coeffs.items()}, sense, F(rhs)) for coeffs, sense, rhs in rows],
        {v: F(c) for v, c in objective.items()},
    )


class TestSimplexMin:
    def test_separable(self):
        lp = lp_of(
            [({"x1": 1}, ">=", 1), ({"x2": 1}, ">=", 1)],
            {"x1": 1, "x2": 1},
            ["x1", "x2"],
        )
        value, point = simplex_min(lp)
        assert value == 2
        assert point == {"x1": 1, "x2": 1}

    def test_infeasible_rows(self):
        lp = lp_of(
            [({"x1": 1}, ">=", 1), ({"x1": 1}, "=", F(1, 2))],
            {"x1": 1},
            ["x1"],
        )
        with pytest.raises(Infeasible):
            simplex_min(lp)

    def test_mixed_equality(self):
        lp = lp_of(
            [({"x1": 1, "x2": 1}, "=", 3), ({"x1": 1}, ">=", 1)],
            {"x1": 2, "x2": 1},
            ["x1", "x2"],
        )
        value, point = simplex_min(lp)
        assert value == 4
        assert point["x1"] == 1 and point["x2"] == 2

    def test_fractional_optimum(self):
        lp = lp_of(
            [({"x1": 2}, ">=", 1)],
            {"x1": 1},
            ["x1"],
        )
        value, point = simplex_min(lp)
        assert value == F(1, 2)
        assert point["x1"] == F(1, 2)

    def test_negative_objective_rejected(self):
        lp = lp_of([({"x1": 1}, ">=", 1)], {"x1": -1}, ["x1"])
        with pytest.raises(ValueError, match="nonnegative"):
            simplex_min(lp)

    def test_no_rows(self):
        lp = lp_of([], {"x1": 1}, ["x1"])
        value, point = simplex_min(lp)
        assert value == 0 and point["x1"] == 0

    def test_deterministic(self, inst_a):
        cs = sgo_constraints(inst_a)
        lp = stage_program(cs, 1, [])
        assert simplex_min(lp) == simplex_min(stage_program(cs, 1, []))


class TestVertexOracle:
    def test_separable(self):
        lp = lp_of(
            [({"x1": 1}, ">=", 1), ({"x2": 1}, ">=", 1)],
            {"x1": 1, "x2": 1},
            ["x1", "x2"],
        )
        assert vertex_oracle(lp) == 2

    def test_too_large(self):
        variables = [f"x{i}" for i in range(13)]
        lp = lp_of([], {v: 1 for v in variables}, variables)
        with pytest.raises(TooLarge):
            vertex_oracle(lp)

    def test_infeasible_detected(self):
        lp = lp_of(
            [({"x1": 1}, ">=", 1), ({"x1": 1}, "=", F(1, 2))],
            {"x1": 1},
            ["x1"],
        )
        with pytest.raises(Infeasible):
            vertex_oracle(lp)

    def test_inst_a_stage_values(self, inst_a):
        # stage optima for both objectives, checked by direct enumeration
        slo = slo_constraints(inst_a)
        assert vertex_oracle(stage_program(slo, 1, [])) == 2
        assert vertex_oracle(stage_program(slo, 2, [F(2)])) == 1
        sgo = sgo_constraints(inst_a)
        assert vertex_oracle(stage_program(sgo, 1, [])) == 3
        assert vertex_oracle(stage_program(sgo, 2, [F(3)])) == 0


class TestSolveLex:
    def test_inst_a_slo(self, inst_a):
        cs = slo_constraints(inst_a)
        res = solve_lex(cs)
        assert res.round_sums == (F(2), F(1))
        assert verify_feasible(cs, res.rates)
        assert res.rates.round_sums() == res.round_sums

    def test_inst_a_sgo_vertex_unique(self, inst_a):
        cs = sgo_constraints(inst_a)
        res = solve_lex(cs)
        assert res.round_sums == (F(3), F(0))
        # singleton cuts force one unit from each user in round one
        assert res.rates.rates == ((F(1), F(1), F(1)), (F(0), F(0), F(0)))

    def test_single_round_reduction(self):
        inst = Instance(2, 2, [[1], [2]], (2,))
        res = solve_lex(slo_constraints(inst))
        assert res.round_sums == (F(2),)

    def test_round_count_mismatch(self, inst_a):
        with pytest.raises(ValueError, match="rounds"):
            solve_lex(slo_constraints(inst_a), rounds=3)

    def test_modes_coincide_for_single_group(self):
        for seed in range(5):
            inst = random_instance(4, 8, 0.5, (4,), seed)
            a = solve_lex(slo_constraints(inst))
            b = solve_lex(sgo_constraints(inst))
            assert a.round_sums == b.round_sums

    def test_feasibility_and_zero_forcing(self):
        for seed in range(8):
            inst = sample_instance(seed)
            for make in (slo_constraints, sgo_constraints):
                cs = make(inst)
                res = solve_lex(cs)
                assert verify_feasible(cs, res.rates)
                for l, i in cs.zero_forced:
                    assert res.rates.rate(l, i) == 0

    def test_stage_idempotence(self):
        # pinning a stage at its own optimum must reproduce that optimum
        for seed in range(3):
            inst = sample_instance(seed)
            cs = slo_constraints(inst)
            res = solve_lex(cs)
            for stage in range(1, cs.rounds + 1):
                lp = stage_program(cs, stage, list(res.round_sums))
                pin = LinearRow(
                    {(stage, i): F(1) for i in range(1, cs.n + 1) if (stage, i) in set(lp.variables)},
                    "=",
                    res.round_sums[stage - 1],
                )
                lp.rows.append(pin)
                value, _ = simplex_min(lp)
                assert value == res.round_sums[stage - 1]

    def test_oracle_equivalence_small(self):
        # trimmed version of the acceptance run
        for seed in range(10):
            inst = random_instance(3, 5, 0.5, (2, 3) if seed % 2 else (3,), seed)
            for make in (slo_constraints, sgo_constraints):
                cs = make(inst)
                res = solve_lex(cs)
                pinned: list[Fraction] = []
                for stage in range(1, cs.rounds + 1):
                    lp = stage_program(cs, stage, pinned)
                    assert vertex_oracle(lp) == res.round_sums[stage - 1]
                    pinned.append(res.round_sums[stage - 1])
