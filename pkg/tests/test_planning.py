"""Tests for the STRIPS planning compiler."""

from __future__ import annotations

import numpy as np
import pytest
from conftest import MOVE_L_P, MOVE_P_L, ROCKET_PLAN, UNLOAD_A_P

from quboforge.models import Assignment, all_energies, config_from_index, energy
from quboforge.planning import (
    Operator,
    PlanningProblem,
    PlanViolation,
    plan_compile,
    plan_decode_validate,
    plan_layout,
    planning_problem_from_dict,
    simulate_plan,
)


def hard_sum(p, L, x, y):
    """Independent tally of the four hard penalty families."""
    e = 0
    for i in p.init_true:
        e += 1 - x[0, i]
    for i in p.init_false:
        e += x[0, i]
    for i in p.goal_true:
        e += 1 - x[L, i]
    for i in p.goal_false:
        e += x[L, i]
    for t in range(1, L + 1):
        for j, op in enumerate(p.operators):
            for i in op.pre_true:
                e += (1 - x[t - 1, i]) * y[t - 1, j]
            for i in op.pre_false:
                e += x[t - 1, i] * y[t - 1, j]
            for i in op.add:
                e += y[t - 1, j] * (1 - x[t, i])
            for i in op.delete:
                e += y[t - 1, j] * x[t, i]
        for j, opj in enumerate(p.operators):
            for k, opk in enumerate(p.operators):
                if j == k:
                    continue
                w = len(opj.pre_true & opk.delete) + len(opj.pre_false & opk.add)
                e += w * y[t - 1, j] * y[t - 1, k]
    return int(e)


def noop_sum(L, x, eps):
    """Persistence bias: -eps per unchanged proposition, +eps per flip."""
    total = 0.0
    for t in range(1, L + 1):
        for i in range(x.shape[1]):
            total -= eps * (1 - 2 * int(x[t - 1, i])) * (1 - 2 * int(x[t, i]))
    return total


def lift(layout, x, y) -> Assignment:
    """Assignment over the layout's free variables matching full matrices."""
    bits = np.zeros(layout.num_vars, dtype=np.int8)
    for pos, (kind, t, i) in enumerate(layout.keys):
        bits[pos] = x[t, i] if kind == "x" else y[t - 1, i]
    for (kind, t, i), v in layout.fixed.items():
        have = x[t, i] if kind == "x" else y[t - 1, i]
        assert have == v, f"matrices contradict fixed value at ({kind},{t},{i})"
    return Assignment.bits(bits)


def two_step_toy() -> PlanningProblem:
    """make0 enables make1; both goal propositions start false."""
    ops = (
        Operator("make0", add={0}),
        Operator("make1", pre_true={0}, add={1}),
    )
    return PlanningProblem(
        num_props=2, operators=ops, init_true=frozenset(), goal_true=frozenset({0, 1})
    )


def clash_toy() -> PlanningProblem:
    """Two operators competing for proposition 0 at the same step."""
    ops = (
        Operator("consume", pre_true={0}, add={1}, delete={0}),
        Operator("check", pre_true={0}, pre_false={1}, delete={0}),
    )
    return PlanningProblem(
        num_props=2, operators=ops, init_true=frozenset({0}), goal_true=frozenset({1})
    )


class TestTypes:
    def test_operator_validation(self):
        with pytest.raises(ValueError, match="preconditions"):
            Operator("bad", pre_true={0}, pre_false={0})
        with pytest.raises(ValueError, match="effects"):
            Operator("bad", add={1}, delete={1})

    def test_problem_validation(self):
        op = Operator("noop_op")
        with pytest.raises(ValueError, match="num_props"):
            PlanningProblem(0, (), frozenset())
        with pytest.raises(ValueError, match="out of range"):
            PlanningProblem(2, (op,), init_true=frozenset({5}))
        with pytest.raises(ValueError, match="both true and false"):
            PlanningProblem(
                2, (op,), frozenset(), goal_true=frozenset({1}), goal_false=frozenset({1})
            )
        with pytest.raises(ValueError, match="out of range"):
            PlanningProblem(2, (Operator("bad", add={7}),), frozenset())
        with pytest.raises(ValueError, match="prop_names"):
            PlanningProblem(2, (), frozenset(), prop_names=("only_one",))

    def test_from_dict(self):
        d = {
            "propositions": ["p", "q"],
            "operators": [{"name": "go", "pre_true": ["p"], "add": ["q"], "delete": ["p"]}],
            "initial": ["p"],
            "goal_true": ["q"],
        }
        p = planning_problem_from_dict(d)
        assert p.num_props == 2
        assert p.prop_names == ("p", "q")
        assert p.init_true == {0}
        assert p.goal_true == {1}
        assert p.operators[0].pre_true == {0}
        assert p.operators[0].add == {1}
        with pytest.raises(ValueError, match="duplicate"):
            planning_problem_from_dict({"propositions": ["p", "p"]})
        with pytest.raises(ValueError, match="unknown proposition"):
            planning_problem_from_dict({"propositions": ["p"], "initial": ["z"]})


class TestLayoutAndPropagation:
    def test_chronological_order_unreduced(self):
        p = PlanningProblem(1, (Operator("set0", add={0}),), frozenset())
        layout = plan_layout(p, 2, reduce=False)
        assert layout.keys == (
            ("x", 0, 0),
            ("y", 1, 0),
            ("x", 1, 0),
            ("y", 2, 0),
            ("x", 2, 0),
        )
        assert layout.fixed == {}
        assert not layout.unsat

    def test_initial_state_always_fixed(self, rocket):
        layout = plan_layout(rocket, 2)
        for i in range(rocket.num_props):
            want = 1 if i in rocket.init_true else 0
            assert layout.fixed[("x", 0, i)] == want
            assert ("x", 0, i) not in layout.keys

    def test_unproducible_precondition_disables_operator(self):
        p = PlanningProblem(
            2,
            (Operator("make1", pre_true={0}, add={1}),),
            init_true=frozenset(),
            goal_true=frozenset({1}),
        )
        layout = plan_layout(p, 2)
        assert layout.fixed[("y", 1, 0)] == 0
        assert layout.fixed[("y", 2, 0)] == 0
        assert layout.unsat
        assert layout.num_vars == 0
        # the unreduced model still admits zero-hard-energy assignments that
        # flip the goal proposition without any operator; reduction is what
        # makes the positive minimum a proof of unsolvability
        unred = plan_layout(p, 2, reduce=False)
        hards = []
        for m in range(1 << unred.num_vars):
            a = config_from_index(m, unred.num_vars)
            hards.append(len(plan_decode_validate(p, 2, a, reduce=False).violations))
        assert min(hards) == 0
        q = plan_compile(p, 2)
        assert q.num_vars == 0
        assert q.offset > 0.0

    def test_frozen_trivial_domain(self):
        p = PlanningProblem(
            2, (), init_true=frozenset({0}), goal_true=frozenset({0}), goal_false=frozenset({1})
        )
        layout = plan_layout(p, 1)
        assert layout.num_vars == 0
        assert not layout.unsat
        q = plan_compile(p, 1)
        a = Assignment.bits([])
        assert energy(q, a) == pytest.approx(-0.5)  # hard terms 0, bias -2*(1/4)
        report = plan_decode_validate(p, 1, a)
        assert report.valid
        assert report.plan == ((),)
        assert np.array_equal(report.trajectory, [[1, 0], [1, 0]])

    def test_goal_contradicting_initial_is_positive_everywhere(self):
        p = PlanningProblem(2, (), init_true=frozenset({0}), goal_true=frozenset({1}))
        layout = plan_layout(p, 1)
        assert layout.unsat
        assert layout.num_vars == 0
        q = plan_compile(p, 1)
        assert energy(q, Assignment.bits([])) == pytest.approx(0.5)  # 1 - 2*(1/4)

    def test_rocket_layout_counts(self, rocket):
        l2 = plan_layout(rocket, 2)
        assert l2.unsat  # goal propositions unreachable in two steps
        assert l2.num_vars == 22
        l3 = plan_layout(rocket, 3)
        assert not l3.unsat
        assert l3.num_vars == 36
        # unload at the port needs a step-1 load and the step-1 move, which
        # exclude each other, so no step-2 unload can run
        assert l2.fixed[("y", 2, UNLOAD_A_P)] == 0
        assert l3.fixed[("y", 2, UNLOAD_A_P)] == 0
        assert ("y", 3, UNLOAD_A_P) in l3.index
        # the single fuel unit is spent by the first move
        assert l3.fixed[("y", 2, MOVE_P_L)] == 0
        assert l3.fixed[("y", 3, MOVE_P_L)] == 0
        # goal fixing at the horizon
        assert l3.fixed[("x", 3, 2)] == 1
        assert l3.fixed[("x", 1, 2)] == 0
        assert l3.fixed[("x", 2, 2)] == 0

    def test_ground_plans_unchanged_by_reduction(self):
        p = two_step_toy()
        L = 2
        plans = {}
        energies = {}
        for reduce in (False, True):
            q = plan_compile(p, L, reduce=reduce)
            layout = plan_layout(p, L, reduce=reduce)
            e = all_energies(q)
            best = e.min()
            idx = np.flatnonzero(np.isclose(e, best, rtol=0.0, atol=1e-12))
            plans[reduce] = {
                layout.plan(config_from_index(int(m), layout.num_vars)) for m in idx
            }
            energies[reduce] = best
        assert energies[False] == pytest.approx(energies[True], abs=1e-12)
        assert plans[False] == plans[True]
        assert energies[True] == pytest.approx(0.0)


class TestCompile:
    def test_epsilon_validation(self):
        p = two_step_toy()
        for bad in (0.0, -0.1, 1.0 / 4.0, 0.5):
            with pytest.raises(ValueError, match="epsilon"):
                plan_compile(p, 2, epsilon=bad)
        plan_compile(p, 2, epsilon=0.2)  # below 1/(2*2)

    def test_horizon_validation(self):
        with pytest.raises(ValueError, match="horizon"):
            plan_compile(two_step_toy(), 0)

    def test_unreduced_variable_counts(self, rocket):
        assert plan_compile(rocket, 2, reduce=False).num_vars == 3 * 9 + 2 * 10
        assert plan_compile(rocket, 3, reduce=False).num_vars == 4 * 9 + 3 * 10

    def test_reduction_substitutes_exactly(self):
        p = two_step_toy()
        L = 2
        red = plan_layout(p, L)
        qr = plan_compile(p, L)
        qf = plan_compile(p, L, reduce=False)
        assert red.num_vars == 4
        for m in range(1 << red.num_vars):
            a = config_from_index(m, red.num_vars)
            x = red.trajectory(a)
            y = red.executed(a)
            full_bits = np.concatenate(
                [x[0]] + [np.concatenate([y[t - 1], x[t]]) for t in range(1, L + 1)]
            )
            assert energy(qr, a) == pytest.approx(
                energy(qf, Assignment.bits(full_bits)), abs=1e-12
            )


class TestValidation:
    def test_validator_iff_zero_hard_energy(self):
        p = clash_toy()
        L = 2
        layout = plan_layout(p, L, reduce=False)
        q = plan_compile(p, L, reduce=False)
        eps = 1.0 / (2 * p.num_props * L)
        e = all_energies(q)
        n_valid = 0
        for m in range(1 << layout.num_vars):
            a = config_from_index(m, layout.num_vars)
            x = layout.trajectory(a)
            y = layout.executed(a)
            h = hard_sum(p, L, x, y)
            report = plan_decode_validate(p, L, a, reduce=False)
            assert report.valid == (h == 0)
            assert len(report.violations) == h
            assert report.hard_energy == h
            assert e[m] == pytest.approx(h + noop_sum(L, x, eps), abs=1e-12)
            n_valid += report.valid
        assert n_valid > 0

    def test_valid_plan_has_no_violations(self, rocket):
        L = 3
        layout = plan_layout(rocket, L)
        x = np.zeros((4, 9), dtype=np.int8)
        x[0, [0, 1, 4, 8]] = 1  # containers, rocket, fuel at launch
        x[1, [4, 8, 6, 7]] = 1  # containers loaded
        x[2, [6, 7, 5]] = 1  # moved to port, fuel spent
        x[3, [5, 2, 3]] = 1  # containers unloaded at port
        y = np.zeros((3, 10), dtype=np.int8)
        for t, step in enumerate(ROCKET_PLAN):
            y[t, list(step)] = 1
        a = lift(layout, x, y)
        report = plan_decode_validate(rocket, L, a)
        assert report.valid
        assert report.violations == ()
        assert report.plan == ROCKET_PLAN
        assert np.array_equal(report.trajectory, x)
        # 11 propositions flip along the plan, 16 persist
        q = plan_compile(rocket, L)
        assert energy(q, a) == pytest.approx(-5.0 / 54.0)

    def test_precondition_violation_reported(self):
        p = PlanningProblem(
            2,
            (Operator("make0", add={0}), Operator("make1", pre_true={0}, add={1})),
            init_true=frozenset(),
            goal_true=frozenset({1}),
        )
        layout = plan_layout(p, 1, reduce=False)
        x = np.array([[0, 0], [0, 1]], dtype=np.int8)
        y = np.array([[0, 1]], dtype=np.int8)
        report = plan_decode_validate(p, 1, lift(layout, x, y), reduce=False)
        assert not report.valid
        assert report.violations == (PlanViolation("precondition", 1, i=0, j=1),)

    def test_effect_violation_reported(self):
        p = PlanningProblem(
            2,
            (Operator("make0", add={0}), Operator("make1", pre_true={0}, add={1})),
            init_true=frozenset(),
            goal_true=frozenset(),
        )
        layout = plan_layout(p, 1, reduce=False)
        x = np.array([[0, 0], [0, 0]], dtype=np.int8)
        y = np.array([[1, 0]], dtype=np.int8)
        report = plan_decode_validate(p, 1, lift(layout, x, y), reduce=False)
        assert report.violations == (PlanViolation("effect", 1, i=0, j=0),)

    def test_conflict_violations_reported(self):
        p = clash_toy()
        layout = plan_layout(p, 1, reduce=False)
        x = np.array([[1, 0], [0, 1]], dtype=np.int8)
        y = np.array([[1, 1]], dtype=np.int8)
        report = plan_decode_validate(p, 1, lift(layout, x, y), reduce=False)
        assert set(report.violations) == {
            PlanViolation("conflict", 1, i=0, j=0, k=1),
            PlanViolation("conflict", 1, i=0, j=1, k=0),
            PlanViolation("conflict", 1, i=1, j=1, k=0),
        }
        assert report.hard_energy == 3.0

    def test_boundary_violations_reported(self):
        p = clash_toy()
        layout = plan_layout(p, 1, reduce=False)
        x = np.array([[0, 0], [0, 0]], dtype=np.int8)  # initial state wrong, goal unmet
        y = np.zeros((1, 2), dtype=np.int8)
        report = plan_decode_validate(p, 1, lift(layout, x, y), reduce=False)
        assert set(report.violations) == {
            PlanViolation("boundary", 0, i=0),
            PlanViolation("boundary", 1, i=1),
        }

    def test_random_assignments_cross_check(self, rocket):
        L = 2
        layout = plan_layout(rocket, L, reduce=False)
        q = plan_compile(rocket, L, reduce=False)
        eps = 1.0 / (2 * 9 * L)
        rng = np.random.default_rng(7)
        for _ in range(50):
            a = Assignment.bits(rng.integers(0, 2, size=layout.num_vars))
            x = layout.trajectory(a)
            y = layout.executed(a)
            h = hard_sum(rocket, L, x, y)
            report = plan_decode_validate(rocket, L, a, reduce=False)
            assert report.valid == (h == 0)
            assert len(report.violations) == h
            assert energy(q, a) == pytest.approx(h + noop_sum(L, x, eps), abs=1e-9)

    def test_assignment_length_checked(self, rocket):
        with pytest.raises(ValueError, match="length"):
            plan_decode_validate(rocket, 2, Assignment.bits([0, 1]))


class TestFlipFreedom:
    def test_reduced_l3_minimum_is_flip_only(self, rocket):
        # Hard terms never force frame persistence, so the energy minimum
        # executes nothing and lets the two goal propositions flip where the
        # propagated values dictate: 2 flips, 25 persisted pairs. Any
        # assignment with one hard violation costs >= 1 - 27/54 > -23/54,
        # and executing any operator only adds flips.
        L = 3
        layout = plan_layout(rocket, L)
        x = np.zeros((4, 9), dtype=np.int8)
        for i in rocket.init_true:
            x[:, i] = 1
        for (kind, t, i), v in layout.fixed.items():
            if kind == "x":
                x[t, i] = v
        y = np.zeros((3, 10), dtype=np.int8)
        a = lift(layout, x, y)
        q = plan_compile(rocket, L)
        assert energy(q, a) == pytest.approx(-23.0 / 54.0)
        report = plan_decode_validate(rocket, L, a)
        assert report.valid
        assert report.plan == ((), (), ())
        # the genuine plan is hard-consistent too, but pays more flips
        assert -23.0 / 54.0 < -5.0 / 54.0


class TestSimulate:
    def test_rocket_plan_executes(self, rocket):
        sim = simulate_plan(rocket, ROCKET_PLAN)
        assert sim.ok
        assert sim.goal_met
        assert sim.states.shape == (4, 9)
        assert np.array_equal(sim.states[-1], [0, 0, 1, 1, 0, 1, 0, 0, 0])

    def test_empty_plan_keeps_state(self, rocket):
        sim = simulate_plan(rocket, [(), (), ()])
        assert sim.ok
        assert not sim.goal_met
        assert np.array_equal(sim.states[-1], sim.states[0])

    def test_missing_precondition_flagged(self, rocket):
        sim = simulate_plan(rocket, [(UNLOAD_A_P,)])
        assert not sim.ok
        assert any("unload_a_port" in s for s in sim.issues)
        assert not sim.goal_met

    def test_same_step_clash_flagged(self, rocket):
        sim = simulate_plan(rocket, [(0, MOVE_L_P)])
        assert not sim.ok
        assert any("destroys" in s for s in sim.issues)

    def test_contradictory_effects_flagged(self):
        p = PlanningProblem(
            1,
            (Operator("set0", add={0}), Operator("clear0", delete={0})),
            init_true=frozenset({0}),
        )
        sim = simulate_plan(p, [(0, 1)])
        assert not sim.ok
        assert any("both added and deleted" in s for s in sim.issues)
        assert sim.states[-1][0] == 1  # deletes apply before adds

    def test_operator_index_range(self, rocket):
        with pytest.raises(ValueError, match="out of range"):
            simulate_plan(rocket, [(42,)])
