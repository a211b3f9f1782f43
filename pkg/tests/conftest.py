"""Shared fixtures: a two-container transport STRIPS domain.

A rocket starts at the launch site L with containers A and B and one unit
of fuel; the goal is both containers at the port P. Nine propositions, ten
ground operators. The shortest plan takes three steps: load both, move,
unload both. Moving consumes the fuel, so the rocket can make only one trip.
"""

from __future__ import annotations

import pytest

from quboforge.planning import Operator, PlanningProblem

A_L, B_L, A_P, B_P, R_L, R_P, A_R, B_R, FUEL = range(9)

ROCKET_PROP_NAMES = (
    "a_at_launch",
    "b_at_launch",
    "a_at_port",
    "b_at_port",
    "rocket_at_launch",
    "rocket_at_port",
    "a_in_rocket",
    "b_in_rocket",
    "fuel",
)

# operator indices in this order
LOAD_A_L, LOAD_B_L, LOAD_A_P, LOAD_B_P = 0, 1, 2, 3
UNLOAD_A_L, UNLOAD_B_L, UNLOAD_A_P, UNLOAD_B_P = 4, 5, 6, 7
MOVE_L_P, MOVE_P_L = 8, 9

ROCKET_PLAN = ((LOAD_A_L, LOAD_B_L), (MOVE_L_P,), (UNLOAD_A_P, UNLOAD_B_P))


def rocket_problem() -> PlanningProblem:
    ops = (
        Operator("load_a_launch", pre_true={A_L, R_L}, add={A_R}, delete={A_L}),
        Operator("load_b_launch", pre_true={B_L, R_L}, add={B_R}, delete={B_L}),
        Operator("load_a_port", pre_true={A_P, R_P}, add={A_R}, delete={A_P}),
        Operator("load_b_port", pre_true={B_P, R_P}, add={B_R}, delete={B_P}),
        Operator("unload_a_launch", pre_true={A_R, R_L}, add={A_L}, delete={A_R}),
        Operator("unload_b_launch", pre_true={B_R, R_L}, add={B_L}, delete={B_R}),
        Operator("unload_a_port", pre_true={A_R, R_P}, add={A_P}, delete={A_R}),
        Operator("unload_b_port", pre_true={B_R, R_P}, add={B_P}, delete={B_R}),
        Operator("move_l_to_p", pre_true={R_L, FUEL}, add={R_P}, delete={R_L, FUEL}),
        Operator("move_p_to_l", pre_true={R_P, FUEL}, add={R_L}, delete={R_P, FUEL}),
    )
    return PlanningProblem(
        num_props=9,
        operators=ops,
        init_true=frozenset({A_L, B_L, R_L, FUEL}),
        goal_true=frozenset({A_P, B_P}),
        prop_names=ROCKET_PROP_NAMES,
    )


@pytest.fixture
def rocket() -> PlanningProblem:
    return rocket_problem()
