"""STRIPS planning compiled to time-indexed QUBO penalties.

Variables are proposition bits x_i(t) for t = 0..L and operator bits y_j(t)
for steps t = 1..L, laid out chronologically x(0), y(1), x(1), ..., y(L),
x(L). The energy is a sum of five pieces:

* boundary: initial state pinned at t=0, goal literals pinned at t=L;
* preconditions: an executed operator needs its literals to hold at t-1;
* effects: an executed operator forces its effects at t;
* conflicts: two operators at the same step clash when one needs a literal
  the other destroys (same-operator terms excluded: an operator may consume
  its own precondition);
* persistence bias: a weak -epsilon reward for x_i(t-1) == x_i(t), the only
  coupling between consecutive states for untouched propositions.

The first four pieces are the hard constraints; each violated summand costs
exactly 1, and the persistence bias is bounded below 1 in magnitude, so hard
violations always dominate.

Constant propagation shrinks the model with a planning-graph reachability
pass that tracks pairwise exclusions between literals (GraphPlan-style
mutexes with persistence actions). Propositions provably single-valued at a
step are fixed, operators that can never run are removed, goal literals are
pinned at the horizon, and a goal literal whose value is proven unreachable
marks the model unsatisfiable while its boundary penalty becomes a positive
constant. Without this reduction, assignments may reach zero hard energy by
flipping propositions spontaneously (no operator forces frame persistence),
so the reduced model is the one whose minimum certifies unsolvability.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .models import BIT, Assignment, QuboModel

PlanKey = tuple


@dataclass(frozen=True)
class Operator:
    """One STRIPS action: precondition literals and add/delete effects."""

    name: str
    pre_true: frozenset[int] = frozenset()
    pre_false: frozenset[int] = frozenset()
    add: frozenset[int] = frozenset()
    delete: frozenset[int] = frozenset()

    def __post_init__(self):
        for attr in ("pre_true", "pre_false", "add", "delete"):
            object.__setattr__(
                self, attr, frozenset(int(i) for i in getattr(self, attr))
            )
        if self.pre_true & self.pre_false:
            raise ValueError(f"operator {self.name!r}: contradictory preconditions")
        if self.add & self.delete:
            raise ValueError(f"operator {self.name!r}: contradictory effects")


@dataclass(frozen=True, eq=False)
class PlanningProblem:
    """Propositional STRIPS task: complete initial state, partial goal."""

    num_props: int
    operators: tuple[Operator, ...]
    init_true: frozenset[int]
    goal_true: frozenset[int] = frozenset()
    goal_false: frozenset[int] = frozenset()
    prop_names: tuple[str, ...] | None = None

    def __post_init__(self):
        n = int(self.num_props)
        if n < 1:
            raise ValueError("num_props must be >= 1")
        object.__setattr__(self, "num_props", n)
        object.__setattr__(self, "operators", tuple(self.operators))
        for attr in ("init_true", "goal_true", "goal_false"):
            s = frozenset(int(i) for i in getattr(self, attr))
            for i in s:
                if not 0 <= i < n:
                    raise ValueError(f"{attr} proposition {i} out of range")
            object.__setattr__(self, attr, s)
        if self.goal_true & self.goal_false:
            raise ValueError("goal requires a proposition both true and false")
        for op in self.operators:
            if not isinstance(op, Operator):
                raise ValueError("operators must be Operator instances")
            for s in (op.pre_true, op.pre_false, op.add, op.delete):
                for i in s:
                    if not 0 <= i < n:
                        raise ValueError(
                            f"operator {op.name!r}: proposition {i} out of range"
                        )
        if self.prop_names is not None:
            names = tuple(str(s) for s in self.prop_names)
            if len(names) != n:
                raise ValueError("prop_names must name every proposition")
            object.__setattr__(self, "prop_names", names)

    @property
    def num_ops(self) -> int:
        return len(self.operators)

    @property
    def init_false(self) -> frozenset[int]:
        return frozenset(range(self.num_props)) - self.init_true


def planning_problem_from_dict(d: dict) -> PlanningProblem:
    """Build a problem from JSON-style data with string proposition names.

    Expected keys: "propositions" (list of names), "operators" (each with
    "name" and optional "pre_true"/"pre_false"/"add"/"delete" name lists),
    "initial" (names true initially; the rest start false), "goal_true",
    "goal_false".
    """
    props = [str(s) for s in d["propositions"]]
    if len(set(props)) != len(props):
        raise ValueError("duplicate proposition names")
    index = {name: k for k, name in enumerate(props)}

    def to_ids(names):
        out = []
        for s in names:
            if s not in index:
                raise ValueError(f"unknown proposition {s!r}")
            out.append(index[s])
        return frozenset(out)

    ops = tuple(
        Operator(
            name=str(o["name"]),
            pre_true=to_ids(o.get("pre_true", ())),
            pre_false=to_ids(o.get("pre_false", ())),
            add=to_ids(o.get("add", ())),
            delete=to_ids(o.get("delete", ())),
        )
        for o in d.get("operators", ())
    )
    return PlanningProblem(
        num_props=len(props),
        operators=ops,
        init_true=to_ids(d.get("initial", ())),
        goal_true=to_ids(d.get("goal_true", ())),
        goal_false=to_ids(d.get("goal_false", ())),
        prop_names=tuple(props),
    )


# ---------------------------------------------------------------------------
# variable layout


@dataclass(frozen=True, eq=False)
class PlanLayout:
    """Variable layout of a compiled plan model.

    ``keys`` lists the free variables in chronological order, each a tuple
    ("x", t, i) for proposition i at time t or ("y", t, j) for operator j at
    step t; ``index`` maps keys to model variable positions. ``fixed`` holds
    constant-propagated values keyed the same way. ``unsat`` reports a goal
    literal proven unreachable at the horizon, in which case every
    assignment pays a positive constant boundary penalty.
    """

    num_props: int
    num_ops: int
    horizon: int
    keys: tuple[PlanKey, ...]
    fixed: dict[PlanKey, int]
    unsat: bool = False
    index: dict[PlanKey, int] = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {k: v for v, k in enumerate(self.keys)})

    @property
    def num_vars(self) -> int:
        return len(self.keys)

    def _bits(self, a: Assignment) -> np.ndarray:
        if a.form != BIT:
            a = a.to_bit()
        if len(a) != self.num_vars:
            raise ValueError(
                f"assignment length {len(a)} does not match layout "
                f"({self.num_vars} free variables)"
            )
        return a.values

    def value(self, key: PlanKey, bits: np.ndarray) -> int:
        if key in self.fixed:
            return self.fixed[key]
        return int(bits[self.index[key]])

    def trajectory(self, a: Assignment) -> np.ndarray:
        """(L+1, N) matrix of proposition bits, fixed values substituted."""
        bits = self._bits(a)
        x = np.empty((self.horizon + 1, self.num_props), dtype=np.int8)
        for t in range(self.horizon + 1):
            for i in range(self.num_props):
                x[t, i] = self.value(("x", t, i), bits)
        x.setflags(write=False)
        return x

    def executed(self, a: Assignment) -> np.ndarray:
        """(L, M) matrix of operator bits; row t-1 holds step t."""
        bits = self._bits(a)
        y = np.empty((self.horizon, self.num_ops), dtype=np.int8)
        for t in range(1, self.horizon + 1):
            for j in range(self.num_ops):
                y[t - 1, j] = self.value(("y", t, j), bits)
        y.setflags(write=False)
        return y

    def plan(self, a: Assignment) -> tuple[tuple[int, ...], ...]:
        """Executed operator indices per step t = 1..L."""
        y = self.executed(a)
        return tuple(
            tuple(int(j) for j in np.flatnonzero(y[t])) for t in range(self.horizon)
        )


def _check_horizon(L) -> int:
    L = int(L)
    if L < 1:
        raise ValueError("horizon L must be >= 1")
    return L


def _all_keys(n: int, m: int, L: int) -> list[PlanKey]:
    keys: list[PlanKey] = [("x", 0, i) for i in range(n)]
    for t in range(1, L + 1):
        keys += [("y", t, j) for j in range(m)]
        keys += [("x", t, i) for i in range(n)]
    return keys


def plan_layout(p: PlanningProblem, L: int, reduce: bool = True) -> PlanLayout:
    """Layout of the compiled model; reduced by constant propagation unless
    ``reduce`` is False (then every variable is free)."""
    if reduce:
        return constant_propagation(p, L)
    L = _check_horizon(L)
    keys = tuple(_all_keys(p.num_props, p.num_ops, L))
    return PlanLayout(p.num_props, p.num_ops, L, keys, {}, False)


# ---------------------------------------------------------------------------
# constant propagation


def _actions_mutex(pre_a, eff_a, pre_b, eff_b, prev_mutex) -> bool:
    # contradictory effects, or one action destroying the other's precondition
    for (i, v) in eff_a:
        if (i, 1 - v) in eff_b or (i, 1 - v) in pre_b:
            return True
    for (i, v) in eff_b:
        if (i, 1 - v) in pre_a:
            return True
    # competing needs: preconditions that cannot co-hold at the prior level
    for la in pre_a:
        for lb in pre_b:
            if la[0] == lb[0]:
                if la[1] != lb[1]:
                    return True
            elif frozenset((la, lb)) in prev_mutex:
                return True
    return False


def _forward_pass(p: PlanningProblem, L: int, val: np.ndarray, dead: np.ndarray) -> bool:
    """One reachability sweep over levels 1..L; returns True on any change."""
    n = p.num_props
    changed = False
    lits = {(i, int(val[0, i])) for i in range(n)}
    mutex: set[frozenset] = set()
    for t in range(1, L + 1):
        pres: list[set] = []
        effs: list[set] = []
        for j, op in enumerate(p.operators):
            if dead[t, j]:
                continue
            pre = {(i, 1) for i in op.pre_true} | {(i, 0) for i in op.pre_false}
            eff = {(i, 1) for i in op.add} | {(i, 0) for i in op.delete}
            possible = pre <= lits and not any(
                frozenset(pair) in mutex for pair in combinations(sorted(pre), 2)
            )
            if not possible:
                dead[t, j] = True
                changed = True
                continue
            pres.append(pre)
            effs.append(eff)
        for lit in sorted(lits):
            # persistence: a literal may simply carry over
            pres.append({lit})
            effs.append({lit})
        k = len(pres)
        amutex = np.zeros((k, k), dtype=bool)
        for a in range(k):
            for b in range(a + 1, k):
                if _actions_mutex(pres[a], effs[a], pres[b], effs[b], mutex):
                    amutex[a, b] = amutex[b, a] = True
        produced: dict[tuple, list[int]] = {}
        for a, eff in enumerate(effs):
            for lit in eff:
                produced.setdefault(lit, []).append(a)
        cur = set(produced)
        # already-fixed propositions admit exactly their fixed literal
        for i in range(n):
            if val[t, i] >= 0:
                cur.discard((i, 1 - int(val[t, i])))
                cur.add((i, int(val[t, i])))
        for i in range(n):
            if val[t, i] >= 0:
                continue
            has1 = (i, 1) in cur
            has0 = (i, 0) in cur
            if has1 != has0:
                val[t, i] = 1 if has1 else 0
                changed = True
        # literal exclusions: every producer pair conflicts and no single
        # action yields both; fixed propositions are unconditional, skip them
        free_lits = sorted(lit for lit in cur if val[t, lit[0]] < 0)
        new_mutex: set[frozenset] = set()
        for la, lb in combinations(free_lits, 2):
            if la[0] == lb[0]:
                continue
            pa = produced.get(la, ())
            pb = produced.get(lb, ())
            if any(a == b for a in pa for b in pb):
                continue
            if pa and pb and all(amutex[a, b] for a in pa for b in pb):
                new_mutex.add(frozenset((la, lb)))
        lits, mutex = cur, new_mutex
    return changed


def constant_propagation(p: PlanningProblem, L: int) -> PlanLayout:
    """Fix plan variables whose value is forced, and prune dead operators.

    Forward reachability with pairwise exclusions decides which proposition
    values and operator executions are possible at each step; goal literals
    are pinned at the horizon; operators whose effects contradict a fixed
    value are removed (executing one always costs hard energy). The passes
    repeat until nothing changes. A goal literal whose required value is
    unreachable sets ``unsat`` and keeps the reachable value, so the
    compiled boundary term contributes a positive constant.
    """
    L = _check_horizon(L)
    n, m = p.num_props, p.num_ops
    val = np.full((L + 1, n), -1, dtype=np.int64)
    for i in range(n):
        val[0, i] = 1 if i in p.init_true else 0
    dead = np.zeros((L + 1, m), dtype=bool)
    unsat = False
    while True:
        changed = _forward_pass(p, L, val, dead)
        for i, want in [(i, 1) for i in sorted(p.goal_true)] + [
            (i, 0) for i in sorted(p.goal_false)
        ]:
            if val[L, i] < 0:
                val[L, i] = want
                changed = True
            elif val[L, i] != want:
                unsat = True
        for t in range(1, L + 1):
            for j, op in enumerate(p.operators):
                if dead[t, j]:
                    continue
                clash = any(val[t, i] == 0 for i in op.add) or any(
                    val[t, i] == 1 for i in op.delete
                )
                if clash:
                    dead[t, j] = True
                    changed = True
        if not changed:
            break
    fixed: dict[PlanKey, int] = {}
    for t in range(L + 1):
        for i in range(n):
            if val[t, i] >= 0:
                fixed[("x", t, i)] = int(val[t, i])
    for t in range(1, L + 1):
        for j in range(m):
            if dead[t, j]:
                fixed[("y", t, j)] = 0
    keys = tuple(k for k in _all_keys(n, m, L) if k not in fixed)
    return PlanLayout(n, m, L, keys, fixed, unsat)


# ---------------------------------------------------------------------------
# compilation


class _PolyAccumulator:
    """Accumulates a quadratic polynomial, substituting fixed variables."""

    def __init__(self, layout: PlanLayout):
        self.layout = layout
        self.offset = 0.0
        self.linear: dict[int, float] = {}
        self.quad: dict[tuple[int, int], float] = {}

    def const(self, c: float) -> None:
        self.offset += c

    def lin(self, key: PlanKey, c: float) -> None:
        fixed = self.layout.fixed
        if key in fixed:
            self.offset += c * fixed[key]
        else:
            i = self.layout.index[key]
            self.linear[i] = self.linear.get(i, 0.0) + c

    def pair(self, a: PlanKey, b: PlanKey, c: float) -> None:
        fixed = self.layout.fixed
        if a in fixed:
            if b in fixed:
                self.offset += c * fixed[a] * fixed[b]
            else:
                self.lin(b, c * fixed[a])
        elif b in fixed:
            self.lin(a, c * fixed[b])
        else:
            i, j = self.layout.index[a], self.layout.index[b]
            if i > j:
                i, j = j, i
            self.quad[(i, j)] = self.quad.get((i, j), 0.0) + c

    def model(self) -> QuboModel:
        return QuboModel(
            num_vars=self.layout.num_vars,
            linear=self.linear,
            quadratic=self.quad,
            offset=self.offset,
        )


def plan_compile(
    p: PlanningProblem,
    L: int,
    epsilon: float | None = None,
    reduce: bool = True,
) -> QuboModel:
    """Compile a horizon-L planning task to a QUBO.

    Hard summands (boundary, preconditions, effects, pairwise conflicts)
    each cost 1 when violated; the persistence bias rewards unchanged
    propositions with -epsilon per step. epsilon defaults to 1/(2NL) and
    must stay below 1/(NL) so the bias can never outweigh one violation.
    Variables fixed by constant propagation are substituted out (disable
    with ``reduce=False``); the layout is recoverable via
    :func:`plan_layout` with the same arguments.
    """
    L = _check_horizon(L)
    n = p.num_props
    if epsilon is None:
        epsilon = 1.0 / (2.0 * n * L)
    epsilon = float(epsilon)
    if not 0.0 < epsilon < 1.0 / (n * L):
        raise ValueError(f"epsilon must lie in (0, 1/(N*L)) = (0, {1.0 / (n * L)})")
    layout = plan_layout(p, L, reduce)
    acc = _PolyAccumulator(layout)
    # boundary: initial state at t=0, goal literals at t=L
    for i in sorted(p.init_true):
        acc.const(1.0)
        acc.lin(("x", 0, i), -1.0)
    for i in sorted(p.init_false):
        acc.lin(("x", 0, i), 1.0)
    for i in sorted(p.goal_true):
        acc.const(1.0)
        acc.lin(("x", L, i), -1.0)
    for i in sorted(p.goal_false):
        acc.lin(("x", L, i), 1.0)
    for t in range(1, L + 1):
        for j, op in enumerate(p.operators):
            y = ("y", t, j)
            # preconditions must hold at t-1 when the operator runs
            for i in sorted(op.pre_true):
                acc.lin(y, 1.0)
                acc.pair(("x", t - 1, i), y, -1.0)
            for i in sorted(op.pre_false):
                acc.pair(("x", t - 1, i), y, 1.0)
            # effects must be reflected at t when the operator runs
            for i in sorted(op.add):
                acc.lin(y, 1.0)
                acc.pair(("x", t, i), y, -1.0)
            for i in sorted(op.delete):
                acc.pair(("x", t, i), y, 1.0)
        # same-step clashes: one operator needs a literal another destroys
        for j, opj in enumerate(p.operators):
            for k, opk in enumerate(p.operators):
                if j == k:
                    continue
                w = len(opj.pre_true & opk.delete) + len(opj.pre_false & opk.add)
                if w:
                    acc.pair(("y", t, j), ("y", t, k), float(w))
        # persistence bias: -eps when x_i(t-1) == x_i(t), +eps when it flips
        for i in range(n):
            u, w = ("x", t - 1, i), ("x", t, i)
            acc.const(-epsilon)
            acc.lin(u, 2.0 * epsilon)
            acc.lin(w, 2.0 * epsilon)
            acc.pair(u, w, -4.0 * epsilon)
    return acc.model()


# ---------------------------------------------------------------------------
# decoding, validation, simulation


@dataclass(frozen=True)
class PlanViolation:
    """One violated hard summand; index fields are -1 where not applicable.

    kinds: "boundary" (proposition i wrong at t), "precondition" (operator
    j executed at t with proposition i wrong at t-1), "effect" (operator j
    executed at t with effect on i not reflected at t), "conflict"
    (operator k destroys at step t a literal i that operator j requires).
    """

    kind: str
    t: int
    i: int = -1
    j: int = -1
    k: int = -1


@dataclass(frozen=True, eq=False)
class PlanReport:
    """Decoded plan plus hard-constraint audit of one assignment.

    ``hard_energy`` equals the hard part of the compiled energy exactly:
    every violated summand produces one record.
    """

    valid: bool
    plan: tuple[tuple[int, ...], ...]
    trajectory: np.ndarray
    violations: tuple[PlanViolation, ...]

    @property
    def hard_energy(self) -> float:
        return float(len(self.violations))


def plan_decode_validate(
    p: PlanningProblem, L: int, a: Assignment, reduce: bool = True
) -> PlanReport:
    """Decode an assignment and check every hard constraint on it.

    The checks mirror the compiled penalties on the assignment's own
    trajectory: boundary values, preconditions of executed operators at
    t-1, their effects at t, and pairwise same-step clashes. Violations are
    data, not errors. The verdict is equivalent to zero hard energy; it does
    not require the trajectory to follow frame persistence, which the model
    only encourages through the epsilon bias (see :func:`simulate_plan` for
    the stricter executability check).
    """
    layout = plan_layout(p, L, reduce)
    L = layout.horizon
    x = layout.trajectory(a)
    y = layout.executed(a)
    viol: list[PlanViolation] = []
    for i in sorted(p.init_true):
        if x[0, i] != 1:
            viol.append(PlanViolation("boundary", 0, i=i))
    for i in sorted(p.init_false):
        if x[0, i] != 0:
            viol.append(PlanViolation("boundary", 0, i=i))
    for i in sorted(p.goal_true):
        if x[L, i] != 1:
            viol.append(PlanViolation("boundary", L, i=i))
    for i in sorted(p.goal_false):
        if x[L, i] != 0:
            viol.append(PlanViolation("boundary", L, i=i))
    for t in range(1, L + 1):
        execd = [j for j in range(p.num_ops) if y[t - 1, j]]
        for j in execd:
            op = p.operators[j]
            for i in sorted(op.pre_true):
                if x[t - 1, i] != 1:
                    viol.append(PlanViolation("precondition", t, i=i, j=j))
            for i in sorted(op.pre_false):
                if x[t - 1, i] != 0:
                    viol.append(PlanViolation("precondition", t, i=i, j=j))
            for i in sorted(op.add):
                if x[t, i] != 1:
                    viol.append(PlanViolation("effect", t, i=i, j=j))
            for i in sorted(op.delete):
                if x[t, i] != 0:
                    viol.append(PlanViolation("effect", t, i=i, j=j))
        for j in execd:
            for k in execd:
                if j == k:
                    continue
                opj, opk = p.operators[j], p.operators[k]
                for i in sorted(opj.pre_true & opk.delete):
                    viol.append(PlanViolation("conflict", t, i=i, j=j, k=k))
                for i in sorted(opj.pre_false & opk.add):
                    viol.append(PlanViolation("conflict", t, i=i, j=j, k=k))
    return PlanReport(
        valid=not viol,
        plan=layout.plan(a),
        trajectory=x,
        violations=tuple(viol),
    )


@dataclass(frozen=True, eq=False)
class SimulationResult:
    """Forward execution of an explicit plan under frame persistence.

    ``ok`` means every step was executable (preconditions met, no pairwise
    clashes, no contradictory combined effects); ``goal_met`` is judged on
    the final simulated state independently of ``ok``.
    """

    ok: bool
    goal_met: bool
    states: np.ndarray
    issues: tuple[str, ...]


def simulate_plan(p: PlanningProblem, plan) -> SimulationResult:
    """Execute operator sets step by step from the initial state.

    Unlike the energy model, simulation enforces frame persistence: a
    proposition keeps its value unless an executed operator changes it.
    Effects apply deletes first, then adds; a proposition both added and
    deleted in one step is flagged as an issue.
    """
    n = p.num_props
    state = np.zeros(n, dtype=np.int8)
    for i in p.init_true:
        state[i] = 1
    states = [state.copy()]
    issues: list[str] = []
    for t, step in enumerate(plan, start=1):
        ops = sorted({int(j) for j in step})
        for j in ops:
            if not 0 <= j < p.num_ops:
                raise ValueError(f"operator index {j} out of range")
        adds: set[int] = set()
        dels: set[int] = set()
        for j in ops:
            op = p.operators[j]
            for i in sorted(op.pre_true):
                if not state[i]:
                    issues.append(
                        f"step {t}: {op.name} requires proposition {i} true"
                    )
            for i in sorted(op.pre_false):
                if state[i]:
                    issues.append(
                        f"step {t}: {op.name} requires proposition {i} false"
                    )
            adds |= op.add
            dels |= op.delete
        for j in ops:
            for k in ops:
                if j == k:
                    continue
                opj, opk = p.operators[j], p.operators[k]
                for i in sorted((opj.pre_true & opk.delete) | (opj.pre_false & opk.add)):
                    issues.append(
                        f"step {t}: {opk.name} destroys proposition {i} "
                        f"needed by {opj.name}"
                    )
        for i in sorted(adds & dels):
            issues.append(f"step {t}: proposition {i} both added and deleted")
        for i in dels:
            state[i] = 0
        for i in adds:
            state[i] = 1
        states.append(state.copy())
    goal_met = all(state[i] == 1 for i in p.goal_true) and all(
        state[i] == 0 for i in p.goal_false
    )
    out = np.array(states, dtype=np.int8)
    out.setflags(write=False)
    return SimulationResult(
        ok=not issues, goal_met=goal_met, states=out, issues=tuple(issues)
    )
