"""Fault trees compiled to QUBO: minimum-weight failure diagnosis.

Events are binary variables z_0..z_{E-1} with z_0 the top (system failure)
event. Gate nodes (2-input AND/OR, 3-input MAJ) tie each non-basic event to
its inputs through a quadratic penalty that is zero exactly on the rows of
the gate's truth table and at least one elsewhere. The compiled energy

    H = A * sum(gate penalties) + B * (1 - z_0) + sum_i w_i z_i

over basic-event weights w_i has, for large enough A and B, a ground state
that sets z_0 = 1, keeps every gate consistent, and turns on a
minimum-weight set of basic events (a minimum cut set).

The two closed forms for the 2-input gates circulate with their labels
interchanged, so this module never trusts a label: the form installed for a
gate is selected by exhaustive truth-table validation, and every returned
penalty is re-checked on its actual variable indices.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from .models import Assignment, QuboModel

AND = "and"
OR = "or"
MAJ3 = "maj3"

_TRUTH = {
    AND: lambda bits: int(all(bits)),
    OR: lambda bits: int(any(bits)),
    MAJ3: lambda bits: int(sum(bits) >= 2),
}


def _pair(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


def _form_a(y, x1, x2):
    # y + x1 + x2 + x1 x2 - 2 y x1 - 2 y x2
    return (
        {y: 1.0, x1: 1.0, x2: 1.0},
        {_pair(x1, x2): 1.0, _pair(y, x1): -2.0, _pair(y, x2): -2.0},
    )


def _form_b(y, x1, x2):
    # 3 y + x1 x2 - 2 y x1 - 2 y x2
    return (
        {y: 3.0},
        {_pair(x1, x2): 1.0, _pair(y, x1): -2.0, _pair(y, x2): -2.0},
    )


def _form_maj3(y, x1, x2, x3):
    # 3 y - 2 y (x1 + x2 + x3) + x1 x2 + x1 x3 + x2 x3
    return (
        {y: 3.0},
        {
            _pair(y, x1): -2.0,
            _pair(y, x2): -2.0,
            _pair(y, x3): -2.0,
            _pair(x1, x2): 1.0,
            _pair(x1, x3): 1.0,
            _pair(x2, x3): 1.0,
        },
    )


_TWO_INPUT_FORMS = {"form_a": _form_a, "form_b": _form_b}
_LABEL_CACHE: dict[str, str] = {}


def _passes(linear, quadratic, output, inputs, truth) -> bool:
    idx = [output, *inputs]
    for row in range(1 << len(idx)):
        bits = {v: (row >> k) & 1 for k, v in enumerate(idx)}
        val = sum(c * bits[i] for i, c in linear.items())
        val += sum(c * bits[i] * bits[j] for (i, j), c in quadratic.items())
        consistent = bits[output] == truth([bits[x] for x in inputs])
        if consistent and abs(val) > 1e-12:
            return False
        if not consistent and val < 1.0 - 1e-12:
            return False
    return True


def _two_input_label(kind: str) -> str:
    if kind not in _LABEL_CACHE:
        for label in sorted(_TWO_INPUT_FORMS):
            linear, quadratic = _TWO_INPUT_FORMS[label](0, 1, 2)
            if _passes(linear, quadratic, 0, (1, 2), _TRUTH[kind]):
                _LABEL_CACHE[kind] = label
                break
        else:
            raise RuntimeError(f"no closed form verifies the {kind} truth table")
    return _LABEL_CACHE[kind]


def two_input_form_labels() -> dict[str, str]:
    """Which validated closed form implements each 2-input gate."""
    return {kind: _two_input_label(kind) for kind in (AND, OR)}


def gate_penalty(kind: str, output: int, inputs) -> QuboModel:
    """Quadratic penalty that is 0 exactly on truth-table-consistent rows.

    Arity is fixed: 2 inputs for and/or, 3 for maj3 (compose wider gates by
    cascading; :func:`faulttree_compile` does so automatically). The form is
    selected and verified by exhaustive enumeration, so an inconsistent row
    always costs at least 1.
    """
    kind = str(kind).lower()
    output = int(output)
    inputs = tuple(int(i) for i in inputs)
    if kind in (AND, OR):
        if len(inputs) != 2:
            raise ValueError(f"{kind} gate takes exactly 2 inputs")
    elif kind == MAJ3:
        if len(inputs) != 3:
            raise ValueError("maj3 gate takes exactly 3 inputs")
    else:
        raise ValueError(f"unknown gate kind {kind!r}")
    if output in inputs or len(set(inputs)) != len(inputs):
        raise ValueError("gate variables must be distinct")
    if min(output, *inputs) < 0:
        raise ValueError("variable indices must be >= 0")
    if kind == MAJ3:
        linear, quadratic = _form_maj3(output, *inputs)
    else:
        linear, quadratic = _TWO_INPUT_FORMS[_two_input_label(kind)](output, *inputs)
    if not _passes(linear, quadratic, output, inputs, _TRUTH[kind]):
        raise RuntimeError("gate penalty failed its truth-table check")
    return QuboModel(
        num_vars=max(output, *inputs) + 1, linear=linear, quadratic=quadratic
    )


@dataclass(frozen=True)
class Gate:
    """One gate node: ``output`` is determined by ``inputs`` through ``kind``."""

    kind: str
    output: int
    inputs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "kind", str(self.kind).lower())
        object.__setattr__(self, "output", int(self.output))
        object.__setattr__(self, "inputs", tuple(int(i) for i in self.inputs))
        if self.kind not in (AND, OR, MAJ3):
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind == MAJ3:
            if len(self.inputs) != 3:
                raise ValueError("maj3 gate takes exactly 3 inputs (compose explicitly)")
        elif len(self.inputs) < 2:
            raise ValueError(f"{self.kind} gate takes at least 2 inputs")
        if self.output in self.inputs or len(set(self.inputs)) != len(self.inputs):
            raise ValueError("gate variables must be distinct")


@dataclass(frozen=True, eq=False)
class FaultTree:
    """DAG of gates over events 0..num_events-1 with event 0 the top.

    Every event is either exactly one gate's output or basic; ``weights``
    maps each basic event to its failure cost (default 1.0 everywhere).
    Shared inputs (fanout > 1) are allowed; cycles are not.
    """

    num_events: int
    gates: tuple[Gate, ...]
    weights: dict[int, float] | None = None
    basic_events: frozenset[int] = field(init=False, repr=False)
    topo_order: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        n = int(self.num_events)
        if n < 1:
            raise ValueError("num_events must be >= 1")
        object.__setattr__(self, "num_events", n)
        gates = tuple(self.gates)
        object.__setattr__(self, "gates", gates)
        if not gates:
            raise ValueError("a fault tree needs at least one gate")
        outputs = [g.output for g in gates]
        if len(set(outputs)) != len(outputs):
            raise ValueError("two gates share an output event")
        for g in gates:
            for e in (g.output, *g.inputs):
                if not 0 <= e < n:
                    raise ValueError(f"event index {e} out of range")
        if 0 not in outputs:
            raise ValueError("top event (0) must be a gate output")
        basic = frozenset(range(n)) - set(outputs)
        object.__setattr__(self, "basic_events", basic)
        # Kahn ordering over gates; a leftover gate means a cycle
        produced_by = {g.output: k for k, g in enumerate(gates)}
        ready = set(basic)
        order: list[int] = []
        pending = set(range(len(gates)))
        while pending:
            round_ = [
                k for k in sorted(pending) if all(e in ready for e in gates[k].inputs)
            ]
            if not round_:
                raise ValueError("fault tree is cyclic")
            for k in round_:
                order.append(k)
                ready.add(gates[k].output)
                pending.discard(k)
        object.__setattr__(self, "topo_order", tuple(order))
        if self.weights is None:
            weights = {i: 1.0 for i in sorted(basic)}
        else:
            weights = {int(i): float(w) for i, w in self.weights.items()}
            if set(weights) != set(basic):
                raise ValueError("weights must cover exactly the basic events")
            for i, w in weights.items():
                if not w >= 0.0:
                    raise ValueError(f"weight of event {i} must be >= 0")
        object.__setattr__(self, "weights", weights)


def faulttree_from_dict(d: dict) -> FaultTree:
    """Build a tree from JSON-style data.

    Expected keys: "nodes" (event count; event 0 is the top), "gates"
    (each with "kind", "output", "inputs"), and optional "weights" mapping
    basic event ids to failure costs.
    """
    gates = tuple(
        Gate(kind=g["kind"], output=g["output"], inputs=g["inputs"])
        for g in d.get("gates", ())
    )
    weights = d.get("weights")
    if weights is not None:
        weights = {int(k): float(w) for k, w in weights.items()}
    return FaultTree(num_events=int(d["nodes"]), gates=gates, weights=weights)


def faulttree_compile(
    tree: FaultTree, A: float | None = None, B: float | None = None
) -> QuboModel:
    """Compile to H = A * (gate penalties) + B * (1 - z_0) + sum w_i z_i.

    Gates wider than 2 inputs are cascaded into 2-input instances with
    ancilla events appended after the tree's own. Defaults A = 3V + 1 (V =
    total variables) and B = 3 M A + 1 (M = penalty instances) make gate
    consistency and a firing top event strictly dominate the weight term;
    explicit values below those bounds are accepted with a warning.
    """
    instances: list[tuple[str, int, tuple[int, ...]]] = []
    next_anc = tree.num_events
    for g in tree.gates:
        if g.kind == MAJ3 or len(g.inputs) == 2:
            instances.append((g.kind, g.output, g.inputs))
            continue
        chain = g.inputs[0]
        for x in g.inputs[1:-1]:
            instances.append((g.kind, next_anc, (chain, x)))
            chain = next_anc
            next_anc += 1
        instances.append((g.kind, g.output, (chain, g.inputs[-1])))
    num_vars = next_anc
    n_inst = len(instances)
    if A is None:
        A = 3.0 * num_vars + 1.0
    A = float(A)
    if B is None:
        B = 3.0 * n_inst * A + 1.0
    B = float(B)
    if A <= 3.0 * num_vars or B <= 3.0 * n_inst * A:
        warnings.warn(
            "penalty constants below the safe bounds (A > 3V, B > 3MA); the "
            "ground state may violate gate consistency or the top event",
            stacklevel=2,
        )
    linear: dict[int, float] = {}
    quadratic: dict[tuple[int, int], float] = {}
    for kind, out, ins in instances:
        gp = gate_penalty(kind, out, ins)
        for i, c in gp.linear.items():
            linear[i] = linear.get(i, 0.0) + A * c
        for key, c in gp.quadratic.items():
            quadratic[key] = quadratic.get(key, 0.0) + A * c
    linear[0] = linear.get(0, 0.0) - B
    for i, w in tree.weights.items():
        linear[i] = linear.get(i, 0.0) + w
    return QuboModel(num_vars=num_vars, linear=linear, quadratic=quadratic, offset=B)


def faulttree_decode(tree: FaultTree, a: Assignment) -> frozenset[int]:
    """Basic events switched on in an assignment (cascade ancillas ignored)."""
    bits = a.to_bit().values
    if len(bits) < tree.num_events:
        raise ValueError(
            f"assignment length {len(bits)} shorter than {tree.num_events} events"
        )
    return frozenset(i for i in tree.basic_events if bits[i])


def cut_weight(tree: FaultTree, basic_set) -> float:
    """Total weight of a set of basic events."""
    basic_set = frozenset(int(i) for i in basic_set)
    unknown = basic_set - tree.basic_events
    if unknown:
        raise ValueError(f"not basic events: {sorted(unknown)}")
    return float(sum(tree.weights[i] for i in basic_set))
