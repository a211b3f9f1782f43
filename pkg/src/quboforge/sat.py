"""3-SAT to QUBO via one ancilla bit per clause.

A clause is stored by the single assignment of its three variables that
violates it: bits (a_i, a_j, a_k) on variables (i, j, k).  With the
disagreement indicators t_r = a_r + (1 - 2 a_r) z_r (t_r = 1 when z_r
differs from the violating value) the clause energy with ancilla u is

    E_C = 1 + 5u - (1 + 3u) (t_1 + t_2 + t_3) + sum_{r != r'} t_r t_r'

Minimizing over u in {0, 1} leaves energy 1 when the clause is violated
(all t_r = 0) and exactly 0 otherwise, so the ancilla-minimized total
energy counts violated clauses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import QuboModel


@dataclass(frozen=True)
class Clause3:
    """Three distinct variable indices and the assignment that violates them."""

    vars: tuple[int, int, int]
    violating: tuple[int, int, int]

    def __post_init__(self) -> None:
        v = tuple(int(i) for i in self.vars)
        a = tuple(int(b) for b in self.violating)
        if len(v) != 3 or len(a) != 3:
            raise ValueError("a clause holds exactly 3 variables")
        if len(set(v)) != 3:
            raise ValueError("clause variables must be distinct")
        if any(i < 0 for i in v):
            raise ValueError("variable indices must be >= 0")
        if any(b not in (0, 1) for b in a):
            raise ValueError("violating assignment must be bits")
        object.__setattr__(self, "vars", v)
        object.__setattr__(self, "violating", a)

    def violated_by(self, z) -> bool:
        z = np.asarray(z)
        return all(int(z[i]) == a for i, a in zip(self.vars, self.violating))


def count_violated(clauses, z) -> int:
    """Direct clause-by-clause count; the compiled model's ground truth."""
    return sum(1 for c in clauses if c.violated_by(z))


def sat3_compile(clauses, n: int) -> QuboModel:
    """Compile clauses over n variables; ancilla for clause c sits at n + c."""
    clauses = list(clauses)
    n = int(n)
    if n < 1:
        raise ValueError("need at least one variable")
    for c in clauses:
        if not isinstance(c, Clause3):
            raise TypeError("clauses must be Clause3 instances")
        if max(c.vars) >= n:
            raise ValueError(f"clause variable {max(c.vars)} out of range for n={n}")

    linear: dict[int, float] = {}
    quad: dict[tuple[int, int], float] = {}
    offset = 0.0

    def add_lin(i: int, v: float) -> None:
        linear[i] = linear.get(i, 0.0) + v

    def add_quad(i: int, j: int, v: float) -> None:
        key = (i, j) if i < j else (j, i)
        quad[key] = quad.get(key, 0.0) + v

    # expand E_C with t_r = a_r + (1 - 2 a_r) z_r; u is the clause ancilla
    for ci, c in enumerate(clauses):
        u = n + ci
        a = c.violating
        s = [1.0 - 2.0 * a[r] for r in range(3)]  # coefficient of z_r inside t_r
        offset += 1.0 - sum(a) + 2.0 * sum(
            a[r] * a[rp] for r in range(3) for rp in range(r + 1, 3)
        )
        add_lin(u, 5.0 - 3.0 * sum(a))
        for r in range(3):
            add_lin(c.vars[r], -s[r] + 2.0 * s[r] * sum(a[rp] for rp in range(3) if rp != r))
            add_quad(u, c.vars[r], -3.0 * s[r])
        for r in range(3):
            for rp in range(r + 1, 3):
                add_quad(c.vars[r], c.vars[rp], 2.0 * s[r] * s[rp])

    linear = {i: v for i, v in linear.items() if v != 0.0}
    quad = {k: v for k, v in quad.items() if v != 0.0}
    return QuboModel(
        num_vars=n + len(clauses), linear=linear, quadratic=quad, offset=offset
    )


def sat3_random_instance(n: int, ratio: float, seed: int = 0):
    """M = round(ratio * n) clauses over n >= 3 variables, seeded."""
    n = int(n)
    if n < 3:
        raise ValueError("need n >= 3 variables")
    if not (ratio > 0):
        raise ValueError("ratio must be > 0")
    m = int(round(ratio * n))
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(m):
        vs = rng.choice(n, size=3, replace=False)
        bits = rng.integers(0, 2, size=3)
        out.append(Clause3(tuple(int(v) for v in vs), tuple(int(b) for b in bits)))
    return out


def clauses_from_dimacs(text: str) -> tuple[tuple[Clause3, ...], int]:
    """Parse DIMACS CNF into clauses plus the variable count.

    A positive literal v means the clause is satisfied by z_v = 1, so the
    violating assignment sets that variable to 0; a negative literal means
    the violating assignment sets it to 1.
    """
    n = 0
    clauses: list[Clause3] = []
    pending: list[int] = []
    declared: int | None = None
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) < 4 or parts[1] != "cnf":
                raise ValueError(f"bad DIMACS problem line: {line!r}")
            declared = int(parts[2])
            continue
        pending.extend(int(tok) for tok in line.split())
        while 0 in pending:
            cut = pending.index(0)
            lits = pending[:cut]
            pending = pending[cut + 1 :]
            if len(lits) != 3:
                raise ValueError("only 3-literal clauses are supported")
            vs = tuple(abs(l) - 1 for l in lits)
            viol = tuple(1 if l < 0 else 0 for l in lits)
            clauses.append(Clause3(vs, viol))
            n = max(n, max(vs) + 1)
    if pending:
        raise ValueError("unterminated clause in DIMACS input")
    if declared is not None:
        n = max(n, declared)
    if not clauses:
        raise ValueError("no clauses found")
    return tuple(clauses), n
