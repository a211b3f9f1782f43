"""Tests for the 3-SAT clause gadget."""

from __future__ import annotations

import numpy as np
import pytest

from quboforge.models import Assignment, all_energies, energy
from quboforge.sat import (
    Clause3,
    clauses_from_dimacs,
    count_violated,
    sat3_compile,
    sat3_random_instance,
)
from quboforge.solvers import brute_force


def min_over_ancillas(q, n: int, m: int, zbits) -> float:
    """Analytic ancilla minimization: valid because no two ancillas couple."""
    full = np.concatenate([np.asarray(zbits, dtype=np.int8), np.zeros(m, np.int8)])
    e0 = energy(q, Assignment.bits(full))
    total = e0
    for c in range(m):
        u = n + c
        delta = q.linear.get(u, 0.0)
        for (i, j), w in q.quadratic.items():
            if i == u and j < n:
                delta += w * full[j]
            elif j == u and i < n:
                delta += w * full[i]
        total += min(0.0, delta)
    return total


class TestClause3:
    def test_validation(self):
        with pytest.raises(ValueError, match="distinct"):
            Clause3((0, 0, 1), (0, 0, 0))
        with pytest.raises(ValueError, match="exactly 3"):
            Clause3((0, 1), (0, 0))
        with pytest.raises(ValueError, match="bits"):
            Clause3((0, 1, 2), (0, 2, 0))
        with pytest.raises(ValueError, match=">= 0"):
            Clause3((-1, 1, 2), (0, 0, 0))

    def test_violated_by(self):
        c = Clause3((0, 2, 3), (1, 0, 1))
        assert c.violated_by([1, 9, 0, 1])
        assert not c.violated_by([0, 9, 0, 1])


class TestCompile:
    def test_disagreement_count_table(self):
        # single clause: energy depends only on (#disagreements k, ancilla u)
        c = Clause3((0, 1, 2), (1, 1, 0))
        q = sat3_compile([c], 3)
        assert q.num_vars == 4
        expected = {0: (1.0, 6.0), 1: (0.0, 2.0), 2: (1.0, 0.0), 3: (4.0, 0.0)}
        viol = np.array(c.violating, dtype=np.int8)
        for zidx in range(8):
            z = np.array([(zidx >> (2 - r)) & 1 for r in range(3)], dtype=np.int8)
            k = int(np.sum(z != viol))
            for u in (0, 1):
                e = energy(q, Assignment.bits(np.concatenate([z, [u]])))
                assert e == pytest.approx(expected[k][u], abs=1e-12)

    def test_violating_assignment_costs_one(self):
        c = Clause3((0, 1, 2), (0, 1, 0))
        q = sat3_compile([c], 3)
        z = np.array(c.violating, dtype=np.int8)
        e_u0 = energy(q, Assignment.bits(np.concatenate([z, [0]])))
        e_u1 = energy(q, Assignment.bits(np.concatenate([z, [1]])))
        assert (e_u0, e_u1) == (pytest.approx(1.0), pytest.approx(6.0))
        # two disagreements: minimum 0 attained at u = 1
        z2 = z.copy()
        z2[0] ^= 1
        z2[2] ^= 1
        e_u0 = energy(q, Assignment.bits(np.concatenate([z2, [0]])))
        e_u1 = energy(q, Assignment.bits(np.concatenate([z2, [1]])))
        assert (e_u0, e_u1) == (pytest.approx(1.0), pytest.approx(0.0))

    def test_no_ancilla_ancilla_couplings(self):
        clauses = sat3_random_instance(6, 2.0, seed=11)
        q = sat3_compile(clauses, 6)
        for i, j in q.quadratic:
            assert i < 6 or j < 6

    def test_exhaustive_equals_violation_count(self):
        n, m = 6, 10
        clauses = sat3_random_instance(n, m / n, seed=3)
        assert len(clauses) == m
        q = sat3_compile(clauses, n)
        assert q.num_vars == n + m
        energies = all_energies(q)
        table = energies.reshape(1 << n, 1 << m).min(axis=1)
        for zidx in range(1 << n):
            z = [(zidx >> (n - 1 - i)) & 1 for i in range(n)]
            truth = count_violated(clauses, z)
            assert table[zidx] == pytest.approx(truth, abs=1e-9)
            assert min_over_ancillas(q, n, m, z) == pytest.approx(truth, abs=1e-9)

    def test_all_violating_patterns_forces_one(self):
        # the 8 possible violating patterns over one variable triple leave
        # every assignment violating exactly one clause
        clauses = [
            Clause3((0, 1, 2), ((p >> 2) & 1, (p >> 1) & 1, p & 1)) for p in range(8)
        ]
        q = sat3_compile(clauses, 3)
        res = brute_force(q)
        assert res.best_energy == pytest.approx(1.0)

    def test_satisfiable_instance_reaches_zero(self):
        clauses = sat3_random_instance(5, 1.0, seed=8)
        q = sat3_compile(clauses, 5)
        res = brute_force(q)
        best = min(
            count_violated(clauses, [(m >> (4 - i)) & 1 for i in range(5)])
            for m in range(32)
        )
        assert res.best_energy == pytest.approx(best)

    def test_validation(self):
        with pytest.raises(ValueError, match="out of range"):
            sat3_compile([Clause3((0, 1, 5), (0, 0, 0))], 4)
        with pytest.raises(TypeError, match="Clause3"):
            sat3_compile([(0, 1, 2)], 3)
        with pytest.raises(ValueError, match="at least one"):
            sat3_compile([], 0)


class TestRandomInstance:
    def test_threshold_ratio_count(self):
        assert len(sat3_random_instance(10, 4.26, seed=0)) == 43

    def test_same_seed_identical(self):
        a = sat3_random_instance(8, 3.0, seed=5)
        b = sat3_random_instance(8, 3.0, seed=5)
        assert a == b
        c = sat3_random_instance(8, 3.0, seed=6)
        assert a != c

    def test_small_n(self):
        clauses = sat3_random_instance(3, 1.0, seed=2)
        assert len(clauses) == 3
        for c in clauses:
            assert sorted(c.vars) == [0, 1, 2]
        with pytest.raises(ValueError, match="n >= 3"):
            sat3_random_instance(2, 1.0)
        with pytest.raises(ValueError, match="ratio"):
            sat3_random_instance(5, 0.0)


class TestDimacs:
    def test_sign_convention(self):
        text = "c tiny instance\np cnf 4 2\n1 -2 3 0\n-1 2 -4 0\n"
        clauses, n = clauses_from_dimacs(text)
        assert n == 4
        assert clauses[0] == Clause3((0, 1, 2), (0, 1, 0))
        assert clauses[1] == Clause3((0, 1, 3), (1, 0, 1))

    def test_multiline_clause(self):
        clauses, n = clauses_from_dimacs("p cnf 3 1\n1 2\n3 0\n")
        assert clauses == (Clause3((0, 1, 2), (0, 0, 0)),)
        assert n == 3

    def test_errors(self):
        with pytest.raises(ValueError, match="3-literal"):
            clauses_from_dimacs("p cnf 3 1\n1 2 0\n")
        with pytest.raises(ValueError, match="unterminated"):
            clauses_from_dimacs("p cnf 3 1\n1 2 3\n")
        with pytest.raises(ValueError, match="problem line"):
            clauses_from_dimacs("p sat 3 1\n1 2 3 0\n")
        with pytest.raises(ValueError, match="no clauses"):
            clauses_from_dimacs("c nothing\n")
