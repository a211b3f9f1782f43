"""Tests for Boltzmann machinery and the black-box loop."""

from __future__ import annotations

import math

import numpy as np
import pytest

from quboforge.graphs import chimera_graph
from quboforge.learning import StructuredModel
from quboforge.models import Assignment, IsingModel, all_energies, energy
from quboforge.prob import (
    BlackboxResult,
    BoltzmannModel,
    Population,
    blackbox_minimize,
    crf_loglik,
    crf_loglik_gradient,
    exact_boltzmann,
    filter_population,
    fit_hardware_model,
    gibbs_sample,
    index_bits,
)
from quboforge.solvers import brute_force


def random_ising(n: int, seed: int, edge_prob: float = 0.4) -> IsingModel:
    rng = np.random.default_rng(seed)
    h = rng.uniform(-1, 1, n)
    J = {
        (i, j): float(rng.uniform(-1, 1))
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < edge_prob
    }
    return IsingModel(num_spins=n, h=h, J=J)


def spin_pop(rows: np.ndarray, values) -> Population:
    configs = tuple(Assignment.spins(r.astype(np.int8)) for r in rows)
    return Population(configs, np.asarray(values, dtype=np.float64))


class TestExactBoltzmann:
    def test_zero_energy_is_uniform(self):
        m = IsingModel(num_spins=3, h=np.zeros(3), J={})
        p = exact_boltzmann(BoltzmannModel(m, beta=1.3))
        assert np.allclose(p, 1 / 8)

    def test_sums_to_one(self):
        p = exact_boltzmann(BoltzmannModel(random_ising(8, 1), beta=0.7))
        assert abs(p.sum() - 1.0) < 1e-12
        assert np.all(p > 0)

    def test_single_spin_ratio(self):
        hval, beta = 0.8, 1.7
        m = IsingModel(num_spins=1, h=np.array([hval]), J={})
        p = exact_boltzmann(BoltzmannModel(m, beta))
        # index 0 is bit 0, spin +1
        assert p[0] / p[1] == pytest.approx(math.exp(2 * beta * hval), rel=1e-12)

    def test_large_beta_concentrates(self):
        m = random_ising(6, 5)
        e = all_energies(m)
        order = np.sort(e)
        gap = order[1] - order[0]
        beta = 12.0 / gap
        p = exact_boltzmann(BoltzmannModel(m, beta))
        assert p[int(np.argmin(e))] >= 0.99

    def test_guards(self):
        with pytest.raises(ValueError, match="beta"):
            BoltzmannModel(random_ising(2, 0), beta=-1.0)
        big = IsingModel(num_spins=21, h=np.zeros(21), J={})
        with pytest.raises(ValueError, match="limited"):
            exact_boltzmann(BoltzmannModel(big, 1.0))


class TestGibbs:
    def test_ferromagnet_low_temperature(self):
        m = IsingModel(num_spins=2, h=np.zeros(2), J={(0, 1): -1.0})
        idx = gibbs_sample(BoltzmannModel(m, beta=50.0), sweeps=400, burn_in=50)
        assert set(np.unique(idx)) <= {0, 3}  # ++ and --

    def test_infinite_temperature_marginals(self):
        m = random_ising(5, 9)
        idx = gibbs_sample(BoltzmannModel(m, beta=0.0), sweeps=10_100, burn_in=100)
        bits = index_bits(idx, 5)
        assert np.all(np.abs(bits.mean(axis=0) - 0.5) < 0.015)

    def test_total_variation_to_exact(self):
        m = random_ising(8, 3)
        bm = BoltzmannModel(m, beta=1.0)
        exact = exact_boltzmann(bm)
        idx = gibbs_sample(bm, sweeps=26_000, burn_in=1_000, seed=4, runs=4)
        counts = np.bincount(idx.reshape(-1), minlength=256)
        emp = counts / counts.sum()
        tv = 0.5 * np.abs(emp - exact).sum()
        assert tv < 0.05

    def test_permutation_equivariance_marginals(self):
        n = 5
        m = random_ising(n, 17, edge_prob=0.6)
        rng = np.random.default_rng(2)
        perm = rng.permutation(n)
        h2 = np.empty(n)
        h2[perm] = m.h
        J2 = {}
        for (i, j), v in m.J.items():
            a, b = int(perm[i]), int(perm[j])
            J2[(min(a, b), max(a, b))] = v
        m2 = IsingModel(num_spins=n, h=h2, J=J2)
        beta = 0.5
        b1 = index_bits(
            gibbs_sample(BoltzmannModel(m, beta), 30_000, 1_000, seed=8, runs=2), n
        ).mean(axis=0)
        b2 = index_bits(
            gibbs_sample(BoltzmannModel(m2, beta), 30_000, 1_000, seed=9, runs=2), n
        ).mean(axis=0)
        for i in range(n):
            assert abs(b2[perm[i]] - b1[i]) < 0.05

    def test_validation(self):
        bm = BoltzmannModel(random_ising(3, 0), 1.0)
        with pytest.raises(ValueError, match="burn_in"):
            gibbs_sample(bm, sweeps=10, burn_in=10)
        with pytest.raises(ValueError, match="runs"):
            gibbs_sample(bm, sweeps=10, burn_in=0, runs=0)

    def test_index_bits_roundtrip(self):
        bits = index_bits(np.array([5, 0, 7]), 3)
        assert bits.tolist() == [[1, 0, 1], [0, 0, 0], [1, 1, 1]]


class TestFilterPopulation:
    def test_keep_all_dedups(self):
        rows = np.array([[1, 1], [-1, 1], [1, 1], [-1, -1]])
        pop = spin_pop(rows, [3.0, 1.0, 3.0, 2.0])
        out = filter_population(pop, 1.0)
        assert len(out) == 3
        assert [tuple(c.values) for c in out.configs] == [
            (1, 1),
            (-1, 1),
            (-1, -1),
        ]

    def test_keep_half(self):
        rows = np.array([[1, 1], [-1, 1], [1, -1], [-1, -1]])
        pop = spin_pop(rows, [4.0, 1.0, 3.0, 2.0])
        out = filter_population(pop, 0.5)
        assert list(out.values) == [1.0, 2.0]

    def test_ties_stable(self):
        rows = np.array([[1, 1], [-1, 1], [1, -1], [-1, -1], [1, 1]])
        pop = spin_pop(rows, np.zeros(5))
        out = filter_population(pop, 0.5)
        # dedup drops the repeat; ceil(0.5 * 5) = 3 earliest kept
        assert [tuple(c.values) for c in out.configs] == [
            (1, 1),
            (-1, 1),
            (1, -1),
        ]

    def test_validation(self):
        pop = spin_pop(np.array([[1, 1]]), [0.0])
        with pytest.raises(ValueError, match="keep_fraction"):
            filter_population(pop, 0.0)
        with pytest.raises(ValueError, match="empty"):
            filter_population(Population((), np.empty(0)), 0.5)
        with pytest.raises(ValueError, match="matching lengths"):
            Population((Assignment.spins([1, 1]),), np.array([1.0, 2.0]))
        with pytest.raises(ValueError, match="spin"):
            Population((Assignment.bits([1, 0]),), np.array([1.0]))


class TestFitHardwareModel:
    def test_recovers_generator(self):
        graph = chimera_graph(1, 1, 4)
        rng = np.random.default_rng(12)
        truth = IsingModel(
            num_spins=graph.nodes,
            h=rng.uniform(-0.8, 0.8, graph.nodes),
            J={e: float(rng.uniform(-0.8, 0.8)) for e in graph.edge_list()},
            offset=0.3,
        )
        rows = 1 - 2 * rng.integers(0, 2, size=(512, graph.nodes)).astype(np.int8)
        values = [energy(truth, Assignment.spins(r)) for r in rows]
        fit = fit_hardware_model(spin_pop(rows, values), graph)
        assert not fit.fields_only
        assert np.allclose(fit.model.h, truth.h, atol=1e-6)
        for e in graph.edge_list():
            assert fit.model.J.get(e, 0.0) == pytest.approx(truth.J[e], abs=1e-6)
        assert fit.model.offset == pytest.approx(0.3, abs=1e-6)
        assert fit.residual < 1e-5

    def test_one_spin_difference_sign(self):
        graph = chimera_graph(1, 1, 1)
        rows = np.array([[1, 1], [-1, 1]])
        fit = fit_hardware_model(spin_pop(rows, [0.0, 1.0]), graph)
        # flipping spin 0 down raises the value, so the field prefers +1
        assert fit.model.h[0] > 0

    def test_ridge_shrinks_noise_fit(self):
        graph = chimera_graph(1, 1, 2)
        rng = np.random.default_rng(30)
        rows = 1 - 2 * rng.integers(0, 2, size=(40, graph.nodes)).astype(np.int8)
        values = rng.normal(size=40)
        pop = spin_pop(rows, values)

        def coeff_norm(fit):
            c = [fit.model.offset]
            c.extend(-fit.model.h)
            c.extend(fit.model.J.get(e, 0.0) for e in graph.edge_list())
            return float(np.linalg.norm(c))

        ridged = fit_hardware_model(pop, graph)
        plain = fit_hardware_model(pop, graph, ridge=0.0)
        assert ridged.ridge > 0
        assert coeff_norm(ridged) < coeff_norm(plain)

    def test_degenerate_population_fields_only(self):
        graph = chimera_graph(1, 1, 2)
        rows = np.tile([1, -1, 1, -1], (3, 1))
        fit = fit_hardware_model(spin_pop(rows, [2.0, 2.0, 2.0]), graph)
        assert fit.fields_only
        assert fit.model.J == {}

    def test_validation(self):
        graph = chimera_graph(1, 1, 2)
        with pytest.raises(ValueError, match="graph size"):
            fit_hardware_model(spin_pop(np.array([[1, 1]]), [0.0]), graph)
        with pytest.raises(ValueError, match="ridge"):
            fit_hardware_model(
                spin_pop(np.ones((2, 4)), [0.0, 1.0]), graph, ridge=-1.0
            )


class TestBlackbox:
    def test_matches_brute_force_on_ising_oracle(self):
        graph = chimera_graph(1, 1, 3)
        m = random_ising(graph.nodes, 77, edge_prob=1.0)
        m = IsingModel(
            num_spins=graph.nodes,
            h=m.h,
            J={e: v for e, v in m.J.items() if graph.has_edge(*e)},
        )
        truth = brute_force(m).best_energy

        def oracle(s):
            return energy(m, Assignment.spins(np.asarray(s, dtype=np.int8)))

        hits = 0
        for seed in range(100):
            res = blackbox_minimize(
                oracle, graph, pop_size=20, iters=15, seed=seed
            )
            if res.best_value == pytest.approx(truth, abs=1e-9):
                hits += 1
        assert hits >= 90

    def test_constant_oracle_stalls(self):
        graph = chimera_graph(1, 1, 2)
        res = blackbox_minimize(lambda s: 7.5, graph, pop_size=8, iters=40, seed=1)
        assert res.best_value == 7.5
        assert res.iterations <= 10  # stall exit, not the cap

    def test_count_positive_spins(self):
        graph = chimera_graph(1, 1, 3)
        res = blackbox_minimize(
            lambda s: float(np.sum(s > 0)), graph, pop_size=20, iters=10, seed=3
        )
        assert res.best_value == 0.0
        assert np.all(res.best_assignment.values == -1)
        assert np.argmax(res.history == 0.0) <= 3

    def test_incumbent_monotone_and_faithful(self):
        graph = chimera_graph(1, 1, 2)
        m = random_ising(graph.nodes, 5)
        seen = []

        def oracle(s):
            v = energy(m, Assignment.spins(np.asarray(s, dtype=np.int8)))
            seen.append(v)
            return v

        res = blackbox_minimize(oracle, graph, pop_size=10, iters=8, seed=11)
        assert np.all(np.diff(res.history) <= 0)
        assert res.best_value == pytest.approx(min(seen))
        assert res.evaluations == len(seen)
        assert isinstance(res, BlackboxResult)

    def test_oracle_error_carries_iteration(self):
        graph = chimera_graph(1, 1, 2)

        def bad(s):
            raise RuntimeError("boom")

        with pytest.raises(RuntimeError, match="iteration 0") as exc:
            blackbox_minimize(bad, graph, pop_size=4, iters=3, seed=0)
        assert isinstance(exc.value.__cause__, RuntimeError)


def toy_structured(w=None) -> StructuredModel:
    return StructuredModel(
        num_labels=2,
        label_graph=((0, 0), (1, 1), (0, 1)),
        feature_dim=1,
        w=w,
    )


class TestCrfGradient:
    def test_zero_at_closed_form_mle(self):
        # empirical counts 3:1:1:1 over (z0,z1) in {00,01,10,11}; matching
        # moments gives fields ln3 and pair weight -ln3 exactly at beta = 1;
        # term order is the normalized label graph ((0,0),(0,1),(1,1))
        w = np.array([[math.log(3.0), -math.log(3.0), math.log(3.0)]])
        model = toy_structured(w)
        x = np.empty(0)
        data = [(x, (0, 0))] * 3 + [(x, (0, 1)), (x, (1, 0)), (x, (1, 1))]
        grad = crf_loglik_gradient(data, model, beta=1.0)
        assert np.linalg.norm(grad) < 1e-8

    def test_finite_difference(self):
        rng = np.random.default_rng(6)
        model = StructuredModel(
            num_labels=3,
            label_graph=((0, 0), (1, 1), (2, 2), (0, 1), (1, 2)),
            feature_dim=3,
            w=rng.normal(scale=0.5, size=(3, 5)),
        )
        beta = 0.9
        data = [
            (rng.normal(size=2), rng.integers(0, 2, 3)) for _ in range(4)
        ]
        grad = crf_loglik_gradient(data, model, beta=beta)
        step = 1e-4
        fd = np.zeros_like(grad)
        for k in range(grad.shape[0]):
            for t in range(grad.shape[1]):
                wp = np.array(model.w)
                wp[k, t] += step
                fp = -crf_loglik(data, model.with_weights(wp), beta) / beta
                wm = np.array(model.w)
                wm[k, t] -= step
                fm = -crf_loglik(data, model.with_weights(wm), beta) / beta
                fd[k, t] = (fp - fm) / (2 * step)
        assert np.linalg.norm(fd - grad) / np.linalg.norm(grad) < 1e-4

    def test_self_consistency_on_model_samples(self):
        w = np.array([[0.6, -0.4, 0.9]])
        model = toy_structured(w)
        x = np.empty(0)
        from quboforge.learning import structured_energy

        p = exact_boltzmann(BoltzmannModel(structured_energy(x, model), 1.0))
        rng = np.random.default_rng(44)
        draws = rng.choice(4, size=4000, p=p)
        bits = index_bits(draws, 2)
        data = [(x, bits[k]) for k in range(len(draws))]
        grad = crf_loglik_gradient(data, model, beta=1.0)
        assert np.all(np.abs(grad) / len(data) < 0.04)

    def test_gibbs_estimator_tracks_exact(self):
        w = np.array([[0.5, -0.7, 0.4]])
        model = toy_structured(w)
        rng = np.random.default_rng(10)
        data = [(np.empty(0), rng.integers(0, 2, 2)) for _ in range(3)]
        g_exact = crf_loglik_gradient(data, model, beta=1.0)
        g_gibbs = crf_loglik_gradient(
            data, model, beta=1.0, estimator="gibbs", sweeps=20_000, burn_in=1_000
        )
        assert np.max(np.abs(g_exact - g_gibbs)) < 0.08

    def test_validation(self):
        model = toy_structured()
        with pytest.raises(ValueError, match="estimator"):
            crf_loglik_gradient([(np.empty(0), (0, 0))], model, estimator="mc")
        with pytest.raises(ValueError, match="empty"):
            crf_loglik_gradient([], model)
        with pytest.raises(ValueError, match="beta"):
            crf_loglik_gradient([(np.empty(0), (0, 0))], model, beta=0.0)
        with pytest.raises(ValueError, match="length"):
            crf_loglik_gradient([(np.empty(0), (0, 0, 1))], model)
