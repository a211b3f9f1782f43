"""Boltzmann machinery and black-box hybrid minimization.

Exact finite-temperature distributions, seeded single-site heat-bath (Gibbs)
sampling, surrogate-model fitting over a hardware graph, the
evaluate/filter/fit/sample black-box loop, and conditional-model
log-likelihood gradients for structured prediction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import gibbs_batch
from .graphs import HardwareGraph
from .learning import StructuredModel, feature_vector, structured_energy
from .models import (
    FULL_ENUM_LIMIT,
    SPIN,
    Assignment,
    IsingModel,
    QuboModel,
    all_energies,
    energy,
)
from .solvers import _ising_arrays, _to_spin_model, tabu_search


def _num_vars(model: IsingModel | QuboModel) -> int:
    return model.num_spins if isinstance(model, IsingModel) else model.num_vars


@dataclass(frozen=True, eq=False)
class Population:
    """Spin configurations with their oracle values."""

    configs: tuple[Assignment, ...]
    values: np.ndarray
    generation: int = 0

    def __post_init__(self) -> None:
        configs = tuple(self.configs)
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or len(configs) != values.shape[0]:
            raise ValueError("configs and values must have matching lengths")
        sizes = {len(c) for c in configs}
        if len(sizes) > 1:
            raise ValueError("all configs must have the same length")
        for c in configs:
            if c.form != SPIN:
                raise ValueError("population configs must be spin assignments")
        values.setflags(write=False)
        object.__setattr__(self, "configs", configs)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.configs)

    def best(self) -> tuple[Assignment, float]:
        if not self.configs:
            raise ValueError("empty population")
        k = int(np.argmin(self.values))
        return self.configs[k], float(self.values[k])


@dataclass(frozen=True, eq=False)
class BoltzmannModel:
    """p(z) proportional to exp(-beta * E(z)) for a quadratic energy."""

    base: IsingModel | QuboModel
    beta: float

    def __post_init__(self) -> None:
        if not (self.beta >= 0):
            raise ValueError("beta must be >= 0")
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def num_vars(self) -> int:
        return _num_vars(self.base)


def exact_boltzmann(bm: BoltzmannModel) -> np.ndarray:
    """Probabilities over all 2^N configurations, indexed big-endian."""
    n = bm.num_vars
    if n > FULL_ENUM_LIMIT:
        raise ValueError(f"exact distribution limited to {FULL_ENUM_LIMIT} variables")
    e = all_energies(bm.base)
    w = np.exp(-bm.beta * (e - e.min()))
    return w / w.sum()


def gibbs_sample(
    bm: BoltzmannModel,
    sweeps: int,
    burn_in: int = 0,
    seed: int = 0,
    runs: int = 1,
) -> np.ndarray:
    """Heat-bath chains in fixed scan order; (runs, sweeps - burn_in) indices.

    One sweep updates every site once; the configuration index recorded after
    each sweep encodes the bit form big-endian (bit i set when spin i is -1).
    """
    if not sweeps > burn_in >= 0:
        raise ValueError("need sweeps > burn_in >= 0")
    if runs < 1:
        raise ValueError("runs must be >= 1")
    m = _to_spin_model(bm.base)
    h, adj_ptr, adj_idx, adj_val, *_ = _ising_arrays(m)
    n = m.num_spins
    rng = np.random.default_rng(seed)
    spins0 = 1.0 - 2.0 * rng.integers(0, 2, size=(runs, n)).astype(np.float64)
    u = rng.random(size=(runs, sweeps, n))
    logitu = np.log(u) - np.log1p(-u)
    out = gibbs_batch(h, adj_ptr, adj_idx, adj_val, 2.0 * bm.beta, spins0, logitu)
    return out[:, burn_in:]


def index_bits(indices: np.ndarray, n: int) -> np.ndarray:
    """Decode big-endian configuration indices to a bit matrix."""
    indices = np.asarray(indices, dtype=np.int64).reshape(-1)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((indices[:, None] >> shifts) & 1).astype(np.int8)


def filter_population(pop: Population, keep_fraction: float) -> Population:
    """Deduplicate, then keep the best ceil(fraction * |P|) in stable order."""
    if not 0 < keep_fraction <= 1:
        raise ValueError("keep_fraction must be in (0, 1]")
    if len(pop) == 0:
        raise ValueError("empty population")
    seen: set[bytes] = set()
    idx: list[int] = []
    for k, c in enumerate(pop.configs):
        key = c.values.tobytes()
        if key not in seen:
            seen.add(key)
            idx.append(k)
    k_keep = min(math.ceil(keep_fraction * len(pop)), len(idx))
    vals = pop.values[idx]
    ranked = np.argsort(vals, kind="stable")[:k_keep]
    chosen = sorted(int(idx[r]) for r in ranked)
    return Population(
        configs=tuple(pop.configs[k] for k in chosen),
        values=pop.values[chosen],
        generation=pop.generation,
    )


@dataclass(frozen=True, eq=False)
class HardwareFit:
    """Least-squares surrogate over hardware-graph terms."""

    model: IsingModel
    residual: float
    fields_only: bool
    ridge: float


def fit_hardware_model(
    pop: Population, graph: HardwareGraph, ridge: float | None = None
) -> HardwareFit:
    """Ridge fit of oracle values to features {1, s_i, s_i s_j on edges}.

    A population with fewer than 2 distinct configs degrades to a
    fields-only fit.  The fitted IsingModel reproduces the affine map:
    constant -> offset, s_i coefficient c_i -> h_i = -c_i, edge
    coefficient -> J_ij.
    """
    if len(pop) == 0:
        raise ValueError("empty population")
    n = len(pop.configs[0])
    if n != graph.nodes:
        raise ValueError("population configs do not match graph size")
    distinct = {c.values.tobytes() for c in pop.configs}
    fields_only = len(distinct) < 2
    edges = [] if fields_only else graph.edge_list()

    S = np.stack([c.values.astype(np.float64) for c in pop.configs])
    cols = [np.ones(len(pop))]
    cols.extend(S[:, i] for i in range(n))
    cols.extend(S[:, i] * S[:, j] for i, j in edges)
    X = np.stack(cols, axis=1)
    y = pop.values

    if ridge is None:
        # 1e-6 of the per-row feature scale, so the prior's pull fades as
        # the population grows while the scale stays unit-free
        ridge = 1e-6 * float(np.einsum("ij,ij->", X, X)) / X.shape[0]
    if ridge < 0:
        raise ValueError("ridge must be >= 0")
    p = X.shape[1]
    if ridge > 0:
        X_aug = np.vstack([X, math.sqrt(ridge) * np.eye(p)])
        y_aug = np.concatenate([y, np.zeros(p)])
    else:
        X_aug, y_aug = X, y
    c, *_ = np.linalg.lstsq(X_aug, y_aug, rcond=None)

    h = -c[1 : n + 1]
    J = {e: float(v) for e, v in zip(edges, c[n + 1 :]) if v != 0.0}
    model = IsingModel(num_spins=n, h=h, J=J, offset=float(c[0]))
    residual = float(np.linalg.norm(X @ c - y))
    return HardwareFit(
        model=model, residual=residual, fields_only=fields_only, ridge=float(ridge)
    )


@dataclass(frozen=True, eq=False)
class BlackboxResult:
    best_assignment: Assignment
    best_value: float
    iterations: int
    evaluations: int
    history: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        self.history.setflags(write=False)


def _random_spins(rng: np.random.Generator, count: int, n: int) -> list[Assignment]:
    bits = rng.integers(0, 2, size=(count, n)).astype(np.int8)
    return [Assignment.spins(1 - 2 * bits[k]) for k in range(count)]


def blackbox_minimize(
    oracle,
    graph: HardwareGraph,
    pop_size: int = 32,
    iters: int = 50,
    seed: int = 0,
    solver=None,
    keep_fraction: float = 0.5,
    stall_limit: int = 5,
) -> BlackboxResult:
    """Minimize a black-box function of spin vectors via surrogate fitting.

    Loop: evaluate the oracle on the population, filter to the best part,
    fit a hardware-graph surrogate, sample the surrogate's low-energy
    configurations (tabu restarts plus 10% random immigrants) as the next
    population.  Stops at the iteration cap or after ``stall_limit``
    iterations without improving the best value ever evaluated; that
    incumbent is returned.
    """
    if pop_size < 2:
        raise ValueError("pop_size must be >= 2")
    if iters < 1:
        raise ValueError("iters must be >= 1")
    n = graph.nodes
    rng = np.random.default_rng(seed)
    cache: dict[bytes, float] = {}
    evaluations = 0

    def evaluate(configs, iteration: int) -> np.ndarray:
        nonlocal evaluations
        vals = np.empty(len(configs))
        for k, c in enumerate(configs):
            key = c.values.tobytes()
            if key not in cache:
                try:
                    cache[key] = float(oracle(c.values))
                except Exception as exc:
                    raise RuntimeError(
                        f"oracle failed at iteration {iteration}"
                    ) from exc
                evaluations += 1
            vals[k] = cache[key]
        return vals

    configs = _random_spins(rng, pop_size, n)
    values = evaluate(configs, 0)
    pop = Population(tuple(configs), values, generation=0)
    incumbent, inc_value = pop.best()
    history = [inc_value]
    stall = 0
    it = 0

    for it in range(1, iters + 1):
        kept = filter_population(pop, keep_fraction)
        fit = fit_hardware_model(kept, graph)
        if solver is None:
            sol = tabu_search(
                fit.model, runs=pop_size, seed=int(rng.integers(2**31)),
                keep_samples=True,
            )
            ranked = sorted(sol.samples, key=lambda sv: sv[1])
            candidates = [a.to_spin() for a, _ in ranked]
        else:
            candidates = [a.to_spin() for a in solver(fit.model, pop_size)]
        n_imm = max(1, pop_size // 10)
        fresh: list[Assignment] = []
        seen: set[bytes] = set()
        for a in candidates:
            key = a.values.tobytes()
            if key not in seen:
                seen.add(key)
                fresh.append(a)
            if len(fresh) >= pop_size - n_imm:
                break
        fresh.extend(_random_spins(rng, pop_size - len(fresh), n))
        values = evaluate(fresh, it)
        pop = Population(tuple(fresh), values, generation=it)
        cand, cand_value = pop.best()
        if cand_value < inc_value:
            incumbent, inc_value = cand, cand_value
            stall = 0
        else:
            stall += 1
        history.append(inc_value)
        if stall >= stall_limit:
            break

    return BlackboxResult(
        best_assignment=incumbent,
        best_value=inc_value,
        iterations=it,
        evaluations=evaluations,
        history=np.asarray(history),
    )


def _pair_moments(bits: np.ndarray, weights: np.ndarray | None, terms) -> np.ndarray:
    """E[z_i z_j] per term; (i, i) terms give E[z_i]."""
    out = np.empty(len(terms))
    for t, (i, j) in enumerate(terms):
        prod = bits[:, i] if i == j else bits[:, i] * bits[:, j]
        out[t] = float(prod.mean()) if weights is None else float(weights @ prod)
    return out


def crf_loglik_gradient(
    data,
    model: StructuredModel,
    beta: float = 1.0,
    estimator: str = "exact",
    sweeps: int = 2000,
    burn_in: int = 200,
    seed: int = 0,
) -> np.ndarray:
    """Moment-matching gradient of the conditional model, shaped like w.

    Entry (k, t) for label term t = (i, j) is
    sum_d psi_k(x_d) * [ z_d(i) z_d(j) - E_{p(z|x_d)}(z_i z_j) ],
    i.e. the gradient of -loglik / beta with respect to w[k, t]; it
    vanishes at the maximum-likelihood weights.
    """
    if estimator not in ("exact", "gibbs"):
        raise ValueError("estimator must be 'exact' or 'gibbs'")
    if not data:
        raise ValueError("empty data set")
    if not (beta > 0):
        raise ValueError("beta must be > 0")
    terms = model.label_graph
    grad = np.zeros_like(model.w)
    nl = model.num_labels
    for d_idx, (x, z_d) in enumerate(data):
        zd = np.asarray(z_d, dtype=np.int8).reshape(1, -1)
        if zd.shape[1] != nl:
            raise ValueError("label vector length does not match the model")
        psi = feature_vector(x, model.feature_dim)
        q = structured_energy(x, model)
        bm = BoltzmannModel(q, beta)
        if estimator == "exact":
            p = exact_boltzmann(bm)
            bits = index_bits(np.arange(1 << nl), nl)
            model_mom = _pair_moments(bits, p, terms)
        else:
            idx = gibbs_sample(bm, sweeps, burn_in, seed=seed + d_idx)
            bits = index_bits(idx, nl)
            model_mom = _pair_moments(bits, None, terms)
        emp_mom = _pair_moments(zd, None, terms)
        grad += np.outer(psi, emp_mom - model_mom)
    return grad


def crf_loglik(data, model: StructuredModel, beta: float = 1.0) -> float:
    """Exact conditional log-likelihood of the labelings under the model."""
    if not data:
        raise ValueError("empty data set")
    total = 0.0
    for x, z_d in data:
        zd = np.asarray(z_d, dtype=np.int8)
        q = structured_energy(x, model)
        e = all_energies(q)
        scaled = -beta * (e - e.min())
        logz = math.log(float(np.exp(scaled).sum())) - beta * float(e.min())
        total += -beta * energy(q, Assignment.bits(zd)) - logz
    return total
