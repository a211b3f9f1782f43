"""Classical ground-state search: exact enumeration, SA, tabu, effort stats.

All heuristics run in spin space. QUBO inputs are converted internally via
the exact bit/spin substitution, and every reported energy is recomputed in
the caller's original form with the canonical term-order evaluator, so
``best_energy == energy(model, best_assignment)`` holds exactly and no
heuristic can ever report an energy below the brute-force optimum.

Reproducibility: each run owns an independent RNG stream seeded with
``(seed, run_index)``; all randomness is drawn up front at the full schedule
size, so a shorter sweep budget replays a prefix of the same trajectory.
Results are bit-identical across the numba and numpy kernel paths.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .models import (
    BIT,
    FULL_ENUM_LIMIT,
    Assignment,
    IsingModel,
    QuboModel,
    all_energies,
    config_from_index,
    energy,
    qubo_to_ising,
)

BRUTE_FORCE_LIMIT = 30
_CHUNK_BITS = 20


@dataclass(frozen=True)
class SaSchedule:
    """Inverse-temperature ramp for simulated annealing."""

    beta_start: float = 0.1
    beta_end: float = 10.0
    sweeps: int = 1000
    geometric: bool = True

    def __post_init__(self) -> None:
        if not (self.beta_start > 0.0):
            raise ValueError("beta_start must be > 0")
        if self.beta_end < self.beta_start:
            raise ValueError("beta_end must be >= beta_start")
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")

    def betas(self) -> np.ndarray:
        if self.geometric:
            return np.geomspace(self.beta_start, self.beta_end, self.sweeps)
        return np.linspace(self.beta_start, self.beta_end, self.sweeps)


@dataclass(frozen=True, eq=False)
class SolveResult:
    """Outcome of one solver invocation."""

    best_assignment: Assignment
    best_energy: float
    sweeps_used: int
    seed: int
    elapsed: float
    samples: tuple[tuple[Assignment, float], ...] | None = None
    num_optima: int | None = None


@dataclass(frozen=True, eq=False)
class EffortStat:
    """Order-statistic effort for reaching a target energy.

    ``effort`` is the smallest budget (sweeps or iterations) at which the
    requested quantile of runs had reached the target; ``inf`` and
    ``censored=True`` when fewer than that quantile ever reached it.
    """

    effort: float
    censored: bool
    quantile: float
    runs: int
    budget: int
    target: float
    per_run: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        self.per_run.setflags(write=False)


def _ising_arrays(m: IsingModel):
    n = m.num_spins
    h = np.ascontiguousarray(m.h, dtype=np.float64)
    items = sorted(m.J.items())
    jq_i = np.array([k[0] for k, _ in items], dtype=np.int64)
    jq_j = np.array([k[1] for k, _ in items], dtype=np.int64)
    jq_v = np.array([v for _, v in items], dtype=np.float64)
    neigh: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for (i, j), v in items:
        neigh[i].append((j, v))
        neigh[j].append((i, v))
    adj_ptr = np.zeros(n + 1, dtype=np.int64)
    adj_idx = np.empty(sum(len(x) for x in neigh), dtype=np.int64)
    adj_val = np.empty(adj_idx.shape[0], dtype=np.float64)
    pos = 0
    for i in range(n):
        neigh[i].sort()
        for j, v in neigh[i]:
            adj_idx[pos] = j
            adj_val[pos] = v
            pos += 1
        adj_ptr[i + 1] = pos
    return h, adj_ptr, adj_idx, adj_val, jq_i, jq_j, jq_v, float(m.offset)


def _to_spin_model(m: QuboModel | IsingModel) -> IsingModel:
    if isinstance(m, IsingModel):
        return m
    return qubo_to_ising(m)


def _initial_spins(rng: np.random.Generator, n: int) -> np.ndarray:
    bits = rng.integers(0, 2, size=n)
    return 1.0 - 2.0 * bits.astype(np.float64)


def _finish(m, spins_rows: np.ndarray, sweeps_used: int, seed: int,
            elapsed: float, keep_samples: bool) -> SolveResult:
    """Re-evaluate per-run bests in the model's own form and pick the winner."""
    runs = spins_rows.shape[0]
    assigns = []
    energies = np.empty(runs)
    for r in range(runs):
        a = Assignment.spins(spins_rows[r].astype(np.int8))
        if m.form == BIT:
            a = a.to_bit()
        assigns.append(a)
        energies[r] = energy(m, a)
    best = int(np.argmin(energies))
    samples = tuple((assigns[r], float(energies[r])) for r in range(runs))
    return SolveResult(
        best_assignment=assigns[best],
        best_energy=float(energies[best]),
        sweeps_used=sweeps_used,
        seed=seed,
        elapsed=elapsed,
        samples=samples if keep_samples else None,
    )


# ---------------------------------------------------------------------------
# brute force


def brute_force(m: QuboModel | IsingModel) -> SolveResult:
    """Exact minimum by full enumeration (guarded to <= 30 variables).

    Ties are broken toward the lexicographically smallest bit string, which
    is the lowest enumeration index under the big-endian convention. Also
    reports the exact count of optimal assignments.
    """
    n = m.num_spins if isinstance(m, IsingModel) else m.num_vars
    if n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute_force limited to {BRUTE_FORCE_LIMIT} variables, got {n}")
    t0 = time.perf_counter()
    if n <= FULL_ENUM_LIMIT:
        e = all_energies(m)
        best_idx = int(np.argmin(e))
        best_val = float(e[best_idx])
        count = int(np.count_nonzero(e == best_val))
    else:
        best_val = math.inf
        best_idx = 0
        count = 0
        total = 1 << n
        step = 1 << _CHUNK_BITS
        for start in range(0, total, step):
            idx = np.arange(start, min(start + step, total), dtype=np.int64)
            e = all_energies(m, indices=idx)
            lo = int(np.argmin(e))
            lo_val = float(e[lo])
            if lo_val < best_val:
                best_val = lo_val
                best_idx = start + lo
                count = int(np.count_nonzero(e == lo_val))
            elif lo_val == best_val:
                count += int(np.count_nonzero(e == lo_val))
    a = config_from_index(best_idx, n, form=m.form)
    elapsed = time.perf_counter() - t0
    return SolveResult(
        best_assignment=a,
        best_energy=best_val,
        sweeps_used=0,
        seed=0,
        elapsed=elapsed,
        num_optima=count,
    )


def optimal_energy(m: QuboModel | IsingModel) -> float:
    """Brute-force optimum evaluated in spin space.

    This is the value heuristic kernels compare targets against (they run on
    the spin form), so use it to derive ``time_to_target`` targets.
    """
    return brute_force(_to_spin_model(m)).best_energy


# ---------------------------------------------------------------------------
# simulated annealing


def _sa_randoms(n: int, sweeps: int, runs: int, seed: int, random_order: bool):
    spins0 = np.empty((runs, n))
    logu = np.empty((runs, sweeps, n))
    for r in range(runs):
        rng = np.random.default_rng([seed, r])
        spins0[r] = _initial_spins(rng, n)
        with np.errstate(divide="ignore"):
            logu[r] = np.log(rng.random((sweeps, n)))
    if random_order:
        rng = np.random.default_rng([seed, runs])
        order = np.empty((sweeps, n), dtype=np.int64)
        for t in range(sweeps):
            order[t] = rng.permutation(n)
    else:
        order = np.arange(n, dtype=np.int64).reshape(1, n)
    return spins0, logu, order


def simulated_annealing(
    m: QuboModel | IsingModel,
    schedule: SaSchedule | None = None,
    seed: int = 0,
    runs: int = 1,
    random_order: bool = False,
    keep_samples: bool = False,
) -> SolveResult:
    """Single-flip Metropolis annealing under an inverse-temperature ramp.

    A sweep proposes each spin once (ascending index order by default; the
    ``random_order`` flag draws a fresh scan permutation per sweep). The
    best-seen configuration is returned; with ``runs > 1`` independent
    restarts are merged deterministically by run index.
    """
    if schedule is None:
        schedule = SaSchedule()
    if runs < 1:
        raise ValueError("runs must be >= 1")
    im = _to_spin_model(m)
    arrays = _ising_arrays(im)
    n = im.num_spins
    spins0, logu, order = _sa_randoms(n, schedule.sweeps, runs, seed, random_order)
    betas = schedule.betas()
    t0 = time.perf_counter()
    best_spins, _, _ = _kernels.sa_batch(
        *arrays, spins0, betas, logu, schedule.sweeps, order, -np.inf,
    )
    elapsed = time.perf_counter() - t0
    return _finish(m, best_spins, schedule.sweeps, seed, elapsed, keep_samples)


# ---------------------------------------------------------------------------
# tabu search


def default_tenure(n: int) -> int:
    return max(10, n // 4)


def tabu_search(
    m: QuboModel | IsingModel,
    tenure: int | None = None,
    max_iters: int | None = None,
    seed: int = 0,
    runs: int = 1,
    keep_samples: bool = False,
) -> SolveResult:
    """Steepest-admissible single-flip search with recency tabu.

    Each iteration flips the non-tabu move of lowest energy delta; a tabu
    move is admissible anyway if it improves on the best seen (aspiration).
    If every move is tabu and none aspirates, the move whose tabu expires
    soonest is taken. The search always moves, uphill included.
    """
    if tenure is not None and tenure < 1:
        raise ValueError("tenure must be >= 1")
    if runs < 1:
        raise ValueError("runs must be >= 1")
    im = _to_spin_model(m)
    n = im.num_spins
    if tenure is None:
        tenure = default_tenure(n)
    if max_iters is None:
        max_iters = 50 * n
    arrays = _ising_arrays(im)
    spins0 = np.empty((runs, n))
    for r in range(runs):
        rng = np.random.default_rng([seed, r])
        spins0[r] = _initial_spins(rng, n)
    t0 = time.perf_counter()
    best_spins, _, _ = _kernels.tabu_batch(
        *arrays, spins0, tenure, max_iters, -np.inf,
    )
    elapsed = time.perf_counter() - t0
    return _finish(m, best_spins, max_iters, seed, elapsed, keep_samples)


# ---------------------------------------------------------------------------
# time to target


def time_to_target(
    m: QuboModel | IsingModel,
    target_energy: float | None = None,
    success_quantile: float = 0.99,
    runs: int = 100,
    solver: str = "sa",
    schedule: SaSchedule | None = None,
    tenure: int | None = None,
    max_iters: int | None = None,
    seed: int = 0,
    random_order: bool = False,
) -> EffortStat:
    """Effort (sweeps or iterations) for a quantile of runs to reach a target.

    Runs ``runs`` independent trajectories and records, per run, the first
    completed sweep/iteration at which the canonical energy was at or below
    ``target_energy`` (0 when the starting configuration already qualifies;
    infinity when the budget expires first). The statistic is the
    ``ceil(quantile * runs)``-th smallest of those; if that run never hit,
    the batch is censored rather than extrapolated.

    Targets are compared against spin-form canonical energies (heuristics
    run on the spin form); ``target_energy=None`` uses ``optimal_energy(m)``.
    """
    if not (0.0 < success_quantile <= 1.0):
        raise ValueError("success_quantile must be in (0, 1]")
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if target_energy is None:
        target_energy = optimal_energy(m)
    im = _to_spin_model(m)
    arrays = _ising_arrays(im)
    n = im.num_spins
    if solver == "sa":
        if schedule is None:
            schedule = SaSchedule()
        budget = schedule.sweeps if max_iters is None else max_iters
        if budget > schedule.sweeps:
            raise ValueError("budget exceeds schedule length")
        spins0, logu, order = _sa_randoms(n, schedule.sweeps, runs, seed, random_order)
        betas = schedule.betas()
        _, _, first_hit = _kernels.sa_batch(
            *arrays, spins0, betas, logu, budget, order, float(target_energy),
        )
    elif solver == "tabu":
        if tenure is None:
            tenure = default_tenure(n)
        budget = 50 * n if max_iters is None else max_iters
        spins0 = np.empty((runs, n))
        for r in range(runs):
            rng = np.random.default_rng([seed, r])
            spins0[r] = _initial_spins(rng, n)
        _, _, first_hit = _kernels.tabu_batch(
            *arrays, spins0, tenure, budget, float(target_energy),
        )
    else:
        raise ValueError(f"unknown solver {solver!r}")
    per_run = np.where(first_hit < 0, np.inf, first_hit.astype(np.float64))
    k = math.ceil(success_quantile * runs)
    stat = float(np.sort(per_run)[k - 1])
    return EffortStat(
        effort=stat,
        censored=not math.isfinite(stat),
        quantile=success_quantile,
        runs=runs,
        budget=budget,
        target=float(target_energy),
        per_run=per_run,
    )
