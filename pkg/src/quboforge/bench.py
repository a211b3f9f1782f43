"""Benchmark harness: seeded random instances, effort tables, scaling fits.

Instances are Ising models drawn coefficient-wise from a small value set on
the first N nodes of a hardware graph. For every instance the optimum is
certified by exact enumeration, and each solver's effort (sweeps for SA,
iterations for tabu) to reach that optimum at a success quantile is measured
with ``time_to_target``. Wall time is hardware-dependent, so it is recorded
separately and kept out of the emitted tables.

Summary statistics are exact order statistics: the q-th percentile of k
values is the ``ceil(q * k)``-th smallest, matching the solver module's
quantile convention and avoiding interpolation across censored (infinite)
efforts. An instance whose effort statistic is censored is excluded from the
row summary when such instances are fewer than half the batch; otherwise the
whole row is reported as censored.

Every random draw derives from ``(config seed, size, instance index)``, so
the emitted tables are a pure function of the configuration: instances may
be evaluated in any order or concurrently without changing a byte of the
output.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass

import numpy as np

from .graphs import HardwareGraph, chimera_graph
from .models import IsingModel
from .solvers import BRUTE_FORCE_LIMIT, SaSchedule, optimal_energy, time_to_target

DEFAULT_COEFF_SET = (
    -1.0,
    -2.0 / 3.0,
    -1.0 / 3.0,
    0.0,
    1.0 / 3.0,
    2.0 / 3.0,
    1.0,
)

# Stream tags keep instance generation and solver randomness independent.
_INSTANCE_STREAM = 0x5EED
_SOLVER_STREAM = 0x50F7


# ---------------------------------------------------------------------------
# random instances


def random_instance(
    N: int,
    graph: HardwareGraph,
    coeff_set=None,
    seed=0,
) -> IsingModel:
    """Random Ising model on the first ``N`` nodes of a hardware graph.

    Every field and every coupling on an induced edge (both endpoints below
    ``N``) is drawn independently and uniformly from ``coeff_set`` (default
    the seven-value grid -1, -2/3, -1/3, 0, 1/3, 2/3, 1). Zero draws are
    dropped by the model constructor, so ``J`` holds the nonzero couplings
    and they lie on graph edges only.

    The node order is the graph's deterministic numbering (row-major over
    cells, side-major within a cell); fields are drawn first, then edge
    values in ascending edge order, so an instance is reproducible from the
    graph shape, ``N``, and ``seed``.
    """
    if coeff_set is None:
        coeff_set = DEFAULT_COEFF_SET
    coeffs = np.asarray(tuple(coeff_set), dtype=np.float64)
    if coeffs.ndim != 1 or coeffs.size == 0:
        raise ValueError("coeff_set must be a non-empty sequence of values")
    if not np.all(np.isfinite(coeffs)):
        raise ValueError("coeff_set values must be finite")
    if not 1 <= N <= graph.nodes:
        raise ValueError(f"N must be in 1..{graph.nodes}, got {N}")
    rng = np.random.default_rng(seed)
    h = coeffs[rng.integers(coeffs.size, size=N)]
    induced = [e for e in graph.edge_list() if e[1] < N]
    vals = coeffs[rng.integers(coeffs.size, size=len(induced))]
    J = {edge: float(v) for edge, v in zip(induced, vals)}
    return IsingModel(num_spins=N, h=h, J=J)


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class SolverSpec:
    """One heuristic column of a benchmark table.

    ``budget`` is the sweep count for SA and the iteration cap for tabu;
    ``None`` keeps the solver default (1000 sweeps / 50 * N iterations).
    ``runs`` independent restarts feed the success-quantile effort statistic.
    """

    kind: str = "sa"
    label: str | None = None
    runs: int = 100
    budget: int | None = None
    beta_start: float = 0.1
    beta_end: float = 10.0
    tenure: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("sa", "tabu"):
            raise ValueError(f"unknown solver kind {self.kind!r}")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.budget is not None and self.budget < 1:
            raise ValueError("budget must be >= 1")

    @property
    def name(self) -> str:
        return self.kind if self.label is None else self.label


@dataclass(frozen=True)
class BenchConfig:
    """Full description of one benchmark run.

    Results are a pure function of this object: it carries the instance
    distribution, the solver roster, the success quantile, and the seed.
    ``graph=None`` selects the smallest single-column Chimera strip (shore
    4) covering the largest size.
    """

    sizes: tuple[int, ...]
    instances_per_size: int = 50
    coefficient_set: tuple[float, ...] = DEFAULT_COEFF_SET
    solvers: tuple[SolverSpec, ...] = (SolverSpec("sa"), SolverSpec("tabu"))
    success_quantile: float = 0.99
    seed: int = 0
    graph: HardwareGraph | None = None

    def __post_init__(self) -> None:
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes:
            raise ValueError("sizes must be non-empty")
        if any(s < 1 for s in sizes):
            raise ValueError("sizes must be >= 1")
        if list(sizes) != sorted(set(sizes)):
            raise ValueError("sizes must be strictly ascending")
        if sizes[-1] > BRUTE_FORCE_LIMIT:
            raise ValueError(
                f"targets are certified by brute force; sizes are limited to {BRUTE_FORCE_LIMIT}"
            )
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(
            self, "coefficient_set", tuple(float(c) for c in self.coefficient_set)
        )
        solvers = tuple(self.solvers)
        if not solvers:
            raise ValueError("need at least one solver")
        names = [s.name for s in solvers]
        if len(set(names)) != len(names):
            raise ValueError("solver names must be distinct")
        object.__setattr__(self, "solvers", solvers)
        if self.instances_per_size < 1:
            raise ValueError("instances_per_size must be >= 1")
        if not 0.0 < self.success_quantile <= 1.0:
            raise ValueError("success_quantile must be in (0, 1]")
        if int(self.seed) < 0:
            raise ValueError("seed must be >= 0")
        object.__setattr__(self, "seed", int(self.seed))
        if self.graph is not None and sizes[-1] > self.graph.nodes:
            raise ValueError("largest size exceeds the graph's node count")

    def resolved_graph(self) -> HardwareGraph:
        if self.graph is not None:
            return self.graph
        cells = math.ceil(self.sizes[-1] / 8)
        return chimera_graph(cells, 1, 4)


# ---------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class BenchRow:
    """Summary of one (size, solver) cell of the benchmark table.

    ``median_effort`` and the 40th/60th percentile band are order statistics
    over the per-instance efforts, computed after dropping censored
    instances; when censored instances are half the batch or more the row
    itself is censored and the statistics are infinite.
    """

    size: int
    solver: str
    instances: int
    runs: int
    budget: int
    median_effort: float
    band_lo: float
    band_hi: float
    censored_instances: int
    censored: bool


_CSV_COLUMNS = (
    "size",
    "solver",
    "instances",
    "runs",
    "budget",
    "median_effort",
    "band_lo",
    "band_hi",
    "censored_instances",
    "censored",
)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


@dataclass(frozen=True, eq=False)
class BenchTable:
    """Benchmark results: deterministic rows plus secondary wall timings.

    ``wall_seconds`` is parallel to ``rows`` and deliberately excluded from
    the CSV/JSON emitters so that re-running the same configuration yields
    byte-identical files.
    """

    config: BenchConfig
    rows: tuple[BenchRow, ...]
    wall_seconds: tuple[float, ...]

    def to_csv(self) -> str:
        lines = [",".join(_CSV_COLUMNS)]
        for row in self.rows:
            lines.append(
                ",".join(_fmt(getattr(row, col)) for col in _CSV_COLUMNS)
            )
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload = {
            "sizes": list(self.config.sizes),
            "instances_per_size": self.config.instances_per_size,
            "coefficient_set": list(self.config.coefficient_set),
            "success_quantile": self.config.success_quantile,
            "seed": self.config.seed,
            "rows": [
                {col: _json_safe(getattr(row, col)) for col in _CSV_COLUMNS}
                for row in self.rows
            ],
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def to_gnuplot(self) -> dict[str, str]:
        """Two-column (size, median effort) text per solver."""
        out: dict[str, str] = {}
        for row in self.rows:
            line = f"{row.size} {_fmt(row.median_effort)}\n"
            out[row.solver] = out.get(row.solver, "") + line
        return out


def _order_stat(sorted_vals: np.ndarray, q: float) -> float:
    k = math.ceil(q * sorted_vals.size)
    return float(sorted_vals[max(k, 1) - 1])


def _summarize(efforts: np.ndarray) -> tuple[float, float, float, int, bool]:
    """(median, 40th, 60th, censored count, row censored) for one batch.

    Censored efforts are excluded from the statistics only while they are
    fewer than half the batch; at half or more the row is censored.
    """
    finite = np.isfinite(efforts)
    censored_count = int(efforts.size - np.sum(finite))
    if 2 * censored_count >= efforts.size:
        return math.inf, math.inf, math.inf, censored_count, True
    vals = np.sort(efforts[finite])
    return (
        _order_stat(vals, 0.5),
        _order_stat(vals, 0.4),
        _order_stat(vals, 0.6),
        censored_count,
        False,
    )


def _sub_seed(*parts: int) -> int:
    return int(np.random.default_rng(list(parts)).integers(2**63))


def bench_run(cfg: BenchConfig) -> BenchTable:
    """Run the full benchmark described by ``cfg``.

    Per (size, instance): generate a seeded random instance, certify its
    optimum by exact enumeration, and measure every solver's effort to reach
    that optimum at the configured success quantile. Rows aggregate the
    per-instance efforts per (size, solver) in configuration order.

    All randomness derives from ``(cfg.seed, size, instance index)``, so the
    aggregation is independent of execution order and instances could be
    evaluated concurrently; the emitted tables depend only on ``cfg``.
    """
    graph = cfg.resolved_graph()
    rows: list[BenchRow] = []
    walls: list[float] = []
    for N in cfg.sizes:
        efforts = np.empty((len(cfg.solvers), cfg.instances_per_size))
        budgets = [0] * len(cfg.solvers)
        wall = [0.0] * len(cfg.solvers)
        for inst in range(cfg.instances_per_size):
            m = random_instance(
                N,
                graph,
                cfg.coefficient_set,
                seed=[cfg.seed, _INSTANCE_STREAM, N, inst],
            )
            target = optimal_energy(m)
            for si, spec in enumerate(cfg.solvers):
                schedule = None
                max_iters = None
                if spec.kind == "sa":
                    schedule = SaSchedule(
                        beta_start=spec.beta_start,
                        beta_end=spec.beta_end,
                        sweeps=1000 if spec.budget is None else spec.budget,
                    )
                else:
                    max_iters = spec.budget
                t0 = time.perf_counter()
                stat = time_to_target(
                    m,
                    target_energy=target,
                    success_quantile=cfg.success_quantile,
                    runs=spec.runs,
                    solver=spec.kind,
                    schedule=schedule,
                    tenure=spec.tenure,
                    max_iters=max_iters,
                    seed=_sub_seed(cfg.seed, _SOLVER_STREAM, N, inst, si),
                )
                wall[si] += time.perf_counter() - t0
                efforts[si, inst] = stat.effort
                budgets[si] = stat.budget
        for si, spec in enumerate(cfg.solvers):
            median, lo, hi, censored_count, censored = _summarize(efforts[si])
            rows.append(
                BenchRow(
                    size=N,
                    solver=spec.name,
                    instances=cfg.instances_per_size,
                    runs=spec.runs,
                    budget=budgets[si],
                    median_effort=median,
                    band_lo=lo,
                    band_hi=hi,
                    censored_instances=censored_count,
                    censored=censored,
                )
            )
            walls.append(wall[si])
    return BenchTable(config=cfg, rows=tuple(rows), wall_seconds=tuple(walls))


# ---------------------------------------------------------------------------
# scaling fits


@dataclass(frozen=True)
class ScalingFit:
    """Exponential and linear least-squares fits of median effort vs size.

    The exponential form is ``exp_prefactor * exp(exp_rate * N)`` fitted by
    least squares on log(effort); the linear form is ``linear_intercept +
    linear_slope * N`` fitted on the raw efforts. Residuals are root mean
    square in the fitted space. Neither form is endorsed over the other.
    """

    solver: str
    exp_rate: float
    exp_prefactor: float
    exp_residual: float
    exp_excluded: int
    linear_intercept: float
    linear_slope: float
    linear_residual: float
    linear_excluded: int
    points: int


def _lstsq_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """(intercept, slope, rms residual) of the least-squares line."""
    A = np.stack([np.ones_like(x), x], axis=1)
    coef, _, _, _ = np.linalg.lstsq(A, y, rcond=None)
    rms = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return float(coef[0]), float(coef[1]), rms


def scaling_fit(table) -> dict[str, ScalingFit]:
    """Per-solver scaling fits of median effort against size.

    Accepts a ``BenchTable`` or any iterable of ``BenchRow``. Each solver
    needs at least 3 sizes. Censored medians are excluded from both fits;
    non-positive medians are additionally excluded from the log fit (a pure
    exponential cannot produce them). Exclusion counts are reported; when
    fewer than two points survive, the affected fit is NaN.
    """
    rows = getattr(table, "rows", table)
    per: dict[str, list[tuple[int, float]]] = {}
    for row in rows:
        per.setdefault(row.solver, []).append((row.size, row.median_effort))
    if not per:
        raise ValueError("empty table")
    out: dict[str, ScalingFit] = {}
    for solver, pts in per.items():
        sizes = np.array([p[0] for p in pts], dtype=np.float64)
        efforts = np.array([p[1] for p in pts], dtype=np.float64)
        if np.unique(sizes).size < 3:
            raise ValueError("scaling_fit needs at least 3 sizes per solver")
        finite = np.isfinite(efforts)
        linear_excluded = int(efforts.size - np.sum(finite))
        if np.sum(finite) >= 2:
            b, c, lin_rms = _lstsq_line(sizes[finite], efforts[finite])
        else:
            b = c = lin_rms = math.nan
        positive = finite & (efforts > 0.0)
        exp_excluded = int(efforts.size - np.sum(positive))
        if np.sum(positive) >= 2:
            alpha, a, exp_rms = _lstsq_line(
                sizes[positive], np.log(efforts[positive])
            )
            prefactor = math.exp(alpha)
        else:
            a = prefactor = exp_rms = math.nan
        out[solver] = ScalingFit(
            solver=solver,
            exp_rate=a,
            exp_prefactor=prefactor,
            exp_residual=exp_rms,
            exp_excluded=exp_excluded,
            linear_intercept=b,
            linear_slope=c,
            linear_residual=lin_rms,
            linear_excluded=linear_excluded,
            points=int(efforts.size),
        )
    return out
