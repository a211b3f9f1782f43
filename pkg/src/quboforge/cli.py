"""Command-line interface: compile, solve, simulate, and benchmark from files.

Subcommands
    convert   rewrite a model JSON between bit (qubo) and spin (ising) forms
    energy    evaluate a model at an assignment
    graph     emit a hardware graph as JSON
    solve     run brute force / SA / tabu on a model JSON
    qa        instantaneous spectrum or full annealing evolution of a model
    ml        compile learning problems (qboost|qcut|qims|match|struct-train)
    plan      compile (and optionally solve) a STRIPS planning task
    fault     compile (and optionally solve) a fault tree
    uav       compile (and optionally solve) a turn-constrained tour
    sat       compile (and optionally solve) a 3-SAT DIMACS file
    blackbox  minimize an external oracle over a hardware graph
    bench     run the random-instance benchmark
    fit       scaling fits of an emitted benchmark table

Conventions: ``--seed`` is accepted everywhere (ignored by deterministic
commands); model files use the JSON format of ``model_to_dict``; compiled
models go to ``--out`` or stdout. Exit codes: 0 success, 2 validation error
(bad flags, malformed files, out-of-range parameters), 3 solver or
integration failure (oracle crashes, norm-drift aborts, no decodable
solution).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import shlex
import subprocess
import sys

import numpy as np

from .bench import BenchConfig, BenchRow, SolverSpec, bench_run, scaling_fit
from .dubins import dubins_matrix, targets_from_csv
from .faulttree import (
    cut_weight,
    faulttree_compile,
    faulttree_decode,
    faulttree_from_dict,
)
from .graphs import HardwareGraph, chimera_graph
from .learning import (
    PointSet,
    StructuredModel,
    WeakClassifierMatrix,
    imagematch_compile,
    qboost_compile,
    qcut_compile,
    qims_batch,
    qims_compile,
    reference_conflict,
    structured_train,
)
from .models import (
    Assignment,
    IsingModel,
    QuboModel,
    config_from_index,
    energy,
    ising_to_qubo,
    model_from_json,
    model_to_dict,
    qubo_to_ising,
)
from .planning import (
    plan_compile,
    plan_decode_validate,
    planning_problem_from_dict,
    simulate_plan,
)
from .prob import blackbox_minimize
from .qa import ControlHamiltonian, evolve, spectrum_scan
from .sat import clauses_from_dimacs, count_violated, sat3_compile
from .solvers import (
    BRUTE_FORCE_LIMIT,
    SaSchedule,
    brute_force,
    simulated_annealing,
    tabu_search,
)
from .uav import tour_decode, tour_length, uav_tsp_compile

# ---------------------------------------------------------------------------
# small shared helpers


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _json_ready(value):
    """Recursively make a value JSON-serializable; non-finite floats -> None."""
    if isinstance(value, dict):
        return {str(k): _json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_json_ready(v) for v in value.tolist()]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def _dump_json(obj) -> str:
    return json.dumps(_json_ready(obj), indent=2, sort_keys=True) + "\n"


def _emit_model(m: QuboModel | IsingModel, path: str | None) -> None:
    _emit(_dump_json(model_to_dict(m)), path)


def _read_csv_matrix(path: str) -> np.ndarray:
    """Numeric CSV rows as a float matrix; a non-numeric first row is a header."""
    rows: list[list[float]] = []
    for lineno, rec in enumerate(csv.reader(io.StringIO(_read_text(path)))):
        rec = [cell.strip() for cell in rec if cell.strip() != ""]
        if not rec:
            continue
        try:
            rows.append([float(cell) for cell in rec])
        except ValueError:
            if lineno == 0:
                continue
            raise ValueError(f"non-numeric data row in {path!r}: {rec}") from None
    if not rows:
        raise ValueError(f"no data rows found in {path!r}")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError("rows must all have the same number of columns")
    return np.array(rows, dtype=np.float64)


def _parse_graph_spec(spec: str) -> HardwareGraph:
    """Parse 'chimera:RxCxS' (shore optional, default 4)."""
    family, _, dims = spec.partition(":")
    if family != "chimera" or not dims:
        raise ValueError(f"graph spec must look like chimera:2x2x4, got {spec!r}")
    parts = dims.lower().split("x")
    if len(parts) not in (2, 3):
        raise ValueError(f"graph spec must look like chimera:2x2x4, got {spec!r}")
    try:
        nums = [int(p) for p in parts]
    except ValueError:
        raise ValueError(f"graph spec must look like chimera:2x2x4, got {spec!r}") from None
    rows, cols = nums[0], nums[1]
    shore = nums[2] if len(nums) == 3 else 4
    return chimera_graph(rows, cols, shore)


def _parse_assignment(text: str, form: str, n: int) -> Assignment:
    vals = [int(v) for v in text.replace(",", " ").split()]
    if len(vals) != n:
        raise ValueError(f"assignment has {len(vals)} values, model has {n}")
    return Assignment.bits(vals) if form == "qubo" else Assignment.spins(vals)


def _load_model(path: str) -> QuboModel | IsingModel:
    return model_from_json(_read_text(path))


def _solve_model(m, method: str, seed: int, runs: int, budget: int | None):
    """Dispatch to brute force / SA / tabu; 'auto' picks by model size."""
    n = m.num_vars if isinstance(m, QuboModel) else m.num_spins
    if method == "auto":
        method = "bf" if n <= 20 else "tabu"
    if method == "bf":
        if n > BRUTE_FORCE_LIMIT:
            raise ValueError(
                f"brute force is limited to {BRUTE_FORCE_LIMIT} variables; "
                f"the model has {n}"
            )
        return brute_force(m)
    if method == "sa":
        schedule = SaSchedule() if budget is None else SaSchedule(sweeps=budget)
        return simulated_annealing(m, schedule=schedule, seed=seed, runs=runs)
    if method == "tabu":
        return tabu_search(m, max_iters=budget, seed=seed, runs=runs)
    raise ValueError(f"unknown method {method!r}")


def _result_record(res) -> dict:
    return {
        "best_assignment": res.best_assignment.values.tolist(),
        "best_energy": res.best_energy,
        "sweeps_used": res.sweeps_used,
        "seed": res.seed,
        "elapsed": res.elapsed,
        "num_optima": res.num_optima,
        "samples": None
        if res.samples is None
        else [[a.values.tolist(), e] for a, e in res.samples],
    }


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_convert(args) -> None:
    m = _load_model(args.model)
    target = args.to
    if target is None:
        target = "ising" if isinstance(m, QuboModel) else "qubo"
    if target == "ising" and isinstance(m, QuboModel):
        m = qubo_to_ising(m)
    elif target == "qubo" and isinstance(m, IsingModel):
        m = ising_to_qubo(m)
    _emit_model(m, args.out)


def _cmd_energy(args) -> None:
    m = _load_model(args.model)
    form = "qubo" if isinstance(m, QuboModel) else "ising"
    n = m.num_vars if isinstance(m, QuboModel) else m.num_spins
    if (args.assign is None) == (args.index is None):
        raise ValueError("pass exactly one of --assign or --index")
    if args.assign is not None:
        a = _parse_assignment(args.assign, form, n)
    else:
        a = config_from_index(args.index, n, form="bit" if form == "qubo" else "spin")
    print(f"{energy(m, a):.12g}")


def _cmd_graph(args) -> None:
    if args.family != "chimera":
        raise ValueError(f"unknown graph family {args.family!r}")
    g = chimera_graph(args.rows, args.cols, args.shore)
    payload = {
        "family": "chimera",
        "rows": g.rows,
        "cols": g.cols,
        "shore": g.shore,
        "nodes": g.nodes,
        "edges": [list(e) for e in g.edge_list()],
    }
    _emit(_dump_json(payload), args.out)


def _cmd_solve(args) -> None:
    m = _load_model(args.model)
    res = _solve_model(m, args.method, args.seed, args.runs, args.budget)
    if args.json:
        _emit(_dump_json(_result_record(res)), args.out)
    else:
        vals = ",".join(str(int(v)) for v in res.best_assignment.values)
        extra = "" if res.num_optima is None else f", optima {res.num_optima}"
        _emit(
            f"energy {res.best_energy:.12g} at [{vals}] "
            f"(effort {res.sweeps_used}{extra})",
            args.out,
        )


def _qa_hamiltonian(args) -> ControlHamiltonian:
    m = _load_model(args.model)
    if isinstance(m, QuboModel):
        m = qubo_to_ising(m)
    return ControlHamiltonian(problem=m, delta=args.delta, T=args.T)


def _cmd_qa(args) -> None:
    ch = _qa_hamiltonian(args)
    if args.mode == "spectrum":
        scan = spectrum_scan(ch, grid=args.grid, k=args.k)
        n_ev = scan.points[0].eigenvalues.shape[0]
        header = ["s"] + [f"lambda{i}" for i in range(n_ev)] + ["gap", "tau", "V"]
        lines = [",".join(header)]
        for p in scan.points:
            cells = [f"{p.s:.12g}"]
            cells += [f"{ev:.12g}" for ev in p.eigenvalues]
            cells += [f"{p.gap:.12g}", f"{p.tau:.12g}", f"{p.V:.12g}"]
            lines.append(",".join(cells))
        _emit("\n".join(lines) + "\n", args.csv)
        if args.csv is not None:
            print(
                f"g_min {scan.g_min:.6g} at s={scan.s_min:.6g}; "
                f"tau_max {scan.tau_max:.6g} at s={scan.s_tau:.6g}"
            )
    else:
        res = evolve(ch, n_records=args.grid)
        lines = ["t,norm,mean_E,var_E,success"]
        for i in range(res.times.shape[0]):
            lines.append(
                f"{res.times[i]:.12g},{res.norms[i]:.12g},"
                f"{res.mean_energy[i]:.12g},{res.var_energy[i]:.12g},"
                f"{res.success[i]:.12g}"
            )
        _emit("\n".join(lines) + "\n", args.csv)
        if args.csv is not None:
            print(
                f"success {res.success_probability:.6g} "
                f"(ground energy {res.ground_energy:.6g}, "
                f"{res.n_steps} steps, norm drift {res.norm_drift:.3g})"
            )


def _label_graph(num_labels: int, pairs: str | None):
    terms = [(i, i) for i in range(num_labels)]
    if pairs is None:
        terms += [
            (i, j) for i in range(num_labels) for j in range(i + 1, num_labels)
        ]
        return tuple(terms)
    for part in pairs.split(","):
        part = part.strip()
        if not part:
            continue
        i, _, j = part.partition("-")
        terms.append((int(i), int(j)))
    return tuple(terms)


def _cmd_ml(args) -> None:
    data = _read_csv_matrix(args.data)
    if args.problem == "qboost":
        if data.shape[1] < 2:
            raise ValueError("qboost needs vote columns plus a trailing label")
        W = WeakClassifierMatrix.from_signs(data[:, :-1], data[:, -1])
        _emit_model(qboost_compile(W, args.lam), args.out)
    elif args.problem == "qcut":
        _emit_model(
            qcut_compile(PointSet(data), K=args.k, A=args.penalty), args.out
        )
    elif args.problem == "qims":
        if args.capacity is not None:
            res = qims_batch(data, args.capacity, args.epsilon, args.mu, args.lam)
            if res.failed:
                raise RuntimeError(f"batch solve failed: {res.error}")
            _emit(
                _dump_json(
                    {
                        "center_indices": list(res.center_indices),
                        "centers": res.centers,
                        "batches_completed": res.batches_completed,
                        "solves": res.solves,
                    }
                ),
                args.out,
            )
        else:
            _emit_model(
                qims_compile(PointSet(data), args.epsilon, args.mu, args.lam),
                args.out,
            )
    elif args.problem == "match":
        if data.shape[1] % 2 != 0:
            raise ValueError(
                "match rows must hold two equal-length feature points"
            )
        half = data.shape[1] // 2
        pairs = [(row[:half], row[half:]) for row in data]
        _emit_model(
            imagematch_compile(
                pairs, lambda a, b: reference_conflict(a, b, tol=args.tol)
            ),
            args.out,
        )
    else:
        labels = args.labels
        if labels is None or labels < 1:
            raise ValueError("struct-train needs --labels >= 1")
        if data.shape[1] <= labels:
            raise ValueError("rows must hold features plus trailing label bits")
        feats = data[:, :-labels]
        zs = data[:, -labels:]
        if not np.all((zs == 0.0) | (zs == 1.0)):
            raise ValueError("label columns must be 0/1 bits")
        template = StructuredModel(
            num_labels=labels,
            label_graph=_label_graph(labels, args.pairs),
            feature_dim=feats.shape[1] + 1,
        )
        pairs_data = [(feats[i], zs[i].astype(np.int8)) for i in range(len(zs))]
        res = structured_train(
            template, pairs_data, lam=args.lam, steps=args.steps
        )
        _emit(
            _dump_json(
                {
                    "objective": res.objective,
                    "skipped": res.skipped,
                    "label_graph": [list(t) for t in res.model.label_graph],
                    "w": res.model.w,
                }
            ),
            args.out,
        )


def _cmd_plan(args) -> None:
    problem = planning_problem_from_dict(json.loads(_read_text(args.problem)))
    reduce = not args.no_reduce
    q = plan_compile(problem, args.horizon, epsilon=args.epsilon, reduce=reduce)
    if not args.solve:
        _emit_model(q, args.out)
        return
    res = _solve_model(q, args.method, args.seed, args.runs, args.budget)
    report = plan_decode_validate(
        problem, args.horizon, res.best_assignment, reduce=reduce
    )
    sim = simulate_plan(problem, report.plan)
    payload = {
        "valid": report.valid,
        "energy": res.best_energy,
        "hard_energy": report.hard_energy,
        "plan": [
            [problem.operators[j].name for j in step] for step in report.plan
        ],
        "violations": [
            {"kind": v.kind, "t": v.t, "i": v.i, "j": v.j, "k": v.k}
            for v in report.violations
        ],
        "executable": sim.ok,
        "goal_met": sim.goal_met,
    }
    _emit(_dump_json(payload), args.out)


def _cmd_fault(args) -> None:
    tree = faulttree_from_dict(json.loads(_read_text(args.tree)))
    q = faulttree_compile(tree, A=args.a, B=args.b)
    if not args.solve:
        _emit_model(q, args.out)
        return
    res = _solve_model(q, args.method, args.seed, args.runs, args.budget)
    cut = faulttree_decode(tree, res.best_assignment)
    payload = {
        "cut": sorted(cut),
        "weight": cut_weight(tree, cut),
        "energy": res.best_energy,
    }
    _emit(_dump_json(payload), args.out)


def _cmd_uav(args) -> None:
    targets = targets_from_csv(_read_text(args.targets))
    im, q = uav_tsp_compile(targets, W1=args.w1, W2=args.w2)
    if not args.solve:
        _emit_model(q if args.form == "qubo" else im, args.out)
        return
    res = _solve_model(q, args.method, args.seed, args.runs, args.budget)
    tour = tour_decode(res.best_assignment, len(targets))
    if tour is None:
        raise RuntimeError(
            "solver did not reach a valid tour (one-hot constraints violated); "
            "raise the penalty weights or the budget"
        )
    d = dubins_matrix(targets)
    payload = {
        "tour": list(tour),
        "length": tour_length(d, tour),
        "energy": res.best_energy,
    }
    _emit(_dump_json(payload), args.out)


def _cmd_sat(args) -> None:
    clauses, n = clauses_from_dimacs(_read_text(args.cnf))
    q = sat3_compile(clauses, n)
    if not args.solve:
        _emit_model(q, args.out)
        return
    res = _solve_model(q, args.method, args.seed, args.runs, args.budget)
    bits = res.best_assignment.values[:n].tolist()
    payload = {
        "assignment": bits,
        "violated": count_violated(clauses, bits),
        "clauses": len(clauses),
        "energy": res.best_energy,
    }
    _emit(_dump_json(payload), args.out)


class _SubprocessOracle:
    """Line-delimited oracle child: one line of spins in, one float out."""

    def __init__(self, command: str):
        self.proc = subprocess.Popen(
            shlex.split(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )

    def __call__(self, spins) -> float:
        line = " ".join(str(int(s)) for s in np.asarray(spins).ravel())
        assert self.proc.stdin is not None and self.proc.stdout is not None
        self.proc.stdin.write(line + "\n")
        self.proc.stdin.flush()
        reply = self.proc.stdout.readline()
        if not reply:
            raise RuntimeError("oracle process closed its output stream")
        return float(reply)

    def close(self) -> None:
        if self.proc.poll() is None:
            if self.proc.stdin is not None:
                self.proc.stdin.close()
            self.proc.terminate()
            try:
                self.proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.proc.kill()


def _cmd_blackbox(args) -> None:
    graph = _parse_graph_spec(args.graph)
    oracle = _SubprocessOracle(args.oracle)
    try:
        res = blackbox_minimize(
            oracle,
            graph,
            pop_size=args.pop,
            iters=args.iters,
            seed=args.seed,
        )
    finally:
        oracle.close()
    payload = {
        "best": res.best_assignment.values.tolist(),
        "value": res.best_value,
        "iterations": res.iterations,
        "evaluations": res.evaluations,
        "history": res.history,
    }
    _emit(_dump_json(payload), args.out)


def _bench_config(args) -> BenchConfig:
    data: dict = {}
    if args.config is not None:
        data = json.loads(_read_text(args.config))
        if not isinstance(data, dict):
            raise ValueError("bench config must be a JSON object")
    kwargs: dict = {}
    sizes = data.get("sizes")
    if args.sizes is not None:
        sizes = [int(s) for s in args.sizes.split(",")]
    if sizes is None:
        raise ValueError("sizes are required (config file or --sizes)")
    kwargs["sizes"] = tuple(sizes)
    for key, flag in (
        ("instances_per_size", args.instances),
        ("success_quantile", args.quantile),
    ):
        if flag is not None:
            kwargs[key] = flag
        elif key in data:
            kwargs[key] = data[key]
    kwargs["seed"] = args.seed if args.seed is not None else data.get("seed", 0)
    if "coefficient_set" in data:
        kwargs["coefficient_set"] = tuple(data["coefficient_set"])
    if "solvers" in data:
        kwargs["solvers"] = tuple(SolverSpec(**s) for s in data["solvers"])
    graph_spec = data.get("graph")
    if args.graph is not None:
        graph_spec = args.graph
    if graph_spec is not None:
        kwargs["graph"] = _parse_graph_spec(graph_spec)
    return BenchConfig(**kwargs)


def _cmd_bench(args) -> None:
    table = bench_run(_bench_config(args))
    _emit(table.to_csv(), args.csv)
    if args.json_out is not None:
        _emit(table.to_json(), args.json_out)
    if args.gnuplot is not None:
        for solver, text in table.to_gnuplot().items():
            _emit(text, f"{args.gnuplot}-{solver}.dat")


def _rows_from_table_json(text: str) -> list[BenchRow]:
    data = json.loads(text)
    rows = []
    for rec in data["rows"]:
        rec = dict(rec)
        for key in ("median_effort", "band_lo", "band_hi"):
            if rec.get(key) is None:
                rec[key] = math.inf
        rows.append(BenchRow(**rec))
    return rows


def _cmd_fit(args) -> None:
    rows = _rows_from_table_json(_read_text(args.table))
    fits = scaling_fit(rows)
    if args.json:
        payload = {
            name: {
                "exp_rate": f.exp_rate,
                "exp_prefactor": f.exp_prefactor,
                "exp_residual": f.exp_residual,
                "exp_excluded": f.exp_excluded,
                "linear_intercept": f.linear_intercept,
                "linear_slope": f.linear_slope,
                "linear_residual": f.linear_residual,
                "linear_excluded": f.linear_excluded,
                "points": f.points,
            }
            for name, f in fits.items()
        }
        _emit(_dump_json(payload), args.out)
        return
    lines = []
    for name in sorted(fits):
        f = fits[name]
        lines.append(
            f"{name}: effort ~ {f.exp_prefactor:.6g} * exp({f.exp_rate:.6g} N)"
            f"  (rms {f.exp_residual:.3g}, excluded {f.exp_excluded})"
        )
        lines.append(
            f"{' ' * len(name)}  effort ~ {f.linear_intercept:.6g} + "
            f"{f.linear_slope:.6g} N  (rms {f.linear_residual:.3g}, "
            f"excluded {f.linear_excluded})"
        )
    _emit("\n".join(lines) + "\n", args.out)


# ---------------------------------------------------------------------------
# parser


def _add_solve_flags(sub) -> None:
    sub.add_argument(
        "--solve", action="store_true", help="solve and decode instead of emitting the model"
    )
    sub.add_argument(
        "--method",
        choices=("auto", "bf", "sa", "tabu"),
        default="auto",
        help="solver; auto = brute force up to 20 variables, else tabu",
    )
    sub.add_argument("--runs", type=int, default=8, help="heuristic restarts")
    sub.add_argument(
        "--budget", type=int, default=None, help="sweeps (sa) or iterations (tabu)"
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed")
    common.add_argument("--out", default=None, help="output path (default stdout)")

    parser = argparse.ArgumentParser(
        prog="forge",
        description="Compile combinatorial problems to QUBO/Ising and solve them.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("convert", parents=[common], help="rewrite qubo <-> ising")
    p.add_argument("--model", required=True, help="model JSON path")
    p.add_argument("--to", choices=("qubo", "ising"), default=None)
    p.set_defaults(func=_cmd_convert)

    p = subs.add_parser("energy", parents=[common], help="evaluate a model")
    p.add_argument("--model", required=True)
    p.add_argument("--assign", default=None, help="comma/space separated values")
    p.add_argument("--index", type=int, default=None, help="big-endian config index")
    p.set_defaults(func=_cmd_energy)

    p = subs.add_parser("graph", parents=[common], help="emit a hardware graph")
    p.add_argument("family", choices=("chimera",))
    p.add_argument("rows", type=int)
    p.add_argument("cols", type=int)
    p.add_argument("shore", type=int, nargs="?", default=4)
    p.set_defaults(func=_cmd_graph)

    p = subs.add_parser("solve", parents=[common], help="solve a model JSON")
    p.add_argument("--model", required=True)
    p.add_argument("--method", choices=("auto", "bf", "sa", "tabu"), default="auto")
    p.add_argument("--runs", type=int, default=8)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--json", action="store_true", help="emit a JSON record")
    p.set_defaults(func=_cmd_solve)

    p = subs.add_parser("qa", parents=[common], help="quantum annealing simulation")
    p.add_argument("mode", choices=("spectrum", "evolve"))
    p.add_argument("--model", required=True)
    p.add_argument("--delta", type=float, default=1.0, help="driver strength")
    p.add_argument("--T", type=float, default=1.0, help="anneal duration")
    p.add_argument("--grid", type=int, default=201, help="grid / record count")
    p.add_argument("--k", type=int, default=8, help="eigenvalues per point (spectrum)")
    p.add_argument("--csv", default=None, help="CSV output path (default stdout)")
    p.set_defaults(func=_cmd_qa)

    p = subs.add_parser("ml", parents=[common], help="compile learning problems")
    p.add_argument("problem", choices=("qboost", "qcut", "qims", "match", "struct-train"))
    p.add_argument("--data", required=True, help="CSV: one row per sample")
    p.add_argument("--lam", type=float, default=0.1, help="regularization weight")
    p.add_argument("--k", type=int, default=2, help="clusters (qcut)")
    p.add_argument("--penalty", type=float, default=None, help="one-hot weight (qcut)")
    p.add_argument("--epsilon", type=float, default=1.0, help="box half-side (qims)")
    p.add_argument("--mu", type=float, default=1.0, help="coverage reward (qims)")
    p.add_argument("--capacity", type=int, default=None, help="batch capacity (qims)")
    p.add_argument("--tol", type=float, default=0.1, help="conflict tolerance (match)")
    p.add_argument("--labels", type=int, default=None, help="trailing label bits (struct-train)")
    p.add_argument("--pairs", default=None, help="label pairs i-j, comma separated (struct-train)")
    p.add_argument("--steps", type=int, default=100, help="training iterations (struct-train)")
    p.set_defaults(func=_cmd_ml)

    p = subs.add_parser("plan", parents=[common], help="compile a STRIPS task")
    p.add_argument("--problem", required=True, help="planning problem JSON")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=None, help="persistence bias")
    p.add_argument("--no-reduce", action="store_true", help="skip constant propagation")
    _add_solve_flags(p)
    p.set_defaults(func=_cmd_plan)

    p = subs.add_parser("fault", parents=[common], help="compile a fault tree")
    p.add_argument("--tree", required=True, help="fault tree JSON")
    p.add_argument("--a", type=float, default=None, help="gate penalty weight")
    p.add_argument("--b", type=float, default=None, help="top event weight")
    _add_solve_flags(p)
    p.set_defaults(func=_cmd_fault)

    p = subs.add_parser("uav", parents=[common], help="compile a shortest tour")
    p.add_argument("--targets", required=True, help="CSV of x,y,theta,r rows")
    p.add_argument("--w1", type=float, default=None, help="row one-hot weight")
    p.add_argument("--w2", type=float, default=None, help="column one-hot weight")
    p.add_argument("--form", choices=("ising", "qubo"), default="ising")
    _add_solve_flags(p)
    p.set_defaults(func=_cmd_uav)

    p = subs.add_parser("sat", parents=[common], help="compile a 3-SAT instance")
    p.add_argument("--cnf", required=True, help="DIMACS CNF path")
    _add_solve_flags(p)
    p.set_defaults(func=_cmd_sat)

    p = subs.add_parser("blackbox", parents=[common], help="minimize an external oracle")
    p.add_argument("--oracle", required=True, help="oracle command line")
    p.add_argument("--graph", required=True, help="surrogate graph, e.g. chimera:2x2x4")
    p.add_argument("--pop", type=int, default=32, help="population size")
    p.add_argument("--iters", type=int, default=50, help="loop iterations")
    p.set_defaults(func=_cmd_blackbox)

    p = subs.add_parser("bench", parents=[common], help="run the benchmark")
    p.add_argument("--config", default=None, help="BenchConfig JSON path")
    p.add_argument("--sizes", default=None, help="comma separated sizes")
    p.add_argument("--instances", type=int, default=None)
    p.add_argument("--quantile", type=float, default=None)
    p.add_argument("--graph", default=None, help="e.g. chimera:3x1x4")
    p.add_argument("--csv", default=None, help="CSV path (default stdout)")
    p.add_argument("--json-out", default=None, help="JSON table path")
    p.add_argument("--gnuplot", default=None, help="two-column file prefix")
    p.set_defaults(func=_cmd_bench)

    p = subs.add_parser("fit", parents=[common], help="scaling fits of a bench table")
    p.add_argument("--table", required=True, help="bench JSON path")
    p.add_argument("--json", action="store_true", help="emit a JSON record")
    p.set_defaults(func=_cmd_fit)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", None) is None and args.command != "bench":
        args.seed = 0
    try:
        args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
