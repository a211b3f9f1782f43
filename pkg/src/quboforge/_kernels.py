"""Hot numerical kernels with twin implementations.

Every kernel here exists twice: a numba ``@njit`` version and a pure-numpy
version with identical signatures and bit-identical results. The active set
is chosen at import time: numba is used when it imports cleanly and the
environment variable ``QUBOFORGE_NO_NUMBA`` is unset/empty; otherwise the
numpy path runs. ``benchmarks/kernel_benchmark.py`` times both.

Bit-identity across the two paths is engineered, not hoped for:

* all randomness (initial spins, proposal uniforms, scan orders) is
  pregenerated with numpy outside the kernels and passed in as arrays;
* acceptance tests compare precomputed log-uniforms against ``-beta * dE``
  (and Gibbs compares ``2*beta*f`` against precomputed logit-uniforms), so
  no ``exp``/``log`` is evaluated inside a kernel;
* every floating-point accumulation (local fields, energy deltas, canonical
  energies) happens in the same order in both paths, and all products are
  coefficients times 0/+-1, which are exact in IEEE arithmetic.

Kernels track the incumbent by *canonical* energy: whenever the incremental
energy signals an improvement, the configuration's energy is recomputed in
the canonical term order (offset, fields ascending, couplings ascending) and
the incremental accumulator is resynced to it, so reported energies are
exactly comparable with brute-force enumeration.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


USE_NUMBA = HAS_NUMBA and not os.environ.get("QUBOFORGE_NO_NUMBA")


# ---------------------------------------------------------------------------
# canonical energy helpers


@njit(cache=True)
def _canon_energy_nb(s, offset, h, jq_i, jq_j, jq_v):
    e = offset
    for i in range(h.shape[0]):
        e = e + (-h[i]) * s[i]
    for t in range(jq_v.shape[0]):
        e = e + jq_v[t] * (s[jq_i[t]] * s[jq_j[t]])
    return e


def _canon_energy_rows_np(S, offset, h, jq_i, jq_j, jq_v):
    e = np.full(S.shape[0], offset)
    for i in range(h.shape[0]):
        e += (-h[i]) * S[:, i]
    for t in range(jq_v.shape[0]):
        e += jq_v[t] * (S[:, jq_i[t]] * S[:, jq_j[t]])
    return e


# ---------------------------------------------------------------------------
# simulated annealing


@njit(cache=True)
def _sa_batch_nb(
    h, adj_ptr, adj_idx, adj_val, jq_i, jq_j, jq_v, offset,
    spins0, betas, logu, n_sweeps, order, target,
):
    runs, n = spins0.shape
    best_spins = np.empty((runs, n))
    best_e = np.empty(runs)
    first_hit = np.full(runs, -1, dtype=np.int64)
    n_order = order.shape[0]

    for r in range(runs):
        s = spins0[r].copy()
        f = np.empty(n)
        for i in range(n):
            fi = -h[i]
            for t in range(adj_ptr[i], adj_ptr[i + 1]):
                fi = fi + adj_val[t] * s[adj_idx[t]]
            f[i] = fi
        e_cur = _canon_energy_nb(s, offset, h, jq_i, jq_j, jq_v)
        e_best = e_cur
        b_spins = s.copy()
        if e_best <= target:
            first_hit[r] = 0

        for t in range(n_sweeps):
            beta = betas[t]
            row = order[t % n_order]
            for pos in range(n):
                i = row[pos]
                de = -2.0 * s[i] * f[i]
                if de <= 0.0 or logu[r, t, pos] < -(beta * de):
                    s[i] = -s[i]
                    for a in range(adj_ptr[i], adj_ptr[i + 1]):
                        f[adj_idx[a]] = f[adj_idx[a]] + adj_val[a] * (2.0 * s[i])
                    e_cur = e_cur + de
                    if e_cur < e_best:
                        canon = _canon_energy_nb(s, offset, h, jq_i, jq_j, jq_v)
                        e_cur = canon
                        if canon < e_best:
                            e_best = canon
                            b_spins = s.copy()
                            if first_hit[r] < 0 and canon <= target:
                                first_hit[r] = t + 1
        best_spins[r] = b_spins
        best_e[r] = e_best
    return best_spins, best_e, first_hit


def _sa_batch_np(
    h, adj_ptr, adj_idx, adj_val, jq_i, jq_j, jq_v, offset,
    spins0, betas, logu, n_sweeps, order, target,
):
    runs, n = spins0.shape
    S = spins0.copy()
    F = np.empty((runs, n))
    for i in range(n):
        col = np.full(runs, -h[i])
        for t in range(adj_ptr[i], adj_ptr[i + 1]):
            col += adj_val[t] * S[:, adj_idx[t]]
        F[:, i] = col
    e_cur = _canon_energy_rows_np(S, offset, h, jq_i, jq_j, jq_v)
    e_best = e_cur.copy()
    best_spins = S.copy()
    first_hit = np.where(e_best <= target, 0, -1).astype(np.int64)
    n_order = order.shape[0]

    for t in range(n_sweeps):
        beta = betas[t]
        row = order[t % n_order]
        for pos in range(n):
            i = row[pos]
            de = -2.0 * S[:, i] * F[:, i]
            acc = (de <= 0.0) | (logu[:, t, pos] < -(beta * de))
            rows = np.nonzero(acc)[0]
            if rows.size == 0:
                continue
            S[rows, i] = -S[rows, i]
            for a in range(adj_ptr[i], adj_ptr[i + 1]):
                j = adj_idx[a]
                F[rows, j] = F[rows, j] + adj_val[a] * (2.0 * S[rows, i])
            e_cur[rows] = e_cur[rows] + de[rows]
            imp = rows[e_cur[rows] < e_best[rows]]
            if imp.size:
                canon = _canon_energy_rows_np(S[imp], offset, h, jq_i, jq_j, jq_v)
                e_cur[imp] = canon
                upd = imp[canon < e_best[imp]]
                if upd.size:
                    cu = canon[canon < e_best[imp]]
                    e_best[upd] = cu
                    best_spins[upd] = S[upd]
                    hit = upd[(first_hit[upd] < 0) & (cu <= target)]
                    first_hit[hit] = t + 1
    return best_spins, e_best, first_hit


# ---------------------------------------------------------------------------
# tabu search


@njit(cache=True)
def _tabu_batch_nb(
    h, adj_ptr, adj_idx, adj_val, jq_i, jq_j, jq_v, offset,
    spins0, tenure, max_iters, target,
):
    runs, n = spins0.shape
    best_spins = np.empty((runs, n))
    best_e = np.empty(runs)
    first_hit = np.full(runs, -1, dtype=np.int64)

    for r in range(runs):
        s = spins0[r].copy()
        f = np.empty(n)
        for i in range(n):
            fi = -h[i]
            for t in range(adj_ptr[i], adj_ptr[i + 1]):
                fi = fi + adj_val[t] * s[adj_idx[t]]
            f[i] = fi
        e_cur = _canon_energy_nb(s, offset, h, jq_i, jq_j, jq_v)
        e_best = e_cur
        b_spins = s.copy()
        if e_best <= target:
            first_hit[r] = 0
        tabu_until = np.zeros(n, dtype=np.int64)

        for it in range(1, max_iters + 1):
            best_de = np.inf
            choice = -1
            for i in range(n):
                de = -2.0 * s[i] * f[i]
                if tabu_until[i] < it or (e_cur + de) < e_best:
                    if de < best_de:
                        best_de = de
                        choice = i
            if choice < 0:
                # Everything tabu, nothing aspirates: flip the move whose
                # tabu expires soonest (ties to the lowest index).
                soonest = tabu_until[0]
                choice = 0
                for i in range(1, n):
                    if tabu_until[i] < soonest:
                        soonest = tabu_until[i]
                        choice = i
                best_de = -2.0 * s[choice] * f[choice]
            s[choice] = -s[choice]
            for a in range(adj_ptr[choice], adj_ptr[choice + 1]):
                f[adj_idx[a]] = f[adj_idx[a]] + adj_val[a] * (2.0 * s[choice])
            e_cur = e_cur + best_de
            tabu_until[choice] = it + tenure
            if e_cur < e_best:
                canon = _canon_energy_nb(s, offset, h, jq_i, jq_j, jq_v)
                e_cur = canon
                if canon < e_best:
                    e_best = canon
                    b_spins = s.copy()
                    if first_hit[r] < 0 and canon <= target:
                        first_hit[r] = it
        best_spins[r] = b_spins
        best_e[r] = e_best
    return best_spins, best_e, first_hit


def _tabu_batch_np(
    h, adj_ptr, adj_idx, adj_val, jq_i, jq_j, jq_v, offset,
    spins0, tenure, max_iters, target,
):
    runs, n = spins0.shape
    S = spins0.copy()
    F = np.empty((runs, n))
    for i in range(n):
        col = np.full(runs, -h[i])
        for t in range(adj_ptr[i], adj_ptr[i + 1]):
            col += adj_val[t] * S[:, adj_idx[t]]
        F[:, i] = col
    e_cur = _canon_energy_rows_np(S, offset, h, jq_i, jq_j, jq_v)
    e_best = e_cur.copy()
    best_spins = S.copy()
    first_hit = np.where(e_best <= target, 0, -1).astype(np.int64)
    tabu_until = np.zeros((runs, n), dtype=np.int64)
    ridx = np.arange(runs)

    for it in range(1, max_iters + 1):
        de = -2.0 * S * F
        admissible = (tabu_until < it) | ((e_cur[:, None] + de) < e_best[:, None])
        masked = np.where(admissible, de, np.inf)
        choice = np.argmin(masked, axis=1)
        none_adm = ~admissible.any(axis=1)
        if none_adm.any():
            choice[none_adm] = np.argmin(tabu_until[none_adm], axis=1)
        chosen_de = de[ridx, choice]
        S[ridx, choice] = -S[ridx, choice]
        for r in range(runs):
            i = choice[r]
            si = S[r, i]
            for a in range(adj_ptr[i], adj_ptr[i + 1]):
                F[r, adj_idx[a]] = F[r, adj_idx[a]] + adj_val[a] * (2.0 * si)
        e_cur = e_cur + chosen_de
        tabu_until[ridx, choice] = it + tenure
        imp = np.nonzero(e_cur < e_best)[0]
        if imp.size:
            canon = _canon_energy_rows_np(S[imp], offset, h, jq_i, jq_j, jq_v)
            e_cur[imp] = canon
            upd = imp[canon < e_best[imp]]
            if upd.size:
                cu = canon[canon < e_best[imp]]
                e_best[upd] = cu
                best_spins[upd] = S[upd]
                hit = upd[(first_hit[upd] < 0) & (cu <= target)]
                first_hit[hit] = it
    return best_spins, e_best, first_hit


# ---------------------------------------------------------------------------
# Gibbs sampling (single-site heat bath, fixed scan order)


@njit(cache=True)
def _gibbs_batch_nb(h, adj_ptr, adj_idx, adj_val, twobeta, spins0, logitu):
    runs, n = spins0.shape
    n_sweeps = logitu.shape[1]
    out = np.empty((runs, n_sweeps), dtype=np.int64)

    for r in range(runs):
        s = spins0[r].copy()
        f = np.empty(n)
        for i in range(n):
            fi = -h[i]
            for t in range(adj_ptr[i], adj_ptr[i + 1]):
                fi = fi + adj_val[t] * s[adj_idx[t]]
            f[i] = fi
        for t in range(n_sweeps):
            for i in range(n):
                new = 1.0 if (twobeta * f[i]) < logitu[r, t, i] else -1.0
                if new != s[i]:
                    ds = new - s[i]
                    s[i] = new
                    for a in range(adj_ptr[i], adj_ptr[i + 1]):
                        f[adj_idx[a]] = f[adj_idx[a]] + adj_val[a] * ds
            idx = 0
            for i in range(n):
                idx = (idx << 1) | (1 if s[i] < 0.0 else 0)
            out[r, t] = idx
    return out


def _gibbs_batch_np(h, adj_ptr, adj_idx, adj_val, twobeta, spins0, logitu):
    runs, n = spins0.shape
    n_sweeps = logitu.shape[1]
    out = np.empty((runs, n_sweeps), dtype=np.int64)
    S = spins0.copy()
    F = np.empty((runs, n))
    for i in range(n):
        col = np.full(runs, -h[i])
        for t in range(adj_ptr[i], adj_ptr[i + 1]):
            col += adj_val[t] * S[:, adj_idx[t]]
        F[:, i] = col

    for t in range(n_sweeps):
        for i in range(n):
            new = np.where((twobeta * F[:, i]) < logitu[:, t, i], 1.0, -1.0)
            ds = new - S[:, i]
            rows = np.nonzero(ds != 0.0)[0]
            if rows.size:
                S[rows, i] = new[rows]
                for a in range(adj_ptr[i], adj_ptr[i + 1]):
                    j = adj_idx[a]
                    F[rows, j] = F[rows, j] + adj_val[a] * ds[rows]
        idx = np.zeros(runs, dtype=np.int64)
        for i in range(n):
            idx = (idx << 1) | (S[:, i] < 0.0).astype(np.int64)
        out[:, t] = idx
    return out


# ---------------------------------------------------------------------------
# quantum annealing operator action: y = s*diag*x - coef * sum_i x[m ^ bit_i]


@njit(cache=True)
def _qa_apply_nb(diag, x, s, coef):
    size = x.shape[0]
    n = 0
    while (1 << n) < size:
        n += 1
    y = np.empty(size)
    for m in range(size):
        y[m] = (s * diag[m]) * x[m]
    for i in range(n):
        bit = 1 << (n - 1 - i)
        for m in range(size):
            y[m] = y[m] - coef * x[m ^ bit]
    return y


def _qa_apply_np(diag, x, s, coef):
    size = x.shape[0]
    n = 0
    while (1 << n) < size:
        n += 1
    y = (s * diag) * x
    arr = x.reshape((2,) * n)
    for i in range(n):
        y = y - coef * np.flip(arr, axis=i).reshape(-1)
    return y


# ---------------------------------------------------------------------------
# public selection

if USE_NUMBA:
    sa_batch = _sa_batch_nb
    tabu_batch = _tabu_batch_nb
    gibbs_batch = _gibbs_batch_nb
    qa_apply = _qa_apply_nb
    BACKEND = "numba"
else:
    sa_batch = _sa_batch_np
    tabu_batch = _tabu_batch_np
    gibbs_batch = _gibbs_batch_np
    qa_apply = _qa_apply_np
    BACKEND = "numpy"

NUMPY_KERNELS = {
    "sa_batch": _sa_batch_np,
    "tabu_batch": _tabu_batch_np,
    "gibbs_batch": _gibbs_batch_np,
    "qa_apply": _qa_apply_np,
}
NUMBA_KERNELS = {
    "sa_batch": _sa_batch_nb,
    "tabu_batch": _tabu_batch_nb,
    "gibbs_batch": _gibbs_batch_nb,
    "qa_apply": _qa_apply_nb,
}
