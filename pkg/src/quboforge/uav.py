"""Compile a single-vehicle target-visiting tour into QUBO/Ising form.

Bit z_{i,alpha} = 1 means target i is visited at tour position alpha; both
indices run over 0..N-1 and positions are cyclic, so alpha +/- 1 wraps.  The
energy is the neighbor-coupled tour length

    E_tour = 1/2 sum_{i != j} d_ij sum_alpha z_{i,alpha} (z_{j,alpha+1} + z_{j,alpha-1})

plus quadratic one-hot penalties W1 per target and W2 per position.  On a
valid tour the cyclic coupling symmetrizes direction: the energy equals the
mean of the forward and reverse cycle lengths.
"""

from __future__ import annotations

import math

import numpy as np

from .dubins import dubins_matrix
from .models import Assignment, IsingModel, QuboModel, qubo_to_ising


def _validated_matrix(d: np.ndarray) -> np.ndarray:
    d = np.asarray(d, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("distance matrix must be square")
    n = d.shape[0]
    if n < 2:
        raise ValueError("need at least 2 targets")
    if not np.all(np.isfinite(d)):
        raise ValueError("distance matrix must be finite")
    if np.any(np.diag(d) != 0.0):
        raise ValueError("distance matrix diagonal must be zero")
    if np.any(d < 0.0):
        raise ValueError("distances must be >= 0")
    return d


def tsp_compile_matrix(
    d: np.ndarray, W1: float | None = None, W2: float | None = None
) -> tuple[IsingModel, QuboModel]:
    """Compile a tour model from an explicit pairwise distance matrix."""
    d = _validated_matrix(d)
    n = d.shape[0]
    mean_offdiag = float(d.sum() / (n * (n - 1)))
    default_w = float(math.ceil(n * mean_offdiag))
    w1 = default_w if W1 is None else float(W1)
    w2 = default_w if W2 is None else float(W2)
    if w1 <= 0 or w2 <= 0:
        raise ValueError("one-hot weights must be > 0")

    nv = n * n
    linear = {u: 0.0 for u in range(nv)}
    quad: dict[tuple[int, int], float] = {}
    offset = 0.0

    def add_pair(u: int, v: int, c: float) -> None:
        key = (u, v) if u < v else (v, u)
        quad[key] = quad.get(key, 0.0) + c

    # neighbor-coupled tour length
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            for alpha in range(n):
                u = i * n + alpha
                add_pair(u, j * n + (alpha + 1) % n, 0.5 * d[i, j])
                add_pair(u, j * n + (alpha - 1) % n, 0.5 * d[i, j])

    # W * (sum z - 1)^2 = W * (1 - sum z + 2 * sum_{pairs} z z')
    for i in range(n):
        offset += w1
        for alpha in range(n):
            linear[i * n + alpha] -= w1
            for alpha2 in range(alpha + 1, n):
                add_pair(i * n + alpha, i * n + alpha2, 2.0 * w1)
    for alpha in range(n):
        offset += w2
        for i in range(n):
            linear[i * n + alpha] -= w2
            for i2 in range(i + 1, n):
                add_pair(i * n + alpha, i2 * n + alpha, 2.0 * w2)

    quad = {k: v for k, v in quad.items() if v != 0.0}
    linear = {u: v for u, v in linear.items() if v != 0.0}
    q = QuboModel(num_vars=nv, linear=linear, quadratic=quad, offset=offset)
    return qubo_to_ising(q), q


def uav_tsp_compile(
    targets, W1: float | None = None, W2: float | None = None
) -> tuple[IsingModel, QuboModel]:
    """Compile the visit-every-target tour over curvature-bounded distances."""
    ts = list(targets)
    if len(ts) < 2:
        raise ValueError("need at least 2 targets")
    return tsp_compile_matrix(dubins_matrix(ts), W1=W1, W2=W2)


def tour_decode(a: Assignment, n: int) -> tuple[int, ...] | None:
    """Positions -> targets if both one-hot families hold, else None."""
    bits = a.to_bit().values
    if bits.shape[0] != n * n:
        raise ValueError("assignment length does not match n*n tour variables")
    grid = bits.reshape(n, n)
    if np.any(grid.sum(axis=0) != 1) or np.any(grid.sum(axis=1) != 1):
        return None
    return tuple(int(np.argmax(grid[:, alpha])) for alpha in range(n))


def tour_length(d: np.ndarray, tour) -> float:
    """Forward cyclic length of an explicit tour over matrix d."""
    d = np.asarray(d, dtype=np.float64)
    order = list(tour)
    n = len(order)
    if sorted(order) != list(range(d.shape[0])) or n != d.shape[0]:
        raise ValueError("tour must visit every target exactly once")
    return float(sum(d[order[k], order[(k + 1) % n]] for k in range(n)))
