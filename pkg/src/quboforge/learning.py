"""QUBO compilers for machine-learning problems.

Covers boosting-style classifier selection, 2-way and K-way distance
clustering, epsilon-box anomaly-model selection (one-shot and streaming
batch mode), image-matching candidate selection as a maximum independent
set, and structured multi-label prediction with subgradient training.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .models import Assignment, QuboModel, energy
from .solvers import brute_force

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# weak classifier selection (boosting)


@dataclass(frozen=True, eq=False)
class WeakClassifierMatrix:
    """Outputs of N weak classifiers on S training points, plus labels.

    Entries are exactly +-1/N (each weak vote is normalized by the
    dictionary size); labels are +-1.
    """

    H: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        H = np.asarray(self.H, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if H.ndim != 2 or H.shape[0] < 1 or H.shape[1] < 1:
            raise ValueError("H must be a non-empty S x N matrix")
        if y.shape != (H.shape[0],):
            raise ValueError("y must have one label per training row")
        n = H.shape[1]
        if not np.all(np.abs(H) == 1.0 / n):
            raise ValueError("H entries must be exactly +-1/N")
        if not np.all(np.abs(y) == 1.0):
            raise ValueError("labels must be +-1")
        H = H.copy()
        y = y.copy()
        H.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_signs(cls, signs, y) -> WeakClassifierMatrix:
        """Build from a +-1 vote matrix; rescales columns to +-1/N."""
        signs = np.asarray(signs, dtype=np.float64)
        return cls(signs / signs.shape[1], y)

    @property
    def num_samples(self) -> int:
        return self.H.shape[0]

    @property
    def num_classifiers(self) -> int:
        return self.H.shape[1]


def qboost_compile(W: WeakClassifierMatrix, lam: float) -> QuboModel:
    """Select a sparse classifier subset minimizing squared training error.

    E(z) = sum_{i,j} C'_ij z_i z_j + 2 sum_i (lam - C'_iy) z_i with
    C'_ij = sum_s h_i(x_s) h_j(x_s) and C'_iy = sum_s h_i(x_s) y_s;
    the double sum's diagonal collapses onto the linear terms (z^2 = z).
    The constant ||y||^2 of the squared distance is dropped (pure shift).
    """
    if lam < 0.0:
        raise ValueError("lam must be >= 0")
    if W.num_samples < 1:
        raise ValueError("empty training set")
    C = W.H.T @ W.H
    Ciy = W.H.T @ W.y
    n = W.num_classifiers
    linear = {i: C[i, i] + 2.0 * (lam - Ciy[i]) for i in range(n)}
    quadratic = {(i, j): 2.0 * C[i, j] for i in range(n) for j in range(i + 1, n)}
    return QuboModel(num_vars=n, linear=linear, quadratic=quadratic)


def qboost_classify(z: Assignment, outputs: np.ndarray) -> int | np.ndarray:
    """Vote of the selected classifiers: sign of the weighted sum.

    ``outputs`` holds the weak outputs h_i(x) for one point (length N) or
    many points (P x N). A zero sum returns +1 by convention; an all-zero
    selection is an error (no voters).
    """
    zb = z.to_bit().values.astype(np.float64)
    if not np.any(zb):
        raise ValueError("no classifiers selected")
    outputs = np.asarray(outputs, dtype=np.float64)
    votes = outputs @ zb
    labels = np.where(votes >= 0.0, 1, -1)
    if outputs.ndim == 1:
        return int(labels)
    return labels


# ---------------------------------------------------------------------------
# point sets and distance clustering


@dataclass(frozen=True, eq=False)
class PointSet:
    """Points in a common dimension with a distance-metric tag."""

    points: np.ndarray
    metric: str = "euclidean"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("points must be a non-empty (n, dim) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        if self.metric not in ("euclidean", "linf"):
            raise ValueError(f"unknown metric {self.metric!r}")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    def distance_matrix(self) -> np.ndarray:
        diff = self.points[:, None, :] - self.points[None, :, :]
        if self.metric == "euclidean":
            return np.sqrt(np.sum(diff ** 2, axis=2))
        return np.max(np.abs(diff), axis=2)


def qcut_compile(p: PointSet, K: int = 2, A: float | None = None) -> QuboModel:
    """Distance clustering as a QUBO.

    K=2: E(z) = -sum_{i,j} d_ij z_i (1 - z_j), one bit per point; minimizing
    maximizes the intercluster distance (MAXCUT on the distance graph).
    K>2: one indicator per (point, cluster) at index i*K + k; the distance
    term applies within each cluster and a one-hot penalty A enforces that
    each point joins exactly one cluster. Default A = 1 + sum of all
    pairwise distances (strictly dominates any constraint violation).
    """
    n = len(p)
    if K < 2:
        raise ValueError("K must be >= 2")
    if K > n:
        raise ValueError("K exceeds the point count")
    d = p.distance_matrix()
    if K == 2:
        linear = {i: -float(np.sum(d[i])) for i in range(n)}
        quadratic = {(i, j): 2.0 * d[i, j] for i in range(n)
                     for j in range(i + 1, n)}
        return QuboModel(num_vars=n, linear=linear, quadratic=quadratic)
    if A is None:
        A = 1.0 + float(np.sum(np.triu(d, 1)))
    elif A <= 0.0:
        raise ValueError("A must be > 0")
    linear: dict[int, float] = {}
    quadratic: dict[tuple[int, int], float] = {}
    offset = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(K):
                quadratic[(i * K + k, j * K + k)] = 2.0 * d[i, j]
    for i in range(n):
        # (sum_k z_ik - 1)^2 = 1 - sum_k z_ik + 2 sum_{k<k'} z_ik z_ik'
        offset += A
        for k in range(K):
            linear[i * K + k] = linear.get(i * K + k, 0.0) - A
            for k2 in range(k + 1, K):
                key = (i * K + k, i * K + k2)
                quadratic[key] = quadratic.get(key, 0.0) + 2.0 * A
    return QuboModel(num_vars=n * K, linear=linear, quadratic=quadratic,
                     offset=offset)


def qcut_clusters(a: Assignment, n: int, K: int = 2) -> np.ndarray:
    """Decode cluster labels; points violating one-hot get label -1."""
    z = a.to_bit().values
    if K == 2:
        if len(z) != n:
            raise ValueError("assignment length does not match point count")
        return z.astype(np.int64)
    if len(z) != n * K:
        raise ValueError("assignment length does not match n*K")
    labels = np.empty(n, dtype=np.int64)
    for i in range(n):
        row = z[i * K:(i + 1) * K]
        ones = np.nonzero(row)[0]
        labels[i] = int(ones[0]) if ones.shape[0] == 1 else -1
    return labels


def cut_value(p: PointSet, labels: np.ndarray) -> float:
    """Total distance across cluster boundaries."""
    d = p.distance_matrix()
    labels = np.asarray(labels)
    total = 0.0
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if labels[i] != labels[j]:
                total += d[i, j]
    return total


# ---------------------------------------------------------------------------
# epsilon-box model selection


def box_membership(points: np.ndarray, epsilon: float) -> np.ndarray:
    """M[i, s] = point s lies in the epsilon-box centered at point i.

    Boxes use the max-coordinate norm: all coordinates within epsilon.
    """
    points = np.asarray(points, dtype=np.float64)
    diff = np.abs(points[:, None, :] - points[None, :, :])
    return np.max(diff, axis=2) <= epsilon


def qims_compile(p: PointSet, epsilon: float, mu: float,
                 lam: float) -> QuboModel:
    """Select a set of epsilon-boxes covering the data.

    E(z) = sum_{i != j} |B_i n B_j| z_i z_j - mu sum_i |B_i| z_i
           + lam sum_i z_i

    The overlap sum runs over distinct pairs only: an isolated box then
    carries coefficient lam - mu, so it enters the ground state exactly
    when mu > lam, matching the outlier semantics. (Folding the |B_i|
    diagonal of the overlap matrix into the linear term instead would move
    that threshold; the one-class reduction with mu = 2 reads the double
    sum that way, which is noted here and not adopted.) Box membership is
    always the max-coordinate norm, regardless of the point set's tag.
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be > 0")
    M = box_membership(p.points, epsilon)
    inter = (M.astype(np.int64) @ M.astype(np.int64).T)
    sizes = M.sum(axis=1)
    n = len(p)
    linear = {i: lam - mu * float(sizes[i]) for i in range(n)}
    quadratic = {(i, j): 2.0 * float(inter[i, j])
                 for i in range(n) for j in range(i + 1, n)}
    return QuboModel(num_vars=n, linear=linear, quadratic=quadratic)


def qims_covered(points: np.ndarray, centers: np.ndarray,
                 epsilon: float) -> np.ndarray:
    """Mask of points within epsilon (max-norm) of any center."""
    points = np.asarray(points, dtype=np.float64)
    centers = np.asarray(centers, dtype=np.float64)
    if centers.shape[0] == 0:
        return np.zeros(points.shape[0], dtype=bool)
    diff = np.abs(points[:, None, :] - centers[None, :, :])
    return np.any(np.max(diff, axis=2) <= epsilon, axis=1)


@dataclass(frozen=True, eq=False)
class QimsBatchResult:
    centers: np.ndarray
    center_indices: tuple[int, ...]
    batches_completed: int
    solves: int
    failed: bool = False
    error: str | None = None


def _default_box_solver(q: QuboModel) -> Assignment:
    return brute_force(q).best_assignment


def qims_batch(points, capacity: int, epsilon: float, mu: float, lam: float,
               solver=None) -> QimsBatchResult:
    """Streaming epsilon-box selection with a bounded solve size.

    Processes the stream in batches of at most ``capacity`` candidate
    centers: points already covered by boxes of completed batches (or by
    the current batch's retained centers) are skipped; when the batch
    fills, the one-shot compiler runs on it. If the solve returns as many
    boxes as the capacity, the batch is complete and a new one starts;
    otherwise the selected centers are retained and the batch regrows with
    fresh uncovered points. Grow-step coefficients count every point the
    batch lineage has considered so far, not only the current candidate
    centers. A trailing partial batch is solved at the end. With capacity
    at or above the stream length this reduces exactly to the one-shot
    compile-and-solve.

    A solver failure aborts the stream and returns the partial result
    flagged with ``failed=True``.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError("points must be an (n, dim) array")
    if capacity < 1:
        raise ValueError("capacity must be >= 1")
    if solver is None:
        solver = _default_box_solver

    n_total = points.shape[0]
    completed: list[int] = []     # indices of box centers from completed batches
    batch: list[int] = []         # current candidate-center indices
    lineage: list[int] = []       # all points considered by the current batch
    n_retained = 0                # leading batch entries that are solved centers
    batches_completed = 0
    solves = 0
    pos = 0

    def run_solver() -> list[int]:
        nonlocal solves
        solves += 1
        # rows restricted to candidate centers, columns = all lineage points
        member = box_membership(points[lineage], epsilon)
        rows = [lineage.index(b) for b in batch]
        Mc = member[rows]
        inter = Mc.astype(np.int64) @ Mc.astype(np.int64).T
        sizes = Mc.sum(axis=1)
        m = len(batch)
        linear = {i: lam - mu * float(sizes[i]) for i in range(m)}
        quadratic = {(i, j): 2.0 * float(inter[i, j])
                     for i in range(m) for j in range(i + 1, m)}
        q = QuboModel(num_vars=m, linear=linear, quadratic=quadratic)
        a = solver(q)
        return [batch[i] for i in range(m) if a.to_bit().values[i] == 1]

    try:
        while pos < n_total:
            boxes = completed + batch[:n_retained]
            cover_centers = points[boxes] if boxes \
                else np.empty((0, points.shape[1]))
            if qims_covered(points[pos:pos + 1], cover_centers, epsilon)[0]:
                pos += 1
                continue
            batch.append(pos)
            lineage.append(pos)
            pos += 1
            if len(batch) == capacity:
                kept = run_solver()
                if len(kept) == capacity:
                    completed.extend(kept)
                    batches_completed += 1
                    batch = []
                    lineage = []
                    n_retained = 0
                else:
                    batch = kept
                    n_retained = len(kept)
        if batch:
            # a trailing batch with no unsolved additions is already decided
            kept = run_solver() if len(batch) > n_retained else list(batch)
            completed.extend(kept)
            batches_completed += 1
    except Exception as exc:  # solver failure: report partial results
        return QimsBatchResult(
            centers=points[completed], center_indices=tuple(completed),
            batches_completed=batches_completed, solves=solves,
            failed=True, error=str(exc))

    return QimsBatchResult(
        centers=points[completed], center_indices=tuple(completed),
        batches_completed=batches_completed, solves=solves)


# ---------------------------------------------------------------------------
# image matching (maximum independent set)


def imagematch_compile(pairs, conflict) -> QuboModel:
    """Candidate-pair selection as a maximum independent set.

    One bit per candidate pair; every conflicting pair of candidates gets
    a quadratic penalty equal to the candidate count L, and each vertex a
    -1 reward. With the penalty at least 2, ground states are exactly the
    maximum independent sets of the conflict graph. The predicate must be
    symmetric; it is evaluated once per unordered pair.
    """
    L = len(pairs)
    if L < 1:
        raise ValueError("need at least one candidate pair")
    linear = {i: -1.0 for i in range(L)}
    quadratic = {}
    for i in range(L):
        for j in range(i + 1, L):
            if conflict(pairs[i], pairs[j]):
                quadratic[(i, j)] = float(L)
    return QuboModel(num_vars=L, linear=linear, quadratic=quadratic)


def reference_conflict(pair_a, pair_b, tol: float = 0.1) -> bool:
    """Default geometric-consistency test for candidate match pairs.

    Each candidate is a pair of matched feature coordinates (one per
    image). Two candidates conflict when they reuse a feature point or
    when the two in-image distances disagree by more than ``tol`` of the
    larger (distance-ratio consistency).
    """
    a1, a2 = np.asarray(pair_a[0], float), np.asarray(pair_a[1], float)
    b1, b2 = np.asarray(pair_b[0], float), np.asarray(pair_b[1], float)
    if np.array_equal(a1, b1) or np.array_equal(a2, b2):
        return True
    d1 = float(np.linalg.norm(a1 - b1))
    d2 = float(np.linalg.norm(a2 - b2))
    return abs(d1 - d2) > tol * max(d1, d2)


# ---------------------------------------------------------------------------
# structured multi-label prediction


@dataclass(frozen=True, eq=False)
class StructuredModel:
    """Quadratic label interaction model with linear-kernel features.

    ``label_graph`` lists the active label pairs; self-pairs (i, i) carry
    what become linear terms. Weights are indexed (feature k, term t) with
    terms in the normalized label-graph order and feature 0 the constant
    psi_0 = 1, so feature vectors are [1, x_1 .. x_F].
    """

    num_labels: int
    label_graph: tuple[tuple[int, int], ...]
    feature_dim: int
    w: np.ndarray = None

    def __post_init__(self):
        if self.num_labels < 1:
            raise ValueError("num_labels must be >= 1")
        if self.feature_dim < 1:
            raise ValueError("feature_dim must be >= 1")
        seen = []
        for (i, j) in self.label_graph:
            i, j = int(i), int(j)
            if not (0 <= i < self.num_labels and 0 <= j < self.num_labels):
                raise ValueError(f"label pair ({i},{j}) out of range")
            if i > j:
                i, j = j, i
            if (i, j) in seen:
                raise ValueError(f"duplicate label pair ({i},{j})")
            seen.append((i, j))
        terms = tuple(sorted(seen))
        object.__setattr__(self, "label_graph", terms)
        w = np.zeros((self.feature_dim, len(terms))) if self.w is None \
            else np.asarray(self.w, dtype=np.float64)
        if w.shape != (self.feature_dim, len(terms)):
            raise ValueError(
                f"w must have shape ({self.feature_dim}, {len(terms)})")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    def with_weights(self, w: np.ndarray) -> StructuredModel:
        return StructuredModel(self.num_labels, self.label_graph,
                               self.feature_dim, w)


def feature_vector(x, feature_dim: int) -> np.ndarray:
    """Linear-kernel features [1, x_1 .. x_F]."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if x.shape[0] != feature_dim - 1:
        raise ValueError(f"expected {feature_dim - 1} raw features, got {x.shape[0]}")
    return np.concatenate(([1.0], x))


def structured_energy(x, model: StructuredModel) -> QuboModel:
    """Label energy for one input: coeff on z_i z_j is sum_k w_k,ij psi_k(x)."""
    psi = feature_vector(x, model.feature_dim)
    coeffs = psi @ model.w
    linear: dict[int, float] = {}
    quadratic: dict[tuple[int, int], float] = {}
    for t, (i, j) in enumerate(model.label_graph):
        c = float(coeffs[t])
        if i == j:
            linear[i] = linear.get(i, 0.0) + c
        else:
            quadratic[(i, j)] = quadratic.get((i, j), 0.0) + c
    return QuboModel(num_vars=model.num_labels, linear=linear,
                     quadratic=quadratic)


def _loss_augmented(q: QuboModel, z_d: np.ndarray) -> QuboModel:
    # min_z [E(z) - Delta(z_d, z)] with Hamming
    # Delta = sum_i [z_di + (1 - 2 z_di) z_i]
    linear = dict(q.linear)
    for i in range(q.num_vars):
        linear[i] = linear.get(i, 0.0) - (1.0 - 2.0 * float(z_d[i]))
    offset = q.offset - float(np.sum(z_d))
    return QuboModel(num_vars=q.num_vars, linear=linear,
                     quadratic=dict(q.quadratic), offset=offset)


def structured_objective(model: StructuredModel, data, lam: float,
                         solver=None) -> float:
    """F(w) = lam/2 ||w||^2 + mean_d max_z [Delta(z_d,z) - (E_d(z) - E_d(z_d))]."""
    if solver is None:
        solver = _default_box_solver
    total = 0.0
    for x, z_d in data:
        zd = np.asarray(z_d, dtype=np.int8)
        q = structured_energy(x, model)
        e_zd = energy(q, Assignment.bits(zd))
        aug = _loss_augmented(q, zd)
        zhat = solver(aug)
        total += e_zd - energy(aug, zhat.to_bit())
    return 0.5 * lam * float(np.sum(model.w ** 2)) + total / len(data)


@dataclass(frozen=True, eq=False)
class StructuredTrainResult:
    model: StructuredModel
    objective: float
    history: np.ndarray
    skipped: int


def structured_train(template: StructuredModel, data, lam: float,
                     steps: int = 100, solver=None,
                     step_scale: float = 1.0) -> StructuredTrainResult:
    """Subgradient descent on the regularized structured hinge objective.

    Per iteration and training pair, the loss-augmented labeling is solved
    as a QUBO (the Hamming augmentation is linear in z, so the objective
    stays quadratic; z_d itself is a feasible argmax contributing zero).
    Steps shrink as step_scale / sqrt(iteration); the iterate with the best
    objective seen is returned. Inner-solver failures skip that example for
    the iteration and are counted and logged.
    """
    if solver is None:
        solver = _default_box_solver
    if steps < 1:
        raise ValueError("steps must be >= 1")
    data = [(x, np.asarray(z, dtype=np.int8)) for x, z in data]
    if not data:
        raise ValueError("empty training set")
    w = np.array(template.w, dtype=np.float64)
    best_w = w.copy()
    best_f = math.inf
    history = np.empty(steps)
    skipped = 0
    n_terms = len(template.label_graph)

    for it in range(1, steps + 1):
        grad = lam * w
        total_loss = 0.0
        used = 0
        for x, zd in data:
            model = template.with_weights(w)
            q = structured_energy(x, model)
            aug = _loss_augmented(q, zd)
            try:
                zhat = solver(aug).to_bit().values
            except Exception as exc:
                skipped += 1
                logger.warning("inner solve failed (iteration %d): %s", it, exc)
                continue
            used += 1
            e_zd = energy(q, Assignment.bits(zd))
            total_loss += e_zd - energy(aug, Assignment.bits(zhat))
            psi = feature_vector(x, template.feature_dim)
            for t in range(n_terms):
                i, j = template.label_graph[t]
                dterm = float(zd[i]) * float(zd[j]) - float(zhat[i]) * float(zhat[j])
                grad[:, t] += psi * (dterm / len(data))
        f = 0.5 * lam * float(np.sum(w ** 2)) + (
            total_loss / used if used else math.inf)
        history[it - 1] = f
        if f < best_f:
            best_f = f
            best_w = w.copy()
        w = w - (step_scale / math.sqrt(it)) * grad

    return StructuredTrainResult(model=template.with_weights(best_w),
                                 objective=best_f, history=history,
                                 skipped=skipped)
