"""Small-N quantum annealing simulation.

The control operator interpolates linearly between a transverse-field driver
and the diagonal problem operator:

    H(s) = (1 - s) * H_D + s * H_P,   s = t / T in [0, 1]
    H_D  = -delta * sum_i X_i
    H_P  = diag(E(z))  over the 2^N big-endian basis states

H_P's diagonal entries are the Ising energies (offset included) of the spin
configurations in index order, so the s=1 spectrum is exactly the sorted
energy multiset. H_D couples every pair of basis states that differ in one
bit with amplitude -delta; its ground state is the uniform superposition
with eigenvalue -N*delta. Units: hbar = 1, all quantities dimensionless.

Representation is matrix-free (diagonal vector plus N bit-flip strides), so
memory stays O(2^N). Dense materialization is allowed only for N <= 12;
beyond that the lowest eigenpairs come from implicitly restarted Lanczos.

The adiabatic rate parameter reported per scan point is

    tau(s) = |<Phi_0 | H_D | Phi_1>| / (lambda_1 - lambda_0)^2

with V its numerator; summary values g_min, V_max, tau_max are taken over
interior grid points (the open interval), and g_min is refined by
golden-section search around the best grid point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import qa_apply
from .models import IsingModel, all_energies
from .solvers import brute_force

ACTION_LIMIT = 20
DENSE_LIMIT = 12
EVOLVE_LIMIT = 16
ITERATIVE_K_LIMIT = 6
NORM_BUDGET = 1e-8


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Amplitude vector over the 2^N big-endian computational basis."""

    amplitudes: np.ndarray
    num_qubits: int

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2 ** self.num_qubits,):
            raise ValueError(
                f"state over {self.num_qubits} qubits needs "
                f"{2 ** self.num_qubits} amplitudes, got {amps.shape}")
        nrm = float(np.linalg.norm(amps))
        if abs(nrm - 1.0) > NORM_BUDGET:
            raise ValueError(f"state norm {nrm} outside the 1e-8 budget")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def uniform(cls, num_qubits: int) -> QuantumState:
        size = 2 ** num_qubits
        return cls(np.full(size, 1.0 / math.sqrt(size), dtype=np.complex128),
                   num_qubits)

    @classmethod
    def basis_state(cls, num_qubits: int, index: int) -> QuantumState:
        amps = np.zeros(2 ** num_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps, num_qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class ControlHamiltonian:
    """Linear interpolation between the driver and the problem operator."""

    problem: IsingModel
    delta: float = 1.0
    T: float = 1.0

    def __post_init__(self):
        if self.problem.num_spins > ACTION_LIMIT:
            raise ValueError(f"qa simulation limited to {ACTION_LIMIT} qubits")
        if self.delta < 0.0:
            raise ValueError("delta must be >= 0")
        if not (self.T > 0.0):
            raise ValueError("T must be > 0")

    @property
    def num_qubits(self) -> int:
        return self.problem.num_spins


class HamiltonianAction:
    """Matrix-free action of H(s) = s*diag(E) - (1-s)*delta*sum_i X_i."""

    def __init__(self, diag: np.ndarray, delta: float, s: float):
        self.diag = diag
        self.delta = float(delta)
        self.s = float(s)
        self.coef = (1.0 - self.s) * self.delta
        self.size = diag.shape[0]
        self.num_qubits = int(round(math.log2(self.size)))

    def apply(self, x: np.ndarray) -> np.ndarray:
        return qa_apply(self.diag, np.ascontiguousarray(x, dtype=np.float64),
                        self.s, self.coef)

    def apply_complex(self, psi: np.ndarray) -> np.ndarray:
        re = self.apply(np.real(psi))
        im = self.apply(np.imag(psi))
        return re + 1j * im

    def dense(self) -> np.ndarray:
        if self.num_qubits > DENSE_LIMIT:
            raise ValueError(f"dense form limited to {DENSE_LIMIT} qubits")
        H = np.zeros((self.size, self.size))
        idx = np.arange(self.size)
        H[idx, idx] = self.s * self.diag
        for i in range(self.num_qubits):
            bit = 1 << (self.num_qubits - 1 - i)
            H[idx, idx ^ bit] -= self.coef
        return H


def problem_diagonal(m: IsingModel) -> np.ndarray:
    """Ising energies over all configurations in big-endian index order."""
    return all_energies(m)


def build_hamiltonian(ch: ControlHamiltonian, s: float) -> HamiltonianAction:
    n = ch.num_qubits
    if n > ACTION_LIMIT:
        raise ValueError(f"action form limited to {ACTION_LIMIT} qubits")
    if not 0.0 <= s <= 1.0:
        raise ValueError("s must be in [0, 1]")
    return HamiltonianAction(problem_diagonal(ch.problem), ch.delta, s)


# ---------------------------------------------------------------------------
# spectrum


@dataclass(frozen=True, eq=False)
class SpectrumPoint:
    s: float
    eigenvalues: np.ndarray
    gap: float
    tau: float
    V: float

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=np.float64)
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)


@dataclass(frozen=True, eq=False)
class SpectrumScan:
    points: tuple[SpectrumPoint, ...]
    g_min: float
    s_min: float
    tau_max: float
    s_tau: float
    V_max: float

    @property
    def s_values(self) -> np.ndarray:
        return np.array([p.s for p in self.points])

    @property
    def gaps(self) -> np.ndarray:
        return np.array([p.gap for p in self.points])

    @property
    def taus(self) -> np.ndarray:
        return np.array([p.tau for p in self.points])


def _eig_lowest(diag: np.ndarray, delta: float, s: float, k: int | None):
    """Lowest eigenpairs of H(s): dense for small sizes, Lanczos beyond."""
    action = HamiltonianAction(diag, delta, s)
    n = action.num_qubits
    if k is None or n <= 10:
        w, v = np.linalg.eigh(action.dense())
        if k is None:
            return w, v
        return w[:k], v[:, :k]
    if k > ITERATIVE_K_LIMIT:
        raise ValueError(f"iterative path limited to k <= {ITERATIVE_K_LIMIT}")
    from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

    op = LinearOperator((action.size, action.size), matvec=action.apply,
                        dtype=np.float64)
    v0 = np.full(action.size, 1.0 / math.sqrt(action.size))
    try:
        w, v = eigsh(op, k=k, which="SA", tol=1e-8, v0=v0,
                     maxiter=200 * action.size)
    except ArpackNoConvergence as exc:
        res = []
        for col in range(exc.eigenvectors.shape[1]):
            vec = exc.eigenvectors[:, col]
            res.append(float(np.linalg.norm(
                action.apply(vec) - exc.eigenvalues[col] * vec)))
        raise RuntimeError(
            f"eigensolver did not converge at s={s}; partial residual "
            f"norms: {res}") from exc
    order = np.argsort(w)
    return w[order], v[:, order]


def _point_data(diag, delta, s, k):
    n = int(round(math.log2(diag.shape[0])))
    if s == 1.0:
        # H(1) is diagonal: eigenvalues are the sorted energies and the
        # eigenvectors are basis states (stable sort = lexicographic ties).
        order = np.argsort(diag, kind="stable")
        w_full = diag[order]
        kk = diag.shape[0] if k is None else k
        w = w_full[:kk]
        v = np.zeros((diag.shape[0], min(2, kk)))
        for col in range(v.shape[1]):
            v[order[col], col] = 1.0
    else:
        w, v = _eig_lowest(diag, delta, s, k if k is None else max(k, 2))
        if k is not None:
            w = w[:k]
    gap = float(w[1] - w[0]) if w.shape[0] > 1 else 0.0
    # V = |<Phi0|H_D|Phi1>| with H_D x = -delta * sum_i x[m ^ bit_i]
    hd_phi1 = qa_apply(diag, np.ascontiguousarray(v[:, 1]), 0.0, delta)
    V = float(abs(np.dot(v[:, 0], hd_phi1)))
    tau = V / gap ** 2 if gap > 0.0 else math.inf
    return w, gap, tau, V


def spectrum_scan(ch: ControlHamiltonian, grid: int = 201,
                  k: int | None = None) -> SpectrumScan:
    """Instantaneous spectrum over an s-grid with min-gap refinement.

    Per grid point: the lowest eigenvalues (all of them when ``k`` is None,
    dense path, N <= 12), the gap, V, and tau. Summary statistics are taken
    over interior grid points; the gap minimum is then refined by
    golden-section search between the neighbors of the best grid point.
    """
    n = ch.num_qubits
    if k is None and n > DENSE_LIMIT:
        raise ValueError(f"full dense scan limited to {DENSE_LIMIT} qubits; pass k")
    if k is not None and k < 2:
        raise ValueError("k must be >= 2 (the gap needs two eigenvalues)")
    diag = problem_diagonal(ch.problem)
    s_grid = np.linspace(0.0, 1.0, int(grid))
    points = []
    for s in s_grid:
        w, gap, tau, V = _point_data(diag, ch.delta, float(s), k)
        points.append(SpectrumPoint(s=float(s), eigenvalues=w, gap=gap,
                                    tau=tau, V=V))

    interior = [p for p in points if 0.0 < p.s < 1.0]
    best = min(interior, key=lambda p: p.gap)
    tau_best = max(interior, key=lambda p: p.tau)
    V_max = max(p.V for p in interior)

    # golden-section refinement of the gap around the best grid point
    idx = points.index(best)
    lo = points[max(idx - 1, 0)].s
    hi = points[min(idx + 1, len(points) - 1)].s

    def gap_at(s: float) -> float:
        return _point_data(diag, ch.delta, float(s), 2)[1]

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = gap_at(c), gap_at(d)
    while b - a > 1e-10:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = gap_at(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = gap_at(d)
    s_star = 0.5 * (a + b)
    g_star = gap_at(s_star)
    if g_star < best.gap:
        g_min, s_min = g_star, s_star
    else:
        g_min, s_min = best.gap, best.s
    return SpectrumScan(points=tuple(points), g_min=g_min, s_min=s_min,
                        tau_max=tau_best.tau, s_tau=tau_best.s, V_max=V_max)


# ---------------------------------------------------------------------------
# measurement


def measurement_stats(state: QuantumState, m: IsingModel) -> tuple[float, float]:
    """Mean and variance of the problem energy in the given state."""
    if 2 ** m.num_spins != state.amplitudes.shape[0]:
        raise ValueError("state dimension does not match the model")
    p = state.probabilities()
    e = all_energies(m)
    mean = float(np.dot(p, e))
    var = float(np.dot(p, (e - mean) ** 2))
    return mean, var


# ---------------------------------------------------------------------------
# evolution


@dataclass(frozen=True, eq=False)
class EvolveResult:
    times: np.ndarray
    norms: np.ndarray
    mean_energy: np.ndarray
    var_energy: np.ndarray
    success: np.ndarray
    final_state: QuantumState
    success_probability: float
    ground_index: int
    ground_energy: float
    n_steps: int
    norm_drift: float
    states: tuple[QuantumState, ...] | None = field(default=None, repr=False)


def evolve(
    ch: ControlHamiltonian,
    dt: float | None = None,
    initial: QuantumState | None = None,
    n_records: int = 101,
    keep_states: bool = False,
    frozen_s: float | None = None,
    step_tol: float = 1e-9,
    norm_budget: float = NORM_BUDGET,
) -> EvolveResult:
    """Integrate the Schrödinger equation from t=0 to t=T.

    Classical RK4 on the real/imaginary split with adaptive step doubling:
    a step is accepted when the doubled-vs-halved discrepancy stays under
    ``step_tol * dt``; each accepted state is renormalized and the cumulative
    renormalization is audited against ``norm_budget`` (the run fails rather
    than hiding drift). ``dt`` is the initial/maximum step. The default
    initial state is the uniform superposition (the driver ground state);
    ``frozen_s`` pins the interpolation for conservation checks. Success is
    the probability of the brute-force optimum (lexicographic tie-break).
    """
    n = ch.num_qubits
    if n > EVOLVE_LIMIT:
        raise ValueError(f"evolution limited to {EVOLVE_LIMIT} qubits")
    if n_records < 2:
        raise ValueError("n_records must be >= 2")
    if frozen_s is not None and not 0.0 <= frozen_s <= 1.0:
        raise ValueError("frozen_s must be in [0, 1]")
    diag = problem_diagonal(ch.problem)
    size = diag.shape[0]
    delta = ch.delta
    T = ch.T

    bf = brute_force(ch.problem)
    ground_index = bf.best_assignment.index()
    ground_energy = bf.best_energy

    state = QuantumState.uniform(n) if initial is None else initial
    if state.amplitudes.shape[0] != size:
        raise ValueError("initial state dimension does not match the problem")
    re = np.ascontiguousarray(np.real(state.amplitudes))
    im = np.ascontiguousarray(np.imag(state.amplitudes))

    def rhs(t: float, yre: np.ndarray, yim: np.ndarray):
        s = frozen_s if frozen_s is not None else min(max(t / T, 0.0), 1.0)
        coef = (1.0 - s) * delta
        hre = qa_apply(diag, yre, s, coef)
        him = qa_apply(diag, yim, s, coef)
        return him, -hre

    def rk4(t: float, h: float, yre: np.ndarray, yim: np.ndarray):
        k1r, k1i = rhs(t, yre, yim)
        k2r, k2i = rhs(t + h / 2, yre + (h / 2) * k1r, yim + (h / 2) * k1i)
        k3r, k3i = rhs(t + h / 2, yre + (h / 2) * k2r, yim + (h / 2) * k2i)
        k4r, k4i = rhs(t + h, yre + h * k3r, yim + h * k3i)
        nre = yre + (h / 6) * (k1r + 2 * k2r + 2 * k3r + k4r)
        nim = yim + (h / 6) * (k1i + 2 * k2i + 2 * k3i + k4i)
        return nre, nim

    rec_times = np.linspace(0.0, T, n_records)
    norms = np.empty(n_records)
    means = np.empty(n_records)
    varis = np.empty(n_records)
    succ = np.empty(n_records)
    states: list[QuantumState] = []

    def record(ri: int, last_norm: float):
        p = re * re + im * im
        total = float(p.sum())
        mean = float(np.dot(p, diag)) / total
        var = float(np.dot(p, (diag - mean) ** 2)) / total
        norms[ri] = last_norm
        means[ri] = mean
        varis[ri] = var
        succ[ri] = float(p[ground_index]) / total
        if keep_states:
            states.append(QuantumState((re + 1j * im) / math.sqrt(total), n))

    # spectral-radius bound for the initial step size
    h_bound = float(np.max(np.abs(diag))) + n * delta + 1e-12
    dt_max = dt if dt is not None else T / 50.0
    dt_cur = min(dt_max, 0.5 / h_bound, T / 10.0)

    t = 0.0
    n_steps = 0
    drift = 0.0
    record(0, 1.0)
    for ri in range(1, n_records):
        t_goal = rec_times[ri]
        while t < t_goal - 1e-12 * T:
            h = min(dt_cur, t_goal - t)
            r1, i1 = rk4(t, h, re, im)
            rh, ih = rk4(t, h / 2, re, im)
            r2, i2 = rk4(t + h / 2, h / 2, rh, ih)
            err = math.sqrt(float(np.sum((r1 - r2) ** 2) + np.sum((i1 - i2) ** 2)))
            tol = step_tol * h
            if err <= 15.0 * tol:
                t += h
                nrm = math.sqrt(float(np.sum(r2 * r2) + np.sum(i2 * i2)))
                drift += abs(nrm - 1.0)
                if drift > norm_budget:
                    raise RuntimeError(
                        f"norm drift {drift:.3e} exceeded the {norm_budget} "
                        f"budget at t={t}")
                re = r2 / nrm
                im = i2 / nrm
                n_steps += 1
                grow = 2.0 if err == 0.0 else min(
                    2.0, max(0.3, 0.9 * (15.0 * tol / err) ** 0.2))
                dt_cur = min(dt_max, h * grow)
            else:
                dt_cur = h * max(0.1, 0.9 * (15.0 * tol / err) ** 0.2)
                if dt_cur < 1e-12 * T:
                    raise RuntimeError(
                        f"step size underflow at t={t} (local error {err:.3e})")
        record(ri, math.sqrt(float(np.sum(re * re) + np.sum(im * im))))

    final = QuantumState(re + 1j * im, n)
    return EvolveResult(
        times=rec_times,
        norms=norms,
        mean_energy=means,
        var_energy=varis,
        success=succ,
        final_state=final,
        success_probability=float(succ[-1]),
        ground_index=ground_index,
        ground_energy=ground_energy,
        n_steps=n_steps,
        norm_drift=drift,
        states=tuple(states) if keep_states else None,
    )
