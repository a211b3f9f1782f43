"""Sparse QUBO and Ising cost functions with exact interconversion.

Both forms describe the same quadratic energy over binary configurations:

* QUBO:  E(z) = offset + sum_i a_i z_i + sum_{i<j} b_ij z_i z_j,  z_i in {0, 1}
* Ising: E(s) = offset - sum_i h_i s_i + sum_{i<j} J_ij s_i s_j,  s_i in {-1, +1}

linked by the substitution s_i = 1 - 2 z_i.

Evaluation is canonical: the scalar evaluator and the vectorized enumerator
accumulate terms in one fixed order (offset, then linear terms by ascending
index, then quadratic terms by ascending key). Every term value is exact in
IEEE arithmetic (a coefficient times 0 or +-1), so the two paths return
bit-identical floats for the same configuration. Solvers rely on this to
report energies that are exactly comparable with brute-force enumeration.

Configuration index convention: big-endian, z_i = (m >> (N - 1 - i)) & 1,
so ascending index is lexicographic order on bit vectors and index 0 is the
all-zeros (all spins +1) configuration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

# Full enumeration is memory-bound; beyond this callers must chunk indices.
FULL_ENUM_LIMIT = 20

BIT = "bit"
SPIN = "spin"


def _validate_index(i: object, n: int) -> int:
    if not isinstance(i, (int, np.integer)):
        raise ValueError(f"variable index must be an integer, got {i!r}")
    i = int(i)
    if not 0 <= i < n:
        raise ValueError(f"variable index {i} out of range for {n} variables")
    return i


def _validate_coeff(c: object, what: str) -> float:
    c = float(c)
    if not np.isfinite(c):
        raise ValueError(f"{what} coefficient must be finite, got {c}")
    return c


def _normalize_linear(linear: dict, n: int) -> dict[int, float]:
    out: dict[int, float] = {}
    for i in sorted(int(k) for k in linear):
        c = _validate_coeff(linear[i], f"linear[{i}]")
        _validate_index(i, n)
        if c != 0.0:
            out[i] = c
    return out


def _normalize_quadratic(quadratic: dict, n: int) -> dict[tuple[int, int], float]:
    seen: dict[tuple[int, int], float] = {}
    for key, c in quadratic.items():
        i, j = key
        i = _validate_index(i, n)
        j = _validate_index(j, n)
        if i >= j:
            raise ValueError(f"quadratic key must satisfy i < j, got ({i}, {j})")
        if (i, j) in seen:
            raise ValueError(f"duplicate quadratic key ({i}, {j})")
        seen[(i, j)] = _validate_coeff(c, f"quadratic[({i},{j})]")
    out: dict[tuple[int, int], float] = {}
    for key in sorted(seen):
        if seen[key] != 0.0:
            out[key] = seen[key]
    return out


@dataclass(frozen=True, eq=False)
class Assignment:
    """A bit (0/1) or spin (-1/+1) configuration.

    The two forms interconvert exactly via s = 1 - 2z.
    """

    values: np.ndarray
    form: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.int8)
        if values.ndim != 1:
            raise ValueError("assignment values must be a 1-D vector")
        if self.form == BIT:
            if not np.all((values == 0) | (values == 1)):
                raise ValueError("bit assignment values must be 0 or 1")
        elif self.form == SPIN:
            if not np.all((values == -1) | (values == 1)):
                raise ValueError("spin assignment values must be -1 or +1")
        else:
            raise ValueError(f"form must be '{BIT}' or '{SPIN}', got {self.form!r}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    @classmethod
    def bits(cls, values) -> Assignment:
        return cls(np.asarray(values), BIT)

    @classmethod
    def spins(cls, values) -> Assignment:
        return cls(np.asarray(values), SPIN)

    def to_bit(self) -> Assignment:
        if self.form == BIT:
            return self
        return Assignment(((1 - self.values) // 2).astype(np.int8), BIT)

    def to_spin(self) -> Assignment:
        if self.form == SPIN:
            return self
        return Assignment((1 - 2 * self.values).astype(np.int8), SPIN)

    def index(self) -> int:
        """Big-endian configuration index of the bit form."""
        z = self.to_bit().values
        n = len(z)
        m = 0
        for i in range(n):
            m = (m << 1) | int(z[i])
        return m


def config_from_index(index: int, n: int, form: str = BIT) -> Assignment:
    """Decode a big-endian configuration index into an Assignment."""
    if not 0 <= index < (1 << n):
        raise ValueError(f"index {index} out of range for {n} variables")
    z = np.array([(index >> (n - 1 - i)) & 1 for i in range(n)], dtype=np.int8)
    a = Assignment(z, BIT)
    return a if form == BIT else a.to_spin()


@dataclass(frozen=True, eq=False)
class QuboModel:
    """E(z) = offset + sum_i linear[i] z_i + sum_{i<j} quadratic[(i,j)] z_i z_j."""

    num_vars: int
    linear: dict[int, float] = field(default_factory=dict)
    quadratic: dict[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        # zero variables is allowed: the model is then the constant offset
        if int(self.num_vars) < 0:
            raise ValueError("num_vars must be >= 0")
        object.__setattr__(self, "num_vars", int(self.num_vars))
        object.__setattr__(self, "linear", _normalize_linear(self.linear, self.num_vars))
        object.__setattr__(
            self, "quadratic", _normalize_quadratic(self.quadratic, self.num_vars)
        )
        object.__setattr__(self, "offset", _validate_coeff(self.offset, "offset"))

    @property
    def form(self) -> str:
        return BIT

    def energy(self, a: Assignment) -> float:
        return energy(self, a)


@dataclass(frozen=True, eq=False)
class IsingModel:
    """E(s) = offset - sum_i h[i] s_i + sum_{(i,j) in edges} J[(i,j)] s_i s_j."""

    num_spins: int
    h: np.ndarray = None
    J: dict[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        if int(self.num_spins) < 1:
            raise ValueError("num_spins must be >= 1")
        n = int(self.num_spins)
        object.__setattr__(self, "num_spins", n)
        h = np.zeros(n) if self.h is None else np.asarray(self.h, dtype=np.float64)
        if h.shape != (n,):
            raise ValueError(f"h must have shape ({n},), got {h.shape}")
        if not np.all(np.isfinite(h)):
            raise ValueError("h coefficients must be finite")
        h = h.copy()
        h.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "J", _normalize_quadratic(self.J, n))
        object.__setattr__(self, "offset", _validate_coeff(self.offset, "offset"))

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(self.J.keys())

    @property
    def form(self) -> str:
        return SPIN

    def energy(self, a: Assignment) -> float:
        return energy(self, a)


def _check_assignment(m: QuboModel | IsingModel, a: Assignment) -> None:
    n = m.num_vars if isinstance(m, QuboModel) else m.num_spins
    if len(a) != n:
        raise ValueError(f"assignment length {len(a)} does not match model size {n}")
    want = BIT if isinstance(m, QuboModel) else SPIN
    if a.form != want:
        raise ValueError(
            f"assignment form {a.form!r} does not match model form {want!r}"
        )


def energy(m: QuboModel | IsingModel, a: Assignment) -> float:
    """Exact energy of one configuration, in the canonical accumulation order."""
    _check_assignment(m, a)
    x = a.values
    e = float(m.offset)
    if isinstance(m, QuboModel):
        for i, c in m.linear.items():
            e = e + c * float(x[i])
        for (i, j), c in m.quadratic.items():
            e = e + c * float(x[i]) * float(x[j])
    else:
        for i in range(m.num_spins):
            e = e + (-m.h[i]) * float(x[i])
        for (i, j), c in m.J.items():
            e = e + c * float(x[i]) * float(x[j])
    return e


def _bit_column(indices: np.ndarray, i: int, n: int) -> np.ndarray:
    return ((indices >> (n - 1 - i)) & 1).astype(np.float64)


def all_energies(
    m: QuboModel | IsingModel, indices: np.ndarray | None = None
) -> np.ndarray:
    """Canonical energies of many configurations at once.

    With no ``indices``, enumerates all 2^N configurations (N <= 20).
    Accumulation order per configuration matches :func:`energy` exactly,
    so ``all_energies(m)[k] == energy(m, config_from_index(k, n, ...))``
    bit-for-bit.
    """
    n = m.num_vars if isinstance(m, QuboModel) else m.num_spins
    if indices is None:
        if n > FULL_ENUM_LIMIT:
            raise ValueError(
                f"full enumeration limited to {FULL_ENUM_LIMIT} variables; "
                f"pass explicit index chunks for n={n}"
            )
        indices = np.arange(1 << n, dtype=np.int64)
    else:
        indices = np.asarray(indices, dtype=np.int64)
    e = np.full(indices.shape, float(m.offset))
    if isinstance(m, QuboModel):
        for i, c in m.linear.items():
            e += c * _bit_column(indices, i, n)
        for (i, j), c in m.quadratic.items():
            e += c * (_bit_column(indices, i, n) * _bit_column(indices, j, n))
    else:
        for i in range(n):
            s_i = 1.0 - 2.0 * _bit_column(indices, i, n)
            e += (-m.h[i]) * s_i
        for (i, j), c in m.J.items():
            s_i = 1.0 - 2.0 * _bit_column(indices, i, n)
            s_j = 1.0 - 2.0 * _bit_column(indices, j, n)
            e += c * (s_i * s_j)
    return e


def qubo_to_ising(q: QuboModel) -> IsingModel:
    """Convert via z = (1 - s)/2. Energies agree on every configuration."""
    n = q.num_vars
    h = np.zeros(n)
    J: dict[tuple[int, int], float] = {}
    offset = float(q.offset)
    for i, a in q.linear.items():
        # a*z = a/2 - (a/2) s
        h[i] += a / 2.0
        offset += a / 2.0
    for (i, j), b in q.quadratic.items():
        # b*z_i*z_j = b/4 (1 - s_i - s_j + s_i s_j)
        J[(i, j)] = J.get((i, j), 0.0) + b / 4.0
        h[i] += b / 4.0
        h[j] += b / 4.0
        offset += b / 4.0
    return IsingModel(num_spins=n, h=h, J=J, offset=offset)


def ising_to_qubo(m: IsingModel) -> QuboModel:
    """Convert via s = 1 - 2z. Energies agree on every configuration."""
    n = m.num_spins
    linear = np.zeros(n)
    quadratic: dict[tuple[int, int], float] = {}
    offset = float(m.offset)
    for i in range(n):
        # -h*s = -h + 2h z
        if m.h[i] != 0.0:
            linear[i] += 2.0 * m.h[i]
            offset -= m.h[i]
    for (i, j), c in m.J.items():
        # J*s_i*s_j = J (1 - 2 z_i - 2 z_j + 4 z_i z_j)
        quadratic[(i, j)] = quadratic.get((i, j), 0.0) + 4.0 * c
        linear[i] -= 2.0 * c
        linear[j] -= 2.0 * c
        offset += c
    lin = {i: linear[i] for i in range(n) if linear[i] != 0.0}
    return QuboModel(num_vars=n, linear=lin, quadratic=quadratic, offset=offset)


def model_to_dict(m: QuboModel | IsingModel) -> dict:
    """JSON-ready dict: {"vars", "linear", "quadratic", "offset", "form"}."""
    if isinstance(m, QuboModel):
        return {
            "vars": m.num_vars,
            "linear": {str(i): c for i, c in m.linear.items()},
            "quadratic": {f"{i},{j}": c for (i, j), c in m.quadratic.items()},
            "offset": m.offset,
            "form": "qubo",
        }
    return {
        "vars": m.num_spins,
        "linear": {str(i): float(m.h[i]) for i in range(m.num_spins) if m.h[i] != 0.0},
        "quadratic": {f"{i},{j}": c for (i, j), c in m.J.items()},
        "offset": m.offset,
        "form": "ising",
    }


def model_from_dict(d: dict) -> QuboModel | IsingModel:
    n = int(d["vars"])
    form = d.get("form", "qubo")
    linear = {int(k): float(v) for k, v in d.get("linear", {}).items()}
    quadratic = {}
    for k, v in d.get("quadratic", {}).items():
        i, j = (int(part) for part in k.split(","))
        quadratic[(i, j)] = float(v)
    offset = float(d.get("offset", 0.0))
    if form == "qubo":
        return QuboModel(num_vars=n, linear=linear, quadratic=quadratic, offset=offset)
    if form == "ising":
        h = np.zeros(n)
        for i, v in linear.items():
            h[i] = v
        return IsingModel(num_spins=n, h=h, J=quadratic, offset=offset)
    raise ValueError(f"unknown model form {form!r}")


def model_to_json(m: QuboModel | IsingModel) -> str:
    return json.dumps(model_to_dict(m), indent=2, sort_keys=True)


def model_from_json(text: str) -> QuboModel | IsingModel:
    return model_from_dict(json.loads(text))
