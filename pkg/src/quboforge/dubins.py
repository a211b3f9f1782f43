"""Shortest curvature-bounded paths between oriented planar configurations.

A vehicle moving at constant speed v with maximum turn rate omega_max has a
minimum turning radius r = v / omega_max.  The shortest path between two
(x, y, heading) configurations is one of six words made of left arcs (L),
right arcs (R), and straight segments (S): LSL, RSR, LSR, RSL, RLR, LRL.
Each candidate is evaluated in closed form and the shortest feasible one is
returned; degenerate arcs are resolved numerically with a 1e-9 feasibility
tolerance.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# slack accepted when testing word feasibility (squared lengths, cosines)
FEAS_TOL = 1e-9


def mod2pi(x: float) -> float:
    """Reduce an angle to [0, 2*pi)."""
    y = x - TWO_PI * math.floor(x / TWO_PI)
    if y >= TWO_PI:
        y -= TWO_PI
    return y


@dataclass(frozen=True)
class TargetTriple:
    """Oriented waypoint (x, y, theta) plus the vehicle speed and turn rate."""

    x: float
    y: float
    theta: float
    v: float = 1.0
    omega_max: float = 1.0

    def __post_init__(self) -> None:
        if not (self.v > 0):
            raise ValueError("speed v must be > 0")
        if not (self.omega_max > 0):
            raise ValueError("turn rate omega_max must be > 0")
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", mod2pi(float(self.theta)))
        object.__setattr__(self, "v", float(self.v))
        object.__setattr__(self, "omega_max", float(self.omega_max))

    @property
    def r(self) -> float:
        """Minimum turning radius."""
        return self.v / self.omega_max

    @classmethod
    def with_radius(cls, x: float, y: float, theta: float, r: float) -> TargetTriple:
        """Build a triple directly from a turning radius."""
        if not (r > 0):
            raise ValueError("turn radius must be > 0")
        return cls(x, y, theta, v=float(r), omega_max=1.0)


@dataclass(frozen=True)
class DubinsPath:
    """One feasible word: segment kinds with lengths in world units."""

    word: str
    r: float
    params: tuple[float, float, float]  # arc angles / straight run, in units of r

    @property
    def length(self) -> float:
        return self.r * (self.params[0] + self.params[1] + self.params[2])

    @property
    def segments(self) -> tuple[tuple[str, float], ...]:
        return tuple(
            (kind, self.r * run) for kind, run in zip(self.word, self.params)
        )


# Closed forms take the normalized problem: start (0, 0, a), goal (d, 0, b),
# unit turning radius.  Each returns (t, p, q) segment runs or None when the
# word is infeasible.  The L-leading words follow from the R-leading ones by
# reflecting the plane across the x axis, which negates headings and swaps
# the two turn senses.


def _rsr(d: float, a: float, b: float):
    tmp = math.atan2(math.cos(a) - math.cos(b), d - math.sin(a) + math.sin(b))
    psq = 2.0 + d * d - 2.0 * math.cos(a - b) + 2.0 * d * (math.sin(b) - math.sin(a))
    if psq < -FEAS_TOL:
        return None
    p = math.sqrt(max(psq, 0.0))
    return mod2pi(a - tmp), p, mod2pi(tmp - b)


def _rsl(d: float, a: float, b: float):
    psq = d * d - 2.0 + 2.0 * math.cos(a - b) - 2.0 * d * (math.sin(a) + math.sin(b))
    if psq < -FEAS_TOL:
        return None
    p = math.sqrt(max(psq, 0.0))
    tmp = math.atan2(
        math.cos(a) + math.cos(b), d - math.sin(a) - math.sin(b)
    ) - math.atan2(2.0, p)
    return mod2pi(a - tmp), p, mod2pi(b - tmp)


def _rlr(d: float, a: float, b: float):
    # middle circle subtends gamma at its center; feasible iff centers <= 4r
    c = (
        6.0 - d * d + 2.0 * math.cos(a - b) + 2.0 * d * (math.sin(a) - math.sin(b))
    ) / 8.0
    if abs(c) > 1.0 + FEAS_TOL:
        return None
    gamma = math.acos(min(1.0, max(-1.0, c)))
    p = mod2pi(TWO_PI - gamma)
    phi = math.atan2(math.cos(a) - math.cos(b), d - math.sin(a) + math.sin(b))
    t = mod2pi(a - phi + 0.5 * p)
    q = mod2pi(a - b - t + p)
    return t, p, q


def _mirrored(form):
    def inner(d: float, a: float, b: float):
        return form(d, -a, -b)

    return inner


_WORDS: tuple[tuple[str, object], ...] = (
    ("LSL", _mirrored(_rsr)),
    ("RSR", _rsr),
    ("LSR", _mirrored(_rsl)),
    ("RSL", _rsl),
    ("RLR", _rlr),
    ("LRL", _mirrored(_rlr)),
)


def _check_pair(a: TargetTriple, b: TargetTriple) -> float:
    ra, rb = a.r, b.r
    if not math.isclose(ra, rb, rel_tol=1e-12, abs_tol=0.0):
        raise ValueError("both configurations must share one turn radius")
    return ra


def dubins_candidates(a: TargetTriple, b: TargetTriple) -> tuple[DubinsPath, ...]:
    """All feasible words for the pair, in fixed word order."""
    r = _check_pair(a, b)
    dx = b.x - a.x
    dy = b.y - a.y
    psi = math.atan2(dy, dx)
    d = math.hypot(dx, dy) / r
    alpha = mod2pi(a.theta - psi)
    beta = mod2pi(b.theta - psi)
    out = []
    for word, form in _WORDS:
        res = form(d, alpha, beta)
        if res is not None:
            out.append(DubinsPath(word, r, (res[0], res[1], res[2])))
    return tuple(out)


def dubins_path(a: TargetTriple, b: TargetTriple) -> DubinsPath:
    """Shortest of the six candidate words."""
    cands = dubins_candidates(a, b)
    return min(cands, key=lambda c: c.length)


def dubins_distance(a: TargetTriple, b: TargetTriple) -> float:
    """Length of the shortest curvature-bounded path from a to b."""
    _check_pair(a, b)
    if a.x == b.x and a.y == b.y and a.theta == b.theta:
        return 0.0
    return dubins_path(a, b).length


def dubins_matrix(targets) -> np.ndarray:
    """Pairwise distance matrix; entry [i, j] is the path length i -> j."""
    ts = list(targets)
    n = len(ts)
    d = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(n):
            if i != j:
                d[i, j] = dubins_distance(ts[i], ts[j])
    return d


def targets_from_csv(text: str) -> tuple[TargetTriple, ...]:
    """Parse rows of x, y, theta, r; one optional header row is skipped."""
    out = []
    for row in csv.reader(io.StringIO(text)):
        cells = [c.strip() for c in row if c.strip()]
        if not cells:
            continue
        try:
            vals = [float(c) for c in cells]
        except ValueError:
            if not out:
                continue  # header line
            raise ValueError(f"non-numeric target row: {row!r}") from None
        if len(vals) != 4:
            raise ValueError("each target row needs exactly x, y, theta, r")
        out.append(TargetTriple.with_radius(vals[0], vals[1], vals[2], vals[3]))
    if not out:
        raise ValueError("no target rows found")
    return tuple(out)
