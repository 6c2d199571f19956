"""Phase-space geometry: kinetic group, cylinders, and the kinetic distance.

Points z = (t, x, v) carry the non-commutative group law

    (s, y, w) o (t, x, v) = (s + t, x + y + t*w, v + w)

and the anisotropic scaling S_r(t, x, v) = (r^2 t, r^3 x, r v). Cylinders
Q_r(z0) are the balls of this geometry; the distance d_ell is the smallest
r such that both points lie in a common cylinder, computed here by
bisection over r with a convex feasibility test in the slide velocity w.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

def _as_tuple(u) -> tuple[float, ...]:
    if isinstance(u, (int, float)):
        return (float(u),)
    return tuple(float(c) for c in u)


@dataclass(frozen=True)
class KineticPoint:
    """A phase-space event z = (t, x, v) with dim(x) = dim(v) = n >= 1."""

    t: float
    x: tuple[float, ...]
    v: tuple[float, ...]

    def __init__(self, t, x, v):
        object.__setattr__(self, "t", float(t))
        object.__setattr__(self, "x", _as_tuple(x))
        object.__setattr__(self, "v", _as_tuple(v))
        if len(self.x) != len(self.v):
            raise ValueError(f"x has dim {len(self.x)} but v has dim {len(self.v)}")
        if len(self.x) < 1:
            raise ValueError("dimension must be >= 1")
        for c in (self.t, *self.x, *self.v):
            if not math.isfinite(c):
                raise ValueError("non-finite component in kinetic point")

    @property
    def n(self) -> int:
        return len(self.x)

    def norm(self) -> float:
        """Euclidean norm of the raw coordinate vector (t, x, v)."""
        return math.sqrt(self.t ** 2 + sum(c * c for c in self.x) + sum(c * c for c in self.v))

    def __iter__(self):
        yield self.t
        yield self.x
        yield self.v


ORIGIN_1D = KineticPoint(0.0, 0.0, 0.0)


def origin(n: int) -> KineticPoint:
    return KineticPoint(0.0, (0.0,) * n, (0.0,) * n)


def compose(a: KineticPoint, b: KineticPoint) -> KineticPoint:
    """Group law a o b; not commutative."""
    if a.n != b.n:
        raise ValueError("dimension mismatch in compose")
    x = tuple(xb + xa + b.t * va for xa, xb, va in zip(a.x, b.x, a.v))
    v = tuple(vb + va for va, vb in zip(a.v, b.v))
    return KineticPoint(a.t + b.t, x, v)


def inverse(z: KineticPoint) -> KineticPoint:
    """Group inverse: compose(inverse(z), z) = identity = (0, 0, 0)."""
    x = tuple(-xc + z.t * vc for xc, vc in zip(z.x, z.v))
    return KineticPoint(-z.t, x, tuple(-vc for vc in z.v))


def scale(r: float, z: KineticPoint) -> KineticPoint:
    """S_r z = (r^2 t, r^3 x, r v), r > 0."""
    if r <= 0:
        raise ValueError(f"scale factor must be positive, got {r}")
    return KineticPoint(r * r * z.t, tuple(r ** 3 * c for c in z.x), tuple(r * c for c in z.v))


def frame_map(z0: KineticPoint, r: float, z: KineticPoint) -> KineticPoint:
    """z0 o S_r z, the zoom-in frame centered at z0 with scale r."""
    return compose(z0, scale(r, z))


def frame_unmap(z0: KineticPoint, r: float, z: KineticPoint) -> KineticPoint:
    """Exact inverse of frame_map: S_{1/r}(z0^{-1} o z)."""
    return scale(1.0 / r, compose(inverse(z0), z))


class Sided(Enum):
    TWO_SIDED = "two_sided"
    ONE_SIDED_PAST = "one_sided_past"


@dataclass(frozen=True)
class CylinderSpec:
    """Kinetic cylinder Q_r(z0) (two-sided) or Q~_r(z0) (past)."""

    center: KineticPoint
    radius: float
    sided: Sided = Sided.TWO_SIDED

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("cylinder radius must be positive")


def cylinder_contains(c: CylinderSpec, z: KineticPoint) -> bool:
    """Strict membership; one-sided cylinders include the top time t = t0."""
    z0, r = c.center, c.radius
    dt = z.t - z0.t
    if c.sided is Sided.TWO_SIDED:
        if not abs(dt) < r * r:
            return False
    else:
        if not (-r * r < dt <= 0.0):
            return False
    for xc, x0c, v0c in zip(z.x, z0.x, z0.v):
        if not abs(xc - x0c - dt * v0c) < r ** 3:
            return False
    for vc, v0c in zip(z.v, z0.v):
        if not abs(vc - v0c) < r:
            return False
    return True


class Side(Enum):
    POSITIVE = "positive"


@dataclass(frozen=True)
class HalfSpaceDomain:
    """Spatial half-space {x[normal_axis] > 0} with an open time window.

    The outward unit normal on the boundary is -e_{normal_axis}; the grazing
    set gamma_0 is where the normal velocity vanishes.
    """

    normal_axis: int = 0
    side: Side = Side.POSITIVE
    time_window: tuple[float, float] = (-math.inf, math.inf)

    def contains_x(self, z: KineticPoint) -> bool:
        t0, t1 = self.time_window
        return z.x[self.normal_axis] > 0.0 and t0 < z.t < t1


def reflect_velocity(z: KineticPoint, d: HalfSpaceDomain) -> KineticPoint:
    """Specular reflection R_x v = v - 2 (v . n) n; flips v[normal_axis]."""
    k = d.normal_axis
    v = list(z.v)
    v[k] = -v[k]
    return KineticPoint(z.t, z.x, tuple(v))


def reflected_set_membership(c: CylinderSpec, d: HalfSpaceDomain, z: KineticPoint) -> bool:
    """Membership in S(Q) = Q union R(Q)."""
    return cylinder_contains(c, z) or cylinder_contains(c, reflect_velocity(z, d))


# ---------------------------------------------------------------------------
# Kinetic distance
# ---------------------------------------------------------------------------




def _feasible_1d(r: float, z1: KineticPoint, z2: KineticPoint) -> bool:
    dt = z1.t - z2.t
    if abs(dt) > r * r:
        return False
    dx = z1.x[0] - z2.x[0]
    lo = max(z1.v[0] - r, z2.v[0] - r)
    hi = min(z1.v[0] + r, z2.v[0] + r)
    if lo > hi:
        return False
    if dt == 0.0:
        return abs(dx) <= r ** 3
    # |dx - dt*w| <= r^3 is an interval in w
    wlo = (dx - r ** 3) / dt
    whi = (dx + r ** 3) / dt
    if wlo > whi:
        wlo, whi = whi, wlo
    return max(lo, wlo) <= min(hi, whi)


def _dist_to_lens(p, c1, c2, r: float) -> float:
    """Distance from p to B(c1, r) cap B(c2, r); the lens is assumed
    nonempty (|c1 - c2| <= 2r). Exact in any dimension: either one of the
    single-ball projections already lands in the other ball, or the
    nearest point sits on the rim sphere of the lens."""
    d1 = math.sqrt(sum((a - b) ** 2 for a, b in zip(p, c1)))
    d2 = math.sqrt(sum((a - b) ** 2 for a, b in zip(p, c2)))
    if d1 <= r and d2 <= r:
        return 0.0
    if d1 > r:
        q = [b + (a - b) * (r / d1) for a, b in zip(p, c1)]
        if math.sqrt(sum((a - b) ** 2 for a, b in zip(q, c2))) <= r + 1e-15:
            return d1 - r
    if d2 > r:
        q = [b + (a - b) * (r / d2) for a, b in zip(p, c2)]
        if math.sqrt(sum((a - b) ** 2 for a, b in zip(q, c1))) <= r + 1e-15:
            return d2 - r
    cc = math.sqrt(sum((a - b) ** 2 for a, b in zip(c1, c2)))
    if cc < 1e-300:
        return max(d1 - r, 0.0)
    u = [(a - b) / cc for a, b in zip(c2, c1)]
    m = [0.5 * (a + b) for a, b in zip(c1, c2)]
    rim = math.sqrt(max(r * r - 0.25 * cc * cc, 0.0))
    w = [a - b for a, b in zip(p, m)]
    axial = sum(a * b for a, b in zip(w, u))
    rad2 = max(sum(a * a for a in w) - axial * axial, 0.0)
    return math.sqrt(axial * axial + (math.sqrt(rad2) - rim) ** 2)


def _feasible_nd(r: float, z1: KineticPoint, z2: KineticPoint, tol: float) -> bool:
    """Level-set feasibility for n >= 2, decided exactly.

    The constraint set in w is the lens B(v1, r) cap B(v2, r) intersected
    with the transported ball B((x1-x2)/dt, r^3/|dt|); the intersection is
    nonempty iff the lens is nonempty and the ball center is within its
    radius of the lens, which the analytic lens distance decides without
    iteration (alternating projections stall exactly at the near-tangent
    levels the bisection needs to classify)."""
    del tol
    dt = z1.t - z2.t
    if abs(dt) > r * r:
        return False
    dv = math.sqrt(sum((a - b) ** 2 for a, b in zip(z1.v, z2.v)))
    if dv > 2.0 * r:
        return False
    dx = [a - b for a, b in zip(z1.x, z2.x)]
    if dt == 0.0:
        return math.sqrt(sum(c * c for c in dx)) <= r ** 3
    cx = [c / dt for c in dx]
    return _dist_to_lens(cx, z1.v, z2.v, r) <= abs(r ** 3 / dt)


def kinetic_distance(z1: KineticPoint, z2: KineticPoint, tol: float = 1e-9) -> float:
    """Kinetic distance d_ell(z1, z2) to within tol.

    d_ell = min over w of max(|t1-t2|^(1/2), |x1-x2-(t1-t2)w|^(1/3),
    |v1-w|, |v2-w|). The sublevel set in w at height r is an intersection
    of convex sets, so membership is decided exactly and the radius found
    by bisection. The minimizing w need not be unique; only feasibility of
    the level set is used.
    """
    if z1.n != z2.n:
        raise ValueError("dimension mismatch in kinetic_distance")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if z1 == z2:
        return 0.0
    dt = z1.t - z2.t
    dv = math.sqrt(sum((a - b) ** 2 for a, b in zip(z1.v, z2.v)))
    dxv2 = math.sqrt(sum((x1 - x2 - dt * w) ** 2 for x1, x2, w in zip(z1.x, z2.x, z2.v)))
    hi = max(math.sqrt(abs(dt)), dxv2 ** (1.0 / 3.0), dv) + tol  # w = v2 is feasible
    lo = max(math.sqrt(abs(dt)), dv / 2.0)

    def feasible(r: float) -> bool:
        if r <= 0.0:
            return False
        if z1.n == 1:
            return _feasible_1d(r, z1, z2)
        return _feasible_nd(r, z1, z2, tol)

    if lo > 0 and feasible(lo):
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def comparability_proxy(z1: KineticPoint, z2: KineticPoint) -> float:
    """max(|t1-t2|^(1/2), |x1-x2-(t1-t2)v1|^(1/3), |v1-v2|), the one-sided
    comparison quantity that matches d_ell up to a universal constant."""
    dt = z1.t - z2.t
    dx = math.sqrt(sum((x1 - x2 - dt * w) ** 2 for x1, x2, w in zip(z1.x, z2.x, z1.v)))
    dv = math.sqrt(sum((a - b) ** 2 for a, b in zip(z1.v, z2.v)))
    return max(math.sqrt(abs(dt)), dx ** (1.0 / 3.0), dv)
