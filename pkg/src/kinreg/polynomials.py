"""Sparse kinetic polynomials graded by the kinetic degree 2*bt + 3*|bx| + |bv|.

Coefficients are exact rationals (fractions.Fraction) so that the operator
calculus, particular solves, and kernel computations are exact; numerical
work (quadrature, projections) converts to float at the boundary.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping

import numpy as np

from .geometry import KineticPoint

Rat = Fraction


def _rat(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, float):
        return Fraction(c)  # exact binary value
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"cannot convert {c!r} to a rational coefficient")


@dataclass(frozen=True)
class MultiIndex:
    """beta = (beta_t, beta_x, beta_v) with kinetic degree 2bt + 3|bx| + |bv|."""

    bt: int
    bx: tuple[int, ...]
    bv: tuple[int, ...]

    def __post_init__(self):
        if self.bt < 0 or any(b < 0 for b in self.bx) or any(b < 0 for b in self.bv):
            raise ValueError("multi-index entries must be nonnegative")
        if len(self.bx) != len(self.bv):
            raise ValueError("bx and bv must have equal length")

    @property
    def n(self) -> int:
        return len(self.bx)

    @property
    def kinetic_degree(self) -> int:
        return 2 * self.bt + 3 * sum(self.bx) + sum(self.bv)


def mono(n: int, bt: int = 0, bx=None, bv=None) -> MultiIndex:
    bx = tuple(bx) if bx is not None else (0,) * n
    bv = tuple(bv) if bv is not None else (0,) * n
    return MultiIndex(bt, bx, bv)


class KineticPolynomial:
    """Finite map MultiIndex -> Fraction; zero coefficients are never stored."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[MultiIndex, object] | None = None):
        self.n = n
        clean: dict[MultiIndex, Fraction] = {}
        for beta, c in (terms or {}).items():
            if beta.n != n:
                raise ValueError("multi-index dimension mismatch")
            c = _rat(c)
            if c != 0:
                clean[beta] = c
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "KineticPolynomial":
        return cls(n, {})

    @classmethod
    def monomial(cls, n: int, coeff, bt: int = 0, bx=None, bv=None) -> "KineticPolynomial":
        return cls(n, {mono(n, bt, bx, bv): _rat(coeff)})

    @classmethod
    def constant(cls, n: int, coeff) -> "KineticPolynomial":
        return cls.monomial(n, coeff)

    # -- ring structure ----------------------------------------------------

    def __add__(self, other: "KineticPolynomial") -> "KineticPolynomial":
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        out = dict(self.terms)
        for beta, c in other.terms.items():
            out[beta] = out.get(beta, Fraction(0)) + c
        return KineticPolynomial(self.n, out)

    def __sub__(self, other: "KineticPolynomial") -> "KineticPolynomial":
        return self + (other * -1)

    def __mul__(self, other) -> "KineticPolynomial":
        if isinstance(other, KineticPolynomial):
            if self.n != other.n:
                raise ValueError("dimension mismatch")
            out: dict[MultiIndex, Fraction] = {}
            for b1, c1 in self.terms.items():
                for b2, c2 in other.terms.items():
                    beta = MultiIndex(
                        b1.bt + b2.bt,
                        tuple(a + b for a, b in zip(b1.bx, b2.bx)),
                        tuple(a + b for a, b in zip(b1.bv, b2.bv)),
                    )
                    out[beta] = out.get(beta, Fraction(0)) + c1 * c2
            return KineticPolynomial(self.n, out)
        c = _rat(other)
        return KineticPolynomial(self.n, {b: c0 * c for b, c0 in self.terms.items()})

    __rmul__ = __mul__

    def __neg__(self) -> "KineticPolynomial":
        return self * -1

    def __eq__(self, other) -> bool:
        return isinstance(other, KineticPolynomial) and self.n == other.n and self.terms == other.terms

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> float:
        """Max kinetic degree; -inf for the zero polynomial."""
        if not self.terms:
            return -math.inf
        return max(b.kinetic_degree for b in self.terms)

    def coefficient(self, beta: MultiIndex) -> Fraction:
        return self.terms.get(beta, Fraction(0))

    def homogeneous_components(self) -> dict[int, "KineticPolynomial"]:
        """Split into layers of fixed kinetic degree."""
        layers: dict[int, dict[MultiIndex, Fraction]] = {}
        for beta, c in self.terms.items():
            layers.setdefault(beta.kinetic_degree, {})[beta] = c
        return {d: KineticPolynomial(self.n, t) for d, t in sorted(layers.items())}

    def is_homogeneous(self, lam: int | None = None) -> bool:
        degs = {b.kinetic_degree for b in self.terms}
        if not degs:
            return True
        return len(degs) == 1 and (lam is None or degs == {lam})

    # -- calculus ----------------------------------------------------------

    def deriv_t(self) -> "KineticPolynomial":
        out = {}
        for b, c in self.terms.items():
            if b.bt > 0:
                out[MultiIndex(b.bt - 1, b.bx, b.bv)] = c * b.bt
        return KineticPolynomial(self.n, out)

    def deriv_x(self, i: int) -> "KineticPolynomial":
        out = {}
        for b, c in self.terms.items():
            if b.bx[i] > 0:
                bx = list(b.bx)
                bx[i] -= 1
                out[MultiIndex(b.bt, tuple(bx), b.bv)] = c * b.bx[i]
        return KineticPolynomial(self.n, out)

    def deriv_v(self, i: int) -> "KineticPolynomial":
        out = {}
        for b, c in self.terms.items():
            if b.bv[i] > 0:
                bv = list(b.bv)
                bv[i] -= 1
                out[MultiIndex(b.bt, b.bx, tuple(bv))] = c * b.bv[i]
        return KineticPolynomial(self.n, out)

    def transport(self) -> "KineticPolynomial":
        """(d_t + v . grad_x) applied once."""
        out = self.deriv_t()
        for i in range(self.n):
            vi = KineticPolynomial.monomial(self.n, 1, bv=tuple(1 if j == i else 0 for j in range(self.n)))
            out = out + vi * self.deriv_x(i)
        return out

    def eval(self, z: KineticPoint) -> float:
        if z.n != self.n:
            raise ValueError("dimension mismatch in eval")
        total = 0.0
        for b, c in self.terms.items():
            m = float(c) * z.t ** b.bt
            for xc, e in zip(z.x, b.bx):
                if e:
                    m *= xc ** e
            for vc, e in zip(z.v, b.bv):
                if e:
                    m *= vc ** e
            total += m
        return total

    def eval_exact(self, t, x: Iterable, v: Iterable) -> Fraction:
        """Evaluation in exact rational arithmetic."""
        t = _rat(t)
        x = [_rat(c) for c in x]
        v = [_rat(c) for c in v]
        total = Fraction(0)
        for b, c in self.terms.items():
            m = c * t ** b.bt
            for xc, e in zip(x, b.bx):
                m *= xc ** e
            for vc, e in zip(v, b.bv):
                m *= vc ** e
            total += m
        return total

    def pullback(self, z0: KineticPoint, r) -> "KineticPolynomial":
        """p_{z0,r}(z) = p(z0 o S_r z), exact when z0 and r are rational.

        Substitutes t -> t0 + r^2 t, x_i -> x0_i + r^3 x_i + r^2 t v0_i,
        v_i -> v0_i + r v_i; stays in the same kinetic-degree class.
        """
        r = _rat(r)
        n = self.n
        t_sub = KineticPolynomial(n, {mono(n): _rat(z0.t), mono(n, bt=1): r * r})
        x_subs, v_subs = [], []
        for i in range(n):
            ex = tuple(1 if j == i else 0 for j in range(n))
            x_subs.append(KineticPolynomial(n, {
                mono(n): _rat(z0.x[i]),
                mono(n, bx=ex): r ** 3,
                mono(n, bt=1): r * r * _rat(z0.v[i]),
            }))
            v_subs.append(KineticPolynomial(n, {mono(n): _rat(z0.v[i]), mono(n, bv=ex): r}))
        out = KineticPolynomial.zero(n)
        for b, c in self.terms.items():
            term = KineticPolynomial.constant(n, c)
            for _ in range(b.bt):
                term = term * t_sub
            for i, e in enumerate(b.bx):
                for _ in range(e):
                    term = term * x_subs[i]
            for i, e in enumerate(b.bv):
                for _ in range(e):
                    term = term * v_subs[i]
            out = out + term
        return out

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "terms": [
                {"bt": b.bt, "bx": list(b.bx), "bv": list(b.bv), "c": str(c)}
                for b, c in sorted(self.terms.items(), key=lambda kv: (kv[0].bt, kv[0].bx, kv[0].bv))
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, d: dict) -> "KineticPolynomial":
        n = int(d["n"])
        terms = {}
        for t in d["terms"]:
            beta = MultiIndex(int(t["bt"]), tuple(int(b) for b in t["bx"]), tuple(int(b) for b in t["bv"]))
            c = t["c"]
            terms[beta] = Fraction(c) if isinstance(c, str) else _rat(c)
        return cls(n, terms)

    @classmethod
    def from_json(cls, s: str) -> "KineticPolynomial":
        return cls.from_json_dict(json.loads(s))

    def __repr__(self):
        if not self.terms:
            return "KineticPolynomial(0)"
        bits = []
        for b, c in sorted(self.terms.items(), key=lambda kv: (kv[0].kinetic_degree, kv[0].bt, kv[0].bx, kv[0].bv)):
            mon = []
            if b.bt:
                mon.append(f"t^{b.bt}" if b.bt > 1 else "t")
            for i, e in enumerate(b.bx):
                if e:
                    mon.append(f"x{i}^{e}" if e > 1 else f"x{i}")
            for i, e in enumerate(b.bv):
                if e:
                    mon.append(f"v{i}^{e}" if e > 1 else f"v{i}")
            bits.append(f"{c}*" + "*".join(mon) if mon else f"{c}")
        return " + ".join(bits)


def transport_derivative(p: KineticPolynomial, beta: MultiIndex) -> KineticPolynomial:
    """D^beta p = (d_t + v.grad_x)^bt  dx^bx  dv^bv  p."""
    out = p
    for i, e in enumerate(beta.bv):
        for _ in range(e):
            out = out.deriv_v(i)
    for i, e in enumerate(beta.bx):
        for _ in range(e):
            out = out.deriv_x(i)
    for _ in range(beta.bt):
        out = out.transport()
    return out


# ---------------------------------------------------------------------------
# Operator and polynomial spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OperatorSpec:
    """L p = d_t p + v.grad_x p - a_ij d_vivj p + b.grad_v p + c p.

    a is a constant symmetric n x n matrix; b and c are optional constant
    lower-order coefficients.
    """

    a: tuple[tuple[Fraction, ...], ...]
    b: tuple[Fraction, ...] | None = None
    c: Fraction | None = None

    @classmethod
    def make(cls, a, b=None, c=None) -> "OperatorSpec":
        if isinstance(a, (int, float, Fraction, str)):
            a = [[a]]
        amat = tuple(tuple(_rat(x) for x in row) for row in a)
        n = len(amat)
        for row in amat:
            if len(row) != n:
                raise ValueError("a must be square")
        for i in range(n):
            for j in range(n):
                if amat[i][j] != amat[j][i]:
                    raise ValueError("a must be symmetric")
        bvec = tuple(_rat(x) for x in b) if b is not None else None
        if bvec is not None and len(bvec) != n:
            raise ValueError("b has wrong length")
        return cls(amat, bvec, _rat(c) if c is not None else None)

    @property
    def n(self) -> int:
        return len(self.a)

    def ellipticity_bounds(self) -> tuple[float, float]:
        """(lambda, Lambda) from the eigenvalues of a; a must be positive definite."""
        w = np.linalg.eigvalsh(np.array([[float(x) for x in row] for row in self.a]))
        return float(w[0]), float(w[-1])


def kolmogorov_operator(n: int) -> OperatorSpec:
    """The prototype operator with a = identity, b = 0, c = 0."""
    a = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    return OperatorSpec.make(a)


def apply_operator(op: OperatorSpec, p: KineticPolynomial) -> KineticPolynomial:
    if op.n != p.n:
        raise ValueError("dimension mismatch between operator and polynomial")
    out = p.transport()
    for i in range(op.n):
        for j in range(op.n):
            if op.a[i][j] != 0:
                out = out - KineticPolynomial.constant(p.n, op.a[i][j]) * p.deriv_v(i).deriv_v(j)
    if op.b is not None:
        for i in range(op.n):
            if op.b[i] != 0:
                out = out + KineticPolynomial.constant(p.n, op.b[i]) * p.deriv_v(i)
    if op.c is not None and op.c != 0:
        out = out + KineticPolynomial.constant(p.n, op.c) * p
    return out


class TricomiMarker:
    """Placeholder basis element standing for the Tricomi obstruction
    function T_{A,3}(x_n, v_n) inside an augmented polynomial space."""

    __slots__ = ("A", "normal_axis")

    def __init__(self, A: float, normal_axis: int = 0):
        if A <= 0:
            raise ValueError("A must be positive")
        self.A = float(A)
        self.normal_axis = normal_axis

    def __repr__(self):
        return f"TricomiMarker(A={self.A}, axis={self.normal_axis})"


@dataclass(frozen=True)
class PolySpaceSpec:
    """Finite-dimensional approximation space on phase space.

    kind 'full': all kinetic polynomials of degree <= k.
    kind 'specular': the subspace with trace at {x_n = 0} even in v_n.
    kind 'tricomi_augmented': specular space of degree 5 plus the Tricomi
    obstruction function (requires k = 5 and A > 0).
    """

    kind: str
    k: int
    n: int = 1
    normal_axis: int = 0
    A: float | None = None

    def __post_init__(self):
        if self.kind not in ("full", "specular", "tricomi_augmented"):
            raise ValueError(f"unknown space kind {self.kind!r}")
        if self.kind == "tricomi_augmented":
            if self.k != 5:
                raise ValueError("tricomi_augmented space requires k = 5")
            if self.A is None or self.A <= 0:
                raise ValueError("tricomi_augmented space requires A > 0")


def full_space(k: int, n: int = 1) -> PolySpaceSpec:
    return PolySpaceSpec("full", k, n)


def specular_space(k: int, n: int = 1, normal_axis: int | None = None) -> PolySpaceSpec:
    axis = (n - 1) if normal_axis is None else normal_axis
    return PolySpaceSpec("specular", k, n, axis)


def tricomi_augmented_space(A: float, n: int = 1, normal_axis: int | None = None) -> PolySpaceSpec:
    axis = (n - 1) if normal_axis is None else normal_axis
    return PolySpaceSpec("tricomi_augmented", 5, n, axis, float(A))


def _indices_up_to(k: int, n: int):
    def vecs(total_max, length):
        if length == 0:
            yield ()
            return
        for first in range(total_max + 1):
            for rest in vecs(total_max - first, length - 1):
                yield (first,) + rest

    out = []
    for bt in range(k // 2 + 1):
        rem_x = (k - 2 * bt) // 3
        for bx in vecs(rem_x, n):
            rem_v = k - 2 * bt - 3 * sum(bx)
            for bv in vecs(rem_v, n):
                out.append(MultiIndex(bt, bx, bv))
    out.sort(key=lambda b: (b.kinetic_degree, b.bt, b.bx, b.bv))
    return out


def space_basis(spec: PolySpaceSpec) -> list:
    """Monomial basis of the space; the augmented space appends a marker."""
    idx = _indices_up_to(spec.k, spec.n)
    if spec.kind == "full":
        keep = idx
    else:
        ax = spec.normal_axis
        keep = [b for b in idx if b.bx[ax] >= 1 or b.bv[ax] % 2 == 0]
    basis: list = [KineticPolynomial(spec.n, {b: Fraction(1)}) for b in keep]
    if spec.kind == "tricomi_augmented":
        basis.append(TricomiMarker(spec.A, spec.normal_axis))
    return basis


def space_dim(spec: PolySpaceSpec) -> int:
    return len(space_basis(spec))


# ---------------------------------------------------------------------------
# Exact linear algebra over the rationals
# ---------------------------------------------------------------------------


def _rref(M: list[list[Fraction]]):
    """In-place reduced row echelon form; returns pivot column list."""
    rows = len(M)
    cols = len(M[0]) if rows else 0
    pivots = []
    rank = 0
    for col in range(cols):
        pr = None
        for r in range(rank, rows):
            if M[r][col] != 0:
                pr = r
                break
        if pr is None:
            continue
        M[rank], M[pr] = M[pr], M[rank]
        pv = M[rank][col]
        M[rank] = [x / pv for x in M[rank]]
        for r in range(rows):
            if r != rank and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[rank])]
        pivots.append(col)
        rank += 1
        if rank == rows:
            break
    return pivots


def solve_rational(A: list[list[Fraction]], rhs: list[Fraction]):
    """Solve A x = rhs exactly. Returns (particular, nullspace_basis) or
    (None, nullspace_basis) when inconsistent."""
    rows = len(A)
    cols = len(A[0]) if rows else 0
    aug = [list(A[r]) + [rhs[r]] for r in range(rows)]
    pivots = _rref(aug)
    for r in range(len(pivots), rows):
        if aug[r][cols] != 0:
            return None, _nullspace_from_rref(aug, pivots, cols)
    if pivots and pivots[-1] == cols:
        return None, _nullspace_from_rref(aug, pivots[:-1], cols)
    x = [Fraction(0)] * cols
    for r, col in enumerate(pivots):
        x[col] = aug[r][cols]
    return x, _nullspace_from_rref(aug, pivots, cols)


def _nullspace_from_rref(aug, pivots, cols):
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * cols
        vec[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            vec[pc] = -aug[r][fc]
        basis.append(vec)
    return basis


def _min_norm(x: list[Fraction], null: list[list[Fraction]]):
    """Project a particular solution to the minimal Euclidean norm one."""
    if not null:
        return x
    m = len(null)
    G = [[sum(a * b for a, b in zip(null[i], null[j])) for j in range(m)] for i in range(m)]
    rhs = [sum(a * b for a, b in zip(null[i], x)) for i in range(m)]
    coef, _ = solve_rational(G, rhs)
    out = list(x)
    for i in range(m):
        for j in range(len(x)):
            out[j] -= coef[i] * null[i][j]
    return out


# ---------------------------------------------------------------------------
# Particular solutions and kernels
# ---------------------------------------------------------------------------


def particular_solve_1d(lambda1: int, lambda2: int, amp, A) -> KineticPolynomial:
    """Homogeneous polynomial P of degree 3*lambda1 + lambda2 + 2 with
    (v d_x - A d_vv) P = amp * x^lambda1 * v^lambda2, exactly.

    Built by the induction on lambda1 whose base case is
    P = -amp / (A (lambda2+2)(lambda2+1)) * v^(lambda2+2).
    """
    if lambda1 < 0 or lambda2 < 0:
        raise ValueError("exponents must be nonnegative")
    amp = _rat(amp)
    A = _rat(A)
    if A <= 0:
        raise ValueError("A must be positive")
    if amp == 0:
        return KineticPolynomial.zero(1)
    base = -amp / (A * (lambda2 + 2) * (lambda2 + 1))
    if lambda1 == 0:
        return KineticPolynomial.monomial(1, base, bv=(lambda2 + 2,))
    head = KineticPolynomial.monomial(1, base, bx=(lambda1,), bv=(lambda2 + 2,))
    # L(head) = amp x^l1 v^l2 + l1*base * x^(l1-1) v^(l2+3); cancel the tail
    tail_amp = Fraction(lambda1) * base
    return head - particular_solve_1d(lambda1 - 1, lambda2 + 3, tail_amp, A)


def _operator_matrix(op: OperatorSpec, basis: list[KineticPolynomial], image_idx: list[MultiIndex]):
    pos = {b: i for i, b in enumerate(image_idx)}
    M = [[Fraction(0)] * len(basis) for _ in range(len(image_idx))]
    for j, q in enumerate(basis):
        Lq = apply_operator(op, q)
        for beta, c in Lq.terms.items():
            if beta not in pos:
                raise ValueError("operator image leaves the ambient space")
            M[pos[beta]][j] = c
    return M


def particular_solve_general(op: OperatorSpec, p: KineticPolynomial,
                             degree_cap_extra: int = 4) -> KineticPolynomial:
    """Solve apply_operator(op, P) = p exactly on graded monomial bases.

    Tries P of degree deg(p)+2 first, then deg(p)+4; raises if both linear
    systems are inconsistent. Underdetermined solves return the minimal
    Euclidean norm coefficient vector.
    """
    if p.is_zero():
        return KineticPolynomial.zero(p.n)
    dp = int(p.degree())
    last_err = None
    for extra in (2, degree_cap_extra):
        k = dp + extra
        basis_idx = _indices_up_to(k, p.n)
        basis = [KineticPolynomial(p.n, {b: Fraction(1)}) for b in basis_idx]
        image_idx = _indices_up_to(k, p.n)
        M = _operator_matrix(op, basis, image_idx)
        rhs = [p.coefficient(b) for b in image_idx]
        x, null = solve_rational(M, rhs)
        if x is None:
            last_err = f"no solution of degree <= {k}"
            continue
        x = _min_norm(x, null)
        terms = {b: c for b, c in zip(basis_idx, x) if c != 0}
        return KineticPolynomial(p.n, terms)
    raise ValueError(f"particular_solve_general failed: {last_err}")


def kernel_basis(op: OperatorSpec, spec: PolySpaceSpec) -> list[KineticPolynomial]:
    """Exact nullspace of the operator restricted to span(spec)."""
    if op.b is not None and any(c != 0 for c in op.b):
        raise ValueError("kernel_basis requires b = 0")
    if op.c is not None and op.c != 0:
        raise ValueError("kernel_basis requires c = 0")
    basis = space_basis(spec)
    if any(isinstance(q, TricomiMarker) for q in basis):
        raise ValueError("kernel_basis is defined for polynomial spaces only")
    image_idx = _indices_up_to(spec.k, spec.n)
    M = _operator_matrix(op, basis, image_idx)
    aug = [list(row) for row in M]
    pivots = _rref(aug)
    null = _nullspace_from_rref(aug, pivots, len(basis))
    out = []
    for vec in null:
        q = KineticPolynomial.zero(spec.n)
        for c, b in zip(vec, basis):
            if c != 0:
                q = q + b * c
        out.append(q)
    return out


# ---------------------------------------------------------------------------
# L^2 projection over kinetic cylinders (n = 1, numerical)
# ---------------------------------------------------------------------------


def _basis_evaluator(q) -> Callable[[KineticPoint], float]:
    if isinstance(q, KineticPolynomial):
        return q.eval
    if isinstance(q, TricomiMarker):
        from .tricomi import TricomiParams, eval_tricomi

        params = TricomiParams(A=q.A, lam=3)

        def ev(z: KineticPoint, _p=params, _ax=q.normal_axis):
            return eval_tricomi(_p, z.x[_ax], z.v[_ax])

        return ev
    raise TypeError(f"cannot evaluate basis element {q!r}")


def cylinder_quadrature(z0: KineticPoint, r: float, nodes: int,
                        half_space: bool = True):
    """Tensor Gauss-Legendre nodes/weights on H_r(z0), n = 1.

    The x integration runs over the moving interval
    x in (x0 + (t-t0) v0 - r^3, x0 + (t-t0) v0 + r^3), clipped at x = 0
    when half_space is set.
    """
    if z0.n != 1:
        raise ValueError("cylinder quadrature implemented for n = 1")
    gl_x, gl_w = np.polynomial.legendre.leggauss(nodes)
    t0, x0, v0 = z0.t, z0.x[0], z0.v[0]
    pts = []
    wts = []
    for ti, wi in zip(gl_x, gl_w):
        t = t0 + r * r * ti
        wt_t = r * r * wi
        xc = x0 + (t - t0) * v0
        lo, hi = xc - r ** 3, xc + r ** 3
        if half_space:
            lo = max(lo, 0.0)
        if hi <= lo:
            continue
        for xj, wj in zip(gl_x, gl_w):
            x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xj
            wt_x = 0.5 * (hi - lo) * wj
            for vk, wk in zip(gl_x, gl_w):
                v = v0 + r * vk
                pts.append(KineticPoint(t, x, v))
                wts.append(wt_t * wt_x * r * wk)
    return pts, np.array(wts)


def l2_project(f: Callable[[KineticPoint], float], z0: KineticPoint, r: float,
               spec: PolySpaceSpec, quad_order: int | None = None,
               half_space: bool = True) -> np.ndarray:
    """Coefficients of the L^2(H_r(z0)) projection of f onto span(spec).

    Gram solve on tensor Gauss-Legendre quadrature; raises on a singular
    Gram matrix (degenerate domain).
    """
    if spec.n != 1:
        raise ValueError("l2_project implemented for n = 1")
    nodes = quad_order if quad_order is not None else spec.k + 2
    nodes = max(nodes, spec.k + 1)
    pts, w = cylinder_quadrature(z0, r, nodes, half_space=half_space)
    if len(pts) == 0:
        raise ValueError("degenerate projection domain")
    basis = space_basis(spec)
    B = np.empty((len(pts), len(basis)))
    for j, q in enumerate(basis):
        ev = _basis_evaluator(q)
        B[:, j] = [ev(z) for z in pts]
    fv = np.array([f(z) for z in pts])
    scal = np.sqrt(np.maximum((B * B * w[:, None]).sum(axis=0), 1e-300))
    Bs = B / scal
    G = (Bs * w[:, None]).T @ Bs
    rhs = (Bs * w[:, None]).T @ fv
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > 1e13:
        raise ValueError(f"singular Gram matrix (cond={cond:.2e}) on degenerate domain")
    coef = np.linalg.solve(G, rhs)
    return coef / scal
