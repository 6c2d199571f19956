"""Constructive classification of stationary half-space solutions in 1D.

For v f_x - A f_vv = p on {x > 0} with the specular condition
f(0, v) = f(0, -v) and polynomial growth, every homogeneous layer of p
yields either a polynomial solution or a polynomial plus one Tricomi
term. The dichotomy is decided by the v^(lam+2) coefficient c of the
particular solution's boundary trace:

  * lam even: the trace is automatically even; polynomial.
  * lam = 1 mod 6 / 5 mod 6: one Kummer basis solution is itself a
    polynomial and removes the trace; polynomial.
  * lam = 3 mod 6: no polynomial correction exists; c != 0 forces the
    Tricomi term with multiplier c * A^((lam+2)/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .geometry import KineticPoint, kinetic_distance, origin
from .polynomials import (
    KineticPolynomial,
    MultiIndex,
    OperatorSpec,
    apply_operator,
    mono,
    particular_solve_1d,
    _rat,
)
from .tricomi import TricomiParams, eval_tricomi, pde_residual as tricomi_residual

DEGREE_CAP = 9


@dataclass(frozen=True)
class HalfSpaceRHS:
    """Right-hand side p(x, v) (no t dependence) and diffusion A > 0."""

    p: KineticPolynomial
    A: float

    def __post_init__(self):
        if self.A <= 0:
            raise ValueError("A must be positive")
        if self.p.n != 1:
            raise ValueError("half-space classification is one-dimensional")
        if any(b.bt != 0 for b in self.p.terms):
            raise ValueError("rhs must be stationary (no t dependence)")
        if self.p.degree() > DEGREE_CAP:
            raise ValueError(f"rhs kinetic degree exceeds cap {DEGREE_CAP}")


@dataclass
class ClassificationResult:
    """particular + sum of m_l * T_{A, lam_l}; polynomial iff no T terms."""

    particular: KineticPolynomial
    tricomi_terms: list[tuple[int, float]] = field(default_factory=list)
    is_polynomial: bool = True
    A: float = 1.0

    def __post_init__(self):
        self.is_polynomial = not self.tricomi_terms

    def solution(self):
        """The assembled solution as a callable on (x, v)."""
        terms = [(TricomiParams(A=self.A, lam=lam), m) for lam, m in self.tricomi_terms]
        poly = self.particular

        def f(x: float, v: float) -> float:
            val = poly.eval(KineticPoint(0.0, x, v))
            for params, m in terms:
                val += m * eval_tricomi(params, x, v)
            return val

        return f

    def combine(self, other: "ClassificationResult") -> "ClassificationResult":
        if self.A != other.A:
            raise ValueError("cannot combine results with different A")
        terms = dict(self.tricomi_terms)
        for lam, m in other.tricomi_terms:
            terms[lam] = terms.get(lam, 0.0) + m
        merged = [(lam, m) for lam, m in sorted(terms.items()) if m != 0.0]
        return ClassificationResult(self.particular + other.particular, merged, A=self.A)


def _pochhammer(x: Fraction, k: int) -> Fraction:
    out = Fraction(1)
    for i in range(k):
        out *= x + i
    return out


def _kummer_basis_polynomial(lam: int, A: Fraction, which: int) -> KineticPolynomial:
    """The terminating Kummer basis solution of v h_x - A h_vv = 0.

    which = 1: x^N M(-N; 2/3; tau), N = (lam+2)/3   (lam = 1 mod 3)
    which = 2: v x^N M(-N; 4/3; tau), N = (lam+1)/3 (lam = 2 mod 3)
    with tau = -v^3/(9 A x); both expand into exact polynomials.
    """
    if which == 1:
        N = (lam + 2) // 3
        b = Fraction(2, 3)
        v_off = 0
    else:
        N = (lam + 1) // 3
        b = Fraction(4, 3)
        v_off = 1
    terms = {}
    coef = Fraction(1)
    for j in range(N + 1):
        if j > 0:
            coef *= Fraction(-(N - j + 1), 1) / ((b + (j - 1)) * j)
        c = coef * Fraction(-1, 9) ** j / A ** j
        terms[mono(1, bx=(N - j,), bv=(3 * j + v_off,))] = c
    return KineticPolynomial(1, terms)


def _trace_v_coefficient(p: KineticPolynomial, degree: int) -> Fraction:
    """Coefficient of v^degree in p(0, v)."""
    return p.coefficient(mono(1, bv=(degree,)))


def classify_homogeneous(rhs: HalfSpaceRHS, lam: int) -> ClassificationResult:
    """Classify the layer with homogeneous rhs of kinetic degree lam."""
    p, A = rhs.p, rhs.A
    if not p.is_homogeneous(lam):
        raise ValueError(f"rhs is not homogeneous of degree {lam}")
    Arat = _rat(A)
    particular = KineticPolynomial.zero(1)
    for beta, c in p.terms.items():
        particular = particular + particular_solve_1d(beta.bx[0], beta.bv[0], c, Arat)
    c_trace = _trace_v_coefficient(particular, lam + 2)

    if lam % 2 == 0 or c_trace == 0:
        return ClassificationResult(particular, A=A)

    if lam % 6 == 1:
        corr = _kummer_basis_polynomial(lam, Arat, which=1)
    elif lam % 6 == 5:
        corr = _kummer_basis_polynomial(lam, Arat, which=2)
    else:  # lam = 3 mod 6: the obstruction case
        p1 = particular - KineticPolynomial.monomial(1, c_trace, bv=(lam + 2,))
        m = float(c_trace) * A ** ((lam + 2) / 2.0)
        return ClassificationResult(p1, [(lam, m)], A=A)

    kappa = _trace_v_coefficient(corr, lam + 2)
    corrected = particular - corr * (c_trace / kappa)
    return ClassificationResult(corrected, A=A)


def classify(rhs: HalfSpaceRHS) -> ClassificationResult:
    """Split p into homogeneous layers, classify each, and sum."""
    result = ClassificationResult(KineticPolynomial.zero(1), A=rhs.A)
    for lam, layer in rhs.p.homogeneous_components().items():
        result = result.combine(classify_homogeneous(HalfSpaceRHS(layer, rhs.A), lam))
    return result


def flip_symmetric_shortcut(op: OperatorSpec, p: KineticPolynomial) -> bool:
    """True iff p(t, x', x_n, v', v_n) = p(t, x', -x_n, v', -v_n) termwise
    and a decouples the normal axis (a_{i,n} = 0 for i != n); then the
    mirror extension is a global solution and the classification must be
    polynomial."""
    n = p.n
    ax = n - 1
    for i in range(n):
        if i != ax and op.a[i][ax] != 0:
            return False
    for beta in p.terms:
        if (beta.bx[ax] + beta.bv[ax]) % 2 != 0:
            return False
    return True


@dataclass
class VerificationReport:
    pde_max_rel_residual: float
    trace_gap_rel: float
    growth_constant: float
    passed: bool
    notes: list[str] = field(default_factory=list)


def verify_solution(res: ClassificationResult, rhs: HalfSpaceRHS,
                    xs=None, vs=None, tol: float = 2e-4) -> VerificationReport:
    """Numerical verification of a classification.

    (i) PDE residual on interior samples: the polynomial part is applied
    symbolically (exact) and each Tricomi term contributes its finite
    difference residual, compared against the layer rhs.
    (ii) specular trace gap |f(eps, v) - f(eps, -v)| at eps = 1e-4,
    relative to the local solution scale.
    (iii) growth: |f(z)| <= C (1 + d_ell(z, 0))^(deg + 1) with the sampled
    constant C reported.
    """
    xs = xs if xs is not None else [0.15, 0.4, 0.8, 1.3, 2.0]
    vs = vs if vs is not None else [-1.4, -0.9, -0.3, 0.45, 0.9, 1.5]
    notes = []
    op = OperatorSpec.make([[_rat(rhs.A)]])
    lp = apply_operator(op, res.particular)
    t_params = [(TricomiParams(A=res.A, lam=lam), m) for lam, m in res.tricomi_terms]

    max_rel = 0.0
    for x in xs:
        for v in vs:
            want = rhs.p.eval(KineticPoint(0.0, x, v))
            got = lp.eval(KineticPoint(0.0, x, v))
            for params, m in t_params:
                got += m * tricomi_residual(params, x, v)
            scale = max(1.0, abs(want))
            max_rel = max(max_rel, abs(got - want) / scale)
    pde_ok = max_rel <= tol
    if not pde_ok:
        notes.append(f"pde residual {max_rel:.3e} exceeds {tol:.1e}")

    f = res.solution()
    eps = 1e-4
    gap = 0.0
    scale = 1.0
    for x in xs:
        for v in vs:
            scale = max(scale, abs(f(x, v)))
    for v in vs:
        gap = max(gap, abs(f(eps, v) - f(eps, -v)))
    trace_rel = gap / scale
    trace_ok = trace_rel <= 1e-3
    if not trace_ok:
        notes.append(f"trace evenness gap {trace_rel:.3e} exceeds 1e-3")

    deg = max(int(res.particular.degree()) if not res.particular.is_zero() else 0,
              max((lam + 2 for lam, _ in res.tricomi_terms), default=0))
    growth_c = 0.0
    z0 = origin(1)
    for x in xs:
        for v in vs:
            z = KineticPoint(0.0, 4.0 * x, 3.0 * v)
            d = kinetic_distance(z, z0, tol=1e-8)
            growth_c = max(growth_c, abs(f(z.x[0], z.v[0])) / (1.0 + d) ** (deg + 1))
    growth_ok = math.isfinite(growth_c)

    return VerificationReport(max_rel, trace_rel, growth_c,
                              pde_ok and trace_ok and growth_ok, notes)
