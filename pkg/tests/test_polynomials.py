import math
from fractions import Fraction

import numpy as np
import pytest

from kinreg.geometry import KineticPoint, origin
from kinreg.polynomials import (
    KineticPolynomial,
    MultiIndex,
    OperatorSpec,
    TricomiMarker,
    apply_operator,
    full_space,
    kernel_basis,
    kolmogorov_operator,
    l2_project,
    mono,
    particular_solve_1d,
    particular_solve_general,
    space_basis,
    space_dim,
    specular_space,
    transport_derivative,
    tricomi_augmented_space,
)

RNG = np.random.RandomState(7)


def rand_poly(n=1, k=5, nterms=6):
    terms = {}
    idx = [b for b in _all_indices(k, n)]
    for _ in range(nterms):
        b = idx[RNG.randint(len(idx))]
        terms[b] = Fraction(int(RNG.randint(-9, 10)), int(RNG.randint(1, 5)))
    return KineticPolynomial(n, terms)


def _all_indices(k, n):
    from kinreg.polynomials import _indices_up_to

    return _indices_up_to(k, n)


def test_multiindex_degree():
    b = MultiIndex(2, (1,), (3,))
    assert b.kinetic_degree == 2 * 2 + 3 * 1 + 3
    with pytest.raises(ValueError):
        MultiIndex(-1, (0,), (0,))


def test_eval_monomial():
    p = KineticPolynomial.monomial(1, 1, bt=1, bx=(1,), bv=(2,))
    assert p.eval(KineticPoint(2, 3, 4)) == 96.0
    assert KineticPolynomial.zero(1).eval(KineticPoint(1, 1, 1)) == 0.0


def test_eval_dim_mismatch():
    p = KineticPolynomial.monomial(2, 1, bv=(1, 0))
    with pytest.raises(ValueError):
        p.eval(KineticPoint(0, 0, 0))


def test_transport_derivative_basic():
    x = KineticPolynomial.monomial(1, 1, bx=(1,))
    d = transport_derivative(x, mono(1, bt=1))
    assert d == KineticPolynomial.monomial(1, 1, bv=(1,))  # (d_t + v d_x) x = v
    p = rand_poly()
    assert transport_derivative(p, mono(1)) == p


def test_transport_derivative_grading():
    for _ in range(30):
        p = rand_poly(k=6)
        if p.is_zero():
            continue
        beta = mono(1, bt=1, bv=(1,))
        d = transport_derivative(p, beta)
        if not d.is_zero():
            assert d.degree() <= p.degree() - beta.kinetic_degree


def test_apply_operator_worked_examples():
    op = kolmogorov_operator(1)
    const = KineticPolynomial.constant(1, 5)
    assert apply_operator(op, const).is_zero()
    xv2 = KineticPolynomial.monomial(1, 1, bx=(1,), bv=(2,))
    want = KineticPolynomial(1, {mono(1, bv=(3,)): 1, mono(1, bx=(1,)): -2})
    assert apply_operator(op, xv2) == want
    txv2 = KineticPolynomial.monomial(1, 1, bt=1, bx=(1,), bv=(2,))
    want2 = KineticPolynomial(1, {mono(1, bx=(1,), bv=(2,)): 1,
                                  mono(1, bt=1, bv=(3,)): 1,
                                  mono(1, bt=1, bx=(1,)): -2})
    assert apply_operator(op, txv2) == want2


def test_apply_operator_lower_order_terms():
    op = OperatorSpec.make([[1]], b=[2], c=3)
    v = KineticPolynomial.monomial(1, 1, bv=(1,))
    # L v = 0 - 0 + 2*1 + 3*v
    want = KineticPolynomial(1, {mono(1): 2, mono(1, bv=(1,)): 3})
    assert apply_operator(op, v) == want


@pytest.mark.parametrize("n", [1, 2])
def test_grading_property(n):
    # b = 0, c = 0 maps P_k into P_{k-2} for every k <= 8, basis by basis
    op = kolmogorov_operator(n)
    for k in range(9):
        for q in space_basis(full_space(k, n)):
            img = apply_operator(op, q)
            if not img.is_zero():
                assert img.degree() <= k - 2


def test_space_dims():
    assert space_dim(full_space(0, 1)) == 1
    assert space_dim(full_space(2, 1)) == 4  # 1, v, v^2, t
    # specular subspace: drop odd-v_n monomials with no x_n factor
    assert space_dim(specular_space(2, 1)) == 3


def test_specular_space_trace_even():
    spec = specular_space(5, 1)
    for q in space_basis(spec):
        for b in q.terms:
            assert b.bx[0] >= 1 or b.bv[0] % 2 == 0


def test_tricomi_augmented_space():
    spec = tricomi_augmented_space(1.0, 1)
    basis = space_basis(spec)
    assert isinstance(basis[-1], TricomiMarker)
    assert space_dim(spec) == space_dim(specular_space(5, 1)) + 1
    with pytest.raises(ValueError):
        from kinreg.polynomials import PolySpaceSpec

        PolySpaceSpec("tricomi_augmented", 4, 1, 0, 1.0)


def test_pullback_stays_in_class_and_matches_eval():
    z0 = KineticPoint(0.5, -0.25, 0.75)
    r = 0.5
    from kinreg.geometry import frame_map

    for _ in range(20):
        p = rand_poly(k=5)
        q = p.pullback(z0, r)
        if not p.is_zero():
            assert q.degree() <= p.degree()
        for _ in range(5):
            z = KineticPoint(RNG.uniform(-1, 1), RNG.uniform(-1, 1), RNG.uniform(-1, 1))
            assert q.eval(z) == pytest.approx(p.eval(frame_map(z0, r, z)), rel=1e-12, abs=1e-12)


def test_particular_solve_1d_base_cases():
    assert particular_solve_1d(0, 1, 1, 1) == KineticPolynomial.monomial(1, Fraction(-1, 6), bv=(3,))
    assert particular_solve_1d(0, 0, 2, 1) == KineticPolynomial.monomial(1, -1, bv=(2,))


def test_particular_solve_1d_exact_grid():
    # symbolic residual identically zero on the full (lambda1, lambda2) grid
    op = kolmogorov_operator(1)
    for l1 in range(5):
        for l2 in range(7):
            amp = Fraction(3, 2)
            P = particular_solve_1d(l1, l2, amp, 1)
            rhs = KineticPolynomial.monomial(1, amp, bx=(l1,), bv=(l2,))
            assert apply_operator(op, P) == rhs
            assert P.is_homogeneous(3 * l1 + l2 + 2)


def test_particular_solve_1d_general_A():
    A = Fraction(5, 3)
    op = OperatorSpec.make([[A]])
    for l1, l2 in [(0, 0), (1, 2), (2, 1), (3, 0)]:
        P = particular_solve_1d(l1, l2, 1, A)
        rhs = KineticPolynomial.monomial(1, 1, bx=(l1,), bv=(l2,))
        assert apply_operator(op, P) == rhs


def test_particular_solve_general():
    op = kolmogorov_operator(1)
    assert particular_solve_general(op, KineticPolynomial.zero(1)).is_zero()
    p = KineticPolynomial(1, {mono(1, bv=(3,)): 1, mono(1, bx=(1,)): -2})
    P = particular_solve_general(op, p)
    assert apply_operator(op, P) == p
    # cross-check against the recursion for p = v
    v = KineticPolynomial.monomial(1, 1, bv=(1,))
    P2 = particular_solve_general(op, v)
    assert apply_operator(op, P2) == v


def test_particular_solve_general_with_lower_order():
    op = OperatorSpec.make([[1]], b=[1], c=0)
    p = KineticPolynomial(1, {mono(1, bv=(2,)): 1})
    P = particular_solve_general(op, p)
    assert apply_operator(op, P) == p


def test_kernel_basis_p1_is_everything():
    op = kolmogorov_operator(1)
    ker = kernel_basis(op, full_space(1, 1))
    assert len(ker) == space_dim(full_space(1, 1)) == 2


def test_kernel_basis_residuals_zero():
    for spec in (full_space(3, 1), specular_space(5, 1), full_space(4, 2)):
        op = kolmogorov_operator(spec.n)
        ker = kernel_basis(op, spec)
        for q in ker:
            assert apply_operator(op, q).is_zero()
        # kernel dimension bounded by dim(space) - rank lower bound
        assert len(ker) >= space_dim(spec) - space_dim(full_space(spec.k - 2, spec.n))


def test_kernel_contains_known_elements():
    op = kolmogorov_operator(1)
    ker = kernel_basis(op, specular_space(5, 1))
    # L(v^2 + t) = 1 - 2 = -1; the kernel must contain v^2 + 2t
    cand = KineticPolynomial(1, {mono(1, bv=(2,)): 1, mono(1, bt=1): 1})
    assert apply_operator(op, cand) == KineticPolynomial(1, {mono(1): -1})
    cand2 = KineticPolynomial(1, {mono(1, bv=(2,)): 1, mono(1, bt=1): 2})
    assert apply_operator(op, cand2).is_zero()
    M = np.array([[float(q.coefficient(b)) for q in ker]
                  for b in _all_indices(5, 1)])
    target = np.array([float(cand2.coefficient(b)) for b in _all_indices(5, 1)])
    coef, res, *_ = np.linalg.lstsq(M, target, rcond=None)
    assert np.linalg.norm(M @ coef - target) < 1e-10


def test_kernel_rejects_lower_order():
    with pytest.raises(ValueError):
        kernel_basis(OperatorSpec.make([[1]], b=[1]), full_space(3, 1))


def test_json_roundtrip():
    for _ in range(10):
        p = rand_poly(k=6)
        q = KineticPolynomial.from_json(p.to_json())
        assert p == q
    p = KineticPolynomial(2, {mono(2, bt=1, bx=(1, 0), bv=(0, 3)): Fraction(-7, 3)})
    assert KineticPolynomial.from_json(p.to_json()) == p


# ---------------------------------------------------------------------------
# L2 projection
# ---------------------------------------------------------------------------


def test_l2_project_reproduces_in_space():
    z0 = KineticPoint(0.1, 0.4, -0.2)
    spec = full_space(3, 1)
    basis = space_basis(spec)
    coefs = RNG.uniform(-2, 2, size=len(basis))
    p = KineticPolynomial.zero(1)
    for c, q in zip(coefs, basis):
        p = p + q * Fraction(c).limit_denominator(10 ** 6)
    got = l2_project(p.eval, z0, 0.7, spec)
    want = np.array([float(p.coefficient(next(iter(q.terms)))) for q in basis])
    assert np.max(np.abs(got - want)) < 1e-10


def test_l2_project_constant_is_average():
    z0 = origin(1)
    f = lambda z: math.sin(z.t) + z.x[0] ** 2 + z.v[0]
    c = l2_project(f, z0, 0.5, full_space(0, 1), quad_order=12)[0]
    # independent average by quadrature
    from kinreg.polynomials import cylinder_quadrature

    pts, w = cylinder_quadrature(z0, 0.5, 16)
    avg = sum(wi * f(z) for z, wi in zip(pts, w)) / w.sum()
    assert c == pytest.approx(avg, rel=1e-8)


def test_l2_project_orthogonality():
    z0 = KineticPoint(0.0, 0.0, 0.0)
    spec = full_space(4, 1)
    f = lambda z: math.exp(z.v[0]) * (1 + z.x[0])
    coef = l2_project(f, z0, 0.6, spec, quad_order=14)
    basis = space_basis(spec)
    from kinreg.polynomials import cylinder_quadrature

    pts, w = cylinder_quadrature(z0, 0.6, 14)
    resid = np.array([f(z) for z in pts]) - sum(
        c * np.array([q.eval(z) for z in pts]) for c, q in zip(coef, basis))
    fnorm = math.sqrt(float(w @ np.array([f(z) ** 2 for z in pts])))
    for q in basis:
        qv = np.array([q.eval(z) for z in pts])
        qnorm = math.sqrt(float(w @ qv ** 2))
        assert abs(float(w @ (resid * qv))) <= 1e-9 * max(fnorm * qnorm, 1.0)


def test_l2_project_augmented_space_recovers_tricomi():
    from kinreg.tricomi import TricomiParams, as_field

    spec = tricomi_augmented_space(1.0, 1)
    f = as_field(TricomiParams(A=1.0, lam=3), scale=2.5)
    z0 = origin(1)
    coef = l2_project(f, z0, 0.5, spec, quad_order=10)
    assert coef[-1] == pytest.approx(2.5, abs=1e-6)
