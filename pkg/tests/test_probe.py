import pytest

from kinreg.geometry import KineticPoint, frame_map, origin
from kinreg.polynomials import KineticPolynomial, full_space, mono, tricomi_augmented_space
from kinreg.probe import (
    EXACT_FIT_SENTINEL,
    best_approx_error,
    exponent_fit,
    gamma0_tricomi_coefficient,
    polyfit_on_cylinder,
    sample_cylinder,
)
from kinreg.solver import BoundaryCondition, HalfStripGrid, solve_stationary
from kinreg.tricomi import TricomiParams, as_field

TP = TricomiParams(A=1.0, lam=3)
T_FIELD = as_field(TP)
Z0 = origin(1)
RADII = [1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125]


def test_sampler_deterministic_and_in_domain():
    a = sample_cylinder(Z0, 0.5, 50, seed=3)
    b = sample_cylinder(Z0, 0.5, 50, seed=3)
    assert all(p == q for p, q in zip(a, b))
    for z in a:
        assert z.x[0] > 0.0
        assert abs(z.t) < 0.25 and abs(z.v[0]) < 0.5


def test_in_space_function_recovered():
    p = KineticPolynomial(1, {mono(1, bx=(1,), bv=(2,)): 1, mono(1, bt=1): -2})
    err = best_approx_error(p.eval, Z0, 0.5, full_space(5, 1))
    assert err <= 1e-9


def test_undersampled_fit_raises():
    with pytest.raises(ValueError):
        polyfit_on_cylinder(T_FIELD, Z0, 0.5, full_space(5, 1), samples=100)


def test_tricomi_r5_plateau():
    errs = [best_approx_error(T_FIELD, Z0, r, full_space(5, 1)) for r in RADII]
    plat = [e / r ** 5 for e, r in zip(errs, RADII)]
    med = sorted(plat)[len(plat) // 2]
    assert all(med / 2 <= p <= 2 * med for p in plat), plat


def test_tricomi_augmented_kills_plateau():
    plat = best_approx_error(T_FIELD, Z0, 1.0, full_space(5, 1))
    r = 1 / 32
    e5 = best_approx_error(T_FIELD, Z0, r, full_space(5, 1))
    ea = best_approx_error(T_FIELD, Z0, r, tricomi_augmented_space(1.0, 1))
    assert ea <= e5 / 20.0
    assert e5 / r ** 5 >= plat / 2  # the plateau itself persists


def test_monotone_spaces():
    for r in (0.5, 0.125):
        e3 = best_approx_error(T_FIELD, Z0, r, full_space(3, 1))
        e4 = best_approx_error(T_FIELD, Z0, r, full_space(4, 1))
        e5 = best_approx_error(T_FIELD, Z0, r, full_space(5, 1))
        assert e5 <= e4 <= e3


def test_exponent_fit_tricomi_slope_5():
    ef = exponent_fit(T_FIELD, Z0, full_space(5, 1), RADII)
    assert ef.slope == pytest.approx(5.0, abs=0.1)
    assert ef.r_squared > 0.999


def test_exponent_fit_exact_sentinel():
    p = KineticPolynomial(1, {mono(1, bv=(4,)): 3, mono(1, bt=2): 1})
    ef = exponent_fit(p.eval, Z0, full_space(5, 1), RADII[:4])
    assert ef.slope == EXACT_FIT_SENTINEL


def test_scaling_covariance():
    # g = f(frame_map(z0, s, .)): error_g(r) = error_f(s r)
    s = 0.5
    g = lambda z: T_FIELD(frame_map(Z0, s, z))
    for r in (0.5, 0.25):
        eg = best_approx_error(g, Z0, r, full_space(5, 1), seed=2)
        ef = best_approx_error(T_FIELD, Z0, s * r, full_space(5, 1), seed=2)
        assert eg == pytest.approx(ef, rel=1e-9)


def test_tau_recovery_synthetic():
    from fractions import Fraction

    poly = KineticPolynomial(1, {mono(1): 2, mono(1, bv=(2,)): Fraction(34, 100),
                                 mono(1, bt=1, bv=(2,)): 1, mono(1, bx=(1,)): -12})
    f = lambda z: 3.7 * T_FIELD(z) + poly.eval(z)
    rep = gamma0_tricomi_coefficient(f, Z0, 1.0, [0.5, 0.25, 0.125])
    assert rep.tau == pytest.approx(3.7, abs=1e-3)
    assert rep.stable


def test_tau_zero_for_polynomial():
    p = KineticPolynomial(1, {mono(1, bv=(4,)): 1, mono(1): 1})
    rep = gamma0_tricomi_coefficient(p.eval, Z0, 1.0, [0.5, 0.25])
    assert abs(rep.tau) <= 1e-6


def test_tau_requires_grazing_point():
    with pytest.raises(ValueError):
        gamma0_tricomi_coefficient(T_FIELD, KineticPoint(0, 0.5, 0), 1.0, [0.5, 0.25])


# ---------------------------------------------------------------------------
# solver-field probes
# ---------------------------------------------------------------------------


def _solve_smooth_gamma_plus_field():
    """Exact manufactured solution x^2 + x v + v^2 (kinetic degree 6 via
    the x^2 monomial): every piece is reproduced exactly by the scheme, so
    the probed field carries clean smooth-regime structure at gamma_+."""
    fstar = lambda x, v: x * x + x * v + v * v
    h = lambda x, v: v * (2 * x + v) - 2.0
    grid = HalfStripGrid(x_max=2.2, v_max=2.5, nx=160, nv=160)
    bc = BoundaryCondition(at_x0="inflow",
                           inflow_profile=lambda t, v: fstar(0.0, v),
                           at_xmax=lambda t, v: fstar(2.2, v),
                           at_vmax=lambda t, x, v: fstar(x, v))
    fld = solve_stationary(h, bc, 1.0, grid)
    spline = fld.interpolator()
    return lambda z: float(spline(z.x[0], z.v[0])[0, 0]), fstar


def test_gamma_plus_solver_field_slope():
    f, fstar = _solve_smooth_gamma_plus_field()
    z0 = KineticPoint(0.0, 0.0, -1.0)   # gamma_+: boundary point, incoming normal velocity
    # sanity: the probed field matches the manufactured solution to the
    # O(h^2) seam error of the boundary-adjacent centered faces
    for z in sample_cylinder(z0, 0.5, 32, seed=1):
        assert f(z) == pytest.approx(fstar(z.x[0], z.v[0]), abs=5e-3)
    ef = exponent_fit(f, z0, full_space(5, 1), [1.0, 0.5, 0.25, 0.125])
    assert ef.slope >= 5.3, (ef.slope, ef.errors)
    assert ef.slope == pytest.approx(6.0, abs=0.2)


def test_gamma0_tau_from_solver_field():
    # end-to-end: recover the manufactured Tricomi multiple from the solve
    from kinreg.tricomi import eval_tricomi, residual_constant

    mult = 0.85
    C = mult * residual_constant(TP)
    grid = HalfStripGrid(x_max=1.2, v_max=1.2, nx=192, nv=192)
    bc = BoundaryCondition(at_x0="specular",
                           at_xmax=lambda t, v: mult * eval_tricomi(TP, 1.2, v),
                           at_vmax=lambda t, x, v: mult * eval_tricomi(TP, x, v))
    fld = solve_stationary(lambda x, v: C * v ** 3, bc, 1.0, grid)
    spline = fld.interpolator()
    f = lambda z: float(spline(z.x[0], z.v[0])[0, 0])
    rep = gamma0_tricomi_coefficient(f, Z0, 1.0, [1.0, 0.7, 0.5])
    assert rep.tau == pytest.approx(mult, rel=0.05)
