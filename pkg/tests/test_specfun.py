import math

import numpy as np
import pytest

from kinreg.specfun import (
    Regime,
    asymptotic_m,
    asymptotic_u_kinetic,
    gamma_real,
    kummer_m,
    kummer_m_series,
    real_kummer_combo,
    rgamma,
    tricomi_u,
)

# golden values frozen from a 40-digit run of tools/freeze_oracles.py
GAMMA_GOLDEN = {
    0.5: 1.772453850905516027298,
    0.001: 999.4237724845954452983,
    3.7: 4.170651783796604030087,
    12.25: 73711509.04676994909085,
    19.5: 27724322986333718.17814,
    -0.5: -3.544907701811032054596,
    -4.3: -0.1019807888834332807808,
    -19.77: 3.906338621395859469319e-18,
    -6.5: -0.001678869966447671228728,
    7.0: 720.0,
}

KUMMER_GOLDEN = {
    (-5 / 3, 2 / 3, -30.0): 353.9080554872523755579,
    (-5 / 3, 2 / 3, 30.0): 2709669284.545210597097,
    (-4 / 3, 4 / 3, -50.0): 114.1950616339534277835,
    (0.5, 1.5, 20.0): 12458600.4381720117239,
    (2.5, 0.7, -12.0): 0.002351385314685375405443,
    (-0.75, 2.25, 8.0): -5.183111866009888567328,
    (1.0, 1.0, 1.0): math.e,
    (-2.0, 0.7, 13.5): 115.5798319327731205135,
    (3.25, 5.5, -40.0): 0.0002582813822473934079953,
    (-5 / 3, 2 / 3, 50.0): 361084052337823193.1357,
}

U_GOLDEN = {
    (-5 / 3, 2 / 3, 0.5): -0.8008769457769420909748,
    (-5 / 3, 2 / 3, 7.3): 19.23438585669501617192,
    (-5 / 3, 2 / 3, 120.0): 2865.442968653299369513,
    (-11 / 3, 2 / 3, 4.0): -18.23367456080133180059,
}

U_REAL_NEG_GOLDEN = {
    -0.7: 5.22082462234723368697,
    -5.0: 42.5295732979607863222,
    -21.0: 353.6990830937445283056,
    -300.0: 27087.67580986197197623,
}

U_AT_ZERO = 0.8792730042874622700456737  # Gamma(1/3) / Gamma(-4/3)


def test_gamma_classics():
    assert gamma_real(1.0) == pytest.approx(1.0, rel=1e-14)
    assert gamma_real(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    for k in range(1, 12):
        assert gamma_real(k + 1) == pytest.approx(math.factorial(k), rel=1e-13)


def test_gamma_golden_grid():
    for x, want in GAMMA_GOLDEN.items():
        assert gamma_real(x) == pytest.approx(want, rel=1e-12), x


def test_gamma_recurrence_sweep():
    # Gamma(x+1) = x Gamma(x) across [-20, 20] avoiding poles
    for x in np.arange(-19.95, 19.0, 0.31):
        if abs(x - round(x)) < 0.04 or abs(x + 1 - round(x + 1)) < 0.04:
            continue
        assert gamma_real(x + 1.0) == pytest.approx(x * gamma_real(x), rel=1e-12)


def test_gamma_negative_recurrence_example():
    # Gamma(-4/3) = (9/4) Gamma(2/3)
    assert gamma_real(-4.0 / 3.0) == pytest.approx(2.25 * gamma_real(2.0 / 3.0), rel=1e-13)


def test_gamma_pole_raises_and_rgamma_zero():
    for x in (0.0, -1.0, -7.0):
        with pytest.raises(ValueError):
            gamma_real(x)
        assert rgamma(x) == 0.0


def test_kummer_at_zero_exact():
    for a, b in [(0.3, 0.7), (-5 / 3, 2 / 3), (2.0, 5.0)]:
        ev = kummer_m(a, b, 0.0)
        assert ev.value == 1.0


def test_kummer_exp_identity():
    ev = kummer_m(1.0, 1.0, 1.0)
    assert ev.value == pytest.approx(math.e, rel=1e-14)
    for z in (-3.0, 0.5, 8.0):
        assert kummer_m(1.0, 1.0, z).value == pytest.approx(math.exp(z), rel=1e-13)


def test_kummer_terminating_case():
    ev = kummer_m(-2.0, 0.7, 13.5)
    assert ev.regime is Regime.POLYNOMIAL_CASE
    assert ev.value == pytest.approx(KUMMER_GOLDEN[(-2.0, 0.7, 13.5)], rel=1e-13)


def test_kummer_golden_grid_and_error_bound():
    for (a, b, z), want in KUMMER_GOLDEN.items():
        ev = kummer_m(a, b, z)
        assert ev.value == pytest.approx(want, rel=1e-11), (a, b, z)
        # reported error estimate is a true bound (10x slack)
        assert abs(ev.value - want) <= 10.0 * ev.est_abs_error + 1e-15 * abs(want)


def test_kummer_pole_and_overflow_errors():
    with pytest.raises(ValueError):
        kummer_m(1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        kummer_m(1.0, -3.0, 1.0)
    with pytest.raises(ValueError):
        kummer_m(0.5, 1.5, 800.0)


def test_kummer_transformation_identity_grid():
    # M(a;b;z) = e^z M(b-a;b;-z), raw series both sides, 200-point grid.
    # 0 < a < b keeps M single-signed so the relative comparison is
    # well-posed (near zeros of M no double-precision series can hold a
    # relative identity).
    a_vals = [0.15, 0.3, 0.45, 0.6, 0.75, 0.9, 1.05, 1.2, 1.35, 1.5]
    offsets = [0.3, 0.8, 1.5, 2.2, 3.0]
    # the roundoff floor of the comparison scales like eps * e^(2|z|)
    # (the z < 0 side is exponentially small against its largest term),
    # so |z| <= 6 is where a 1e-11 relative identity is provable
    z_vals = [-6.0, -2.5, 2.5, 6.0]
    count = 0
    for a in a_vals:
        for off in offsets:
            b = a + off
            for z in z_vals:
                lhs = kummer_m_series(a, b, z).value
                rhs = math.exp(z) * kummer_m_series(b - a, b, -z).value
                scale = max(abs(lhs), abs(rhs))
                assert abs(lhs - rhs) <= 1e-11 * scale, (a, b, z)
                count += 1
    assert count == 200


def test_kummer_ode_residual():
    # z M'' + (b - z) M' - a M = 0 via M' = (a/b) M(a+1;b+1;z)
    for a in (-5 / 3, 0.4, 1.3, -0.7):
        for b in (2 / 3, 4 / 3, 2.4):
            for z in (-30.0, -7.0, -1.0, 0.5, 3.0, 12.0, 30.0):
                m = kummer_m(a, b, z).value
                mp = a / b * kummer_m(a + 1, b + 1, z).value
                mpp = (a / b) * ((a + 1) / (b + 1)) * kummer_m(a + 2, b + 2, z).value
                resid = z * mpp + (b - z) * mp - a * m
                scale = max(abs(z * mpp), abs((b - z) * mp), abs(a * m), 1.0)
                assert abs(resid) <= 1e-8 * scale, (a, b, z)


def test_tricomi_u_a_zero_is_one():
    for z in (0.0, 0.5, 5.0, -3.0):
        assert tricomi_u(0.0, 2 / 3, z).value == pytest.approx(1.0, abs=1e-14)


def test_tricomi_u_at_zero_matches_oracle():
    got = tricomi_u(-5 / 3, 2 / 3, 0.0).value
    assert got == pytest.approx(U_AT_ZERO, rel=1e-10)
    closed = gamma_real(1 / 3) / gamma_real(-4 / 3)
    assert got == pytest.approx(closed, rel=1e-12)


def test_tricomi_u_golden():
    for (a, b, z), want in U_GOLDEN.items():
        ev = tricomi_u(a, b, z)
        assert ev.value == pytest.approx(want, rel=1e-10), (a, b, z)


def test_tricomi_u_negative_real_branch_golden():
    for z, want in U_REAL_NEG_GOLDEN.items():
        ev = tricomi_u(-5 / 3, 2 / 3, z)
        assert ev.value == pytest.approx(want, rel=1e-9), z


def test_tricomi_u_large_z_power_law():
    # leading correction is -a(a-b+1)/z = -(20/9)/z, so the 2% window
    # opens at z = 112; at z = 100 exactly the deviation is 0.0222
    for z in (120.0, 400.0, 2000.0):
        ev = tricomi_u(-5 / 3, 2 / 3, z)
        assert abs(ev.value * z ** (-5 / 3) - 1.0) <= 0.02


def test_tricomi_u_integer_b_rejected():
    with pytest.raises(ValueError):
        tricomi_u(-5 / 3, 1.0, 0.5)


def test_asymptotic_m_overlap():
    # a = 1, b = 1: M = e^z
    assert asymptotic_m(1.0, 1.0, 40.0) == pytest.approx(math.exp(40.0), rel=0.01)
    # z -> -inf branch at z = -40, compare against the series evaluator
    for a, b in [(-5 / 3, 2 / 3), (0.4, 1.3), (1.2, 2.7)]:
        got = asymptotic_m(a, b, -40.0)
        ref = kummer_m(a, b, -40.0).value
        assert got == pytest.approx(ref, rel=0.03), (a, b)
    got = asymptotic_m(-5 / 3, 2 / 3, 50.0)
    ref = kummer_m(-5 / 3, 2 / 3, 50.0).value
    assert got == pytest.approx(ref, rel=1e-3)
    with pytest.raises(ValueError):
        asymptotic_m(0.4, 1.3, 3.0)


def test_asymptotic_u_kinetic_constants():
    # K = 2 cos(pi (a + 1/3)); a = 5/3 gives exactly 2
    assert asymptotic_u_kinetic(5 / 3, 10.0) == pytest.approx(2.0 * 10.0 ** 5, rel=1e-12)
    assert asymptotic_u_kinetic(5 / 3, -10.0) == pytest.approx(10.0 ** 5, rel=1e-12)
    with pytest.raises(ValueError):
        asymptotic_u_kinetic(5 / 3, 2.0)


def test_asymptotic_u_kinetic_overlap_with_evaluator():
    for tau in (10.0, -10.0):
        got = tricomi_u(-5 / 3, 2 / 3, -tau ** 3).value
        ref = asymptotic_u_kinetic(5 / 3, tau)
        assert got == pytest.approx(ref, rel=0.03), tau


def test_real_kummer_combo_matches_u():
    # h(x, v) = x^{5/3} U(-5/3; 2/3; -v^3/(9Ax)) for either sign of v
    for A in (1.0, 2.0):
        for x in (0.3, 1.0):
            for v in (0.8, -0.8, 0.0, 2.1):
                tau = -v ** 3 / (9 * A * x)
                want = x ** (5 / 3) * tricomi_u(-5 / 3, 2 / 3, tau).value
                assert real_kummer_combo(3, A, x, v) == pytest.approx(want, rel=1e-12)
    with pytest.raises(ValueError):
        real_kummer_combo(3, 1.0, -0.5, 1.0)


def test_error_estimates_nonnegative_and_regimes():
    assert kummer_m(0.4, 1.3, 5.0).regime is Regime.SERIES
    assert tricomi_u(-5 / 3, 2 / 3, 5.0).regime is Regime.CONNECTION_FORMULA
    assert tricomi_u(-5 / 3, 2 / 3, 100.0).regime is Regime.ASYMPTOTIC
    for ev in (kummer_m(0.4, 1.3, 5.0), tricomi_u(-5 / 3, 2 / 3, -8.0)):
        assert ev.est_abs_error >= 0.0
