"""Boundary flattening for 2-D graph domains and the curvature
obstruction condition.

The domain is Omega = {x2 > Gamma(x1)} near 0 with Gamma(0) = Gamma'(0) = 0.
The flattening inverse is the normal-ray (tubular neighborhood) map

    phi^{-1}(y1, y2) = (y1, Gamma(y1)) + y2 * nu(y1),

nu the inward unit normal, for which the signed distance satisfies
d(phi^{-1}(y)) = y2 exactly within the curvature reach. Velocities
transform by the Jacobian, Phi(t, x, v) = (t, phi(x), Dphi(x) v), which
preserves the specular reflection condition; the commutation identity is
checked numerically rather than assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .polynomials import KineticPolynomial, MultiIndex, mono


def _fd_derivative(g: Callable[[float], float], x: float, order: int, h: float = 1e-5) -> float:
    if order == 1:
        return (g(x + h) - g(x - h)) / (2 * h)
    return (g(x + h) - 2 * g(x) + g(x - h)) / h ** 2


@dataclass(frozen=True)
class GraphDomain:
    """Omega = {x2 > gamma(x1)} with normalized tangency at the origin."""

    gamma: Callable[[float], float]
    d1: Callable[[float], float] | None = None
    d2: Callable[[float], float] | None = None

    def __post_init__(self):
        if abs(self.gamma(0.0)) > 1e-12 or abs(self.gamma_d1(0.0)) > 1e-12:
            raise ValueError("need gamma(0) = 0 and gamma'(0) = 0")

    def gamma_d1(self, x: float) -> float:
        return self.d1(x) if self.d1 is not None else _fd_derivative(self.gamma, x, 1)

    def gamma_d2(self, x: float) -> float:
        return self.d2(x) if self.d2 is not None else _fd_derivative(self.gamma, x, 2)

    def outward_normal(self, x1: float) -> np.ndarray:
        g1 = self.gamma_d1(x1)
        s = math.hypot(1.0, g1)
        return np.array([g1 / s, -1.0 / s])


def flat_domain() -> GraphDomain:
    return GraphDomain(lambda x: 0.0, lambda x: 0.0, lambda x: 0.0)


def parabola_domain(curvature: float = 1.0) -> GraphDomain:
    return GraphDomain(lambda x: 0.5 * curvature * x * x,
                       lambda x: curvature * x,
                       lambda x: curvature + 0.0 * x)


@dataclass
class FlattenMap:
    phi: Callable[[np.ndarray], np.ndarray]
    phi_inverse: Callable[[np.ndarray], np.ndarray]
    d_phi: Callable[[np.ndarray], np.ndarray]
    d_phi_inverse: Callable[[np.ndarray], np.ndarray]
    d2_phi: Callable[[np.ndarray], list[np.ndarray]]
    domain: GraphDomain
    patch_radius: float

    def map_phase(self, t: float, x: np.ndarray, v: np.ndarray):
        """Phi(t, x, v) = (t, phi(x), Dphi(x) v)."""
        x = np.asarray(x, dtype=float)
        return t, self.phi(x), self.d_phi(x) @ np.asarray(v, dtype=float)

    def unmap_phase(self, t: float, y: np.ndarray, w: np.ndarray):
        y = np.asarray(y, dtype=float)
        return t, self.phi_inverse(y), self.d_phi_inverse(y) @ np.asarray(w, dtype=float)


def build_flatten(dom: GraphDomain, patch_radius: float = 0.25) -> FlattenMap:
    """Construct the flattening map on a boundary patch.

    Injectivity of the normal-ray map requires the patch to stay inside
    the curvature reach; this is checked by round-tripping a sample grid
    and raising when the inversion fails.
    """

    def phi_inverse(y):
        y1, y2 = float(y[0]), float(y[1])
        g1 = dom.gamma_d1(y1)
        s = math.hypot(1.0, g1)
        return np.array([y1 - y2 * g1 / s, dom.gamma(y1) + y2 / s])

    def d_phi_inverse(y):
        y1, y2 = float(y[0]), float(y[1])
        g1 = dom.gamma_d1(y1)
        g2 = dom.gamma_d2(y1)
        s = math.hypot(1.0, g1)
        # (g1/s)' = g2 / s^3, (1/s)' = -g1 g2 / s^3
        col1 = np.array([1.0 - y2 * g2 / s ** 3, g1 - y2 * g1 * g2 / s ** 3])
        col2 = np.array([-g1 / s, 1.0 / s])
        return np.column_stack([col1, col2])

    def phi(x, tol=1e-13, max_iter=60):
        x = np.asarray(x, dtype=float)
        y = x.copy()  # identity is a good seed near the origin
        for _ in range(max_iter):
            res = phi_inverse(y) - x
            if np.max(np.abs(res)) < tol:
                return y
            y = y - np.linalg.solve(d_phi_inverse(y), res)
        raise ValueError(f"phi: Newton inversion failed at {x} (outside the patch?)")

    def d_phi(x):
        return np.linalg.inv(d_phi_inverse(phi(x)))

    def d2_phi(x, h=1e-5):
        """Hessians of the components of phi, centered FD with one
        Richardson extrapolation step."""
        x = np.asarray(x, dtype=float)

        def hess_at(step):
            H = np.zeros((2, 2, 2))
            for i in range(2):
                for j in range(2):
                    ei = np.zeros(2); ei[i] = step
                    ej = np.zeros(2); ej[j] = step
                    fpp = phi(x + ei + ej)
                    fpm = phi(x + ei - ej)
                    fmp = phi(x - ei + ej)
                    fmm = phi(x - ei - ej)
                    H[:, i, j] = (fpp - fpm - fmp + fmm) / (4.0 * step * step)
            return H

        Hh = hess_at(h)
        H2h = hess_at(2 * h)
        H = (4.0 * Hh - H2h) / 3.0
        return [H[0], H[1]]

    fm = FlattenMap(phi, phi_inverse, d_phi, d_phi_inverse, d2_phi, dom, patch_radius)

    # verification of the defining boundary identities on the patch
    for y1 in np.linspace(-patch_radius, patch_radius, 9):
        x = phi_inverse(np.array([y1, 0.0]))
        if abs(dom.gamma(x[0]) - x[1]) > 1e-10:
            raise ValueError("boundary does not map to {y2 = 0}")
        # eq. of the normal column: d(phi^{-1})/dy2 = -outward normal
        col = d_phi_inverse(np.array([y1, 0.0]))[:, 1]
        if np.max(np.abs(col + dom.outward_normal(x[0]))) > 1e-10:
            raise ValueError("normal column identity fails")
        for y2 in (0.0, 0.4 * patch_radius, 0.8 * patch_radius):
            y = np.array([y1, y2])
            rt = phi(phi_inverse(y))
            if np.max(np.abs(rt - y)) > 1e-9:
                raise ValueError("injectivity check failed on the patch")
    return fm


def reflect_specular(v: np.ndarray, normal: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v - 2.0 * float(v @ normal) * normal


def reflection_commutation_check(fm: FlattenMap, n_samples: int = 100,
                                 seed: int = 0) -> float:
    """Max gap of Dphi^{-1}(y) R_y w = R_{phi^{-1}(y)} (Dphi^{-1}(y) w)
    over boundary samples; also checks that the map preserves the
    incoming/outgoing split (sign of the normal velocity)."""
    rng = np.random.RandomState(seed)
    worst = 0.0
    for _ in range(n_samples):
        y1 = rng.uniform(-fm.patch_radius, fm.patch_radius)
        y = np.array([y1, 0.0])
        w = rng.uniform(-2, 2, size=2)
        J = fm.d_phi_inverse(y)
        x = fm.phi_inverse(y)
        nx = fm.domain.outward_normal(x[0])
        lhs = J @ np.array([w[0], -w[1]])
        rhs = reflect_specular(J @ w, nx)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        # boundary-region preservation
        sign_flat = -w[1]               # -w . n_flat with n_flat = e2... outward is -e2
        sign_curved = float((J @ w) @ nx)
        if sign_flat * sign_curved < -1e-14:
            worst = max(worst, abs(sign_flat * sign_curved))
    return worst


def transform_coefficients(fm: FlattenMap, x: np.ndarray, v: np.ndarray,
                           a: np.ndarray | None = None,
                           b: np.ndarray | None = None, c: float = 0.0,
                           h: float = 0.0):
    """Pointwise coefficients of the flattened equation at (x, v).

    With A = Dphi(x):
      a~ = A a A^T,   b~^i = (A b)^i + <v, D2 phi^i(x) v>,   c~ = c, h~ = h.
    The velocity-quadratic drift is what the chain rule produces from the
    transport term; the diffusion generates no first-order term because
    Dphi does not depend on v.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    A = fm.d_phi(x)
    a = np.eye(2) if a is None else np.asarray(a, dtype=float)
    b = np.zeros(2) if b is None else np.asarray(b, dtype=float)
    hess = fm.d2_phi(x)
    a_t = A @ a @ A.T
    b_t = A @ b + np.array([float(v @ hess[i] @ v) for i in range(2)])
    return a_t, b_t, c, h


def counterexample_condition(d2phi_at_0: Sequence[np.ndarray],
                             d2v_f_at_z0: np.ndarray,
                             tol: float = 1e-10) -> dict:
    """Evaluate the curvature obstruction condition at a grazing point.

    d2phi_at_0: Hessian of each phi component at 0 (n matrices);
    d2v_f_at_z0: velocity Hessian of the solution at the base point.
    violated = True means the two sides differ, which rules out C^5
    regularity of the solution at that point.
    """
    hess = [np.asarray(H, dtype=float) for H in d2phi_at_0]
    fvv = np.asarray(d2v_f_at_z0, dtype=float)
    n = fvv.shape[0]
    if len(hess) != n or any(H.shape != (n, n) for H in hess):
        raise ValueError("inconsistent dimensions")
    last = n - 1
    lhs = 0.0
    for j in range(n):
        for i in range(n - 1):
            if i != j:
                lhs += hess[j][i, last] * fvv[i, j]
    for i in range(n - 1):
        lhs += 2.0 * hess[i][i, last] * fvv[i, i]
    rhs = sum(hess[i][last, last] * fvv[i, last] for i in range(n - 1))
    return {"lhs": lhs, "rhs": rhs, "violated": bool(abs(lhs - rhs) > tol)}


def limit_rhs_p1(d2phi_at_0: Sequence[np.ndarray], alpha: np.ndarray,
                 n: int | None = None) -> KineticPolynomial:
    """The cubic polynomial p1 produced in the blow-up limit of the
    flattened equation, from the Hessians of phi and the velocity-quadratic
    coefficients alpha_{i,j} of the degree-4 approximating polynomial:

      p1 = sum_{i != j, k} [d2phi^j_{ik} + d2phi^i_{jk}] alpha_{ij} x_k
           + 4 sum_{i, k} d2phi^i_{ik} alpha_{ii} x_k
           - sum_{i,j,k} d2phi^i_{jk} v_j v_k sum_l (alpha_{il} + alpha_{li}) v_l.
    """
    hess = [np.asarray(H, dtype=float) for H in d2phi_at_0]
    alpha = np.asarray(alpha, dtype=float)
    n = alpha.shape[0] if n is None else n
    terms: dict[MultiIndex, float] = {}

    def add(beta: MultiIndex, val: float):
        if val != 0.0:
            terms[beta] = terms.get(beta, 0.0) + val

    for k in range(n):
        ex = tuple(1 if m == k else 0 for m in range(n))
        coef = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    coef += (hess[j][i, k] + hess[i][j, k]) * alpha[i, j]
        for i in range(n):
            coef += 4.0 * hess[i][i, k] * alpha[i, i]
        add(mono(n, bx=ex), coef)

    for j in range(n):
        for k in range(n):
            for i in range(n):
                w = hess[i][j, k]
                if w == 0.0:
                    continue
                for l in range(n):
                    cv = -(w * (alpha[i, l] + alpha[l, i]))
                    if cv == 0.0:
                        continue
                    bv = [0] * n
                    bv[j] += 1
                    bv[k] += 1
                    bv[l] += 1
                    add(mono(n, bv=tuple(bv)), cv)

    out = {}
    for beta, cval in terms.items():
        if cval != 0.0:
            out[beta] = cval
    return KineticPolynomial(n, out)


def p1_normal_restriction(p1: KineticPolynomial) -> tuple[float, float]:
    """(alpha, beta) with p1(0, (0,..,x_n), (0,..,v_n)) = alpha x_n + beta v_n^3.
    The obstruction holds iff alpha != -2 beta (over the unit diffusion)."""
    n = p1.n
    ax = tuple(1 if m == n - 1 else 0 for m in range(n))
    bv3 = tuple(3 if m == n - 1 else 0 for m in range(n))
    alpha = float(p1.coefficient(mono(n, bx=ax)))
    beta = float(p1.coefficient(mono(n, bv=bv3)))
    return alpha, beta
