"""Finite-difference solver for v f_x - A f_vv = h on a half strip,
stationary or time dependent, with specular reflection, in-flow, or
Dirichlet boundary data.

Discretization: nodes in x (x_i = x_min + i*hx), staggered cells in v
(v_j = -v_max + (j + 1/2) hv) so that v = 0 is a cell face and no row has
a degenerate upwind direction. Transport is upwind, first order at the
boundary rows and minmod-limited second order inside (applied as a
deferred correction so each x-station stays tridiagonal in v); diffusion
in v is implicit. The stationary solver is a Gauss-Seidel sweep along the
transport direction; a monolithic first-order sparse solve provides an
independent cross-check on coarse grids. The time stepper is IMEX
(explicit transport under a CFL bound, implicit diffusion) and shares the
transport stencil with the stationary path, so its long-time limit is the
stationary fixed point.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import solve_banded
from scipy.sparse import lil_matrix, csr_matrix
from scipy.sparse.linalg import spsolve


@dataclass(frozen=True)
class HalfStripGrid:
    x_max: float
    v_max: float
    nx: int
    nv: int
    nt: int = 0
    dt: float | None = None
    x_min: float = 0.0

    def __post_init__(self):
        if self.nx < 16 or self.nv < 16:
            raise ValueError("need nx, nv >= 16")
        if self.nv % 2 != 0:
            raise ValueError("nv must be even so that v = 0 is a cell face")
        if self.nt > 0 and (self.dt is None or self.dt <= 0):
            raise ValueError("time-dependent grid needs dt > 0")

    @property
    def hx(self) -> float:
        return (self.x_max - self.x_min) / self.nx

    @property
    def hv(self) -> float:
        return 2.0 * self.v_max / self.nv

    @property
    def xs(self) -> np.ndarray:
        return self.x_min + self.hx * np.arange(self.nx + 1)

    @property
    def vs(self) -> np.ndarray:
        return -self.v_max + self.hv * (np.arange(self.nv) + 0.5)


@dataclass(frozen=True)
class BoundaryCondition:
    """at_x0: 'specular', 'inflow', or 'periodic'.

    inflow_profile(t, v) supplies the incoming trace (v > 0 at the left
    edge); at_xmax(t, v) is the Dirichlet profile on the right edge;
    at_vmax is either a profile (t, x, v) or the string 'noflux'.
    """

    at_x0: str = "specular"
    inflow_profile: Callable[[float, float], float] | None = None
    at_xmax: Callable[[float, float], float] | None = None
    at_vmax: Callable[[float, float, float], float] | str | None = None

    def __post_init__(self):
        if self.at_x0 not in ("specular", "inflow", "dirichlet", "periodic"):
            raise ValueError(f"unknown at_x0 mode {self.at_x0!r}")
        if self.at_x0 in ("inflow", "dirichlet") and self.inflow_profile is None:
            raise ValueError("inflow/dirichlet modes need an inflow_profile")


@dataclass
class Field:
    """Gridded solution; values[i, j] lives at (x_i, v_j)."""

    grid: HalfStripGrid
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        expect = (self.grid.nx + 1, self.grid.nv)
        if self.values.shape != expect:
            raise ValueError(f"values shape {self.values.shape} != {expect}")

    def check_finite(self):
        if not np.all(np.isfinite(self.values)):
            raise FloatingPointError("field contains non-finite values")

    def interpolator(self, kind: int = 3):
        """Spline interpolant f(x, v) over the grid (for probing)."""
        from scipy.interpolate import RectBivariateSpline

        return RectBivariateSpline(self.grid.xs, self.grid.vs, self.values,
                                   kx=kind, ky=kind)

    def to_csv(self, path: str):
        xs, vs = self.grid.xs, self.grid.vs
        with open(path, "w") as fh:
            fh.write("x,v,value\n")
            for i, x in enumerate(xs):
                for j, v in enumerate(vs):
                    fh.write(f"{x!r},{v!r},{self.values[i, j]!r}\n")

    def to_binary(self, path: str):
        with open(path, "wb") as fh:
            fh.write(b"KFP1")
            fh.write(struct.pack("<iiddd", self.grid.nx, self.grid.nv,
                                 self.grid.x_min, self.grid.x_max, self.grid.v_max))
            fh.write(self.values.astype("<f8").tobytes(order="C"))

    @classmethod
    def from_binary(cls, path: str) -> "Field":
        with open(path, "rb") as fh:
            magic = fh.read(4)
            if magic != b"KFP1":
                raise ValueError("bad magic in field file")
            nx, nv, x_min, x_max, v_max = struct.unpack("<iiddd", fh.read(32))
            vals = np.frombuffer(fh.read(8 * (nx + 1) * nv), dtype="<f8").reshape(nx + 1, nv)
            grid = HalfStripGrid(x_max=x_max, v_max=v_max, nx=nx, nv=nv, x_min=x_min)
            return cls(grid, vals.copy())


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-10
    max_iter: int = 100_000
    order: int = 2
    method: str = "sweep"   # or 'direct' (first-order sparse cross-check)


class SolverError(RuntimeError):
    def __init__(self, msg, residual_history=None):
        super().__init__(msg)
        self.residual_history = residual_history or []


def _minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    s = np.where((a > 0) & (b > 0), 1.0, np.where((a < 0) & (b < 0), -1.0, 0.0))
    return s * np.minimum(np.abs(a), np.abs(b))


def _transport_correction(f: np.ndarray, vs: np.ndarray, hx: float,
                          specular_left: bool = False) -> np.ndarray:
    """Deferred correction lifting first-order upwind to limited second
    order: corr[i, j] such that v df/dx ~ v (f_i - f_upwind)/hx + corr.

    The mirror extension of a specular solution generically has an
    x-derivative kink at the wall (the extended source is discontinuous),
    so no smooth-across-the-wall stencil is used: station 0 (v<0 rows)
    gets a one-sided second-order correction and the wall-adjacent faces
    fall back to centered differences. specular_left is accepted for
    interface compatibility; the treatment is the same one-sided one.
    """
    del specular_left
    nxp1, nv = f.shape
    corr = np.zeros_like(f)
    pos = vs > 0
    neg = ~pos

    d = np.diff(f, axis=0)  # d[i] = f[i+1] - f[i]
    # v > 0: delta_p[i] corrects the face i+1/2 (upwind side is the left);
    # the face next to the inflow node is centered instead of limited.
    delta_p = np.zeros((nxp1, nv))
    if nxp1 > 2:
        delta_p[1:nxp1 - 1] = 0.5 * _minmod(d[:-1], d[1:])
    delta_p[0] = 0.5 * d[0]
    corr[1:nxp1 - 1, :] += np.where(pos, (vs / hx) * (delta_p[1:nxp1 - 1] - delta_p[0:nxp1 - 2]), 0.0)

    # v < 0: upwind side is the right; the face next to the Dirichlet
    # node x_max is centered.
    delta_m = np.zeros((nxp1, nv))
    if nxp1 > 2:
        delta_m[0:nxp1 - 2] = -0.5 * _minmod(d[:-1], d[1:])
    delta_m[nxp1 - 2] = -0.5 * d[nxp1 - 2]
    corr[1:nxp1 - 1, :] += np.where(neg, (vs / hx) * (delta_m[1:nxp1 - 1] - delta_m[0:nxp1 - 2]), 0.0)

    # one-sided second-order correction at the outflow station
    if nxp1 > 2:
        corr[0, neg] = -(vs[neg] / (2.0 * hx)) * (f[0, neg] - 2.0 * f[1, neg] + f[2, neg])
    return corr


def _wall_values(bc: BoundaryCondition, t: float, x: float, grid: HalfStripGrid):
    vs = grid.vs
    if bc.at_vmax == "noflux" or bc.at_vmax is None:
        return None, None
    return bc.at_vmax(t, x, vs[0]), bc.at_vmax(t, x, vs[-1])


def _station_solve(rhs_row, vs, hx, hv, A, upwind_known, wall, noflux,
                   mode: str = "full", inflow_row=None):
    """Solve the tridiagonal v-system at one x-station.

    rhs_row already contains source and deferred corrections;
    upwind_known[j] is the transported neighbor value.
    mode 'full': all nv rows are unknowns (interior stations).
    mode 'fold': reflection station; solve the v<0 block with the mirror
    fold at the v = 0 face, then mirror onto the v>0 rows.
    mode 'lower': solve only the v<0 block, with the prescribed inflow
    row values (inflow_row) entering through the diffusion coupling.
    """
    nv = len(vs)
    k = A / hv ** 2
    if mode in ("fold", "lower"):
        m = nv // 2
        idx = np.arange(m)
        diag = np.abs(vs[idx]) / hx + 2.0 * k
        ab = np.zeros((3, m))
        ab[0, 1:] = -k
        ab[2, :-1] = -k
        rhs = rhs_row[idx] + np.abs(vs[idx]) / hx * upwind_known[idx]
        if mode == "fold":
            diag[m - 1] -= k        # mirror fold: u_m = u_{m-1}
        else:
            rhs[m - 1] += k * inflow_row[m]
        if noflux:
            diag[0] -= k
        else:
            diag[0] = 1.0
            ab[0, 1] = 0.0
            rhs[0] = wall[0]
        ab[1, :] = diag
        sol = solve_banded((1, 1), ab, rhs)
        out = np.empty(nv)
        out[:m] = sol
        out[m:] = sol[::-1] if mode == "fold" else inflow_row[m:]
        return out
    diag = np.abs(vs) / hx + 2.0 * k
    ab = np.zeros((3, nv))
    ab[0, 1:] = -k
    ab[2, :-1] = -k
    rhs = rhs_row + np.abs(vs) / hx * upwind_known
    if noflux:
        diag[0] -= k
        diag[-1] -= k
    else:
        diag[0] = diag[-1] = 1.0
        ab[0, 1] = ab[2, -2] = 0.0
        rhs[0], rhs[-1] = wall
    ab[1, :] = diag
    return solve_banded((1, 1), ab, rhs)


def solve_stationary(h, bc: BoundaryCondition, A: float, grid: HalfStripGrid,
                     opts: SolverOptions = SolverOptions()) -> Field:
    """Solve v f_x - A f_vv = h on the strip with the given boundary data.

    h may be an (nx+1, nv) array or a callable h(x, v). Raises SolverError
    with the residual history on non-convergence.
    """
    if A <= 0:
        raise ValueError("diffusion A must be positive")
    if bc.at_x0 == "periodic":
        raise ValueError("periodic runs are time-dependent only")
    if bc.at_xmax is None:
        raise ValueError("stationary solve needs Dirichlet data at x_max")
    xs, vs = grid.xs, grid.vs
    hx, hv = grid.hx, grid.hv
    nxp1, nv = grid.nx + 1, grid.nv
    m = nv // 2
    if callable(h):
        H = np.array([[h(x, v) for v in vs] for x in xs])
    else:
        H = np.asarray(h, dtype=float)
        if H.shape != (nxp1, nv):
            raise ValueError("source array has wrong shape")

    if opts.method == "direct":
        return _solve_direct(H, bc, A, grid)

    noflux = bc.at_vmax == "noflux" or bc.at_vmax is None
    f = np.zeros((nxp1, nv))
    f[-1, :] = [bc.at_xmax(0.0, v) for v in vs]
    if not noflux:
        for i, x in enumerate(xs):
            f[i, 0] = bc.at_vmax(0.0, x, vs[0])
            f[i, -1] = bc.at_vmax(0.0, x, vs[-1])

    pos = vs > 0
    history = []
    if bc.at_x0 == "dirichlet":
        f[0, :] = [bc.inflow_profile(0.0, v) for v in vs]

    for sweep in range(opts.max_iter):
        f_old = f.copy()
        if opts.order == 2:
            corr = _transport_correction(f, vs, hx, specular_left=(bc.at_x0 == "specular"))
        else:
            corr = np.zeros_like(f)

        # station 0
        wall0 = _wall_values(bc, 0.0, xs[0], grid)
        if bc.at_x0 == "specular":
            f[0, :] = _station_solve(H[0] - corr[0], vs, hx, hv, A, f[1], wall0,
                                     noflux, mode="fold")
        elif bc.at_x0 == "inflow":  # v>0 rows prescribed, v<0 block solved one-sided
            g = np.array([bc.inflow_profile(0.0, v) if v > 0 else 0.0 for v in vs])
            f[0, :] = _station_solve(H[0] - corr[0], vs, hx, hv, A, f[1], wall0,
                                     noflux, mode="lower", inflow_row=g)
            if not noflux:
                f[0, 0] = wall0[0]
                f[0, -1] = wall0[1]

        # forward sweep: v > 0 rows get fresh upstream values
        for i in range(1, nxp1 - 1):
            wall = _wall_values(bc, 0.0, xs[i], grid)
            upw = np.where(pos, f[i - 1], f[i + 1])
            f[i, :] = _station_solve(H[i] - corr[i], vs, hx, hv, A, upw, wall, noflux)
        # backward sweep: v < 0 rows get fresh downstream values
        for i in range(nxp1 - 2, 0, -1):
            wall = _wall_values(bc, 0.0, xs[i], grid)
            upw = np.where(pos, f[i - 1], f[i + 1])
            f[i, :] = _station_solve(H[i] - corr[i], vs, hx, hv, A, upw, wall, noflux)

        delta = float(np.max(np.abs(f - f_old)))
        scale = max(1.0, float(np.max(np.abs(f))))
        history.append(delta / scale)
        if delta / scale < opts.tol:
            fld = Field(grid, f, {"A": A, "bc": bc.at_x0, "sweeps": sweep + 1})
            fld.check_finite()
            return fld
    raise SolverError(f"stationary sweep did not converge in {opts.max_iter} iterations",
                      history)


def _solve_direct(H, bc: BoundaryCondition, A, grid: HalfStripGrid) -> Field:
    """Monolithic first-order sparse solve (cross-check path)."""
    nxp1, nv = grid.nx + 1, grid.nv
    if nxp1 * nv > 2 ** 14:
        raise ValueError("direct solve limited to nx*nv <= 2^14")
    xs, vs = grid.xs, grid.vs
    hx, hv = grid.hx, grid.hv
    k = A / hv ** 2
    m = nv // 2
    noflux = bc.at_vmax == "noflux" or bc.at_vmax is None

    def idx(i, j):
        return i * nv + j

    Mt = lil_matrix((nxp1 * nv, nxp1 * nv))
    rhs = np.zeros(nxp1 * nv)

    for i in range(nxp1):
        for j in range(nv):
            r = idx(i, j)
            v = vs[j]
            if i == nxp1 - 1:
                Mt[r, r] = 1.0
                rhs[r] = bc.at_xmax(0.0, v)
                continue
            if not noflux and (j == 0 or j == nv - 1):
                Mt[r, r] = 1.0
                rhs[r] = bc.at_vmax(0.0, xs[i], v)
                continue
            if i == 0 and bc.at_x0 == "dirichlet":
                Mt[r, r] = 1.0
                rhs[r] = bc.inflow_profile(0.0, v)
                continue
            if i == 0 and v > 0:
                if bc.at_x0 == "specular":
                    Mt[r, r] = 1.0
                    Mt[r, idx(0, nv - 1 - j)] = -1.0
                    rhs[r] = 0.0
                else:
                    Mt[r, r] = 1.0
                    rhs[r] = bc.inflow_profile(0.0, v)
                continue
            # upwind transport + implicit diffusion
            Mt[r, r] = abs(v) / hx + 2.0 * k
            if v > 0:
                Mt[r, idx(i - 1, j)] = -abs(v) / hx
            else:
                Mt[r, idx(i + 1, j)] = -abs(v) / hx
            if j > 0:
                Mt[r, idx(i, j - 1)] = -k
            else:
                Mt[r, r] -= k  # noflux ghost
            if j < nv - 1:
                Mt[r, idx(i, j + 1)] = -k
            else:
                Mt[r, r] -= k
            rhs[r] = H[i, j]
    sol = spsolve(csr_matrix(Mt), rhs)
    fld = Field(grid, sol.reshape(nxp1, nv), {"A": A, "bc": bc.at_x0, "method": "direct"})
    fld.check_finite()
    return fld


def mirror_extend(fld: Field) -> Field:
    """Extend across x = 0 by f(-x, -v) = f(x, v).

    Only meaningful for fields solved with the specular condition; the
    extension solves the same constant-coefficient equation on the full
    strip."""
    if fld.metadata.get("bc") not in (None, "specular"):
        raise ValueError("mirror extension requires a specular field")
    g = fld.grid
    if g.x_min != 0.0:
        raise ValueError("field is already a full-strip field")
    full = HalfStripGrid(x_max=g.x_max, v_max=g.v_max, nx=2 * g.nx, nv=g.nv,
                         nt=g.nt, dt=g.dt, x_min=-g.x_max)
    vals = np.empty((2 * g.nx + 1, g.nv))
    vals[g.nx:, :] = fld.values
    vals[:g.nx, :] = fld.values[g.nx:0:-1, ::-1]
    return Field(full, vals, dict(fld.metadata, extended=True))


def _transport_apply(f, vs, hx, bc_mode):
    """Full second-order limited transport operator v df/dx (explicit)."""
    nxp1, nv = f.shape
    pos = vs > 0
    out = np.zeros_like(f)
    if bc_mode == "periodic":
        fp = np.vstack([f[-3:-1], f, f[1:3]])  # ghost via wrap (node nx == node 0)
        d = np.diff(fp, axis=0)
        for i in range(nxp1):
            ip = i + 2
            fhat_r = np.where(pos, fp[ip] + 0.5 * _minmod(d[ip - 1], d[ip]),
                              fp[ip + 1] - 0.5 * _minmod(d[ip], d[ip + 1]))
            fhat_l = np.where(pos, fp[ip - 1] + 0.5 * _minmod(d[ip - 2], d[ip - 1]),
                              fp[ip] - 0.5 * _minmod(d[ip - 1], d[ip]))
            out[i] = vs * (fhat_r - fhat_l) / hx
        return out
    corr = _transport_correction(f, vs, hx, specular_left=(bc_mode == "specular"))
    d = np.diff(f, axis=0)
    first = np.zeros_like(f)
    first[1:, pos] = vs[pos] * d[:, pos] / hx
    first[:-1, ~pos] = vs[~pos] * d[:, ~pos] / hx
    # one-sided rows at the boundaries for the signs that need them
    first[0, pos] = vs[pos] * d[0, pos] / hx
    first[-1, ~pos] = vs[~pos] * d[-1, ~pos] / hx
    return first + corr


def solve_timedep(f0: Field, h, bc: BoundaryCondition, A: float, T: float,
                  store_every: int = 0) -> list[Field]:
    """IMEX time stepping up to horizon T: explicit limited transport,
    implicit v-diffusion. Refuses to run when dt violates the CFL bound
    dt <= 0.5 hx / v_max. Returns the trajectory (at least initial and
    final slices)."""
    grid = f0.grid
    if grid.dt is None or grid.dt <= 0:
        raise ValueError("grid needs dt > 0")
    dt, hx, hv = grid.dt, grid.hx, grid.hv
    if dt > 0.5 * hx / grid.v_max + 1e-15:
        raise ValueError(f"CFL violation: dt = {dt} > 0.5 hx / v_max = {0.5 * hx / grid.v_max}")
    xs, vs = grid.xs, grid.vs
    nxp1, nv = grid.nx + 1, grid.nv
    m = nv // 2
    pos = vs > 0
    noflux = bc.at_vmax == "noflux" or bc.at_vmax is None
    nsteps = int(round(T / dt))
    if callable(h):
        H = np.array([[h(x, v) for v in vs] for x in xs])
    elif h is None:
        H = np.zeros((nxp1, nv))
    else:
        H = np.asarray(h, dtype=float)

    f = f0.values.copy()
    out = [Field(grid, f.copy(), dict(f0.metadata, t=0.0))]
    k = A / hv ** 2

    def diffuse_station(fstar_row, wall, fold):
        if fold:
            mm = nv // 2
            diag = np.full(mm, 1.0 + 2.0 * dt * k)
            ab = np.zeros((3, mm))
            ab[0, 1:] = -dt * k
            ab[2, :-1] = -dt * k
            rhs = fstar_row[:mm].copy()
            diag[mm - 1] -= dt * k
            if noflux:
                diag[0] -= dt * k
            else:
                diag[0] = 1.0
                ab[0, 1] = 0.0
                rhs[0] = wall[0]
            ab[1] = diag
            sol = solve_banded((1, 1), ab, rhs)
            row = np.empty(nv)
            row[:mm] = sol
            row[mm:] = sol[::-1]
            return row
        diag = np.full(nv, 1.0 + 2.0 * dt * k)
        ab = np.zeros((3, nv))
        ab[0, 1:] = -dt * k
        ab[2, :-1] = -dt * k
        rhs = fstar_row.copy()
        if noflux:
            diag[0] -= dt * k
            diag[-1] -= dt * k
        else:
            diag[0] = diag[-1] = 1.0
            ab[0, 1] = ab[2, -2] = 0.0
            rhs[0], rhs[-1] = wall
        ab[1] = diag
        return solve_banded((1, 1), ab, rhs)

    t = 0.0
    for step in range(nsteps):
        fstar = f - dt * _transport_apply(f, vs, hx, bc.at_x0) + dt * H
        t_next = t + dt
        for i in range(nxp1):
            wall = _wall_values(bc, t_next, xs[i], grid)
            fold = (i == 0 and bc.at_x0 == "specular")
            f[i, :] = diffuse_station(fstar[i], wall, fold)
        if bc.at_x0 == "periodic":
            f[-1, :] = f[0, :]
        else:
            f[-1, :] = [bc.at_xmax(t_next, v) for v in vs]
            if bc.at_x0 == "inflow":
                f[0, pos] = [bc.inflow_profile(t_next, v) for v in vs[pos]]
        t = t_next
        if store_every and (step + 1) % store_every == 0:
            out.append(Field(grid, f.copy(), dict(f0.metadata, t=t)))
    if not store_every or nsteps % store_every != 0:
        out.append(Field(grid, f.copy(), dict(f0.metadata, t=t)))
    out[-1].check_finite()
    return out


def v_marginal_moments(fld: Field, periodic: bool = False):
    """(mass, mean, variance) of the v-marginal, trapezoid in x."""
    g = fld.grid
    w = np.full(g.nx + 1, g.hx)
    if periodic:
        w[-1] = 0.0
    else:
        w[0] = w[-1] = 0.5 * g.hx
    rho = (fld.values * w[:, None]).sum(axis=0) * g.hv
    mass = rho.sum()
    mean = (rho * g.vs).sum() / mass
    var = (rho * (g.vs - mean) ** 2).sum() / mass
    return mass, mean, var
