"""Velocity recovery from azimuthal vorticity.

Production path: solve the streamfunction equation

    E^2 Psi := d_rr Psi - (1/r) d_r Psi + d_zz Psi = -r * omega_theta

with homogeneous Dirichlet data on all four sides (Psi = 0 on the axis by
symmetry, and on the outer boundaries by the whole-space truncation), then
differentiate:  v^r = -(1/r) d_z Psi,  v^z = (1/r) d_r Psi.

The solve is direct and deterministic: a type-I sine transform diagonalizes
the z-direction exactly on the interior nodes, leaving one tridiagonal
system in r per z-mode, factorized once at solver construction.

Validation path: the singular Biot-Savart integral over the 3D field,
reduced to an azimuthal quadrature over the meridional grid.  O(nr*nz) per
evaluation point; retained as an oracle only.
"""

import os

import numpy as np
import scipy.fft

from .errors import InvalidParameterError, InvalidParityError, SolverFailureError
from .grid import (
    MeridionalGrid,
    Parity,
    ScalarField2D,
    VelocityField,
    axis_quotient,
    d_dz,
)


def fft_workers() -> int:
    """Worker cap for scipy.fft, from AXIBOUSS_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("AXIBOUSS_THREADS", "1")))
    except ValueError:
        return 1


class ZModeTridiagonalSolver:
    """Direct solver for operators of the form  A_r + mode_scale * d_zz.

    A_r is a fixed tridiagonal operator along r (given by its three interior
    diagonals) and d_zz is diagonalized by the DST-I on the nz-2 interior
    z-nodes.  Dirichlet boundary values are zero on all four sides.  The
    per-mode Thomas factorizations are precomputed; solves are pure.
    """

    def __init__(self, grid: MeridionalGrid, lower, diag, upper, mode_scale: float):
        self.grid = grid
        ni = grid.nr - 2           # interior r nodes
        m = grid.nz - 2            # interior z nodes / sine modes
        k = np.arange(1, m + 1)
        # eigenvalues of the centered second difference with Dirichlet ends
        self.lam = (2.0 * np.cos(np.pi * k / (m + 1)) - 2.0) / grid.dz ** 2

        self._lower = np.asarray(lower, dtype=np.float64)
        self._upper = np.asarray(upper, dtype=np.float64)
        b = np.asarray(diag, dtype=np.float64)[None, :] + mode_scale * self.lam[:, None]

        # Thomas factorization, vectorized over modes: shape (m, ni)
        cp = np.empty((m, ni))
        inv = np.empty((m, ni))
        piv = b[:, 0]
        if np.any(np.abs(piv) < 1e-300):
            raise SolverFailureError("singular tridiagonal factorization")
        inv[:, 0] = 1.0 / piv
        cp[:, 0] = self._upper[0] * inv[:, 0]
        for i in range(1, ni):
            piv = b[:, i] - self._lower[i] * cp[:, i - 1]
            if np.any(np.abs(piv) < 1e-300):
                raise SolverFailureError("singular tridiagonal factorization")
            inv[:, i] = 1.0 / piv
            if i < ni - 1:
                cp[:, i] = self._upper[i] * inv[:, i]
        self._cp = cp
        self._inv = inv
        self._ni = ni
        self._m = m

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve on the full (nr, nz) array; boundary entries are ignored
        on input and returned as zeros."""
        grid = self.grid
        interior = rhs[1:-1, 1:-1]
        rhat = scipy.fft.dst(interior, type=1, axis=1, workers=fft_workers())
        rhat = rhat.T  # (m, ni)

        y = np.empty_like(rhat)
        y[:, 0] = rhat[:, 0] * self._inv[:, 0]
        for i in range(1, self._ni):
            y[:, i] = (rhat[:, i] - self._lower[i] * y[:, i - 1]) * self._inv[:, i]
        for i in range(self._ni - 2, -1, -1):
            y[:, i] -= self._cp[:, i] * y[:, i + 1]

        sol = scipy.fft.idst(y.T, type=1, axis=1, workers=fft_workers())
        out = np.zeros(grid.shape)
        out[1:-1, 1:-1] = sol
        return out


class StreamSolver:
    """Factorized direct solver for the streamfunction equation."""

    def __init__(self, grid: MeridionalGrid):
        self.grid = grid
        dr = grid.dr
        ri = grid.r[1:-1]
        lower = 1.0 / dr ** 2 + 1.0 / (2.0 * ri * dr)
        upper = 1.0 / dr ** 2 - 1.0 / (2.0 * ri * dr)
        diag = np.full(grid.nr - 2, -2.0 / dr ** 2)
        self._core = ZModeTridiagonalSolver(grid, lower, diag, upper, mode_scale=1.0)

    def solve(self, omega_theta: ScalarField2D) -> ScalarField2D:
        if omega_theta.parity is not Parity.ODD:
            raise InvalidParityError("omega_theta must be Odd")
        rhs = -self.grid.r_col * omega_theta.values
        psi = self._core.solve(rhs)
        return ScalarField2D(self.grid, psi, Parity.ODD, copy=False)

    def apply_operator(self, psi: ScalarField2D) -> np.ndarray:
        """Discrete E^2 Psi on interior nodes (residual checks)."""
        v = psi.values
        g = self.grid
        dr, dz = g.dr, g.dz
        ri = g.r_col[1:-1]
        out = np.zeros(g.shape)
        out[1:-1, 1:-1] = (
            (v[2:, 1:-1] - 2.0 * v[1:-1, 1:-1] + v[:-2, 1:-1]) / dr ** 2
            - (v[2:, 1:-1] - v[:-2, 1:-1]) / (2.0 * dr * ri)
            + (v[1:-1, 2:] - 2.0 * v[1:-1, 1:-1] + v[1:-1, :-2]) / dz ** 2
        )
        return out


def solve_streamfunction(omega_theta: ScalarField2D, solver: StreamSolver = None) -> ScalarField2D:
    if solver is None:
        solver = StreamSolver(omega_theta.grid)
    return solver.solve(omega_theta)


def velocity_from_streamfunction(psi: ScalarField2D) -> VelocityField:
    """Differentiate Psi into a discretely divergence-free velocity.

    d_z Psi vanishes identically on the axis row (Psi does), so the radial
    component is a clean Odd field and the axis limit of -d_z Psi / r is
    zero.  The vertical component v^z = (1/r) d_r Psi is the axis quotient
    of the centered radial derivative, except on the axis row itself, where
    the limit equals d_rr Psi(0, z) and is taken one-sidedly from Psi
    directly: dividing an already-differenced d_r Psi by r there would turn
    its O(dr^2) truncation into O(dr).
    """
    if psi.parity is not Parity.ODD:
        raise InvalidParityError("psi must be Odd")
    g = psi.grid

    dpsi_dz = d_dz(psi)
    dpsi_dz[0, :] = 0.0
    vr_vals = np.empty(g.shape)
    vr_vals[1:, :] = -dpsi_dz[1:, :] / g.r_col[1:, :]
    vr_vals[0, :] = 0.0
    vr = ScalarField2D(g, vr_vals, Parity.ODD, copy=False)

    v = psi.values
    dr = g.dr
    dpsi_dr = np.empty(g.shape)
    dpsi_dr[1:-1, :] = (v[2:, :] - v[:-2, :]) / (2.0 * dr)
    dpsi_dr[-1, :] = (3.0 * v[-1, :] - 4.0 * v[-2, :] + v[-3, :]) / (2.0 * dr)
    dpsi_dr[0, :] = 0.0
    vz = axis_quotient(ScalarField2D(g, dpsi_dr, Parity.ODD, copy=False))
    vz_vals = np.array(vz.values)
    # one-sided second derivative with Psi(0, z) = 0; second order, and
    # exact through the cubic term of Psi
    vz_vals[0, :] = (-5.0 * v[1, :] + 4.0 * v[2, :] - v[3, :]) / dr ** 2
    return VelocityField(vr, ScalarField2D(g, vz_vals, Parity.EVEN, copy=False))


def velocity_from_vorticity(omega_theta: ScalarField2D, solver: StreamSolver = None) -> VelocityField:
    """Convenience composition of the two production-path steps."""
    return velocity_from_streamfunction(solve_streamfunction(omega_theta, solver))


def vr_over_r(v: VelocityField) -> ScalarField2D:
    """The ratio v^r / r (Even); drives every support estimate."""
    return axis_quotient(v.vr)


def biot_savart_direct(omega_theta: ScalarField2D, points, n_phi: int = 64):
    """Evaluate the free-space Biot-Savart integral at meridional points.

    For an azimuthal vorticity field the 3D integral reduces, at a point
    (rp, zp) in the phi = 0 half-plane, to

      v^r = (1/4pi) II w(r',z') r' (zp - z') Ic dr' dz'
      v^z = (1/4pi) II w(r',z') r' Iv dr' dz'

    with azimuthal integrals

      Ic = int cos(phi) / d^3 dphi,   Iv = int (r' - rp cos(phi)) / d^3 dphi,
      d^2 = rp^2 + r'^2 - 2 rp r' cos(phi) + (z'-zp)^2,

    evaluated here by an n_phi-point uniform (trapezoidal) rule, which is the
    natural quadrature for periodic integrands.  The meridional quadrature is
    the grid trapezoid rule with a one-cell square around the evaluation
    point excluded, accepting first-order local error near the singularity.

    Returns a list of (v^r, v^z) tuples.  Points must be strictly inside the
    grid.
    """
    if omega_theta.parity is not Parity.ODD:
        raise InvalidParityError("omega_theta must be Odd")
    g = omega_theta.grid
    w = omega_theta.values

    wr = np.full(g.nr, g.dr)
    wr[0] = wr[-1] = 0.5 * g.dr
    wz = np.full(g.nz, g.dz)
    wz[0] = wz[-1] = 0.5 * g.dz
    base = w * (g.r * wr)[:, None] * wz[None, :]

    phi = (np.arange(n_phi) + 0.5) * (2.0 * np.pi / n_phi)
    cphi = np.cos(phi)
    dphi = 2.0 * np.pi / n_phi

    rcol = g.r_col
    zrow = g.z_row
    out = []
    for (rp, zp) in points:
        if not (0.0 < rp < g.Lr and -g.Lz < zp < g.Lz):
            raise InvalidParameterError(f"evaluation point ({rp}, {zp}) not strictly inside the grid")
        mask = (np.abs(rcol - rp) <= g.dr) & (np.abs(zrow - zp) <= g.dz)
        src = np.where(mask, 0.0, base)

        d2 = (rp ** 2 + rcol ** 2 + (zrow - zp) ** 2)[:, :, None] - (2.0 * rp * rcol)[:, :, None] * cphi
        inv_d3 = d2 ** -1.5
        ic = (inv_d3 * cphi).sum(axis=2) * dphi
        iv = (inv_d3 * (rcol[:, :, None] - rp * cphi)).sum(axis=2) * dphi

        vr_val = float(np.sum(src * (zp - zrow) * ic)) / (4.0 * np.pi)
        vz_val = float(np.sum(src * iv)) / (4.0 * np.pi)
        out.append((vr_val, vz_val))
    return out


def biot_savart_csv_text(points, velocities) -> str:
    """CSV export of integral-oracle evaluations: r, z, v^r, v^z."""
    lines = ["r,z,vr,vz"]
    for (r, z), (vr_val, vz_val) in zip(points, velocities):
        lines.append(f"{float(r)!r},{float(z)!r},{vr_val!r},{vz_val!r}")
    return "\n".join(lines) + "\n"
