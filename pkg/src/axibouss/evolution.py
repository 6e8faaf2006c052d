"""Time stepping for the coupled vorticity-density system.

Unknowns: azimuthal vorticity w (Odd) and density rho (Even).  The velocity
is always recovered from w through the streamfunction solve, never supplied
directly, so incompressibility and the no-swirl structure hold by
construction.

    d_t w + v . grad w = (Lap - 1/r^2) w + (v^r/r) w - d_r rho
    d_t rho + v . grad rho = 0

Default scheme (IMEX): the stiff linear part L = Lap - 1/r^2 is advanced by
Crank-Nicolson using the same z-sine-transform + tridiagonal direct solver
as the streamfunction; advection, stretching and buoyancy are explicit with
a Heun (RK2) corrector.  Density is advanced by a monotone semi-Lagrangian
step (RK2 back-trace, bicubic interpolation, four-node clipping), which
enforces the transport maximum principle exactly.

A FullyExplicit variant (Heun on the complete right-hand side) is retained
for cross-validation at small dt; it restores the dt ~ h^2 diffusion limit.

Near the axis the singular terms are evaluated through the identity
(1/r) d_r w - w/r^2 = d_r(w/r), with w/r provided by the axis_quotient
limit; every term of the right-hand side is odd, so the axis row is zero.
Outer boundaries are homogeneous Dirichlet for w; runs are expected to keep
the vorticity support away from them.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .elliptic import StreamSolver, ZModeTridiagonalSolver, velocity_from_streamfunction
from .errors import BlowUpError, InvalidParameterError, StepRejectedError
from .grid import (
    MeridionalGrid,
    Parity,
    ScalarField2D,
    VelocityField,
    axis_quotient,
    d_dr,
    d_dz,
)
from .interp import sample_field, sample_velocity


@dataclass
class StepControl:
    """Time-step selection parameters."""

    cfl_advect: float = 0.5
    cfl_diffuse: float = 0.25     # only binds when scheme == "FullyExplicit"
    dt_max: float = 0.01
    scheme: str = "IMEX"

    def __post_init__(self):
        if self.cfl_advect <= 0 or self.cfl_advect > 1:
            raise InvalidParameterError("cfl_advect must lie in (0, 1]")
        if self.cfl_diffuse <= 0 or self.dt_max <= 0:
            raise InvalidParameterError("cfl_diffuse and dt_max must be positive")
        if self.scheme not in ("IMEX", "FullyExplicit"):
            raise InvalidParameterError(f"unknown scheme {self.scheme!r}")


@dataclass
class FlowState:
    """Simulation time, the two scalar unknowns, and the cached velocity."""

    t: float
    omega_theta: ScalarField2D
    rho: ScalarField2D
    velocity: VelocityField


def initial_state(omega_theta: ScalarField2D, rho: ScalarField2D,
                  solver: StreamSolver = None) -> FlowState:
    """Assemble a t = 0 state; the velocity is solved from the vorticity."""
    if solver is None:
        solver = StreamSolver(omega_theta.grid)
    v = velocity_from_streamfunction(solver.solve(omega_theta))
    return FlowState(0.0, omega_theta, rho, v)


def _radial_diffusion_coefficients(grid: MeridionalGrid):
    """Interior-row tridiagonal coefficients of d_rr + (1/r) d_r - 1/r^2.

    Off the first ring this is the raw stencil.  On the first interior ring
    the singular pair (1/r) d_r - 1/r^2 is replaced by the equivalent
    d_r(w/r) written through the odd Taylor structure w = a r + b r^3:
    d_r(w/r)(dr) = (w_2 - 2 w_1) / (3 dr^2), exact through the cubic term.
    The raw stencil there is only first-order accurate because the
    axis-limit quotient enters a centered difference.
    """
    dr = grid.dr
    ri = grid.r[1:-1]
    lower = 1.0 / dr ** 2 - 1.0 / (2.0 * ri * dr)
    upper = 1.0 / dr ** 2 + 1.0 / (2.0 * ri * dr)
    diag = -2.0 / dr ** 2 - 1.0 / ri ** 2
    lower[0] = 1.0 / dr ** 2                     # couples the zero axis row
    diag[0] = -2.0 / dr ** 2 - 2.0 / (3.0 * dr ** 2)
    upper[0] = 1.0 / dr ** 2 + 1.0 / (3.0 * dr ** 2)
    return lower, diag, upper


class DiffusionSolver:
    """Crank-Nicolson building blocks for L = Lap - 1/r^2 with Dirichlet data.

    ``solve_backward(rhs, alpha)`` inverts (I - alpha L); factorizations are
    cached per alpha, so runs at constant dt factorize once.
    """

    def __init__(self, grid: MeridionalGrid):
        self.grid = grid
        self._lower, self._diag, self._upper = _radial_diffusion_coefficients(grid)
        self._cache = {}

    def apply(self, values: np.ndarray) -> np.ndarray:
        """The discrete L on interior nodes (boundary rows return 0).

        Uses the same stencil as the implicit matrix so that the CN pair is
        an exact adjoint/inverse pair up to rounding.
        """
        g = self.grid
        out = np.zeros(g.shape)
        out[1:-1, 1:-1] = (
            self._lower[:, None] * values[:-2, 1:-1]
            + self._diag[:, None] * values[1:-1, 1:-1]
            + self._upper[:, None] * values[2:, 1:-1]
            + (values[1:-1, 2:] - 2.0 * values[1:-1, 1:-1] + values[1:-1, :-2]) / g.dz ** 2
        )
        return out

    def solve_backward(self, rhs: np.ndarray, alpha: float) -> np.ndarray:
        """Solve (I - alpha L) x = rhs with homogeneous Dirichlet data."""
        solver = self._cache.get(alpha)
        if solver is None:
            diag = 1.0 - alpha * self._diag
            solver = ZModeTridiagonalSolver(
                self.grid, -alpha * self._lower, diag, -alpha * self._upper,
                mode_scale=-alpha)
            if len(self._cache) > 8:
                self._cache.clear()
            self._cache[alpha] = solver
        return solver.solve(rhs)

    def explicit_stability_limit(self, cfl_diffuse: float) -> float:
        """dt bound for explicit treatment of L (largest-eigenvalue estimate)."""
        g = self.grid
        lam = 4.0 / g.dr ** 2 + 4.0 / g.dz ** 2 + 1.0 / g.dr ** 2
        return cfl_diffuse * 2.0 / lam


def _zero_edges(arr: np.ndarray) -> np.ndarray:
    arr[0, :] = 0.0
    arr[-1, :] = 0.0
    arr[:, 0] = 0.0
    arr[:, -1] = 0.0
    return arr


def _explicit_terms(omega: ScalarField2D, rho: ScalarField2D, v: VelocityField) -> np.ndarray:
    """Advection + stretching + buoyancy (everything except diffusion)."""
    adv = v.vr.values * d_dr(omega) + v.vz.values * d_dz(omega)
    stretch = axis_quotient(v.vr).values * omega.values
    buoy = -d_dr(rho)
    return _zero_edges(-adv + stretch + buoy)


def vorticity_rhs(state: FlowState) -> ScalarField2D:
    """Full right-hand side of the vorticity equation as an Odd field.

    The diffusion block is written as d_rr w + d_zz w + d_r(w/r), which is
    identical to (Lap - 1/r^2) w away from the axis but stays well
    conditioned on the first interior ring.
    """
    g = state.omega_theta.grid
    w = state.omega_theta.values
    diff = np.zeros(g.shape)
    diff[1:-1, :] = (w[2:, :] - 2.0 * w[1:-1, :] + w[:-2, :]) / g.dr ** 2
    diff[:, 1:-1] += (w[:, 2:] - 2.0 * w[:, 1:-1] + w[:, :-2]) / g.dz ** 2
    dgam = d_dr(axis_quotient(state.omega_theta))
    # first interior ring: centered d_r on the quotient loses an order, the
    # odd-structure form (w_2 - 2 w_1)/(3 dr^2) is exact through r^3
    dgam[1, :] = (w[2, :] - 2.0 * w[1, :]) / (3.0 * g.dr ** 2)
    diff += dgam
    rhs = _zero_edges(diff) + _explicit_terms(state.omega_theta, state.rho, state.velocity)
    return ScalarField2D(g, _zero_edges(rhs), Parity.ODD, copy=False)


def advect_density(rho: ScalarField2D, v: VelocityField, dt: float,
                   cfl_advect: float = 0.5) -> ScalarField2D:
    """One monotone semi-Lagrangian transport step.

    Departure points are traced back with a single RK2 (midpoint) substep,
    rho is interpolated bicubically there, and the result is clipped to the
    min/max of the four grid nodes surrounding each departure point, which
    makes the discrete maximum principle exact.  Departure points left of
    the axis are folded back by the evenness of rho.
    """
    if dt <= 0:
        raise InvalidParameterError("dt must be positive")
    g = rho.grid
    vmax = v.speed_linf()
    if vmax == 0.0:
        return rho
    admissible = cfl_advect * min(g.dr, g.dz) / vmax
    if dt > admissible * (1.0 + 1e-12):
        raise StepRejectedError(
            f"advection CFL violated: dt={dt:.3e} > {admissible:.3e}", admissible)

    R, Z = g.mesh()
    rm = R - 0.5 * dt * v.vr.values
    zm = Z - 0.5 * dt * v.vz.values
    vrm, vzm = sample_velocity(v, rm, zm)
    rd = R - dt * vrm
    zd = Z - dt * vzm

    rd = np.abs(rd)                       # even reflection across the axis
    np.clip(rd, 0.0, g.Lr, out=rd)
    np.clip(zd, -g.Lz, g.Lz, out=zd)

    vals = sample_field(rho, rd, zd)

    # monotone hull of the four surrounding nodes
    x = rd / g.dr
    y = (zd + g.Lz) / g.dz
    i0 = np.clip(np.floor(x).astype(np.int64), 0, g.nr - 2)
    j0 = np.clip(np.floor(y).astype(np.int64), 0, g.nz - 2)
    f = rho.values
    c00 = f[i0, j0]
    c10 = f[i0 + 1, j0]
    c01 = f[i0, j0 + 1]
    c11 = f[i0 + 1, j0 + 1]
    lo = np.minimum(np.minimum(c00, c10), np.minimum(c01, c11))
    hi = np.maximum(np.maximum(c00, c10), np.maximum(c01, c11))
    np.clip(vals, lo, hi, out=vals)
    return ScalarField2D(g, vals, Parity.EVEN, copy=False)


class Stepper:
    """Owns the factorized solvers for repeated stepping on one grid."""

    def __init__(self, grid: MeridionalGrid):
        self.grid = grid
        self.stream = StreamSolver(grid)
        self.diffusion = DiffusionSolver(grid)

    def _velocity(self, omega: ScalarField2D, frozen: Optional[VelocityField]) -> VelocityField:
        if frozen is not None:
            return frozen
        return velocity_from_streamfunction(self.stream.solve(omega))

    def select_dt(self, state: FlowState, ctl: StepControl, dt_cap: float = np.inf) -> float:
        g = self.grid
        dt = min(ctl.dt_max, dt_cap)
        vmax = state.velocity.speed_linf()
        if vmax > 0.0:
            dt = min(dt, ctl.cfl_advect * min(g.dr, g.dz) / vmax)
        if ctl.scheme == "FullyExplicit":
            dt = min(dt, self.diffusion.explicit_stability_limit(ctl.cfl_diffuse))
        if dt <= 0.0:
            raise InvalidParameterError("non-positive time step selected")
        return dt

    def step(self, state: FlowState, ctl: StepControl, dt_cap: float = np.inf,
             frozen_velocity: Optional[VelocityField] = None) -> FlowState:
        """Advance one step; dt is chosen from the CFL bounds, dt_max and
        dt_cap.  ``frozen_velocity`` bypasses the elliptic solve (oracle and
        cross-validation runs only).  Non-finite values anywhere in the
        update surface as a BlowUpError carrying the last valid state."""
        dt = self.select_dt(state, ctl, dt_cap)
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                return self._step_inner(state, ctl, dt, frozen_velocity)
        except InvalidParameterError as err:
            # mid-step field construction only rejects non-finite values
            raise BlowUpError(f"blow-up at t={state.t + dt:.6g}: {err}",
                              last_state=state) from err

    def _step_inner(self, state, ctl, dt, frozen_velocity):
        g = self.grid
        w_n = state.omega_theta
        rho_n = state.rho
        v_n = state.velocity

        if ctl.scheme == "IMEX":
            lw = self.diffusion.apply(w_n.values)
            e1 = _explicit_terms(w_n, rho_n, v_n)
            base = w_n.values + 0.5 * dt * lw
            w_star_vals = self.diffusion.solve_backward(base + dt * e1, 0.5 * dt)
            w_star = ScalarField2D(g, w_star_vals, Parity.ODD, copy=False)
            v_star = self._velocity(w_star, frozen_velocity)
            rho_star = advect_density(rho_n, v_n, dt, ctl.cfl_advect)
            e2 = _explicit_terms(w_star, rho_star, v_star)
            w_next_vals = self.diffusion.solve_backward(base + 0.5 * dt * (e1 + e2), 0.5 * dt)
        else:
            k1 = vorticity_rhs(state).values
            w_star = ScalarField2D(g, _zero_edges(w_n.values + dt * k1), Parity.ODD, copy=False)
            v_star = self._velocity(w_star, frozen_velocity)
            rho_star = advect_density(rho_n, v_n, dt, ctl.cfl_advect)
            mid = FlowState(state.t + dt, w_star, rho_star, v_star)
            k2 = vorticity_rhs(mid).values
            w_next_vals = _zero_edges(w_n.values + 0.5 * dt * (k1 + k2))

        if not np.all(np.isfinite(w_next_vals)):
            raise BlowUpError(f"non-finite vorticity at t={state.t + dt:.6g}", last_state=state)
        w_next = ScalarField2D(g, w_next_vals, Parity.ODD, copy=False)

        v_half = VelocityField(
            v_n.vr.with_values(0.5 * (v_n.vr.values + v_star.vr.values), copy=False),
            v_n.vz.with_values(0.5 * (v_n.vz.values + v_star.vz.values), copy=False),
        )
        rho_next = advect_density(rho_n, v_half, dt, ctl.cfl_advect)
        v_next = self._velocity(w_next, frozen_velocity)
        if not np.all(np.isfinite(v_next.vr.values)) or not np.all(np.isfinite(v_next.vz.values)):
            raise BlowUpError(f"non-finite velocity at t={state.t + dt:.6g}", last_state=state)
        return FlowState(state.t + dt, w_next, rho_next, v_next)


def step(state: FlowState, ctl: StepControl, dt_cap: float = np.inf,
         frozen_velocity: Optional[VelocityField] = None,
         stepper: Stepper = None) -> FlowState:
    """Single-shot step; builds a throwaway
    :class:`Stepper` unless one is supplied."""
    if stepper is None:
        stepper = Stepper(state.omega_theta.grid)
    return stepper.step(state, ctl, dt_cap, frozen_velocity)


def run(config, velocity_sink: Optional[Callable] = None,
        snapshot_sink: Optional[Callable] = None,
        warning_sink: Optional[Callable] = None):
    """Integrate a configured problem to t_end.

    Returns ``(records, final_state)``.  A DiagnosticsRecord is emitted at
    t = 0 and every ``record_interval``; ``velocity_sink(t, v)`` fires at the
    same times (the stored snapshots feed trajectory integration), and
    ``snapshot_sink(t, state)`` every ``snapshot_interval``.  All file
    writing is the caller's job.  Deterministic for a fixed config.

    Steps are capped so record and snapshot times are hit exactly.  On a
    rejected step (stage velocity overshooting the CFL bound) the step is
    retried at the admissible dt.
    """
    from . import diagnostics

    state = config.build_initial_state()
    ctl = config.step_control()
    stepper = Stepper(state.omega_theta.grid)
    threshold = config.support_threshold()

    records = [diagnostics.record(state, prev=None, support_threshold=threshold)]
    if velocity_sink is not None:
        velocity_sink(0.0, state.velocity)
    if snapshot_sink is not None:
        snapshot_sink(0.0, state)

    rho0_linf = records[0].rho_linf
    t_end = config.t_end
    rec_int = config.record_interval
    snap_int = config.snapshot_interval
    k_rec = 1
    k_snap = 1
    eps = 1e-12 * max(t_end, 1.0)

    # cumulative time integrals at step resolution; the record-to-record
    # trapezoid is too coarse through the fast initial transient
    integrals = np.zeros(5)
    integrands = np.array(diagnostics.integrand_values(state))

    while state.t < t_end - eps:
        t_next = min(t_end, k_rec * rec_int, k_snap * snap_int)
        cap = t_next - state.t
        t_prev = state.t
        try:
            state = stepper.step(state, ctl, dt_cap=cap)
        except StepRejectedError as err:
            state = stepper.step(state, ctl, dt_cap=0.9 * err.admissible_dt)

        new_integrands = np.array(diagnostics.integrand_values(state))
        integrals += 0.5 * (state.t - t_prev) * (integrands + new_integrands)
        integrands = new_integrands

        # transport maximum principle is structural; a violation means a bug
        if float(np.abs(state.rho.values).max()) > rho0_linf * (1.0 + 1e-14):
            raise AssertionError("density maximum principle violated")

        if state.t >= k_rec * rec_int - eps:
            records.append(diagnostics.record(
                state, prev=records[-1], support_threshold=threshold,
                integrals=tuple(integrals)))
            if velocity_sink is not None:
                velocity_sink(state.t, state.velocity)
            if warning_sink is not None:
                _boundary_proximity_warnings(state, warning_sink)
            k_rec += 1
        if state.t >= k_snap * snap_int - eps:
            if snapshot_sink is not None:
                snapshot_sink(state.t, state)
            k_snap += 1

    return records, state


def _boundary_proximity_warnings(state: FlowState, sink: Callable, band: int = 3,
                                 rel: float = 1e-6) -> None:
    """Report when vorticity or density reaches the outer boundaries.

    The Dirichlet truncation of the whole-space problem is only faithful
    while the fields stay small within ``band`` cells of r = Lr, z = +/-Lz.
    The sink receives (field_name, t, edge_level / field_max).
    """
    for name, f in (("omega_theta", state.omega_theta), ("rho", state.rho)):
        peak = float(np.abs(f.values).max())
        if peak == 0.0:
            continue
        v = np.abs(f.values)
        edge = max(v[-band:, :].max(), v[:, :band].max(), v[:, -band:].max())
        if edge > rel * peak:
            sink(name, state.t, edge / peak)
