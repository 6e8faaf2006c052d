"""Particle trajectories of the meridional flow and support-geometry checks.

Trajectories follow  dr/dt = v^r,  dz/dt = v^z  with RK4 in time and bicubic
sampling in space; the azimuth never changes because the field carries no
swirl, so theta is copied, never integrated.  Velocity fields are supplied
by a callable ``velocity_at(t)``; the run pipeline feeds it from stored
snapshots with linear interpolation in time, so trajectory verification is
decoupled from the stepper.

The geometric checks quantify the two support propositions: the two-sided
exponential envelope for the distance of a trajectory to the axis, driven
by the time integral of ||v^r/r||_inf, and the linear growth of the
z-projected support diameter, driven by the integral of ||v||_inf.
"""

import warnings
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np

from .errors import InvalidInputError, InvalidParameterError
from .grid import Parity, ScalarField2D, VelocityField, lp_norm
from .interp import sample_velocity


@dataclass
class ParticleSet:
    """Structure-of-arrays particle storage.

    ``escaped`` particles left the grid during integration; they keep their
    last in-grid position and are excluded from metrics.  ``axis_crossings``
    counts clamps at r = 0, which a well-resolved integration never needs.
    """

    r: np.ndarray
    theta: np.ndarray
    z: np.ndarray
    escaped: np.ndarray = None
    axis_crossings: int = 0

    def __post_init__(self):
        self.r = np.array(self.r, dtype=np.float64)
        self.theta = np.array(self.theta, dtype=np.float64)
        self.z = np.array(self.z, dtype=np.float64)
        if np.any(self.r < 0):
            raise InvalidParameterError("particle radius must be >= 0")
        if self.escaped is None:
            self.escaped = np.zeros(self.r.shape, dtype=bool)
        else:
            self.escaped = np.array(self.escaped, dtype=bool)

    @classmethod
    def from_seeds(cls, seeds: Sequence[Tuple[float, float]], theta: float = 0.0):
        seeds = list(seeds)
        return cls(
            r=np.array([s[0] for s in seeds]),
            theta=np.full(len(seeds), theta),
            z=np.array([s[1] for s in seeds]),
        )

    def copy(self) -> "ParticleSet":
        return ParticleSet(self.r.copy(), self.theta.copy(), self.z.copy(),
                           self.escaped.copy(), self.axis_crossings)

    def __len__(self):
        return self.r.size


@dataclass
class SupportMetrics:
    """Axis distance and z-extent of a thresholded numerical support."""

    dist_to_axis: float
    z_diameter: float
    threshold: float
    empty: bool = False


class VelocityHistory:
    """Stored velocity snapshots with linear interpolation in time."""

    def __init__(self):
        self.times: List[float] = []
        self.fields: List[VelocityField] = []

    def append(self, t: float, v: VelocityField):
        if self.times and t <= self.times[-1]:
            raise InvalidInputError("velocity snapshots must be strictly time-ordered")
        self.times.append(float(t))
        self.fields.append(v)

    def __call__(self, t: float) -> VelocityField:
        times = self.times
        if not times:
            raise InvalidInputError("empty velocity history")
        if t < times[0] - 1e-9 or t > times[-1] + 1e-9:
            raise InvalidInputError(f"t={t} outside stored history [{times[0]}, {times[-1]}]")
        k = int(np.searchsorted(times, t, side="right")) - 1
        k = max(0, min(k, len(times) - 2)) if len(times) > 1 else 0
        if len(times) == 1 or t <= times[0]:
            return self.fields[0]
        t0, t1 = times[k], times[k + 1]
        if t >= t1:
            return self.fields[k + 1]
        a = (t - t0) / (t1 - t0)
        v0, v1 = self.fields[k], self.fields[k + 1]
        vr = v0.vr.with_values((1 - a) * v0.vr.values + a * v1.vr.values, copy=False)
        vz = v0.vz.with_values((1 - a) * v0.vz.values + a * v1.vz.values, copy=False)
        return VelocityField(vr, vz)


def advance_particles(particles: ParticleSet, velocity_at: Callable[[float], VelocityField],
                      t0: float, t1: float, dt: float) -> ParticleSet:
    """RK4 integration of the particle ODEs from t0 to t1 (either direction).

    theta is untouched.  Particles that leave the grid are marked escaped
    (with a warning) and frozen; r is clamped at zero with a crossing count
    if an RK4 update overshoots the axis.
    """
    if dt <= 0:
        raise InvalidParameterError("dt must be positive")
    out = particles.copy()
    if t1 == t0:
        return out

    direction = 1.0 if t1 > t0 else -1.0
    total = abs(t1 - t0)
    n_steps = max(1, int(np.ceil(total / dt - 1e-12)))
    h = direction * total / n_steps

    grid = velocity_at(t0).grid
    active = ~out.escaped
    t = t0
    for _ in range(n_steps):
        r, z = out.r, out.z
        va = velocity_at(t)
        vb = velocity_at(t + 0.5 * h)
        vc = velocity_at(t + h)

        k1r, k1z = sample_velocity(va, r, z)
        k2r, k2z = sample_velocity(vb, r + 0.5 * h * k1r, z + 0.5 * h * k1z)
        k3r, k3z = sample_velocity(vb, r + 0.5 * h * k2r, z + 0.5 * h * k2z)
        k4r, k4z = sample_velocity(vc, r + h * k3r, z + h * k3z)

        rn = r + (h / 6.0) * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
        zn = z + (h / 6.0) * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)

        crossed = active & (rn < 0.0)
        if np.any(crossed):
            out.axis_crossings += int(np.count_nonzero(crossed))
            rn = np.where(crossed, 0.0, rn)

        exited = active & ((rn > grid.Lr) | (zn < -grid.Lz) | (zn > grid.Lz))
        if np.any(exited):
            warnings.warn(f"{int(np.count_nonzero(exited))} particle(s) escaped the grid; "
                          "excluded from metrics", stacklevel=2)
            out.escaped |= exited
            active = ~out.escaped

        out.r = np.where(active, rn, out.r)
        out.z = np.where(active, zn, out.z)
        t += h
    return out


def axis_distance_bounds_check(r_start: float, r_end: float,
                               times: np.ndarray, vr_over_r_linf: np.ndarray):
    """Two-sided exponential envelope for the axis distance of a trajectory.

    ``times``/``vr_over_r_linf`` sample ||v^r/r(tau)||_inf over the
    integration window; the integral is taken by the trapezoid rule.
    Returns (lhs, observed, rhs) with lhs = r_start * exp(-|I|) and
    rhs = r_start * exp(+|I|).
    """
    times = np.asarray(times, dtype=np.float64)
    vals = np.asarray(vr_over_r_linf, dtype=np.float64)
    if times.size < 1 or times.size != vals.size:
        raise InvalidInputError("sup-norm history must be nonempty and aligned with times")
    if np.any(np.diff(times) <= 0):
        raise InvalidInputError("history times must be strictly increasing")
    integral = abs(float(np.trapezoid(vals, times))) if times.size > 1 else 0.0
    return r_start * np.exp(-integral), r_end, r_start * np.exp(integral)


def support_metrics(rho: ScalarField2D, threshold: float) -> SupportMetrics:
    """Geometry of the thresholded support {|rho| > threshold}.

    The axis distance is reduced by half a cell and the diameter widened by
    a cell on each side, so the reported numbers bracket the true
    (sub-grid) support: a smooth bump vanishing at its boundary has its
    outermost nonzero values strictly inside the last grid cell.  An empty
    support returns the +inf / 0 sentinel, flagged.
    """
    if threshold <= 0:
        raise InvalidParameterError("support threshold must be positive")
    mask = np.abs(rho.values) > threshold
    if not np.any(mask):
        return SupportMetrics(np.inf, 0.0, threshold, empty=True)
    g = rho.grid
    idx_r, idx_z = np.nonzero(mask)
    dist = max(float(g.r[idx_r.min()]) - 0.5 * g.dr, 0.0)
    zmin = float(g.z[idx_z.min()])
    zmax = float(g.z[idx_z.max()])
    return SupportMetrics(dist, zmax - zmin + 2.0 * g.dz, threshold, empty=False)


def rho_over_r_l2(rho: ScalarField2D) -> float:
    """||rho/r||_{L^2} by plain division; the axis row is dropped (it has
    zero quadrature weight, and the estimate is only meaningful while the
    support stays off the axis)."""
    g = rho.grid
    quot = np.zeros(g.shape)
    quot[1:, :] = rho.values[1:, :] / g.r_col[1:, :]
    return lp_norm(ScalarField2D(g, quot, Parity.EVEN, copy=False), 2)


def rho_over_r_bound_check(times, rho_over_r_l2_series, int_vr_over_r, int_v,
                           r0: float, d0: float, rho0_l2: float, rho0_linf: float,
                           dist_to_axis, dr: float):
    """Quadratic bound for ||rho/r||^2: per-time (lhs, rhs, suspended) rows.

    lhs = ||rho/r||^2 at each time; rhs is the transported-support bound

        (1/r0^2) ||rho_0||^2
          + 2 pi ||rho_0||_inf^2 * I_{v^r/r}(t) * (d0 + 2 I_v(t)).

    Rows where the numerical support has come within 2 dr of the axis are
    flagged suspended: the derivation needs off-axis support.
    """
    times = np.asarray(times, dtype=np.float64)
    if np.any(np.diff(times) <= 0):
        raise InvalidInputError("series times must be strictly increasing")
    out = []
    for k, t in enumerate(times):
        lhs = rho_over_r_l2_series[k] ** 2
        rhs = (rho0_l2 ** 2 / r0 ** 2
               + 2.0 * np.pi * rho0_linf ** 2 * int_vr_over_r[k] * (d0 + 2.0 * int_v[k]))
        suspended = bool(dist_to_axis[k] < 2.0 * dr)
        out.append((float(t), float(lhs), float(rhs), suspended))
    return out


def triad_jacobian(velocity_at: Callable[[float], VelocityField], r0: float, z0: float,
                   t0: float, t1: float, dt: float, delta: float = 1e-3) -> float:
    """3D flow-map Jacobian estimated from a small particle cluster.

    A base particle plus centered satellite pairs along r and z span the
    (r, z) block of the Jacobian; the azimuthal stretch contributes the
    factor R/r, giving det J = det2d * R/r, which equals 1 exactly for a
    divergence-free field.
    """
    h = 0.5 * delta
    base = ParticleSet(np.array([r0, r0 + h, r0 - h, r0, r0]),
                       np.zeros(5),
                       np.array([z0, z0, z0, z0 + h, z0 - h]))
    moved = advance_particles(base, velocity_at, t0, t1, dt)
    if np.any(moved.escaped):
        raise InvalidInputError("jacobian cluster escaped the grid")
    drdx = (moved.r[1] - moved.r[2]) / delta
    dzdx = (moved.z[1] - moved.z[2]) / delta
    drdy = (moved.r[3] - moved.r[4]) / delta
    dzdy = (moved.z[3] - moved.z[4]) / delta
    det2d = drdx * dzdy - drdy * dzdx
    return float(det2d * moved.r[0] / r0)
