"""Meridional grid, parity-aware sampled fields, and cylindrical-weighted norms.

Fields are sampled on a uniform node grid covering the half-plane section
{0 <= r <= Lr, -Lz <= z <= Lz} of an axisymmetric domain; the symmetry axis
r = 0 is a grid row.  Every scalar carries a declared parity describing its
behavior under the reflection r -> -r:

* Even: smooth axisymmetric scalars (density, vertical velocity); all odd
  r-derivatives vanish on the axis.
* Odd: azimuthal vector components (azimuthal vorticity, radial velocity)
  and the streamfunction; the value on the axis row is exactly zero.

All "3D" norms are evaluated from the meridional samples with the 2*pi*r
volume weight (trapezoidal quadrature), which is exact for axisymmetric
integrands up to quadrature error.  The axis row carries zero quadrature
weight, so axis-limit values never contaminate integrals.
"""

import enum
import struct

import numpy as np

from .errors import InvalidParameterError, InvalidParityError

FIELD_MAGIC = b"AXIBOUSS-FLD\x00\x00\x00\x01"


class Parity(enum.Enum):
    EVEN = 0
    ODD = 1


class MeridionalGrid:
    """Uniform node grid on [0, Lr] x [-Lz, Lz] with the axis row at r = 0."""

    def __init__(self, nr: int, nz: int, Lr: float, Lz: float):
        if nr < 8 or nz < 8:
            raise InvalidParameterError(f"grid needs nr, nz >= 8, got {nr}x{nz}")
        if Lr <= 0 or Lz <= 0:
            raise InvalidParameterError(f"grid extents must be positive, got Lr={Lr}, Lz={Lz}")
        self.nr = int(nr)
        self.nz = int(nz)
        self.Lr = float(Lr)
        self.Lz = float(Lz)
        self.dr = self.Lr / (self.nr - 1)
        self.dz = 2.0 * self.Lz / (self.nz - 1)
        self.r = np.linspace(0.0, self.Lr, self.nr)
        self.z = np.linspace(-self.Lz, self.Lz, self.nz)
        # column/row views for broadcasting over (nr, nz) value arrays
        self.r_col = self.r[:, None]
        self.z_row = self.z[None, :]
        # trapezoid weights; the r-weight carries the cylindrical factor r
        wr = np.full(self.nr, self.dr)
        wr[0] = wr[-1] = 0.5 * self.dr
        wz = np.full(self.nz, self.dz)
        wz[0] = wz[-1] = 0.5 * self.dz
        self._quad_weights = 2.0 * np.pi * (self.r * wr)[:, None] * wz[None, :]

    @property
    def shape(self):
        return (self.nr, self.nz)

    def mesh(self):
        """Broadcast (R, Z) coordinate arrays of shape (nr, nz)."""
        return np.broadcast_to(self.r_col, self.shape), np.broadcast_to(self.z_row, self.shape)

    def same_as(self, other) -> bool:
        return (self.nr, self.nz, self.Lr, self.Lz) == (other.nr, other.nz, other.Lr, other.Lz)

    def __repr__(self):
        return f"MeridionalGrid(nr={self.nr}, nz={self.nz}, Lr={self.Lr}, Lz={self.Lz})"


class ScalarField2D:
    """Grid-sampled scalar with declared axis parity.

    Values are stored as a read-only (nr, nz) float array indexed [i, j] with
    i along r and j along z.  Construction validates finiteness and, for Odd
    fields, the exact zero on the axis row.
    """

    def __init__(self, grid: MeridionalGrid, values, parity: Parity, copy: bool = True):
        arr = np.array(values, dtype=np.float64, copy=copy)
        if arr.shape != grid.shape:
            raise InvalidParameterError(f"values shape {arr.shape} != grid shape {grid.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidParameterError("field contains non-finite values")
        if parity is Parity.ODD and np.any(arr[0, :] != 0.0):
            raise InvalidParityError("odd field must vanish exactly on the axis row")
        arr.setflags(write=False)
        self.grid = grid
        self.values = arr
        self.parity = parity

    def with_values(self, values, parity=None, copy: bool = True) -> "ScalarField2D":
        """New field on the same grid (same parity unless overridden)."""
        return ScalarField2D(self.grid, values, self.parity if parity is None else parity, copy=copy)

    def __repr__(self):
        return f"ScalarField2D({self.grid!r}, parity={self.parity.name})"


def zero_field(grid: MeridionalGrid, parity: Parity) -> ScalarField2D:
    return ScalarField2D(grid, np.zeros(grid.shape), parity, copy=False)


class VelocityField:
    """Meridional velocity (v^r, v^z); the swirl component is identically zero.

    v^r is Odd (zero on the axis), v^z is Even.  Fields produced by the
    streamfunction path satisfy the discrete divergence-free identity up to
    rounding; see :func:`divergence`.
    """

    def __init__(self, vr: ScalarField2D, vz: ScalarField2D):
        if not vr.grid.same_as(vz.grid):
            raise InvalidParameterError("velocity components live on different grids")
        if vr.parity is not Parity.ODD:
            raise InvalidParityError("v^r must be Odd")
        if vz.parity is not Parity.EVEN:
            raise InvalidParityError("v^z must be Even")
        self.grid = vr.grid
        self.vr = vr
        self.vz = vz

    def speed_linf(self) -> float:
        """Nodewise max of the Euclidean speed sqrt(vr^2 + vz^2)."""
        return float(np.sqrt(self.vr.values ** 2 + self.vz.values ** 2).max())


def zero_velocity(grid: MeridionalGrid) -> VelocityField:
    return VelocityField(zero_field(grid, Parity.ODD), zero_field(grid, Parity.EVEN))


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------

def d_dr(f: ScalarField2D, axis_one_sided: bool = False) -> np.ndarray:
    """Second-order d/dr of the sampled values.

    Centered in the interior, one-sided second order at r = Lr.  On the axis
    row the parity ghost f(-dr) = +/- f(dr) is used, except when
    ``axis_one_sided`` is set (needed for fields like the streamfunction whose
    grid parity tag does not match their smooth even extension).
    """
    v = f.values
    dr = f.grid.dr
    out = np.empty_like(v)
    out[1:-1, :] = (v[2:, :] - v[:-2, :]) / (2.0 * dr)
    out[-1, :] = (3.0 * v[-1, :] - 4.0 * v[-2, :] + v[-3, :]) / (2.0 * dr)
    if axis_one_sided:
        out[0, :] = (-3.0 * v[0, :] + 4.0 * v[1, :] - v[2, :]) / (2.0 * dr)
    elif f.parity is Parity.EVEN:
        out[0, :] = 0.0
    else:
        out[0, :] = v[1, :] / dr
    return out


def d_dz(f: ScalarField2D) -> np.ndarray:
    """Second-order d/dz: centered interior, one-sided at z = -Lz, +Lz."""
    v = f.values
    dz = f.grid.dz
    out = np.empty_like(v)
    out[:, 1:-1] = (v[:, 2:] - v[:, :-2]) / (2.0 * dz)
    out[:, 0] = (-3.0 * v[:, 0] + 4.0 * v[:, 1] - v[:, 2]) / (2.0 * dz)
    out[:, -1] = (3.0 * v[:, -1] - 4.0 * v[:, -2] + v[:, -3]) / (2.0 * dz)
    return out


# ---------------------------------------------------------------------------
# norms and integrals
# ---------------------------------------------------------------------------

def volume_integral(f: ScalarField2D) -> float:
    """Trapezoidal quadrature of 2*pi * integral of f(r,z) r dr dz."""
    return float(np.sum(f.grid._quad_weights * f.values))


def _weighted_integral(grid: MeridionalGrid, values: np.ndarray) -> float:
    return float(np.sum(grid._quad_weights * values))


def lp_norm(f: ScalarField2D, p) -> float:
    """Cylindrically weighted 3D L^p norm; p = inf gives the nodewise max.

    The sup norm is taken over grid nodes only (no subgrid reconstruction),
    hence is a lower bound of the true sup.
    """
    p = float(p)
    if np.isinf(p):
        return float(np.abs(f.values).max())
    if p < 1.0:
        raise InvalidParameterError(f"L^p norm needs p >= 1, got {p}")
    return _weighted_integral(f.grid, np.abs(f.values) ** p) ** (1.0 / p)


def h1_seminorm(f: ScalarField2D) -> float:
    """Scalar homogeneous H^1 seminorm: ||(d_r f, d_z f)||_{L^2}."""
    gr = d_dr(f)
    gz = d_dz(f)
    return float(np.sqrt(max(_weighted_integral(f.grid, gr * gr + gz * gz), 0.0)))


def axis_quotient(f: ScalarField2D) -> ScalarField2D:
    """f / r with the axis row replaced by the limit d_r f(0, z).

    Only defined for Odd fields (an Even numerator would be singular).  The
    axis limit uses the one-sided second-order stencil, which reduces to
    (4 f_1 - f_2) / (2 dr) because f vanishes on the axis.  Result is Even.
    """
    if f.parity is not Parity.ODD:
        raise InvalidParityError("axis_quotient requires an Odd field")
    v = f.values
    grid = f.grid
    out = np.empty_like(v)
    out[1:, :] = v[1:, :] / grid.r_col[1:, :]
    out[0, :] = (4.0 * v[1, :] - v[2, :]) / (2.0 * grid.dr)
    return ScalarField2D(grid, out, Parity.EVEN, copy=False)


def azimuthal_vector_h1(omega_theta: ScalarField2D) -> float:
    """Homogeneous H^1 norm of the vector field omega_theta * e_theta.

    In cylindrical coordinates this is (||grad w||^2 + ||w/r||^2)^(1/2) for
    the azimuthal component w.
    """
    if omega_theta.parity is not Parity.ODD:
        raise InvalidParityError("azimuthal component must be Odd")
    grad_sq = h1_seminorm(omega_theta) ** 2
    over_r = lp_norm(axis_quotient(omega_theta), 2)
    return float(np.sqrt(grad_sq + over_r ** 2))


def divergence(v: VelocityField) -> ScalarField2D:
    """Discrete (1/r) d_r(r v^r) + d_z v^z as an Even field.

    The axis row uses the limit 2 d_r v^r(0,z) + d_z v^z(0,z).
    """
    grid = v.grid
    m = grid.r_col * v.vr.values           # r * v^r, Even, zero on axis
    dm = np.empty_like(m)
    dr = grid.dr
    dm[1:-1, :] = (m[2:, :] - m[:-2, :]) / (2.0 * dr)
    dm[-1, :] = (3.0 * m[-1, :] - 4.0 * m[-2, :] + m[-3, :]) / (2.0 * dr)
    dm[0, :] = 0.0                          # unused; axis handled below
    out = np.empty_like(m)
    out[1:, :] = dm[1:, :] / grid.r_col[1:, :]
    out[0, :] = 2.0 * v.vr.values[1, :] / dr
    out += d_dz(v.vz)
    return ScalarField2D(grid, out, Parity.EVEN, copy=False)


# ---------------------------------------------------------------------------
# field snapshot files
# ---------------------------------------------------------------------------

def write_field(f: ScalarField2D, path) -> None:
    """Binary snapshot: magic, LE u32 nr/nz, f64 Lr/Lz, u8 parity, f64 values.

    Values are row-major with r as the leading index.
    """
    header = FIELD_MAGIC + struct.pack(
        "<IIddB", f.grid.nr, f.grid.nz, f.grid.Lr, f.grid.Lz, f.parity.value
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def read_field(path) -> ScalarField2D:
    with open(path, "rb") as fh:
        magic = fh.read(len(FIELD_MAGIC))
        if magic != FIELD_MAGIC:
            raise InvalidParameterError(f"{path}: bad field-file magic")
        nr, nz, Lr, Lz, parity = struct.unpack("<IIddB", fh.read(25))
        data = fh.read(nr * nz * 8)
    if len(data) != nr * nz * 8:
        raise InvalidParameterError(f"{path}: truncated field file")
    grid = MeridionalGrid(nr, nz, Lr, Lz)
    values = np.frombuffer(data, dtype="<f8").reshape(nr, nz)
    return ScalarField2D(grid, values, Parity(parity))
