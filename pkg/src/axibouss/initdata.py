"""Initial-data generators and the support-stable mollifier.

The generators produce fields satisfying the global-regularity hypotheses:
the vorticity ring vanishes linearly at the axis (so omega/r is square
integrable) and the density bump is smooth, compactly supported, and stays
strictly off the axis.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidParameterError
from .grid import MeridionalGrid, Parity, ScalarField2D
from .lpaley import quintic_smoothstep

MOLLIFIER_FLAT = 9.0 / 16.0   # kernel == peak for |x| <= 9/16, 0 beyond 1
                              # (the chi transition shape rescaled to B(0,1))


@dataclass
class RingParams:
    """Parameters for the ring-shaped generators.

    The Gaussian vorticity ring uses (amplitude, r0, z0, sigma); the compact
    density bump uses (amplitude, r1, r2, z0, h).  Unused fields may stay
    None.
    """

    amplitude: float
    r0: Optional[float] = None
    z0: float = 0.0
    sigma: Optional[float] = None
    r1: Optional[float] = None
    r2: Optional[float] = None
    h: Optional[float] = None


def gaussian_vortex_ring(p: RingParams, grid: MeridionalGrid) -> ScalarField2D:
    """Odd vorticity ring from a Gaussian and its reflected image.

    w(r,z) = A [ e^{-((r-r0)^2+(z-z0)^2)/s^2} - e^{-((r+r0)^2+(z-z0)^2)/s^2} ]

    The image term makes the field exactly odd in r, so the axis row is zero
    to the last bit and w/r has a finite limit everywhere.
    """
    if p.r0 is None or p.r0 <= 0:
        raise InvalidParameterError("vortex ring needs r0 > 0")
    if p.sigma is None or p.sigma <= 0:
        raise InvalidParameterError("vortex ring needs sigma > 0")
    R, Z = grid.mesh()
    zz = (Z - p.z0) ** 2
    vals = p.amplitude * (
        np.exp(-((R - p.r0) ** 2 + zz) / p.sigma ** 2)
        - np.exp(-((R + p.r0) ** 2 + zz) / p.sigma ** 2)
    )
    vals[0, :] = 0.0
    return ScalarField2D(grid, vals, Parity.ODD, copy=False)


def _bump(s: np.ndarray) -> np.ndarray:
    """exp(-1/(s(1-s))) on (0,1), zero elsewhere; peak value exp(-4)."""
    out = np.zeros_like(s)
    inside = (s > 0.0) & (s < 1.0)
    si = s[inside]
    out[inside] = np.exp(-1.0 / (si * (1.0 - si)))
    return out


BUMP_PEAK = math.exp(-4.0)


def annular_density(p: RingParams, grid: MeridionalGrid) -> ScalarField2D:
    """Smooth compactly supported density on the annulus [r1, r2] x [z0-h, z0+h].

    rho(r,z) = A * B((r-r1)/(r2-r1)) * B((z-z0+h)/(2h)) with the standard
    bump B(s) = exp(-1/(s(1-s))).  The sup is A * exp(-8), attained at the
    bump center.  r1 > 0 is required: support touching the axis would break
    the hypotheses every support estimate relies on.
    """
    if p.r1 is None or p.r2 is None or p.h is None:
        raise InvalidParameterError("annular density needs r1, r2, h")
    if p.r1 <= 0:
        raise InvalidParameterError(
            "annular density needs r1 > 0: the support must clear the axis")
    if p.r2 <= p.r1 or p.h <= 0:
        raise InvalidParameterError("annular density needs r2 > r1 and h > 0")
    R, Z = grid.mesh()
    vals = (p.amplitude
            * _bump((R - p.r1) / (p.r2 - p.r1))
            * _bump((Z - p.z0 + p.h) / (2.0 * p.h)))
    return ScalarField2D(grid, vals, Parity.EVEN, copy=False)


def _mollifier_profile(s: np.ndarray) -> np.ndarray:
    """Radial kernel shape on [0, 1]: flat core, quintic decay (same
    transition shape as the dyadic low-pass profile)."""
    s = np.abs(np.asarray(s, dtype=np.float64))
    return 1.0 - quintic_smoothstep((s - MOLLIFIER_FLAT) / (1.0 - MOLLIFIER_FLAT))


def mollify(f: ScalarField2D, n: int, n_phi: int = 128) -> ScalarField2D:
    """Convolve with the radius-1/n radial bump, reduced to the meridional plane.

    The 3D convolution of an axisymmetric field is computed exactly in
    structure: an azimuthal quadrature collapses the kernel to
    K(r, r', dz) and a windowed 2D sum does the rest.  The discrete kernel
    is normalized per output node (constants are reproduced exactly, the
    sup norm cannot grow).  Even fields convolve as scalars; Odd fields are
    treated as azimuthal vector components, which weights the kernel by
    cos(phi) and keeps the axis row exactly zero.

    Support grows by at most 1/n in every direction.  Requires
    1/n >= 2*max(dr, dz) so the kernel is resolvable.
    """
    if n <= 0:
        raise InvalidParameterError("mollification index n must be positive")
    g = f.grid
    radius = 1.0 / n
    if radius < 2.0 * max(g.dr, g.dz):
        raise InvalidParameterError(
            f"mollifier radius 1/{n} is not resolvable on a grid with "
            f"dr={g.dr:.3g}, dz={g.dz:.3g}")

    mr = int(np.ceil(radius / g.dr))
    mz = int(np.ceil(radius / g.dz))
    dzs = np.arange(-mz, mz + 1) * g.dz
    phi = (np.arange(n_phi) + 0.5) * (2.0 * np.pi / n_phi)
    cphi = np.cos(phi)
    odd = f.parity is Parity.ODD

    # source rows carry the cylindrical weight; trapezoid ends fold in too
    wr = np.full(g.nr, 1.0)
    wr[0] = wr[-1] = 0.5
    wz = np.full(g.nz, 1.0)
    wz[0] = wz[-1] = 0.5
    weighted = f.values * (g.r * wr)[:, None] * wz[None, :]
    ones = np.ones_like(f.values) * (g.r * wr)[:, None] * wz[None, :]

    out = np.zeros(g.shape)
    mass = np.zeros(g.shape)
    r = g.r
    for i in range(g.nr):
        lo = max(0, i - mr)
        hi = min(g.nr - 1, i + mr)
        rp = r[lo:hi + 1]                                    # (m_r,)
        d2 = (r[i] ** 2 + rp[:, None] ** 2 + dzs[None, :] ** 2)[:, :, None] \
            - (2.0 * r[i] * rp)[:, None, None] * cphi        # (m_r, m_dz, n_phi)
        dist = np.sqrt(np.maximum(d2, 0.0))
        shape = _mollifier_profile(dist * n)
        if odd:
            kern = (shape * cphi).sum(axis=2)
        else:
            kern = shape.sum(axis=2)
        mass_kern = shape.sum(axis=2)
        for a, ip in enumerate(range(lo, hi + 1)):
            out[i, :] += np.convolve(weighted[ip, :], kern[a, ::-1], mode="same")
            mass[i, :] += np.convolve(ones[ip, :], mass_kern[a, ::-1], mode="same")

    with np.errstate(invalid="ignore", divide="ignore"):
        result = np.where(mass > 0.0, out / mass, 0.0)
    if odd:
        result[0, :] = 0.0
    return ScalarField2D(g, result, f.parity, copy=False)
