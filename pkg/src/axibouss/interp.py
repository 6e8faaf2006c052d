"""Bicubic field sampling at off-grid points.

Uses the Keys cubic-convolution kernel (a = -1/2), which is C^1, local
(4x4 node stencil), reproduces quadratics exactly and converges at third
order.  Sample coordinates left of the axis are handled by parity
reflection, values beyond the outer boundaries by edge clamping; fields in
valid runs decay to ~0 there.
"""

import numpy as np

from .grid import Parity, ScalarField2D, VelocityField


def _keys_weights(t: np.ndarray):
    """Kernel weights for the 4 nodes around a point with fraction t in [0,1)."""
    t2 = t * t
    t3 = t2 * t
    w0 = -0.5 * t3 + t2 - 0.5 * t
    w1 = 1.5 * t3 - 2.5 * t2 + 1.0
    w2 = -1.5 * t3 + 2.0 * t2 + 0.5 * t
    w3 = 0.5 * t3 - 0.5 * t2
    return w0, w1, w2, w3


def _fold_axis(idx: np.ndarray, n: int, odd: bool):
    """Map raw node indices onto [0, n-1]: reflect below 0, clamp above.

    Returns (indices, signs); signs are -1 where an odd field was reflected.
    """
    sign = np.ones(idx.shape)
    neg = idx < 0
    if odd:
        sign[neg] = -1.0
    idx = np.where(neg, -idx, idx)
    np.clip(idx, 0, n - 1, out=idx)
    return idx, sign


def sample_values(values: np.ndarray, parity: Parity, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Bicubic sample of a value array at fractional indices (x, y).

    x indexes the leading (r) axis, y the trailing (z) axis.  x < 0 is folded
    across the axis with the field's parity; out-of-range indices clamp to
    the edge.
    """
    nr, nz = values.shape
    odd = parity is Parity.ODD

    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    i0 = np.floor(x).astype(np.int64)
    j0 = np.floor(y).astype(np.int64)
    tx = x - i0
    ty = y - j0

    wx = _keys_weights(tx)
    wy = _keys_weights(ty)

    out = np.zeros(np.broadcast(x, y).shape)
    for a in range(4):
        ia, sa = _fold_axis(i0 + (a - 1), nr, odd)
        row = np.zeros_like(out)
        for b in range(4):
            jb = np.clip(j0 + (b - 1), 0, nz - 1)
            row += wy[b] * values[ia, jb]
        out += wx[a] * sa * row
    return out


def sample_field(f: ScalarField2D, r: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Bicubic sample of a field at physical coordinates (r, z)."""
    g = f.grid
    x = np.asarray(r, dtype=np.float64) / g.dr
    y = (np.asarray(z, dtype=np.float64) + g.Lz) / g.dz
    return sample_values(f.values, f.parity, x, y)


def sample_velocity(v: VelocityField, r: np.ndarray, z: np.ndarray):
    """Sample both velocity components; v^r flips sign across the axis."""
    return sample_field(v.vr, r, z), sample_field(v.vz, r, z)
