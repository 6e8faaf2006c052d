"""Dyadic decomposition: structural identities, norms, Bernstein scaling."""

import numpy as np
import pytest

from axibouss.errors import InvalidParameterError, UndefinedRatioError
from axibouss.grid import MeridionalGrid, Parity, ScalarField2D, lp_norm
from axibouss.initdata import RingParams, annular_density
from axibouss.lpaley import (
    CutoffPair,
    bernstein_ratio,
    bernstein_ratios,
    besov_norm,
    box_lp_norm,
    dyadic_blocks,
    embed_cartesian,
    max_block_index,
    radial_wavenumbers,
)


def box_coords(n):
    x = -0.5 + np.arange(n) / n
    return np.meshgrid(x, x, x, indexing="ij")


def test_partition_of_unity_exact_on_grid():
    cut = CutoffPair()
    for n in (32, 64):
        xi = radial_wavenumbers(n)
        assert np.abs(cut.partition_residual(xi)).max() <= 1e-12


def test_support_properties_of_profiles():
    cut = CutoffPair()
    xi = np.linspace(0, 100, 20001)
    chi = cut.chi(xi)
    assert np.all(chi[xi <= 0.75] == 1.0)
    assert np.all(chi[xi >= 4.0 / 3.0] == 0.0)
    phi = cut.phi(xi)
    assert np.all(phi[xi <= 0.75] == 0.0)
    assert np.all(phi[xi >= 8.0 / 3.0] == 0.0)


def test_block_disjointness_is_exact():
    cut = CutoffPair()
    xi = radial_wavenumbers(64)
    for p in range(0, 5):
        for q in range(p + 2, 6):
            assert (cut.phi(xi / 2.0 ** p) * cut.phi(xi / 2.0 ** q)).max() == 0.0


def test_identity_hash_is_stable():
    assert CutoffPair().identity_hash() == CutoffPair().identity_hash()
    assert CutoffPair().identity_hash() != CutoffPair(flat=0.7).identity_hash()


# ---------------------------------------------------------------------------
# embedding
# ---------------------------------------------------------------------------

def test_embed_constant():
    g = MeridionalGrid(33, 33, 2.0, 2.0)
    f = ScalarField2D(g, np.full(g.shape, 1.75), Parity.EVEN)
    box = embed_cartesian(f, 16)
    assert np.abs(box - 1.75).max() <= 1e-12


def test_embed_rejects_non_power_of_two():
    g = MeridionalGrid(33, 33, 2.0, 2.0)
    f = ScalarField2D(g, np.zeros(g.shape), Parity.EVEN)
    with pytest.raises(InvalidParameterError):
        embed_cartesian(f, 48)


def test_embed_annular_support():
    g = MeridionalGrid(97, 97, 6.0, 6.0)
    rho = annular_density(RingParams(amplitude=1.0, r1=2.0, r2=3.0, z0=0.0, h=0.5), g)
    box = embed_cartesian(rho, 32)
    n = 32
    x = -6.0 + 12.0 * np.arange(n) / n
    rad = np.sqrt(x[:, None] ** 2 + x[None, :] ** 2)[:, :, None]
    outside = np.broadcast_to((rad < 2.0 - g.dr) | (rad > 3.0 + g.dr), box.shape)
    assert np.abs(np.where(outside, box, 0.0)).max() <= 1e-12


def test_embed_l2_weight_consistency():
    g = MeridionalGrid(129, 129, 3.0, 3.0)
    R, Z = g.mesh()
    f = ScalarField2D(g, np.exp(-((R ** 2 - 1.0) ** 2 + Z ** 2) / 0.25), Parity.EVEN)
    n = 64
    box = embed_cartesian(f, n)
    side = 2.0 * max(g.Lr, g.Lz)
    cell = side / n
    box_l2_physical = box_lp_norm(box, 2) * cell ** 1.5
    assert box_l2_physical == pytest.approx(lp_norm(f, 2), rel=0.01)


# ---------------------------------------------------------------------------
# blocks and Besov norms
# ---------------------------------------------------------------------------

def test_blocks_of_zero_field():
    d = dyadic_blocks(np.zeros((16, 16, 16)))
    assert all(np.abs(b).max() == 0.0 for _, b in d.blocks)
    assert besov_norm(d, 1.0, 2, 2) == 0.0


def test_blocks_reject_bad_shapes():
    with pytest.raises(InvalidParameterError):
        dyadic_blocks(np.zeros((16, 16, 8)))
    with pytest.raises(InvalidParameterError):
        dyadic_blocks(np.zeros((12, 12, 12)))


def test_sinusoid_block_confinement():
    n, q0 = 64, 3
    X, _, _ = box_coords(n)
    u = np.sin(2.0 * np.pi * (2 ** q0) * X)
    d = dyadic_blocks(u)
    total = box_lp_norm(u, 2)
    for q, b in d.blocks:
        if abs(q - q0) > 1:
            assert box_lp_norm(b, 2) <= 1e-10 * total


def test_reconstruction_of_band_limited_field():
    n = 64
    X, Y, Z = box_coords(n)
    u = np.exp(-(X ** 2 + Y ** 2 + Z ** 2) / (2.0 * 0.055 ** 2))
    d = dyadic_blocks(u)
    resid = np.abs(d.reconstruction() - d.source).max() / np.abs(u).max()
    assert resid <= 1e-10
    assert d.dropped_sup <= 1e-10 * np.abs(u).max()


def test_taper_changes_source_not_reconstruction():
    n = 32
    X, Y, Z = box_coords(n)
    u = X + 0.2  # non-periodic
    d = dyadic_blocks(u, taper=True)
    assert not np.allclose(d.source, u)  # windowed
    # the taper's sharp ramps put energy above the top block; the only
    # reconstruction loss is the reported dropped tail
    resid = np.abs(d.reconstruction() - d.source).max()
    assert resid <= d.dropped_sup * (1.0 + 1e-6) + 1e-12


def test_besov_022_matches_l2_within_overlap_budget():
    n = 64
    X, Y, Z = box_coords(n)
    u = (np.sin(2 * np.pi * 3 * X) + np.sin(2 * np.pi * 6 * Y)
         + np.sin(2 * np.pi * 11 * Z) + 0.42 * np.sin(2 * np.pi * 8 * X))
    d = dyadic_blocks(u)
    assert besov_norm(d, 0.0, 2, 2) == pytest.approx(box_lp_norm(u, 2), rel=0.05)


def test_besov_single_sinusoid_scaling():
    n, q0, s = 64, 3, 1.0
    X, _, _ = box_coords(n)
    u = np.sin(2.0 * np.pi * (2 ** q0) * X)
    d = dyadic_blocks(u)
    value = besov_norm(d, s, 2, 1)
    expected = 2.0 ** (q0 * s) * box_lp_norm(u, 2)
    assert expected / 3.0 <= value <= expected * 3.0


def test_besov_rejects_bad_indices():
    d = dyadic_blocks(np.zeros((16, 16, 16)))
    with pytest.raises(InvalidParameterError):
        besov_norm(d, 0.0, 0.5, 2)


# ---------------------------------------------------------------------------
# Bernstein ratios
# ---------------------------------------------------------------------------

def test_bernstein_sinusoid_exact():
    n, q0 = 64, 3
    X, _, _ = box_coords(n)
    u = np.sin(2.0 * np.pi * (2 ** q0) * X)
    ratio = bernstein_ratio(u, q0, 2)
    assert abs(ratio / 2 ** q0 - 1.0) <= 1e-9


def test_bernstein_vanishing_block_raises():
    n = 32
    X, _, _ = box_coords(n)
    u = np.sin(2.0 * np.pi * 2 * X)  # energy at |xi| = 2 only
    with pytest.raises(UndefinedRatioError):
        bernstein_ratio(u, max_block_index(n), 2)


def test_bernstein_gaussian_small_family():
    n = 64
    X, Y, Z = box_coords(n)
    u = np.exp(-(X ** 2 + Y ** 2 + Z ** 2) / (2.0 * 0.04 ** 2))
    ratios = bernstein_ratios(u, [2, 3, 4], 2)
    scaled = [ratios[q] / 2.0 ** q for q in (2, 3, 4)]
    assert all(0.25 <= v <= 4.0 for v in scaled)
    assert max(scaled) / min(scaled) < 4.0


def test_bernstein_linf_norm_path():
    # non-Plancherel route (a = inf) stays within the two-sided bounds
    n, q0 = 32, 2
    X, _, _ = box_coords(n)
    u = np.sin(2.0 * np.pi * (2 ** q0) * X)
    ratio = bernstein_ratio(u, q0, np.inf)
    assert abs(ratio / 2 ** q0 - 1.0) <= 1e-9
