"""Bicubic sampling: polynomial reproduction and parity reflection."""

import numpy as np
import pytest

from axibouss.grid import MeridionalGrid, Parity, ScalarField2D, VelocityField
from axibouss.interp import sample_field, sample_velocity


def test_reproduces_quadratics():
    g = MeridionalGrid(32, 32, 2.0, 2.0)
    R, Z = g.mesh()
    f = ScalarField2D(g, 1.0 + 2.0 * Z + 0.5 * Z ** 2 + R ** 2 - R * Z, Parity.EVEN)
    rng = np.random.default_rng(5)
    # stay a couple of cells inside so the stencil never clamps
    r = rng.uniform(2 * g.dr, g.Lr - 2 * g.dr, 200)
    z = rng.uniform(-g.Lz + 2 * g.dz, g.Lz - 2 * g.dz, 200)
    exact = 1.0 + 2.0 * z + 0.5 * z ** 2 + r ** 2 - r * z
    assert np.abs(sample_field(f, r, z) - exact).max() <= 1e-12


def test_odd_reflection_across_axis():
    g = MeridionalGrid(32, 32, 2.0, 2.0)
    R, Z = g.mesh()
    vals = R * (1.0 + 0.3 * Z)
    f = ScalarField2D(g, vals, Parity.ODD)
    rng = np.random.default_rng(6)
    r = rng.uniform(0.0, 0.5, 100)
    z = rng.uniform(-1.0, 1.0, 100)
    plus = sample_field(f, r, z)
    minus = sample_field(f, -r, z)
    assert np.abs(plus + minus).max() <= 1e-13


def test_even_reflection_across_axis():
    g = MeridionalGrid(32, 32, 2.0, 2.0)
    R, Z = g.mesh()
    f = ScalarField2D(g, np.cos(R) + 0.1 * Z, Parity.EVEN)
    rng = np.random.default_rng(8)
    r = rng.uniform(0.0, 0.5, 100)
    z = rng.uniform(-1.0, 1.0, 100)
    assert np.abs(sample_field(f, r, z) - sample_field(f, -r, z)).max() <= 1e-13


def test_velocity_sampling_signs():
    g = MeridionalGrid(32, 32, 2.0, 2.0)
    R, Z = g.mesh()
    v = VelocityField(ScalarField2D(g, -0.4 * R, Parity.ODD),
                      ScalarField2D(g, 0.8 * Z, Parity.EVEN))
    vr, vz = sample_velocity(v, np.array([-0.3]), np.array([0.5]))
    # v^r is odd: sampling left of the axis flips its sign
    assert vr[0] == pytest.approx(0.4 * 0.3, abs=1e-13)
    assert vz[0] == pytest.approx(0.8 * 0.5, abs=1e-13)


def test_edge_clamp_is_finite():
    g = MeridionalGrid(16, 16, 1.0, 1.0)
    rng = np.random.default_rng(9)
    f = ScalarField2D(g, rng.standard_normal(g.shape), Parity.EVEN)
    vals = sample_field(f, np.array([0.999, 2.0]), np.array([1.2, -3.0]))
    assert np.all(np.isfinite(vals))
