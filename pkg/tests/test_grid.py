"""Grid, field, and cylindrical-norm tests.

Reference values come from closed forms or scipy adaptive quadrature of the
analytic integrands, never from the trapezoid path under test.
"""

import math

import numpy as np
import pytest
from scipy import integrate

from axibouss.errors import InvalidParameterError, InvalidParityError
from axibouss.grid import (
    MeridionalGrid,
    Parity,
    ScalarField2D,
    VelocityField,
    axis_quotient,
    azimuthal_vector_h1,
    divergence,
    h1_seminorm,
    lp_norm,
    read_field,
    volume_integral,
    write_field,
    zero_field,
)


def grid(n=64, L=1.0):
    return MeridionalGrid(n, n, L, L)


def field_from(g, fn, parity):
    R, Z = g.mesh()
    vals = fn(R, Z)
    if parity is Parity.ODD:
        vals = np.array(vals)
        vals[0, :] = 0.0
    return ScalarField2D(g, vals, parity)


# ---------------------------------------------------------------------------
# volume_integral
# ---------------------------------------------------------------------------

def test_volume_integral_zero():
    assert volume_integral(zero_field(grid(), Parity.EVEN)) == 0.0


def test_volume_integral_constant_cylinder():
    g = grid(64, 1.0)
    one = ScalarField2D(g, np.ones(g.shape), Parity.EVEN)
    # cylinder r <= 1, |z| <= 1 has volume 2*pi; trapezoid is exact for r*1
    assert volume_integral(one) == pytest.approx(2.0 * math.pi, abs=1e-12 * 64 * 64)


def test_volume_integral_gaussian_vs_quadrature():
    g = MeridionalGrid(256, 256, 4.0, 4.0)
    f = field_from(g, lambda R, Z: np.exp(-R ** 2 - Z ** 2), Parity.EVEN)
    # separable reference: 2*pi * int r e^{-r^2} * int e^{-z^2}
    ref_r, _ = integrate.quad(lambda r: r * math.exp(-r * r), 0.0, 4.0, epsabs=1e-14)
    ref_z, _ = integrate.quad(lambda z: math.exp(-z * z), -4.0, 4.0, epsabs=1e-14)
    ref = 2.0 * math.pi * ref_r * ref_z
    assert volume_integral(f) == pytest.approx(ref, rel=1e-4)


def test_volume_integral_nonnegative():
    rng = np.random.default_rng(7)
    g = grid(32)
    for _ in range(5):
        f = ScalarField2D(g, rng.random(g.shape), Parity.EVEN)
        assert volume_integral(f) >= 0.0


# ---------------------------------------------------------------------------
# lp_norm
# ---------------------------------------------------------------------------

def test_lp_norm_zero_and_constant():
    g = grid()
    assert lp_norm(zero_field(g, Parity.EVEN), 2) == 0.0
    c = ScalarField2D(g, np.full(g.shape, 3.25), Parity.EVEN)
    assert lp_norm(c, np.inf) == 3.25


def test_lp_norm_gaussian_l2_vs_quadrature():
    g = MeridionalGrid(256, 256, 4.0, 4.0)
    f = field_from(g, lambda R, Z: np.exp(-R ** 2 - Z ** 2), Parity.EVEN)
    ref_r, _ = integrate.quad(lambda r: r * math.exp(-2 * r * r), 0.0, 4.0, epsabs=1e-14)
    ref_z, _ = integrate.quad(lambda z: math.exp(-2 * z * z), -4.0, 4.0, epsabs=1e-14)
    ref = math.sqrt(2.0 * math.pi * ref_r * ref_z)
    assert lp_norm(f, 2) == pytest.approx(ref, rel=1e-4)


def test_lp_norm_monotone_in_magnitude():
    rng = np.random.default_rng(11)
    g = grid(24)
    small = rng.standard_normal(g.shape)
    big = small + np.sign(small) * rng.random(g.shape)
    f = ScalarField2D(g, small, Parity.EVEN)
    h = ScalarField2D(g, big, Parity.EVEN)
    for p in (1.0, 2.0, 3.5, np.inf):
        assert lp_norm(f, p) <= lp_norm(h, p) + 1e-15


def test_lp_norm_rejects_p_below_one():
    with pytest.raises(InvalidParameterError):
        lp_norm(zero_field(grid(), Parity.EVEN), 0.5)


# ---------------------------------------------------------------------------
# h1_seminorm
# ---------------------------------------------------------------------------

def test_h1_seminorm_constant_is_zero():
    g = grid()
    c = ScalarField2D(g, np.full(g.shape, 2.0), Parity.EVEN)
    assert h1_seminorm(c) <= 1e-12


def test_h1_seminorm_linear_in_z_exact():
    g = MeridionalGrid(48, 48, 1.5, 2.0)
    f = field_from(g, lambda R, Z: Z, Parity.EVEN)
    volume = 2.0 * math.pi * (g.Lr ** 2 / 2.0) * (2.0 * g.Lz)
    assert h1_seminorm(f) == pytest.approx(math.sqrt(volume), rel=1e-12)


def _ring_and_gradient():
    # even in r (function of r^2), so the axis ghost treatment is exact
    w = 0.25

    def f(R, Z):
        return np.exp(-((R ** 2 - 1.0) ** 2 + Z ** 2) / w)

    def grad_sq(R, Z):
        base = f(R, Z)
        fr = base * (-2.0 * (R ** 2 - 1.0) * 2.0 * R / w)
        fz = base * (-2.0 * Z / w)
        return fr ** 2 + fz ** 2

    return f, grad_sq


def test_h1_seminorm_converges_at_second_order():
    f, grad_sq = _ring_and_gradient()
    ref_sq, _ = integrate.dblquad(
        lambda z, r: 2.0 * math.pi * r * grad_sq(np.float64(r), np.float64(z)),
        0.0, 4.0, -4.0, 4.0, epsabs=1e-12, epsrel=1e-12)
    ref = math.sqrt(ref_sq)
    errs = []
    for n in (65, 129, 257):
        g = MeridionalGrid(n, n, 4.0, 4.0)
        errs.append(abs(h1_seminorm(field_from(g, f, Parity.EVEN)) - ref) / ref)
    order = math.log2(errs[0] / errs[1])
    order2 = math.log2(errs[1] / errs[2])
    assert min(order, order2) >= 1.9


# ---------------------------------------------------------------------------
# axis_quotient
# ---------------------------------------------------------------------------

def test_axis_quotient_linear_exact():
    g = grid(32, 2.0)
    f = field_from(g, lambda R, Z: R * np.cos(Z), Parity.ODD)
    q = axis_quotient(f)
    R, Z = g.mesh()
    assert q.parity is Parity.EVEN
    assert np.abs(q.values - np.cos(Z)).max() <= 1e-13


def test_axis_quotient_cubic():
    g = grid(64, 1.0)
    f = field_from(g, lambda R, Z: R ** 3, Parity.ODD)
    q = axis_quotient(f)
    R, _ = g.mesh()
    assert np.abs(q.values[1:, :] - R[1:, :] ** 2).max() <= 1e-13
    assert np.abs(q.values[0, :]).max() <= 2.5 * g.dr ** 2


def test_axis_quotient_sine_axis_limit_second_order():
    prev = None
    for n in (33, 65, 129):
        g = grid(n, 1.0)
        f = field_from(g, lambda R, Z: np.sin(R) * (1.0 + 0.5 * Z), Parity.ODD)
        q = axis_quotient(f)
        err = np.abs(q.values[0, :] - (1.0 + 0.5 * g.z)).max()
        assert err <= 0.5 * g.dr ** 2
        if prev is not None:
            assert prev / err >= 3.5  # ~4 per halving
        prev = err


def test_axis_quotient_rejects_even():
    with pytest.raises(InvalidParityError):
        axis_quotient(zero_field(grid(), Parity.EVEN))


def test_axis_quotient_round_trip():
    g = grid(48, 2.0)
    f = field_from(g, lambda R, Z: R * np.exp(-((R - 1) ** 2 + Z ** 2)), Parity.ODD)
    q = axis_quotient(f)
    back_vals = g.r_col * q.values
    back_vals[0, :] = 0.0
    again = axis_quotient(ScalarField2D(g, back_vals, Parity.ODD))
    assert np.abs(again.values[1:, :] - q.values[1:, :]).max() <= 1e-12


# ---------------------------------------------------------------------------
# azimuthal_vector_h1
# ---------------------------------------------------------------------------

def test_azimuthal_vector_h1_zero():
    assert azimuthal_vector_h1(zero_field(grid(), Parity.ODD)) == 0.0


def test_azimuthal_vector_h1_linear_profile():
    # w = r g(z): grad terms are g(z)^2 + r^2 g'(z)^2 and (w/r)^2 = g^2
    g = MeridionalGrid(129, 129, 2.0, 2.0)
    f = field_from(g, lambda R, Z: R * np.exp(-Z ** 2), Parity.ODD)

    def integrand(z, r):
        gz = math.exp(-z * z)
        gpz = -2.0 * z * gz
        return 2.0 * math.pi * r * (gz ** 2 + r ** 2 * gpz ** 2 + gz ** 2)

    ref_sq, _ = integrate.dblquad(integrand, 0.0, 2.0, -2.0, 2.0,
                                  epsabs=1e-12, epsrel=1e-12)
    assert azimuthal_vector_h1(f) == pytest.approx(math.sqrt(ref_sq), rel=5e-3)


def test_azimuthal_vector_h1_definition_unfolding():
    g = MeridionalGrid(96, 96, 4.0, 4.0)
    R, Z = g.mesh()
    vals = np.exp(-((R - 1.5) ** 2 + Z ** 2) / 0.2) - np.exp(-((R + 1.5) ** 2 + Z ** 2) / 0.2)
    vals[0, :] = 0.0
    f = ScalarField2D(g, vals, Parity.ODD)
    direct = math.sqrt(h1_seminorm(f) ** 2 + lp_norm(axis_quotient(f), 2) ** 2)
    assert azimuthal_vector_h1(f) == pytest.approx(direct, rel=1e-12)


def test_azimuthal_vector_h1_rejects_even():
    with pytest.raises(InvalidParityError):
        azimuthal_vector_h1(zero_field(grid(), Parity.EVEN))


# ---------------------------------------------------------------------------
# field validation and velocity
# ---------------------------------------------------------------------------

def test_field_rejects_nonfinite_and_bad_axis():
    g = grid()
    vals = np.zeros(g.shape)
    vals[3, 3] = np.nan
    with pytest.raises(InvalidParameterError):
        ScalarField2D(g, vals, Parity.EVEN)
    vals = np.ones(g.shape)
    with pytest.raises(InvalidParityError):
        ScalarField2D(g, vals, Parity.ODD)
    with pytest.raises(InvalidParameterError):
        ScalarField2D(g, np.zeros((3, 3)), Parity.EVEN)


def test_grid_validation():
    with pytest.raises(InvalidParameterError):
        MeridionalGrid(4, 64, 1.0, 1.0)
    with pytest.raises(InvalidParameterError):
        MeridionalGrid(64, 64, -1.0, 1.0)


def test_velocity_parity_enforced():
    g = grid()
    with pytest.raises(InvalidParityError):
        VelocityField(zero_field(g, Parity.EVEN), zero_field(g, Parity.EVEN))


def test_divergence_of_analytic_divfree_field():
    # vr = -a r, vz = 2 a z is exactly divergence-free; stencils are exact
    # on polynomials of this degree
    g = grid(48, 2.0)
    R, Z = g.mesh()
    a = 0.7
    v = VelocityField(ScalarField2D(g, -a * R, Parity.ODD),
                      ScalarField2D(g, 2.0 * a * Z, Parity.EVEN))
    assert np.abs(divergence(v).values).max() <= 1e-12


# ---------------------------------------------------------------------------
# snapshot files
# ---------------------------------------------------------------------------

def test_field_file_round_trip(tmp_path):
    g = MeridionalGrid(16, 24, 1.5, 2.5)
    rng = np.random.default_rng(3)
    f = ScalarField2D(g, rng.standard_normal(g.shape), Parity.EVEN)
    path = tmp_path / "f.fld"
    write_field(f, path)
    back = read_field(path)
    assert back.parity is Parity.EVEN
    assert back.grid.same_as(g)
    assert np.array_equal(back.values, f.values)


def test_field_file_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.fld"
    path.write_bytes(b"not a field file at all....")
    with pytest.raises(InvalidParameterError):
        read_field(path)


def test_field_file_rejects_truncation(tmp_path):
    g = MeridionalGrid(16, 16, 1.0, 1.0)
    f = zero_field(g, Parity.ODD)
    path = tmp_path / "t.fld"
    write_field(f, path)
    data = path.read_bytes()
    path.write_bytes(data[:-16])
    with pytest.raises(InvalidParameterError):
        read_field(path)
