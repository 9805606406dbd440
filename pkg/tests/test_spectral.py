"""Lattice construction, transforms, projection, derivatives, dealiasing, curl."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nshd.spectral import (
    PhysicalVectorField,
    SpectralVectorField,
    build_lattice,
    dealias,
    divergence_defect,
    hermitian_defect,
    leray_project,
    spectral_derivative,
    to_physical,
    to_spectral,
    vorticity,
    zero_field,
)
from nshd.initial_conditions import taylor_green

from conftest import grid_coords, make_random_field


# -- lattice -------------------------------------------------------------------


def test_lattice_basic_2d():
    lat = build_lattice(2, 8)
    assert lat.total_modes == 64
    idx_11 = 1 * 8 + 1  # flat row-major index of k = (1, 1)
    assert lat.k_of(idx_11) == (1, 1)
    assert lat.kmod(idx_11) == pytest.approx(math.sqrt(2.0), abs=1e-12)


def test_lattice_mode_ordering():
    lat = build_lattice(2, 8)
    assert list(lat.modes_1d) == [0, 1, 2, 3, -4, -3, -2, -1]


def test_dealias_mask_two_thirds_rule():
    lat = build_lattice(2, 8)
    idx_30 = 3 * 8 + 0
    assert lat.dealias_mask(idx_30) is False  # 3 >= 8/3
    idx_20 = 2 * 8
    assert lat.dealias_mask(idx_20) is True  # 2 < 8/3

    lat3 = build_lattice(3, 16)
    assert lat3.total_modes == 4096
    idx_500 = 5 * 16 * 16
    assert lat3.k_of(idx_500) == (5, 0, 0)
    assert lat3.dealias_mask(idx_500) is True  # 5 < 16/3


def test_dealias_mask_kills_nyquist():
    lat = build_lattice(2, 8)
    nyquist = 4 * 8 + 0  # k = (-4, 0)
    assert lat.k_of(nyquist) == (-4, 0)
    assert lat.dealias_mask(nyquist) is False


def test_dealias_mask_symmetric_under_reflection():
    lat = build_lattice(2, 16)
    mask = lat.dealias_mask_array
    idx = (-np.arange(16)) % 16
    reflected = mask[np.ix_(idx, idx)]
    assert np.array_equal(mask, reflected)


def test_kmod_zero_unique():
    lat = build_lattice(2, 16)
    assert lat.kmod(0) == 0.0
    assert np.count_nonzero(lat.kmod_array == 0.0) == 1


@pytest.mark.parametrize("n,N", [(4, 16), (2, 7), (2, 4), (2, 1024)])
def test_build_lattice_rejects_bad_args(n, N):
    with pytest.raises(ValueError):
        build_lattice(n, N)


# -- transforms ----------------------------------------------------------------


def test_taylor_green_spectrum_from_grid():
    # hand expansion: sin x cos y has four modes at (+-1, +-1), magnitude 1/4
    lat = build_lattice(2, 16)
    x = grid_coords(lat)
    values = np.stack([np.sin(x[0]) * np.cos(x[1]), -np.cos(x[0]) * np.sin(x[1])])
    u = to_spectral(PhysicalVectorField(lat, values))
    c1 = u.coeffs[0]
    for s1 in (1, -1):
        for s2 in (1, -1):
            assert abs(c1[s1 % 16, s2 % 16]) == pytest.approx(0.25, abs=1e-12)
    active = np.zeros(lat.shape, dtype=bool)
    for s1 in (1, -1):
        for s2 in (1, -1):
            active[s1 % 16, s2 % 16] = True
    assert np.max(np.abs(c1[~active])) < 1e-12
    # matches the exact spectral constructor
    np.testing.assert_allclose(u.coeffs, taylor_green(lat, 1.0).coeffs, atol=1e-14)


def test_transform_zero_field(lattice_2d):
    u = to_spectral(PhysicalVectorField(lattice_2d,
                                        np.zeros((2,) + lattice_2d.shape)))
    assert np.all(u.coeffs == 0)


def test_round_trip_identity():
    u = make_random_field(seed=21)
    back = to_spectral(to_physical(u))
    np.testing.assert_allclose(back.coeffs, u.coeffs, rtol=0, atol=1e-12)


@given(seed=st.integers(0, 2**32 - 1))
def test_parseval(seed):
    u = make_random_field(seed=seed, band=(1, 6))
    phys = to_physical(u)
    quadrature = u.lattice.cell_volume * float(np.sum(phys.values**2))
    mode_sum = u.lattice.volume * float(np.sum(np.abs(u.coeffs) ** 2))
    assert quadrature == pytest.approx(mode_sum, rel=1e-10)


# -- Leray projection ------------------------------------------------------------


def test_leray_annihilates_gradients(lattice_2d):
    # c(k) = k * phi(k) for a random scalar phi
    rng = np.random.default_rng(3)
    phi = rng.standard_normal(lattice_2d.shape) + 1j * rng.standard_normal(lattice_2d.shape)
    grids = lattice_2d.mode_grids
    coeffs = np.stack([grids[0] * phi, grids[1] * phi]).astype(np.complex128)
    out = leray_project(SpectralVectorField(lattice_2d, coeffs))
    assert np.max(np.abs(out.coeffs)) < 1e-12 * np.max(np.abs(coeffs))


def test_leray_fixes_divergence_free_fields():
    u = make_random_field(seed=22)
    out = leray_project(u)
    assert np.max(np.abs(out.coeffs - u.coeffs)) < 1e-15


def test_leray_single_mode_by_hand(lattice_2d):
    # k=(1,0), c=(a,b) -> (0,b)
    coeffs = np.zeros((2,) + lattice_2d.shape, dtype=np.complex128)
    a, b = 0.7 + 0.2j, -0.3 + 0.5j
    coeffs[0][1, 0] = a
    coeffs[1][1, 0] = b
    coeffs[0][-1, 0] = np.conj(a)
    coeffs[1][-1, 0] = np.conj(b)
    out = leray_project(SpectralVectorField(lattice_2d, coeffs))
    assert out.coeffs[0][1, 0] == pytest.approx(0.0, abs=1e-15)
    assert out.coeffs[1][1, 0] == pytest.approx(b, abs=1e-15)


@given(seed=st.integers(0, 2**32 - 1))
def test_leray_idempotent_and_divergence_free(seed):
    u = make_random_field(seed=seed)
    noisy = u.with_coeffs(u.coeffs + 0.5j * np.roll(u.coeffs, 2, axis=-1))
    once = leray_project(noisy)
    twice = leray_project(once)
    assert np.max(np.abs(twice.coeffs - once.coeffs)) <= 1e-15
    assert divergence_defect(once) <= 1e-12


def test_leray_keeps_mode_zero():
    lat = build_lattice(2, 16)
    coeffs = np.zeros((2,) + lat.shape, dtype=np.complex128)
    coeffs[0][0, 0] = 1.0  # constant background
    out = leray_project(SpectralVectorField(lat, coeffs))
    assert out.coeffs[0][0, 0] == 1.0


# -- derivatives ------------------------------------------------------------------


def test_derivative_sine_by_hand():
    # u1 = sin x: modes (+-1, 0) at -+i/2; d/dx -> cos x: both 1/2
    lat = build_lattice(2, 16)
    coeffs = np.zeros((2,) + lat.shape, dtype=np.complex128)
    coeffs[0][1, 0] = -0.5j
    coeffs[0][-1, 0] = 0.5j
    u = SpectralVectorField(lat, coeffs)
    d = spectral_derivative(u, 0, 0)
    assert d[1, 0] == pytest.approx(0.5, abs=1e-15)
    assert d[-1, 0] == pytest.approx(0.5, abs=1e-15)
    assert np.max(np.abs(spectral_derivative(u, 0, 1))) == 0.0  # x-only field


def test_derivative_of_constant_is_zero(lattice_2d):
    coeffs = np.zeros((2,) + lattice_2d.shape, dtype=np.complex128)
    coeffs[:, 0, 0] = 2.0
    u = SpectralVectorField(lattice_2d, coeffs)
    assert np.max(np.abs(spectral_derivative(u, 0, 0))) == 0.0


def test_derivative_matches_grid_derivative():
    u = make_random_field(seed=23, N=64, band=(1, 3))
    lat = u.lattice
    from nshd.spectral import coeffs_to_grid

    d_spec = coeffs_to_grid(spectral_derivative(u, 0, 1), lat.n)
    vals = coeffs_to_grid(u.coeffs[0], lat.n)
    # central difference on the periodic grid (2nd order independent oracle)
    fwd = np.roll(vals, -1, axis=1)
    bwd = np.roll(vals, 1, axis=1)
    approx = (fwd - bwd) / (2 * lat.dx)
    # band-limited field: FD error ~ (k dx)^2/6; loose bound
    assert np.max(np.abs(d_spec - approx)) < 0.05 * np.max(np.abs(d_spec))


def test_derivative_commutes_with_leray():
    u = make_random_field(seed=24)
    lat = u.lattice
    from nshd.spectral import leray_project_coeffs

    for axis in range(lat.n):
        d = np.stack([spectral_derivative(u, i, axis) for i in range(lat.n)])
        projected = leray_project_coeffs(lat, d)
        assert np.max(np.abs(projected - d)) <= 1e-12


# -- dealias -----------------------------------------------------------------------


def test_dealias_trivial_cases(lattice_2d):
    inside = make_random_field(seed=25, band=(1, 5))
    np.testing.assert_array_equal(dealias(inside).coeffs, inside.coeffs)

    nyq = zero_field(lattice_2d)
    nyq.coeffs[0][16, 0] = 1.0  # k1 = -16 Nyquist at N=32
    assert np.all(dealias(nyq).coeffs == 0)

    tg = taylor_green(build_lattice(2, 8), 1.0)
    np.testing.assert_array_equal(dealias(tg).coeffs, tg.coeffs)


def test_dealias_idempotent(lattice_2d):
    full = SpectralVectorField(
        lattice_2d, np.ones((2,) + lattice_2d.shape, dtype=np.complex128)
    )
    once = dealias(full)
    np.testing.assert_array_equal(dealias(once).coeffs, once.coeffs)


# -- vorticity ----------------------------------------------------------------------


def test_vorticity_taylor_green():
    # omega = 2 sin x sin y: four modes (+-1, +-1) of magnitude 1/2
    lat = build_lattice(2, 16)
    w = vorticity(taylor_green(lat, 1.0))
    for s1 in (1, -1):
        for s2 in (1, -1):
            assert abs(w[s1 % 16, s2 % 16]) == pytest.approx(0.5, abs=1e-13)
    from nshd.spectral import coeffs_to_grid

    x = grid_coords(lat)
    np.testing.assert_allclose(
        coeffs_to_grid(w, 2), 2 * np.sin(x[0]) * np.sin(x[1]), atol=1e-12
    )


def test_vorticity_of_gradient_is_zero(lattice_2d):
    rng = np.random.default_rng(6)
    phi = rng.standard_normal(lattice_2d.shape) + 1j * rng.standard_normal(lattice_2d.shape)
    grids = lattice_2d.mode_grids
    coeffs = 1j * np.stack([grids[0] * phi, grids[1] * phi]).astype(np.complex128)
    w = vorticity(SpectralVectorField(lattice_2d, coeffs))
    assert np.max(np.abs(w)) < 1e-12 * np.max(np.abs(coeffs))


def test_vorticity_constant_field_zero(lattice_2d):
    coeffs = np.zeros((2,) + lattice_2d.shape, dtype=np.complex128)
    coeffs[:, 0, 0] = 3.0
    assert np.max(np.abs(vorticity(SpectralVectorField(lattice_2d, coeffs)))) == 0.0


def test_vorticity_3d_divergence_free():
    u = make_random_field(n=3, N=16, seed=26, band=(1, 3))
    w = vorticity(u)
    assert divergence_defect(w) <= 1e-12
    assert hermitian_defect(w) <= 1e-12


# -- invariants under operations -----------------------------------------------------


@given(seed=st.integers(0, 2**32 - 1))
def test_hermitian_preserved_by_operations(seed):
    u = make_random_field(seed=seed)
    assert hermitian_defect(u) <= 1e-12
    assert hermitian_defect(leray_project(u)) <= 1e-12
    assert hermitian_defect(dealias(u)) <= 1e-12
    d = np.stack([spectral_derivative(u, i, 0) for i in range(u.lattice.n)])
    assert hermitian_defect(u.with_coeffs(d)) <= 1e-12
