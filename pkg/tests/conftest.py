import hypothesis
import numpy as np
import pytest

from nshd.initial_conditions import InitialConditionSpec, random_band_limited
from nshd.spectral import build_lattice

hypothesis.settings.register_profile(
    "ci", max_examples=25, deadline=None,
    suppress_health_check=[hypothesis.HealthCheck.too_slow],
)
hypothesis.settings.load_profile("ci")


@pytest.fixture
def lattice_2d():
    return build_lattice(2, 32)


@pytest.fixture
def lattice_3d():
    return build_lattice(3, 16)


def make_random_field(n=2, N=32, seed=0, band=(1, 4), amplitude=1.0, slope=0.0):
    lat = build_lattice(n, N)
    spec = InitialConditionSpec("random_band", amplitude=amplitude, seed=seed,
                                band=band, spectrum_slope=slope)
    return random_band_limited(lat, spec)


def grid_coords(lattice):
    """Meshgrid of physical coordinates, shape (n, N, ..., N)."""
    axes = [lattice.grid_axes()] * lattice.n
    return np.stack(np.meshgrid(*axes, indexing="ij"))
