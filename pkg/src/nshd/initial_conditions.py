"""Smooth, zero-mean, divergence-free initial fields.

Random fields use numpy's Philox bit generator (philox4x64-10), a 64-bit
counter-based RNG with a documented, platform-stable stream, so a (seed,
lattice, band) triple reproduces coefficients bit-exactly.  Draw order is
fixed: components major, then half-space modes in flat row-major order,
real part before imaginary part.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import (
    SpectralVectorField,
    WavenumberLattice,
    hermitian_conjugate,
    leray_project_coeffs,
)

RNG_ALGORITHM = "philox4x64-10/v1"


class EmptyBand(ValueError):
    """Raised when a requested spectral shell contains no modes."""


@dataclass(frozen=True)
class InitialConditionSpec:
    """Declarative description of an initial field.

    kind is "taylor_green" (amplitude only) or "random_band" (seeded band
    of Gaussian modes with amplitude ~ |k|^spectrum_slope, rescaled so the
    total energy equals amplitude^2).
    """

    kind: str
    amplitude: float = 1.0
    seed: int = 0
    band: tuple = (1, 3)
    spectrum_slope: float = 0.0

    def __post_init__(self):
        if self.kind not in ("taylor_green", "random_band"):
            raise ValueError(f"unknown initial condition kind {self.kind!r}")
        if not self.amplitude > 0:
            raise ValueError("amplitude must be positive")
        if self.kind == "random_band":
            k_min, k_max = self.band
            if int(k_min) != k_min or int(k_max) != k_max:
                raise ValueError("band bounds must be integers")
            if not 1 <= k_min <= k_max:
                raise ValueError(f"invalid band {self.band}: need 1 <= k_min <= k_max")


def taylor_green(lattice: WavenumberLattice, amplitude: float = 1.0) -> SpectralVectorField:
    """Taylor-Green vortex, constructed directly in spectral space.

    n=2: A (sin x cos y, -cos x sin y); n=3: A (sin x cos y cos z,
    -cos x sin y cos z, 0).  Exactly divergence-free and zero-mean.
    """
    n, N = lattice.n, lattice.N
    coeffs = np.zeros((n,) + lattice.shape, dtype=np.complex128)
    # sin x -> -+ i/2 at k1 = +-1 ; cos x -> 1/2 at k1 = +-1
    for s1 in (1, -1):
        for s2 in (1, -1):
            c_sin_x = s1 / 2j  # coefficient of exp(i s1 x) in sin x
            c_cos_x = 0.5
            c_sin_y = s2 / 2j
            c_cos_y = 0.5
            i1, i2 = s1 % N, s2 % N
            if n == 2:
                coeffs[0][i1, i2] = amplitude * c_sin_x * c_cos_y
                coeffs[1][i1, i2] = -amplitude * c_cos_x * c_sin_y
            else:
                for s3 in (1, -1):
                    i3 = s3 % N
                    c_cos_z = 0.5
                    coeffs[0][i1, i2, i3] = amplitude * c_sin_x * c_cos_y * c_cos_z
                    coeffs[1][i1, i2, i3] = -amplitude * c_cos_x * c_sin_y * c_cos_z
    return SpectralVectorField(lattice, coeffs, 0.0)


def _halfspace_mask(lattice: WavenumberLattice) -> np.ndarray:
    """Lexicographically-positive half of the mode lattice (k and -k split)."""
    grids = lattice.mode_grids
    shape = lattice.shape
    mask = np.zeros(shape, dtype=bool)
    prev_zero = np.ones(shape, dtype=bool)
    for g in grids:
        mask |= prev_zero & np.broadcast_to(g > 0, shape)
        prev_zero = prev_zero & np.broadcast_to(g == 0, shape)
    return mask


def random_band_limited(lattice: WavenumberLattice, spec: InitialConditionSpec) -> SpectralVectorField:
    """Seeded random divergence-free field supported on a spectral shell.

    Modes with k_min <= |k| <= k_max get independent complex Gaussian
    amplitudes shaped by |k|^spectrum_slope; Hermitian symmetry is enforced
    by drawing a half-space and mirroring, then the field is Leray-projected
    and rescaled so its energy is exactly amplitude^2.
    """
    if spec.kind != "random_band":
        raise ValueError("spec.kind must be 'random_band'")
    n = lattice.n
    k_min, k_max = spec.band
    if not k_max < lattice.N / 3:
        raise ValueError(
            f"band upper bound {k_max} must stay below N/3 = {lattice.N / 3:g}"
        )
    kmod = lattice.kmod_array
    shell = (kmod >= k_min) & (kmod <= k_max)
    if not shell.any():
        raise EmptyBand(f"no modes with |k| in [{k_min}, {k_max}]")
    half = shell & _halfspace_mask(lattice)

    flat_idx = np.flatnonzero(half)  # row-major order fixes the draw order
    rng = np.random.Generator(np.random.Philox(key=spec.seed))
    draws = rng.standard_normal((n, flat_idx.size, 2))
    amplitudes = (draws[..., 0] + 1j * draws[..., 1]) * (
        kmod.flat[flat_idx] ** spec.spectrum_slope
    )

    coeffs = np.zeros((n,) + lattice.shape, dtype=np.complex128)
    for i in range(n):
        coeffs[i].flat[flat_idx] = amplitudes[i]
    coeffs = coeffs + hermitian_conjugate(lattice, coeffs)  # fills the -k half
    coeffs = leray_project_coeffs(lattice, coeffs)

    total = lattice.volume * np.sum(np.abs(coeffs) ** 2)  # = 2 * energy
    if total == 0.0:
        raise EmptyBand("projection annihilated every mode in the band")
    coeffs *= spec.amplitude / np.sqrt(0.5 * total)
    return SpectralVectorField(lattice, coeffs, 0.0)


def build_initial_field(lattice: WavenumberLattice, spec: InitialConditionSpec) -> SpectralVectorField:
    if spec.kind == "taylor_green":
        return taylor_green(lattice, spec.amplitude)
    return random_band_limited(lattice, spec)
