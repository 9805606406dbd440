"""Fourier lattice, spectral/physical vector fields, and the basic spectral operators.

Everything lives on the periodic torus [0, 2*pi)^n with integer wavenumbers in
standard FFT ordering (0, 1, ..., N/2-1, -N/2, ..., -1) per axis.  Coefficients
follow the Fourier-series convention

    f(x) = sum_k c(k) exp(i k.x),

so Parseval reads  integral |f|^2 dx = (2*pi)^n * sum_k |c(k)|^2.

All operations here are pure functions: fields are treated as immutable values
and every operation returns a fresh field, so values can be shared freely
between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.fft as _fft

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class WavenumberLattice:
    """Discrete Fourier grid for an n-dimensional periodic box.

    Parameters
    ----------
    n : int
        Spatial dimension, 2 or 3.
    N : int
        Modes (and grid points) per axis; even, 8 <= N <= 512.
    domain_length : float
        Physical period.  The diagnostic identities in this package are
        quoted for the default 2*pi.
    """

    n: int
    N: int
    domain_length: float = TWO_PI

    # cached arrays, filled in __post_init__
    modes_1d: np.ndarray = field(init=False, repr=False, compare=False)
    kmod_array: np.ndarray = field(init=False, repr=False, compare=False)
    ksq_array: np.ndarray = field(init=False, repr=False, compare=False)
    dealias_mask_array: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError(f"unsupported dimension n={self.n}; expected 2 or 3")
        if self.N % 2 != 0:
            raise ValueError(f"N must be even, got N={self.N}")
        if not 8 <= self.N <= 512:
            raise ValueError(f"N must satisfy 8 <= N <= 512, got N={self.N}")
        modes = np.fft.fftfreq(self.N, d=1.0 / self.N).astype(np.int64)
        grids = self.mode_grids_from(modes)
        ksq = sum(g.astype(np.float64) ** 2 for g in grids)
        mask = np.ones((self.N,) * self.n, dtype=bool)
        cut = self.N / 3.0
        for g in grids:
            mask &= np.abs(g) < cut
        object.__setattr__(self, "modes_1d", modes)
        object.__setattr__(self, "ksq_array", np.broadcast_to(ksq, self.shape).copy())
        object.__setattr__(self, "kmod_array", np.sqrt(self.ksq_array))
        object.__setattr__(self, "dealias_mask_array", mask)

    def mode_grids_from(self, modes):
        # sparse meshgrid: n arrays broadcastable to the full grid shape
        return np.meshgrid(*([modes] * self.n), indexing="ij", sparse=True)

    @property
    def mode_grids(self):
        """Sparse integer mode arrays (k_1, ..., k_n), broadcastable to `shape`."""
        return self.mode_grids_from(self.modes_1d)

    @property
    def shape(self):
        return (self.N,) * self.n

    @property
    def total_modes(self) -> int:
        return self.N**self.n

    @property
    def dx(self) -> float:
        return self.domain_length / self.N

    @property
    def cell_volume(self) -> float:
        return self.dx**self.n

    @property
    def volume(self) -> float:
        return self.domain_length**self.n

    def grid_axes(self):
        """Physical coordinates along one axis (shared by all axes)."""
        return np.arange(self.N) * self.dx

    def k_of(self, index: int):
        """Integer mode vector for a flat row-major index."""
        return tuple(
            int(self.modes_1d[j]) for j in np.unravel_index(index, self.shape)
        )

    def kmod(self, index: int) -> float:
        return float(self.kmod_array.flat[index])

    def dealias_mask(self, index: int) -> bool:
        return bool(self.dealias_mask_array.flat[index])

    def conjugate_index_arrays(self):
        """Per-axis index arrays mapping mode k to mode -k (mod N)."""
        idx = (-np.arange(self.N)) % self.N
        return (idx,) * self.n


def build_lattice(n: int, N: int) -> WavenumberLattice:
    """Construct the wavenumber lattice for an N^n periodic grid."""
    return WavenumberLattice(n=n, N=N)


@dataclass(frozen=True)
class SpectralVectorField:
    """Velocity field stored as full complex Fourier coefficients.

    `coeffs` has shape (n, N, ..., N): component index first, then the FFT
    grid.  Valid solver states are Hermitian-symmetric (real-valued in
    physical space), zero-mean and divergence-free.
    """

    lattice: WavenumberLattice
    coeffs: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        expected = (self.lattice.n,) + self.lattice.shape
        if self.coeffs.shape != expected:
            raise ValueError(
                f"coeffs shape {self.coeffs.shape} does not match lattice "
                f"shape {expected}"
            )

    @property
    def n(self) -> int:
        return self.lattice.n

    def with_coeffs(self, coeffs, time=None) -> "SpectralVectorField":
        return replace(self, coeffs=coeffs, time=self.time if time is None else time)


@dataclass(frozen=True)
class PhysicalVectorField:
    """Velocity samples on the uniform N^n grid, shape (n, N, ..., N)."""

    lattice: WavenumberLattice
    values: np.ndarray

    def __post_init__(self):
        expected = (self.lattice.n,) + self.lattice.shape
        if self.values.shape != expected:
            raise ValueError(
                f"values shape {self.values.shape} does not match lattice "
                f"shape {expected}"
            )


# -- array-level transforms (leading axes are batched) ------------------------


def grid_to_coeffs(values: np.ndarray, n: int) -> np.ndarray:
    """Forward transform of grid samples over the trailing n axes."""
    axes = tuple(range(values.ndim - n, values.ndim))
    return _fft.fftn(values, axes=axes, norm="forward")


def coeffs_to_grid(coeffs: np.ndarray, n: int) -> np.ndarray:
    """Inverse transform to real grid samples over the trailing n axes."""
    axes = tuple(range(coeffs.ndim - n, coeffs.ndim))
    return _fft.ifftn(coeffs, axes=axes, norm="forward").real


def to_spectral(f: PhysicalVectorField) -> SpectralVectorField:
    return SpectralVectorField(f.lattice, grid_to_coeffs(f.values, f.lattice.n))


def to_physical(u: SpectralVectorField) -> PhysicalVectorField:
    return PhysicalVectorField(u.lattice, coeffs_to_grid(u.coeffs, u.lattice.n))


# -- operators ----------------------------------------------------------------


def leray_project_coeffs(lattice: WavenumberLattice, coeffs: np.ndarray) -> np.ndarray:
    """Array-level Leray projection: c <- c - k (k.c)/|k|^2, mode 0 untouched."""
    grids = lattice.mode_grids
    inv_ksq = np.zeros(lattice.shape)
    nonzero = lattice.ksq_array > 0
    inv_ksq[nonzero] = 1.0 / lattice.ksq_array[nonzero]
    div = sum(grids[j] * coeffs[j] for j in range(lattice.n))
    div_over_ksq = div * inv_ksq
    out = coeffs.copy()
    for j in range(lattice.n):
        out[j] -= grids[j] * div_over_ksq
    return out


def leray_project(u: SpectralVectorField) -> SpectralVectorField:
    """Project onto divergence-free fields; idempotent, annihilates gradients."""
    return u.with_coeffs(leray_project_coeffs(u.lattice, u.coeffs))


def spectral_derivative(u: SpectralVectorField, component: int, axis: int) -> np.ndarray:
    """Coefficients of d(u_component)/d(x_axis): multiply by i*k_axis."""
    grids = u.lattice.mode_grids
    return 1j * grids[axis] * u.coeffs[component]


def dealias_coeffs(lattice: WavenumberLattice, coeffs: np.ndarray) -> np.ndarray:
    return coeffs * lattice.dealias_mask_array


def dealias(u: SpectralVectorField) -> SpectralVectorField:
    """Zero every mode with any |k_j| >= N/3 (2/3 rule)."""
    return u.with_coeffs(dealias_coeffs(u.lattice, u.coeffs))


def vorticity(u: SpectralVectorField):
    """Curl of the velocity field.

    Returns a spectral scalar array for n=2 (omega = d_x u_2 - d_y u_1) and a
    SpectralVectorField for n=3.
    """
    lat = u.lattice
    g = lat.mode_grids
    c = u.coeffs
    if lat.n == 2:
        return 1j * (g[0] * c[1] - g[1] * c[0])
    if lat.n == 3:
        w = np.empty_like(c)
        w[0] = 1j * (g[1] * c[2] - g[2] * c[1])
        w[1] = 1j * (g[2] * c[0] - g[0] * c[2])
        w[2] = 1j * (g[0] * c[1] - g[1] * c[0])
        return SpectralVectorField(lat, w, u.time)
    raise ValueError(f"vorticity requires n in (2, 3), got n={lat.n}")


# -- invariant helpers (used by tests and the verification suite) --------------


def hermitian_conjugate(lattice: WavenumberLattice, coeffs: np.ndarray) -> np.ndarray:
    """conj(c(-k)) with the trailing n axes index-reversed mod N."""
    idx = lattice.conjugate_index_arrays()
    lead = coeffs.ndim - lattice.n
    sel = (slice(None),) * lead + np.ix_(*idx)
    return np.conj(coeffs[sel])


def hermitian_defect(u: SpectralVectorField) -> float:
    """Max |c(k) - conj(c(-k))| over all components and modes."""
    return float(
        np.max(np.abs(u.coeffs - hermitian_conjugate(u.lattice, u.coeffs)))
    )


def divergence_defect(u: SpectralVectorField) -> float:
    """Max |k . c(k)| relative to the largest coefficient amplitude."""
    grids = u.lattice.mode_grids
    div = sum(grids[j] * u.coeffs[j] for j in range(u.lattice.n))
    scale = float(np.max(np.abs(u.coeffs)))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(div))) / scale


def mean_mode(u: SpectralVectorField) -> np.ndarray:
    return u.coeffs[(slice(None),) + (0,) * u.lattice.n]


def validate_field(u: SpectralVectorField, hermitian_tol=1e-12, div_tol=None):
    """Raise ValueError if a solver-state invariant is violated."""
    if hermitian_defect(u) > hermitian_tol:
        raise ValueError("field is not Hermitian-symmetric")
    if np.any(mean_mode(u) != 0):
        raise ValueError("field has a nonzero mean mode")
    if div_tol is not None and divergence_defect(u) > div_tol:
        raise ValueError("field is not divergence-free")


def zero_field(lattice: WavenumberLattice, time: float = 0.0) -> SpectralVectorField:
    return SpectralVectorField(
        lattice, np.zeros((lattice.n,) + lattice.shape, dtype=np.complex128), time
    )
