"""Criticality calculus for the dissipation exponent.

The solvability threshold is alpha_L(n) = (2+n)/4: dissipation wins when
2*alpha - 1 > n/2.  The rescaling symmetry of the equations sends a solution
u to u_q(x, t) = q^(2*alpha-1) u(qx, q^(2*alpha) t); on the fixed torus the
energy of the rescaled field picks up q^(4*alpha-2), and after restoring the
q^(-n) change-of-variables volume factor the ratio is q^(4*alpha-2-n), which
is 1 exactly at alpha = alpha_L(n).

Exponent arithmetic accepts exact rationals (fractions.Fraction) so that
"critical" is decided exactly rather than by float comparison.  The
moment-interpolation ratio is checked on a continuum Gaussian family with
closed-form moments; a grid mode-sum would miss the R^n measure Jacobian
that produces the (ell + n/2)/(m + n/2) exponent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .diagnostics import energy
from .spectral import SpectralVectorField

SUBCRITICAL = "subcritical"
CRITICAL = "critical"
SUPERCRITICAL = "supercritical"


class DegenerateScaling(ValueError):
    """The rescaling symmetry is undefined at alpha <= 1/2."""


class RescaleOverflow(ValueError):
    """Rescaled spectral support would leave the dealiased ball."""


def lions_exponent(n: int) -> Fraction:
    """(2 + n)/4, exactly."""
    if n < 2 or int(n) != n:
        raise ValueError(f"n must be an integer >= 2, got {n}")
    return Fraction(2 + int(n), 4)


def solvability_margin(n: int, alpha):
    """margin = 2*alpha - 1 - n/2 and its three-way classification.

    alpha may be a float, int or Fraction; arithmetic is exact in all cases
    (floats are dyadic rationals), so the critical case is detected exactly.
    Returns (margin, label) with margin a Fraction.
    """
    if n < 2 or int(n) != n:
        raise ValueError(f"n must be an integer >= 2, got {n}")
    margin = 2 * Fraction(alpha) - 1 - Fraction(int(n), 2)
    if margin > 0:
        label = SUBCRITICAL
    elif margin == 0:
        label = CRITICAL
    else:
        label = SUPERCRITICAL
    return margin, label


@dataclass(frozen=True)
class ScaleTransform:
    """Amplitude factor lam with derived space/time factors and energy exponent.

    mu = lam^(1/(2*alpha-1)), tau = lam^(2*alpha/(2*alpha-1));
    energy_exponent_q = 4*alpha - 2 - n in zoom units q = 1/mu, zero iff
    alpha = alpha_L(n).
    """

    lam: float
    alpha: float
    n: int
    mu: float
    tau: float
    energy_exponent_q: object  # Fraction when alpha is rational, else float


def make_scale_transform(lam, alpha, n: int) -> ScaleTransform:
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if not alpha > 0.5:
        raise DegenerateScaling(
            f"scale transform undefined for alpha <= 1/2 (got alpha={alpha})"
        )
    denom = 2.0 * float(alpha) - 1.0
    mu = float(lam) ** (1.0 / denom)
    tau = float(lam) ** (2.0 * float(alpha) / denom)
    if isinstance(alpha, (Fraction, int)):
        exponent = 4 * Fraction(alpha) - 2 - n
    else:
        exponent = 4.0 * alpha - 2.0 - n
    return ScaleTransform(lam=float(lam), alpha=float(alpha), n=int(n),
                          mu=mu, tau=tau, energy_exponent_q=exponent)


def apply_discrete_rescale(u: SpectralVectorField, q: int, alpha) -> SpectralVectorField:
    """Torus zoom: c'(q k) = q^(2*alpha-1) c(k), zero elsewhere.

    Requires q * (max active |k_j|) < N/3 so the image stays dealiased;
    otherwise raises RescaleOverflow.
    """
    if int(q) != q or q < 1:
        raise ValueError(f"q must be a positive integer, got {q}")
    q = int(q)
    lat = u.lattice
    N = lat.N
    active = np.abs(u.coeffs).sum(axis=0) > 0
    if active.any():
        grids = lat.mode_grids
        kmax = 0
        for g in grids:
            comp_max = np.max(np.abs(np.broadcast_to(g, lat.shape))[active])
            kmax = max(kmax, int(comp_max))
    else:
        kmax = 0
    if not q * kmax < N / 3:
        raise RescaleOverflow(
            f"q={q} pushes active modes (max |k_j|={kmax}) past N/3={N / 3:g}"
        )
    if q == 1:
        return u.with_coeffs(u.coeffs.copy())
    src_modes = np.arange(-kmax, kmax + 1)
    src_idx = src_modes % N
    dst_idx = (q * src_modes) % N
    factor = float(q) ** (2.0 * float(alpha) - 1.0)
    out = np.zeros_like(u.coeffs)
    sel_src = (slice(None),) + np.ix_(*([src_idx] * lat.n))
    sel_dst = (slice(None),) + np.ix_(*([dst_idx] * lat.n))
    out[sel_dst] = factor * u.coeffs[sel_src]
    return u.with_coeffs(out)


def scaled_energy_ratio(u: SpectralVectorField, q: int, alpha, n: int) -> float:
    """E(u_q) * q^(-n) / E(u); equals q^(4*alpha-2-n) by Parseval.

    The q^(-n) factor restores the R^n change-of-variables Jacobian that the
    fixed torus lacks, so criticality reads off the ratio directly.
    """
    e0 = energy(u)
    if e0 == 0.0:
        raise ValueError("scaled energy ratio is undefined for the zero field")
    e_q = energy(apply_discrete_rescale(u, q, alpha))
    return e_q * float(q) ** (-float(n)) / e0


def gaussian_moment(n: int, ell, sigma) -> float:
    """Closed-form moment sum for the Gaussian profile sigma^(n/2) e^(-sigma^2 |k|^2 / 2).

    M_ell = sigma^(n/2) S_{n-1} 2^((ell+n-2)/2) Gamma((ell+n)/2) / sigma^(ell+n)
    with S_{n-1} = 2 pi^(n/2) / Gamma(n/2) the unit-sphere area.  The family
    has sigma-independent L^2 norm, which is what drives the interpolation
    exponent below.
    """
    if n < 1 or int(n) != n:
        raise ValueError(f"n must be a positive integer, got {n}")
    if ell < 0:
        raise ValueError("moment order must be nonnegative")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    n = int(n)
    sphere = 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
    return (
        sigma ** (n / 2.0)
        * sphere
        * 2.0 ** ((ell + n - 2) / 2.0)
        * math.gamma((ell + n) / 2.0)
        * sigma ** (-(ell + n))
    )


def interpolation_ratio(n: int, ell, m, sigma) -> float:
    """M_ell / M_m^((ell+n/2)/(m+n/2)) on the Gaussian family.

    Independent of sigma: under k -> k/lambda with the L^2-preserving
    amplitude factor, M_j scales as lambda^(j+n/2), so this combination is
    scale-free.  Its constancy is the checkable content of the moment
    interpolation bound.
    """
    if not 0 <= ell <= m:
        raise ValueError(f"need 0 <= ell <= m, got ell={ell}, m={m}")
    exponent = (ell + n / 2.0) / (m + n / 2.0)
    return gaussian_moment(n, ell, sigma) / gaussian_moment(n, m, sigma) ** exponent
