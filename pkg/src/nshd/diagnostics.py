"""Norms, monitors and per-snapshot diagnostics records.

Conventions (Fourier-series coefficients on the 2*pi torus):
    energy            E = 1/2 (2*pi)^n sum_k sum_i |u_i(k)|^2
    dissipation rate  D = nu (2*pi)^n sum_k |k|^(2*alpha) sum_i |u_i(k)|^2
    moment norm       M_m(u_i) = sum_k |k|^m |u_i(k)|        (plain mode sum)
    Sobolev norm      ||u||_{H^beta}^2 = (2*pi)^n sum_k (1+|k|^2)^beta sum_i |u_i|^2

Along exact solutions dE/dt = -D (the differentiated energy identity, with
the factor 2 kept explicit).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import SolverConfig, compute_pressure
from .spectral import SpectralVectorField, coeffs_to_grid, vorticity

TAIL_FRACTION_THRESHOLD = 1e-6


class NotEnoughSamples(ValueError):
    """A monitor was asked to differentiate fewer than three records."""


@dataclass(frozen=True)
class Flags:
    diverged: bool = False
    resolution_loss: bool = False

    def names(self):
        out = []
        if self.diverged:
            out.append("diverged")
        if self.resolution_loss:
            out.append("resolution_loss")
        return out


@dataclass(frozen=True)
class DiagnosticsRecord:
    step: int
    t: float
    dt: float
    energy: float
    dissipation_rate: float
    enstrophy: float
    enstrophy_production: float
    max_velocity: float
    moments: dict          # component -> {order: M_m}
    sobolev: dict          # beta -> ||u||_{H^beta}
    pressure_moments: dict # exponent j -> sum_k |k|^j |p_hat(k)|
    tail_fraction: float
    flags: Flags = field(default_factory=Flags)


# -- scalar diagnostics --------------------------------------------------------


def energy(u: SpectralVectorField) -> float:
    return 0.5 * u.lattice.volume * float(np.sum(np.abs(u.coeffs) ** 2))


def dissipation_rate(u: SpectralVectorField, alpha: float, nu: float) -> float:
    lat = u.lattice
    weights = lat.kmod_array ** (2.0 * alpha)
    return nu * lat.volume * float(
        np.sum(weights * np.sum(np.abs(u.coeffs) ** 2, axis=0))
    )


def moment_norm(u: SpectralVectorField, component: int, m) -> float:
    """M_m(u_i): mode sum of |k|^m |u_i(k)| (|k|^0 = 1 at k = 0)."""
    kmod = u.lattice.kmod_array
    weights = np.ones_like(kmod) if m == 0 else kmod ** float(m)
    return float(np.sum(weights * np.abs(u.coeffs[component])))


def enstrophy(u: SpectralVectorField) -> float:
    w = vorticity(u)
    w_arr = w if isinstance(w, np.ndarray) else w.coeffs
    return 0.5 * u.lattice.volume * float(np.sum(np.abs(w_arr) ** 2))


def enstrophy_production(u: SpectralVectorField) -> float:
    """<omega . grad u, omega> by grid quadrature; identically 0 for n = 2."""
    lat = u.lattice
    if lat.n == 2:
        return 0.0
    grids = lat.mode_grids
    n = lat.n
    batch = np.empty((n + n * n,) + lat.shape, dtype=np.complex128)
    batch[:n] = vorticity(u).coeffs
    pos = n
    for i in range(n):
        for j in range(n):
            batch[pos] = 1j * grids[i] * u.coeffs[j]  # d_i u_j
            pos += 1
    phys = coeffs_to_grid(batch, n)
    w = phys[:n]
    du = phys[n:].reshape((n, n) + lat.shape)
    integrand = np.einsum("i...,ij...,j...->...", w, du, w)
    return lat.cell_volume * float(np.sum(integrand))


def max_velocity(u: SpectralVectorField) -> float:
    return float(np.max(np.abs(coeffs_to_grid(u.coeffs, u.lattice.n))))


def sobolev_norm(u: SpectralVectorField, beta: float) -> float:
    lat = u.lattice
    weights = (1.0 + lat.ksq_array) ** float(beta)
    return math.sqrt(
        lat.volume * float(np.sum(weights * np.sum(np.abs(u.coeffs) ** 2, axis=0)))
    )


def pressure_moment(u: SpectralVectorField, exponent, p_hat=None) -> float:
    """sum_k |k|^j |p_hat(k)| for the pressure of u."""
    if p_hat is None:
        p_hat = compute_pressure(u)
    kmod = u.lattice.kmod_array
    weights = np.ones_like(kmod) if exponent == 0 else kmod ** float(exponent)
    return float(np.sum(weights * np.abs(p_hat)))


def tail_fraction(u: SpectralVectorField) -> float:
    """Energy fraction in the shell |k| in [N/3 - 1, N/3)."""
    lat = u.lattice
    kmod = lat.kmod_array
    cut = lat.N / 3.0
    shell = (kmod >= cut - 1.0) & (kmod < cut)
    per_mode = np.sum(np.abs(u.coeffs) ** 2, axis=0)
    total = float(np.sum(per_mode))
    if total == 0.0:
        return 0.0
    return float(np.sum(per_mode[shell])) / total


# -- the moment-inequality monitor ---------------------------------------------


@dataclass(frozen=True)
class MomentInequalitySample:
    """Moment-inequality residual at one diagnostic time.

    residual = rhs - lhs where lhs is the finite-difference d/dt of
    M_m(u_i) and rhs is the binomial transport sum minus the dissipative
    moment plus the pressure term.  The inequality holds iff
    residual >= -tol.
    """

    t: float
    component: int
    m: float
    lhs: float
    rhs: float
    residual: float
    tol: float
    one_sided: bool

    @property
    def satisfied(self) -> bool:
        return self.residual >= -self.tol


def _require_moment(record: DiagnosticsRecord, component: int, order: float) -> float:
    comp = record.moments.get(component)
    if comp is None or order not in comp:
        raise ValueError(
            f"record at t={record.t:g} lacks moment order {order:g} for "
            f"component {component}; configure moment_orders accordingly"
        )
    return comp[order]


def moment_inequality_rhs(record: DiagnosticsRecord, component: int, m: int,
              alpha: float, nu: float) -> float:
    """Binomial sum - nu M_{2a+m} + pressure moment, from one record."""
    m = int(m)
    n_comp = len(record.moments)
    transport = 0.0
    for j in range(n_comp):
        for ell in range(m + 1):
            transport += (
                math.comb(m, ell)
                * _require_moment(record, j, float(ell))
                * _require_moment(record, component, float(m - ell + 1))
            )
    dissipative = nu * _require_moment(record, component, float(2.0 * alpha + m))
    c_pressure = record.pressure_moments.get(float(m + 1))
    if c_pressure is None:
        raise ValueError(
            f"record at t={record.t:g} lacks pressure moment exponent {m + 1}"
        )
    return transport - dissipative + c_pressure


def _fd_derivative(ts, ys, idx):
    """Three-point derivative of ys at ts[idx]; one-sided at the ends."""
    last = len(ts) - 1
    if idx == 0:
        return (ys[1] - ys[0]) / (ts[1] - ts[0]), True
    if idx == last:
        return (ys[last] - ys[last - 1]) / (ts[last] - ts[last - 1]), True
    h1 = ts[idx] - ts[idx - 1]
    h2 = ts[idx + 1] - ts[idx]
    # nonuniform centered 3-point formula
    d = (
        ys[idx - 1] * (-h2 / (h1 * (h1 + h2)))
        + ys[idx] * ((h2 - h1) / (h1 * h2))
        + ys[idx + 1] * (h1 / (h2 * (h1 + h2)))
    )
    return d, False


def moment_inequality_scan(records, component: int, m: int, alpha: float, nu: float):
    """Evaluate the moment-inequality residual at every record in a window."""
    if len(records) < 3:
        raise NotEnoughSamples(
            f"need at least 3 consecutive records, got {len(records)}"
        )
    ts = [r.t for r in records]
    ms = [_require_moment(r, component, float(m)) for r in records]
    out = []
    for idx, rec in enumerate(records):
        lhs, one_sided = _fd_derivative(ts, ms, idx)
        rhs = moment_inequality_rhs(rec, component, m, alpha, nu)
        h = max(
            ts[min(idx + 1, len(ts) - 1)] - ts[idx],
            ts[idx] - ts[max(idx - 1, 0)],
        )
        # local decay-rate estimate sizes the finite-difference error term
        lo, hi = max(idx - 1, 0), min(idx + 2, len(ms))
        m_loc = max(max(abs(v) for v in ms[lo:hi]), 1e-300)
        rate = max(1.0, abs(lhs) / m_loc)
        if one_sided:
            fd_allowance = 0.5 * h * m_loc * rate**2
        else:
            fd_allowance = (h**2 / 6.0) * m_loc * rate**3
        tol = 1e-6 * (1.0 + abs(rhs)) + fd_allowance
        out.append(MomentInequalitySample(rec.t, component, float(m), lhs, rhs,
                               rhs - lhs, tol, one_sided))
    return out


def moment_inequality_residual(records, component: int, m: int, alpha: float, nu: float) -> MomentInequalitySample:
    """Residual at the center record of a window of >= 3 records."""
    samples = moment_inequality_scan(records, component, m, alpha, nu)
    return samples[len(samples) // 2]


# -- the max-norm vs moment bound ------------------------------------------------


@dataclass(frozen=True)
class MaxNormBoundCheck:
    component: int
    axis: int | None
    order: int
    lhs: float   # ||d^beta u_i||_inf
    rhs: float   # M_|beta|(u_i)
    holds: bool


def max_norm_bound_check(u: SpectralVectorField, beta_total: int):
    """Check ||d^beta u_i||_inf <= M_|beta|(u_i) for pure-axis multi-indices.

    Returns one MaxNormBoundCheck per component (and per axis when beta_total > 0).
    With the series convention the bound carries prefactor 1 and is a
    triangle-inequality fact, exact up to rounding (tolerance 1e-10).
    """
    lat = u.lattice
    grids = lat.mode_grids
    out = []
    axes = [None] if beta_total == 0 else list(range(lat.n))
    for i in range(lat.n):
        rhs = moment_norm(u, i, beta_total)
        for axis in axes:
            if axis is None:
                deriv = u.coeffs[i]
            else:
                deriv = (1j * grids[axis]) ** beta_total * u.coeffs[i]
            lhs = float(np.max(np.abs(coeffs_to_grid(deriv, lat.n))))
            out.append(MaxNormBoundCheck(i, axis, beta_total, lhs, rhs,
                                   lhs <= rhs + 1e-10))
    return out


# -- record assembly -------------------------------------------------------------


def blowup_indicator(record: DiagnosticsRecord) -> Flags:
    """Discrete blow-up proxies; neither flag claims a true singularity."""
    scalars = [
        record.energy, record.dissipation_rate, record.enstrophy,
        record.enstrophy_production, record.max_velocity, record.tail_fraction,
    ]
    scalars.extend(v for comp in record.moments.values() for v in comp.values())
    scalars.extend(record.sobolev.values())
    scalars.extend(record.pressure_moments.values())
    diverged = any(not math.isfinite(v) for v in scalars)
    return Flags(
        diverged=diverged,
        resolution_loss=record.tail_fraction > TAIL_FRACTION_THRESHOLD,
    )


def compute_diagnostics(u: SpectralVectorField, cfg: SolverConfig,
                        step: int = 0, dt: float = 0.0) -> DiagnosticsRecord:
    with np.errstate(over="ignore", invalid="ignore"):
        return _compute_diagnostics(u, cfg, step, dt)


def _compute_diagnostics(u, cfg, step, dt):
    nu_eff = 0.0 if cfg.inviscid else cfg.nu
    moments = {
        i: {m: moment_norm(u, i, m) for m in cfg.moment_orders}
        for i in range(u.lattice.n)
    }
    pressure_moments = {}
    integer_orders = sorted({m for m in cfg.moment_orders if m == int(m)})
    if integer_orders:
        p_hat = compute_pressure(u)
        for m in integer_orders:
            pressure_moments[m + 1.0] = pressure_moment(u, m + 1.0, p_hat=p_hat)
    record = DiagnosticsRecord(
        step=step,
        t=u.time,
        dt=dt,
        energy=energy(u),
        dissipation_rate=dissipation_rate(u, cfg.alpha, nu_eff) if nu_eff else 0.0,
        enstrophy=enstrophy(u),
        enstrophy_production=enstrophy_production(u),
        max_velocity=max_velocity(u),
        moments=moments,
        sobolev={b: sobolev_norm(u, b) for b in cfg.sobolev_betas},
        pressure_moments=pressure_moments,
        tail_fraction=tail_fraction(u),
    )
    return dataclasses.replace(record, flags=blowup_indicator(record))


# -- CSV schema -------------------------------------------------------------------


def _fmt_order(x: float) -> str:
    return str(int(x)) if float(x) == int(x) else repr(float(x))


def csv_header(cfg: SolverConfig) -> str:
    cols = ["step", "t", "dt", "energy", "dissipation_rate", "enstrophy",
            "production", "max_velocity"]
    for m in cfg.moment_orders:
        for i in range(cfg.n):
            cols.append(f"M{_fmt_order(m)}_c{i + 1}")
    for b in cfg.sobolev_betas:
        cols.append(f"H{_fmt_order(b)}")
    cols.extend(["tail_fraction", "flags"])
    return ",".join(cols)


def csv_row(record: DiagnosticsRecord, cfg: SolverConfig) -> str:
    vals = [str(record.step), repr(record.t), repr(record.dt),
            repr(record.energy), repr(record.dissipation_rate),
            repr(record.enstrophy), repr(record.enstrophy_production),
            repr(record.max_velocity)]
    for m in cfg.moment_orders:
        for i in range(cfg.n):
            vals.append(repr(record.moments[i][m]))
    for b in cfg.sobolev_betas:
        vals.append(repr(record.sobolev[b]))
    vals.append(repr(record.tail_fraction))
    vals.append("|".join(record.flags.names()))
    return ",".join(vals)
