"""Time integration of the hyperdissipative Navier-Stokes system.

The spectral right-hand side is du/dt = -P[(u.grad)u] - nu |k|^(2*alpha) u,
with P the Leray projector and the quadratic term formed pseudo-spectrally
under the 2/3 rule.  Time stepping is classical RK4 applied to the
integrating-factor variable v = exp(nu |k|^(2*alpha) t) u, so the stiff
dissipative part is handled exactly: with the nonlinearity switched off a
step reduces to exact exponential decay.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import (
    SpectralVectorField,
    WavenumberLattice,
    build_lattice,
    coeffs_to_grid,
    dealias_coeffs,
    grid_to_coeffs,
    leray_project_coeffs,
)


class Diverged(RuntimeError):
    """Non-finite coefficients appeared during time stepping."""

    def __init__(self, t: float, step: int):
        super().__init__(f"solution diverged at t={t:g} (step {step})")
        self.t = t
        self.step = step


@dataclass(frozen=True)
class SolverConfig:
    """Solver parameters: grid, dissipation, stepping and diagnostics policy."""

    n: int
    N: int
    alpha: float
    t_end: float
    nu: float = 1.0
    cfl_safety: float = 0.5
    dt_max: float = 0.01
    inviscid: bool = False
    diag_stride: int = 10
    moment_orders: tuple = (0.0, 1.0, 2.0)
    sobolev_betas: tuple = (0.0, 1.0)

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError(f"n must be 2 or 3, got {self.n}")
        if self.N % 2 != 0:
            raise ValueError(f"N must be even, got {self.N}")
        if not self.inviscid:
            if not self.alpha > 0:
                raise ValueError("alpha must be positive for viscous runs")
            if not self.nu > 0:
                raise ValueError("nu must be positive for viscous runs")
        if self.t_end < 0:
            raise ValueError("t_end must be nonnegative")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError("cfl_safety must lie in (0, 1]")
        if not self.dt_max > 0:
            raise ValueError("dt_max must be positive")
        if self.diag_stride < 1:
            raise ValueError("diag_stride must be >= 1")
        object.__setattr__(self, "moment_orders",
                           tuple(float(m) for m in self.moment_orders))
        object.__setattr__(self, "sobolev_betas",
                           tuple(float(b) for b in self.sobolev_betas))
        for m in self.moment_orders:
            if m < 0:
                raise ValueError("moment orders must be nonnegative")

    def make_lattice(self) -> WavenumberLattice:
        return build_lattice(self.n, self.N)


@dataclass(frozen=True)
class SolverState:
    u: SpectralVectorField
    t: float = 0.0
    step_count: int = 0


def dissipation_symbol(lattice: WavenumberLattice, alpha: float, nu: float) -> np.ndarray:
    """nu |k|^(2*alpha) per mode (zero at k = 0)."""
    return nu * lattice.kmod_array ** (2.0 * alpha)


def nonlinear_rhs(lattice: WavenumberLattice, coeffs: np.ndarray, *,
                  dealias: bool = True) -> np.ndarray:
    """-P[(u.grad)u] in spectral space (array level).

    Velocity and all partial derivatives are transformed to the grid, the
    convective products are formed pointwise, and the result is transformed
    back, dealiased, projected and mean-zeroed.
    """
    n = lattice.n
    grids = lattice.mode_grids
    batch = np.empty((n + n * n,) + lattice.shape, dtype=np.complex128)
    batch[:n] = coeffs
    pos = n
    for i in range(n):
        for j in range(n):
            batch[pos] = 1j * grids[j] * coeffs[i]
            pos += 1
    phys = coeffs_to_grid(batch, n)
    vel = phys[:n]
    deriv = phys[n:].reshape((n, n) + lattice.shape)  # deriv[i, j] = d_j u_i
    conv = np.einsum("j...,ij...->i...", vel, deriv)
    out = grid_to_coeffs(conv, n)
    if dealias:
        out = dealias_coeffs(lattice, out)
    out = leray_project_coeffs(lattice, out)
    out[(slice(None),) + (0,) * n] = 0.0
    return -out


def nonlinear_term(u: SpectralVectorField, *, dealias: bool = True) -> SpectralVectorField:
    return u.with_coeffs(nonlinear_rhs(u.lattice, u.coeffs, dealias=dealias))


def compute_pressure(u: SpectralVectorField) -> np.ndarray:
    """Spectral pressure from the Poisson equation -lap(p) = Tr (grad u)^2.

    Tr (grad u)^2 = sum_{i,j} (d_i u_j)(d_j u_i) is formed pseudo-spectrally
    and dealiased; p_hat(k) = g_hat(k)/|k|^2 for k != 0 and p_hat(0) = 0.
    """
    lat = u.lattice
    n = lat.n
    grids = lat.mode_grids
    batch = np.empty((n * n,) + lat.shape, dtype=np.complex128)
    pos = 0
    for i in range(n):
        for j in range(n):
            batch[pos] = 1j * grids[i] * u.coeffs[j]  # d_i u_j
            pos += 1
    dphys = coeffs_to_grid(batch, n).reshape((n, n) + lat.shape)
    trace = np.einsum("ij...,ji...->...", dphys, dphys)
    g_hat = dealias_coeffs(lat, grid_to_coeffs(trace, n))
    inv_ksq = np.zeros(lat.shape)
    nonzero = lat.ksq_array > 0
    inv_ksq[nonzero] = 1.0 / lat.ksq_array[nonzero]
    return g_hat * inv_ksq


def if_rk4_step(coeffs: np.ndarray, dt: float, symbol: np.ndarray, rhs) -> np.ndarray:
    """One integrating-factor RK4 step on raw coefficients.

    `symbol` is the dissipative symbol nu |k|^(2*alpha); `rhs` maps
    coefficients to the nonlinear tendency.  Exact when rhs == 0.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        e_half = np.exp(-0.5 * dt * symbol)
        e_full = e_half * e_half
        a = rhs(coeffs)
        u_a = e_half * (coeffs + 0.5 * dt * a)
        b = rhs(u_a)
        u_b = e_half * coeffs + 0.5 * dt * b
        c = rhs(u_b)
        u_c = e_full * coeffs + dt * e_half * c
        d = rhs(u_c)
        return e_full * coeffs + (dt / 6.0) * (
            e_full * a + 2.0 * e_half * (b + c) + d
        )


def step(state: SolverState, dt: float, cfg: SolverConfig,
         symbol: np.ndarray | None = None) -> SolverState:
    """Advance one RK4 step of size dt; raises Diverged on non-finite output."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    lat = state.u.lattice
    if symbol is None:
        symbol = (np.zeros(lat.shape) if cfg.inviscid
                  else dissipation_symbol(lat, cfg.alpha, cfg.nu))
    rhs = lambda c: nonlinear_rhs(lat, c)
    new = if_rk4_step(state.u.coeffs, dt, symbol, rhs)
    # divergence cleanup: cheap, stops projection drift from accumulating
    new = leray_project_coeffs(lat, dealias_coeffs(lat, new))
    new[(slice(None),) + (0,) * lat.n] = 0.0
    t_new = state.t + dt
    if not np.all(np.isfinite(new)):
        raise Diverged(t_new, state.step_count + 1)
    return SolverState(
        u=SpectralVectorField(lat, new, t_new),
        t=t_new,
        step_count=state.step_count + 1,
    )


def cfl_dt(u: SpectralVectorField, cfg: SolverConfig) -> float:
    """Advective CFL step: cfl_safety * dx / max_i ||u_i||_inf, capped at dt_max.

    Dissipation imposes no restriction (the integrating factor is exact).
    """
    vmax = float(np.max(np.abs(coeffs_to_grid(u.coeffs, u.lattice.n))))
    if vmax == 0.0 or not np.isfinite(vmax):
        return cfg.dt_max
    return min(cfg.dt_max, cfg.cfl_safety * u.lattice.dx / vmax)


def advance(state: SolverState, cfg: SolverConfig, sink=None) -> SolverState:
    """Step from state.t to cfg.t_end, emitting diagnostics records to sink.

    Records are emitted at the initial state, every cfg.diag_stride steps and
    at t_end.  A divergence emits a final record flagged `diverged` and stops
    cleanly instead of raising.
    """
    from .diagnostics import compute_diagnostics  # cycle: diagnostics reads cfg

    lat = state.u.lattice
    symbol = (np.zeros(lat.shape) if cfg.inviscid
              else dissipation_symbol(lat, cfg.alpha, cfg.nu))

    def emit(st, dt_last):
        if sink is not None:
            sink(compute_diagnostics(st.u, cfg, step=st.step_count, dt=dt_last))

    emit(state, 0.0)
    last_emitted = state.step_count
    dt = 0.0
    eps = 1e-14 * max(1.0, cfg.t_end)
    while state.t < cfg.t_end - eps:
        dt = min(cfl_dt(state.u, cfg), cfg.t_end - state.t)
        try:
            state = step(state, dt, cfg, symbol=symbol)
        except Diverged:
            t_bad = state.t + dt
            state = SolverState(
                u=state.u.with_coeffs(state.u.coeffs * np.nan, time=t_bad),
                t=t_bad,
                step_count=state.step_count + 1,
            )
            emit(state, dt)
            return state
        if abs(state.t - cfg.t_end) <= eps:
            # snap the time label; the step sizes already sum to t_end
            state = SolverState(
                u=state.u.with_coeffs(state.u.coeffs, time=cfg.t_end),
                t=cfg.t_end, step_count=state.step_count,
            )
        if state.step_count % cfg.diag_stride == 0:
            emit(state, dt)
            last_emitted = state.step_count
    if state.step_count != last_emitted:
        emit(state, dt)
    return state
