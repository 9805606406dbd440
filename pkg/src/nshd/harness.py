"""Experiment orchestration: single runs, alpha sweeps, scaling checks.

Each run writes three artifacts into its output directory:
    diagnostics.csv        fixed-schema diagnostics stream
    final_checkpoint.nshd  binary spectral checkpoint of the final state
    run_summary.json       config snapshot, wall times, terminal status

Exit-code taxonomy (used by the CLI): 0 completed, 1 invalid config,
2 diverged, 3 resolution loss, 4 unwritable output.
"""

from __future__ import annotations

import dataclasses
import datetime
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .checkpoint import write_checkpoint
from .config import ConfigError, RunConfig, load_config
from .diagnostics import csv_header, csv_row, energy
from .dynamics import SolverState, advance
from .initial_conditions import build_initial_field
from .scaling import (
    apply_discrete_rescale,
    lions_exponent,
    scaled_energy_ratio,
)

STATUS_COMPLETED = "completed"
STATUS_DIVERGED = "diverged"
STATUS_RESOLUTION_LOSS = "resolution_loss"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGED = 2
EXIT_RESOLUTION_LOSS = 3
EXIT_OUTPUT = 4

_STATUS_EXIT = {
    STATUS_COMPLETED: EXIT_OK,
    STATUS_DIVERGED: EXIT_DIVERGED,
    STATUS_RESOLUTION_LOSS: EXIT_RESOLUTION_LOSS,
}


class OutputError(OSError):
    """The output directory could not be created or written."""


@dataclass(frozen=True)
class RunRecord:
    config: dict
    started_at: str
    finished_at: str
    final_time: float
    final_step: int
    final_energy: float
    status: str
    csv_path: str
    checkpoint_path: str

    @property
    def exit_code(self) -> int:
        return _STATUS_EXIT[self.status]


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    status: str
    max_enstrophy: float
    max_m1: float
    resolution_loss_time: float | None
    energy_ratio: float
    is_lions_exponent: bool


@dataclass(frozen=True)
class SweepSummary:
    n: int
    alpha_lions: float
    alpha_list: tuple
    rows: tuple  # of SweepRow


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _prepare_out_dir(out_dir):
    try:
        os.makedirs(out_dir, exist_ok=True)
        probe = os.path.join(out_dir, ".write_probe")
        with open(probe, "w") as fh:
            fh.write("")
        os.remove(probe)
    except OSError as exc:
        raise OutputError(f"cannot write to output directory {out_dir}: {exc}") from exc


def run_config(config: RunConfig, out_dir) -> RunRecord:
    """Execute one configured run, writing all artifacts into out_dir."""
    _prepare_out_dir(out_dir)
    started = _now()
    cfg = config.solver
    lattice = cfg.make_lattice()
    u0 = build_initial_field(lattice, config.initial_condition)
    state = SolverState(u=u0, t=u0.time, step_count=0)

    csv_path = os.path.join(out_dir, "diagnostics.csv")
    records = []
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(csv_header(cfg) + "\n")

        def sink(record):
            records.append(record)
            fh.write(csv_row(record, cfg) + "\n")

        final = advance(state, cfg, sink)

    checkpoint_path = os.path.join(out_dir, "final_checkpoint.nshd")
    seed = config.initial_condition.seed if config.initial_condition.kind == "random_band" else 0
    write_checkpoint(checkpoint_path, final.u, cfg.alpha, cfg.nu, seed=seed)

    flags = records[-1].flags
    if flags.diverged:
        status = STATUS_DIVERGED
    elif flags.resolution_loss:
        status = STATUS_RESOLUTION_LOSS
    else:
        status = STATUS_COMPLETED

    record = RunRecord(
        config=config.to_dict(),
        started_at=started,
        finished_at=_now(),
        final_time=final.t,
        final_step=final.step_count,
        final_energy=records[-1].energy,
        status=status,
        csv_path=csv_path,
        checkpoint_path=checkpoint_path,
    )
    with open(os.path.join(out_dir, "run_summary.json"), "w", encoding="utf-8") as fh:
        json.dump(dataclasses.asdict(record), fh, indent=2)
        fh.write("\n")
    return record


def run_experiment(config_path, out_dir) -> RunRecord:
    return run_config(load_config(config_path), out_dir)


def _worker_count(n_tasks: int) -> int:
    env = os.environ.get("NSHD_THREADS")
    if env is not None:
        cap = int(env)
    else:
        cap = os.cpu_count() or 1
    return max(1, min(n_tasks, cap))


def sweep(config: RunConfig, alphas, out_dir) -> SweepSummary:
    """Run the same IC/config across a list of alphas; one row per alpha."""
    alphas = [float(a) for a in alphas]
    if len(set(alphas)) != len(alphas):
        raise ConfigError("alphas", "duplicate alpha values are not allowed")
    if not alphas:
        raise ConfigError("alphas", "need at least one alpha")
    alphas = sorted(alphas)
    _prepare_out_dir(out_dir)

    base_orders = set(config.solver.moment_orders)
    base_orders.add(1.0)  # sweep summary tracks max M_1

    def one(alpha: float):
        solver = dataclasses.replace(
            config.solver, alpha=alpha,
            moment_orders=tuple(sorted(base_orders)),
        )
        sub = RunConfig(solver=solver, initial_condition=config.initial_condition)
        sub_dir = os.path.join(out_dir, f"alpha_{alpha:g}")
        record = run_config(sub, sub_dir)
        return record, _read_row_metrics(record, sub)

    workers = _worker_count(len(alphas))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, alphas))
    else:
        results = [one(a) for a in alphas]

    a_lions = float(lions_exponent(config.solver.n))
    rows = []
    for alpha, (record, metrics) in zip(alphas, results):
        rows.append(SweepRow(
            alpha=alpha,
            status=record.status,
            max_enstrophy=metrics["max_enstrophy"],
            max_m1=metrics["max_m1"],
            resolution_loss_time=metrics["resolution_loss_time"],
            energy_ratio=metrics["energy_ratio"],
            is_lions_exponent=(alpha == a_lions),
        ))
    summary = SweepSummary(
        n=config.solver.n, alpha_lions=a_lions,
        alpha_list=tuple(alphas), rows=tuple(rows),
    )
    _write_sweep_files(summary, out_dir)
    return summary


def _read_row_metrics(record: RunRecord, config: RunConfig) -> dict:
    m1_cols = [f"M1_c{i + 1}" for i in range(config.solver.n)]
    max_enstrophy = -math.inf
    max_m1 = -math.inf
    loss_time = None
    e_first = e_last = None
    with open(record.csv_path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        col = {name: i for i, name in enumerate(header)}
        for line in fh:
            parts = line.rstrip("\n").split(",")
            t = float(parts[col["t"]])
            e = float(parts[col["energy"]])
            if e_first is None:
                e_first = e
            e_last = e
            max_enstrophy = max(max_enstrophy, float(parts[col["enstrophy"]]))
            max_m1 = max(max_m1, *(float(parts[col[c]]) for c in m1_cols))
            flags = parts[col["flags"]]
            if loss_time is None and "resolution_loss" in flags:
                loss_time = t
    return {
        "max_enstrophy": max_enstrophy,
        "max_m1": max_m1,
        "resolution_loss_time": loss_time,
        "energy_ratio": e_last / e_first if e_first else math.nan,
    }


def _write_sweep_files(summary: SweepSummary, out_dir) -> None:
    csv_path = os.path.join(out_dir, "sweep_summary.csv")
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("alpha,status,max_enstrophy,max_M1,resolution_loss_time,"
                 "energy_ratio,is_lions_exponent\n")
        for row in summary.rows:
            loss = "" if row.resolution_loss_time is None else repr(row.resolution_loss_time)
            fh.write(
                f"{row.alpha!r},{row.status},{row.max_enstrophy!r},"
                f"{row.max_m1!r},{loss},{row.energy_ratio!r},"
                f"{str(row.is_lions_exponent).lower()}\n"
            )
    with open(os.path.join(out_dir, "sweep_summary.json"), "w", encoding="utf-8") as fh:
        json.dump(dataclasses.asdict(summary), fh, indent=2)
        fh.write("\n")


@dataclass(frozen=True)
class ScaleCheckReport:
    q: int
    alpha: float
    n: int
    t_end: float
    commutation_discrepancy: float
    truncated_tail_fraction: float
    commutation_tolerance: float
    commutation_pass: bool
    energy_ratio: float
    energy_ratio_expected: float
    energy_ratio_error: float
    energy_ratio_tolerance: float
    energy_ratio_pass: bool

    @property
    def passed(self) -> bool:
        return self.commutation_pass and self.energy_ratio_pass


def scale_check(config: RunConfig, q: int,
                commutation_tol: float = 1e-6,
                energy_tol: float = 1e-12) -> ScaleCheckReport:
    """Solution-map commutation and energy-scaling checks for zoom factor q.

    Evolving for t_end and then zooming must agree with zooming first and
    evolving for t_end / q^(2*alpha).  The evolved field is truncated to the
    sub-ball |k_j| < N/(3q) before zooming (its image elsewhere is not
    resolved); the energy dropped is reported separately.
    """
    cfg = config.solver
    alpha = cfg.alpha
    lattice = cfg.make_lattice()
    u0 = build_initial_field(lattice, config.initial_condition)

    # run A: evolve, then zoom
    state_a = advance(SolverState(u=u0), cfg)
    # run B: zoom, then evolve for rescaled time with rescaled step cap
    u0_q = apply_discrete_rescale(u0, q, alpha)
    time_factor = float(q) ** (2.0 * float(alpha))
    cfg_b = dataclasses.replace(cfg, t_end=cfg.t_end / time_factor,
                                dt_max=cfg.dt_max / time_factor)
    state_b = advance(SolverState(u=u0_q), cfg_b)

    if q == 1:
        sub = state_a.u
        dropped = 0.0
    else:
        sub_kmax = int(np.ceil(lattice.N / 3.0 / q)) - 1
        mask = np.ones(lattice.shape, dtype=bool)
        for g in lattice.mode_grids:
            mask &= np.abs(g) <= sub_kmax
        truncated = state_a.u.coeffs * mask
        e_full = energy(state_a.u)
        sub = state_a.u.with_coeffs(truncated)
        dropped = 0.0 if e_full == 0 else max(0.0, 1.0 - energy(sub) / e_full)
    rescaled_a = apply_discrete_rescale(sub, q, alpha)

    diff = rescaled_a.coeffs - state_b.u.coeffs
    scale = np.sqrt(np.sum(np.abs(state_b.u.coeffs) ** 2))
    discrepancy = float(np.sqrt(np.sum(np.abs(diff) ** 2)) / scale) if scale else 0.0

    ratio = scaled_energy_ratio(u0, q, alpha, cfg.n)
    expected = float(q) ** (4.0 * float(alpha) - 2.0 - cfg.n)
    ratio_err = abs(ratio - expected) / expected

    return ScaleCheckReport(
        q=int(q), alpha=float(alpha), n=cfg.n, t_end=cfg.t_end,
        commutation_discrepancy=discrepancy,
        truncated_tail_fraction=dropped,
        commutation_tolerance=commutation_tol,
        commutation_pass=discrepancy <= commutation_tol,
        energy_ratio=ratio,
        energy_ratio_expected=expected,
        energy_ratio_error=ratio_err,
        energy_ratio_tolerance=energy_tol,
        energy_ratio_pass=ratio_err <= energy_tol,
    )
