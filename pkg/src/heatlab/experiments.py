"""Config-driven experiment runner.

run_experiment takes a validated ExperimentConfig, assembles the operator,
builds the initial data, integrates, judges the run and writes three plain
text artifacts into the output directory:

  trajectory.csv   one row per recorded sample
  summary.txt      key = value facts about the run
  constants.txt    variational constants plus a config echo

All floats are written with repr so a rerun of the same config and seed
produces byte-identical files.  sweep() repeats the run over one config key
and aggregates per-run outcomes into sweep.csv, capturing per-row failures
instead of aborting the axis.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .config import ConfigError, ExperimentConfig
from .diagnostics import concavity, coercivity_check, invariance_check, verdict
from .evolution import (
    CSV_HEADER,
    IntegratorConfig,
    Trajectory,
    energy_identity_residual,
    integrate,
    mass_identity_residual,
    trajectory_rows,
)
from .grids import DomainSpec, Field, Grid, build_grid, field_from_function, lp_norm, zero_field
from .operators import (
    OperatorSpec,
    PotentialSpec,
    SpectralOperator,
    ZERO_POTENTIAL,
    assemble,
)
from .variational import (
    ConvergenceError,
    EquationMode,
    VariationalConstants,
    classify,
    energy,
    ground_state,
    mountain_pass_level,
)


def build_domain(cfg: ExperimentConfig) -> DomainSpec:
    kind = {"interval": "interval", "box": "box", "halfline": "halfline_truncated"}[cfg.domain_kind]
    return DomainSpec(kind=kind, lower=cfg.lower, upper=cfg.upper)


def build_operator(cfg: ExperimentConfig) -> SpectralOperator:
    domain = build_domain(cfg)
    grid = build_grid(domain, cfg.n)
    if cfg.potential_kind == "zero":
        potential = ZERO_POTENTIAL
    elif cfg.potential_kind == "inverse_power":
        potential = PotentialSpec(
            kind="inverse_power",
            alpha=cfg.potential_alpha,
            coupling=cfg.potential_coupling,
            sign=cfg.potential_sign,
        )
    else:  # gaussian_well
        depth, width = cfg.potential_depth, cfg.potential_width

        def well(x: np.ndarray) -> np.ndarray:
            r_sq = np.sum(x * x, axis=-1)
            return -depth * np.exp(-r_sq / (width * width))

        potential = PotentialSpec(kind="tabulated_bounded", fn=well, sign=-1)
    spec = OperatorSpec(kind=cfg.operator_kind, potential=potential, sigma=cfg.sigma)
    return assemble(spec, grid)


def build_mode(cfg: ExperimentConfig) -> EquationMode:
    if cfg.regime == "critical":
        return EquationMode.critical(cfg.dim, nonlinearity=cfg.nonlinearity)
    return EquationMode.subcritical(cfg.p, cfg.dim, nonlinearity=cfg.nonlinearity)


def make_initial_data(cfg: ExperimentConfig, op: SpectralOperator, mode: EquationMode) -> Field:
    """Build the configured initial state on the operator's grid.

    gaussian centers snap to the nearest grid node so the profile peak sits
    on a sample point regardless of resolution.
    """
    grid = op.grid
    if cfg.recipe == "zero":
        return zero_field(grid)
    if cfg.recipe == "gaussian":
        center = np.array(
            [grid.axis_nodes(ax)[np.argmin(np.abs(grid.axis_nodes(ax) - cfg.center[ax]))]
             for ax in range(grid.dim)]
        )
        extent = min(u - l for l, u in zip(grid.domain.lower, grid.domain.upper))
        width = cfg.width if cfg.width is not None else extent / 8.0
        amp = cfg.amplitude

        def profile(x: np.ndarray) -> np.ndarray:
            r_sq = np.sum((x - center) ** 2, axis=-1)
            return amp * np.exp(-r_sq / (2.0 * width * width))

        return field_from_function(grid, profile)
    if cfg.recipe == "scaled_ground_state":
        phi = ground_state(op, mode)
        return cfg.lam * phi
    # eigenmode
    if cfg.mode_index >= op.n_modes:
        raise ConfigError("initial.k", f"operator has only {op.n_modes} modes")
    return cfg.amplitude * op.eigenvector(cfg.mode_index)


def default_cutoff_radius(grid: Grid) -> float:
    """Half the truncation radius: half the smallest distance from the
    domain center to its boundary."""
    return 0.5 * min((u - l) / 2.0 for l, u in zip(grid.domain.lower, grid.domain.upper))


@dataclass
class ExperimentResult:
    cfg: ExperimentConfig
    op: SpectralOperator
    mode: EquationMode
    trajectory: Trajectory
    consts: Optional[VariationalConstants]
    summary: dict


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _integrator_config(cfg: ExperimentConfig, radii: Tuple[float, ...]) -> IntegratorConfig:
    return IntegratorConfig(
        t_max=cfg.t_max,
        dt_init=cfg.dt_init,
        dt_min=cfg.dt_min,
        dt_max=cfg.dt_max,
        rel_tol=cfg.rel_tol,
        blowup_sup_cap=cfg.sup_cap,
        blowup_energy_cap=cfg.energy_cap,
        scheme=cfg.scheme,
        sample_interval=cfg.sample_interval,
        cutoff_radii=radii,
    )


def run_experiment(
    cfg: ExperimentConfig,
    out_dir: str,
    seed: Optional[int] = None,
    compute_constants: bool = True,
) -> ExperimentResult:
    """Run one configured experiment and write its artifacts into out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    seed_val = cfg.seed if seed is None else int(seed)
    op = build_operator(cfg)
    mode = build_mode(cfg)
    u0 = make_initial_data(cfg, op, mode)

    consts: Optional[VariationalConstants] = None
    consts_note = "not computed"
    if compute_constants and mode.sign > 0:
        try:
            consts = mountain_pass_level(op, mode)
            consts_note = "ok"
        except (ConvergenceError, ValueError) as exc:
            consts_note = f"failed: {exc}"
    elif mode.sign < 0:
        consts_note = "not applicable (absorbing nonlinearity)"

    radii = cfg.cutoff_radii
    diag_R = cfg.diag_R
    if mode.regime == "critical":
        if diag_R is None:
            diag_R = default_cutoff_radius(op.grid)
        if diag_R not in radii:
            radii = radii + (diag_R,)

    traj = integrate(u0, op, mode, _integrator_config(cfg, radii))
    v = verdict(traj, consts)

    summary: dict = {}
    summary["seed"] = seed_val
    summary["verdict"] = v.kind
    if v.rate_stat is not None:
        summary["rate_stat"] = v.rate_stat
    if v.T_est is not None:
        summary["T_est"] = v.T_est
    if v.reason is not None:
        summary["reason"] = v.reason
    summary["end_reason"] = traj.end_reason
    summary["t_final"] = traj.t_final
    if traj.T_detect is not None:
        summary["T_detect"] = traj.T_detect
    summary["accepted_steps"] = traj.accepted
    summary["rejected_steps"] = traj.rejected
    summary["samples"] = len(traj.samples)

    first, last = traj.samples[0], traj.samples[-1]
    summary["mass_initial"] = first.mass
    summary["mass_final"] = last.mass
    summary["energy_initial"] = first.energy
    summary["energy_final"] = last.energy
    summary["energy_norm_initial"] = first.energy_norm
    summary["energy_norm_final"] = last.energy_norm
    summary["sup_final"] = last.sup
    summary["dissipation_cum"] = last.dissipation_cum
    if mode.regime == "critical":
        summary["s_norm_cum"] = last.s_norm_cum

    summary["energy_identity_residual"] = energy_identity_residual(traj)
    if len(traj.samples) >= 3:
        summary["mass_identity_residual"] = mass_identity_residual(traj)

    summary["constants_status"] = consts_note
    if consts is not None:
        summary["classification_initial"] = classify(u0, op, mode, consts).membership
        if lp_norm(u0, 2.0) > 0:
            coer = coercivity_check(traj, consts)
            summary["delta_hat"] = coer.delta_hat
            summary["below_y_C"] = coer.below_y_C
            summary["invariance_ok"] = invariance_check(traj, consts)

    if v.kind == "BlowsUp" and len(traj.samples) >= 5 and mode.sign > 0:
        mass0 = first.mass
        if cfg.diag_A is not None:
            a_val = cfg.diag_A
        else:
            e0 = first.energy
            if consts is not None and e0 < consts.level:
                a_val = 10.0 * max(1.0, mass0 / (consts.level - e0))
            else:
                a_val = 10.0 * max(1.0, mass0)
        try:
            rep = concavity(traj, A=a_val, alpha=cfg.diag_alpha, R=diag_R)
            summary["concavity_A"] = rep.A
            summary["concavity_alpha"] = rep.alpha
            if rep.R is not None:
                summary["concavity_R"] = rep.R
            summary["concavity_margin"] = rep.margin
            summary["concavity_t_tilde"] = rep.t_tilde
        except ValueError as exc:
            summary["concavity_error"] = str(exc)

    with open(os.path.join(out_dir, "trajectory.csv"), "w", encoding="utf-8") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in trajectory_rows(traj):
            fh.write(row + "\n")

    with open(os.path.join(out_dir, "summary.txt"), "w", encoding="utf-8") as fh:
        for key, value in summary.items():
            fh.write(f"{key} = {_fmt(value)}\n")

    with open(os.path.join(out_dir, "constants.txt"), "w", encoding="utf-8") as fh:
        if consts is not None:
            fh.write(f"S = {_fmt(consts.S)}\n")
            fh.write(f"level = {_fmt(consts.level)}\n")
            fh.write(f"y_C = {_fmt(consts.y_C)}\n")
            fh.write(f"p = {_fmt(consts.p)}\n")
            fh.write(f"regime = {consts.regime}\n")
            fh.write(f"method = {consts.method}\n")
        else:
            fh.write(f"# constants: {consts_note}\n")
        fh.write("\n# --- config echo ---\n")
        fh.write(cfg.echo_text())

    return ExperimentResult(cfg=cfg, op=op, mode=mode, trajectory=traj, consts=consts, summary=summary)


SWEEP_HEADER = "index,value,verdict,T_detect,t_final,rate_stat,concavity_margin,error"


def _sweep_worker(args) -> dict:
    raw, key, value, run_dir, index, seed = args
    row = {
        "index": index,
        "value": value,
        "verdict": "",
        "T_detect": "",
        "t_final": "",
        "rate_stat": "",
        "concavity_margin": "",
        "error": "",
    }
    try:
        sub = ExperimentConfig.from_mapping(raw).with_override(key, value)
        result = run_experiment(sub, run_dir, seed=seed)
        row["verdict"] = result.summary["verdict"]
        row["T_detect"] = result.summary.get("T_detect", "")
        row["t_final"] = result.summary["t_final"]
        row["rate_stat"] = result.summary.get("rate_stat", "")
        row["concavity_margin"] = result.summary.get("concavity_margin", "")
    except Exception as exc:  # per-row capture keeps the axis alive
        row["error"] = f"{type(exc).__name__}: {exc}".replace(",", ";").replace("\n", " ")
    return row


def sweep(
    cfg: ExperimentConfig,
    out_dir: str,
    threads: int = 1,
    seed: Optional[int] = None,
) -> list:
    """Run the configured sweep axis, one run per value, aggregate sweep.csv."""
    if cfg.sweep_key is None:
        raise ConfigError("sweep.key", "sweep requires sweep.key and sweep.values")
    os.makedirs(out_dir, exist_ok=True)
    seed_val = cfg.seed if seed is None else int(seed)
    jobs = [
        (cfg.raw, cfg.sweep_key, value, os.path.join(out_dir, f"run_{i:03d}"), i, seed_val)
        for i, value in enumerate(cfg.sweep_values)
    ]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_sweep_worker, jobs))
    else:
        rows = [_sweep_worker(job) for job in jobs]
    rows.sort(key=lambda r: r["index"])
    with open(os.path.join(out_dir, "sweep.csv"), "w", encoding="utf-8") as fh:
        fh.write(SWEEP_HEADER + "\n")
        for row in rows:
            cells = [str(row[name]) if not isinstance(row[name], float) else repr(row[name])
                     for name in SWEEP_HEADER.split(",")]
            fh.write(",".join(cells) + "\n")
    return rows
