"""Orchestration of configured runs: trajectories, sweeps, field tables, transforms."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .bloch import gks_to_channel
from .config import ScenarioConfig, SweepSpec, complex_matrix_to_json
from .dynamics import Trajectory, propagate_bloch, write_trajectory_csv, _fmt
from .equivalence import (
    Unitary2,
    is_dephasing_class,
    su2_to_so3,
    transform_channel,
    transform_state,
)
from .errors import ConfigError, DomainError
from .svgplot import FIELDS_HEADER, read_csv_columns
from .tracking import (
    breakdown_time,
    classify_singularity,
    simulate_tracked,
    tracked_waveform,
)
from .waveform import ControlWaveform


def _resolve(path: str, out_dir) -> Path:
    p = Path(path)
    return p if p.is_absolute() else Path(out_dir) / p


def load_fixed_waveform(path) -> ControlWaveform:
    """Load a sampled waveform from a fields CSV (t,omega0,omega1,omega2)."""
    header, rows = read_csv_columns(path)
    if header != FIELDS_HEADER:
        raise ConfigError(f"{path}: expected header {','.join(FIELDS_HEADER)}")
    if any(cell is None for row in rows for cell in row):
        raise ConfigError(f"{path}: waveform table must not contain empty cells")
    data = np.array(rows, dtype=float)
    return ControlWaveform.sampled(data[:, 0], data[:, 1:4])


def run_scenario(cfg: ScenarioConfig, out_dir=".") -> tuple[Trajectory, Path]:
    """Execute a scenario and write its trajectory CSV; returns both."""
    ch = cfg.channel.to_bloch_channel()
    v0 = cfg.initial_state.v
    control = cfg.control
    if control.mode == "track":
        traj = simulate_tracked(ch, v0, control.omega0, cfg.t_max,
                                omega_max=control.omega_max,
                                cfg=cfg.integrator, n_samples=cfg.samples)
        traj = traj.with_singularity(classify_singularity(traj, ch))
    else:
        if control.mode == "free":
            w = ControlWaveform.zero()
        else:
            w = load_fixed_waveform(control.waveform_path)
        traj = propagate_bloch(ch, w, v0, cfg.t_max, cfg.integrator, cfg.samples)
    out_path = _resolve(cfg.output, out_dir)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(traj, out_path)
    return traj, out_path


def sweep_breakdown(spec: SweepSpec, out_dir=".") -> Path:
    """Write the breakdown-time grid CSV `c,p,t_b`; infeasible cells are empty."""
    lines = ["c,p,t_b"]
    for c in spec.c_grid.values():
        for p in spec.p_grid.values():
            if c > p:
                lines.append(f"{_fmt(c)},{_fmt(p)},")
                continue
            if spec.gamma == 0.0 or c == 0.0:
                t_b = math.inf
            else:
                t_b = (p - c) / (2.0 * spec.gamma * c)
            lines.append(f"{_fmt(c)},{_fmt(p)},{_fmt(t_b)}")
    out_path = _resolve(spec.output, out_dir)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w") as f:
        f.write("\n".join(lines) + "\n")
    return out_path


def emit_fields(cfg: ScenarioConfig, out_dir=".") -> Path:
    """Write the synthesized tracking fields as a fields-only CSV."""
    if cfg.control.mode != "track":
        raise ConfigError("fields emission requires a track-mode config")
    ch = cfg.channel.to_bloch_channel()
    ok, _, gamma = is_dephasing_class(ch)
    if not ok or not np.allclose(ch.m0, np.diag([-gamma, -gamma, 0.0]), atol=1e-12):
        raise ConfigError("fields emission requires a pure-dephasing channel")
    v0 = cfg.initial_state.v
    if v0.vz == 0.0:
        raise DomainError("v_z(0) = 0: no control is possible")
    w = tracked_waveform(v0, gamma, cfg.control.omega0, cfg.control.omega_max)
    t_hi = cfg.t_max
    if w.t_end is not None:
        t_hi = min(t_hi, w.t_end)
    grid = np.linspace(0.0, cfg.t_max, cfg.samples)
    grid = grid[grid < t_hi] if w.t_end is not None else grid
    lines = [",".join(FIELDS_HEADER)]
    for t in grid:
        w0, w1, w2 = w(float(t))
        lines.append(f"{_fmt(float(t))},{_fmt(w0)},{_fmt(w1)},{_fmt(w2)}")
    out_path = _resolve(cfg.output, out_dir)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w") as f:
        f.write("\n".join(lines) + "\n")
    return out_path


def equivalence_report(cfg: ScenarioConfig, u: Unitary2) -> dict:
    """Transform the configured channel and state by a unitary; report both pictures."""
    if cfg.channel.kind == "gks":
        a = cfg.channel.gks
    else:
        # Promote the dephasing rate to its GKS matrix diag(0, 0, gamma/2).
        from .bloch import GKSMatrix
        a = GKSMatrix(np.diag([0.0, 0.0, cfg.channel.gamma / 2.0]).astype(complex))
    r = su2_to_so3(u)
    a_new = transform_channel(a, u)
    _, ch = gks_to_channel(a)
    _, ch_new = gks_to_channel(a_new)
    v0 = cfg.initial_state.v
    v_new = transform_state(v0, r)
    member, _, gamma = is_dephasing_class(ch)
    member_new, _, gamma_new = is_dephasing_class(ch_new)
    report = {
        "rotation": [[float(x) for x in row] for row in r.matrix],
        "gks_before": complex_matrix_to_json(a.matrix),
        "gks_after": complex_matrix_to_json(a_new.matrix),
        "m0_after": [[float(x) for x in row] for row in ch_new.m0],
        "k_after": [float(x) for x in ch_new.k],
        "state_before": [v0.vx, v0.vy, v0.vz],
        "state_after": [v_new.vx, v_new.vy, v_new.vz],
        "dephasing_class_before": {"member": member, "gamma": gamma},
        "dephasing_class_after": {"member": member_new, "gamma": gamma_new},
    }
    if member and v0.vz != 0.0:
        report["breakdown_time_before"] = breakdown_time(v0, gamma)
    if member_new and v_new.vz != 0.0:
        report["breakdown_time_after"] = breakdown_time(v_new, gamma_new)
    return report
