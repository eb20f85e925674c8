"""Time propagation of free and controlled qubit dynamics.

Two independent routes are provided: `propagate_bloch` integrates the affine
coherence-vector ODE dv/dt = (m0 + M(t)) v + k, while `propagate_density`
integrates the density-matrix master equation and converts the samples to
Bloch coordinates. The density route serves as the oracle for the Bloch route.

hbar = 1 throughout; rates and frequencies share inverse-time units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp

from .bloch import (
    PAULIS,
    BlochChannel,
    CoherenceVector,
    DensityMatrix,
    GKSMatrix,
    lindblad_apply_raw,
)
from .errors import DomainError, ValidationError
from .waveform import ControlWaveform

FIXED_RK4 = "fixed-RK4"
ADAPTIVE_RKF45 = "adaptive-RKF45"


def _commutator_superop(h: np.ndarray) -> np.ndarray:
    """4x4 superoperator of -i[h, .] on the row-major vectorization."""
    eye = np.eye(2)
    return -1j * (np.kron(h, eye) - np.kron(eye, h.T))


# Per-field control generators: H = (1/2)(w0 sigma_z + w1 sigma_x - w2 sigma_y).
_COMM_Z = _commutator_superop(0.5 * np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex))
_COMM_X = _commutator_superop(0.5 * np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex))
_COMM_MY = _commutator_superop(-0.5 * np.array([[0.0, -1.0j], [1.0j, 0.0]]))


@dataclass(frozen=True)
class IntegratorConfig:
    """Integration method and tolerances.

    The adaptive method delegates to scipy's embedded Runge-Kutta 4(5) pair
    with dense output; the fixed-step classical RK4 exists mainly for
    convergence-order checks.
    """

    method: str = ADAPTIVE_RKF45
    dt: float = 0.01
    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float = math.inf

    def __post_init__(self):
        if self.method not in (FIXED_RK4, ADAPTIVE_RKF45):
            raise ValidationError(f"unknown integrator method {self.method!r}")
        if not self.dt > 0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if not (0 < self.rtol < 1 and 0 < self.atol < 1):
            raise ValidationError("rtol and atol must lie in (0, 1)")


@dataclass(frozen=True)
class Termination:
    """Why a trajectory ended: horizon, breakdown(t_b), clipped(t) or invalid(t)."""

    kind: str
    time: float | None = None

    def label(self) -> str:
        if self.kind == "horizon":
            return "horizon"
        if self.kind == "breakdown":
            return f"breakdown:t_b={self.time:.17g}"
        if self.kind == "clipped":
            return f"clipped:t={self.time:.17g}"
        return f"invalid:t={self.time:.17g}"


@dataclass(frozen=True)
class Trajectory:
    """Time series of the state, its derived scalars, and the applied fields."""

    t: np.ndarray          # (n,)
    v: np.ndarray          # (n, 3)
    p: np.ndarray          # (n,)
    c: np.ndarray          # (n,)
    omega: np.ndarray      # (n, 3) columns omega0, omega1, omega2
    termination: Termination
    singularity: object = None  # SingularityReport, attached by tracking code

    def __post_init__(self):
        if len(self.t) == 0:
            raise ValidationError("trajectory must contain at least one sample")
        if np.any(np.diff(self.t) <= 0):
            raise ValidationError("trajectory times must be strictly increasing")

    def state_at(self, i: int) -> CoherenceVector:
        return CoherenceVector.from_array(self.v[i])

    def with_termination(self, termination: Termination) -> "Trajectory":
        return replace(self, termination=termination)

    def with_singularity(self, report) -> "Trajectory":
        return replace(self, singularity=report)


def _derived_columns(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c = v[:, 0] ** 2 + v[:, 1] ** 2
    p = c + v[:, 2] ** 2
    return p, c


def _segment_edges(t0: float, t1: float, breakpoints) -> np.ndarray:
    interior = [b for b in breakpoints if t0 < b < t1]
    return np.array([t0, *interior, t1])


def _rk4_segment(rhs, t0, t1, y0, dt):
    n = max(1, int(math.ceil((t1 - t0) / dt - 1e-12)))
    h = (t1 - t0) / n
    t, y = t0, y0
    for _ in range(n):
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return y


def _integrate(rhs, y0, grid, cfg: IntegratorConfig, breakpoints=()):
    """Integrate on the caller's grid, splitting at field discontinuities.

    Returns (ys, n_ok): samples of shape (len(grid), dim) and the number of
    grid points successfully reached (the rest are left as NaN if the solver
    fails mid-way).
    """
    grid = np.asarray(grid, dtype=float)
    ys = np.full((len(grid), len(y0)), np.nan, dtype=np.asarray(y0).dtype)
    ys[0] = y0
    y = np.asarray(y0)
    n_ok = 1
    if len(grid) == 1:
        return ys, n_ok
    if cfg.method == FIXED_RK4:
        for i in range(len(grid) - 1):
            edges = _segment_edges(grid[i], grid[i + 1], breakpoints)
            for a, b in zip(edges[:-1], edges[1:]):
                y = _rk4_segment(rhs, a, b, y, cfg.dt)
            ys[i + 1] = y
            n_ok += 1
        return ys, n_ok
    # Adaptive: one solver run per smooth waveform segment, sampling the
    # output grid through t_eval so internal steps can span grid intervals.
    edges = _segment_edges(grid[0], grid[-1], breakpoints)
    for a, b in zip(edges[:-1], edges[1:]):
        sel = np.nonzero((grid > a) & (grid <= b))[0]
        targets = grid[sel]
        if len(targets) == 0 or targets[-1] != b:
            targets = np.append(targets, b)
        sol = solve_ivp(rhs, (a, b), y, method="RK45", t_eval=targets,
                        rtol=cfg.rtol, atol=cfg.atol, max_step=cfg.max_step)
        reached = min(sol.y.shape[1], len(sel))
        if reached:
            ys[sel[:reached]] = sol.y[:, :reached].T
            n_ok = int(sel[reached - 1]) + 1
        if not sol.success:
            return ys, n_ok
        y = sol.y[:, -1]
    return ys, n_ok


def _output_grid(t_max: float, w: ControlWaveform, n_samples: int) -> tuple[np.ndarray, bool]:
    """Uniform output grid on [0, t_max], truncated below the waveform domain end."""
    if not t_max > 0:
        raise DomainError(f"t_max must be positive, got {t_max}")
    grid = np.linspace(0.0, t_max, n_samples)
    if w.t_end is not None and w.t_end <= t_max:
        grid = grid[grid < w.t_end]
        if len(grid) == 0:
            grid = np.array([0.0])
        return grid, True
    return grid, False


def _fields_on_grid(w: ControlWaveform, grid: np.ndarray) -> np.ndarray:
    return np.array([w(t) for t in grid])


def propagate_bloch(ch: BlochChannel, w: ControlWaveform, v0: CoherenceVector,
                    t_max: float, cfg: IntegratorConfig | None = None,
                    n_samples: int = 501) -> Trajectory:
    """Integrate dv/dt = (m0 + M(t)) v + k on a uniform output grid.

    A waveform with a declared domain end below t_max yields a trajectory
    terminating with `breakdown` at that end. A state leaving the Bloch ball
    beyond 1 + 10*rtol terminates the trajectory with `invalid` metadata
    rather than raising, so parameter sweeps can record failures.
    """
    cfg = cfg or IntegratorConfig()
    grid, ended_early = _output_grid(t_max, w, n_samples)
    m0, k = ch.m0, ch.k

    def rhs(t, v):
        # M(t) v written out as the cross product with (omega1, -omega2, omega0)
        # to avoid building the control matrix at every evaluation.
        w0, w1, w2 = w(t)
        dv = m0 @ v + k
        dv[0] += -w0 * v[1] - w2 * v[2]
        dv[1] += w0 * v[0] - w1 * v[2]
        dv[2] += w2 * v[0] + w1 * v[1]
        return dv

    ys, n_ok = _integrate(rhs, v0.as_array(), grid, cfg, w.breakpoints)
    norm_cap = 1.0 + 10.0 * cfg.rtol
    termination = None
    for i in range(n_ok):
        if not np.all(np.isfinite(ys[i])) or float(ys[i] @ ys[i]) > norm_cap**2:
            termination = Termination("invalid", float(grid[i]))
            n_ok = max(1, i)
            break
    if termination is None and n_ok < len(grid):
        termination = Termination("invalid", float(grid[n_ok]))
    if termination is None:
        if ended_early:
            termination = Termination("breakdown", float(w.t_end))
        else:
            termination = Termination("horizon")
    grid, ys = grid[:n_ok], ys[:n_ok]
    p, c = _derived_columns(ys)
    return Trajectory(grid, ys, p, c, _fields_on_grid(w, grid), termination)


def lindblad_apply(a: GKSMatrix, rho: DensityMatrix) -> np.ndarray:
    """Dissipative part L(rho) of the master equation; traceless and Hermitian."""
    return lindblad_apply_raw(a.matrix, rho.matrix)


def propagate_density(a: GKSMatrix, w: ControlWaveform, rho0: DensityMatrix,
                      t_max: float, cfg: IntegratorConfig | None = None,
                      n_samples: int = 501) -> Trajectory:
    """Integrate drho/dt = -i [H(t), rho] + L(rho), reported in Bloch coordinates.

    Independent oracle for `propagate_bloch`: the right-hand side is built
    from 2x2 matrix algebra only and never touches the affine (m0, k) form.
    """
    cfg = cfg or IntegratorConfig()
    grid, ended_early = _output_grid(t_max, w, n_samples)
    # Precompute the dissipator as a 4x4 superoperator on the row-major
    # vectorization: vec(F_i x F_j) = (F_i kron F_j^t) vec(x).
    eye = np.eye(2)
    dissipator = np.zeros((4, 4), dtype=complex)
    for i, fi in enumerate(PAULIS):
        for j, fj in enumerate(PAULIS):
            aij = a.matrix[i, j]
            if aij == 0:
                continue
            fjfi = fj @ fi
            dissipator += aij * (np.kron(fi, fj.T)
                                 - 0.5 * np.kron(fjfi, eye)
                                 - 0.5 * np.kron(eye, fjfi.T))

    def rhs(t, y):
        w0, w1, w2 = w(t)
        gen = dissipator + w0 * _COMM_Z + w1 * _COMM_X + w2 * _COMM_MY
        return gen @ y

    y0 = rho0.matrix.ravel().astype(complex)
    ys, n_ok = _integrate(rhs, y0, grid, cfg, w.breakpoints)
    vs = np.full((len(grid), 3), np.nan)
    for i in range(n_ok):
        rho = ys[i].reshape(2, 2)
        vs[i] = [np.trace(rho @ s).real for s in PAULIS]
    termination = None
    norm_cap = 1.0 + 10.0 * cfg.rtol
    for i in range(n_ok):
        if not np.all(np.isfinite(vs[i])) or float(vs[i] @ vs[i]) > norm_cap**2:
            termination = Termination("invalid", float(grid[i]))
            n_ok = max(1, i)
            break
    if termination is None and n_ok < len(grid):
        termination = Termination("invalid", float(grid[n_ok]))
    if termination is None:
        termination = (Termination("breakdown", float(w.t_end)) if ended_early
                       else Termination("horizon"))
    grid, vs = grid[:n_ok], vs[:n_ok]
    p, c = _derived_columns(vs)
    return Trajectory(grid, vs, p, c, _fields_on_grid(w, grid), termination)


def free_dephasing_analytic(gamma: float, v0: CoherenceVector, t: float) -> CoherenceVector:
    """Closed-form free pure-dephasing evolution of a Bloch vector."""
    if gamma < 0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    decay = math.exp(-gamma * t)
    return CoherenceVector(decay * v0.vx, decay * v0.vy, v0.vz)


def phase_flip_probability(gamma: float, t: float) -> float:
    """Kraus phase-flip probability (1 - exp(-gamma t)) / 2."""
    if gamma < 0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    return (1.0 - math.exp(-gamma * t)) / 2.0


def purity_rate(ch: BlochChannel, v: CoherenceVector) -> float:
    """Instantaneous dp/dt = 2 v^t (m0 v + k).

    Control-field independent by construction: the antisymmetric control
    matrix contributes v^t M(t) v = 0.
    """
    arr = v.as_array()
    return float(2.0 * arr @ (ch.m0 @ arr + ch.k))


# --- trajectory CSV serialization -------------------------------------------

CSV_HEADER = "t,vx,vy,vz,purity,coherence,omega0,omega1,omega2"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """Write the trajectory in the documented CSV format (17 significant digits)."""
    lines = [CSV_HEADER]
    for i in range(len(traj.t)):
        row = [traj.t[i], *traj.v[i], traj.p[i], traj.c[i], *traj.omega[i]]
        lines.append(",".join(_fmt(float(x)) for x in row))
    lines.append(f"# termination={traj.termination.label()}")
    if traj.singularity is not None:
        lines.append(traj.singularity.comment_line())
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_trajectory_csv(path) -> Trajectory:
    """Read a trajectory CSV written by write_trajectory_csv."""
    with open(path) as f:
        lines = [ln.rstrip("\n") for ln in f if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValidationError(f"{path}: missing or wrong header")
    rows, termination = [], Termination("horizon")
    for i, ln in enumerate(lines[1:], start=2):
        if ln.startswith("# termination="):
            spec = ln.split("=", 1)[1]
            kind = spec.split(":", 1)[0]
            time = float(spec.split("=")[-1]) if ":" in spec else None
            termination = Termination(kind, time)
            continue
        if ln.startswith("#"):
            continue
        parts = ln.split(",")
        if len(parts) != 9:
            raise ValidationError(f"{path}: row {i}: expected 9 columns, got {len(parts)}")
        try:
            rows.append([float(x) for x in parts])
        except ValueError:
            raise ValidationError(f"{path}: row {i}: non-numeric value") from None
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    data = np.array(rows)
    return Trajectory(data[:, 0], data[:, 1:4], data[:, 4], data[:, 5],
                      data[:, 6:9], termination)
