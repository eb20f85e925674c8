"""Synthesis of the coherence-holding control fields and their singularities.

The controller keeps the in-plane components of the Bloch vector fixed at
their initial values (a linearization of the constant-coherence objective).
For pure dephasing this has a closed form: v_z(t) = s sqrt(v_z(0)^2 - 2 gamma c t)
with breakdown at t_b = v_z(0)^2 / (2 gamma c), where the synthesized fields
diverge like (t_b - t)^(-1/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bloch import (
    LAMBDA_0,
    LAMBDA_1,
    LAMBDA_2,
    BlochChannel,
    CoherenceVector,
    coherence,
    control_matrix,
)
from .dynamics import (
    IntegratorConfig,
    Termination,
    Trajectory,
    _derived_columns,
    _integrate,
    propagate_bloch,
)
from .errors import (
    DomainError,
    PastBreakdownError,
    ScheduleInfeasibleError,
    SingularPointError,
)
from .waveform import ControlWaveform

# Objective matrices: S1 = v^t O1 v = v_x^2, S2 = v^t O2 v = v_y^2.
# They commute with their paired generator: [O1, L1] = [O2, L2] = 0.
O_1 = np.diag([1, 0, 0]).astype(int)
O_2 = np.diag([0, 1, 0]).astype(int)

BREAKDOWN_GUARD = 1e-6   # closed-form synthesis refuses t >= t_b * (1 - guard)
EPS_DENOMINATOR = 1e-10
EPS_NUMERATOR = 1e-8
VZ_FLOOR = 1e-14


@dataclass(frozen=True)
class TrackingObjective:
    """Linearized targets S1 = v_x(0), S2 = v_y(0) held by the controller."""

    s1: float
    s2: float


@dataclass(frozen=True)
class SingularityReport:
    """Denominator/numerator diagnostics of the field formulas at a singular time."""

    classification: str        # none | trivial | nontrivial-a | nontrivial-b
    t: float = math.nan
    d1: float = math.nan
    d2: float = math.nan
    n1: float = math.nan
    n2: float = math.nan
    note: str = ""

    def comment_line(self) -> str:
        return (f"# singularity={self.classification} t={self.t:.17g} "
                f"D1={self.d1:.17g} D2={self.d2:.17g} "
                f"N1={self.n1:.17g} N2={self.n2:.17g}")


@dataclass(frozen=True)
class TrackingSolution:
    """Closed-form tracked solution for a pure-dephasing channel."""

    v0: CoherenceVector
    gamma: float
    omega0: float
    omega_max: float | None = None

    def __post_init__(self):
        if self.gamma < 0:
            raise DomainError(f"gamma must be >= 0, got {self.gamma}")
        if self.v0.vz == 0.0:
            raise DomainError(
                "v_z(0) = 0: coherence equals purity and no control is possible"
            )

    @property
    def sign(self) -> int:
        return 1 if self.v0.vz > 0 else -1

    @property
    def t_b(self) -> float:
        return breakdown_time(self.v0, self.gamma)

    def vz(self, t: float) -> float:
        return vz_tracked(self.v0, self.gamma, t)

    def fields(self, t: float) -> tuple[float, float]:
        return tracking_fields_dephasing(self.v0, self.gamma, self.omega0, t)


def breakdown_time(v0: CoherenceVector, gamma: float) -> float:
    """Time v_z(0)^2 / (2 gamma c) at which the tracked v_z reaches zero.

    Infinite when gamma = 0 or c = 0 (nothing to counteract); zero when the
    state starts on the equator (c > 0, v_z(0) = 0).
    """
    if gamma < 0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    c = coherence(v0)
    if gamma == 0.0 or c == 0.0:
        return math.inf
    return v0.vz**2 / (2.0 * gamma * c)


def vz_tracked(v0: CoherenceVector, gamma: float, t: float) -> float:
    """Tracked z-component s * sqrt(v_z(0)^2 - 2 gamma c t) on [0, t_b]."""
    if v0.vz == 0.0:
        raise DomainError("v_z(0) = 0: tracked solution undefined")
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    t_b = breakdown_time(v0, gamma)
    if t > t_b:
        raise PastBreakdownError(t, t_b)
    s = 1.0 if v0.vz > 0 else -1.0
    radicand = max(0.0, v0.vz**2 - 2.0 * gamma * coherence(v0) * t)
    return s * math.sqrt(radicand)


def tracking_rhs(ch: BlochChannel, v: CoherenceVector) -> float:
    """dv_z/dt under the constant-coherence constraint for a general channel.

    Equals F + G / v_z - gamma1 v_z with F and G built from the channel's
    axis-labeled parameters and the in-plane components of v.
    """
    if abs(v.vz) < VZ_FLOOR:
        raise SingularPointError(f"v_z = {v.vz} is a singular point of the tracking equation")
    p = ch.params()
    f = 2.0 * p.beta * v.vx + 2.0 * p.delta * v.vy - 2.0 * p.nu
    g = (-p.gamma3 * v.vx**2 - p.gamma2 * v.vy**2 + 2.0 * p.alpha * v.vx * v.vy
         - 2.0 * p.lam * v.vx - 2.0 * p.mu * v.vy)
    return f + g / v.vz - p.gamma1 * v.vz


def _dephasing_denominator(v0: CoherenceVector, gamma: float, t: float) -> float:
    t_b = breakdown_time(v0, gamma)
    if t >= t_b * (1.0 - BREAKDOWN_GUARD):
        raise PastBreakdownError(t, t_b)
    return math.sqrt(v0.vz**2 - 2.0 * gamma * coherence(v0) * t)


def tracking_fields_dephasing(v0: CoherenceVector, gamma: float, omega0: float,
                              t: float) -> tuple[float, float]:
    """Closed-form in-plane fields holding v_x, v_y constant under dephasing."""
    if v0.vz == 0.0:
        raise DomainError("v_z(0) = 0: no control is possible")
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    s = 1.0 if v0.vz > 0 else -1.0
    denom = _dephasing_denominator(v0, gamma, t)
    omega1 = s * (-gamma * v0.vy + omega0 * v0.vx) / denom
    omega2 = s * (-gamma * v0.vx - omega0 * v0.vy) / denom
    return omega1, omega2


def _general_numerators(ch: BlochChannel, v: np.ndarray, omega0: float,
                        s1dot: float, s2dot: float) -> tuple[float, float]:
    m0, k = ch.m0, ch.k
    n1 = (-s2dot
          - omega0 * float(v @ (LAMBDA_0 @ O_2 - O_2 @ LAMBDA_0) @ v)
          + float(v @ (m0 @ O_2 + O_2 @ m0) @ v)
          + float(k @ O_2 @ v) + float(v @ O_2 @ k))
    n2 = (-s1dot
          - omega0 * float(v @ (LAMBDA_0 @ O_1 - O_1 @ LAMBDA_0) @ v)
          + float(v @ (m0 @ O_1 + O_1 @ m0) @ v)
          + float(k @ O_1 @ v) + float(v @ O_1 @ k))
    return n1, n2


def _general_denominators(v: np.ndarray) -> tuple[float, float]:
    d1 = float(v @ (LAMBDA_1 @ O_2 - O_2 @ LAMBDA_1) @ v)   # = 2 v_y v_z
    d2 = float(v @ (LAMBDA_2 @ O_1 - O_1 @ LAMBDA_2) @ v)   # = 2 v_x v_z
    return d1, d2


def tracking_fields_general(ch: BlochChannel, v: CoherenceVector, omega0: float,
                            s1dot: float = 0.0, s2dot: float = 0.0) -> tuple[float, float]:
    """In-plane fields enforcing dS1/dt = s1dot, dS2/dt = s2dot for any channel.

    Solves the quadratic-objective rate equations for omega1 and omega2; on
    the pure-dephasing channel with zero target rates this reproduces
    `tracking_fields_dephasing` exactly.
    """
    arr = v.as_array()
    d1, d2 = _general_denominators(arr)
    if abs(d1) <= 1e-12 or abs(d2) <= 1e-12:
        n1, n2 = _general_numerators(ch, arr, omega0, s1dot, s2dot)
        report = SingularityReport("nontrivial-a" if max(abs(n1), abs(n2)) > EPS_NUMERATOR
                                   else "nontrivial-b",
                                   t=math.nan, d1=d1, d2=d2, n1=n1, n2=n2)
        raise SingularPointError(
            f"vanishing field denominator (D1={d1:.3e}, D2={d2:.3e})", report
        )
    n1, n2 = _general_numerators(ch, arr, omega0, s1dot, s2dot)
    return n1 / d1, n2 / d2


def omega_magnitude_sq(v0: CoherenceVector, gamma: float, omega0: float,
                       t: float) -> float:
    """Closed-form squared field magnitude |Omega|^2 of the tracked solution.

    Equals (gamma^2 + omega0^2) c / (v_z(0)^2 - 2 gamma c t) + omega0^2, which
    matches omega1^2 + omega2^2 + omega0^2 of the synthesized fields.
    """
    denom = _dephasing_denominator(v0, gamma, t)
    c = coherence(v0)
    return (gamma**2 + omega0**2) * c / denom**2 + omega0**2


def _is_dephasing_form(ch: BlochChannel) -> tuple[bool, float]:
    m0, k = ch.m0, ch.k
    if np.linalg.norm(k) > 1e-12:
        return False, 0.0
    gamma = -float(m0[0, 0])
    target = np.diag([-gamma, -gamma, 0.0])
    return bool(np.max(np.abs(m0 - target)) <= 1e-12), gamma


def tracked_waveform(v0: CoherenceVector, gamma: float, omega0: float,
                     omega_max: float | None = None) -> ControlWaveform:
    """Closed-form tracking waveform for a pure-dephasing channel.

    Without a clip level the waveform ends just before t_b (guard factor
    1 - 1e-6 keeps the fields finite in double precision). With omega_max,
    each in-plane field is clamped independently once it would exceed the
    level, and the waveform is defined for all times (the fields saturate).
    """
    sol = TrackingSolution(v0, gamma, omega0, omega_max)
    t_b = sol.t_b
    guard_end = None if math.isinf(t_b) else t_b * (1.0 - BREAKDOWN_GUARD)

    if omega_max is None:
        def fields(t):
            w1, w2 = tracking_fields_dephasing(v0, gamma, omega0, t)
            return (omega0, w1, w2)
        return ControlWaveform.closed_form(fields, t_end=guard_end)

    if omega_max <= 0:
        raise DomainError(f"omega_max must be positive, got {omega_max}")
    s = sol.sign
    num1 = s * (-gamma * v0.vy + omega0 * v0.vx)
    num2 = s * (-gamma * v0.vx - omega0 * v0.vy)

    def clipped(t):
        if guard_end is not None and t >= guard_end:
            w1 = math.copysign(omega_max, num1) if num1 != 0 else 0.0
            w2 = math.copysign(omega_max, num2) if num2 != 0 else 0.0
            return (omega0, w1, w2)
        w1, w2 = tracking_fields_dephasing(v0, gamma, omega0, t)
        return (omega0,
                max(-omega_max, min(omega_max, w1)),
                max(-omega_max, min(omega_max, w2)))

    breakpoints = (guard_end,) if guard_end is not None else ()
    return ControlWaveform(clipped, breakpoints=breakpoints)


def clip_time(v0: CoherenceVector, gamma: float, omega0: float,
              omega_max: float) -> float:
    """First time at which either in-plane tracked field reaches omega_max."""
    sol = TrackingSolution(v0, gamma, omega0, omega_max)
    c = coherence(v0)
    times = []
    for num in (-gamma * v0.vy + omega0 * v0.vx, -gamma * v0.vx - omega0 * v0.vy):
        if num == 0.0:
            continue
        if gamma == 0.0 or c == 0.0:
            # Constant field: clips at t = 0 or never.
            times.append(0.0 if abs(num / v0.vz) >= omega_max else math.inf)
            continue
        radicand = (num / omega_max) ** 2
        times.append(max(0.0, (v0.vz**2 - radicand) / (2.0 * gamma * c)))
    return min(times) if times else math.inf


def simulate_tracked(ch: BlochChannel, v0: CoherenceVector, omega0: float,
                     t_max: float, omega_max: float | None = None,
                     cfg: IntegratorConfig | None = None,
                     n_samples: int = 501) -> Trajectory:
    """Propagate the channel under the synthesized coherence-holding fields.

    Pure-dephasing channels use the closed-form fields; any other channel is
    driven by state-feedback fields recomputed from the current state at every
    integrator evaluation. Termination records horizon, breakdown at t_b, or
    the first clip time when omega_max is given.
    """
    if v0.vz == 0.0:
        raise DomainError("v_z(0) = 0: no control is possible")
    dephasing, gamma = _is_dephasing_form(ch)
    if dephasing:
        w = tracked_waveform(v0, gamma, omega0, omega_max)
        traj = propagate_bloch(ch, w, v0, t_max, cfg, n_samples)
        t_b = breakdown_time(v0, gamma)
        if omega_max is not None:
            t_clip = clip_time(v0, gamma, omega0, omega_max)
            if t_clip < t_max and traj.termination.kind == "horizon":
                traj = traj.with_termination(Termination("clipped", t_clip))
        elif traj.termination.kind == "breakdown":
            traj = traj.with_termination(Termination("breakdown", t_b))
        return traj

    if omega_max is not None:
        raise DomainError("field clipping is only supported on the closed-form "
                          "pure-dephasing path")

    def feedback_fields(t, v):
        w1, w2 = tracking_fields_general(ch, CoherenceVector.from_array(v), omega0)
        return omega0, w1, w2

    return _propagate_feedback(ch, v0, feedback_fields, t_max, cfg, n_samples)


def _propagate_feedback(ch, v0, fields_of_state, t_max, cfg, n_samples):
    """Integrate with fields recomputed from the current state per evaluation."""
    cfg = cfg or IntegratorConfig()
    grid = np.linspace(0.0, t_max, n_samples)
    m0, k = ch.m0, ch.k

    def rhs(t, v):
        w = fields_of_state(t, v)
        return (m0 + control_matrix(*w)) @ v + k

    try:
        ys, n_ok = _integrate(rhs, v0.as_array(), grid, cfg)
    except SingularPointError:
        ys, n_ok = np.array([v0.as_array()]), 1
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
        termination = Termination("horizon")
    grid, ys = grid[:n_ok], ys[:n_ok]
    omega = np.zeros((n_ok, 3))
    for i in range(n_ok):
        try:
            omega[i] = fields_of_state(grid[i], ys[i])
        except SingularPointError:
            omega[i] = np.nan
    p, c = _derived_columns(ys)
    return Trajectory(grid, ys, p, c, omega, termination)


def detect_breakdown(ch: BlochChannel, v0: CoherenceVector, omega0: float,
                     t_cap: float, vz_floor: float = 1e-3,
                     cfg: IntegratorConfig | None = None) -> float:
    """Numerically detect breakdown by running the state-feedback controller.

    Integrates until |v_z| falls below vz_floor and returns that time; used
    to cross-check the closed-form breakdown time independently.
    """
    from scipy.integrate import solve_ivp

    if v0.vz == 0.0:
        return 0.0
    cfg = cfg or IntegratorConfig()
    m0, k = ch.m0, ch.k

    def rhs(t, v):
        w1, w2 = tracking_fields_general(ch, CoherenceVector.from_array(v), omega0)
        return (m0 + control_matrix(omega0, w1, w2)) @ v + k

    def hit_floor(t, v):
        return abs(v[2]) - vz_floor

    hit_floor.terminal = True
    hit_floor.direction = -1
    sol = solve_ivp(rhs, (0.0, t_cap), v0.as_array(), method="RK45",
                    rtol=cfg.rtol, atol=cfg.atol, events=hit_floor)
    if sol.t_events[0].size:
        return float(sol.t_events[0][0])
    return math.inf


def classify_singularity(traj: Trajectory, ch: BlochChannel,
                         eps_d: float = EPS_DENOMINATOR,
                         eps_n: float = EPS_NUMERATOR,
                         run_length: int = 10) -> SingularityReport:
    """Classify zeros of the field-formula denominators along a trajectory.

    `trivial` means a denominator vanishes over >= run_length consecutive
    samples; an isolated zero is `nontrivial-a` (finite numerator, no field
    solution) or `nontrivial-b` (0/0, a limit may exist). A trajectory that
    terminated with breakdown contributes a virtual sample at t_b with
    v_z = 0.
    """
    if len(traj.t) == 0:
        raise DomainError("cannot classify an empty trajectory")
    ts = list(traj.t)
    vs = [traj.v[i] for i in range(len(traj.t))]
    w0s = list(traj.omega[:, 0])
    if traj.termination.kind == "breakdown" and traj.termination.time is not None:
        ts.append(traj.termination.time)
        vs.append(np.array([traj.v[-1, 0], traj.v[-1, 1], 0.0]))
        w0s.append(w0s[-1])

    d1s, d2s, n1s, n2s = [], [], [], []
    for v, w0 in zip(vs, w0s):
        d1, d2 = _general_denominators(v)
        n1, n2 = _general_numerators(ch, v, w0, 0.0, 0.0)
        d1s.append(d1)
        d2s.append(d2)
        n1s.append(n1)
        n2s.append(n2)

    def longest_zero_run(ds):
        best_len, best_start, cur, start = 0, None, 0, None
        for j, d in enumerate(ds):
            if abs(d) <= eps_d:
                if cur == 0:
                    start = j
                cur += 1
                if cur > best_len:
                    best_len, best_start = cur, start
            else:
                cur = 0
        return best_len, best_start

    for ds in (d1s, d2s):
        length, start = longest_zero_run(ds)
        if length >= run_length:
            note = "no control possible" if start == 0 else ""
            return SingularityReport("trivial", t=float(ts[start]),
                                     d1=d1s[start], d2=d2s[start],
                                     n1=n1s[start], n2=n2s[start], note=note)

    for j in range(len(ts)):
        zero1 = abs(d1s[j]) <= eps_d
        zero2 = abs(d2s[j]) <= eps_d
        if not (zero1 or zero2):
            continue
        mags = []
        if zero1:
            mags.append(abs(n1s[j]))
        if zero2:
            mags.append(abs(n2s[j]))
        cls = "nontrivial-a" if max(mags) > eps_n else "nontrivial-b"
        return SingularityReport(cls, t=float(ts[j]), d1=d1s[j], d2=d2s[j],
                                 n1=n1s[j], n2=n2s[j])

    return SingularityReport("none")


def coherence_ramp_schedule(v0: CoherenceVector, gamma: float, schedule,
                            omega0: float = 0.0) -> ControlWaveform:
    """Piecewise tracking waveform that steps the coherence target downward.

    `schedule` is a sequence of (t_i, c_i): at time t_i the target coherence
    becomes c_i. The first entry must be (0, coherence(v0)); targets must be
    strictly decreasing. At each boundary the in-plane targets are re-aimed
    radially (scaled by sqrt(c_new / c_old)); v_z carries over continuously
    via the closed-form tracked solution. Every segment must end before its
    own breakdown time, so the resulting fields are finite on the whole
    schedule.
    """
    entries = [(float(t), float(c)) for t, c in schedule]
    if not entries:
        raise DomainError("schedule must contain at least one segment")
    if entries[0][0] != 0.0:
        raise DomainError(f"first segment must start at t=0, got {entries[0][0]}")
    c0 = coherence(v0)
    if abs(entries[0][1] - c0) > 1e-12:
        raise DomainError(
            f"first target {entries[0][1]} must equal coherence(v0) = {c0}"
        )
    for (ta, ca), (tb, cb) in zip(entries, entries[1:]):
        if tb <= ta:
            raise DomainError("segment start times must be strictly increasing")
        if cb >= ca:
            raise DomainError("coherence targets must be strictly decreasing")
    if any(c < 0 for _, c in entries):
        raise DomainError("coherence targets must be non-negative")
    if v0.vz == 0.0 and c0 > 0:
        raise DomainError("v_z(0) = 0: no control is possible")

    s = 1.0 if v0.vz >= 0 else -1.0
    segments = []   # (t_start, x, y, vz_entry, c)
    x, y, vz = v0.vx, v0.vy, v0.vz
    t_end = None
    for i, (t_i, c_i) in enumerate(entries):
        if i > 0:
            prev_c = entries[i - 1][1]
            r = math.sqrt(c_i / prev_c) if prev_c > 0 else 0.0
            x, y = x * r, y * r
        segments.append((t_i, x, y, vz, c_i))
        local_tb = math.inf if (gamma == 0.0 or c_i == 0.0) else vz**2 / (2.0 * gamma * c_i)
        if i + 1 < len(entries):
            duration = entries[i + 1][0] - t_i
            if duration >= local_tb:
                raise ScheduleInfeasibleError(i, duration, local_tb)
            vz = s * math.sqrt(vz**2 - 2.0 * gamma * c_i * duration)
        else:
            t_end = None if math.isinf(local_tb) else t_i + local_tb * (1.0 - BREAKDOWN_GUARD)

    starts = [seg[0] for seg in segments]

    def fields(t):
        i = max(0, np.searchsorted(starts, t, side="right") - 1)
        t_i, x_i, y_i, vz_i, c_i = segments[i]
        tau = t - t_i
        radicand = vz_i**2 - 2.0 * gamma * c_i * tau
        if radicand <= 0:
            raise PastBreakdownError(t, t_i + vz_i**2 / (2.0 * gamma * c_i))
        denom = math.sqrt(radicand)
        w1 = s * (-gamma * y_i + omega0 * x_i) / denom
        w2 = s * (-gamma * x_i - omega0 * y_i) / denom
        return (omega0, w1, w2)

    return ControlWaveform.closed_form(fields, t_end=t_end, breakpoints=starts[1:])
