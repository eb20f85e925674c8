"""Control waveforms: the three field functions (omega0, omega1, omega2) of time.

A waveform may be a constant triple, a uniformly sampled table with linear
interpolation, a closed-form rule defined only up to a breakdown time, or a
piecewise concatenation of segments. Waveforms evaluate to a (3,) float array
and carry an optional end of domain `t_end` plus `breakpoints` at which the
fields may be discontinuous (integrators split there).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ValidationError, WaveformDomainError


class ControlWaveform:
    """Time-dependent control fields (omega0, omega1, omega2).

    Parameters
    ----------
    func : callable
        Maps a time t to a length-3 sequence (omega0, omega1, omega2).
    t_end : float or None
        End of the domain of definition (exclusive); None means unbounded.
    breakpoints : sequence of float
        Interior times where the fields may jump.
    """

    def __init__(self, func, t_end=None, breakpoints=()):
        self._func = func
        self.t_end = t_end
        self.breakpoints = tuple(sorted(breakpoints))

    def __call__(self, t: float) -> np.ndarray:
        if t < 0:
            raise WaveformDomainError(f"waveform evaluated at negative time {t}")
        if self.t_end is not None and t >= self.t_end:
            raise WaveformDomainError(
                f"waveform evaluated at t={t} outside its domain [0, {self.t_end})"
            )
        w = np.asarray(self._func(t), dtype=float)
        if w.shape != (3,):
            raise ValidationError(f"waveform must yield 3 fields, got shape {w.shape}")
        return w

    @classmethod
    def zero(cls) -> "ControlWaveform":
        return cls.constant(0.0, 0.0, 0.0)

    @classmethod
    def constant(cls, omega0, omega1=0.0, omega2=0.0) -> "ControlWaveform":
        w = np.array([omega0, omega1, omega2], dtype=float)
        if not np.all(np.isfinite(w)):
            raise ValidationError(f"constant fields must be finite, got {w}")
        return cls(lambda t: w)

    @classmethod
    def sampled(cls, t, omega) -> "ControlWaveform":
        """Uniformly sampled fields with linear interpolation.

        `t` is a strictly increasing uniform grid starting at 0; `omega` has
        shape (len(t), 3). Evaluation past the last sample holds the end value.
        """
        t = np.asarray(t, dtype=float)
        omega = np.asarray(omega, dtype=float)
        if t.ndim != 1 or len(t) < 2:
            raise ValidationError("sampled waveform needs at least two time points")
        dt = np.diff(t)
        if np.any(dt <= 0):
            raise ValidationError("sampled waveform time grid must be strictly increasing")
        if np.max(np.abs(dt - dt[0])) > 1e-9 * max(1.0, abs(dt[0])):
            raise ValidationError("sampled waveform time grid must be uniform")
        if omega.shape != (len(t), 3):
            raise ValidationError(
                f"sampled waveform fields must have shape ({len(t)}, 3), got {omega.shape}"
            )
        if not np.all(np.isfinite(omega)):
            raise ValidationError("sampled waveform fields must be finite")

        def interp(s):
            return np.array([np.interp(s, t, omega[:, j]) for j in range(3)])

        return cls(interp)

    @classmethod
    def piecewise_constant(cls, edges, values) -> "ControlWaveform":
        """Constant fields on [edges[i], edges[i+1]); values has shape (n, 3)."""
        edges = np.asarray(edges, dtype=float)
        values = np.asarray(values, dtype=float)
        if values.shape != (len(edges) - 1, 3):
            raise ValidationError(
                f"expected {len(edges) - 1} field triples, got shape {values.shape}"
            )
        if np.any(np.diff(edges) <= 0):
            raise ValidationError("piecewise edges must be strictly increasing")

        def step(s):
            i = int(np.clip(np.searchsorted(edges, s, side="right") - 1, 0, len(values) - 1))
            return values[i]

        return cls(step, breakpoints=edges[1:-1])

    @classmethod
    def closed_form(cls, func, t_end, breakpoints=()) -> "ControlWaveform":
        """Closed-form fields defined only for t < t_end."""
        if t_end is not None and not (t_end > 0 or math.isinf(t_end)):
            raise ValidationError(f"t_end must be positive, got {t_end}")
        if t_end is not None and math.isinf(t_end):
            t_end = None
        return cls(func, t_end=t_end, breakpoints=breakpoints)
