"""Complex wave-packet segments on a shared discrete time grid.

A photon's state is carried by one or more :class:`SubWave` values, each a
complex amplitude sampled on a :class:`TimeGrid`.  Sub-waves are not
individually normalized; probabilities are their norms under the integral
convention ``sum(|a_i|^2) * dt``, which makes every quantity independent of
the grid resolution for rectangular pulses.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, GridMismatchError

# Sample-alignment tolerance for times given in seconds, relative to dt.
_ALIGN_TOL = 1e-9


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid: ``n_samples`` points spaced ``dt`` seconds from ``origin``."""

    n_samples: int
    dt: float
    origin: float = 0.0

    def __post_init__(self):
        if not isinstance(self.n_samples, (int, np.integer)) or self.n_samples < 2:
            raise ConfigurationError(f"n_samples must be an integer >= 2, got {self.n_samples!r}")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ConfigurationError(f"dt must be positive and finite, got {self.dt!r}")
        if not np.isfinite(self.origin):
            raise ConfigurationError(f"origin must be finite, got {self.origin!r}")

    @property
    def span(self) -> float:
        return self.n_samples * self.dt

    def times(self) -> np.ndarray:
        return self.origin + self.dt * np.arange(self.n_samples)

    def index_at(self, t: float) -> int:
        """Sample index of a boundary time ``t``.

        ``t`` must lie on a sample boundary (within tolerance) between the
        grid origin and its end; the end boundary ``origin + span`` maps to
        ``n_samples``.
        """
        k = (t - self.origin) / self.dt
        ki = int(round(k))
        if abs(k - ki) > _ALIGN_TOL * max(1.0, abs(k)):
            raise ConfigurationError(
                f"time {t!r} s is not aligned to a sample boundary (dt={self.dt!r} s)"
            )
        if not 0 <= ki <= self.n_samples:
            raise ConfigurationError(
                f"time {t!r} s lies outside the grid [{self.origin!r}, {self.origin + self.span!r}]"
            )
        return ki


@dataclass(frozen=True, eq=False)
class SubWave:
    """One path's complex amplitude samples on a grid, with a path label."""

    grid: TimeGrid
    amps: np.ndarray
    path_label: str = ""

    def __post_init__(self):
        amps = np.array(self.amps, dtype=np.complex128, copy=True)
        if amps.shape != (self.grid.n_samples,):
            raise ConfigurationError(
                f"amplitude array has shape {amps.shape}, grid expects ({self.grid.n_samples},)"
            )
        if not np.all(np.isfinite(amps)):
            raise ConfigurationError("amplitudes must be finite")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    def relabel(self, label: str) -> "SubWave":
        return replace(self, path_label=label)

    def __repr__(self):
        return (
            f"SubWave(n={self.grid.n_samples}, norm={norm(self):.6g}, "
            f"label={self.path_label!r})"
        )


def zero_wave(grid: TimeGrid, path_label: str = "vacuum") -> SubWave:
    """All-zero sub-wave (vacuum port)."""
    return SubWave(grid, np.zeros(grid.n_samples, dtype=np.complex128), path_label)


def make_rect_pulse(grid: TimeGrid, duration: float, path_label: str = "source") -> SubWave:
    """Unit-norm rectangular pulse starting at the grid origin.

    The amplitude is constant over ``[origin, origin + duration)`` and zero
    elsewhere; ``duration`` must be positive, sample-aligned and within the
    grid span.
    """
    if not (np.isfinite(duration) and duration > 0):
        raise ConfigurationError(f"pulse duration must be positive, got {duration!r}")
    n_pulse = grid.index_at(grid.origin + duration)
    if n_pulse == 0:
        raise ConfigurationError("pulse duration must cover at least one sample")
    amps = np.zeros(grid.n_samples, dtype=np.complex128)
    amps[:n_pulse] = np.sqrt(1.0 / (n_pulse * grid.dt))
    return SubWave(grid, amps, path_label)


def norm(w: SubWave) -> float:
    """Probability carried by ``w``: ``sum(|a_i|^2) * dt``."""
    return float(np.vdot(w.amps, w.amps).real * w.grid.dt)


def inner_product(a: SubWave, b: SubWave) -> complex:
    """Discrete inner product ``sum(conj(a_i) * b_i) * dt`` on a shared grid."""
    _require_same_grid(a, b)
    return complex(np.vdot(a.amps, b.amps) * a.grid.dt)


def split_at_time(w: SubWave, t_cut: float) -> tuple[SubWave, SubWave]:
    """Split ``w`` into (front, back) at a sample-aligned cut time.

    The front part holds the samples strictly before ``t_cut``, the back
    part the samples at and after it, so the two have disjoint supports and
    sum to ``w`` samplewise.
    """
    k = w.grid.index_at(t_cut)
    front = np.array(w.amps)
    front[k:] = 0
    back = np.array(w.amps)
    back[:k] = 0
    return (
        SubWave(w.grid, front, f"{w.path_label}.front"),
        SubWave(w.grid, back, f"{w.path_label}.back"),
    )


def superpose(a: SubWave, b: SubWave, path_label: str = "") -> SubWave:
    """Samplewise sum of two sub-waves on the same grid."""
    _require_same_grid(a, b)
    return SubWave(a.grid, a.amps + b.amps, path_label or a.path_label)


def _require_same_grid(a: SubWave, b: SubWave) -> None:
    if a.grid != b.grid:
        raise GridMismatchError(f"grids differ: {a.grid} vs {b.grid}")
