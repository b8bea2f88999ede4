"""Seeded random streams and the elementary stochastic objects built on them.

Every trial owns one :class:`RandomStream`. Streams are keyed by
``(seed, stream_id)`` through :class:`numpy.random.SeedSequence` spawn keys and
drive a counter-based Philox generator, so streams never share state and can
be created in any process in any order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from poisson_er.errors import ParameterError

_UINT64_MAX = 2**64 - 1
# Cap for geometric gaps; anything this large is "never" at desk scale.
_MAX_GAP = 2**62


@dataclass(eq=False)
class RandomStream:
    seed: int
    stream_id: int = 0
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or not 0 <= value <= _UINT64_MAX:
                raise ParameterError(f"{name} must be a 64-bit unsigned integer, got {value!r}")
        seq = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        self.generator = np.random.Generator(np.random.Philox(seq))

    def random(self) -> float:
        return float(self.generator.random())


@dataclass(frozen=True)
class CountingProcessPath:
    times: np.ndarray
    counts: np.ndarray


@dataclass(frozen=True)
class ReferencePath:
    dt: float
    grid: np.ndarray
    values: np.ndarray


def _check_mean(mean) -> None:
    if not np.all(np.isfinite(mean)) or np.any(np.asarray(mean) < 0):
        raise ParameterError(f"Poisson mean must be finite and non-negative, got {mean!r}")


def poisson_sample(stream: RandomStream, mean: float) -> int:
    """One Poisson(mean) draw; ``mean == 0`` returns exactly 0."""
    _check_mean(mean)
    if mean == 0:
        return 0
    return int(stream.generator.poisson(mean))


def poisson_samples(stream: RandomStream, means) -> np.ndarray:
    """Independent Poisson draws, one per entry of ``means`` (int64 array)."""
    means = np.asarray(means, dtype=np.float64)
    _check_mean(means)
    return stream.generator.poisson(means).astype(np.int64, copy=False)


def counting_process_at(stream: RandomStream, times) -> CountingProcessPath:
    """Evaluate a fresh unit-rate Poisson counting process on a grid.

    The count at ``times[0]`` is Poisson(times[0]) (0 when the grid starts at
    0); later counts add independent Poisson(t_{i+1} - t_i) increments.
    """
    times = np.asarray(times, dtype=np.float64)
    if times.ndim != 1 or times.size == 0:
        raise ParameterError("times must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(times)) or times[0] < 0:
        raise ParameterError("times must be finite and non-negative")
    gaps = np.diff(times, prepend=0.0)
    if np.any(gaps < 0):
        raise ParameterError("times must be nondecreasing")
    counts = np.cumsum(poisson_samples(stream, gaps))
    return CountingProcessPath(times=times, counts=counts)


def _check_probability(p: float) -> None:
    if not (0.0 < p <= 1.0):
        raise ParameterError(f"geometric skip needs 0 < p <= 1, got {p!r}")


def geometric_skip(stream: RandomStream, p: float) -> int:
    """Gap to the next success in an i.i.d. Bernoulli(p) sequence (>= 1)."""
    _check_probability(p)
    if p == 1.0:
        return 1
    u = 1.0 - stream.random()  # in (0, 1]
    gap = math.log(u) / math.log1p(-p) if p > 1e-300 else math.inf
    if not gap < _MAX_GAP:  # also catches inf when p is below float resolution
        return _MAX_GAP
    return max(math.ceil(gap), 1)


def geometric_skips(stream: RandomStream, p: float, size: int) -> np.ndarray:
    """Vectorised :func:`geometric_skip`: ``size`` i.i.d. gaps as int64."""
    _check_probability(p)
    if p == 1.0:
        return np.ones(size, dtype=np.int64)
    u = 1.0 - stream.generator.random(size)
    if p <= 1e-300:
        return np.full(size, _MAX_GAP, dtype=np.int64)
    with np.errstate(over="ignore"):
        gaps = np.ceil(np.log(u) / math.log1p(-p))
    np.clip(gaps, 1, _MAX_GAP, out=gaps)
    return gaps.astype(np.int64)


def _diffusion_grid(horizon: float, dt: float) -> np.ndarray:
    if not (dt > 0 and math.isfinite(dt)):
        raise ParameterError(f"dt must be positive, got {dt!r}")
    if not (horizon > 0 and math.isfinite(horizon)):
        raise ParameterError(f"horizon must be positive, got {horizon!r}")
    if dt > horizon:
        raise ParameterError("dt must not exceed the horizon")
    steps = math.ceil(horizon / dt - 1e-9)
    return dt * np.arange(steps + 1, dtype=np.float64)


def reference_diffusion(stream: RandomStream, lam: float, horizon: float, dt: float) -> ReferencePath:
    """Euler path of ``B_t + lam*t - t**2/2``.

    The drift is integrated exactly over each step; only the Brownian
    increment is sampled, so marginals carry no discretisation bias.
    """
    grid = _diffusion_grid(horizon, dt)
    drift = lam * np.diff(grid) - 0.5 * np.diff(grid**2)
    noise = stream.generator.normal(0.0, math.sqrt(dt), size=grid.size - 1)
    values = np.concatenate(([0.0], np.cumsum(drift + noise)))
    return ReferencePath(dt=dt, grid=grid, values=values)


def reference_marginals(
    stream: RandomStream,
    lam: float,
    times,
    n_paths: int,
    dt: float = 0.01,
    chunk: int = 2000,
) -> np.ndarray:
    """Values of ``n_paths`` independent reference paths at ``times``.

    Returns an array of shape ``(n_paths, len(times))``. Paths are simulated
    in chunks so memory stays bounded for fine grids.
    """
    times = np.asarray(times, dtype=np.float64)
    grid = _diffusion_grid(float(times.max()), dt)
    idx = np.rint(times / dt).astype(np.int64)
    if np.any(np.abs(grid[idx] - times) > 1e-9):
        raise ParameterError("marginal times must lie on the dt grid")
    drift = lam * np.diff(grid) - 0.5 * np.diff(grid**2)
    out = np.empty((n_paths, times.size))
    done = 0
    while done < n_paths:
        m = min(chunk, n_paths - done)
        noise = stream.generator.normal(0.0, math.sqrt(dt), size=(m, grid.size - 1))
        paths = np.cumsum(noise + drift, axis=1)
        paths = np.concatenate((np.zeros((m, 1)), paths), axis=1)
        out[done : done + m] = paths[:, idx]
        done += m
    return out
