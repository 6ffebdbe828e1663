"""Benchmark systems and burst sampling.

Forward-Euler simulation of three index-invariant systems (the Lorenz 96
chain, a semi-discrete 2D viscous Burgers equation, and the Gray-Scott
reaction-diffusion model), plus measurement-noise injection and
finite-difference velocity estimates from recorded snapshot pairs.

All periodic wrapping is done with ``np.roll``, so applying a right-hand
side commutes exactly with cyclic shifts of the state. Randomness always
flows through ``np.random.default_rng`` (PCG64), so runs are reproducible
across platforms for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "State1D",
    "State2D",
    "TwoComponentState",
    "Burst",
    "NoiseSpec",
    "DimensionError",
    "DivergenceError",
    "lorenz96_rhs",
    "burgers2d_rhs",
    "nine_point_laplacian",
    "grayscott_rhs",
    "integrate",
    "add_noise",
    "approximate_velocity",
]


class DimensionError(ValueError):
    """State shape is incompatible with the requested operation."""


class DivergenceError(RuntimeError):
    """Integration produced a non-finite state."""

    def __init__(self, step: int, time: float):
        self.step = step
        self.time = time
        super().__init__(f"non-finite state at step {step} (t={time:.6g})")


@dataclass(frozen=True)
class State1D:
    """Periodic 1D state vector."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.ndim != 1:
            raise DimensionError(f"State1D expects a vector, got shape {self.values.shape}")

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class State2D:
    """Periodic square grid with an explicit grid spacing.

    ``grid_spacing`` enters only through the discrete Laplacians; the unit
    square convention is h = 1/n (see :meth:`unit_square`), but h is kept
    configurable because some reaction-diffusion setups use h = 1.
    """

    values: np.ndarray
    grid_spacing: float

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise DimensionError(f"State2D expects a square grid, got shape {self.values.shape}")
        if not self.grid_spacing > 0:
            raise ValueError("grid_spacing must be positive")

    @classmethod
    def unit_square(cls, values: np.ndarray) -> "State2D":
        values = np.asarray(values, dtype=float)
        return cls(values, 1.0 / values.shape[0])

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class TwoComponentState:
    """Pair of concentration grids sharing one lattice."""

    u: State2D
    v: State2D

    def __post_init__(self):
        if self.u.values.shape != self.v.values.shape:
            raise DimensionError("u and v grids must have identical shapes")
        if self.u.grid_spacing != self.v.grid_spacing:
            raise DimensionError("u and v grids must share the grid spacing")

    @property
    def n(self) -> int:
        return self.u.n


@dataclass(frozen=True)
class Burst:
    """Short trajectory: snapshots recorded at strictly increasing times."""

    snapshots: tuple
    times: tuple
    burst_id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "snapshots", tuple(self.snapshots))
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        if len(self.snapshots) != len(self.times):
            raise ValueError("snapshots and times must have equal length")
        if len(self.snapshots) == 0:
            raise ValueError("a burst needs at least one snapshot")
        if any(t1 >= t2 for t1, t2 in zip(self.times, self.times[1:])):
            raise ValueError("record times must be strictly increasing")

    @property
    def dt_record(self) -> float:
        if len(self.times) < 2:
            raise ValueError("dt_record undefined for a single snapshot")
        return self.times[1] - self.times[0]


@dataclass(frozen=True)
class NoiseSpec:
    """Measurement-noise description.

    ``level`` is the variance for ``gaussian`` noise and the half-width for
    ``uniform`` noise; it must be 0 for ``none``.
    """

    kind: str = "none"
    level: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("gaussian", "uniform", "none"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.level < 0:
            raise ValueError("noise level must be nonnegative")
        if self.kind == "none" and self.level != 0:
            raise ValueError("kind='none' requires level=0")


def lorenz96_rhs(state: State1D, forcing: float) -> State1D:
    """Lorenz 96 right-hand side with periodic indices.

    Component j evaluates -u[j-2]*u[j-1] + u[j-1]*u[j+1] - u[j] + forcing.
    """
    u = state.values
    if u.shape[0] < 4:
        raise DimensionError("Lorenz 96 needs n >= 4 so that j-2..j+1 are distinct")
    um2 = np.roll(u, 2)
    um1 = np.roll(u, 1)
    up1 = np.roll(u, -1)
    return State1D(-um2 * um1 + um1 * up1 - u + forcing)


def burgers2d_rhs(state: State2D, alpha: float) -> State2D:
    """Semi-discrete 2D viscous Burgers right-hand side.

    Five-point Laplacian scaled by alpha/h^2 plus centered differences of
    the squared field in each direction, all with periodic wrap.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    u = state.values
    h = state.grid_spacing
    uep = np.roll(u, -1, axis=0)  # u[i+1, j]
    uem = np.roll(u, 1, axis=0)   # u[i-1, j]
    unp = np.roll(u, -1, axis=1)  # u[i, j+1]
    unm = np.roll(u, 1, axis=1)   # u[i, j-1]
    diffusion = alpha * (uep + uem + unp + unm - 4.0 * u) / h**2
    advection = (uep**2 - uem**2) / (4.0 * h) + (unp**2 - unm**2) / (4.0 * h)
    return State2D(diffusion + advection, h)


def nine_point_laplacian(values: np.ndarray, h: float) -> np.ndarray:
    """Standard 9-point discrete Laplacian with periodic wrap.

    (2/(3h^2)) * (E + W + N + S - 5*C) + (1/(6h^2)) * (NE + NW + SE + SW);
    the stencil annihilates constant and linear fields.
    """
    c = np.asarray(values, dtype=float)
    e = np.roll(c, -1, axis=0)
    w = np.roll(c, 1, axis=0)
    n = np.roll(c, -1, axis=1)
    s = np.roll(c, 1, axis=1)
    ne = np.roll(c, (-1, -1), axis=(0, 1))
    nw = np.roll(c, (1, -1), axis=(0, 1))
    se = np.roll(c, (-1, 1), axis=(0, 1))
    sw = np.roll(c, (1, 1), axis=(0, 1))
    return (2.0 / (3.0 * h * h)) * (e + w + n + s - 5.0 * c) + (
        1.0 / (6.0 * h * h)
    ) * (ne + nw + se + sw)


def grayscott_rhs(state: TwoComponentState, r_u: float, r_v: float, f: float, k: float) -> TwoComponentState:
    """Gray-Scott reaction-diffusion right-hand side on a periodic grid."""
    if r_u <= 0 or r_v <= 0:
        raise ValueError("diffusion rates must be positive")
    if f < 0 or k < 0:
        raise ValueError("f and k must be nonnegative")
    u = state.u.values
    v = state.v.values
    h = state.u.grid_spacing
    uvv = u * v * v
    du = r_u * nine_point_laplacian(u, h) - uvv + f * (1.0 - u)
    dv = r_v * nine_point_laplacian(v, h) + uvv - (f + k) * v
    return TwoComponentState(State2D(du, h), State2D(dv, h))


def _euler_step(state, deriv, dt: float):
    if isinstance(state, State1D):
        return State1D(state.values + dt * deriv.values)
    if isinstance(state, State2D):
        return State2D(state.values + dt * deriv.values, state.grid_spacing)
    if isinstance(state, TwoComponentState):
        return TwoComponentState(
            State2D(state.u.values + dt * deriv.u.values, state.u.grid_spacing),
            State2D(state.v.values + dt * deriv.v.values, state.v.grid_spacing),
        )
    raise TypeError(f"unsupported state type {type(state).__name__}")


def _state_finite(state) -> bool:
    if isinstance(state, TwoComponentState):
        return bool(np.isfinite(state.u.values).all() and np.isfinite(state.v.values).all())
    return bool(np.isfinite(state.values).all())


def integrate(rhs, state0, dt_fine: float, record_times, burst_id: int = 0) -> Burst:
    """Forward-Euler integration with snapshots captured at given times.

    ``record_times`` must be nonnegative multiples of ``dt_fine`` (within a
    relative tolerance of 1e-9) in increasing order. Raises
    :class:`DivergenceError` with the offending step index if the state
    leaves the finite range.
    """
    if dt_fine <= 0:
        raise ValueError("dt_fine must be positive")
    record_times = [float(t) for t in record_times]
    if not record_times:
        raise ValueError("need at least one record time")
    steps = []
    for t in record_times:
        if t < 0:
            raise ValueError("record times must be nonnegative")
        k = round(t / dt_fine)
        if abs(k * dt_fine - t) > 1e-9 * max(dt_fine, abs(t)):
            raise ValueError(f"record time {t!r} is not a multiple of dt_fine={dt_fine!r}")
        steps.append(k)
    if any(a >= b for a, b in zip(steps, steps[1:])):
        raise ValueError("record times must be strictly increasing")

    snapshots = []
    state = state0
    capture = dict.fromkeys(steps)
    if 0 in capture:
        capture[0] = state
    for step in range(1, steps[-1] + 1):
        deriv = rhs(state)
        state = _euler_step(state, deriv, dt_fine)
        if not _state_finite(state):
            raise DivergenceError(step, step * dt_fine)
        if step in capture:
            capture[step] = state
    snapshots = [capture[k] for k in steps]
    return Burst(tuple(snapshots), tuple(record_times), burst_id)


def _perturb_array(values: np.ndarray, spec: NoiseSpec, rng: np.random.Generator) -> np.ndarray:
    if spec.kind == "gaussian":
        return values + rng.normal(0.0, np.sqrt(spec.level), size=values.shape)
    if spec.kind == "uniform":
        return values + rng.uniform(-spec.level, spec.level, size=values.shape)
    return values


def _perturb_state(state, spec: NoiseSpec, rng: np.random.Generator):
    if isinstance(state, State1D):
        return State1D(_perturb_array(state.values, spec, rng))
    if isinstance(state, State2D):
        return State2D(_perturb_array(state.values, spec, rng), state.grid_spacing)
    if isinstance(state, TwoComponentState):
        return TwoComponentState(
            State2D(_perturb_array(state.u.values, spec, rng), state.u.grid_spacing),
            State2D(_perturb_array(state.v.values, spec, rng), state.v.grid_spacing),
        )
    raise TypeError(f"unsupported state type {type(state).__name__}")


def add_noise(burst: Burst, spec: NoiseSpec) -> Burst:
    """Perturb every snapshot entry i.i.d. according to ``spec``.

    Deterministic for a fixed ``spec.seed`` (PCG64 stream); ``kind='none'``
    and zero-level Gaussian noise return the burst unchanged.
    """
    if spec.kind == "none" or spec.level == 0.0:
        return burst
    rng = np.random.default_rng(spec.seed)
    snapshots = tuple(_perturb_state(s, spec, rng) for s in burst.snapshots)
    return Burst(snapshots, burst.times, burst.burst_id)


def _state_difference(a, b, scale: float):
    if isinstance(a, TwoComponentState):
        return (
            (b.u.values - a.u.values) / scale,
            (b.v.values - a.v.values) / scale,
        )
    return (b.values - a.values) / scale


def approximate_velocity(burst: Burst):
    """Finite-difference velocities for each consecutive snapshot pair.

    Returns a list with one entry per pair: an array for scalar states, or
    a (du, dv) tuple of arrays for two-component states.
    """
    if len(burst.snapshots) < 2:
        raise ValueError("need at least two snapshots to estimate a velocity")
    out = []
    for (sa, sb), (ta, tb) in zip(
        zip(burst.snapshots, burst.snapshots[1:]), zip(burst.times, burst.times[1:])
    ):
        out.append(_state_difference(sa, sb, tb - ta))
    return out
