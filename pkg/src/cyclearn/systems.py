"""Benchmark-system catalog shared by the experiment pipeline.

For each system this module knows how to draw a random initial state, how
to evaluate the governing right-hand side, what the exact stencil
coefficients are over a localized variable set, and which noise radius the
reference experiments used. It also provides a generic cyclic stencil
model: a polynomial in offset variables applied at every grid index via
periodic rolls, which is how learned equations are simulated.

Conventions: offsets follow the data-matrix labels (ints in 1D, (di, dj)
pairs in 2D, ('u'|'v', (di, dj)) for two-component states); a term key is
a tuple of (label, power) pairs sorted by label, the empty tuple being the
constant term.
"""

from __future__ import annotations

import math

import numpy as np

from .dictionary import CoefficientVector, DictionaryMatrix
from .dynamics import (
    State1D,
    State2D,
    TwoComponentState,
    burgers2d_rhs,
    grayscott_rhs,
    lorenz96_rhs,
)

__all__ = [
    "SYSTEMS",
    "default_params",
    "make_rhs",
    "initial_state",
    "exact_terms",
    "exact_vector",
    "terms_from_coefficients",
    "stencil_rhs",
    "default_sigma",
    "default_config",
    "aggregate_grayscott_parameters",
    "EDGE_OFFSETS",
    "CORNER_OFFSETS",
]

SYSTEMS = ("lorenz96", "burgers2d", "grayscott")

EDGE_OFFSETS = ((1, 0), (-1, 0), (0, 1), (0, -1))
CORNER_OFFSETS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def default_params(system: str) -> dict:
    if system == "lorenz96":
        return {"F": 8.0}
    if system == "burgers2d":
        return {"alpha": 1e-2, "h": 1.0 / 128.0}
    if system == "grayscott":
        # unit grid spacing: the reference reaction-diffusion runs evaluate
        # the 9-point Laplacian on the index lattice
        return {"r_u": 0.3, "r_v": 0.15, "f": 0.055, "k": 0.063, "h": 1.0}
    raise ValueError(f"unknown system {system!r}")


def make_rhs(system: str, params: dict):
    """Right-hand side callable suitable for :func:`cyclearn.dynamics.integrate`."""
    if system == "lorenz96":
        forcing = params["F"]
        return lambda state: lorenz96_rhs(state, forcing)
    if system == "burgers2d":
        alpha = params["alpha"]
        return lambda state: burgers2d_rhs(state, alpha)
    if system == "grayscott":
        r_u, r_v, f, k = params["r_u"], params["r_v"], params["f"], params["k"]
        return lambda state: grayscott_rhs(state, r_u, r_v, f, k)
    raise ValueError(f"unknown system {system!r}")


def _h_shape_mask(n: int) -> np.ndarray:
    """H-shaped region on the unit square (two bars plus a crossbar)."""
    x = np.arange(n) / n
    xx, yy = np.meshgrid(x, x, indexing="ij")
    left = (xx >= 0.35) & (xx <= 0.45) & (yy >= 0.25) & (yy <= 0.75)
    right = (xx >= 0.55) & (xx <= 0.65) & (yy >= 0.25) & (yy <= 0.75)
    bar = (xx > 0.45) & (xx < 0.55) & (yy >= 0.45) & (yy <= 0.55)
    return left | right | bar


def initial_state(system: str, n: int, params: dict, rng: np.random.Generator):
    """Draw one random initial condition for a burst."""
    if system == "lorenz96":
        return State1D(rng.uniform(-1.0, 1.0, size=n))
    if system == "burgers2d":
        x = np.arange(n) / n
        xx, yy = np.meshgrid(x, x, indexing="ij")
        bump = 50.0 * np.sin(8.0 * np.pi * (xx - 0.5)) * np.exp(
            -((xx - 0.5) ** 2 + (yy - 0.5) ** 2) / 0.05
        )
        return State2D(bump + rng.uniform(-1.0, 1.0, size=(n, n)), params["h"])
    if system == "grayscott":
        u0 = 1.0 + 0.2 * rng.uniform(-1.0, 1.0, size=(n, n))
        v0 = _h_shape_mask(n).astype(float) + 0.02 * rng.uniform(-1.0, 1.0, size=(n, n))
        h = params["h"]
        return TwoComponentState(State2D(u0, h), State2D(v0, h))
    raise ValueError(f"unknown system {system!r}")


def _key(*pairs):
    return tuple(sorted(pairs))


def exact_terms(system: str, params: dict, component: str | None = None) -> dict:
    """Exact stencil coefficients of the governing equation, keyed by term."""
    if system == "lorenz96":
        return {
            (): params["F"],
            _key((0, 1)): -1.0,
            _key((-2, 1), (-1, 1)): -1.0,
            _key((-1, 1), (1, 1)): 1.0,
        }
    if system == "burgers2d":
        alpha, h = params["alpha"], params["h"]
        terms = {_key(((0, 0), 1)): -4.0 * alpha / h**2}
        for off in EDGE_OFFSETS:
            terms[_key((off, 1))] = alpha / h**2
        terms[_key(((1, 0), 2))] = 1.0 / (4.0 * h)
        terms[_key(((-1, 0), 2))] = -1.0 / (4.0 * h)
        terms[_key(((0, 1), 2))] = 1.0 / (4.0 * h)
        terms[_key(((0, -1), 2))] = -1.0 / (4.0 * h)
        return terms
    if system == "grayscott":
        if component not in ("u", "v"):
            raise ValueError("grayscott needs component 'u' or 'v'")
        r_u, r_v, f, k, h = (
            params["r_u"],
            params["r_v"],
            params["f"],
            params["k"],
            params["h"],
        )
        edge_w = 2.0 / (3.0 * h**2)
        corner_w = 1.0 / (6.0 * h**2)
        center_w = -10.0 / (3.0 * h**2)
        uvv = _key((("u", (0, 0)), 1), (("v", (0, 0)), 2))
        if component == "u":
            terms = {(): f, _key((("u", (0, 0)), 1)): r_u * center_w - f, uvv: -1.0}
            for off in EDGE_OFFSETS:
                terms[_key((("u", off), 1))] = r_u * edge_w
            for off in CORNER_OFFSETS:
                terms[_key((("u", off), 1))] = r_u * corner_w
        else:
            terms = {_key((("v", (0, 0)), 1)): r_v * center_w - (f + k), uvv: 1.0}
            for off in EDGE_OFFSETS:
                terms[_key((("v", off), 1))] = r_v * edge_w
            for off in CORNER_OFFSETS:
                terms[_key((("v", off), 1))] = r_v * corner_w
        return terms
    raise ValueError(f"unknown system {system!r}")


def exact_vector(terms: dict, A: DictionaryMatrix) -> np.ndarray:
    """Dense coefficient vector of the exact terms over a dictionary's columns."""
    label_pos = {lab: i for i, lab in enumerate(A.variable_labels)}
    position = {mi.exponents: pos for pos, mi in enumerate(A.column_index)}
    n_vars = len(A.variable_labels)
    out = np.zeros(A.n_columns)
    for key, coeff in terms.items():
        exps = [0] * n_vars
        for lab, power in key:
            if lab not in label_pos:
                raise ValueError(f"stencil does not contain variable {lab!r}")
            exps[label_pos[lab]] += power
        pos = position.get(tuple(exps))
        if pos is None:
            raise ValueError(f"term {key!r} exceeds the dictionary degree")
        out[pos] = coeff
    return out


def terms_from_coefficients(coeffs: CoefficientVector, threshold_ratio: float = 0.0) -> dict:
    """Sparse term dictionary from a labeled coefficient vector."""
    out = {}
    mags = np.abs(coeffs.values)
    cut = threshold_ratio * (mags.max() if mags.size else 0.0)
    for j in np.flatnonzero(mags > cut):
        mi = coeffs.column_index[j]
        key = _key(*((coeffs.variable_labels[v], e) for v, e in mi.items()))
        out[key] = float(coeffs.values[j])
    return out


class _RollCache:
    def __init__(self, arrays: dict):
        self.arrays = arrays
        self.cache = {}

    def get(self, comp, off):
        item = (comp, off)
        if item not in self.cache:
            base = self.arrays[comp]
            if isinstance(off, tuple):
                self.cache[item] = np.roll(base, (-off[0], -off[1]), axis=(0, 1))
            else:
                self.cache[item] = np.roll(base, -off)
        return self.cache[item]


def _accumulate(terms: dict, rolls: _RollCache, shape) -> np.ndarray:
    out = np.zeros(shape)
    for key, coeff in terms.items():
        if not key:
            out += coeff
            continue
        prod = None
        for lab, power in key:
            comp, off = lab if isinstance(lab, tuple) and isinstance(lab[0], str) else (None, lab)
            factor = rolls.get(comp, off)
            factor = factor if power == 1 else factor**power
            prod = factor.copy() if prod is None else prod * factor
        out += coeff * prod
    return out


def stencil_rhs(terms, terms_v: dict | None = None):
    """Cyclic polynomial model: the same local equation applied at every index.

    ``terms`` uses the data-matrix label conventions. For two-component
    states pass the u-equation in ``terms`` and the v-equation in
    ``terms_v``. Returns a callable usable with
    :func:`cyclearn.dynamics.integrate`.
    """

    def rhs(state):
        if isinstance(state, State1D):
            rolls = _RollCache({None: state.values})
            return State1D(_accumulate(terms, rolls, state.values.shape))
        if isinstance(state, State2D):
            rolls = _RollCache({None: state.values})
            return State2D(_accumulate(terms, rolls, state.values.shape), state.grid_spacing)
        if isinstance(state, TwoComponentState):
            if terms_v is None:
                raise ValueError("two-component states need terms_v")
            rolls = _RollCache({"u": state.u.values, "v": state.v.values})
            h = state.u.grid_spacing
            return TwoComponentState(
                State2D(_accumulate(terms, rolls, state.u.values.shape), h),
                State2D(_accumulate(terms_v, rolls, state.v.values.shape), h),
            )
        raise TypeError(f"unsupported state type {type(state).__name__}")

    return rhs


# Noise radii used by the reference experiments. Lorenz 96 is keyed by
# (block size, burst count) then Gaussian noise variance; Gray-Scott by
# (f, k) with one radius per component.
_LORENZ_SIGMA = {
    (25, 2): {0.002: 0.3515, 0.001: 0.3607, 0.0005: 0.3380},
    (25, 4): {0.002: 0.53575, 0.001: 0.5074, 0.0005: 0.5002},
    (45, 4): {0.002: 0.4075, 0.001: 0.7143, 0.0005: 0.6888},
}
_BURGERS_SIGMA = 26.3609
_GRAYSCOTT_SIGMA = {
    (0.055, 0.063): (5.5707e-5, 5.2655e-5),
    (0.026, 0.053): (6.3055e-5, 6.0194e-5),
    (0.018, 0.051): (6.3321e-5, 6.0579e-5),
}


def _lookup_float_key(table: dict, key, tol: float = 1e-12):
    for cand, value in table.items():
        if np.allclose(cand, key, rtol=0.0, atol=tol):
            return value
    raise ValueError(f"no default noise radius recorded for {key!r}")


def default_sigma(system: str, params: dict, block_size: int | None = None,
                  bursts: int | None = None, noise_level: float | None = None):
    """Reference noise radius for a configuration, where one is recorded."""
    if system == "burgers2d":
        return _BURGERS_SIGMA
    if system == "grayscott":
        return _lookup_float_key(_GRAYSCOTT_SIGMA, (params["f"], params["k"]))
    if system == "lorenz96":
        table = _LORENZ_SIGMA.get((block_size, bursts))
        if table is None:
            raise ValueError(
                f"no default noise radius for block={block_size}, bursts={bursts}"
            )
        return _lookup_float_key(table, noise_level)
    raise ValueError(f"unknown system {system!r}")


def default_config(system: str, example: int = 1) -> dict:
    """Reference experiment configuration as a plain JSON-able dict."""
    if system == "lorenz96":
        block, bursts = {1: (25, 2), 2: (25, 4), 3: (45, 4)}[example]
        return {
            "system": "lorenz96",
            "n": 128,
            "params": default_params("lorenz96"),
            "bursts": bursts,
            "dt_fine": 5e-5,
            "record_times": [0.0, 1e-2],
            "noise": {"kind": "gaussian", "level": 0.002, "seed": 0},
            "block_size": block,
            "block_origin": None,
            "radius": 10,
            "degree": 3,
            "sigma": None,
            "solver": {"gamma": None, "gamma_scale": 0.05, "mu": 1.0, "max_iters": 100000, "tol": 1e-8},
            "seed": 2026,
            "comparison": None,
        }
    if system == "burgers2d":
        return {
            "system": "burgers2d",
            "n": 128,
            "params": default_params("burgers2d"),
            "bursts": 4,
            "dt_fine": 5e-8,
            "record_times": [0.0, 1e-5],
            "noise": {"kind": "none", "level": 0.0, "seed": 0},
            "block_size": 7,
            # keep the block in the noise-dominated corner, away from the bump
            "block_origin": [8, 8],
            "radius": 2,
            "degree": 2,
            "sigma": None,
            "solver": {"gamma": None, "gamma_scale": 0.05, "mu": 1.0, "max_iters": 100000, "tol": 1e-8},
            "seed": 2026,
            "comparison": None,
        }
    if system == "grayscott":
        f, k = {1: (0.055, 0.063), 2: (0.026, 0.053), 3: (0.018, 0.051)}[example]
        params = default_params("grayscott")
        params.update({"f": f, "k": k})
        return {
            "system": "grayscott",
            "n": 128,
            "params": params,
            "bursts": 3,
            "dt_fine": 1e-6,
            "record_times": [0.0, 1e-5],
            "noise": {"kind": "none", "level": 0.0, "seed": 0},
            "block_size": 7,
            # straddle the edge of the seeded region: the v-component then
            # takes both of its levels inside the block, which separates the
            # near-collinear products of v-variables
            "block_origin": [43, 60],
            "radius": 1,
            "degree": 3,
            "sigma": None,
            # tiny noise radius relative to ||V||: small gamma and strong
            # relaxation cut the iteration count several-fold
            "solver": {
                "gamma": None,
                "gamma_scale": 0.002,
                "mu": 1.8,
                "max_iters": 200000,
                "tol": 1e-9,
            },
            "seed": 2026,
            "comparison": None,
        }
    raise ValueError(f"unknown system {system!r}")


def aggregate_grayscott_parameters(terms_u: dict, terms_v: dict, h: float = 1.0) -> dict:
    """Recover (r_u, r_v, f, k) from learned stencil coefficients.

    The diffusion rates come from a least-squares fit of the eight neighbor
    coefficients against the 9-point Laplacian weights; f is the constant
    term of the u-equation and k closes the v-equation center balance.
    """
    edge_w = 2.0 / (3.0 * h**2)
    corner_w = 1.0 / (6.0 * h**2)
    center_w = -10.0 / (3.0 * h**2)

    def fit_rate(terms: dict, comp: str) -> float:
        num = 0.0
        den = 0.0
        for off in EDGE_OFFSETS:
            num += terms.get(_key(((comp, off), 1)), 0.0) * edge_w
            den += edge_w**2
        for off in CORNER_OFFSETS:
            num += terms.get(_key(((comp, off), 1)), 0.0) * corner_w
            den += corner_w**2
        return num / den

    r_u = fit_rate(terms_u, "u")
    r_v = fit_rate(terms_v, "v")
    f = terms_u.get((), 0.0)
    center_v = terms_v.get(_key((("v", (0, 0)), 1)), 0.0)
    k = -(center_v - r_v * center_w) - f
    return {"r_u": r_u, "r_v": r_v, "f": f, "k": k}
