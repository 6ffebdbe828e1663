"""Cyclic-permutation data matrices and polynomial dictionaries.

The data matrix collects all cyclic shifts of one snapshot (independent
row/column shifts in 2D), optionally localized to a stencil of radius r
around the center variable and restricted to rows whose center lies in a
sub-block. Dictionaries evaluate either plain monomials or tensorized,
L2-normalized Legendre polynomials on those rows; columns are labeled by
multi-indices in graded lexicographic order so that the two bases share
one column layout.

Offsets are 0-indexed everywhere. A restricted matrix carries signed
stencil offsets ordered ``[0, 1, .., r, -r, .., -1]`` per axis, which is
the cyclic order of the corresponding columns in the full matrix.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import State1D, State2D, TwoComponentState

__all__ = [
    "MultiIndex",
    "CyclicDataMatrix",
    "ScalingTransform",
    "DictionaryMatrix",
    "VelocityVector",
    "CoefficientVector",
    "CapacityError",
    "ScalingError",
    "DegenerateColumnError",
    "DegenerateScalingError",
    "multi_indices",
    "cyclic_data_1d",
    "cyclic_data_2d",
    "multicomponent_data",
    "localize_restrict",
    "localized_data_1d",
    "localized_data_2d",
    "localized_multicomponent_data",
    "stack_data",
    "fit_scaling",
    "fit_component_scaling",
    "monomial_dictionary",
    "legendre_dictionary",
    "normalize_columns",
    "stack_bursts",
    "legendre_to_monomial",
    "dictionary_from_array",
    "label_text",
]


class CapacityError(ValueError):
    """Requested dictionary exceeds the configured column cap."""


class ScalingError(ValueError):
    """Scaled data falls outside [-1, 1]."""


class DegenerateColumnError(ValueError):
    """A dictionary column has zero norm."""


class DegenerateScalingError(ValueError):
    """Constant data admits no affine map onto [-1, 1]."""


# default guard against accidentally huge dictionaries
COLUMN_CAP = 10_000_000


@dataclass(frozen=True)
class MultiIndex:
    """Exponent vector of one candidate monomial over the local variables."""

    exponents: tuple

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(int(e) for e in self.exponents))
        if any(e < 0 for e in self.exponents):
            raise ValueError("exponents must be nonnegative")

    @property
    def total_degree(self) -> int:
        return sum(self.exponents)

    def items(self):
        """Nonzero (variable position, power) pairs in variable order."""
        return tuple((v, e) for v, e in enumerate(self.exponents) if e > 0)

    def label(self, variable_labels) -> str:
        if self.total_degree == 0:
            return "1"
        parts = []
        for v, e in self.items():
            text = label_text(variable_labels[v])
            parts.append(text if e == 1 else f"{text}^{e}")
        return "*".join(parts)


def label_text(label) -> str:
    """Canonical text for one local variable label."""
    if isinstance(label, tuple) and len(label) == 2 and isinstance(label[0], str):
        comp, off = label
        return f"{comp}[{_offset_text(off)}]"
    return f"u[{_offset_text(label)}]"


def _offset_text(off) -> str:
    if isinstance(off, tuple):
        return ",".join(str(int(o)) for o in off)
    return str(int(off))


@dataclass(frozen=True)
class CyclicDataMatrix:
    """Rows of (possibly restricted) cyclic permutations of one snapshot."""

    rows: np.ndarray
    variable_labels: tuple
    centers: tuple
    burst_id: int | None = None
    time: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "rows", np.asarray(self.rows, dtype=float))
        object.__setattr__(self, "variable_labels", tuple(self.variable_labels))
        object.__setattr__(self, "centers", tuple(self.centers))
        if self.rows.ndim != 2:
            raise ValueError("rows must be a matrix")
        if self.rows.shape[1] != len(self.variable_labels):
            raise ValueError("one label per column required")
        if self.rows.shape[0] != len(self.centers):
            raise ValueError("one center per row required")

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def n_vars(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class ScalingTransform:
    """Affine map u -> a*u + b applied to a whole data matrix."""

    a: float
    b: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("scale factor a must be positive")

    @classmethod
    def identity(cls) -> "ScalingTransform":
        return cls(1.0, 0.0)

    def apply(self, values: np.ndarray) -> np.ndarray:
        return self.a * np.asarray(values, dtype=float) + self.b


@dataclass(frozen=True)
class DictionaryMatrix:
    """Candidate functions evaluated on data rows, one column per multi-index."""

    entries: np.ndarray
    column_index: tuple
    variable_labels: tuple
    basis: str
    column_norms: np.ndarray | None = None
    # ScalingTransform, or a {component: ScalingTransform} mapping for
    # multi-component data scaled per component
    scaling: object | None = None

    def __post_init__(self):
        object.__setattr__(self, "entries", np.asarray(self.entries, dtype=float))
        object.__setattr__(self, "column_index", tuple(self.column_index))
        object.__setattr__(self, "variable_labels", tuple(self.variable_labels))
        if self.basis not in ("monomial", "legendre"):
            raise ValueError(f"unknown basis {self.basis!r}")
        if self.entries.shape[1] != len(self.column_index):
            raise ValueError("one multi-index per column required")

    @property
    def n_rows(self) -> int:
        return self.entries.shape[0]

    @property
    def n_columns(self) -> int:
        return self.entries.shape[1]

    def column_labels(self):
        return [mi.label(self.variable_labels) for mi in self.column_index]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.column_labels())
            for row in self.entries:
                writer.writerow([repr(x) for x in row])


@dataclass(frozen=True)
class VelocityVector:
    """Velocity samples aligned row-for-row with a dictionary matrix."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float).ravel())

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["velocity"])
            for x in self.values:
                writer.writerow([repr(x)])


@dataclass(frozen=True)
class CoefficientVector:
    """Coefficients over a dictionary's columns, tagged with their basis."""

    values: np.ndarray
    basis: str
    column_index: tuple
    variable_labels: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float).ravel())
        object.__setattr__(self, "column_index", tuple(self.column_index))
        object.__setattr__(self, "variable_labels", tuple(self.variable_labels))
        if self.values.shape[0] != len(self.column_index):
            raise ValueError("one coefficient per column required")

    def support(self, threshold_ratio: float = 1e-4) -> np.ndarray:
        """Indices with |c_j| above threshold_ratio * max|c|."""
        mags = np.abs(self.values)
        peak = mags.max() if mags.size else 0.0
        if peak == 0.0:
            return np.empty(0, dtype=int)
        return np.flatnonzero(mags > threshold_ratio * peak)

    def top_indices(self, s: int) -> np.ndarray:
        """The s largest-magnitude indices; ties broken by lower index."""
        order = np.argsort(-np.abs(self.values), kind="stable")
        return np.sort(order[:s])

    def nonzero_terms(self, threshold_ratio: float = 0.0):
        out = []
        for j in np.flatnonzero(np.abs(self.values) > threshold_ratio * max(np.abs(self.values).max(), 1e-300)):
            out.append((self.column_index[j].label(self.variable_labels), float(self.values[j])))
        return out


def _stencil_offsets(radius: int):
    return list(range(0, radius + 1)) + list(range(-radius, 0))


def cyclic_data_1d(state: State1D, burst_id: int | None = None, time: float | None = None) -> CyclicDataMatrix:
    """n x n row-circulant matrix: row i is the state shifted left by i."""
    u = state.values
    n = u.shape[0]
    idx = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    return CyclicDataMatrix(u[idx], tuple(range(n)), tuple(range(n)), burst_id, time)


def cyclic_data_2d(state: State2D, burst_id: int | None = None, time: float | None = None) -> CyclicDataMatrix:
    """n^2 x n^2 matrix: one vectorized grid per (row shift, column shift) pair.

    Rows are ordered lexicographically in the shift pair; each row holds the
    shifted grid in row-major order, so its first entry is the grid value at
    the shift itself (the row's center).
    """
    u = state.values
    n = u.shape[0]
    r = np.arange(n)
    # value at row (g, t), column (a, b) is u[(a+g) % n, (b+t) % n]
    gi = (r[:, None, None, None] + r[None, None, :, None]) % n
    tj = (r[None, :, None, None] + r[None, None, None, :]) % n
    rows = u[gi, tj].reshape(n * n, n * n)
    labels = tuple((a, b) for a in range(n) for b in range(n))
    centers = tuple((g, t) for g in range(n) for t in range(n))
    return CyclicDataMatrix(rows, labels, centers, burst_id, time)


def multicomponent_data(state: TwoComponentState, burst_id: int | None = None, time: float | None = None) -> CyclicDataMatrix:
    """Two-component data matrix: u-columns then v-columns, same shift per row."""
    du = cyclic_data_2d(state.u, burst_id, time)
    dv = cyclic_data_2d(state.v, burst_id, time)
    labels = tuple(("u", lab) for lab in du.variable_labels) + tuple(
        ("v", lab) for lab in dv.variable_labels
    )
    return CyclicDataMatrix(np.hstack([du.rows, dv.rows]), labels, du.centers, burst_id, time)


def _full_structure(labels):
    """Classify a full (unrestricted) matrix layout from its labels."""
    if all(isinstance(lab, (int, np.integer)) for lab in labels):
        n = len(labels)
        if tuple(labels) != tuple(range(n)):
            raise ValueError("localize_restrict expects an unrestricted data matrix")
        return "1d", n, None
    if all(isinstance(lab, tuple) and len(lab) == 2 and isinstance(lab[0], (int, np.integer)) for lab in labels):
        n = math.isqrt(len(labels))
        if n * n != len(labels):
            raise ValueError("2D label grid must be square")
        return "2d", n, None
    if all(isinstance(lab, tuple) and isinstance(lab[0], str) for lab in labels):
        comps = []
        for comp, _ in labels:
            if comp not in comps:
                comps.append(comp)
        per = len(labels) // len(comps)
        n = math.isqrt(per)
        if n * n * len(comps) != len(labels):
            raise ValueError("component label grids must be square")
        return "multi", n, tuple(comps)
    raise ValueError("unrecognized variable labels")


def _check_radius(radius: int, n: int):
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if 2 * radius + 1 > n:
        raise ValueError(f"stencil of radius {radius} does not fit in a domain of size {n}")


def localize_restrict(data: CyclicDataMatrix, radius: int, block) -> CyclicDataMatrix:
    """Localize columns to a stencil and restrict rows to block centers.

    Column offsets are kept within ``radius`` of the center variable (the
    (2r+1)-point window per axis in 2D, per component for two-component
    data). Rows are kept when their center index lies in ``block``; stencil
    values around the block come from the periodic halo of the full domain.
    """
    kind, n, comps = _full_structure(data.variable_labels)
    _check_radius(radius, n)
    offs = _stencil_offsets(radius)

    if kind == "1d":
        centers = sorted(int(b) for b in block)
        if not centers:
            raise ValueError("block must be nonempty")
        if len(set(centers)) != len(centers) or centers[0] < 0 or centers[-1] >= n:
            raise ValueError("block indices must be unique and inside the domain")
        row_pos = np.array(centers)
        col_pos = np.array([o % n for o in offs])
        rows = data.rows[np.ix_(row_pos, col_pos)]
        return CyclicDataMatrix(rows, tuple(offs), tuple(centers), data.burst_id, data.time)

    centers = sorted((int(i), int(j)) for i, j in block)
    if not centers:
        raise ValueError("block must be nonempty")
    if len(set(centers)) != len(centers) or any(
        i < 0 or i >= n or j < 0 or j >= n for i, j in centers
    ):
        raise ValueError("block indices must be unique and inside the domain")
    row_pos = np.array([i * n + j for i, j in centers])
    pair_offsets = [(di, dj) for di in offs for dj in offs]
    base_cols = np.array([(di % n) * n + (dj % n) for di, dj in pair_offsets])

    if kind == "2d":
        rows = data.rows[np.ix_(row_pos, base_cols)]
        return CyclicDataMatrix(rows, tuple(pair_offsets), tuple(centers), data.burst_id, data.time)

    col_pos = np.concatenate([base_cols + c * n * n for c in range(len(comps))])
    labels = tuple((comp, off) for comp in comps for off in pair_offsets)
    rows = data.rows[np.ix_(row_pos, col_pos)]
    return CyclicDataMatrix(rows, labels, tuple(centers), data.burst_id, data.time)


def localized_data_1d(state: State1D, radius: int, block, burst_id: int | None = None, time: float | None = None) -> CyclicDataMatrix:
    """Restricted/localized 1D data matrix built directly from the snapshot.

    Equal to ``localize_restrict(cyclic_data_1d(state), radius, block)``
    without materializing the full n x n matrix.
    """
    u = state.values
    n = u.shape[0]
    _check_radius(radius, n)
    centers = sorted(int(b) for b in block)
    if not centers or len(set(centers)) != len(centers) or centers[0] < 0 or centers[-1] >= n:
        raise ValueError("block indices must be unique and inside the domain")
    offs = _stencil_offsets(radius)
    idx = (np.array(centers)[:, None] + np.array(offs)[None, :]) % n
    return CyclicDataMatrix(u[idx], tuple(offs), tuple(centers), burst_id, time)


def _localized_grid_rows(values: np.ndarray, radius: int, centers, offs):
    n = values.shape[0]
    ci = np.array([c[0] for c in centers])
    cj = np.array([c[1] for c in centers])
    di = np.array([o[0] for o in offs])
    dj = np.array([o[1] for o in offs])
    return values[(ci[:, None] + di[None, :]) % n, (cj[:, None] + dj[None, :]) % n]


def _checked_block_2d(block, n):
    centers = sorted((int(i), int(j)) for i, j in block)
    if not centers or len(set(centers)) != len(centers) or any(
        i < 0 or i >= n or j < 0 or j >= n for i, j in centers
    ):
        raise ValueError("block indices must be unique and inside the domain")
    return centers


def localized_data_2d(state: State2D, radius: int, block, burst_id: int | None = None, time: float | None = None) -> CyclicDataMatrix:
    """Restricted/localized single-component 2D data matrix (direct build)."""
    n = state.n
    _check_radius(radius, n)
    centers = _checked_block_2d(block, n)
    offs1 = _stencil_offsets(radius)
    offs = [(di, dj) for di in offs1 for dj in offs1]
    rows = _localized_grid_rows(state.values, radius, centers, offs)
    return CyclicDataMatrix(rows, tuple(offs), tuple(centers), burst_id, time)


def localized_multicomponent_data(state: TwoComponentState, radius: int, block, burst_id: int | None = None, time: float | None = None) -> CyclicDataMatrix:
    """Restricted/localized two-component data matrix (direct build)."""
    n = state.n
    _check_radius(radius, n)
    centers = _checked_block_2d(block, n)
    offs1 = _stencil_offsets(radius)
    offs = [(di, dj) for di in offs1 for dj in offs1]
    rows_u = _localized_grid_rows(state.u.values, radius, centers, offs)
    rows_v = _localized_grid_rows(state.v.values, radius, centers, offs)
    labels = tuple(("u", off) for off in offs) + tuple(("v", off) for off in offs)
    return CyclicDataMatrix(np.hstack([rows_u, rows_v]), labels, tuple(centers), burst_id, time)


def stack_data(parts) -> CyclicDataMatrix:
    """Row-wise concatenation of data matrices sharing one variable layout."""
    parts = list(parts)
    if not parts:
        raise ValueError("nothing to stack")
    labels = parts[0].variable_labels
    for p in parts[1:]:
        if p.variable_labels != labels:
            raise ValueError("variable labels differ between parts")
    rows = np.vstack([p.rows for p in parts])
    centers = tuple(c for p in parts for c in p.centers)
    return CyclicDataMatrix(rows, labels, centers, None, None)


def _range_transform(values: np.ndarray) -> ScalingTransform:
    lo = float(values.min())
    hi = float(values.max())
    if not np.isfinite(lo) or not np.isfinite(hi):
        raise ValueError("data matrix contains non-finite entries")
    if hi <= lo:
        raise DegenerateScalingError("constant data cannot be scaled onto [-1, 1]")
    return ScalingTransform(2.0 / (hi - lo), -(hi + lo) / (hi - lo))


def fit_scaling(data: CyclicDataMatrix) -> ScalingTransform:
    """Single affine map sending the matrix's value range onto [-1, 1]."""
    if data.rows.size == 0:
        raise ValueError("data matrix is empty")
    return _range_transform(data.rows)


def _component_of(label):
    if isinstance(label, tuple) and len(label) == 2 and isinstance(label[0], str):
        return label[0]
    return None


def fit_component_scaling(data: CyclicDataMatrix):
    """One affine map per component, each onto [-1, 1].

    Components with very different magnitudes (such as reaction-diffusion
    concentrations) would be crushed into a sliver of [-1, 1] by a single
    global map, which destroys the bounded-orthonormal structure of the
    Legendre dictionary. For single-component data this reduces to
    {None: fit_scaling(data)}.
    """
    comps = {}
    for pos, lab in enumerate(data.variable_labels):
        comps.setdefault(_component_of(lab), []).append(pos)
    return {
        comp: _range_transform(data.rows[:, positions])
        for comp, positions in comps.items()
    }


def _scaling_vectors(scaling, labels):
    """Per-variable (a, b) arrays from a scalar or per-component scaling."""
    if isinstance(scaling, ScalingTransform):
        n = len(labels)
        return np.full(n, scaling.a), np.full(n, scaling.b)
    a = np.empty(len(labels))
    b = np.empty(len(labels))
    for pos, lab in enumerate(labels):
        tr = scaling[_component_of(lab)]
        a[pos] = tr.a
        b[pos] = tr.b
    return a, b


def multi_indices(n_vars: int, degree: int, column_cap: int = COLUMN_CAP):
    """All multi-indices of total degree <= degree, graded lexicographic."""
    count = math.comb(n_vars + degree, degree)
    if count > column_cap:
        raise CapacityError(
            f"dictionary would have {count} columns (cap {column_cap})"
        )
    out = []
    for d in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(n_vars), d):
            exps = [0] * n_vars
            for v in combo:
                exps[v] += 1
            out.append(MultiIndex(tuple(exps)))
    return tuple(out)


def _evaluate_tensor_columns(tables, column_index, n_rows):
    """Evaluate product-form columns: prod over vars of tables[power][:, var].

    Columns are grouped by exponent shape so each group is one vectorized
    broadcast product.
    """
    A = np.empty((n_rows, len(column_index)))
    groups = {}
    for pos, mi in enumerate(column_index):
        nz = mi.items()
        shape = tuple(e for _, e in nz)
        groups.setdefault(shape, []).append((pos, tuple(v for v, _ in nz)))
    for shape, entries in groups.items():
        positions = np.array([pos for pos, _ in entries])
        if not shape:
            A[:, positions] = 1.0
            continue
        block = None
        for slot, e in enumerate(shape):
            vs = np.array([vars_[slot] for _, vars_ in entries])
            t = tables[e][:, vs]
            block = t.copy() if block is None else block * t
        A[:, positions] = block
    return A


def monomial_dictionary(data: CyclicDataMatrix, degree: int, column_cap: int = COLUMN_CAP) -> DictionaryMatrix:
    """All monomials of total degree <= degree in the local variables."""
    if degree < 1:
        raise ValueError("degree must be at least 1")
    cols = multi_indices(data.n_vars, degree, column_cap)
    tables = {e: data.rows**e for e in range(1, degree + 1)}
    entries = _evaluate_tensor_columns(tables, cols, data.n_rows)
    return DictionaryMatrix(entries, cols, data.variable_labels, "monomial")


# L2(dmu)-normalized Legendre polynomials on [-1, 1], dmu = dx/2, by degree;
# coefficient arrays are indexed by power of x.
_SQ3 = math.sqrt(3.0)
_SQ5 = math.sqrt(5.0)
_SQ7 = math.sqrt(7.0)
_LEGENDRE_COEFFS = {
    1: np.array([0.0, _SQ3]),
    2: np.array([-_SQ5 / 2.0, 0.0, 3.0 * _SQ5 / 2.0]),
    3: np.array([0.0, -3.0 * _SQ7 / 2.0, 0.0, 5.0 * _SQ7 / 2.0]),
}


def _legendre_univariate(x: np.ndarray, degree: int) -> np.ndarray:
    c = _LEGENDRE_COEFFS[degree]
    out = np.full_like(x, c[-1])
    for k in range(len(c) - 2, -1, -1):
        out = out * x + c[k]
    return out


def legendre_dictionary(
    data: CyclicDataMatrix,
    degree: int,
    scaling,
    column_cap: int = COLUMN_CAP,
) -> DictionaryMatrix:
    """Tensorized Legendre dictionary evaluated on affinely scaled data.

    Univariate factors: 1, sqrt(3) x, (sqrt(5)/2)(3x^2-1),
    (sqrt(7)/2)(5x^3-3x); a column is the product of the factors selected
    by its multi-index. Column order matches :func:`monomial_dictionary`.
    ``scaling`` is a :class:`ScalingTransform` or a per-component mapping
    as returned by :func:`fit_component_scaling`.
    """
    if degree not in (1, 2, 3):
        raise ValueError("Legendre dictionary supports degree 1, 2, or 3")
    a, b = _scaling_vectors(scaling, data.variable_labels)
    x = a * data.rows + b
    overshoot = float(np.abs(x).max(initial=0.0)) - 1.0
    if overshoot > 1e-9:
        raise ScalingError(f"scaled data leaves [-1, 1] by {overshoot:.3e}")
    cols = multi_indices(data.n_vars, degree, column_cap)
    tables = {e: _legendre_univariate(x, e) for e in range(1, degree + 1)}
    entries = _evaluate_tensor_columns(tables, cols, data.n_rows)
    return DictionaryMatrix(entries, cols, data.variable_labels, "legendre", scaling=scaling)


def normalize_columns(A: DictionaryMatrix) -> DictionaryMatrix:
    """Scale every column to unit Euclidean norm, recording the norms."""
    norms = np.linalg.norm(A.entries, axis=0)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        mi = A.column_index[zero[0]]
        raise DegenerateColumnError(f"column {mi.label(A.variable_labels)} has zero norm")
    combined = norms if A.column_norms is None else A.column_norms * norms
    return replace(A, entries=A.entries / norms, column_norms=combined)


def stack_bursts(parts):
    """Row-wise concatenation of (DictionaryMatrix, velocity) parts.

    Parts must share the column index, basis, and scaling, and must not be
    normalized yet (normalize after stacking so norms stay global).
    """
    parts = list(parts)
    if not parts:
        raise ValueError("nothing to stack")
    first = parts[0][0]
    for A, _ in parts:
        if A.column_index != first.column_index:
            raise ValueError("column indices differ between parts")
        if A.variable_labels != first.variable_labels:
            raise ValueError("variable labels differ between parts")
        if A.basis != first.basis:
            raise ValueError("bases differ between parts")
        if A.scaling != first.scaling:
            raise ValueError("scaling transforms differ between parts")
        if A.column_norms is not None:
            raise ValueError("stack parts before normalizing columns")
    entries = np.vstack([A.entries for A, _ in parts])
    vel = np.concatenate(
        [np.asarray(getattr(v, "values", v), dtype=float).ravel() for _, v in parts]
    )
    stacked = replace(first, entries=entries)
    return stacked, VelocityVector(vel)


def _affine_power_coeffs(a: float, b: float, k: int) -> np.ndarray:
    """Coefficients of (a*u + b)^k as a polynomial in u."""
    out = np.zeros(k + 1)
    for j in range(k + 1):
        out[j] = math.comb(k, j) * a**j * b ** (k - j)
    return out


def _univariate_in_original(a: float, b: float, degree: int) -> np.ndarray:
    """Coefficients of the normalized Legendre factor composed with a*u+b."""
    c = _LEGENDRE_COEFFS[degree]
    out = np.zeros(degree + 1)
    for k, ck in enumerate(c):
        if ck != 0.0:
            out[: k + 1] += ck * _affine_power_coeffs(a, b, k)
    return out


def legendre_to_monomial(c_L, A: DictionaryMatrix) -> CoefficientVector:
    """Map normalized-Legendre coefficients to monomials in the raw variables.

    Undoes the recorded column normalization, expands every Legendre column
    as a polynomial in the scaled variables, composes with x = a*u + b, and
    collects monomial coefficients. The returned polynomial is pointwise
    equal to the Legendre expansion on the original data.
    """
    if A.basis != "legendre":
        raise ValueError("expected a Legendre dictionary")
    if A.scaling is None:
        raise ValueError("dictionary carries no scaling transform")
    values = np.asarray(getattr(c_L, "values", c_L), dtype=float).ravel()
    if values.shape[0] != A.n_columns:
        raise ValueError("coefficient length does not match the dictionary")
    if A.column_norms is not None:
        values = values / A.column_norms
    a_vec, b_vec = _scaling_vectors(A.scaling, A.variable_labels)

    position = {mi.exponents: pos for pos, mi in enumerate(A.column_index)}
    out = np.zeros(A.n_columns)
    n_vars = len(A.variable_labels)
    for j in np.flatnonzero(values):
        # expand the tensor product one variable at a time
        terms = {(0,) * n_vars: values[j]}
        for v, e in A.column_index[j].items():
            poly = _univariate_in_original(a_vec[v], b_vec[v], e)
            new_terms = {}
            for exps, coef in terms.items():
                for power, pc in enumerate(poly):
                    if pc == 0.0:
                        continue
                    key = list(exps)
                    key[v] += power
                    key = tuple(key)
                    new_terms[key] = new_terms.get(key, 0.0) + coef * pc
            terms = new_terms
        for exps, coef in terms.items():
            out[position[exps]] += coef
    return CoefficientVector(out, "monomial", A.column_index, A.variable_labels)


def dictionary_from_array(entries: np.ndarray, basis: str = "legendre") -> DictionaryMatrix:
    """Wrap a raw matrix as a dictionary with one synthetic variable per column.

    Intended for solving generic basis pursuit problems where no polynomial
    structure exists; columns are labeled by unit multi-indices.
    """
    entries = np.asarray(entries, dtype=float)
    n = entries.shape[1]
    cols = []
    for j in range(n):
        exps = [0] * n
        exps[j] = 1
        cols.append(MultiIndex(tuple(exps)))
    return DictionaryMatrix(
        entries, tuple(cols), tuple(range(n)), basis, scaling=ScalingTransform.identity()
    )
