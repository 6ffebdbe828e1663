"""Empirical checks of the recovery theory and the published error metrics.

The coherence experiment samples u uniformly on [-1, 1]^n, builds the full
(unnormalized, unrestricted) cyclic Legendre dictionary of order p, and
compares all pairwise column inner products and squared-norm deviations
against the bound 12 p^3 3^p sqrt(n log n). Inner products are invariant
under translating both multi-indices by a common offset, so the maximum
over all pairs is reached among pairs whose first column involves offset
zero; only those representative columns are multiplied against the full
matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dictionary import (
    ScalingTransform,
    cyclic_data_1d,
    legendre_dictionary,
)
from .dynamics import State1D

__all__ = [
    "CoherenceReport",
    "RecoveryMetrics",
    "coherence_bound",
    "coherence_failure_probability",
    "coherence_trial",
    "coherence_study",
    "sample_complexity",
    "coefficient_error",
    "solution_error",
    "support_check",
]


@dataclass(frozen=True)
class CoherenceReport:
    """Outcome of one or more coherence trials at fixed (n, p)."""

    n: int
    p: int
    max_offdiag_inner: float
    max_norm_deviation: float
    bound: float
    trials: int
    violations: int
    mean_norm_sq: float
    norm_sq_stderr: float | None = None

    def __post_init__(self):
        if self.violations > self.trials:
            raise ValueError("violations cannot exceed trials")


@dataclass(frozen=True)
class RecoveryMetrics:
    """Published error metrics for one learned system."""

    e_c: float
    e_u: float | None
    support_exact: bool

    def __post_init__(self):
        if self.e_c < 0:
            raise ValueError("e_c must be nonnegative")
        if self.e_c == 0.0 and not self.support_exact:
            raise ValueError("zero coefficient error implies exact support")


def coherence_bound(n: int, p: int) -> float:
    """12 p^3 3^p sqrt(n log n)."""
    return 12.0 * p**3 * 3.0**p * math.sqrt(n * math.log(n))


def coherence_failure_probability(n: int, p: int) -> float:
    """(e/p + e/(2 p^2))^(2p) * n^(-2p/11); may exceed 1 for small sizes."""
    base = math.e / p + math.e / (2.0 * p * p)
    return base ** (2 * p) * n ** (-2.0 * p / 11.0)


def _check_hypothesis(n: int, p: int):
    if n < 2:
        raise ValueError("n must be at least 2")
    if p < 1:
        raise ValueError("p must be at least 1")
    if 2 * p * p > n:
        raise ValueError(f"hypothesis 2 p^2 <= n violated: p={p}, n={n}")


def _cyclic_legendre_matrix(u: np.ndarray, p: int):
    data = cyclic_data_1d(State1D(u))
    return legendre_dictionary(data, p, ScalingTransform.identity())


def _orbit_representatives(column_index):
    """Columns whose multi-index is constant or involves offset zero.

    Translating both members of a column pair by a common shift leaves the
    inner product unchanged and maps columns to columns, so every pair is
    equivalent to one whose first member is such a representative.
    """
    return [
        j
        for j, mi in enumerate(column_index)
        if mi.total_degree == 0 or mi.exponents[0] > 0
    ]


def coherence_trial(n: int, p: int, seed: int) -> CoherenceReport:
    """One Monte Carlo draw: build the dictionary and test both bounds."""
    _check_hypothesis(n, p)
    rng = np.random.default_rng(seed)
    u = rng.uniform(-1.0, 1.0, size=n)
    A = _cyclic_legendre_matrix(u, p)
    entries = A.entries

    norms_sq = np.einsum("ij,ij->j", entries, entries)
    max_norm_dev = float(np.abs(norms_sq - n).max())

    reps = _orbit_representatives(A.column_index)
    gram = entries[:, reps].T @ entries
    for row, j in enumerate(reps):
        gram[row, j] = 0.0  # drop the diagonal entry of each representative
    max_offdiag = float(np.abs(gram).max())

    bound = coherence_bound(n, p)
    violated = int(max_offdiag > bound or max_norm_dev > bound)
    return CoherenceReport(
        n, p, max_offdiag, max_norm_dev, bound, 1, violated, float(norms_sq.mean())
    )


def coherence_study(n: int, p: int, trials: int, seed: int = 0) -> CoherenceReport:
    """Aggregate independent trials; each trial derives its own RNG stream."""
    if trials < 1:
        raise ValueError("need at least one trial")
    streams = np.random.SeedSequence(seed).spawn(trials)
    reports = [
        coherence_trial(n, p, np.random.default_rng(s).integers(2**63))
        for s in streams
    ]
    means = np.array([r.mean_norm_sq for r in reports])
    stderr = float(means.std(ddof=1) / math.sqrt(trials)) if trials > 1 else None
    return CoherenceReport(
        n,
        p,
        max(r.max_offdiag_inner for r in reports),
        max(r.max_norm_deviation for r in reports),
        coherence_bound(n, p),
        trials,
        sum(r.violations for r in reports),
        float(means.mean()),
        stderr,
    )


def sample_complexity(n: int, p: int, s: int):
    """Burst-count lower bound 144 p^6 9^p s^2 log(n) / n.

    Returns the bound and whether a single sample already satisfies it.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if p < 1 or s < 1:
        raise ValueError("p and s must be at least 1")
    k_min = 144.0 * p**6 * 9.0**p * s**2 * math.log(n) / n
    return k_min, k_min <= 1.0


def _as_array(c) -> np.ndarray:
    return np.asarray(getattr(c, "values", c), dtype=float).ravel()


def coefficient_error(c_exact, c_learned) -> float:
    """Relative l2 error between coefficient vectors on one index space."""
    exact = _as_array(c_exact)
    learned = _as_array(c_learned)
    if exact.shape != learned.shape:
        raise ValueError("coefficient vectors live on different index spaces")
    denom = np.linalg.norm(exact)
    if denom == 0.0:
        raise ValueError("relative error undefined for a zero exact vector")
    return float(np.linalg.norm(exact - learned) / denom)


def solution_error(u_exact, u_learned) -> float:
    """Relative l2 error between two evolved fields at the same horizon."""
    exact = np.asarray(u_exact, dtype=float)
    learned = np.asarray(u_learned, dtype=float)
    if exact.shape != learned.shape:
        raise ValueError("fields have different shapes")
    denom = np.linalg.norm(exact)
    if denom == 0.0:
        raise ValueError("relative error undefined for a zero exact field")
    return float(np.linalg.norm(exact - learned) / denom)


def support_check(c_learned, true_support, s: int | None = None, sigma: float | None = None,
                  c_min: float | None = None, d_assumed: float = 1.0):
    """Compare the s largest learned coefficients against the true support.

    Ties are broken toward the lower column index. The second return value
    reports the small-noise condition sigma < c_min / (2 d s) with the
    configurable constant d_assumed (the universal constant is unknown);
    it is None when sigma or c_min is not supplied.
    """
    values = _as_array(c_learned)
    true_set = {int(j) for j in true_support}
    if s is None:
        s = len(true_set)
    if s != len(true_set):
        raise ValueError("s must equal the true support size")
    order = np.argsort(-np.abs(values), kind="stable")
    matches = set(int(j) for j in order[:s]) == true_set
    condition = None
    if sigma is not None and c_min is not None:
        condition = bool(sigma < c_min / (2.0 * d_assumed * s))
    return matches, condition
