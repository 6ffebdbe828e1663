"""Douglas-Rachford splitting for noise-robust Legendre basis pursuit.

Solves min ||c||_1 subject to ||A c - V||_2 <= sigma by splitting over an
auxiliary variable w ~ A c: one proximal step handles the l1 norm and the
sigma-ball constraint in closed form, the other projects onto the coupling
set {(w, c) : w = A c} through a Cholesky factorization of (I + A^T A)
computed once up front. Also provides support debiasing and a plain
least-squares baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .dictionary import CoefficientVector, DictionaryMatrix

__all__ = [
    "BasisPursuitProblem",
    "SolverConfig",
    "Solution",
    "soft_threshold",
    "project_ball",
    "prox_f1",
    "prox_f2",
    "ConstraintProjection",
    "douglas_rachford",
    "default_gamma",
    "debias",
    "least_squares_baseline",
]


@dataclass(frozen=True)
class BasisPursuitProblem:
    """(A, V, sigma) for the inexact-constraint basis pursuit problem."""

    dictionary: DictionaryMatrix
    velocity: np.ndarray
    sigma: float

    def __post_init__(self):
        object.__setattr__(
            self,
            "velocity",
            np.asarray(getattr(self.velocity, "values", self.velocity), dtype=float).ravel(),
        )
        if self.velocity.shape[0] != self.dictionary.n_rows:
            raise ValueError("row counts of dictionary and velocity differ")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")


@dataclass(frozen=True)
class SolverConfig:
    """Douglas-Rachford parameters.

    gamma=None picks gamma_scale * ||A^T V||_inf at solve time; the
    iteration converges for any gamma > 0, scaling to the problem
    magnitude just stabilizes iteration counts. Problems with a very small
    noise radius relative to ||V|| converge faster with a smaller
    gamma_scale and mu close to 2. init='velocity' starts from w = V,
    c = 0.
    """

    gamma: float | None = None
    gamma_scale: float = 0.05
    mu: float = 1.0
    max_iters: int = 100_000
    tol: float = 1e-8
    init: str = "velocity"

    def __post_init__(self):
        if self.gamma is not None and not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self.gamma_scale > 0:
            raise ValueError("gamma_scale must be positive")
        if not 0.0 < self.mu <= 2.0:
            raise ValueError("mu must lie in (0, 2]")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.init != "velocity":
            raise ValueError("unknown initialization policy")


@dataclass(frozen=True)
class Solution:
    """Solver output in the (normalized) Legendre basis."""

    coefficients: CoefficientVector
    w: np.ndarray
    iterations: int
    residual: float
    converged: bool
    gamma: float
    last_step: float

    def to_record(self):
        """JSON-ready summary with labeled nonzero coefficients."""
        return {
            "coefficients": {
                label: value for label, value in self.coefficients.nonzero_terms()
            },
            "iterations": self.iterations,
            "residual": self.residual,
            "converged": self.converged,
            "gamma": self.gamma,
            "last_step": self.last_step,
        }


def soft_threshold(c: np.ndarray, gamma: float) -> np.ndarray:
    """Componentwise shrink toward zero by gamma; exact prox of gamma*||.||_1."""
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    c = np.asarray(c, dtype=float)
    return np.sign(c) * np.maximum(np.abs(c) - gamma, 0.0)


def project_ball(w: np.ndarray, center: np.ndarray, sigma: float) -> np.ndarray:
    """Euclidean projection onto the ball of radius sigma around center."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    w = np.asarray(w, dtype=float)
    center = np.asarray(center, dtype=float)
    diff = w - center
    dist = np.linalg.norm(diff)
    if dist <= sigma:
        return w.copy()
    if sigma == 0.0:
        return center.copy()
    return center + (sigma / dist) * diff


def prox_f1(w, c, gamma: float, velocity, sigma: float):
    """Joint prox of the l1 norm plus the sigma-ball indicator.

    The two halves are independent: the ball projection acts on w, the
    soft threshold on c.
    """
    return project_ball(w, velocity, sigma), soft_threshold(c, gamma)


class ConstraintProjection:
    """Cached projection onto {(w, c) : w = A c}.

    Computes z = (I + A^T A)^{-1} (c + A^T w) and returns (A z, z). The
    Cholesky factorization is done once up front on whichever Gram matrix
    is smaller: (I + A^T A) directly, or (I + A A^T) for wide matrices
    through the matrix-inversion identity
    (I + A^T A)^{-1} r = r - A^T (I + A A^T)^{-1} A r.
    """

    def __init__(self, A: np.ndarray):
        A = np.asarray(A, dtype=float)
        if not np.isfinite(A).all():
            raise ValueError("dictionary contains non-finite entries")
        self.A = A
        m, n = A.shape
        self._wide = n > m
        gram = A @ A.T if self._wide else A.T @ A
        gram[np.diag_indices_from(gram)] += 1.0
        try:
            self._factor = scipy.linalg.cho_factor(gram, lower=True)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - SPD by construction
            raise ValueError("Cholesky factorization of I + A^T A failed") from exc

    def __call__(self, w: np.ndarray, c: np.ndarray):
        r = c + self.A.T @ w
        if self._wide:
            z = r - self.A.T @ scipy.linalg.cho_solve(self._factor, self.A @ r)
        else:
            z = scipy.linalg.cho_solve(self._factor, r)
        return self.A @ z, z


def prox_f2(w, c, A: np.ndarray):
    """One-shot prox of the coupling-set indicator (factors A per call)."""
    return ConstraintProjection(np.asarray(A, dtype=float))(
        np.asarray(w, dtype=float), np.asarray(c, dtype=float)
    )


def default_gamma(A: np.ndarray, velocity: np.ndarray, gamma_scale: float = 0.05) -> float:
    scale = float(np.abs(A.T @ velocity).max(initial=0.0))
    return gamma_scale * scale if scale > 0 else 1.0


def douglas_rachford(problem: BasisPursuitProblem, config: SolverConfig = SolverConfig()) -> Solution:
    """Run the relaxed Douglas-Rachford iteration on a basis pursuit problem.

    Iterates x <- (1 - mu/2) x + (mu/2) rprox_2(rprox_1(x)) on x = (w, c),
    with rprox(x) = 2 prox(x) - x, then applies the first prox once more to
    produce the reported (w, c). Stops when the relative change of the c
    iterate falls below tol; hitting max_iters yields converged=False
    rather than an exception.
    """
    A = problem.dictionary.entries
    V = problem.velocity
    sigma = problem.sigma
    gamma = config.gamma if config.gamma is not None else default_gamma(A, V, config.gamma_scale)
    project = ConstraintProjection(A)

    wt = V.copy()
    ct = np.zeros(A.shape[1])
    converged = False
    step_norm = np.inf
    iterations = 0
    keep = 1.0 - config.mu / 2.0
    mix = config.mu / 2.0
    for iterations in range(1, config.max_iters + 1):
        w1, c1 = prox_f1(wt, ct, gamma, V, sigma)
        rw1 = 2.0 * w1 - wt
        rc1 = 2.0 * c1 - ct
        w2, c2 = project(rw1, rc1)
        rw2 = 2.0 * w2 - rw1
        rc2 = 2.0 * c2 - rc1
        wt_next = keep * wt + mix * rw2
        ct_next = keep * ct + mix * rc2
        step_norm = float(np.linalg.norm(ct_next - ct))
        wt, ct = wt_next, ct_next
        if step_norm < config.tol * max(float(np.linalg.norm(ct)), 1.0):
            converged = True
            break

    w, c = prox_f1(wt, ct, gamma, V, sigma)
    residual = float(np.linalg.norm(A @ c - V))
    coeffs = CoefficientVector(
        c, "legendre", problem.dictionary.column_index, problem.dictionary.variable_labels
    )
    return Solution(coeffs, w, iterations, residual, converged, float(gamma), step_norm)


def debias(A_monomial: DictionaryMatrix, velocity, support) -> CoefficientVector:
    """Unpenalized least-squares refit restricted to the support columns."""
    V = np.asarray(getattr(velocity, "values", velocity), dtype=float).ravel()
    support = np.asarray(sorted(int(s) for s in support), dtype=int)
    out = np.zeros(A_monomial.n_columns)
    if support.size:
        if support.size > A_monomial.n_rows:
            raise ValueError("support larger than the number of rows")
        sub = A_monomial.entries[:, support]
        rank = np.linalg.matrix_rank(sub)
        if rank < support.size:
            labels = [A_monomial.column_index[j].label(A_monomial.variable_labels) for j in support]
            raise ValueError(f"support columns are linearly dependent: {labels}")
        coef, *_ = np.linalg.lstsq(sub, V, rcond=None)
        out[support] = coef
    return CoefficientVector(out, A_monomial.basis, A_monomial.column_index, A_monomial.variable_labels)


def least_squares_baseline(A: DictionaryMatrix, velocity) -> CoefficientVector:
    """Minimum-norm least-squares solution of min ||A c - V||_2."""
    V = np.asarray(getattr(velocity, "values", velocity), dtype=float).ravel()
    coef, *_ = np.linalg.lstsq(A.entries, V, rcond=None)
    return CoefficientVector(coef, A.basis, A.column_index, A.variable_labels)
