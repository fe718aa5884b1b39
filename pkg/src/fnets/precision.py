"""Innovation and long-run precision matrices with their partial correlations.

The innovation precision is estimated column-by-column as the l1-minimal
solution of a sup-norm-constrained linear system (a CLIME-type programme),
optionally with entry-adaptive constraint widths, then symmetrised by keeping
the smaller-modulus entry of each mirror pair. The long-run precision follows
by congruence with the VAR lag polynomial evaluated at one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DataError, DimensionError, SolverError
from .simplex import solve_l1_box, solve_l1_general
from .var import VarFit


@dataclass(frozen=True)
class PrecisionFit:
    """Precision estimates and the derived partial-correlation matrices."""

    innovation_precision: np.ndarray  # symmetric p x p
    eta: float
    adaptive: bool
    longrun_precision: np.ndarray | None = None
    lag_polynomial_at_one: np.ndarray | None = None
    partial_cor: np.ndarray | None = None
    longrun_partial_cor: np.ndarray | None = None

    @property
    def p(self) -> int:
        return self.innovation_precision.shape[0]


def _check_symmetric(mat: np.ndarray, what: str) -> np.ndarray:
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DimensionError(f"{what} must be square")
    if not np.all(np.isfinite(mat)):
        raise DataError(f"{what} contains non-finite values")
    if np.max(np.abs(mat - mat.T)) > 1e-8 * max(1.0, np.max(np.abs(mat))):
        raise DataError(f"{what} is not symmetric")
    return mat


def symmetrise_min_modulus(mat: np.ndarray) -> np.ndarray:
    """For each mirror pair keep the smaller-modulus entry (ties keep the upper)."""
    mat = np.asarray(mat, dtype=float)
    upper = mat
    lower = mat.T
    pick_upper = np.abs(upper) <= np.abs(lower)
    chosen = np.where(pick_upper, upper, lower)
    out = np.triu(chosen) + np.triu(chosen, 1).T
    return out


def clime(gamma: np.ndarray, eta: float) -> PrecisionFit:
    """Constrained l1-minimal inverse of ``gamma`` at constraint width ``eta``."""
    gamma = _check_symmetric(gamma, "covariance estimate")
    if eta <= 0:
        raise DimensionError("constraint width must be positive")
    p = gamma.shape[0]
    raw = np.empty((p, p))
    widths = np.full(p, eta)
    eye = np.eye(p)
    for j in range(p):
        try:
            raw[:, j] = solve_l1_box(gamma, eye[:, j], widths)
        except SolverError as err:
            raise SolverError(f"precision column {j + 1}: {err}") from err
    return PrecisionFit(
        innovation_precision=symmetrise_min_modulus(raw), eta=eta, adaptive=False
    )


def aclime(gamma: np.ndarray, eta2: float, n: int) -> PrecisionFit:
    """Adaptive two-step variant with entry-dependent constraint widths.

    Step one bounds each column's residual by a width proportional to the
    column's own diagonal unknown, linearised by moving that term to the
    constraint matrix; the resulting diagonal estimates calibrate the widths
    of the second step.
    """
    gamma = _check_symmetric(gamma, "covariance estimate")
    p = gamma.shape[0]
    if p < 2:
        raise DimensionError("adaptive estimator needs p >= 2")
    if n < 2:
        raise DimensionError("adaptive estimator needs n >= 2")
    if eta2 <= 0:
        raise DimensionError("constraint width must be positive")
    diag = np.diag(gamma)
    if np.any(diag <= 0):
        raise DataError("covariance diagonal must be positive")
    star = gamma + np.eye(p) / n
    eta1 = 2.0 * math.sqrt(math.log(p) / n)
    eye = np.eye(p)

    step1_diag = np.empty(p)
    for j in range(p):
        bound = eta1 * np.maximum(diag, diag[j])
        shift = np.zeros((p, p))
        shift[:, j] = bound
        f_mat = np.vstack([star - shift, -(star + shift), -eye[j][None, :]])
        h = np.concatenate([eye[:, j], -eye[:, j], [-1e-10]])
        try:
            col = solve_l1_general(f_mat, h)
        except SolverError as err:
            raise SolverError(f"adaptive step 1, column {j + 1}: {err}") from err
        step1_diag[j] = col[j]

    cut = math.sqrt(n / math.log(p))
    trunc = np.where(
        np.abs(diag) <= cut, step1_diag, math.sqrt(math.log(p) / n)
    )

    raw = np.empty((p, p))
    for j in range(p):
        widths = eta2 * np.sqrt(diag * trunc[j])
        try:
            raw[:, j] = solve_l1_box(star, eye[:, j], widths)
        except SolverError as err:
            raise SolverError(f"adaptive step 2, column {j + 1}: {err}") from err
    return PrecisionFit(
        innovation_precision=symmetrise_min_modulus(raw), eta=eta2, adaptive=True
    )


def longrun_precision(fit: VarFit, precision: PrecisionFit) -> PrecisionFit:
    """Long-run precision 2*pi * A(1)' Delta A(1) with A(1) = I - sum of lags."""
    delta = _check_symmetric(precision.innovation_precision, "innovation precision")
    p = delta.shape[0]
    a_one = np.eye(p)
    for lag_mat in fit.lag_matrices():
        a_one = a_one - lag_mat
    omega = 2.0 * np.pi * a_one.T @ delta @ a_one
    omega = (omega + omega.T) / 2.0
    return replace(
        precision, longrun_precision=omega, lag_polynomial_at_one=a_one
    )


def partial_correlations(mat: np.ndarray) -> np.ndarray:
    """Negated scaled off-diagonals of a precision matrix, unit diagonal."""
    mat = _check_symmetric(mat, "precision matrix")
    d = np.diag(mat)
    if np.any(d <= 0):
        raise DataError("precision diagonal must be positive")
    scale = np.sqrt(np.outer(d, d))
    out = -mat / scale
    np.fill_diagonal(out, 1.0)
    return out


def with_partial_correlations(precision: PrecisionFit) -> PrecisionFit:
    """Fill both partial-correlation matrices on a completed precision fit.

    Estimated precision matrices are not forced positive definite; a matrix
    whose diagonal is not strictly positive has no partial correlations and
    the corresponding field stays unset rather than failing the whole fit.
    """
    pc = None
    if np.all(np.diag(precision.innovation_precision) > 0):
        pc = partial_correlations(precision.innovation_precision)
    lrpc = None
    if precision.longrun_precision is not None and np.all(
        np.diag(precision.longrun_precision) > 0
    ):
        lrpc = partial_correlations(precision.longrun_precision)
    return replace(precision, partial_cor=pc, longrun_partial_cor=lrpc)
