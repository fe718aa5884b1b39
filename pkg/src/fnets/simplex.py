"""Dense two-phase primal simplex for small linear programs.

Solves  min c'x  subject to  A x <= b,  x >= 0  on a full tableau. Rows with a
negative right-hand side are negated and given artificial variables; phase one
drives the artificials to zero, phase two optimises the true objective. The
entering rule is steepest (most negative reduced cost); after a run of
degenerate pivots it falls back to Bland's rule, which cannot cycle.

Problem sizes here are a few hundred rows/columns at most, so a dense tableau
is both simple and fast enough.
"""
from __future__ import annotations

import numpy as np

from .errors import SolverError

_RC_TOL = 1e-9  # reduced-cost tolerance
_PIV_TOL = 1e-9  # smallest acceptable pivot element
_STALL_LIMIT = 30  # degenerate pivots before switching to Bland's rule


def _pivot(tableau: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])
    basis[row] = col


def _iterate(
    tableau: np.ndarray,
    basis: np.ndarray,
    allowed: np.ndarray,
    max_iter: int,
) -> None:
    """Run simplex iterations in place until optimal.

    ``allowed`` masks columns permitted to enter the basis (artificials are
    barred in phase two). Raises on unboundedness or iteration exhaustion.
    """
    m = tableau.shape[0] - 1
    stall = 0
    use_bland = False
    last_obj = tableau[-1, -1]
    for _ in range(max_iter):
        costs = tableau[-1, :-1]
        candidates = np.where(allowed & (costs < -_RC_TOL))[0]
        if candidates.size == 0:
            return
        col = candidates[0] if use_bland else candidates[np.argmin(costs[candidates])]
        column = tableau[:m, col]
        rhs = tableau[:m, -1]
        rows = np.where(column > _PIV_TOL)[0]
        if rows.size == 0:
            raise SolverError("objective unbounded below")
        ratios = rhs[rows] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + _PIV_TOL]
        # Bland tie-break: leave the variable with the smallest column label.
        row = ties[np.argmin(basis[ties])]
        _pivot(tableau, basis, row, col)
        # The cell stores minus the objective, so progress means it increases.
        obj = tableau[-1, -1]
        if obj > last_obj + 1e-12:
            stall = 0
            use_bland = False
        else:
            stall += 1
            if stall >= _STALL_LIMIT:
                use_bland = True
        last_obj = obj
    raise SolverError("simplex iteration limit reached")


def solve_lp(c: np.ndarray, a_ub: np.ndarray, b_ub: np.ndarray) -> np.ndarray:
    """Minimise ``c @ x`` over ``a_ub @ x <= b_ub``, ``x >= 0``.

    Returns the optimal x. Raises :class:`SolverError` when infeasible or
    unbounded.
    """
    c = np.asarray(c, dtype=float)
    a = np.asarray(a_ub, dtype=float)
    b = np.asarray(b_ub, dtype=float).copy()
    m, n = a.shape
    if c.shape != (n,) or b.shape != (m,):
        raise SolverError("inconsistent LP dimensions")

    neg = b < 0
    a = np.where(neg[:, None], -a, a)
    b = np.abs(b)
    n_art = int(neg.sum())

    # Columns: n structural | m slack/surplus | n_art artificial | rhs.
    width = n + m + n_art + 1
    tableau = np.zeros((m + 1, width))
    tableau[:m, :n] = a
    tableau[:m, -1] = b
    slack_sign = np.where(neg, -1.0, 1.0)
    tableau[np.arange(m), n + np.arange(m)] = slack_sign
    basis = np.empty(m, dtype=int)
    basis[~neg] = n + np.where(~neg)[0]
    art_cols = n + m + np.arange(n_art)
    art_rows = np.where(neg)[0]
    tableau[art_rows, art_cols] = 1.0
    basis[neg] = art_cols

    max_iter = 200 * (m + n) + 1000

    if n_art > 0:
        # Phase one: minimise the sum of artificials.
        tableau[-1, art_cols] = 1.0
        tableau[-1] -= tableau[art_rows].sum(axis=0)
        allowed = np.ones(width - 1, dtype=bool)
        _iterate(tableau, basis, allowed, max_iter)
        scale = max(1.0, float(np.max(b)) if m else 1.0)
        if -tableau[-1, -1] > 1e-7 * scale:
            raise SolverError("infeasible constraint system")
        # Drive any artificial still in the basis out, or drop its row.
        keep = np.ones(m, dtype=bool)
        for row in range(m):
            if basis[row] < n + m:
                continue
            pivot_cols = np.where(np.abs(tableau[row, : n + m]) > _PIV_TOL)[0]
            if pivot_cols.size:
                _pivot(tableau, basis, row, pivot_cols[0])
            else:
                keep[row] = False
        if not np.all(keep):
            tableau = np.vstack([tableau[:m][keep], tableau[-1]])
            basis = basis[keep]
            m = int(keep.sum())

    # Phase two on the true objective.
    tableau = np.hstack([tableau[:, : n + m], tableau[:, -1:]])
    tableau[-1, :] = 0.0
    tableau[-1, :n] = c
    for row in range(m):
        coef = tableau[-1, basis[row]]
        if coef != 0.0:
            tableau[-1] -= coef * tableau[row]
    allowed = np.ones(n + m, dtype=bool)
    _iterate(tableau, basis, allowed, max_iter)

    x = np.zeros(n + m)
    x[basis[:m]] = tableau[:m, -1]
    return x[:n]


def solve_l1_box(a_mat: np.ndarray, rhs: np.ndarray, widths: np.ndarray) -> np.ndarray:
    """Minimise |v|_1 subject to |a_mat @ v - rhs| <= widths elementwise.

    Split-variable reformulation v = v+ - v-; both parts non-negative.
    """
    a_mat = np.asarray(a_mat, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    widths = np.asarray(widths, dtype=float)
    k, d = a_mat.shape
    a_ub = np.block([[a_mat, -a_mat], [-a_mat, a_mat]])
    b_ub = np.concatenate([rhs + widths, widths - rhs])
    x = solve_lp(np.ones(2 * d), a_ub, b_ub)
    return x[:d] - x[d:]


def solve_l1_general(f_mat: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Minimise |v|_1 subject to f_mat @ v <= h (v unrestricted in sign)."""
    f_mat = np.asarray(f_mat, dtype=float)
    h = np.asarray(h, dtype=float)
    d = f_mat.shape[1]
    a_ub = np.hstack([f_mat, -f_mat])
    x = solve_lp(np.ones(2 * d), a_ub, h)
    return x[:d] - x[d:]
