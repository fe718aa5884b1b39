"""Factor-number selection: penalised criteria with stability tuning, and
an eigenvalue-ratio rule.

Six information criteria trade the averaged tail eigenvalue mass of the
spectral density (or of the lag-0 covariance in the restricted model) against
a penalty scaled by a constant c. The constant is tuned by re-running the
selection over a ladder of nested sub-panels and picking the second interval
of c where the selections stop varying. The ratio rule simply maximises the
eigengap ratio of consecutive frequency-summed eigenvalues.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .panel import TimeSeriesPanel, sample_acv
from .spectral import default_bandwidth, spectral_matrices

_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class FactorNumberSelection:
    method: str  # "ic" | "er"
    model_kind: str  # "unrestricted" | "restricted"
    q_hat: int
    q_max: int
    ic_variant: int | None = None
    c_grid: np.ndarray | None = None
    q_by_c: np.ndarray | None = None  # full-sample selection per c
    s_of_c: np.ndarray | None = None  # subsample selection variance per c
    c_hat: float | None = None
    er_curve: np.ndarray | None = None  # ratio per candidate 1..q_max
    stability_warning: str | None = None


def eigenvalue_summary(
    panel: TimeSeriesPanel, model_kind: str, m: int | None = None
) -> tuple[np.ndarray, int]:
    """Per-index eigenvalue summary used by all selection rules.

    Unrestricted: eigenvalues of the spectral density averaged over the
    Fourier grid. Restricted: eigenvalues of the lag-0 sample covariance.
    Returns the descending summary and the bandwidth actually used (0 when
    restricted).
    """
    if model_kind == "restricted":
        cov = sample_acv(panel, 0).at(0)
        vals = np.linalg.eigvalsh((cov + cov.T) / 2.0)[::-1]
        return vals, 0
    if model_kind != "unrestricted":
        raise DimensionError(f"unknown model kind {model_kind!r}")
    if m is None:
        m = default_bandwidth(panel.n)
    m = min(m, panel.n - 1)
    acv = sample_acv(panel, m)
    mats = spectral_matrices(acv, m)
    vals = np.linalg.eigvalsh(mats)[:, ::-1]
    return vals.mean(axis=0), m


def _penalty(variant: int, model_kind: str, n: int, p: int, m: int) -> float:
    if model_kind == "restricted":
        if variant in (1, 2, 4, 5):
            return (n + p) / (n * p) * math.log(n * p / (n + p))
        if variant in (3, 6):
            low = min(n, p)
            return math.log(low) / low
        raise DimensionError(f"criterion variant {variant} outside 1..6")
    base = min(p, m**2, math.sqrt(n / m))
    if variant in (1, 4):
        return (m**-2 + math.sqrt(m / n) + 1.0 / p) * math.log(base)
    if variant in (2, 5):
        return base**-0.5
    if variant in (3, 6):
        return math.log(base) / base
    raise DimensionError(f"criterion variant {variant} outside 1..6")


def ic_value(
    eigen_summary: np.ndarray,
    b: int,
    c: float,
    variant: int,
    model_kind: str,
    n: int,
    p: int,
    m: int,
) -> float:
    """One criterion evaluation at candidate factor number ``b``."""
    if b < 0 or b > p:
        raise DimensionError(f"candidate {b} outside 0..{p}")
    tail = float(np.sum(eigen_summary[b:])) / p
    if variant >= 4:
        tail = math.log(max(tail, _TINY))
    return tail + b * c * _penalty(variant, model_kind, n, p, m)


def _argmin_over_b(
    eigen_summary: np.ndarray,
    c_grid: np.ndarray,
    variant: int,
    model_kind: str,
    n: int,
    p: int,
    m: int,
    q_max: int,
) -> np.ndarray:
    """Selected factor number per c, ties broken toward smaller candidates."""
    bs = np.arange(q_max + 1)
    tails = np.array(
        [float(np.sum(eigen_summary[b:])) / p for b in bs]
    )
    if variant >= 4:
        tails = np.log(np.maximum(tails, _TINY))
    pen = _penalty(variant, model_kind, n, p, m)
    values = tails[None, :] + c_grid[:, None] * bs[None, :] * pen
    return np.argmin(values, axis=1)


def default_q_max(n: int, p: int) -> int:
    return min(50, int(math.isqrt(min(n - 1, p))))


def _subsample_schedule(n: int, p: int, levels: int = 10) -> list[tuple[int, int]]:
    step = n // 20
    out = []
    for level in range(1, levels + 1):
        n_l = n - (levels - level) * step
        p_l = int(math.floor(3 * p / 4 + level * p / 40))
        out.append((n_l, p_l))
    return out


def select_factor_number_ic(
    panel: TimeSeriesPanel,
    model_kind: str = "unrestricted",
    variant: int = 5,
    q_max: int | None = None,
    c_max: float = 3.0,
    grid_size: int = 200,
) -> FactorNumberSelection:
    """Criterion-based selection with the constant tuned on nested sub-panels.

    For every c on the grid the criterion is minimised on each of ten nested
    sub-panels; the variance of those ten selections traces out stable
    intervals, and the estimate is read off at the start of the second
    zero-variance interval (the first one is the degenerate small-c regime).
    """
    n, p = panel.n, panel.p
    schedule = _subsample_schedule(n, p)
    if any(n_l < 3 or p_l < 1 for n_l, p_l in schedule):
        raise DimensionError("panel too small for the subsample schedule")
    q_bar = default_q_max(n, p) if q_max is None else q_max
    q_bar = max(0, min(q_bar, min(p_l for _, p_l in schedule) - 1))
    c_grid = np.linspace(c_max / grid_size, c_max, grid_size)

    selections = np.empty((len(schedule), grid_size), dtype=int)
    for idx, (n_l, p_l) in enumerate(schedule):
        sub = panel.window(p_l, n_l)
        summary, m_l = eigenvalue_summary(sub, model_kind)
        selections[idx] = _argmin_over_b(
            summary, c_grid, variant, model_kind, n_l, p_l, m_l, q_bar
        )

    s_of_c = selections.var(axis=0, ddof=1)
    q_by_c = selections[-1]  # the last ladder level is the full panel

    zero = s_of_c <= 1e-12
    runs: list[tuple[int, int]] = []
    start = None
    for i, flag in enumerate(zero):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, grid_size - 1))

    warning = None
    if len(runs) >= 2:
        c_idx = runs[1][0]
    elif len(runs) == 1:
        c_idx = runs[0][1]
        warning = "single stability interval; used its last grid point"
    else:
        c_idx = int(np.argmin(s_of_c))
        warning = "no zero-variance interval; used the minimum-variance point"

    return FactorNumberSelection(
        method="ic",
        model_kind=model_kind,
        q_hat=int(q_by_c[c_idx]),
        q_max=q_bar,
        ic_variant=variant,
        c_grid=c_grid,
        q_by_c=q_by_c,
        s_of_c=s_of_c,
        c_hat=float(c_grid[c_idx]),
        stability_warning=warning,
    )


def select_factor_number_er(
    panel: TimeSeriesPanel,
    model_kind: str = "unrestricted",
    q_max: int | None = None,
) -> FactorNumberSelection:
    """Eigenvalue-ratio selection: maximise the consecutive eigengap ratio."""
    n, p = panel.n, panel.p
    q_bar = default_q_max(n, p) if q_max is None else q_max
    q_bar = max(1, q_bar)
    if q_bar >= p:
        raise DimensionError(f"candidate bound {q_bar} must be below p = {p}")
    summary, _ = eigenvalue_summary(panel, model_kind)
    # Ratios of summed eigenvalues equal ratios of averaged ones.
    curve = summary[:q_bar] / np.maximum(summary[1 : q_bar + 1], _TINY)
    q_hat = int(np.argmax(curve)) + 1
    return FactorNumberSelection(
        method="er",
        model_kind=model_kind,
        q_hat=q_hat,
        q_max=q_bar,
        er_curve=curve,
    )
