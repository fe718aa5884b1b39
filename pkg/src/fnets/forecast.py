"""Multi-step forecasting of the common and idiosyncratic components.

The common component is predicted through the static-representation formula:
cross-covariance at the horizon times the pseudo-inverse projection built
from the leading eigenpairs of the common lag-0 covariance. The idiosyncratic
component iterates the fitted VAR, feeding forecasts back in as they become
available. Sample means are re-added at the end.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DimensionError
from .panel import AcvSequence, TimeSeriesPanel
from .var import VarFit


@dataclass(frozen=True)
class ForecastResult:
    horizon: int
    forecast: np.ndarray  # (horizon, p) combined, means re-added
    common_insample: np.ndarray  # (p, n)
    common_forecast: np.ndarray  # (horizon, p)
    idio_insample: np.ndarray  # (p, n)
    idio_forecast: np.ndarray  # (horizon, p)
    r_used: int
    mean_x: np.ndarray  # (p,)
    rank_warning: str | None = None


def forecast_common_restricted(
    acv_chi: AcvSequence,
    r: int,
    panel: TimeSeriesPanel,
    horizon: int,
) -> tuple[np.ndarray, np.ndarray, int, str | None]:
    """In-sample common component and its horizon forecasts.

    Returns (insample p x n, forecasts horizon x p, retained rank, warning).
    At horizon zero the estimator reduces to the orthogonal projection on the
    leading eigenvectors, which is what the in-sample matrix holds.
    """
    p, n = panel.p, panel.n
    if r < 0 or r > p:
        raise DimensionError(f"factor number {r} outside 0..{p}")
    if horizon < 0:
        raise DimensionError("horizon must be non-negative")
    if horizon > acv_chi.max_lag:
        raise DimensionError(
            f"horizon {horizon} beyond stored common autocovariance lag {acv_chi.max_lag}"
        )
    if r == 0:
        return (
            np.zeros((p, n)),
            np.zeros((horizon, p)),
            0,
            None,
        )
    cov0 = acv_chi.at(0)
    vals, vecs = np.linalg.eigh((cov0 + cov0.T) / 2.0)
    vals = vals[::-1]
    vecs = vecs[:, ::-1]
    lead = vals[:r]
    if lead[0] <= 0.0:
        raise DataError("common covariance has no positive eigenvalue to retain")
    keep = lead > 1e-10 * lead[0]
    warning = None
    r_used = int(keep.sum())
    if r_used < r:
        warning = f"dropped {r - keep.sum()} near-zero eigenvalues; rank reduced to {r_used}"
    basis = vecs[:, :r][:, keep]
    inv_vals = 1.0 / lead[keep]
    insample = basis @ (basis.T @ panel.values)
    fc = np.empty((horizon, p))
    last = panel.values[:, -1]
    weights = inv_vals * (basis.T @ last)
    for a in range(1, horizon + 1):
        fc[a - 1] = acv_chi.at(-a) @ (basis @ weights)
    return insample, fc, r_used, warning


def forecast_idio(fit: VarFit, xi_insample: np.ndarray, horizon: int) -> np.ndarray:
    """Iterated best linear predictor of the VAR component, horizon x p."""
    if horizon < 1:
        raise DimensionError("horizon must be at least 1")
    p, n = xi_insample.shape
    d = fit.order
    if n < d:
        raise DimensionError(f"need at least {d} in-sample points, have {n}")
    lag_mats = fit.lag_matrices()
    preds: list[np.ndarray] = []
    for a in range(1, horizon + 1):
        acc = np.zeros(p)
        for lag in range(1, d + 1):
            step = a - lag
            if step >= 1:
                acc += lag_mats[lag - 1] @ preds[step - 1]
            else:
                acc += lag_mats[lag - 1] @ xi_insample[:, n + step - 1]
        preds.append(acc)
    return np.vstack(preds)


def combine_forecasts(
    common_insample: np.ndarray,
    common_fc: np.ndarray,
    idio_insample: np.ndarray,
    idio_fc: np.ndarray,
    mean_x: np.ndarray,
    r_used: int,
    rank_warning: str | None = None,
) -> ForecastResult:
    """Stack the component forecasts and restore the sample means."""
    if common_fc.shape != idio_fc.shape:
        raise DimensionError("component forecasts must have equal shapes")
    if common_insample.shape != idio_insample.shape:
        raise DimensionError("in-sample components must have equal shapes")
    if mean_x.shape != (common_fc.shape[1],):
        raise DimensionError("mean vector length must match the variable count")
    horizon = common_fc.shape[0]
    forecast = common_fc + idio_fc + mean_x[None, :]
    return ForecastResult(
        horizon=horizon,
        forecast=forecast,
        common_insample=common_insample,
        common_forecast=common_fc,
        idio_insample=idio_insample,
        idio_forecast=idio_fc,
        r_used=r_used,
        mean_x=np.asarray(mean_x, dtype=float),
        rank_warning=rank_warning,
    )
