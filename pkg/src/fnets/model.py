"""End-to-end fitting pipeline and the serialised model document.

``fit`` chains the three estimation steps with all tuning procedures and
returns an in-memory model; ``to_document``/``from_document`` round-trip the
estimated quantities through a JSON schema at full double precision so that
forecasts recomputed from a saved document match in-process results bit for
bit.
"""
from __future__ import annotations

import datetime
import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, UsageError
from .factor_number import (
    FactorNumberSelection,
    select_factor_number_er,
    select_factor_number_ic,
)
from .forecast import (
    ForecastResult,
    combine_forecasts,
    forecast_common_restricted,
    forecast_idio,
)
from .panel import TimeSeriesPanel
from .precision import (
    PrecisionFit,
    aclime,
    clime,
    longrun_precision,
    with_partial_correlations,
)
from .spectral import (
    FactorAdjustment,
    default_bandwidth,
    factor_adjust_restricted,
    factor_adjust_unrestricted,
)
from .threshold_select import select_threshold
from .tuning import TuningResult, cv_delta, cv_var, ebic_var, eta_grid, lambda_grid
from .var import (
    VarFit,
    build_yule_walker,
    dantzig_lp,
    innovation_covariance,
    lasso_fista,
    threshold_matrix,
)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class FittedModel:
    panel: TimeSeriesPanel
    model_kind: str
    q_or_r: int
    bandwidth: int
    factor: FactorAdjustment
    var_fit: VarFit
    precision: PrecisionFit | None
    q_selection: FactorNumberSelection | None = None
    var_tuning: TuningResult | None = None
    eta_tuning: TuningResult | None = None
    seed: int = 111
    input_path: str | None = None

    @property
    def p(self) -> int:
        return self.panel.p

    @property
    def n(self) -> int:
        return self.panel.n


def _adjust(panel, model_kind, q, bandwidth, min_lag):
    lag = max(bandwidth, min_lag)
    if lag > panel.n - 1:
        raise DimensionError(
            f"bandwidth/lag depth {lag} too large for n = {panel.n}"
        )
    if model_kind == "restricted":
        return factor_adjust_restricted(panel, q, lag)
    return factor_adjust_unrestricted(panel, q, lag)


def fit(
    panel: TimeSeriesPanel,
    restricted: bool = False,
    q: int | None = None,
    q_method: str = "ic",
    ic_variant: int = 5,
    bandwidth: int | None = None,
    orders: tuple[int, ...] = (1,),
    method: str = "lasso",
    tuning: str = "cv",
    alpha: float = 0.0,
    n_folds: int = 1,
    path_length: int = 10,
    threshold: str | float = "off",
    lrpc: bool = True,
    lrpc_adaptive: bool = False,
    seed: int = 111,
    input_path: str | None = None,
) -> FittedModel:
    """Run factor adjustment, sparse VAR estimation and precision estimation.

    ``q`` pins the factor number; otherwise it is selected by the requested
    method. ``threshold`` is "off", "adaptive" or a literal value applied to
    the coefficient matrix. With ``lrpc`` the innovation and long-run
    precision matrices are estimated with the constraint width tuned by the
    divergence validation score.
    """
    model_kind = "restricted" if restricted else "unrestricted"
    if method not in ("lasso", "ds"):
        raise UsageError(f"unknown estimation method {method!r}")
    if tuning not in ("cv", "ebic"):
        raise UsageError(f"unknown tuning method {tuning!r}")
    m = default_bandwidth(panel.n) if bandwidth is None else bandwidth
    if m < 1 or m > panel.n - 1:
        raise DimensionError(f"bandwidth {m} outside 1..{panel.n - 1}")

    q_selection = None
    if q is None:
        if q_method == "ic":
            q_selection = select_factor_number_ic(
                panel, model_kind=model_kind, variant=ic_variant
            )
        elif q_method == "er":
            q_selection = select_factor_number_er(panel, model_kind=model_kind)
        else:
            raise UsageError(f"unknown factor-number method {q_method!r}")
        q_used = q_selection.q_hat
    else:
        if q < 0 or q > panel.p:
            raise DimensionError(f"factor number {q} outside 0..{panel.p}")
        q_used = q

    orders = tuple(sorted(set(int(o) for o in orders)))
    if not orders or orders[0] < 1:
        raise UsageError("candidate orders must be positive integers")
    factor = _adjust(panel, model_kind, q_used, m, max(orders))

    sys_top = build_yule_walker(factor.acv_xi, max(orders))
    grid = lambda_grid(sys_top, path_length, method)
    if tuning == "cv":
        var_tuning = cv_var(
            panel, model_kind, q_used, method, grid, orders, n_folds
        )
    else:
        var_tuning = ebic_var(
            panel, model_kind, q_used, method, grid, orders, alpha
        )
    d_hat = var_tuning.selected_order
    lam_hat = var_tuning.selected_lambda
    # The refit sees the whole sample, so the penalty tuned on the shorter
    # training segments is shrunk by the square-root sample-size ratio.
    lam_refit = lam_hat * var_tuning.refit_scale

    sys = build_yule_walker(factor.acv_xi, d_hat)
    if method == "lasso":
        var_fit = lasso_fista(sys, lam_refit)
    else:
        var_fit = dantzig_lp(sys, lam_refit)

    gamma_hat = innovation_covariance(factor.acv_xi, var_fit)

    t_value: float | None
    if threshold == "off":
        t_value = None
    elif threshold == "adaptive":
        if np.all(var_fit.beta == 0.0):
            t_value = 0.0
        else:
            t_value = select_threshold(
                var_fit.beta, panel.p * panel.p * d_hat
            ).threshold
    else:
        t_value = float(threshold)
        if t_value < 0:
            raise UsageError("threshold must be non-negative")

    var_fit = VarFit(
        order=var_fit.order,
        beta=var_fit.beta,
        method=var_fit.method,
        lam=var_fit.lam,
        innovation_cov=gamma_hat,
        threshold=t_value,
        objective_trace=var_fit.objective_trace,
        gram_clipped=var_fit.gram_clipped,
    )

    precision = None
    eta_tuning = None
    if lrpc:
        grid_eta = eta_grid(gamma_hat, path_length)
        eta_tuning = cv_delta(
            panel,
            model_kind,
            q_used,
            method,
            lam_hat,
            d_hat,
            grid_eta,
            n_folds,
            adaptive=lrpc_adaptive,
        )
        eta_hat = eta_tuning.selected_lambda * eta_tuning.refit_scale
        if lrpc_adaptive:
            prec = aclime(gamma_hat, eta_hat, panel.n)
        else:
            prec = clime(gamma_hat, eta_hat)
        prec = longrun_precision(var_fit, prec)
        precision = with_partial_correlations(prec)

    return FittedModel(
        panel=panel,
        model_kind=model_kind,
        q_or_r=q_used,
        bandwidth=m,
        factor=factor,
        var_fit=var_fit,
        precision=precision,
        q_selection=q_selection,
        var_tuning=var_tuning,
        eta_tuning=eta_tuning,
        seed=seed,
        input_path=input_path,
    )


def nonzero_report(model: FittedModel) -> tuple[int, int]:
    """Surviving coefficient count over the full parameter count."""
    beta = model.var_fit.beta
    if model.var_fit.threshold is not None:
        beta = threshold_matrix(beta, model.var_fit.threshold)
    return int(np.count_nonzero(beta)), beta.size


def report(model: FittedModel) -> str:
    """Human-readable fit summary."""
    lines = [
        "Factor-adjusted VAR model",
        f"n: {model.n}, p: {model.p}",
        f"Factor model: {model.model_kind}",
        f"Factor number: {model.q_or_r}",
    ]
    if model.q_selection is not None:
        method = model.q_selection.method
        lines.append(f"Factor number selection method: {method}")
        if method == "ic":
            lines.append(f"Information criterion: IC{model.q_selection.ic_variant}")
    lines += [
        f"Kernel bandwidth: {model.bandwidth}",
        f"VAR order: {model.var_fit.order}",
        f"VAR estimation method: {model.var_fit.method}",
    ]
    if model.var_tuning is not None:
        lines.append(f"Tuning method: {model.var_tuning.method}")
    t = model.var_fit.threshold
    lines.append(f"Threshold: {'none' if t is None else repr(float(t))}")
    nnz, total = nonzero_report(model)
    lines.append(f"Non-zero entries: {nnz}/{total}")
    lines.append(f"LRPC: {'true' if model.precision is not None else 'false'}")
    if model.precision is not None:
        lines.append(f"LRPC adaptive: {'true' if model.precision.adaptive else 'false'}")
    return "\n".join(lines) + "\n"


def _matrix(a: np.ndarray | None) -> list | None:
    return None if a is None else np.asarray(a, dtype=float).tolist()


def to_document(model: FittedModel) -> dict:
    """Serialisable description of the fitted model."""
    var_block = {
        "order": model.var_fit.order,
        "method": model.var_fit.method,
        "lambda": model.var_fit.lam,
        "beta": _matrix(model.var_fit.beta),
        "Gamma_hat": _matrix(model.var_fit.innovation_cov),
        "threshold": model.var_fit.threshold,
    }
    lrpc_block = None
    if model.precision is not None:
        lrpc_block = {
            "eta": model.precision.eta,
            "adaptive": model.precision.adaptive,
            "Delta": _matrix(model.precision.innovation_precision),
            "Omega": _matrix(model.precision.longrun_precision),
        }
    return {
        "schema_version": SCHEMA_VERSION,
        "model_kind": model.model_kind,
        "q_or_r": model.q_or_r,
        "bandwidth": model.bandwidth,
        "var": var_block,
        "lrpc": lrpc_block,
        "mean_x": model.panel.mean_x.tolist(),
        "provenance": {
            "seed": model.seed,
            "input": model.input_path,
            "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        },
    }


@dataclass(frozen=True)
class ModelDocument:
    """Loaded JSON model; enough to reproduce forecasts and networks."""

    model_kind: str
    q_or_r: int
    bandwidth: int
    var_fit: VarFit
    precision: PrecisionFit | None
    mean_x: np.ndarray
    seed: int
    input_path: str | None


def from_document(doc: dict) -> ModelDocument:
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise UsageError(
            f"unsupported model schema {doc.get('schema_version')!r}; expected {SCHEMA_VERSION}"
        )
    var_block = doc["var"]
    var_fit = VarFit(
        order=int(var_block["order"]),
        beta=np.asarray(var_block["beta"], dtype=float),
        method=var_block["method"],
        lam=float(var_block["lambda"]),
        innovation_cov=np.asarray(var_block["Gamma_hat"], dtype=float),
        threshold=None if var_block["threshold"] is None else float(var_block["threshold"]),
    )
    precision = None
    if doc.get("lrpc") is not None:
        block = doc["lrpc"]
        precision = with_partial_correlations(
            longrun_precision(
                var_fit,
                PrecisionFit(
                    innovation_precision=np.asarray(block["Delta"], dtype=float),
                    eta=float(block["eta"]),
                    adaptive=bool(block["adaptive"]),
                ),
            )
        )
    return ModelDocument(
        model_kind=doc["model_kind"],
        q_or_r=int(doc["q_or_r"]),
        bandwidth=int(doc["bandwidth"]),
        var_fit=var_fit,
        precision=precision,
        mean_x=np.asarray(doc["mean_x"], dtype=float),
        seed=int(doc["provenance"]["seed"]),
        input_path=doc["provenance"]["input"],
    )


def write_json(path: str, payload: dict | str | bytes) -> None:
    """Atomic write: temp file in the target directory, then rename."""
    if isinstance(payload, dict):
        data = json.dumps(payload, indent=1).encode("utf-8")
    elif isinstance(payload, str):
        data = payload.encode("utf-8")
    else:
        data = payload
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def predict(
    model_kind: str,
    q_or_r: int,
    bandwidth: int,
    var_fit: VarFit,
    panel: TimeSeriesPanel,
    horizon: int,
) -> ForecastResult:
    """Forecast from model parameters plus the panel the model was fit on.

    The factor adjustment is recomputed deterministically from the stored
    settings, so a model reloaded from disk forecasts identically to one kept
    in memory. Under the dynamic factor model the static rank used by the
    common-component predictor is re-selected on the lag-0 covariance.
    """
    if horizon < 1:
        raise DimensionError("horizon must be at least 1")
    if horizon > bandwidth:
        raise DimensionError(
            f"horizon {horizon} beyond the stored bandwidth {bandwidth}"
        )
    p, n = panel.p, panel.n
    if q_or_r == 0:
        common_is = np.zeros((p, n))
        common_fc = np.zeros((horizon, p))
        r_used = 0
        warning = None
    else:
        factor = _adjust(panel, model_kind, q_or_r, bandwidth, var_fit.order)
        if model_kind == "restricted":
            r_fc = q_or_r
        else:
            r_fc = select_factor_number_ic(
                panel, model_kind="restricted", variant=5
            ).q_hat
        common_is, common_fc, r_used, warning = forecast_common_restricted(
            factor.acv_chi, r_fc, panel, horizon
        )
    idio_is = panel.values - common_is
    idio_fc = forecast_idio(var_fit, idio_is, horizon)
    return combine_forecasts(
        common_is, common_fc, idio_is, idio_fc, panel.mean_x, r_used, warning
    )


def predict_model(model: FittedModel, horizon: int) -> ForecastResult:
    return predict(
        model.model_kind,
        model.q_or_r,
        model.bandwidth,
        model.var_fit,
        model.panel,
        horizon,
    )


def predict_document(
    doc: ModelDocument, panel: TimeSeriesPanel, horizon: int
) -> ForecastResult:
    return predict(
        doc.model_kind, doc.q_or_r, doc.bandwidth, doc.var_fit, panel, horizon
    )
