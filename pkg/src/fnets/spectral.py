"""Bartlett-kernel spectral density estimation and factor adjustment.

The factor-driven component is removed in the frequency domain: smooth the
sample autocovariances into spectral density matrices on the Fourier grid,
keep the leading eigenpairs at every frequency, transform back, and subtract.
A time-domain variant projects on the leading eigenvectors of the lag-0
covariance instead, for the restricted (static) factor model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericalError
from .panel import AcvSequence, TimeSeriesPanel, sample_acv, _frozen


@dataclass(frozen=True)
class SpectralEstimate:
    """Spectral density matrices on the 2m+1 Fourier frequencies.

    ``matrices[k]`` is the Hermitian estimate at frequency ``frequencies[k]``;
    eigenvalues are stored in descending order with matching eigenvector
    columns, phase-fixed so the largest-modulus component is real positive.
    """

    bandwidth_m: int
    frequencies: np.ndarray  # (2m+1,)
    matrices: np.ndarray  # (2m+1, p, p) complex
    eigenvalues: np.ndarray  # (2m+1, p) descending
    eigenvectors: np.ndarray  # (2m+1, p, p) columns

    @property
    def p(self) -> int:
        return self.matrices.shape[1]


@dataclass(frozen=True)
class FactorAdjustment:
    """Autocovariance triple (observed, common, idiosyncratic) after adjustment."""

    q_or_r: int
    model_kind: str  # "unrestricted" | "restricted"
    acv_x: AcvSequence
    acv_chi: AcvSequence
    acv_xi: AcvSequence
    static_eigvecs: np.ndarray | None = None  # (p, r), restricted only
    static_eigvals: np.ndarray | None = None  # (r,), restricted only
    spec_x: SpectralEstimate | None = None  # unrestricted only
    spec_chi: SpectralEstimate | None = None  # unrestricted only

    @property
    def p(self) -> int:
        return self.acv_x.p


def default_bandwidth(n: int) -> int:
    """Kernel bandwidth floor(4 (n / log n)^(1/3)), clamped to [1, n-1]."""
    if n <= 2:
        raise DimensionError(f"bandwidth rule needs n >= 3, got {n}")
    m = math.floor(4.0 * (n / math.log(n)) ** (1.0 / 3.0))
    return max(1, min(m, n - 1))


def fourier_frequencies(m: int) -> np.ndarray:
    """The grid 2*pi*k/(2m+1) for k = -m..m."""
    k = np.arange(-m, m + 1)
    return 2.0 * np.pi * k / (2 * m + 1)


def spectral_matrices(acv: AcvSequence, m: int) -> np.ndarray:
    """Bartlett-smoothed spectral density matrices, stacked over the grid."""
    if m < 1:
        raise DimensionError("bandwidth must be positive")
    if acv.max_lag < m:
        raise DimensionError(
            f"need autocovariances up to lag {m}, have {acv.max_lag}"
        )
    freqs = fourier_frequencies(m)
    p = acv.p
    out = np.zeros((2 * m + 1, p, p), dtype=complex)
    out += acv.at(0)
    for lag in range(1, m + 1):
        w = 1.0 - lag / m
        if w == 0.0:
            continue
        phase = np.exp(-1j * lag * freqs)
        g = acv.at(lag)
        out += w * (phase[:, None, None] * g + np.conj(phase)[:, None, None] * g.T)
    out /= 2.0 * np.pi
    return out


def _fix_phase(vecs: np.ndarray) -> np.ndarray:
    """Rotate each eigenvector so its largest-modulus entry is real positive."""
    flat = vecs.reshape(-1, vecs.shape[-2], vecs.shape[-1])
    out = flat.copy()
    for i in range(flat.shape[0]):
        v = out[i]
        idx = np.argmax(np.abs(v), axis=0)
        pivot = v[idx, np.arange(v.shape[1])]
        mod = np.abs(pivot)
        mod[mod == 0.0] = 1.0
        out[i] = v * (np.conj(pivot) / mod)[None, :]
    return out.reshape(vecs.shape)


def bartlett_spectral_density(acv: AcvSequence, m: int) -> SpectralEstimate:
    """Estimate the spectral density and eigendecompose it per frequency."""
    mats = spectral_matrices(acv, m)
    vals, vecs = np.linalg.eigh(mats)
    vals = vals[:, ::-1]
    vecs = _fix_phase(vecs[:, :, ::-1])
    return SpectralEstimate(
        bandwidth_m=m,
        frequencies=_frozen(fourier_frequencies(m)),
        matrices=mats,
        eigenvalues=vals,
        eigenvectors=vecs,
    )


def dynamic_pca_common(spec: SpectralEstimate, q: int) -> SpectralEstimate:
    """Rank-q reconstruction of the spectral density from its leading eigenpairs."""
    p = spec.p
    if q < 0 or q > p:
        raise DimensionError(f"factor number {q} outside 0..{p}")
    vals = spec.eigenvalues.copy()
    vals[:, q:] = 0.0
    if q == 0:
        mats = np.zeros_like(spec.matrices)
    else:
        v = spec.eigenvectors[:, :, :q]
        w = spec.eigenvalues[:, :q]
        mats = np.einsum("kij,kj,klj->kil", v, w, np.conj(v))
    return SpectralEstimate(
        bandwidth_m=spec.bandwidth_m,
        frequencies=spec.frequencies,
        matrices=mats,
        eigenvalues=vals,
        eigenvectors=spec.eigenvectors,
    )


def inverse_ft_acv(spec: SpectralEstimate, label: str = "chi") -> AcvSequence:
    """Invert the finite Fourier transform back to autocovariances at lags 0..m."""
    m = spec.bandwidth_m
    lags = np.arange(m + 1)
    phases = np.exp(1j * lags[:, None] * spec.frequencies[None, :])
    mats = np.einsum("lk,kij->lij", phases, spec.matrices) * (
        2.0 * np.pi / (2 * m + 1)
    )
    residue = float(np.max(np.abs(mats.imag))) if mats.size else 0.0
    if residue > 1e-6:
        raise NumericalError(
            f"inverse transform left imaginary residue {residue:.3e}"
        )
    return AcvSequence(label, m, mats.real)


def factor_adjust_unrestricted(
    panel: TimeSeriesPanel, q: int, m: int | None = None
) -> FactorAdjustment:
    """Frequency-domain factor adjustment with q dynamic factors."""
    if m is None:
        m = default_bandwidth(panel.n)
    if q < 0 or q > panel.p:
        raise DimensionError(f"factor number {q} outside 0..{panel.p}")
    acv_x = sample_acv(panel, m)
    spec_x = bartlett_spectral_density(acv_x, m)
    spec_chi = dynamic_pca_common(spec_x, q)
    acv_chi = inverse_ft_acv(spec_chi, "chi")
    acv_xi = AcvSequence("xi", m, acv_x.matrices - acv_chi.matrices)
    return FactorAdjustment(
        q_or_r=q,
        model_kind="unrestricted",
        acv_x=acv_x,
        acv_chi=acv_chi,
        acv_xi=acv_xi,
        spec_x=spec_x,
        spec_chi=spec_chi,
    )


def factor_adjust_restricted(
    panel: TimeSeriesPanel, r: int, max_lag: int
) -> FactorAdjustment:
    """Time-domain factor adjustment projecting on r static eigenvectors."""
    if r < 0 or r > panel.p:
        raise DimensionError(f"factor number {r} outside 0..{panel.p}")
    if max_lag < 1 or max_lag > panel.n - 1:
        raise DimensionError(f"max_lag {max_lag} outside 1..{panel.n - 1}")
    acv_x = sample_acv(panel, max_lag)
    cov = acv_x.at(0)
    vals, vecs = np.linalg.eigh((cov + cov.T) / 2.0)
    vals = vals[::-1]
    vecs = _fix_phase(vecs[:, ::-1].astype(complex)).real
    lead_vecs = vecs[:, :r]
    lead_vals = vals[:r]
    proj = lead_vecs @ lead_vecs.T
    chi = np.einsum("ij,ljk,km->lim", proj, acv_x.matrices, proj)
    acv_chi = AcvSequence("chi", max_lag, chi)
    acv_xi = AcvSequence("xi", max_lag, acv_x.matrices - chi)
    return FactorAdjustment(
        q_or_r=r,
        model_kind="restricted",
        acv_x=acv_x,
        acv_chi=acv_chi,
        acv_xi=acv_xi,
        static_eigvecs=lead_vecs,
        static_eigvals=lead_vals,
    )
