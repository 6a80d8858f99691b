"""Fourier-space mimicry analysis.

An output series is scored by how well a linear combination of the input
series reproduces it in the frequency domain. Each input gets one complex
weight c: it multiplies the input's bins on the lower half-spectrum, its
conjugate acts on the mirrored bins, and only its real part acts on the
self-conjugate bins (DC, and Nyquist for even lengths), so the fitted
spectrum stays conjugate-symmetric and the fit is exactly equivalent to a
time-domain least squares on each input together with its quarter-period-
shifted analogue. The dissimilarity

    delta = ||o - sum_i c_i u_i|| / ||o||

over the included bins lies in [0, 1]: 0 for an output the inputs mimic
perfectly, 1 for one orthogonal to everything they span.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class ZeroOutputError(ValueError):
    """The output series has no energy in the included bins."""


class DegenerateBasisWarning(UserWarning):
    """Inputs are linearly dependent; a minimum-norm fit was returned."""


@dataclass(frozen=True)
class Spectrum:
    """Unnormalized forward DFT bins of a real series sampled every dt
    seconds: bins[k] = sum_n x[n] exp(-2 pi i k n / N)."""

    bins: np.ndarray
    dt: float

    @property
    def n(self) -> int:
        return len(self.bins)

    @property
    def omegas(self) -> np.ndarray:
        """Angular frequency of each bin, 2 pi k / (N dt)."""
        n = self.n
        return 2.0 * np.pi * np.arange(n) / (n * self.dt)


def dft(series, dt: float) -> Spectrum:
    """Transform a real time series (length >= 2) into a Spectrum."""
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise ValueError(f"series must be 1-D with length >= 2, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("series contains non-finite values")
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    return Spectrum(bins=np.fft.fft(x), dt=dt)


def _half_bins(n: int, exclude_dc: bool):
    """Included half-spectrum bins, their multiplicities (2 for bins with a
    distinct mirror, 1 for self-conjugate ones) and a self-conjugate mask."""
    start = 1 if exclude_dc else 0
    ks = np.arange(start, n // 2 + 1)
    self_conj = (ks == 0) | ((n % 2 == 0) & (ks == n // 2))
    mult = np.where(self_conj, 1.0, 2.0)
    return ks, mult, self_conj


def spectrum_norm(spectrum: Spectrum, exclude_dc: bool = False) -> float:
    """Euclidean norm of the spectrum over the included bins (both
    conjugate halves counted)."""
    ks, mult, _ = _half_bins(spectrum.n, exclude_dc)
    return float(np.sqrt(np.sum(mult * np.abs(spectrum.bins[ks]) ** 2)))


@dataclass(frozen=True)
class LinearFit:
    """Result of fit_linear_combination. degenerate marks a rank-deficient
    basis resolved by the minimum-norm solution."""

    weights: np.ndarray  # complex, one per input
    residual_norm: float
    degenerate: bool


def fit_linear_combination(
    output: Spectrum,
    inputs: Sequence[Spectrum],
    exclude_dc: bool = False,
) -> LinearFit:
    """Least-squares complex weights making the inputs mimic the output.

    Solved exactly through the normal equations of the equivalent real
    problem: unknowns (Re c_i, Im c_i), rows the real and imaginary parts
    of the included half-spectrum bins weighted by sqrt(multiplicity).
    The imaginary parts do not act on self-conjugate bins, which keeps the
    model spectrum conjugate-symmetric. residual_norm follows the full-bin
    convention of spectrum_norm.
    """
    if len(inputs) == 0:
        raise ValueError("need at least one input spectrum")
    n = output.n
    for u in inputs:
        if u.n != n:
            raise ValueError(f"input length {u.n} does not match output length {n}")
        if u.dt != output.dt:
            raise ValueError("input and output sample intervals differ")

    ks, mult, self_conj = _half_bins(n, exclude_dc)
    w = np.sqrt(mult)
    m = len(inputs)
    design = np.empty((len(ks), 2 * m), dtype=complex)
    for i, u in enumerate(inputs):
        col = u.bins[ks] * w
        design[:, i] = col
        design[:, m + i] = np.where(self_conj, 0.0, 1j * col)
    target = output.bins[ks] * w

    real_design = np.vstack([design.real, design.imag])
    real_target = np.concatenate([target.real, target.imag])
    gram = real_design.T @ real_design
    rhs = real_design.T @ real_target

    cond = np.linalg.cond(gram) if gram.size else np.inf
    degenerate = bool(not np.isfinite(cond) or cond > 1e12)
    if degenerate:
        warnings.warn(
            "linearly dependent inputs; returning the minimum-norm fit",
            DegenerateBasisWarning,
            stacklevel=2,
        )
        solution = np.linalg.lstsq(real_design, real_target, rcond=None)[0]
    else:
        solution = np.linalg.solve(gram, rhs)

    residual = real_target - real_design @ solution
    weights = solution[:m] + 1j * solution[m:]
    return LinearFit(
        weights=weights,
        residual_norm=float(np.linalg.norm(residual)),
        degenerate=degenerate,
    )


def combine(inputs: Sequence[Spectrum], weights) -> Spectrum:
    """Model spectrum sum_i c_i u_i under the conjugate-aware weight rule,
    over all bins (useful for plotting a fit against its target)."""
    if len(inputs) == 0:
        raise ValueError("need at least one input spectrum")
    n = inputs[0].n
    c = np.asarray(weights, dtype=complex)
    z = np.zeros(n, dtype=complex)
    half = n // 2
    for k in range(0, half + 1):
        vals = np.array([u.bins[k] for u in inputs])
        if k == 0 or (n % 2 == 0 and k == half):
            z[k] = np.sum(c.real * vals)
        else:
            z[k] = np.sum(c * vals)
            z[n - k] = np.conj(z[k])
    return Spectrum(bins=z, dt=inputs[0].dt)


def dissimilarity(
    output_series,
    input_series,
    dt: float,
    exclude_dc: bool = False,
) -> float:
    """delta in [0, 1] for one output series against the input series list."""
    out_spec = dft(output_series, dt)
    in_specs = [dft(u, dt) for u in input_series]
    norm = spectrum_norm(out_spec, exclude_dc)
    if norm == 0.0:
        raise ZeroOutputError("output series has no energy in the included bins")
    fit = fit_linear_combination(out_spec, in_specs, exclude_dc)
    return fit.residual_norm / norm


@dataclass(frozen=True)
class DissimilarityReport:
    """Mimicry score for one output: its id, delta, the fit residual and
    output norm behind it, the complex weights, and the degeneracy flag."""

    output_id: str
    delta: float
    residual_norm: float
    output_norm: float
    weights: np.ndarray
    degenerate: bool


def analyze_outputs(
    outputs: Sequence,
    input_series,
    dt: float,
    exclude_dc: bool = False,
) -> list:
    """Score several (id, series) outputs against one shared input list."""
    in_specs = [dft(u, dt) for u in input_series]
    reports = []
    for output_id, series in outputs:
        out_spec = dft(series, dt)
        norm = spectrum_norm(out_spec, exclude_dc)
        if norm == 0.0:
            raise ZeroOutputError(
                f"output {output_id} has no energy in the included bins"
            )
        fit = fit_linear_combination(out_spec, in_specs, exclude_dc)
        reports.append(
            DissimilarityReport(
                output_id=str(output_id),
                delta=fit.residual_norm / norm,
                residual_norm=fit.residual_norm,
                output_norm=norm,
                weights=fit.weights,
                degenerate=fit.degenerate,
            )
        )
    return reports


def rank_outputs(reports: Sequence[DissimilarityReport]) -> list:
    """Output ids ordered hardest-to-mimic first (descending delta, ties by
    ascending id)."""
    ordered = sorted(reports, key=lambda r: (-r.delta, r.output_id))
    return [r.output_id for r in ordered]


# --- exports -----------------------------------------------------------------


def spectrum_to_csv(spectrum: Spectrum) -> str:
    rows = ["k,omega,re,im,abs"]
    omegas = spectrum.omegas
    for k, b in enumerate(spectrum.bins):
        rows.append(
            f"{k},{omegas[k]:.16e},{b.real:.16e},{b.imag:.16e},{abs(b):.16e}"
        )
    return "\n".join(rows) + "\n"


def reports_to_csv(reports: Sequence[DissimilarityReport]) -> str:
    rows = ["output_id,delta"]
    for r in reports:
        rows.append(f"{r.output_id},{r.delta:.16e}")
    return "\n".join(rows) + "\n"


def reports_to_document(reports: Sequence[DissimilarityReport]) -> dict:
    return {
        "reports": [
            {
                "output_id": r.output_id,
                "delta": r.delta,
                "residual_norm": r.residual_norm,
                "output_norm": r.output_norm,
                "degenerate": r.degenerate,
                "weights": [{"re": c.real, "im": c.imag} for c in r.weights],
            }
            for r in reports
        ],
        "ranking": rank_outputs(reports),
    }
