"""Fourier analysis checks:

1. transform conventions (bin values, omega mapping, Parseval, symmetry)
2. the conjugate-aware least-squares fit and its equivalences
3. dissimilarity properties (range, invariances, DC handling)
4. reporting and ranking
"""

import numpy as np
import pytest

from memnet.spectral import (
    DegenerateBasisWarning,
    ZeroOutputError,
    analyze_outputs,
    combine,
    dft,
    dissimilarity,
    fit_linear_combination,
    rank_outputs,
    reports_to_document,
    spectrum_norm,
)

from oracles import quarter_shifted, tone

N = 64
DT = 0.01


def test_dft_of_constant_is_dc_only():
    spec = dft(np.full(N, 2.5), DT)
    assert spec.bins[0] == pytest.approx(2.5 * N, rel=1e-12)
    assert np.max(np.abs(spec.bins[1:])) < 1e-10 * N


def test_dft_of_integer_tone_hits_its_bins():
    spec = dft(tone(N, DT, 5, amplitude=2.0), DT)
    mags = np.abs(spec.bins)
    assert mags[5] == pytest.approx(2.0 * N / 2.0, rel=1e-10)
    assert mags[N - 5] == pytest.approx(2.0 * N / 2.0, rel=1e-10)
    others = np.delete(mags, [5, N - 5])
    assert others.max() < 1e-9 * N


def test_omega_mapping():
    spec = dft(np.zeros(10) + 1.0, 0.5)
    np.testing.assert_allclose(
        spec.omegas, 2.0 * np.pi * np.arange(10) / (10 * 0.5), rtol=1e-15
    )


def test_parseval_and_conjugate_symmetry():
    rng = np.random.default_rng(2)
    for _ in range(20):
        n = int(rng.integers(8, 100))
        x = rng.normal(size=n)
        spec = dft(x, DT)
        assert np.sum(np.abs(spec.bins) ** 2) == pytest.approx(
            n * np.sum(x**2), rel=1e-10
        )
        ks = np.arange(1, n)
        np.testing.assert_allclose(
            spec.bins[n - ks], np.conj(spec.bins[ks]), atol=1e-9 * n
        )
        # spectrum_norm uses the same full-bin convention
        assert spectrum_norm(spec) == pytest.approx(
            np.linalg.norm(spec.bins), rel=1e-12
        )


def test_dft_input_validation():
    with pytest.raises(ValueError):
        dft([1.0], DT)
    with pytest.raises(ValueError):
        dft([1.0, np.nan], DT)
    with pytest.raises(ValueError):
        dft([1.0, 2.0], 0.0)


# --- fitting -----------------------------------------------------------------


def test_fit_recovers_real_mixture_exactly():
    u1, u2 = tone(N, DT, 3, 1.0, 0.3), tone(N, DT, 7, 1.0, -1.1)
    fit = fit_linear_combination(dft(u1 - 0.5 * u2, DT), [dft(u1, DT), dft(u2, DT)])
    np.testing.assert_allclose(fit.weights, [1.0, -0.5], atol=1e-10)
    assert fit.residual_norm < 1e-10 * N
    assert not fit.degenerate


def test_fit_recovers_complex_weight():
    # 2x the input plus 3x its quarter-period-shifted analogue = weight 2 + 3i
    u = tone(N, DT, 3, 1.0, 0.3)
    o = 2.0 * u + 3.0 * quarter_shifted(N, DT, 3, 1.0, 0.3)
    fit = fit_linear_combination(dft(o, DT), [dft(u, DT)])
    assert fit.weights[0].real == pytest.approx(2.0, abs=1e-9)
    assert fit.weights[0].imag == pytest.approx(3.0, abs=1e-9)
    assert fit.residual_norm < 1e-9 * N


def test_fit_of_orthogonal_tone_keeps_everything_in_the_residual():
    u1, u2 = tone(N, DT, 3), tone(N, DT, 7)
    o = tone(N, DT, 11, 2.0)
    fit = fit_linear_combination(dft(o, DT), [dft(u1, DT), dft(u2, DT)])
    np.testing.assert_allclose(fit.weights, [0.0, 0.0], atol=1e-10)
    assert fit.residual_norm == pytest.approx(spectrum_norm(dft(o, DT)), rel=1e-12)


def test_fit_matches_time_domain_least_squares():
    rng = np.random.default_rng(8)
    y = rng.normal(size=N)
    bins = (3, 7)
    phases = (0.3, -1.1)
    inputs = [tone(N, DT, b, 1.0, p) for b, p in zip(bins, phases)]
    regressors = np.column_stack(
        [tone(N, DT, b, 1.0, p) for b, p in zip(bins, phases)]
        + [quarter_shifted(N, DT, b, 1.0, p) for b, p in zip(bins, phases)]
    )
    coef, *_ = np.linalg.lstsq(regressors, y, rcond=None)
    time_residual = np.linalg.norm(y - regressors @ coef)
    fit = fit_linear_combination(dft(y, DT), [dft(u, DT) for u in inputs])
    assert fit.residual_norm == pytest.approx(np.sqrt(N) * time_residual, rel=1e-12)
    np.testing.assert_allclose(fit.weights.real, coef[:2], atol=1e-9)
    np.testing.assert_allclose(fit.weights.imag, coef[2:], atol=1e-9)


def test_fit_pythagoras():
    rng = np.random.default_rng(4)
    y = rng.normal(size=N)
    specs = [dft(tone(N, DT, 3), DT), dft(tone(N, DT, 9, 1.0, 0.7), DT)]
    fit = fit_linear_combination(dft(y, DT), specs)
    model = combine(specs, fit.weights)
    total = spectrum_norm(dft(y, DT)) ** 2
    explained = spectrum_norm(model) ** 2
    assert total == pytest.approx(explained + fit.residual_norm**2, rel=1e-10)


def test_combined_spectrum_stays_conjugate_symmetric():
    specs = [dft(tone(N, DT, 3), DT), dft(np.random.default_rng(1).normal(size=N), DT)]
    model = combine(specs, np.array([1.5 + 0.5j, -0.25 + 2.0j]))
    ks = np.arange(1, N)
    np.testing.assert_allclose(
        model.bins[N - ks], np.conj(model.bins[ks]), atol=1e-9 * N
    )
    back = np.fft.ifft(model.bins)
    assert np.max(np.abs(back.imag)) < 1e-12 * max(1.0, np.max(np.abs(back.real)))


def test_degenerate_basis_warns_and_falls_back():
    u = tone(N, DT, 3)
    with pytest.warns(DegenerateBasisWarning):
        fit = fit_linear_combination(dft(u, DT), [dft(u, DT), dft(2.0 * u, DT)])
    assert fit.degenerate
    assert fit.residual_norm < 1e-9 * N  # still explains the output


def test_fit_rejects_mismatched_series():
    with pytest.raises(ValueError, match="length"):
        fit_linear_combination(dft(np.ones(8), DT), [dft(np.ones(16), DT)])
    with pytest.raises(ValueError, match="sample intervals"):
        fit_linear_combination(dft(np.ones(8), 0.1), [dft(np.ones(8), 0.2)])
    with pytest.raises(ValueError, match="at least one"):
        fit_linear_combination(dft(np.ones(8), DT), [])


# --- dissimilarity ---------------------------------------------------------------


def test_delta_is_zero_for_perfect_mimicry():
    u = tone(N, DT, 4, 1.3, 0.2)
    assert dissimilarity(2.0 * u, [u], DT) < 1e-12


def test_delta_is_one_for_orthogonal_output():
    assert dissimilarity(tone(N, DT, 11), [tone(N, DT, 3)], DT) == pytest.approx(1.0)


def test_delta_is_scale_invariant():
    rng = np.random.default_rng(13)
    o = rng.normal(size=N)
    u = [tone(N, DT, 3), tone(N, DT, 7)]
    base = dissimilarity(o, u, DT)
    assert dissimilarity(1e6 * o, u, DT) == pytest.approx(base, rel=1e-10)
    assert 0.0 <= base <= 1.0


def test_delta_never_increases_with_more_inputs():
    rng = np.random.default_rng(21)
    for _ in range(10):
        o = rng.normal(size=N)
        u1, u2 = rng.normal(size=N), rng.normal(size=N)
        one = dissimilarity(o, [u1], DT)
        two = dissimilarity(o, [u1, u2], DT)
        assert two <= one + 1e-12


def test_dc_exclusion_controls_offset_sensitivity():
    u = tone(N, DT, 3)
    o = u + 5.0  # pure offset on top of a perfect mimic
    with_dc = dissimilarity(o, [u], DT, exclude_dc=False)
    without_dc = dissimilarity(o, [u], DT, exclude_dc=True)
    assert with_dc > 0.5  # offset dominates the energy
    assert without_dc < 1e-12


def test_zero_output_rejected():
    with pytest.raises(ZeroOutputError):
        dissimilarity(np.zeros(N), [tone(N, DT, 3)], DT)
    # DC-only output with the DC bin excluded is empty as well
    with pytest.raises(ZeroOutputError):
        dissimilarity(np.full(N, 3.3), [tone(N, DT, 3)], DT, exclude_dc=True)


# --- reports ----------------------------------------------------------------------


def test_ranking_orders_by_descending_delta():
    u = [tone(N, DT, 3)]
    hard = tone(N, DT, 11)
    outputs = [
        ("a", tone(N, DT, 3) + 0.33 * hard),
        ("b", tone(N, DT, 3) + 0.10 * hard),
        ("c", hard),
    ]
    reports = analyze_outputs(outputs, u, DT)
    assert rank_outputs(reports) == ["c", "a", "b"]
    doc = reports_to_document(reports)
    assert doc["ranking"] == ["c", "a", "b"]
    assert doc["reports"][0]["output_id"] == "a"
    assert 0.0 <= doc["reports"][0]["delta"] <= 1.0


def test_ranking_breaks_ties_by_id():
    u = [tone(N, DT, 3)]
    same = tone(N, DT, 11)
    reports = analyze_outputs([("z", same), ("m", same), ("a", same)], u, DT)
    assert rank_outputs(reports) == ["a", "m", "z"]
