import math

import numpy as np
import pytest

from qcsim import (
    DEFAULT_ELECTRONIC_NOISE_VAR,
    DetectorConfig,
    DomainError,
    JointMeasurement,
    Quadrature,
    RngStream,
    SpectralSignal,
    bell_measure,
    correlation_degree,
    sample_slots,
    snl_reference,
    spectrum,
)

NOISELESS = DetectorConfig(electronic_noise_var=0.0)
CORR_0875 = 0.8337240393570168


def test_default_electronic_noise_is_8db_below_snl():
    assert DEFAULT_ELECTRONIC_NOISE_VAR == pytest.approx(2.0 * 10.0**-0.8, rel=1e-12)
    assert -10.0 * math.log10(DEFAULT_ELECTRONIC_NOISE_VAR / 2.0) == pytest.approx(8.0)


def test_detector_config_rejects_negative_noise():
    with pytest.raises(DomainError):
        DetectorConfig(electronic_noise_var=-0.1)


def test_bell_measure_perfectly_correlated_inputs():
    out = bell_measure((0.5, 0.3), (-0.5, 0.3), NOISELESS, RngStream(1))
    assert out.d_plus == 0.0
    assert out.d_minus == 0.0


def test_bell_measure_variance_matches_correlation_floor():
    n = 1_000_000
    slots = sample_slots(0.4375, RngStream(21).substream(0), n)
    out = bell_measure(
        (slots.x1, slots.y1), (slots.x2, slots.y2), NOISELESS, RngStream(21).substream(1)
    )
    assert np.var(out.d_plus) == pytest.approx(CORR_0875, rel=0.01)
    assert np.var(out.d_minus) == pytest.approx(CORR_0875, rel=0.01)


def test_bell_measure_adds_electronic_noise_variance():
    n = 1_000_000
    slots = sample_slots(0.4375, RngStream(22).substream(0), n)
    out = bell_measure(
        (slots.x1, slots.y1),
        (slots.x2, slots.y2),
        DetectorConfig(),
        RngStream(22).substream(1),
    )
    expected = CORR_0875 + DEFAULT_ELECTRONIC_NOISE_VAR
    assert np.var(out.d_plus) == pytest.approx(expected, rel=0.01)


@pytest.mark.parametrize("noise_var", [0.1, 0.317, 1.0])
def test_variance_additivity(noise_var):
    n = 400_000
    slots = sample_slots(0.6, RngStream(23).substream(int(noise_var * 1000)), n)
    out = bell_measure(
        (slots.x1, slots.y1),
        (slots.x2, slots.y2),
        DetectorConfig(electronic_noise_var=noise_var),
        RngStream(23).substream(int(noise_var * 1000), 1),
    )
    expected = 2.0 * math.exp(-1.2) + noise_var
    tol = 3.0 * expected * math.sqrt(2.0 / n)
    assert abs(np.var(out.d_plus) - expected) <= tol
    assert abs(np.var(out.d_minus) - expected) <= tol


def test_snl_reference_noiseless():
    assert snl_reference(1_000_000, NOISELESS, RngStream(24)) == pytest.approx(
        2.0, rel=0.01
    )


def test_snl_reference_with_default_noise():
    value = snl_reference(1_000_000, DetectorConfig(), RngStream(25))
    assert value == pytest.approx(2.0 + DEFAULT_ELECTRONIC_NOISE_VAR, rel=0.01)


def test_snl_reference_is_vacuum_calibrated_for_any_seed():
    # The calibration takes no source parameter at all; values only carry
    # estimator noise.
    values = [snl_reference(200_000, NOISELESS, RngStream(s)) for s in range(5)]
    assert all(abs(v - 2.0) < 2.0 * 3.0 * math.sqrt(2.0 / 200_000) for v in values)


def test_snl_reference_single_sample_is_flagged():
    with pytest.warns(UserWarning):
        value = snl_reference(1, NOISELESS, RngStream(26))
    assert value >= 0.0
    with pytest.raises(DomainError):
        snl_reference(0, NOISELESS, RngStream(26))


def test_correlation_degree_reproduces_squeezing_level():
    n = 1_000_000
    slots = sample_slots(0.4375, RngStream(27).substream(0), n)
    out = bell_measure(
        (slots.x1, slots.y1), (slots.x2, slots.y2), NOISELESS, RngStream(27).substream(1)
    )
    cd = correlation_degree(out)
    assert cd.cd_db == pytest.approx(3.80, abs=0.10)
    cd_minus = correlation_degree(out, Quadrature.Y)
    assert cd_minus.cd_db == pytest.approx(cd.cd_db, abs=0.06)


def test_correlation_degree_no_squeezing_at_r0():
    n = 1_000_000
    slots = sample_slots(0.0, RngStream(28).substream(0), n)
    out = bell_measure(
        (slots.x1, slots.y1), (slots.x2, slots.y2), NOISELESS, RngStream(28).substream(1)
    )
    assert correlation_degree(out).cd_db == pytest.approx(0.0, abs=0.05)


def test_correlation_degree_with_channel_loss():
    from qcsim import apply_loss

    n = 1_000_000
    slots = sample_slots(0.4375, RngStream(29).substream(0), n)
    x, y = apply_loss(slots.x1, slots.y1, 0.8, RngStream(29).substream(1))
    out = bell_measure((x, y), (slots.x2, slots.y2), NOISELESS, RngStream(29).substream(2))
    assert correlation_degree(out).cd_db == pytest.approx(3.1813, abs=0.15)


def test_correlation_degree_needs_two_samples():
    with pytest.raises(ValueError):
        correlation_degree(JointMeasurement(np.array([1.0]), np.array([0.5])))


def test_spectrum_bin_layout():
    spec = spectrum(
        0.4375, (1.0e6, 3.0e6), 30.0e3, 100, NOISELESS, RngStream(30).substream(0)
    )
    assert spec.freq_hz.size == 67
    assert spec.freq_hz[0] == 1.0e6
    assert spec.freq_hz[-1] == pytest.approx(2.98e6)
    assert np.allclose(np.diff(spec.freq_hz), 30.0e3)


def test_spectrum_signal_occupies_exactly_one_bin():
    signal = SpectralSignal(freq_hz=2.0e6, power=1.0)
    averages = 800
    spec = spectrum(
        1.0,
        (1.0e6, 3.0e6),
        30.0e3,
        averages,
        NOISELESS,
        RngStream(31).substream(0),
        signal=signal,
    )
    # Nearest bin to 2 MHz on the 1.0 + 0.03k MHz ladder is 1.99 MHz.
    peak_bin = int(np.argmax(spec.correlation_db))
    assert spec.freq_hz[peak_bin] == pytest.approx(1.99e6)
    floor_db = 10.0 * math.log10(2.0 * math.exp(-2.0) / 2.0)
    jitter_db = 3.0 * (10.0 / math.log(10.0)) * math.sqrt(2.0 / averages)
    excess = spec.correlation_db[peak_bin] - floor_db
    assert excess == pytest.approx(6.7159, abs=3.0 * jitter_db)
    others = np.delete(spec.correlation_db, peak_bin)
    assert np.all(np.abs(others - floor_db) < 3.0 * jitter_db)


def test_spectrum_flat_at_r0_without_signal():
    averages = 800
    spec = spectrum(
        0.0, (1.0e6, 3.0e6), 30.0e3, averages, NOISELESS, RngStream(32).substream(0)
    )
    jitter_db = 3.0 * (10.0 / math.log(10.0)) * math.sqrt(2.0 / averages)
    assert np.all(np.abs(spec.snl_db) < jitter_db)
    assert np.all(np.abs(spec.correlation_db) < jitter_db)
    # The single-beam trace reads cosh(2r)/2 relative to the two-beam SNL,
    # i.e. -3 dB at r=0.
    assert np.all(np.abs(spec.single_beam_db - 10.0 * math.log10(0.5)) < jitter_db)


def test_spectrum_correlation_excess_dominates_single_beam_excess():
    # The decoded signal stands proud of the squeezed floor while staying
    # small against the single-beam noise.
    signal = SpectralSignal(freq_hz=2.0e6, power=1.0)
    spec = spectrum(
        1.0,
        (1.0e6, 3.0e6),
        30.0e3,
        2000,
        NOISELESS,
        RngStream(33).substream(0),
        signal=signal,
    )
    bin_index = int(np.round((signal.freq_hz - 1.0e6) / 30.0e3))
    corr_floor = np.median(np.delete(spec.correlation_db, bin_index))
    single_floor = np.median(np.delete(spec.single_beam_db, bin_index))
    corr_excess = spec.correlation_db[bin_index] - corr_floor
    single_excess = spec.single_beam_db[bin_index] - single_floor
    assert corr_excess > single_excess
    # Closed-form expectations agree with the realized traces.
    assert 10.0 * math.log10(1.0 + 1.0 / (2.0 * math.exp(-2.0))) > 10.0 * math.log10(
        1.0 + 1.0 / math.cosh(2.0)
    )


def test_spectrum_accepts_per_bin_r_profile():
    n_bins = 67
    profile = np.linspace(0.3, 1.2, n_bins)
    spec = spectrum(
        profile, (1.0e6, 3.0e6), 30.0e3, 400, NOISELESS, RngStream(34).substream(0)
    )
    # Stronger correlation at higher bins pushes the trace further down.
    assert np.mean(spec.correlation_db[-10:]) < np.mean(spec.correlation_db[:10])
    with pytest.raises(ValueError):
        spectrum(
            np.ones(10), (1.0e6, 3.0e6), 30.0e3, 400, NOISELESS, RngStream(34)
        )


def test_spectrum_input_validation():
    stream = RngStream(35)
    with pytest.raises(DomainError):
        spectrum(1.0, (3.0e6, 1.0e6), 30.0e3, 10, NOISELESS, stream)
    with pytest.raises(DomainError):
        spectrum(1.0, (1.0e6, 3.0e6), 0.0, 10, NOISELESS, stream)
    with pytest.raises(DomainError):
        spectrum(1.0, (1.0e6, 1.1e6), 0.5e6, 10, NOISELESS, stream)
    with pytest.raises(DomainError):
        spectrum(1.0, (1.0e6, 3.0e6), 30.0e3, 0, NOISELESS, stream)
    with pytest.raises(DomainError):
        spectrum(
            1.0,
            (1.0e6, 3.0e6),
            30.0e3,
            10,
            NOISELESS,
            stream,
            signal=SpectralSignal(5.0e6, 1.0),
        )


def test_spectrum_deterministic_under_stream():
    kwargs = dict(
        r=1.0,
        span_hz=(1.0e6, 3.0e6),
        rbw_hz=30.0e3,
        averages=50,
        cfg=NOISELESS,
    )
    a = spectrum(rng=RngStream(36).substream(0), **kwargs)
    b = spectrum(rng=RngStream(36).substream(0), **kwargs)
    assert np.array_equal(a.snl_db, b.snl_db)
    assert np.array_equal(a.correlation_db, b.correlation_db)
