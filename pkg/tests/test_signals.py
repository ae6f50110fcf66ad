import math
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pmhll.presets import FULL, build_signal
from pmhll.signals import (
    Component,
    HarmonicSpec,
    IrnSpec,
    NoiseSpec,
    SignalError,
    chord_tones,
    harmonic_power,
    irn_fundamental,
    make_f0_track,
    mix_noise,
    snr_db,
    synth_chord,
    synth_harmonic,
    synth_irn,
)

FS = 5000.0
FULL_SPEC = HarmonicSpec.from_pairs(FULL)


def test_harmonic_power_closed_form():
    assert harmonic_power(FULL_SPEC) == pytest.approx(1.425)
    assert HarmonicSpec.from_pairs([(6, 0.9), (7, 0.7)]).power == pytest.approx(0.65)


def test_rendered_power_matches_closed_form():
    x = synth_harmonic(FULL_SPEC, make_f0_track("constant", 100.0, duration=1.0), FS, seed=2)
    assert np.mean(x**2) == pytest.approx(1.425, rel=0.02)


def test_synthesis_is_deterministic():
    track = make_f0_track("step", 98.5, 101.0, duration=0.4)
    a = synth_harmonic(FULL_SPEC, track, FS, seed=11)
    b = synth_harmonic(FULL_SPEC, track, FS, seed=11)
    c = synth_harmonic(FULL_SPEC, track, FS, seed=12)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_fixed_phases_ignore_seed():
    spec = HarmonicSpec((Component(1, 1.0, 0.0),))
    track = make_f0_track("constant", 100.0, duration=0.01)
    x = synth_harmonic(spec, track, FS, seed=5)
    assert np.allclose(x, np.sin(2 * np.pi * 100.0 * np.arange(50) / FS), atol=1e-12)


def test_step_track():
    tr = make_f0_track("step", 98.5, 101.0, duration=0.4)
    assert tr(0.0) == 98.5
    assert tr(0.1999) == 98.5
    assert tr(0.2) == 101.0
    assert len(tr.sample(FS)) == 2000


def test_sweep_track_midpoint():
    tr = make_f0_track("sweep", 96.0, 103.0, duration=0.1)
    assert tr(0.05) == pytest.approx(99.5)
    assert tr(0.0) == 96.0


def test_constant_track():
    assert np.all(make_f0_track("constant", 170.0, duration=0.2).sample(FS) == 170.0)


@pytest.mark.parametrize(
    "kind,values", [("wobble", (1.0,)), ("step", (1.0,)), ("constant", (-5.0,)), ("sweep", (1.0, 2.0, 3.0))]
)
def test_bad_tracks_rejected(kind, values):
    with pytest.raises(SignalError):
        make_f0_track(kind, *values, duration=0.1)


def test_mistune_instantaneous_frequency():
    spec = HarmonicSpec((Component(6, 1.0, 0.0),), mistune=6.0)
    x = synth_harmonic(spec, make_f0_track("constant", 100.0, duration=0.2), FS)
    n = np.arange(len(x))
    phase = 6 * 2 * np.pi * 100.0 * n / FS + 2 * np.pi * 6.0 * n / FS
    assert np.allclose(x, np.sin(phase), atol=1e-9)
    inst = np.diff(np.unwrap(phase)) * FS / (2 * np.pi)
    assert np.allclose(inst, 606.0)


def test_aliasing_rejected():
    spec = HarmonicSpec.from_pairs([(7, 0.7)])
    with pytest.raises(SignalError):
        synth_harmonic(spec, make_f0_track("constant", 400.0, duration=0.1), FS)


def test_negative_mistune_below_zero_rejected():
    spec = HarmonicSpec.from_pairs([(1, 0.5)], mistune=-200.0)
    with pytest.raises(SignalError):
        synth_harmonic(spec, make_f0_track("constant", 100.0, duration=0.1), FS)


@pytest.mark.parametrize("pairs", [[], [(1, 0.5), (1, 0.3)], [(0, 1.0)], [(2, 0.0)]])
def test_bad_harmonic_specs(pairs):
    with pytest.raises(SignalError):
        HarmonicSpec.from_pairs(pairs)


# -- noise and SNR -----------------------------------------------------------

def test_zero_gain_is_clean():
    x = np.ones(100)
    mix, snr = mix_noise(x, NoiseSpec(0.0, 1))
    assert np.array_equal(mix, x)
    assert snr == math.inf


def test_negative_gain_rejected():
    with pytest.raises(SignalError):
        NoiseSpec(-0.1)


def test_snr_definition():
    assert snr_db(np.full(10, 2.0), np.full(10, 1.0)) == pytest.approx(10 * math.log10(4))


@pytest.mark.parametrize("gain,expected", [(0.1, 21.54), (0.5, 7.56), (1.0, 1.54)])
def test_row_I_snr_algebra(gain, expected):
    assert 10 * math.log10(1.425 / gain**2) == pytest.approx(expected, abs=0.01)
    snrs = [build_signal("I", [0.1, 0.5, 1.0].index(gain), s).snr_db["snr"] for s in range(40)]
    assert np.mean(snrs) == pytest.approx(expected, abs=0.15)


def test_row_III_snr_algebra():
    assert 10 * math.log10(0.65 / 0.25) == pytest.approx(4.15, abs=0.01)


def test_noise_and_phase_streams_independent():
    # same seed at three gains: one clean part, one unit-noise realization
    a, b, c = (build_signal("I", v, 3).x for v in range(3))
    unit_ab = (c - a) / 0.9
    unit_bc = (c - b) / 0.5
    assert np.allclose(unit_ab, unit_bc, atol=1e-9)
    clean = a - 0.1 * unit_ab
    assert np.mean(clean**2) == pytest.approx(1.425, rel=0.03)


# -- IRN ---------------------------------------------------------------------

def irn_lag_correlation(k):
    """Lag-1 normalized autocorrelation of the (1 + z)^k tap pattern."""
    c = [comb(k, i) for i in range(k + 1)]
    return sum(c[i] * c[i + 1] for i in range(k)) / sum(v * v for v in c)


def test_irn_shift_and_realized_f0():
    spec = IrnSpec(1 / 98, 1, 0.2)
    assert round(spec.delay * FS) == 51
    assert irn_fundamental(spec, FS) == pytest.approx(5000 / 51)
    assert irn_fundamental(spec, FS) == pytest.approx(98.04, abs=0.005)


@pytest.mark.parametrize("k", [1, 3, 5])
def test_irn_autocorrelation(k):
    assert irn_lag_correlation(k) == pytest.approx(k / (k + 1))
    rs = []
    for seed in range(20):
        x = synth_irn(IrnSpec(1 / 98, k, 0.2, seed=seed), FS)
        rs.append(np.dot(x[51:], x[:-51]) / np.dot(x, x))
    assert np.mean(rs) == pytest.approx(k / (k + 1), abs=0.05)


def test_irn_unit_variance_and_length():
    x = synth_irn(IrnSpec(1 / 98, 3, 0.2, seed=1), FS)
    assert len(x) == 1000
    assert np.std(x) == pytest.approx(1.0)


@pytest.mark.parametrize("kwargs", [dict(iterations=0), dict(delay=0.0), dict(segment_duration=5.0)])
def test_irn_rejects(kwargs):
    base = dict(delay=1 / 98, iterations=1, segment_duration=0.2)
    base.update(kwargs)
    with pytest.raises(SignalError):
        IrnSpec(**base)


# -- chord -------------------------------------------------------------------

def test_chord_fundamentals_and_power():
    x, tracks = synth_chord(170.0, seed=1)
    f0s = [t.values[0] for t in tracks]
    assert f0s == pytest.approx([170.0 * 2 ** (k / 12) for k in (0, 4, 7)])
    assert f0s == pytest.approx([170.0, 214.19, 254.71], abs=0.01)
    per_tone = HarmonicSpec.from_pairs([(3, 0.9), (4, 0.7), (6, 0.9), (7, 0.7)])
    assert per_tone.power == pytest.approx(1.3)
    tones, _ = chord_tones(170.0, (0, 4, 7), per_tone, FS, 0.2, seed=1)
    assert np.allclose(np.sum(tones, axis=0), x)
    for tone in tones:
        assert np.mean(tone**2) == pytest.approx(1.3, rel=0.05)


def test_chord_within_nyquist():
    assert 7 * 170.0 * 2 ** (7 / 12) < FS / 2


def test_chord_seed_sequence_accepted():
    a, _ = synth_chord(170.0, seed=np.random.SeedSequence(9))
    b, _ = synth_chord(170.0, seed=9)
    assert np.array_equal(a, b)


def test_chord_snr_keys():
    s = build_signal("VI", 0, 0)
    assert s.snr_db["tone1_vs_noise"] == pytest.approx(10 * math.log10(1.3 / 2.25), abs=0.5)
    assert s.snr_db["tone1_vs_noise_and_tones"] < s.snr_db["tone1_vs_noise"]
    assert len(s.f0) == 3


@settings(max_examples=25, deadline=None)
@given(st.floats(60.0, 300.0), st.integers(0, 2**32 - 1))
def test_harmonic_peak_bounded_by_amplitude_sum(f0, seed):
    x = synth_harmonic(FULL_SPEC, make_f0_track("constant", f0, duration=0.05), FS, seed=seed)
    assert np.max(np.abs(x)) <= sum(a for _, a in FULL) + 1e-12
