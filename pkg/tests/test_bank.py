import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pmhll.bank import SEMITONE, Bank, BankConfig, bank_create, persistent_locks
from pmhll.core import ConfigError, Engine, EngineConfig, InputError, catch_range
from pmhll.presets import CHORD_TONE, FULL, build_signal, run_preset
from pmhll.signals import HarmonicSpec, make_f0_track, synth_harmonic

FS = 5000.0


def scan_bank(lo, hi):
    return bank_create(BankConfig(lo, hi, template=EngineConfig(fc0=lo, fc_min=lo)))


def test_one_octave_of_semitones():
    cfg = BankConfig(100.0, 200.0)
    seeds = cfg.seed_frequencies()
    assert len(seeds) == 13
    assert seeds[0] == 100.0
    assert seeds[-1] == pytest.approx(200.0)
    assert len(bank_create(cfg)) == 13


def test_inverted_band_rejected():
    with pytest.raises(ConfigError):
        BankConfig(200.0, 100.0)


def test_spacing_must_exceed_one():
    with pytest.raises(ConfigError):
        BankConfig(100.0, 200.0, spacing=1.0)


def test_semitone_catch_ranges_leave_no_gap():
    seeds = BankConfig(100.0, 200.0).seed_frequencies()
    for lo, hi in zip(seeds, seeds[1:]):
        assert catch_range(lo, 7)[1] >= catch_range(hi, 7)[0]


def test_shared_line_sized_for_lowest_instance():
    bank = scan_bank(90.0, 400.0)
    assert bank.capacity == max(e.config.delay_capacity for e in bank.instances)
    assert bank.capacity >= FS / 90.0 + 1


def test_bitwise_equivalence_with_independent_engines():
    x = build_signal("I", 1, 4).x
    bank = scan_bank(90.0, 130.0)
    shared = bank.process(x)
    for eng, tr in zip(bank.instances, shared):
        solo = Engine(eng.config, capacity=bank.capacity).process(x)
        assert np.array_equal(solo.fc_hz, tr.fc_hz)
        assert np.array_equal(solo.hnr_db, tr.hnr_db)
        assert np.array_equal(solo.cs, tr.cs)
        assert np.array_equal(solo.strobe, tr.strobe)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 2.0))
def test_confinement_holds(seed, gain):
    x = synth_harmonic(HarmonicSpec.from_pairs(FULL), make_f0_track("step", 90.0, 140.0, duration=0.2), FS, seed=seed)
    x = x + gain * np.random.default_rng(seed).standard_normal(len(x))
    bank = scan_bank(85.0, 150.0)
    r = math.sqrt(SEMITONE)
    for eng, tr in zip(bank.instances, bank.process(x)):
        f = eng.config.fc0
        assert np.all(tr.fc_hz >= f / r * (1 - 1e-12))
        assert np.all(tr.fc_hz <= f * r * (1 + 1e-12))


def test_unconfined_bank_uses_template_bounds():
    bank = bank_create(BankConfig(100.0, 120.0, confine=False))
    for eng in bank.instances:
        assert eng.config.fc_min == 96.0
        assert eng.config.fc_max == FS / 4


def test_non_finite_rejected_before_any_instance_runs():
    bank = scan_bank(100.0, 130.0)
    bank.tick(0.5)
    before = [e.fc for e in bank.instances]
    with pytest.raises(InputError):
        bank.tick(float("nan"))
    assert bank.index == 0
    assert [e.fc for e in bank.instances] == before
    with pytest.raises(InputError):
        bank.process([0.0, float("inf")])


def test_tick_reports_every_instance():
    bank = scan_bank(100.0, 130.0)
    out = bank.tick(0.1)
    assert out.index == 0
    assert len(out.outputs) == len(bank)


def test_silence_gives_no_persistent_lock():
    bank = scan_bank(80.0, 200.0)
    assert persistent_locks(bank.process(np.zeros(2000))) == []


def test_tone_cell_stands_out_in_scan():
    # A clean 100 Hz complex: the cell holding 100 Hz carries the strongest
    # final-window HNR by a wide margin.
    x = synth_harmonic(HarmonicSpec.from_pairs(FULL), make_f0_track("constant", 100.0, duration=0.4), FS, seed=0)
    bank = scan_bank(80.0, 200.0)
    traces = bank.process(x)
    final = [np.mean(tr.hnr_db[-500:]) for tr in traces]
    best = int(np.argmax(final))
    lo, hi = bank.instances[best].config.fc_min, bank.instances[best].config.fc_max
    assert lo <= 100.0 <= hi
    runner_up = max(v for k, v in enumerate(final) if k != best)
    assert final[best] - runner_up >= 10.0
    assert persistent_locks(traces, threshold_db=final[best] - 5.0) == [best]


def test_threshold_moves_persistent_set():
    x = build_signal("I", 1, 0).x
    traces = scan_bank(80.0, 200.0).process(x)
    assert set(persistent_locks(traces, threshold_db=20.0)) <= set(persistent_locks(traces))


def test_chord_multi_lock():
    for seed in range(10):
        res = run_preset("VI", 0, seed)
        assert len(res.traces) == 3
        assert persistent_locks(res.traces) == [0, 1, 2]


def test_chord_bank_instances_are_free():
    res = run_preset("VI", 0, 0)
    assert [c.fc0 for c in res.configs] == [183.6, 231.3, 275.1]
    spec = HarmonicSpec.from_pairs(CHORD_TONE)
    assert 7 * 275.1 < FS / 2 and spec.power == pytest.approx(1.3)


def test_mixed_rates_rejected():
    with pytest.raises(ConfigError):
        Bank([EngineConfig(), EngineConfig(fs=8000.0)])
    with pytest.raises(ConfigError):
        Bank([])
