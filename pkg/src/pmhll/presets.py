"""The six reference scenarios (I-VI) and a runner that scores them.

Variant indices are zero-based: preset I variant 1 is noise gain 0.5,
preset V variant 2 is IRN with one iteration.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from . import analysis
from .bank import Bank
from .core import Engine, EngineConfig, Trace
from .signals import (
    HarmonicSpec,
    IrnSpec,
    NoiseSpec,
    chord_tones,
    irn_fundamental,
    make_f0_track,
    mix_noise,
    snr_db,
    synth_harmonic,
    synth_irn,
)

__all__ = ["Preset", "PRESETS", "SimSignal", "SimResult", "build_signal", "run_preset"]

FULL = ((1, 0.5), (3, 0.9), (4, 0.7), (6, 0.9), (7, 0.7))
UPPER = ((6, 0.9), (7, 0.7))
CHORD_TONE = ((3, 0.9), (4, 0.7), (6, 0.9), (7, 0.7))


@dataclass(frozen=True)
class Preset:
    id: str
    description: str
    duration: float
    variants: tuple[dict, ...]
    fc0: tuple[float, ...] = (99.5,)


PRESETS: dict[str, Preset] = {
    p.id: p
    for p in (
        Preset(
            "I",
            "complex tone, f0 98.5 Hz then 101.0 Hz",
            0.4,
            tuple({"gain": g} for g in (0.1, 0.5, 1.0)),
        ),
        Preset(
            "II",
            "as I at gain 0.5 with all components mistuned",
            0.4,
            tuple({"gain": 0.5, "mistune": d} for d in (6.0, -6.0)),
        ),
        Preset(
            "III",
            "missing fundamental, harmonics 6 and 7 only",
            0.4,
            ({"gain": 0.5},),
        ),
        Preset(
            "IV",
            "complex tone, f0 sweeping 96 to 103 Hz",
            0.1,
            tuple({"gain": g} for g in (0.1, 0.5, 1.0)),
        ),
        Preset(
            "V",
            "iterated rippled noise at 98 Hz",
            0.2,
            tuple({"iterations": k} for k in (5, 3, 1)),
        ),
        Preset(
            "VI",
            "major chord on 170 Hz, three instances",
            0.2,
            ({"gain": 1.5},),
            fc0=(183.6, 231.3, 275.1),
        ),
    )
}


@dataclass
class SimSignal:
    x: np.ndarray
    f0: list[np.ndarray]
    snr_db: dict[str, float]
    spec: dict


@dataclass
class SimResult:
    preset: str
    variant: int
    seed: int
    fs: float
    signal: SimSignal
    configs: list[EngineConfig]
    traces: list[Trace]
    reports: list[analysis.TrackingReport] = field(default_factory=list)


def _variant(preset_id: str, variant: int) -> tuple[Preset, dict]:
    try:
        preset = PRESETS[preset_id]
    except KeyError:
        raise KeyError(f"unknown preset {preset_id!r}; choose from {', '.join(PRESETS)}") from None
    if not 0 <= variant < len(preset.variants):
        raise KeyError(f"preset {preset_id} has variants 0..{len(preset.variants) - 1}")
    return preset, preset.variants[variant]


def build_signal(preset_id: str, variant: int = 0, seed: int = 0, fs: float = 5000.0) -> SimSignal:
    """Synthesize the input and ground truth of one preset variant."""
    preset, v = _variant(preset_id, variant)
    phase_seed, noise_seed = np.random.SeedSequence(seed).spawn(2)
    T = preset.duration
    n = int(round(T * fs))

    if preset_id == "V":
        irn = IrnSpec(delay=1.0 / 98.0, iterations=v["iterations"], segment_duration=T, seed=phase_seed)
        x = synth_irn(irn, fs)
        f0 = irn_fundamental(irn, fs)
        spec = {"kind": "irn", **dataclasses.asdict(dataclasses.replace(irn, seed=seed)), "realized_f0": f0}
        return SimSignal(x, [np.full(n, f0)], {}, spec)

    if preset_id == "VI":
        harm = HarmonicSpec.from_pairs(CHORD_TONE)
        tones, tracks = chord_tones(170.0, (0, 4, 7), harm, fs, T, phase_seed)
        clean = np.sum(tones, axis=0)
        x, snr_all = mix_noise(clean, NoiseSpec(v["gain"], noise_seed))
        noise = x - clean
        snrs = {"all_tones_vs_noise": snr_all}
        for k, tone in enumerate(tones):
            others = clean - tone
            snrs[f"tone{k + 1}_vs_noise"] = snr_db(tone, noise)
            snrs[f"tone{k + 1}_vs_noise_and_tones"] = snr_db(tone, noise + others)
        spec = {
            "kind": "chord",
            "base_f0": 170.0,
            "semitones": [0, 4, 7],
            "components": [list(c) for c in CHORD_TONE],
            "f0": [t.values[0] for t in tracks],
            "gain": v["gain"],
        }
        return SimSignal(x, [t.sample(fs, n) for t in tracks], snrs, spec)

    pairs = UPPER if preset_id == "III" else FULL
    harm = HarmonicSpec.from_pairs(pairs, mistune=v.get("mistune", 0.0))
    if preset_id == "IV":
        track = make_f0_track("sweep", 96.0, 103.0, duration=T)
    else:
        track = make_f0_track("step", 98.5, 101.0, duration=T)
    clean = synth_harmonic(harm, track, fs, T, seed=phase_seed)
    x, snr = mix_noise(clean, NoiseSpec(v["gain"], noise_seed))
    spec = {
        "kind": "harmonic",
        "components": [list(p) for p in pairs],
        "mistune": harm.mistune,
        "f0_track": {"kind": track.kind, "values": list(track.values)},
        "gain": v["gain"],
    }
    return SimSignal(x, [track.sample(fs, n)], {"snr": snr}, spec)


def run_preset(
    preset_id: str,
    variant: int = 0,
    seed: int = 0,
    fs: float = 5000.0,
    template: EngineConfig | None = None,
    exclude_fraction: float = 0.1,
) -> SimResult:
    """Synthesize, track and score one preset variant."""
    preset, _ = _variant(preset_id, variant)
    template = template or EngineConfig(fs=fs)
    sig = build_signal(preset_id, variant, seed, fs)
    if len(preset.fc0) == 1:
        cfg = dataclasses.replace(template, fs=fs, fc0=preset.fc0[0])
        configs = [cfg]
        traces = [Engine(cfg).process(sig.x)]
    else:
        bank = Bank.from_frequencies(preset.fc0, dataclasses.replace(template, fs=fs))
        configs = [e.config for e in bank.instances]
        traces = bank.process(sig.x)
    reports = [
        analysis.make_report(tr.fc_hz, tr.hnr_db, fs, f0, exclude_fraction)
        for tr, f0 in zip(traces, sig.f0)
    ]
    return SimResult(preset_id, variant, seed, fs, sig, configs, traces, reports)
