"""Deterministic test-signal synthesis.

Harmonic complexes with an arbitrary fundamental trajectory, iterated
rippled noise (add-same network built from circular shifts), chords, and
additive Gaussian noise at a fixed gain.

All randomness goes through :func:`make_rng`, which wraps numpy's PCG64
bit generator. PCG64 and ``Generator.standard_normal`` /
``Generator.uniform`` are stable across platforms, so a seed fully
determines every sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "SignalError",
    "make_rng",
    "Component",
    "HarmonicSpec",
    "F0Track",
    "NoiseSpec",
    "IrnSpec",
    "make_f0_track",
    "synth_harmonic",
    "synth_irn",
    "irn_fundamental",
    "mix_noise",
    "chord_tones",
    "synth_chord",
    "harmonic_power",
    "snr_db",
]


class SignalError(ValueError):
    """Signal specification that cannot be rendered."""


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator for ``seed`` (int or ``np.random.SeedSequence``)."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class Component:
    """Harmonic number, linear amplitude and start phase (None draws it at random)."""

    n: int
    amplitude: float
    phase: float | None = None


@dataclass(frozen=True)
class HarmonicSpec:
    components: tuple[Component, ...]
    mistune: float = 0.0

    def __post_init__(self) -> None:
        ns = [c.n for c in self.components]
        if not ns:
            raise SignalError("harmonic spec needs at least one component")
        if len(set(ns)) != len(ns) or min(ns) < 1:
            raise SignalError(f"harmonic numbers must be distinct and >= 1, got {ns}")
        if any(c.amplitude <= 0 for c in self.components):
            raise SignalError("amplitudes must be positive")

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[int, float]], mistune: float = 0.0) -> "HarmonicSpec":
        return cls(tuple(Component(n, a) for n, a in pairs), mistune)

    @property
    def power(self) -> float:
        return harmonic_power(self)


def harmonic_power(spec: HarmonicSpec) -> float:
    """Mean power of the complex, sum of a_n^2 / 2."""
    return sum(c.amplitude**2 for c in spec.components) / 2.0


@dataclass(frozen=True)
class F0Track:
    """Piecewise fundamental-frequency trajectory over ``[0, duration]``.

    ``kind`` is ``"constant"`` (values = (f,)), ``"step"`` (values =
    (first half, second half)) or ``"sweep"`` (values = (start, end),
    linear in time).
    """

    kind: str
    values: tuple[float, ...]
    duration: float

    def __post_init__(self) -> None:
        expected = {"constant": 1, "step": 2, "sweep": 2}
        if self.kind not in expected:
            raise SignalError(f"unknown f0 track kind {self.kind!r}")
        if len(self.values) != expected[self.kind]:
            raise SignalError(f"{self.kind} track takes {expected[self.kind]} value(s)")
        if any(v <= 0 for v in self.values):
            raise SignalError("fundamental frequencies must be positive")
        if self.duration <= 0:
            raise SignalError("duration must be positive")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.full_like(t, self.values[0])
        a, b = self.values
        if self.kind == "step":
            return np.where(t < self.duration / 2.0, a, b)
        return a + (b - a) * t / self.duration

    def sample(self, fs: float, n: int | None = None) -> np.ndarray:
        if n is None:
            n = int(round(self.duration * fs))
        return self(np.arange(n) / fs)

    @property
    def max_f0(self) -> float:
        return max(self.values)

    def scaled(self, k: float) -> "F0Track":
        return F0Track(self.kind, tuple(k * v for v in self.values), self.duration)


def make_f0_track(kind: str, *values: float, duration: float) -> F0Track:
    return F0Track(kind, tuple(float(v) for v in values), float(duration))


@dataclass(frozen=True)
class NoiseSpec:
    gain: float
    seed: int | np.random.SeedSequence = 0

    def __post_init__(self) -> None:
        if self.gain < 0:
            raise SignalError("noise gain must be >= 0")


@dataclass(frozen=True)
class IrnSpec:
    """Iterated rippled noise: ``iterations`` add-same stages at ``delay`` seconds."""

    delay: float
    iterations: int
    segment_duration: float
    source_duration: float = 4.0
    seed: int | np.random.SeedSequence = 0

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise SignalError("IRN needs at least one iteration")
        if self.delay <= 0:
            raise SignalError("IRN delay must be positive")
        if self.segment_duration > self.source_duration:
            raise SignalError("IRN segment longer than its source")


def synth_harmonic(
    spec: HarmonicSpec,
    track: F0Track,
    fs: float,
    duration: float | None = None,
    seed=None,
) -> np.ndarray:
    """Render ``sum a_n sin(n*phi - phi0_n)`` plus optional mistuning.

    ``phi`` integrates ``2*pi*f0/fs`` sample by sample starting at zero.
    A mistune of ``f_d`` Hz adds its own phase ramp to every component, so
    component ``n`` runs at ``n*f0(t) + f_d``.
    """
    if duration is None:
        duration = track.duration
    n_samples = int(round(duration * fs))
    top = max(c.n for c in spec.components) * track.max_f0 + spec.mistune
    if top >= fs / 2.0:
        raise SignalError(f"highest component at {top:.1f} Hz aliases at fs={fs}")
    low = min(c.n for c in spec.components) * min(track.values) + spec.mistune
    if low <= 0:
        raise SignalError("mistuning pushes a component to a non-positive frequency")

    rng = make_rng(seed if seed is not None else 0)
    f0 = track.sample(fs, n_samples)
    phi = np.concatenate(([0.0], np.cumsum(2.0 * np.pi * f0[:-1] / fs)))
    mistune_phase = 2.0 * np.pi * spec.mistune * np.arange(n_samples) / fs
    x = np.zeros(n_samples)
    for comp in spec.components:
        phase0 = comp.phase if comp.phase is not None else rng.uniform(0.0, 2.0 * np.pi)
        x += comp.amplitude * np.sin(comp.n * phi - phase0 + mistune_phase)
    return x


def irn_fundamental(spec: IrnSpec, fs: float) -> float:
    """Periodicity actually realized after rounding the delay to whole samples."""
    return fs / _irn_shift(spec, fs)


def _irn_shift(spec: IrnSpec, fs: float) -> int:
    return max(1, int(round(spec.delay * fs)))


def synth_irn(spec: IrnSpec, fs: float) -> np.ndarray:
    """Add-same IRN from a circularly shifted Gaussian source.

    Returns the centred segment of the requested length scaled to unit
    variance.
    """
    n_src = int(round(spec.source_duration * fs))
    n_seg = int(round(spec.segment_duration * fs))
    if n_seg > n_src:
        raise SignalError("IRN segment longer than its source")
    s = make_rng(spec.seed).standard_normal(n_src)
    shift = _irn_shift(spec, fs)
    for _ in range(spec.iterations):
        s = s + np.roll(s, shift)
    start = (n_src - n_seg) // 2
    seg = s[start : start + n_seg]
    return seg / np.std(seg)


def snr_db(signal, noise) -> float:
    p_noise = float(np.mean(np.square(noise)))
    if p_noise == 0.0:
        return math.inf
    return 10.0 * math.log10(float(np.mean(np.square(signal))) / p_noise)


def mix_noise(signal, noise: NoiseSpec) -> tuple[np.ndarray, float]:
    """Add ``gain * N(0, 1)`` noise; returns the mix and the realized SNR in dB.

    The SNR is measured over the whole signal. A zero gain yields ``inf``.
    """
    signal = np.asarray(signal, dtype=float)
    n = noise.gain * make_rng(noise.seed).standard_normal(signal.shape[0])
    return signal + n, snr_db(signal, n)


def chord_tones(
    base_f0: float,
    semitone_offsets: Sequence[int],
    per_tone: HarmonicSpec,
    fs: float,
    duration: float,
    seed=0,
) -> tuple[list[np.ndarray], list[F0Track]]:
    """Render each tone of an equal-tempered chord separately.

    Every tone gets its own random start phases, drawn from a child of
    ``seed``.
    """
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    children = seed.spawn(len(semitone_offsets))
    tones, tracks = [], []
    for k, child in zip(semitone_offsets, children):
        track = make_f0_track("constant", base_f0 * 2.0 ** (k / 12.0), duration=duration)
        tones.append(synth_harmonic(per_tone, track, fs, duration, seed=child))
        tracks.append(track)
    return tones, tracks


def synth_chord(
    base_f0: float,
    semitone_offsets: Sequence[int] = (0, 4, 7),
    per_tone: HarmonicSpec | None = None,
    fs: float = 5000.0,
    duration: float = 0.2,
    seed=0,
) -> tuple[np.ndarray, list[F0Track]]:
    if per_tone is None:
        per_tone = HarmonicSpec.from_pairs([(3, 0.9), (4, 0.7), (6, 0.9), (7, 0.7)])
    tones, tracks = chord_tones(base_f0, semitone_offsets, per_tone, fs, duration, seed)
    return np.sum(tones, axis=0), tracks
