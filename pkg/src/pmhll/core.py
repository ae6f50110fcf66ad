"""Sample-by-sample harmonic locked loop.

The loop keeps an oscillator frequency ``fc`` and, for every input sample,

1. pushes the sample into a fractional delay line,
2. forms the period-constructive and period-suppressive comb outputs
   ``y_p = x(t) + x(t - Tc)`` and ``y_m = x(t) - x(t - Tc)``,
3. advances a phase accumulator that emits a strobe once per ``Tc``,
4. averages both comb outputs into strobe-aligned stabilized images,
5. estimates the harmonic-to-noise ratio from the stabilized images,
6. takes the smoothed rotation angle of ``y_p,SI + i*y_m,SI`` as the
   control signal, and
7. nudges ``fc`` down (control positive) or up (control negative) by a
   per-sample factor.

All time constants are multiples of the current period ``Tc = 1/fc`` and
are recomputed every sample, so the loop behaves identically after
transposing both the input and ``fc`` by a common factor.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConfigError",
    "InputError",
    "EngineConfig",
    "DelayLine",
    "StrobeState",
    "StabilizedImage",
    "LoopState",
    "TickOutput",
    "Trace",
    "Engine",
    "smoother_coefficient",
    "smoother_step",
    "comb_step",
    "strobe_step",
    "stabilized_image_update",
    "hnr_step",
    "control_step",
    "adaptation_factor",
    "adapt_step",
    "catch_range",
    "NOISE_HNR_BIAS_DB",
]

HNR_FLOOR = 1e-20
HNR_CLAMP_DB = 60.0
ARG_FLOOR = 1e-12

#: HNR that broadband noise produces at an integer period with the default
#: image smoothing: consecutive visits to an image slot share one input
#: sample, so the sum channel keeps (1 + a) / (1 - a) times the power of the
#: difference channel, a = exp(-1). Fractional periods land a little lower.
NOISE_HNR_BIAS_DB = 10.0 * math.log10((1.0 + math.exp(-1.0)) / (1.0 - math.exp(-1.0)))


class ConfigError(ValueError):
    """Invalid engine, bank or delay-line configuration."""


class InputError(ValueError):
    """Input sample that the engine cannot process (e.g. NaN)."""


@dataclass(frozen=True)
class EngineConfig:
    """Tunable constants of one loop instance.

    Time constants are given as multiples of the oscillator period ``Tc``.
    ``adapt_periods`` is the number of oscillator periods in which a
    sustained control signal moves ``fc`` by one equal-tempered semitone.
    """

    fs: float = 5000.0
    fc0: float = 99.5
    fc_min: float = 96.0
    fc_max: float | None = None
    np: int = 7
    tau_si_mult: float = 1.0
    tau_hnr_mult: float = 0.5
    tau_hnr_post_mult: float = 0.05
    tau_cs_mult: float = 0.1
    adapt_periods: float = 3.0

    def __post_init__(self) -> None:
        if self.fc_max is None:
            object.__setattr__(self, "fc_max", self.fs / 4.0)
        if not self.fs > 0:
            raise ConfigError(f"fs must be positive, got {self.fs}")
        if not 0 < self.fc_min <= self.fc0 <= self.fc_max <= self.fs / 2:
            raise ConfigError(
                "require 0 < fc_min <= fc0 <= fc_max <= fs/2, got "
                f"fc_min={self.fc_min}, fc0={self.fc0}, fc_max={self.fc_max}, fs={self.fs}"
            )
        if self.np < 1:
            raise ConfigError(f"np must be >= 1, got {self.np}")
        for name in ("tau_si_mult", "tau_hnr_mult", "tau_hnr_post_mult", "tau_cs_mult", "adapt_periods"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")

    @property
    def delay_capacity(self) -> int:
        return math.ceil(self.fs / self.fc_min) + 2


class DelayLine:
    """Ring buffer of recent input samples with linear-interpolated reads.

    ``read(0)`` returns the most recently pushed sample. The line can be
    shared by several loops; push once per sample, then read freely.
    """

    def __init__(self, capacity: int):
        if capacity < 2:
            raise ConfigError("delay line needs at least two slots")
        self.capacity = int(capacity)
        self.buffer = [0.0] * self.capacity
        self.write_index = 0

    @classmethod
    def for_config(cls, config: EngineConfig) -> "DelayLine":
        return cls(config.delay_capacity)

    def push(self, x: float) -> None:
        self.write_index = (self.write_index + 1) % self.capacity
        self.buffer[self.write_index] = x

    def read(self, delay: float) -> float:
        i0 = int(delay)
        frac = delay - i0
        if delay < 0 or i0 + (frac > 0) > self.capacity - 1:
            raise ConfigError(
                f"delay of {delay:.4f} samples exceeds delay line capacity {self.capacity}"
            )
        cap = self.capacity
        w = self.write_index
        x0 = self.buffer[(w - i0) % cap]
        if frac == 0.0:
            return x0
        x1 = self.buffer[(w - i0 - 1) % cap]
        return (1.0 - frac) * x0 + frac * x1


@dataclass
class StrobeState:
    phase_acc: float = 0.0
    samples_since_strobe: int = 0
    sample_index: int = -1
    strobe_times: list[int] = field(default_factory=list)


class StabilizedImage:
    """Strobe-aligned running average, one smoother per offset since strobe."""

    def __init__(self, length: int):
        self.buf = [0.0] * int(length)

    def __len__(self) -> int:
        return len(self.buf)


@dataclass
class LoopState:
    fc: float
    si_p: StabilizedImage
    si_m: StabilizedImage
    c_prev: complex = 0j
    cs_smoother: float = 0.0
    hnr_num_smoother: float = 0.0
    hnr_den_smoother: float = 0.0
    hnr_post_smoother: float = 0.0

    @property
    def tc(self) -> float:
        return 1.0 / self.fc


@dataclass(frozen=True, slots=True)
class TickOutput:
    fc_hz: float
    hnr_db: float
    cs: float
    strobe: bool
    locked: bool
    y_p: float
    y_m: float


@dataclass
class Trace:
    """Per-sample engine outputs collected over a whole run."""

    fs: float
    fc_hz: np.ndarray
    hnr_db: np.ndarray
    cs: np.ndarray
    strobe: np.ndarray
    locked: np.ndarray
    y_p: np.ndarray
    y_m: np.ndarray

    def __len__(self) -> int:
        return len(self.fc_hz)

    @property
    def t_s(self) -> np.ndarray:
        return np.arange(len(self)) / self.fs

    @classmethod
    def from_ticks(cls, fs: float, ticks: list[TickOutput]) -> "Trace":
        return cls(
            fs=fs,
            fc_hz=np.array([t.fc_hz for t in ticks], dtype=float),
            hnr_db=np.array([t.hnr_db for t in ticks], dtype=float),
            cs=np.array([t.cs for t in ticks], dtype=float),
            strobe=np.array([t.strobe for t in ticks], dtype=bool),
            locked=np.array([t.locked for t in ticks], dtype=bool),
            y_p=np.array([t.y_p for t in ticks], dtype=float),
            y_m=np.array([t.y_m for t in ticks], dtype=float),
        )


def smoother_coefficient(tau_s: float, fs: float) -> float:
    return math.exp(-1.0 / (tau_s * fs))


def smoother_step(y_prev: float, x: float, tau_s: float, fs: float) -> float:
    """One step of a first-order lowpass with time constant ``tau_s``.

    ``fs`` is the rate at which this particular smoother is updated.
    """
    a = math.exp(-1.0 / (tau_s * fs))
    return a * y_prev + (1.0 - a) * x


def comb_step(x_now: float, delay: DelayLine, tc: float, fs: float) -> tuple[float, float]:
    """Period-constructive and period-suppressive comb outputs.

    ``delay`` must already hold ``x_now`` at its head.
    """
    x_del = delay.read(tc * fs)
    return x_now + x_del, x_now - x_del


def strobe_step(state: StrobeState, fc: float, fs: float) -> bool:
    state.sample_index += 1
    state.phase_acc += fc / fs
    if state.phase_acc >= 1.0:
        state.phase_acc -= 1.0
        state.samples_since_strobe = 0
        state.strobe_times.append(state.sample_index)
        return True
    state.samples_since_strobe += 1
    return False


def stabilized_image_update(
    img: StabilizedImage, s_now: float, t_prime: int, tc: float, tau_mult: float = 1.0
) -> float:
    """Average ``s_now`` into slot ``t_prime`` and return the slot value.

    Each slot is revisited once per oscillator period, so its smoother
    runs at rate ``1/tc``; a time constant of ``tau_mult * tc`` then spans
    ``tau_mult`` periods. Offsets beyond the buffer wrap around.
    """
    k = t_prime % len(img.buf)
    y = smoother_step(img.buf[k], s_now, tau_mult * tc, 1.0 / tc)
    img.buf[k] = y
    return y


def hnr_step(state: LoopState, y_p_si: float, y_m_si: float, cfg: EngineConfig) -> float:
    """Update the HNR estimate in dB from the stabilized comb outputs."""
    tc = state.tc
    fs = cfg.fs
    a = smoother_coefficient(cfg.tau_hnr_mult * tc, fs)
    state.hnr_num_smoother = a * state.hnr_num_smoother + (1.0 - a) * y_p_si * y_p_si
    state.hnr_den_smoother = a * state.hnr_den_smoother + (1.0 - a) * y_m_si * y_m_si
    ratio = state.hnr_num_smoother / (state.hnr_den_smoother + HNR_FLOOR)
    raw_db = 10.0 * math.log10(ratio) if ratio > 0 else -HNR_CLAMP_DB
    raw_db = min(max(raw_db, -HNR_CLAMP_DB), HNR_CLAMP_DB)
    state.hnr_post_smoother = smoother_step(
        state.hnr_post_smoother, raw_db, cfg.tau_hnr_post_mult * tc, fs
    )
    return min(max(state.hnr_post_smoother, -HNR_CLAMP_DB), HNR_CLAMP_DB)


def control_step(state: LoopState, y_p_si: float, y_m_si: float, cfg: EngineConfig) -> float:
    """Smoothed per-sample rotation angle of ``y_p,SI + i*y_m,SI`` (rad/sample)."""
    c = complex(y_p_si, y_m_si)
    c_prev = state.c_prev
    if abs(c) < ARG_FLOOR or abs(c_prev) < ARG_FLOOR:
        adc = 0.0
    else:
        adc = cmath.phase(c * c_prev.conjugate())
    state.c_prev = c
    state.cs_smoother = smoother_step(state.cs_smoother, adc, cfg.tau_cs_mult * state.tc, cfg.fs)
    return state.cs_smoother


def adaptation_factor(fc: float, fs: float, adapt_periods: float) -> float:
    """Per-sample factor that moves ``fc`` a semitone in ``adapt_periods`` periods."""
    return 2.0 ** (fc / (12.0 * adapt_periods * fs))


def adapt_step(state: LoopState, cs: float, cfg: EngineConfig) -> float:
    fc = state.fc
    g = adaptation_factor(fc, cfg.fs, cfg.adapt_periods)
    if cs > 0:
        fc /= g
    elif cs < 0:
        fc *= g
    state.fc = min(max(fc, cfg.fc_min), cfg.fc_max)
    return state.fc


def catch_range(fc: float, np_: int) -> tuple[float, float]:
    """Interval of fundamentals the loop captures, assuming ``np_`` harmonics."""
    if fc <= 0 or np_ < 1:
        raise ConfigError("catch_range needs fc > 0 and np >= 1")
    half = 1.0 / (2.0 * np_)
    return fc * (1.0 - half), fc * (1.0 + half)


class Engine:
    """One loop instance fed one sample at a time.

    Parameters
    ----------
    config : EngineConfig
    delay : DelayLine, optional
        Externally owned delay line (see :class:`pmhll.bank.Bank`). When
        given, call :meth:`advance` after pushing each sample into it.
    capacity : int, optional
        Size of the private delay line and of the stabilized images.
        Defaults to ``config.delay_capacity``.
    frozen : bool
        Keep ``fc`` fixed at ``fc0``. Everything else runs normally, which
        gives the open-loop comb/HNR/control response at a known period.
    """

    def __init__(
        self,
        config: EngineConfig,
        delay: DelayLine | None = None,
        capacity: int | None = None,
        frozen: bool = False,
    ):
        self.config = config
        if delay is None:
            delay = DelayLine(capacity or config.delay_capacity)
            self._owns_delay = True
        else:
            self._owns_delay = False
        if delay.capacity < config.fs / config.fc_min + 1:
            raise ConfigError("delay line too short for fc_min")
        self.delay = delay
        self.frozen = frozen
        self.strobe = StrobeState()
        n = delay.capacity
        self.loop = LoopState(fc=config.fc0, si_p=StabilizedImage(n), si_m=StabilizedImage(n))

    @property
    def fc(self) -> float:
        return self.loop.fc

    def tick(self, x: float) -> TickOutput:
        if not self._owns_delay:
            raise RuntimeError("engine reads a shared delay line; push there and call advance()")
        x = float(x)
        if not math.isfinite(x):
            raise InputError(f"non-finite input sample {x!r}")
        self.delay.push(x)
        return self.advance(x)

    def advance(self, x: float) -> TickOutput:
        """Run one loop update; the delay line must already hold ``x``."""
        cfg = self.config
        loop = self.loop
        fs = cfg.fs
        tc = loop.tc

        y_p, y_m = comb_step(x, self.delay, tc, fs)
        strobe = strobe_step(self.strobe, loop.fc, fs)
        t_prime = self.strobe.samples_since_strobe
        p_si = stabilized_image_update(loop.si_p, y_p, t_prime, tc, cfg.tau_si_mult)
        m_si = stabilized_image_update(loop.si_m, y_m, t_prime, tc, cfg.tau_si_mult)
        hnr_db = hnr_step(loop, p_si, m_si, cfg)
        cs = control_step(loop, p_si, m_si, cfg)
        if not self.frozen:
            adapt_step(loop, cs, cfg)
        return TickOutput(
            fc_hz=loop.fc,
            hnr_db=hnr_db,
            cs=cs,
            strobe=strobe,
            locked=hnr_db > 0.0,
            y_p=y_p,
            y_m=y_m,
        )

    def process(self, samples) -> Trace:
        """Feed a whole sequence and collect the outputs."""
        x = np.asarray(samples, dtype=float)
        if x.ndim != 1:
            raise InputError("expected a 1-D sample sequence")
        if not np.all(np.isfinite(x)):
            raise InputError("input contains non-finite samples")
        return Trace.from_ticks(self.config.fs, [self.tick(v) for v in x.tolist()])
