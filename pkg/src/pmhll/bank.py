"""Several loop instances driven in lockstep from one delay line."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ConfigError, DelayLine, Engine, EngineConfig, InputError, TickOutput, Trace

__all__ = ["BankConfig", "BankTick", "Bank", "bank_create", "persistent_locks"]

SEMITONE = 2.0 ** (1.0 / 12.0)


@dataclass(frozen=True)
class BankConfig:
    """Instances seeded at ``f_low * spacing**k`` up to ``f_high``.

    With ``confine`` set, instance ``k`` may only move inside its own cell
    ``[fc0 / sqrt(spacing), fc0 * sqrt(spacing)]``.
    """

    f_low: float
    f_high: float
    spacing: float = SEMITONE
    confine: bool = True
    template: EngineConfig = dataclasses.field(default_factory=EngineConfig)

    def __post_init__(self) -> None:
        if not 0 < self.f_low < self.f_high:
            raise ConfigError(f"need 0 < f_low < f_high, got {self.f_low}, {self.f_high}")
        if not self.spacing > 1:
            raise ConfigError("spacing must exceed 1")

    def seed_frequencies(self) -> list[float]:
        k_max = math.floor(math.log(self.f_high / self.f_low) / math.log(self.spacing) + 1e-9)
        return [self.f_low * self.spacing**k for k in range(k_max + 1)]


@dataclass(frozen=True)
class BankTick:
    index: int
    outputs: tuple[TickOutput, ...]


def _instance_config(template: EngineConfig, fc0: float, cell: tuple[float, float] | None) -> EngineConfig:
    if cell is not None:
        lo, hi = cell
    else:
        lo, hi = min(template.fc_min, fc0), max(template.fc_max, fc0)
    return dataclasses.replace(template, fc0=fc0, fc_min=lo, fc_max=min(hi, template.fs / 2))


class Bank:
    """Loop instances sharing one delay line.

    The shared line is sized for the lowest ``fc_min`` among the instances.
    Every instance sees the same samples and, apart from the shared
    storage, runs exactly like an independent :class:`Engine` of the same
    delay capacity.
    """

    def __init__(self, configs: Sequence[EngineConfig]):
        if not configs:
            raise ConfigError("a bank needs at least one instance")
        fs = configs[0].fs
        if any(c.fs != fs for c in configs):
            raise ConfigError("all instances must share one sampling rate")
        self.fs = fs
        self.capacity = max(c.delay_capacity for c in configs)
        self.delay = DelayLine(self.capacity)
        self.instances = [Engine(c, delay=self.delay) for c in configs]
        self.index = -1

    @classmethod
    def from_frequencies(
        cls,
        fc0s: Sequence[float],
        template: EngineConfig | None = None,
        spacing: float | None = None,
    ) -> "Bank":
        """Instances at explicit start frequencies.

        ``spacing`` confines each instance to its cell; None leaves them free
        within the template's bounds.
        """
        template = template or EngineConfig()
        cells = [None] * len(fc0s)
        if spacing is not None:
            r = math.sqrt(spacing)
            cells = [(f / r, f * r) for f in fc0s]
        return cls([_instance_config(template, f, c) for f, c in zip(fc0s, cells)])

    def __len__(self) -> int:
        return len(self.instances)

    @property
    def fc0s(self) -> list[float]:
        return [e.config.fc0 for e in self.instances]

    def tick(self, x: float) -> BankTick:
        x = float(x)
        if not math.isfinite(x):
            raise InputError(f"non-finite input sample {x!r}")
        self.delay.push(x)
        self.index += 1
        return BankTick(self.index, tuple(e.advance(x) for e in self.instances))

    def process(self, samples) -> list[Trace]:
        x = np.asarray(samples, dtype=float)
        if not np.all(np.isfinite(x)):
            raise InputError("input contains non-finite samples")
        ticks = [self.tick(v).outputs for v in x.tolist()]
        return [Trace.from_ticks(self.fs, [t[k] for t in ticks]) for k in range(len(self))]


def bank_create(cfg: BankConfig) -> Bank:
    seeds = cfg.seed_frequencies()
    if not seeds:
        raise ConfigError("band holds no instance")
    spacing = cfg.spacing if cfg.confine else None
    return Bank.from_frequencies(seeds, cfg.template, spacing)


def persistent_locks(traces: Sequence[Trace], window: float = 0.1, threshold_db: float = 0.0) -> list[int]:
    """Indices of instances whose mean HNR over the final ``window`` s
    exceeds ``threshold_db``.

    On broadband noise every instance sits a few dB above 0 (see
    :data:`pmhll.core.NOISE_HNR_BIAS_DB`), so a threshold at or above that
    level is needed to tell a real lock from noise.
    """
    out = []
    for k, tr in enumerate(traces):
        n = max(1, int(round(window * tr.fs)))
        if float(np.mean(tr.hnr_db[-n:])) > threshold_db:
            out.append(k)
    return out
