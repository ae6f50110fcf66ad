"""Streaming fundamental-frequency and HNR tracking with a harmonic locked loop."""

__version__ = "0.1.0"

from .core import (
    ConfigError,
    Engine,
    EngineConfig,
    InputError,
    TickOutput,
    Trace,
    catch_range,
)
from .bank import Bank, BankConfig, bank_create
from .analysis import TrackingReport, make_report, tracking_error

__all__ = [
    "ConfigError",
    "Engine",
    "EngineConfig",
    "InputError",
    "TickOutput",
    "Trace",
    "catch_range",
    "Bank",
    "BankConfig",
    "bank_create",
    "TrackingReport",
    "make_report",
    "tracking_error",
]
