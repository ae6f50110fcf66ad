"""Scoring of tracker output against a known fundamental trajectory."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

__all__ = [
    "TrackingReport",
    "tracking_error",
    "convergence_time",
    "lock_intervals",
    "tracking_lag",
    "period_average",
    "make_report",
]


@dataclass
class TrackingReport:
    mean_err: float | None
    std_err: float | None
    exclude_fraction: float
    convergence_time: float | None
    lock_intervals: list[tuple[float, float]]
    mean_hnr_db: float | None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lock_intervals"] = [list(iv) for iv in self.lock_intervals]
        return d


def _as_pair(fc_trace, f0_track) -> tuple[np.ndarray, np.ndarray]:
    fc = np.asarray(fc_trace, dtype=float)
    f0 = np.broadcast_to(np.asarray(f0_track, dtype=float), fc.shape)
    return fc, f0


def tracking_error(fc_trace, f0_track, exclude_fraction: float = 0.1) -> tuple[float, float]:
    """Mean and (population) standard deviation of ``fc - f0``.

    The first ``exclude_fraction`` of the trace is the initial convergence
    phase and is left out.
    """
    fc, f0 = _as_pair(fc_trace, f0_track)
    start = int(round(exclude_fraction * len(fc)))
    err = fc[start:] - f0[start:]
    if err.size == 0:
        raise ValueError("empty evaluation window")
    return float(err.mean()), float(err.std())


def convergence_time(fc_trace, f0_track, fs: float, tol: float = 1.0, hold: float = 0.02):
    """First time after which ``|fc - f0| <= tol`` holds for ``hold`` seconds.

    A hold window that would run past the end of the trace is cut at the
    end. Returns None if the condition is never met.
    """
    if tol <= 0 or hold < 0:
        raise ValueError("need tol > 0 and hold >= 0")
    fc, f0 = _as_pair(fc_trace, f0_track)
    ok = np.abs(fc - f0) <= tol
    n = len(ok)
    # run[i]: length of the all-ok run starting at i
    run = np.zeros(n + 1, dtype=int)
    for i in range(n - 1, -1, -1):
        run[i] = run[i + 1] + 1 if ok[i] else 0
    need = int(round(hold * fs)) + 1
    for i in range(n):
        if run[i] >= min(need, n - i):
            return i / fs
    return None


def lock_intervals(hnr_trace_db, fs: float) -> list[tuple[float, float]]:
    """Maximal runs with HNR above 0 dB as ``(start_s, end_s)``, end exclusive."""
    locked = np.asarray(hnr_trace_db, dtype=float) > 0.0
    edges = np.diff(np.concatenate(([0], locked.astype(np.int8), [0])))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    return [(s / fs, e / fs) for s, e in zip(starts, ends)]


def tracking_lag(fc_trace, f0_track, fs: float, max_lag: float, exclude_fraction: float = 0.1) -> float:
    """Time shift (s) of the estimate that minimizes its mean squared error.

    A positive value means ``fc`` trails ``f0``.
    """
    fc, f0 = _as_pair(fc_trace, f0_track)
    start = int(round(exclude_fraction * len(fc)))
    best, best_lag = np.inf, 0
    for lag in range(int(round(max_lag * fs)) + 1):
        e = fc[start + lag :] - f0[start : len(f0) - lag]
        if e.size == 0:
            break
        mse = float(np.mean(e * e))
        if mse < best:
            best, best_lag = mse, lag
    return best_lag / fs


def period_average(fc_trace, strobe) -> np.ndarray:
    """Replace each sample of ``fc`` by its mean over the enclosing strobe interval.

    Samples before the first strobe form the first interval.
    """
    fc = np.asarray(fc_trace, dtype=float)
    seg = np.cumsum(np.asarray(strobe, dtype=bool))
    sums = np.bincount(seg, weights=fc)
    counts = np.bincount(seg)
    return (sums / counts)[seg]


def make_report(
    fc_trace,
    hnr_trace_db,
    fs: float,
    f0_track=None,
    exclude_fraction: float = 0.1,
    tol: float = 1.0,
    hold: float = 0.02,
) -> TrackingReport:
    """Bundle the statistics of one run; error terms need ground truth."""
    hnr = np.asarray(hnr_trace_db, dtype=float)
    locked = hnr > 0
    mean_hnr = float(hnr[locked].mean()) if locked.any() else None
    if f0_track is None:
        mean = std = conv = None
    else:
        mean, std = tracking_error(fc_trace, f0_track, exclude_fraction)
        conv = convergence_time(fc_trace, f0_track, fs, tol, hold)
    return TrackingReport(
        mean_err=mean,
        std_err=std,
        exclude_fraction=exclude_fraction,
        convergence_time=conv,
        lock_intervals=lock_intervals(hnr, fs),
        mean_hnr_db=mean_hnr,
    )
