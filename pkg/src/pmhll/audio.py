"""Mono WAV and raw float32 input/output."""

from __future__ import annotations

import os
import warnings

import numpy as np
from scipy.io import wavfile

__all__ = [
    "AudioFormatError",
    "StereoInputError",
    "SampleRateMismatch",
    "MalformedHeader",
    "write_wav16",
    "write_wav_float",
    "write_raw_f32",
    "read_raw_f32",
    "read_wav",
    "load_audio",
]


class AudioFormatError(ValueError):
    """Input audio that cannot be used as-is."""


class StereoInputError(AudioFormatError):
    pass


class SampleRateMismatch(AudioFormatError):
    pass


class MalformedHeader(AudioFormatError):
    pass


def write_wav16(path, x, fs: float, normalize: bool = True) -> float:
    """Write 16-bit PCM. Returns the gain applied before quantization.

    With ``normalize`` the peak is scaled to 0.99 of full scale; otherwise
    samples are clipped to [-1, 1].
    """
    x = np.asarray(x, dtype=float)
    gain = 1.0
    peak = float(np.max(np.abs(x))) if x.size else 0.0
    if normalize and peak > 0:
        gain = 0.99 / peak
    pcm = np.round(np.clip(x * gain, -1.0, 1.0) * 32767.0).astype("<i2")
    wavfile.write(path, int(fs), pcm)
    return gain


def write_wav_float(path, x, fs: float) -> None:
    wavfile.write(path, int(fs), np.asarray(x, dtype="<f4"))


def write_raw_f32(path, x) -> None:
    np.asarray(x, dtype="<f4").tofile(path)


def read_raw_f32(path) -> np.ndarray:
    size = os.path.getsize(path)
    if size % 4:
        raise MalformedHeader(f"{path}: raw float32 file size {size} is not a multiple of 4")
    return np.fromfile(path, dtype="<f4").astype(float)


def read_wav(path) -> tuple[np.ndarray, int]:
    """Read a mono 16-bit integer or 32-bit float WAV as float64."""
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", wavfile.WavFileWarning)
            fs, data = wavfile.read(path)
    except (ValueError, EOFError) as exc:
        raise MalformedHeader(f"{path}: {exc}") from exc
    if data.ndim != 1:
        raise StereoInputError(f"{path}: expected mono, found {data.shape[1]} channels")
    if data.dtype == np.int16:
        return data.astype(float) / 32768.0, int(fs)
    if data.dtype == np.float32:
        return data.astype(float), int(fs)
    raise MalformedHeader(f"{path}: unsupported sample format {data.dtype}")


def load_audio(path, fs: float | None, engine_fs: float) -> np.ndarray:
    """Load ``path`` for an engine running at ``engine_fs``.

    ``.wav`` files are parsed as RIFF; anything else is raw little-endian
    float32 and needs ``fs``. No resampling is ever done.
    """
    if str(path).lower().endswith(".wav"):
        x, file_fs = read_wav(path)
        if file_fs != engine_fs:
            raise SampleRateMismatch(f"{path}: file rate {file_fs} Hz, engine rate {engine_fs:g} Hz")
        return x
    if fs is None:
        raise ValueError("raw float32 input needs --fs")
    if fs != engine_fs:
        raise SampleRateMismatch(f"raw rate {fs:g} Hz, engine rate {engine_fs:g} Hz")
    return read_raw_f32(path)
