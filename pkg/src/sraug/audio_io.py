"""Mono waveform container, RIFF/WAVE file I/O, and sample-rate conversion.

All audio inside the toolkit is a single channel of float64 samples with a
nominal range of [-1, 1].  Files are plain RIFF/WAVE: PCM-16, PCM-24 and
IEEE float-32 are accepted on read, PCM-16 mono is written.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .errors import IoFailure, MalformedContainer, UnsupportedFormat

WAVE_FORMAT_PCM = 1
WAVE_FORMAT_IEEE_FLOAT = 3

# Windowed-sinc resampler parameters: Kaiser shape and zero-crossings per side.
_KAISER_BETA = 12.0
_ZERO_CROSSINGS = 64


@dataclass(frozen=True)
class Waveform:
    """Immutable mono audio snippet.

    samples: 1-D float array, nominal range [-1, 1], no NaN/Inf.
    sample_rate: sampling frequency in Hz, > 0.
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64)  # private copy
        if samples.ndim != 1:
            raise ValueError(f"samples must be 1-D, got shape {samples.shape}")
        if samples.size and not np.isfinite(samples).all():
            raise ValueError("samples contain NaN or Inf")
        rate = self.sample_rate
        if not (isinstance(rate, (int, np.integer)) and rate > 0):
            raise ValueError(f"sample_rate must be a positive integer, got {rate!r}")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(rate))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        """Length in seconds."""
        return self.samples.size / self.sample_rate


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def read_wav(path) -> Waveform:
    """Read a RIFF/WAVE file as a mono Waveform.

    PCM-16, PCM-24 and IEEE float-32 data are accepted, 1 or 2 channels;
    stereo is averaged down to mono.  Integer samples are scaled by
    2^(bits-1).  Unknown chunks are skipped.
    """
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return _decode_wav(blob, str(path))


def _decode_wav(blob: bytes, name: str) -> Waveform:
    if len(blob) < 12:
        raise MalformedContainer(f"{name}: too short for a RIFF header")
    if blob[0:4] != b"RIFF" or blob[8:12] != b"WAVE":
        raise MalformedContainer(f"{name}: not a RIFF/WAVE file")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(blob):
        chunk_id = blob[pos : pos + 4]
        (chunk_size,) = struct.unpack_from("<I", blob, pos + 4)
        body = blob[pos + 8 : pos + 8 + chunk_size]
        if len(body) < chunk_size:
            raise MalformedContainer(f"{name}: truncated '{chunk_id!r}' chunk")
        if chunk_id == b"fmt ":
            fmt = body
        elif chunk_id == b"data":
            data = body
        pos += 8 + chunk_size + (chunk_size & 1)  # chunks are word-aligned

    if fmt is None:
        raise MalformedContainer(f"{name}: missing fmt chunk")
    if data is None:
        raise MalformedContainer(f"{name}: missing data chunk")
    if len(fmt) < 16:
        raise MalformedContainer(f"{name}: fmt chunk too small")

    format_tag, n_channels, sample_rate, _, block_align, bits = struct.unpack_from(
        "<HHIIHH", fmt
    )
    if format_tag not in (WAVE_FORMAT_PCM, WAVE_FORMAT_IEEE_FLOAT):
        raise UnsupportedFormat(f"{name}: format tag {format_tag} (want 1 or 3)")
    if n_channels not in (1, 2):
        raise UnsupportedFormat(f"{name}: {n_channels} channels (want 1 or 2)")
    if format_tag == WAVE_FORMAT_PCM and bits not in (16, 24):
        raise UnsupportedFormat(f"{name}: {bits}-bit PCM (want 16 or 24)")
    if format_tag == WAVE_FORMAT_IEEE_FLOAT and bits != 32:
        raise UnsupportedFormat(f"{name}: {bits}-bit float (want 32)")
    if sample_rate == 0:
        raise MalformedContainer(f"{name}: zero sample rate")

    bytes_per_sample = bits // 8
    frame_size = bytes_per_sample * n_channels
    if block_align not in (0, frame_size):
        raise MalformedContainer(f"{name}: block align {block_align} != {frame_size}")
    if len(data) % frame_size != 0:
        raise MalformedContainer(f"{name}: data chunk is not a whole number of frames")

    if bits == 16:
        samples = np.frombuffer(data, dtype="<i2").astype(np.float64) / 2.0**15
    elif bits == 24:
        raw = np.frombuffer(data, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        ints = raw[:, 0] | (raw[:, 1] << 8) | (raw[:, 2] << 16)
        ints -= (ints & 0x800000) << 1  # sign-extend 24 -> 32 bits
        samples = ints.astype(np.float64) / 2.0**23
    else:
        samples = np.frombuffer(data, dtype="<f4").astype(np.float64)
        if samples.size and not np.isfinite(samples).all():
            raise MalformedContainer(f"{name}: non-finite float samples")

    if n_channels == 2:
        samples = samples.reshape(-1, 2).mean(axis=1)
    return Waveform(samples, int(sample_rate))


def write_wav(path, w: Waveform) -> None:
    """Write a Waveform as mono PCM-16 little-endian RIFF/WAVE.

    Samples are clamped to [-1, 1] and rounded half away from zero.
    """
    x = np.clip(w.samples, -1.0, 1.0) * 2.0**15
    ints = np.trunc(x + np.copysign(0.5, x))  # round half away from zero
    data = np.clip(ints, -32768, 32767).astype("<i2").tobytes()

    header = b"RIFF" + struct.pack("<I", 36 + len(data)) + b"WAVE"
    header += b"fmt " + struct.pack(
        "<IHHIIHH", 16, WAVE_FORMAT_PCM, 1, w.sample_rate, w.sample_rate * 2, 2, 16
    )
    header += b"data" + struct.pack("<I", len(data))
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(data)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def resample(w: Waveform, target_rate: int) -> Waveform:
    """Convert a Waveform to ``target_rate`` with a Kaiser-windowed sinc.

    Band-limited interpolation: the kernel is a sinc at the lower of the
    two Nyquist frequencies under a Kaiser window (beta 12.0, 64
    zero-crossings per side).  Output length is round(len * target / source).
    Equal rates return the input unchanged.
    """
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    if target_rate == w.sample_rate:
        return w
    n_in = len(w)
    n_out = _round_half_up(n_in * target_rate / w.sample_rate)
    if n_in == 0 or n_out == 0:
        return Waveform(np.zeros(n_out), int(target_rate))

    scale = min(1.0, target_rate / w.sample_rate)  # anti-alias cutoff factor
    half_width = _ZERO_CROSSINGS / scale  # kernel support per side, input samples
    width = int(math.ceil(half_width))
    padded = np.concatenate([np.zeros(width), w.samples, np.zeros(width)])
    offsets = np.arange(-width, width + 1)

    out = np.empty(n_out)
    step = w.sample_rate / target_rate
    # Chunk over output samples so the gather matrix stays small.
    chunk = max(1, int(4e6) // (2 * width + 1))
    for start in range(0, n_out, chunk):
        n = np.arange(start, min(start + chunk, n_out))
        centers = n * step
        base = np.minimum(np.floor(centers).astype(np.int64), n_in - 1)
        tau = centers[:, None] - (base[:, None] + offsets[None, :])
        kernel = scale * np.sinc(scale * tau) * _kaiser(tau / half_width)
        gathered = padded[base[:, None] + offsets[None, :] + width]
        out[n] = np.einsum("ij,ij->i", gathered, kernel)
    return Waveform(out, int(target_rate))


def _kaiser(u: np.ndarray) -> np.ndarray:
    """Kaiser window evaluated at normalized positions u in [-1, 1]."""
    inside = np.abs(u) < 1.0
    arg = np.where(inside, 1.0 - u * u, 0.0)
    return np.where(inside, np.i0(_KAISER_BETA * np.sqrt(arg)), 0.0) / np.i0(
        _KAISER_BETA
    )
