"""STFT analysis/synthesis, mel filterbank, log-mel extraction and inversion.

Conventions used throughout:

* matrices are time-major: shape [n_frames, n_bins];
* analysis is center-aligned: the signal is reflect-padded by n_fft/2 on
  each side, so frame k is centered on sample k*hop of the original;
* log-mels are the natural log of magnitude-domain mel energies, floored
  at ``log_floor`` before the log.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .audio_io import Waveform
from .errors import (
    ConfigMismatch,
    DegenerateWindowSum,
    IoFailure,
    MalformedContainer,
    UnsupportedFormat,
)

_MELF_MAGIC = b"MELF"
_MELF_VERSION = 1
_MELF_HEADER = struct.Struct("<4sIIIII")

# Tolerance when checking log-mel values against the configured floor;
# covers float32 round-trips through the MELF container.
_FLOOR_SLACK = 1e-4

_NNLS_ITERS = 50
_NNLS_EPS = 1e-18


@dataclass(frozen=True)
class SpectralConfig:
    """Analysis parameters shared by every spectral value."""

    n_fft: int = 1280
    win_size: int = 1280
    hop_size: int = 320
    n_mels: int = 80
    sample_rate: int = 16000
    fmin: float = 0.0
    fmax: float = 8000.0
    log_floor: float = 1e-5

    def __post_init__(self):
        for name in ("n_fft", "win_size", "hop_size", "n_mels", "sample_rate"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.win_size > self.n_fft:
            raise ValueError("win_size must not exceed n_fft")
        if self.hop_size > self.win_size:
            raise ValueError("hop_size must not exceed win_size")
        if not 0 <= self.fmin < self.fmax <= self.sample_rate / 2:
            raise ValueError("need 0 <= fmin < fmax <= sample_rate/2")
        if self.log_floor <= 0:
            raise ValueError("log_floor must be positive")

    @property
    def n_bins(self) -> int:
        """Number of one-sided FFT bins."""
        return self.n_fft // 2 + 1


@dataclass(frozen=True)
class ComplexSpectrogram:
    """Complex STFT frames, [n_frames, n_fft/2+1]."""

    values: np.ndarray
    config: SpectralConfig

    def __post_init__(self):
        values = np.array(self.values, dtype=np.complex128)
        _check_frames(values, self.config.n_bins, finite=True)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class LinearSpectrogram:
    """Non-negative magnitude frames, [n_frames, n_fft/2+1]."""

    mags: np.ndarray
    config: SpectralConfig

    def __post_init__(self):
        mags = np.array(self.mags, dtype=np.float64)
        _check_frames(mags, self.config.n_bins, finite=True)
        if mags.size and mags.min() < 0:
            raise ValueError("magnitudes must be non-negative")
        mags.flags.writeable = False
        object.__setattr__(self, "mags", mags)

    @property
    def n_frames(self) -> int:
        return self.mags.shape[0]


@dataclass(frozen=True)
class MelSpectrogram:
    """Log-mel frames, [n_frames, n_mels], floored at ln(log_floor)."""

    logmels: np.ndarray
    config: SpectralConfig

    def __post_init__(self):
        logmels = np.array(self.logmels, dtype=np.float64)
        _check_frames(logmels, self.config.n_mels, finite=True)
        floor = math.log(self.config.log_floor)
        if logmels.size and logmels.min() < floor - _FLOOR_SLACK:
            raise ValueError(f"log-mel entries below ln(log_floor) = {floor:.6f}")
        logmels.flags.writeable = False
        object.__setattr__(self, "logmels", logmels)

    @property
    def n_frames(self) -> int:
        return self.logmels.shape[0]


@dataclass(frozen=True)
class MelFilterbank:
    """Triangular mel filter weights, [n_mels, n_fft/2+1]."""

    weights: np.ndarray

    def __post_init__(self):
        weights = np.array(self.weights, dtype=np.float64)
        if weights.ndim != 2:
            raise ValueError("weights must be a 2-D matrix")
        if not np.isfinite(weights).all():
            raise ValueError("weights must be finite")
        if weights.min() < 0:
            raise ValueError("weights must be non-negative")
        if not (weights > 0).any(axis=1).all():
            raise ValueError("every filter needs at least one positive weight")
        weights.flags.writeable = False
        object.__setattr__(self, "weights", weights)

    @property
    def n_mels(self) -> int:
        return self.weights.shape[0]

    @property
    def n_bins(self) -> int:
        return self.weights.shape[1]


def _check_frames(values: np.ndarray, n_bins: int, finite: bool) -> None:
    if values.ndim != 2:
        raise ValueError(f"expected 2-D [n_frames, bins], got shape {values.shape}")
    if values.shape[1] != n_bins:
        raise ValueError(f"expected {n_bins} bins per frame, got {values.shape[1]}")
    if finite and values.size and not np.isfinite(values).all():
        raise ValueError("entries must be finite")


# ---------------------------------------------------------------------------
# windows and framing


@lru_cache(maxsize=32)
def _analysis_window(cfg: SpectralConfig) -> np.ndarray:
    """Periodic Hann of win_size, zero-padded (centered) out to n_fft."""
    n = np.arange(cfg.win_size)
    hann = 0.5 - 0.5 * np.cos(2.0 * np.pi * n / cfg.win_size)
    if cfg.win_size < cfg.n_fft:
        lpad = (cfg.n_fft - cfg.win_size) // 2
        out = np.zeros(cfg.n_fft)
        out[lpad : lpad + cfg.win_size] = hann
        hann = out
    hann.flags.writeable = False
    return hann


def _n_frames(n_samples: int, cfg: SpectralConfig) -> int:
    return n_samples // cfg.hop_size + 1


def _stft_raw(x: np.ndarray, cfg: SpectralConfig) -> np.ndarray:
    """STFT of a raw sample array; returns complex [n_frames, n_bins]."""
    pad = cfg.n_fft // 2
    padded = np.pad(x, pad, mode="reflect")
    frames = np.lib.stride_tricks.sliding_window_view(padded, cfg.n_fft)[
        :: cfg.hop_size
    ]
    return np.fft.rfft(frames * _analysis_window(cfg), cfg.n_fft, axis=1)


def _overlap_add(frames: np.ndarray, hop: int) -> np.ndarray:
    """Sum frames at hop-spaced offsets; returns length (T-1)*hop + frame_len."""
    n_frames, frame_len = frames.shape
    n_chunks = -(-frame_len // hop)  # ceil
    padded_len = n_chunks * hop
    if padded_len != frame_len:
        frames = np.pad(frames, ((0, 0), (0, padded_len - frame_len)))
    chunks = frames.reshape(n_frames, n_chunks, hop)
    acc = np.zeros((n_frames + n_chunks - 1, hop))
    for j in range(n_chunks):
        acc[j : j + n_frames] += chunks[:, j, :]
    return acc.reshape(-1)[: (n_frames - 1) * hop + frame_len]


@lru_cache(maxsize=4)
def _window_sum(cfg: SpectralConfig, n_frames: int) -> np.ndarray:
    """Overlap-added squared synthesis window for a given frame count."""
    win_sq = _analysis_window(cfg) ** 2
    wsum = _overlap_add(np.broadcast_to(win_sq, (n_frames, cfg.n_fft)), cfg.hop_size)
    wsum.flags.writeable = False
    return wsum


def _istft_raw(values: np.ndarray, cfg: SpectralConfig) -> np.ndarray:
    """Inverse of _stft_raw; returns the trimmed raw sample array."""
    n_frames = values.shape[0]
    pad = cfg.n_fft // 2
    out_len = (n_frames - 1) * cfg.hop_size
    if out_len <= 0:
        return np.zeros(0)
    frames = np.fft.irfft(values, cfg.n_fft, axis=1) * _analysis_window(cfg)
    acc = _overlap_add(frames, cfg.hop_size)
    wsum = _window_sum(cfg, n_frames)
    region = slice(pad, pad + out_len)
    denom = wsum[region]
    if denom.min() < 1e-9:
        raise DegenerateWindowSum(
            f"window sum fell below 1e-9 (min {denom.min():.3e}); "
            "this hop/window combination cannot be inverted"
        )
    return acc[region] / denom


# ---------------------------------------------------------------------------
# public operations


def stft(w: Waveform, cfg: SpectralConfig) -> ComplexSpectrogram:
    """Short-time Fourier transform with center alignment.

    The waveform is reflect-padded by n_fft/2 on each side and sliced into
    periodic-Hann-windowed frames every hop_size samples, giving
    floor(len/hop) + 1 frames.
    """
    if w.sample_rate != cfg.sample_rate:
        raise ConfigMismatch(
            f"waveform at {w.sample_rate} Hz vs config {cfg.sample_rate} Hz"
        )
    if len(w) < 1:
        raise ValueError("cannot analyze an empty waveform")
    return ComplexSpectrogram(_stft_raw(w.samples, cfg), cfg)


def istft(s: ComplexSpectrogram) -> Waveform:
    """Invert an STFT by normalized overlap-add.

    Frames are windowed again on synthesis and the result divided by the
    summed squared window, then the n_fft/2 center padding is trimmed:
    output length is (n_frames - 1) * hop_size.
    """
    return Waveform(_istft_raw(s.values, s.config), s.config.sample_rate)


def hz_to_mel(f):
    """Map frequency in Hz to mels, 2595 * log10(1 + f/700)."""
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    """Inverse of hz_to_mel."""
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@lru_cache(maxsize=32)
def _filterbank_weights(cfg: SpectralConfig) -> np.ndarray:
    fftfreqs = np.arange(cfg.n_bins) * (cfg.sample_rate / cfg.n_fft)
    mel_pts = np.linspace(hz_to_mel(cfg.fmin), hz_to_mel(cfg.fmax), cfg.n_mels + 2)
    hz_pts = mel_to_hz(mel_pts)

    fdiff = np.diff(hz_pts)
    ramps = hz_pts[:, None] - fftfreqs[None, :]
    lower = -ramps[:-2] / fdiff[:-1][:, None]
    upper = ramps[2:] / fdiff[1:][:, None]
    weights = np.maximum(0.0, np.minimum(lower, upper))
    # Area normalization: scale each triangle by 2 / bandwidth in Hz.
    weights *= (2.0 / (hz_pts[2:] - hz_pts[:-2]))[:, None]
    weights.flags.writeable = False
    return weights


def mel_filterbank(cfg: SpectralConfig) -> MelFilterbank:
    """Triangular filters with centers equally spaced in mels.

    Centers lie strictly between fmin and fmax on the
    2595*log10(1 + f/700) scale; each filter is scaled by 2/bandwidth so
    filters carry comparable area regardless of width.
    """
    return MelFilterbank(_filterbank_weights(cfg))


def mel_spectrogram(w: Waveform, cfg: SpectralConfig) -> MelSpectrogram:
    """Log-mel analysis: ln(max(filterbank @ |stft|, log_floor)).

    The filterbank is applied to magnitude (not power) spectra.
    """
    spec = stft(w, cfg)
    mags = np.abs(spec.values)
    mel = mags @ _filterbank_weights(cfg).T
    return MelSpectrogram(np.log(np.maximum(mel, cfg.log_floor)), cfg)


def mel_to_linear(m: MelSpectrogram, fb: MelFilterbank) -> LinearSpectrogram:
    """Approximately invert a log-mel matrix to linear magnitudes.

    Solves, per frame, the non-negative least-squares problem
    min ||W x - exp(logmels)||^2 over x >= 0 with 50 multiplicative
    updates starting from the transpose projection x0 = W^T m.
    """
    if m.config.n_mels != fb.n_mels:
        raise ConfigMismatch(
            f"mel has {m.config.n_mels} bands but filterbank has {fb.n_mels}"
        )
    target = np.exp(m.logmels)  # [T, M]
    weights = fb.weights  # [M, F]
    numer = target @ weights  # W^T m for every frame, constant
    x = numer.copy()
    for _ in range(_NNLS_ITERS):
        denom = (x @ weights.T) @ weights
        x *= numer / (denom + _NNLS_EPS)
    return LinearSpectrogram(x, m.config)


# ---------------------------------------------------------------------------
# MELF container


def write_melf(path, m: MelSpectrogram) -> None:
    """Serialize a MelSpectrogram to the MELF binary container.

    Layout: magic "MELF", then u32 version=1, n_frames, n_bins,
    sample_rate, hop_size (little-endian), then the frames as row-major
    (time-major) IEEE-754 float32.  Byte-for-byte reproducible.
    """
    header = _MELF_HEADER.pack(
        _MELF_MAGIC,
        _MELF_VERSION,
        m.n_frames,
        m.config.n_mels,
        m.config.sample_rate,
        m.config.hop_size,
    )
    data = m.logmels.astype("<f4").tobytes()
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(data)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_melf(path, base_config: SpectralConfig | None = None) -> MelSpectrogram:
    """Read a MELF container written by write_melf.

    The container stores band count, sample rate and hop size; remaining
    analysis parameters are taken from ``base_config`` (defaults when not
    given).
    """
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if len(blob) < _MELF_HEADER.size:
        raise MalformedContainer(f"{path}: too short for a MELF header")
    magic, version, n_frames, n_bins, sample_rate, hop_size = _MELF_HEADER.unpack_from(
        blob
    )
    if magic != _MELF_MAGIC:
        raise MalformedContainer(f"{path}: bad magic {magic!r}")
    if version != _MELF_VERSION:
        raise UnsupportedFormat(f"{path}: MELF version {version}")
    expected = n_frames * n_bins * 4
    payload = blob[_MELF_HEADER.size :]
    if len(payload) != expected:
        raise MalformedContainer(
            f"{path}: expected {expected} data bytes, found {len(payload)}"
        )
    values = np.frombuffer(payload, dtype="<f4").reshape(n_frames, n_bins)
    cfg = replace(
        base_config or SpectralConfig(),
        n_mels=int(n_bins),
        sample_rate=int(sample_rate),
        hop_size=int(hop_size),
    )
    return MelSpectrogram(values.astype(np.float64), cfg)
