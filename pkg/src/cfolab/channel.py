"""Rayleigh block-fading multipath emulation with CFO, common phase, and AWGN.

Each OFDM symbol sees an L-tap channel whose tap powers follow an exponential
delay profile exp(-l/decay).  The carrier offset rotates the whole frame with
a continuously running sample index (one oscillator), and a single common
phase is drawn per frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import ConfigError
from .signal import PreambleFrame

MODE_STATIC = "static"
MODE_VARYING = "varying"


@dataclass(frozen=True)
class ChannelProfile:
    """Statistical description of the multipath channel.

    Args:
        path_count: number of taps L.
        decay: exponential delay-profile constant; tap l has mean power
            exp(-l/decay) before normalization.
        mode: "static" reuses one tap realization for the whole frame;
            "varying" redraws taps independently per symbol (block fading).
        normalize_power: scale every realization by 1/sqrt(sum exp(-l/decay))
            so the ensemble-mean received power is 1.
    """

    path_count: int
    decay: float
    mode: str = MODE_VARYING
    normalize_power: bool = True

    def __post_init__(self) -> None:
        if self.path_count < 1:
            raise ConfigError(f"path_count must be >= 1, got {self.path_count}")
        if not self.decay > 0:
            raise ConfigError(f"decay must be positive, got {self.decay}")
        if self.mode not in (MODE_STATIC, MODE_VARYING):
            raise ConfigError(f"mode must be '{MODE_STATIC}' or '{MODE_VARYING}', got {self.mode!r}")

    def tap_powers(self) -> np.ndarray:
        """Ensemble mean power per tap, after optional normalization."""
        p = np.exp(-np.arange(self.path_count) / self.decay)
        return p / p.sum() if self.normalize_power else p

    def mean_power(self) -> float:
        """Total ensemble mean received power for a unit-power input."""
        return float(self.tap_powers().sum())


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """One draw of the channel: complex taps plus the frame's common phase."""

    taps: np.ndarray
    phase_0: float


@dataclass(frozen=True)
class ImpairmentSpec:
    """Receiver-side impairments for one transmission.

    cfo is normalized to the subcarrier spacing; snr_db relates the total
    mean received signal power to the per-sample complex noise variance.
    snr_db may be +inf (or noise_enabled False) for a noiseless run.
    """

    cfo: float
    snr_db: float = math.inf
    noise_enabled: bool = True


@dataclass(frozen=True, eq=False)
class ReceivedFrame:
    """Channel output: the CP-intact stream plus the two CP-stripped windows."""

    n_fft: int
    cp_len: int
    stream: np.ndarray
    symbols: tuple[np.ndarray, ...]
    realizations: tuple[ChannelRealization, ...] | None = None
    impairment: ImpairmentSpec | None = None


def draw_channel(profile: ChannelProfile, rng: np.random.Generator) -> ChannelRealization:
    """Draw one tap realization and a common phase.

    Each tap is zero-mean circularly-symmetric complex Gaussian with variance
    equal to its profile power; phase_0 is uniform on [0, 2*pi).
    """
    std = np.sqrt(profile.tap_powers() / 2.0)
    taps = std * rng.standard_normal(profile.path_count) + 1j * (
        std * rng.standard_normal(profile.path_count)
    )
    phase_0 = float(rng.uniform(0.0, 2.0 * np.pi))
    return ChannelRealization(taps=taps, phase_0=phase_0)


def noise_variance(profile: ChannelProfile, snr_db: float) -> float:
    """Per-sample complex noise variance for a unit-power transmit waveform."""
    if math.isinf(snr_db):
        return 0.0
    return profile.mean_power() / (10.0 ** (snr_db / 10.0))


@lru_cache(maxsize=8)
def _cfo_ramp(cfo: float, n_fft: int, total_len: int) -> np.ndarray:
    ramp = np.exp(2j * np.pi * cfo * np.arange(total_len) / n_fft)
    ramp.flags.writeable = False
    return ramp


def transmit(
    frame: PreambleFrame,
    profile: ChannelProfile,
    imp: ImpairmentSpec,
    rng: np.random.Generator,
) -> ReceivedFrame:
    """Push a preamble frame through the fading channel with CFO and AWGN.

    Per symbol, the CP-extended block is convolved with that symbol's taps,
    then the whole frame is rotated by exp(j*(2*pi*cfo*n/n_fft + phase_0))
    with n running continuously from the first frame sample.  Complex white
    noise is added last.  Returns the CP-intact stream and the two
    CP-stripped N-sample windows.

    Raises:
        ConfigError: if the CP cannot absorb the channel memory or the
            offset exceeds half the signal bandwidth.
    """
    if frame.cp_len < profile.path_count - 1:
        raise ConfigError(
            f"cp_len={frame.cp_len} too short for {profile.path_count} paths "
            f"(need >= {profile.path_count - 1})"
        )
    if not abs(imp.cfo) < frame.n_fft / 2:
        raise ConfigError(f"|cfo| must be < n_fft/2 = {frame.n_fft / 2}, got {imp.cfo}")

    first = draw_channel(profile, rng)
    if profile.mode == MODE_VARYING:
        second = replace(draw_channel(profile, rng), phase_0=first.phase_0)
    else:
        second = first
    realizations = (first, second)

    blk = frame.block_len
    ramp = _cfo_ramp(imp.cfo, frame.n_fft, 2 * blk)
    common = np.exp(1j * first.phase_0)
    stream = np.empty(2 * blk, dtype=np.complex128)
    for s, real in enumerate(realizations):
        block = frame.samples[s * blk : (s + 1) * blk]
        faded = np.convolve(real.taps, block)[:blk]
        stream[s * blk : (s + 1) * blk] = faded
    stream *= ramp
    stream *= common

    if imp.noise_enabled and not math.isinf(imp.snr_db):
        sigma2 = noise_variance(profile, imp.snr_db)
        scale = math.sqrt(sigma2 / 2.0)
        stream += scale * rng.standard_normal(2 * blk) + 1j * (
            scale * rng.standard_normal(2 * blk)
        )

    cp = frame.cp_len
    windows = tuple(stream[s * blk + cp : s * blk + cp + frame.n_fft].copy() for s in range(2))
    return ReceivedFrame(
        n_fft=frame.n_fft,
        cp_len=cp,
        stream=stream,
        symbols=windows,
        realizations=realizations,
        impairment=imp,
    )
