"""Indicator-sequence Fourier spectrum, the baseline ID is compared with.

Each symbol ``j`` yields a 0/1 sequence marking its occurrences; the
mean-subtracted indicators are transformed and their squared magnitudes
summed. Frequencies ``f = 1 .. L//2`` are reported against the period
``L / f``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EncodedSequence

# comparison plots show power multiplied by this factor
POWER_SCALE = 1000.0


@dataclass(frozen=True, eq=False)
class PowerSpectrum:
    frequency: np.ndarray
    period_axis: np.ndarray
    power: np.ndarray
    per_symbol_power: np.ndarray | None = None
    L: int = 0

    def __repr__(self) -> str:
        return f"PowerSpectrum(L={self.L}, frequencies={len(self.frequency)}, peak_period={self.peak_period():.6g})"

    def at_period(self, period: float) -> float:
        """Power at the frequency ``L / period``, which must be an integer."""
        f = self.L / period
        if abs(f - round(f)) > 1e-9:
            raise ValueError(f"period {period} does not fall on a Fourier frequency for L={self.L}")
        return float(self.power[int(round(f)) - 1])

    def peak_period(self) -> float:
        return float(self.period_axis[int(np.argmax(self.power))])

    def total(self) -> float:
        return float(self.power.sum())


def indicators(seq: EncodedSequence) -> np.ndarray:
    """``(k, L)`` 0/1 matrix; row ``j`` marks positions holding symbol ``j``."""
    out = np.zeros((seq.k, seq.L))
    out[seq.data, np.arange(seq.L)] = 1.0
    return out


def fourier_spectrum(seq: EncodedSequence, keep_components: bool = True) -> PowerSpectrum:
    if seq.L < 4:
        raise ValueError("sequence too short for a spectrum")
    x = indicators(seq)
    x -= x.mean(axis=1, keepdims=True)
    F = np.fft.rfft(x, axis=1)
    nf = seq.L // 2
    comp = np.abs(F[:, 1 : nf + 1]) ** 2
    freq = np.arange(1, nf + 1)
    return PowerSpectrum(
        frequency=freq,
        period_axis=seq.L / freq,
        power=comp.sum(axis=0),
        per_symbol_power=comp if keep_components else None,
        L=seq.L,
    )


def full_power(seq: EncodedSequence) -> float:
    """Power summed over every frequency of the full transform."""
    x = indicators(seq)
    x -= x.mean(axis=1, keepdims=True)
    return float((np.abs(np.fft.fft(x, axis=1)) ** 2).sum())
