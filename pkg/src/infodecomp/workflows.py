"""Simulation and threshold-calibration workflows built on the scanner."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Alphabet, MutationSpec, generate_random, mutate, periodic_from_string
from .infostat import BackgroundModel
from .scan import IdSpectrum, best_subsequence, spectrum

HUMAN_GENOME_FREQS = {"a": 0.26, "c": 0.24, "g": 0.24, "t": 0.26}


def replicate_seed(seed: int, replicate: int) -> int:
    """Independent 63-bit seed for one replicate of a run seeded with ``seed``."""
    return int(np.random.SeedSequence([seed, replicate]).generate_state(1, np.uint64)[0] >> 1)


@dataclass
class SimulationResult:
    periods: list[int]
    spectra: list[IdSpectrum]

    def z_matrix(self) -> np.ndarray:
        """``(replicates, periods)`` array of Z values."""
        return np.array([s.Z() for s in self.spectra])

    def mean_curve(self) -> np.ndarray:
        return np.nanmean(self.z_matrix(), axis=0)

    def z_at(self, n: int) -> np.ndarray:
        return self.z_matrix()[:, self.periods.index(n)]


def simulate(
    pattern: str = "ATAAACT",
    repeats: int = 100,
    mutation: float = 0.0,
    replicates: int = 1,
    n_range: tuple[int, int] = (2, 100),
    trials: int = 100,
    seed: int = 0,
    mutation_mode: str = "redraw",
) -> SimulationResult:
    """ID spectra of a mutated perfect repeat, one per replicate.

    Replicate ``r`` mutates with its own seed and normalizes against
    backgrounds seeded the same way. ``n_max`` is clamped to ``L // 2``.
    """
    base = periodic_from_string(pattern, repeats)
    n_min, n_max = n_range
    n_max = min(n_max, base.L // 2)
    spectra = []
    for r in range(replicates):
        rs = replicate_seed(seed, r)
        seq = mutate(base, MutationSpec(mutation, rs, mutation_mode))
        spectra.append(
            spectrum(seq, (n_min, n_max), BackgroundModel(trials=trials, seed=rs), sequence_id=f"replicate{r}")
        )
    return SimulationResult(list(range(n_min, n_max + 1)), spectra)


@dataclass
class CalibrationResult:
    max_z: np.ndarray
    best_period: np.ndarray
    alpha: float

    def fraction_above(self, threshold: float) -> float:
        return float(np.mean(self.max_z > threshold))

    def suggested_threshold(self) -> float:
        """Upper ``1 - alpha`` quantile of the per-window maximum Z, rounded up to 0.1."""
        q = float(np.quantile(self.max_z, 1.0 - self.alpha))
        return math.ceil(q * 10.0 - 1e-9) / 10.0

    def summary(self) -> dict:
        return {
            "windows": int(self.max_z.size),
            "alpha": self.alpha,
            "max_z_quantiles": {
                str(q): float(np.quantile(self.max_z, q)) for q in (0.5, 0.9, 0.95, 0.99)
            },
            "max_z_max": float(self.max_z.max()),
            "fraction_above": {str(t): self.fraction_above(t) for t in (5.0, 6.0, 7.0)},
            "suggested_threshold": self.suggested_threshold(),
        }


def window_max_z(window, periods, model: BackgroundModel, **kw) -> tuple[float, int]:
    """Largest best-sub-sequence Z over ``periods`` and the period reaching it."""
    best = (-math.inf, 0)
    for n in periods:
        if 2 * n > window.L:
            break
        _, _, st = best_subsequence(window, n, model, **kw)
        if st.Z > best[0]:
            best = (st.Z, n)
    return best


def calibrate(
    freqs=tuple(HUMAN_GENOME_FREQS.values()),
    length: int = 2000,
    windows: int = 100,
    n_range: tuple[int, int] = (2, 200),
    trials: int = 100,
    seed: int = 0,
    alpha: float = 0.01,
    alphabet: Alphabet | None = None,
    **kw,
) -> CalibrationResult:
    """Distribution of the per-window maximum Z on i.i.d. random windows."""
    if alphabet is None and len(freqs) == 4:
        alphabet = Alphabet.dna()
    periods = range(n_range[0], n_range[1] + 1)
    max_z = np.empty(windows)
    best_n = np.empty(windows, dtype=int)
    for w in range(windows):
        ws = replicate_seed(seed, w)
        seq = generate_random(freqs, length, seed=ws, alphabet=alphabet)
        max_z[w], best_n[w] = window_max_z(seq, periods, BackgroundModel(trials=trials, seed=ws), **kw)
    return CalibrationResult(max_z, best_n, alpha)
