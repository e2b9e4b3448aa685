"""Mutual information against artificial periodic sequences and its
Monte-Carlo significance.

For a period ``n`` the analyzed sequence is compared with the artificial
sequence ``0, 1, ..., n-1, 0, 1, ...``. The contingency matrix ``m(i, j)``
counts positions with phase ``i`` carrying symbol ``j``; its mutual
information (in nats, not normalized by length) measures how strongly the
symbol distribution depends on the phase.

Significance is a Z-score of ``J = I - (n-1)(k-1)`` against backgrounds
obtained by permuting the sequence. Permutations keep the symbol counts
``y(j)`` and, because phases are a function of position only, the row sums
``x(i)`` too.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .core import EncodedSequence

DEFAULT_TRIALS = 100


class DegenerateBackground(ArithmeticError):
    """All background samples gave the same J; the Z-score is undefined."""


@dataclass(frozen=True, eq=False)
class ContingencyMatrix:
    counts: np.ndarray
    period: int

    @property
    def x(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def y(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def L(self) -> int:
        return int(self.counts.sum())

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape


@dataclass(frozen=True)
class BackgroundModel:
    """Randomization ensemble used for the Z-score.

    ``phase`` is the divisor period ``d`` whose residue classes are permuted
    independently; ``phase == 1`` is a full shuffle.
    """

    phase: int = 1
    trials: int = DEFAULT_TRIALS
    seed: int = 0

    def __post_init__(self):
        if self.trials < 2:
            raise ValueError("trials must be >= 2 to estimate a deviation")
        if self.phase < 1:
            raise ValueError("phase divisor must be >= 1")

    @property
    def kind(self) -> str:
        return "shuffle_all" if self.phase == 1 else "preserve_phase"

    @classmethod
    def shuffle_all(cls, trials: int = DEFAULT_TRIALS, seed: int = 0) -> "BackgroundModel":
        return cls(1, trials, seed)

    @classmethod
    def preserve_phase(cls, d: int, trials: int = DEFAULT_TRIALS, seed: int = 0) -> "BackgroundModel":
        return cls(d, trials, seed)

    def with_phase(self, d: int) -> "BackgroundModel":
        return BackgroundModel(d, self.trials, self.seed)


@dataclass(frozen=True)
class InfoStat:
    n: int
    I: float
    J: float
    df: int
    Z: float
    mc_mean: float
    mc_sd: float

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "I_nats": self.I,
            "J_nats": self.J,
            "df": self.df,
            "mc_mean": self.mc_mean,
            "mc_sd": self.mc_sd,
            "Z": self.Z,
        }


def chi2_reference(n: int, k: int) -> int:
    """Degrees of freedom of ``2I`` for an ``n x k`` table."""
    if n < 2 or k < 2:
        raise ValueError("n and k must be >= 2")
    return (n - 1) * (k - 1)


def _check_period(n: int, L: int) -> None:
    if n < 2 or 2 * n > L:
        raise ValueError(f"period {n} outside [2, {L // 2}] for length {L}")


def build_contingency(seq: EncodedSequence, n: int) -> ContingencyMatrix:
    """Count phase/symbol coincidences; phase 0 is the first position."""
    _check_period(n, seq.L)
    phase = np.arange(seq.L) % n
    counts = np.bincount(phase * seq.k + seq.data, minlength=n * seq.k)
    return ContingencyMatrix(counts.reshape(n, seq.k), n)


def contingency_batch(data: np.ndarray, n: int, k: int) -> np.ndarray:
    """Contingency counts for each row of a ``(T, L)`` index array -> ``(T, n, k)``."""
    T, L = data.shape
    cell = (np.arange(L) % n) * k + data
    cell += (np.arange(T) * (n * k))[:, None]
    return np.bincount(cell.ravel(), minlength=T * n * k).reshape(T, n, k)


def mutual_information_counts(counts: np.ndarray) -> np.ndarray | float:
    """Mutual information of one or many count tables (last two axes).

    Evaluated as ``sum m ln(m L / (x y))`` over non-empty cells, which equals
    ``sum m ln m - sum x ln x - sum y ln y + L ln L`` without its
    cancellation. The ratio is formed from exact integer products.
    """
    m = np.asarray(counts, dtype=np.int64)
    x = m.sum(axis=-1, keepdims=True)
    y = m.sum(axis=-2, keepdims=True)
    L = m.sum(axis=(-2, -1), keepdims=True)
    num = m * L
    den = x * y
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(m > 0, m * np.log(num / np.where(den > 0, den, 1)), 0.0)
    total = terms.sum(axis=(-2, -1))
    Lf = L.reshape(total.shape)
    bad = total < -1e-9 * np.maximum(Lf, 1)
    if np.any(bad):
        raise ArithmeticError(f"negative mutual information {total[bad]!r}")
    total = np.maximum(total, 0.0)
    return float(total) if total.ndim == 0 else total


def mutual_information(M: ContingencyMatrix | np.ndarray) -> float:
    counts = M.counts if isinstance(M, ContingencyMatrix) else M
    return mutual_information_counts(counts)


def _phase_rng(seed: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial_index])


def _trial_permutation(seed: int, trial_index: int, length: int, d: int) -> np.ndarray:
    """Index permutation of one background trial.

    Positions are shuffled within residue classes mod ``d``; the result
    depends only on the arguments, never on the sequence content.
    """
    rng = _phase_rng(seed, trial_index)
    if d == 1:
        return rng.permutation(length)
    idx = np.arange(length)
    for c in range(min(d, length)):
        cls = idx[c::d]
        idx[c::d] = cls[rng.permutation(cls.size)]
    return idx


@lru_cache(maxsize=512)
def _permutations(seed: int, trials: int, length: int, d: int) -> np.ndarray:
    idx = np.empty((trials, length), dtype=np.uint16 if length <= 2**16 else np.int64)
    for t in range(trials):
        idx[t] = _trial_permutation(seed, t + 1, length, d)
    idx.setflags(write=False)
    return idx


def sample_background(seq: EncodedSequence, model: BackgroundModel, trial_index: int) -> EncodedSequence:
    """One background sequence: symbols permuted within residue classes mod ``model.phase``.

    The stream depends only on ``(model.seed, trial_index)``.
    """
    idx = _trial_permutation(model.seed, trial_index, seq.L, model.phase)
    return EncodedSequence(seq.data[idx], seq.alphabet)


def background_batch(data: np.ndarray, model: BackgroundModel) -> np.ndarray:
    """``(trials, L)`` array of background samples for trials ``1..trials``."""
    return data[_permutations(model.seed, model.trials, data.size, model.phase)]


@lru_cache(maxsize=16)
def _xlogx_table(size: int) -> np.ndarray:
    v = np.arange(size + 1, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(v > 0, v * np.log(v), 0.0)
    out.setflags(write=False)
    return out


def _xlogx_sum(v: np.ndarray) -> float:
    v = v[v > 0].astype(float)
    return float((v * np.log(v)).sum())


def _mi_fixed_margins(counts: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Mutual information of tables that all share row sums ``x`` and column sums ``y``."""
    L = int(x.sum())
    tab = _xlogx_table(L)
    const = -_xlogx_sum(x) - _xlogx_sum(y) + (L * np.log(L) if L > 0 else 0.0)
    return np.maximum(tab[counts].sum(axis=(-2, -1)) + const, 0.0)


def _stat(n: int, k: int, I_obs: float, I_bg: np.ndarray) -> InfoStat:
    df = chi2_reference(n, k)
    J_bg = I_bg - df
    mean = float(J_bg.mean())
    sd = float(J_bg.std(ddof=1))
    J = I_obs - df
    if not sd > 1e-12 * max(1.0, abs(mean)):
        raise DegenerateBackground(f"background deviation is zero at n={n}")
    return InfoStat(n, I_obs, J, df, (J - mean) / sd, mean, sd)


def z_scores(
    seq: EncodedSequence,
    periods: Iterable[int],
    model: BackgroundModel,
    backgrounds: np.ndarray | None = None,
) -> list[InfoStat]:
    """Z-scores for several periods sharing one set of background samples.

    Each period's result is identical to :func:`z_score` for that period.
    """
    periods = list(periods)
    for n in periods:
        _check_period(n, seq.L)
    if backgrounds is None:
        backgrounds = background_batch(seq.data, model)
    out = []
    for n in periods:
        M = build_contingency(seq, n)
        I_obs = mutual_information(M)
        I_bg = _mi_fixed_margins(contingency_batch(backgrounds, n, seq.k), M.x, M.y)
        out.append(_stat(n, seq.k, I_obs, I_bg))
    return out


def z_score(seq: EncodedSequence, n: int, model: BackgroundModel) -> InfoStat:
    """Monte-Carlo Z of ``J`` at period ``n``.

    Raises :class:`DegenerateBackground` when every background sample has
    the same information (for instance a constant sequence).
    """
    return z_scores(seq, [n], model)[0]


def entropy_nats(counts: Sequence[int]) -> float:
    c = np.asarray(counts, dtype=float)
    c = c[c > 0]
    p = c / c.sum()
    return float(-(p * np.log(p)).sum())
