"""ID spectra, windowed scanning and period types."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .core import EncodedSequence
from .infostat import (
    BackgroundModel,
    DegenerateBackground,
    InfoStat,
    background_batch,
    build_contingency,
    chi2_reference,
    mutual_information_counts,
    z_score,
    z_scores,
)

DEFAULT_WINDOW = 2000
DEFAULT_STEP = 1000
DEFAULT_N_RANGE = (2, 200)
MIN_SUBSEQ = 50
# sub-sequences shorter than this fraction of the window are not searched
MIN_FRACTION = 0.5
GRID_DIVISIONS = 64
DEFAULT_SCREEN_TOP = 1


@dataclass
class IdSpectrum:
    entries: list[InfoStat]
    sequence_id: str = ""
    region: tuple[int, int] = (0, 0)

    def __post_init__(self):
        ns = [e.n for e in self.entries]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("spectrum entries must be strictly increasing in n")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def periods(self) -> list[int]:
        return [e.n for e in self.entries]

    def Z(self) -> np.ndarray:
        return np.array([e.Z for e in self.entries])

    def __getitem__(self, n: int) -> InfoStat:
        for e in self.entries:
            if e.n == n:
                return e
        raise KeyError(n)

    def best(self) -> InfoStat:
        """Entry with the largest Z (undefined Z values are ignored)."""
        finite = [e for e in self.entries if math.isfinite(e.Z)]
        return max(finite, key=lambda e: (e.Z, -e.n))

    def local_maxima(self) -> list[int]:
        z = self.Z()
        out = []
        for i, e in enumerate(self.entries):
            left = z[i - 1] if i > 0 else -np.inf
            right = z[i + 1] if i + 1 < len(z) else -np.inf
            if np.isfinite(z[i]) and z[i] > left and z[i] > right:
                out.append(e.n)
        return out

    def harmonics(self) -> list[int]:
        """Periods that are proper multiples of the main (max-Z) period."""
        main = self.best().n
        return [n for n in self.periods if n > main and n % main == 0]


@dataclass(frozen=True)
class ScanHit:
    window: tuple[int, int]
    subseq: tuple[int, int]
    n: int
    stat: InfoStat
    threshold_used: float
    sequence_id: str = ""

    def as_dict(self) -> dict:
        return {
            "sequence_id": self.sequence_id,
            "window": list(self.window),
            "subseq": list(self.subseq),
            "n": self.n,
            "threshold": self.threshold_used,
            **{k: v for k, v in self.stat.as_dict().items() if k != "n"},
        }


@dataclass(frozen=True, eq=False)
class PeriodType:
    """Canonical per-phase symbol probabilities ``t(i, j) = m(i, j) / x(i)``.

    ``rotation`` is the offset ``r`` such that canonical row ``i`` is row
    ``(i + r) mod n`` of the matrix anchored at the region start.
    """

    t: np.ndarray
    counts: np.ndarray
    rotation: int
    symbols: tuple[str, ...] = field(default=())

    @property
    def n(self) -> int:
        return self.t.shape[0]

    @property
    def empty_rows(self) -> np.ndarray:
        return self.counts.sum(axis=1) == 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, PeriodType):
            return NotImplemented
        return self.symbols == other.symbols and np.array_equal(self.t, other.t)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "symbols": list(self.symbols),
            "rotation": self.rotation,
            "t": [[float(v) for v in row] for row in self.t],
            "counts": self.counts.tolist(),
        }


def _model_for(n: int, model: BackgroundModel, triplet_aware: bool) -> BackgroundModel:
    if triplet_aware and n % 3 == 0 and model.phase == 1:
        return model.with_phase(3)
    return model


def _safe_stats(seq, periods, model, backgrounds) -> list[InfoStat]:
    out = []
    for n in periods:
        try:
            out.extend(z_scores(seq, [n], model, backgrounds))
        except DegenerateBackground:
            I = mutual_information_counts(build_contingency(seq, n).counts)
            df = chi2_reference(n, seq.k)
            out.append(InfoStat(n, I, I - df, df, math.nan, I - df, 0.0))
    return out


def spectrum(
    seq: EncodedSequence,
    n_range: Iterable[int] | tuple[int, int] = DEFAULT_N_RANGE,
    model: BackgroundModel | None = None,
    triplet_aware: bool = False,
    sequence_id: str = "",
    region: tuple[int, int] | None = None,
) -> IdSpectrum:
    """Z(n) for every period in ``n_range``.

    ``n_range`` is either an inclusive ``(n_min, n_max)`` pair or an explicit
    iterable of periods. With ``triplet_aware`` periods divisible by 3 are
    normalized against backgrounds that keep the composition of each codon
    position. Periods whose background is degenerate get ``Z = nan``.
    """
    model = model or BackgroundModel()
    periods = _periods(n_range)
    if not periods:
        raise ValueError("empty period range")
    if periods[0] < 2 or 2 * periods[-1] > seq.L:
        raise ValueError(f"periods must lie in [2, {seq.L // 2}]")
    groups: dict[BackgroundModel, list[int]] = {}
    for n in periods:
        groups.setdefault(_model_for(n, model, triplet_aware), []).append(n)
    stats = {}
    for m, ns in groups.items():
        backgrounds = background_batch(seq.data, m)
        for st in _safe_stats(seq, ns, m, backgrounds):
            stats[st.n] = st
    return IdSpectrum(
        [stats[n] for n in periods], sequence_id, region if region is not None else (0, seq.L)
    )


def _periods(n_range) -> list[int]:
    if isinstance(n_range, tuple) and len(n_range) == 2:
        return list(range(n_range[0], n_range[1] + 1))
    return sorted(set(int(n) for n in n_range))


def _grid(W: int, n: int) -> np.ndarray:
    # stride is a multiple of the base stride so interval lengths repeat
    # across periods and background permutations can be reused
    base = max(W // GRID_DIVISIONS, 1)
    g = base * -(-n // base)
    pts = list(range(0, W, g))
    if pts[-1] != W:
        pts.append(W)
    return np.array(pts)


def min_subsequence(W: int, n: int, min_fraction: float = MIN_FRACTION) -> int:
    return max(2 * n, min(W, max(MIN_SUBSEQ, math.ceil(min_fraction * W))))


def candidate_intervals(W: int, n: int, min_fraction: float = MIN_FRACTION) -> list[tuple[int, int]]:
    """Grid intervals searched by :func:`best_subsequence`."""
    grid = _grid(W, n)
    min_len = min_subsequence(W, n, min_fraction)
    return [
        (int(s), int(e))
        for i, s in enumerate(grid)
        for e in grid[i + 1 :]
        if e - s >= min_len
    ]


def _screen_scores(window: EncodedSequence, n: int, intervals: np.ndarray) -> np.ndarray:
    """Approximate Z of every interval from a chi-square null with
    Williams' small-sample correction; used only to rank candidates."""
    k = window.k
    grid = _grid(window.L, n)
    seg = np.searchsorted(grid, np.arange(window.L), side="right") - 1
    phase = np.arange(window.L) % n
    cells = seg * (n * k) + phase * k + window.data
    seg_counts = np.bincount(cells, minlength=len(grid) * n * k).reshape(len(grid), n, k)
    prefix = np.concatenate([np.zeros((1, n, k), dtype=np.int64), np.cumsum(seg_counts, axis=0)])
    gi = {int(p): i for i, p in enumerate(grid)}
    si = np.array([gi[s] for s in intervals[:, 0]])
    ei = np.array([gi[e] for e in intervals[:, 1]])
    counts = prefix[ei] - prefix[si]
    I = mutual_information_counts(counts)

    length = (intervals[:, 1] - intervals[:, 0]).astype(float)
    q0 = np.floor(length / n)
    r = length - q0 * n
    inv_x = (n - r) / q0 + r / (q0 + 1)
    y = counts.sum(axis=1)
    k_obs = (y > 0).sum(axis=1)
    with np.errstate(divide="ignore"):
        inv_y = np.where(y > 0, 1.0 / np.maximum(y, 1), 0.0).sum(axis=1)
    df = (n - 1) * (k_obs - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = 1.0 + (length * inv_x - 1.0) * (length * inv_y - 1.0) / (6.0 * length * df)
        score = (I - q * df / 2.0) / (q * np.sqrt(df / 2.0))
    return np.where(df > 0, score, -np.inf)


def best_subsequence(
    window: EncodedSequence,
    n: int,
    model: BackgroundModel | None = None,
    triplet_aware: bool = False,
    screen_top: int | None = DEFAULT_SCREEN_TOP,
    min_fraction: float = MIN_FRACTION,
) -> tuple[int, int, InfoStat]:
    """Sub-interval of ``window`` with the largest Monte-Carlo Z at period ``n``.

    Candidates are grid intervals (stride ``max(n, W/64)``, the window end
    always included) at least ``max(2n, 50, min_fraction * W)`` long; the
    length floor keeps the number of tested intervals, and with it the
    false-positive rate at a fixed threshold, under control. With ``screen_top`` set,
    only that many candidates with the best approximate score get the
    Monte-Carlo evaluation; ``None`` evaluates all of them. Ties go to the
    longer interval, then to the smaller start.

    Returns ``(start, end, stat)`` relative to the window.
    """
    model = _model_for(n, model or BackgroundModel(), triplet_aware)
    if window.L < 2 * n:
        raise ValueError(f"window of length {window.L} shorter than two periods of {n}")
    intervals = np.array(candidate_intervals(window.L, n, min_fraction), dtype=np.int64)
    if screen_top is not None and len(intervals) > screen_top:
        score = _screen_scores(window, n, intervals)
        # stable: descending score, then longer, then smaller start
        order = np.lexsort((intervals[:, 0], -(intervals[:, 1] - intervals[:, 0]), -score))
        intervals = intervals[order[:screen_top]]

    best = None
    for s, e in intervals:
        try:
            st = z_score(window[int(s) : int(e)], n, model)
        except DegenerateBackground:
            continue
        key = (st.Z, e - s, -s)
        if best is None or key > best[0]:
            best = (key, int(s), int(e), st)
    if best is None:
        raise DegenerateBackground(f"no candidate interval has a usable background at n={n}")
    return best[1], best[2], best[3]


def windows(L: int, window_len: int = DEFAULT_WINDOW, step: int = DEFAULT_STEP) -> list[tuple[int, int]]:
    """Window coordinates; a final window is aligned to the sequence end."""
    if window_len >= L:
        return [(0, L)]
    if step < 1:
        raise ValueError("step must be >= 1")
    out = [(s, s + window_len) for s in range(0, L - window_len + 1, step)]
    if out[-1][1] < L:
        out.append((L - window_len, L))
    return out


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("ID_THREADS", "1")))
    except ValueError:
        return 1


def _scan_window(seq, win, periods, threshold, model, triplet_aware, screen_top, min_fraction, sequence_id):
    a, b = win
    w = seq[a:b]
    hits = []
    for n in periods:
        if 2 * n > w.L:
            break
        try:
            s, e, st = best_subsequence(w, n, model, triplet_aware, screen_top, min_fraction)
        except DegenerateBackground:
            continue
        if st.Z >= threshold:
            hits.append(ScanHit((a, b), (a + s, a + e), n, st, threshold, sequence_id))
    return hits


def scan(
    seq: EncodedSequence,
    window_len: int = DEFAULT_WINDOW,
    step: int = DEFAULT_STEP,
    n_range: Iterable[int] | tuple[int, int] = DEFAULT_N_RANGE,
    threshold: float = 7.0,
    model: BackgroundModel | None = None,
    triplet_aware: bool = False,
    screen_top: int | None = DEFAULT_SCREEN_TOP,
    min_fraction: float = MIN_FRACTION,
    sequence_id: str = "",
    threads: int | None = None,
) -> list[ScanHit]:
    """Windowed search for significant latent periods.

    Every window is searched for the best sub-sequence at each period; hits
    reaching ``threshold`` are kept. A hit found again by an overlapping
    window (same period and coordinates) is reported once, with its
    highest Z. Output is ordered by window start, then period, and does not
    depend on ``threads`` (default: ``ID_THREADS`` or 1).
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    model = model or BackgroundModel()
    periods = _periods(n_range)
    wins = windows(seq.L, window_len, step)
    args = (periods, threshold, model, triplet_aware, screen_top, min_fraction, sequence_id)
    threads = threads or _threads()
    if threads > 1 and len(wins) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_window = list(pool.map(lambda w: _scan_window(seq, w, *args), wins))
    else:
        per_window = [_scan_window(seq, w, *args) for w in wins]

    best: dict[tuple[int, int, int], ScanHit] = {}
    for hits in per_window:
        for h in hits:
            key = (h.n, *h.subseq)
            if key not in best or h.stat.Z > best[key].stat.Z:
                best[key] = h
    return sorted(best.values(), key=lambda h: (h.window[0], h.n, h.subseq))


def _canonical_rotation(t: np.ndarray) -> int:
    n = t.shape[0]
    best = 0
    best_key = tuple(t.ravel())
    for r in range(1, n):
        key = tuple(np.roll(t, -r, axis=0).ravel())
        if key < best_key:
            best, best_key = r, key
    return best


def period_type(region: EncodedSequence, n: int) -> PeriodType:
    """Type matrix of a latent period in canonical cyclic rotation.

    The rotation chosen makes the row-major flattened probabilities
    lexicographically smallest; the earliest such rotation wins ties.
    """
    if n < 1 or region.L < n:
        raise ValueError(f"region of length {region.L} shorter than period {n}")
    phase = np.arange(region.L) % n
    counts = np.bincount(phase * region.k + region.data, minlength=n * region.k).reshape(n, region.k)
    x = counts.sum(axis=1, keepdims=True)
    t = np.divide(counts, x, out=np.zeros(counts.shape), where=x > 0)
    r = _canonical_rotation(t)
    return PeriodType(
        np.roll(t, -r, axis=0), np.roll(counts, -r, axis=0), r, region.alphabet.symbols
    )


def rotate(seq: EncodedSequence, r: int) -> EncodedSequence:
    """Cyclic left shift by ``r`` positions."""
    return EncodedSequence(np.roll(seq.data, -r), seq.alphabet)


def harmonic_flags(spec: IdSpectrum) -> dict[int, bool]:
    h = set(spec.harmonics())
    return {n: n in h for n in spec.periods}
