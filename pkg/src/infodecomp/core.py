"""Alphabets, sequence encoding, synthetic sequences and mutation."""

from __future__ import annotations

import string
import unicodedata
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

DNA_SYMBOLS = "acgt"
PROTEIN_SYMBOLS = "ACDEFGHIKLMNPQRSTVWY"
SPACE = " "

POLICIES = ("dna", "protein", "text")


class SequenceError(ValueError):
    """Raised for sequences that cannot be encoded or generated."""


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[str, ...]
    name: str = "custom"
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        symbols = tuple(self.symbols)
        object.__setattr__(self, "symbols", symbols)
        if len(set(symbols)) != len(symbols):
            raise SequenceError("alphabet symbols must be distinct")
        if len(symbols) < 2:
            raise SequenceError("alphabet needs at least two symbols")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(symbols)})

    @property
    def k(self) -> int:
        return len(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._index

    def index(self, symbol: str) -> int:
        return self._index[symbol]

    @classmethod
    def dna(cls) -> "Alphabet":
        return cls(tuple(DNA_SYMBOLS), "dna")

    @classmethod
    def protein(cls) -> "Alphabet":
        return cls(tuple(PROTEIN_SYMBOLS), "protein")

    @classmethod
    def from_symbols(cls, symbols: Iterable[str], name: str = "custom") -> "Alphabet":
        """Alphabet over the distinct symbols, in order of first appearance."""
        return cls(tuple(dict.fromkeys(symbols)), name)


@dataclass(frozen=True, eq=False)
class EncodedSequence:
    """A sequence of symbol indices into ``alphabet``.

    ``data`` is stored as a read-only int64 array so instances can be shared
    between threads.
    """

    data: np.ndarray
    alphabet: Alphabet

    def __post_init__(self):
        data = np.array(self.data, dtype=np.int64).ravel()
        if data.size and (data.min() < 0 or data.max() >= self.alphabet.k):
            raise SequenceError("symbol index outside alphabet")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def L(self) -> int:
        return int(self.data.size)

    @property
    def k(self) -> int:
        return self.alphabet.k

    def __len__(self) -> int:
        return self.L

    def __getitem__(self, item: slice) -> "EncodedSequence":
        if not isinstance(item, slice):
            raise TypeError("EncodedSequence supports slicing only")
        return EncodedSequence(self.data[item], self.alphabet)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EncodedSequence):
            return NotImplemented
        return self.alphabet == other.alphabet and np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash((self.alphabet, self.data.tobytes()))

    def decode(self) -> str:
        symbols = self.alphabet.symbols
        return "".join(symbols[i] for i in self.data)

    def counts(self) -> np.ndarray:
        return np.bincount(self.data, minlength=self.k)


@dataclass(frozen=True)
class MutationSpec:
    fraction: float
    seed: int = 0
    # "substitute": every chosen position takes a different symbol.
    # "redraw": chosen positions are redrawn uniformly, possibly unchanged.
    mode: str = "substitute"

    def __post_init__(self):
        if not 0.0 <= self.fraction <= 1.0:
            raise SequenceError(f"mutation fraction {self.fraction} outside [0, 1]")
        if self.mode not in ("substitute", "redraw"):
            raise SequenceError(f"unknown mutation mode {self.mode!r}")


def normalize_text(raw: str) -> str:
    """Case-fold and map punctuation to the space symbol.

    Whitespace of any kind becomes a single space character each; runs are
    kept. Characters that are neither letters, digits, punctuation nor
    whitespace (control characters) are dropped.
    """
    out = []
    for ch in raw.casefold():
        if ch.isspace():
            out.append(SPACE)
            continue
        cat = unicodedata.category(ch)
        if cat[0] == "P" or cat[0] == "S" or ch in string.punctuation:
            out.append(SPACE)
        elif cat[0] in ("L", "N", "M"):
            out.append(ch)
    return "".join(out)


def encode_text(
    raw: str,
    alphabet_policy: str | Alphabet = "dna",
    skip_unknown: bool = False,
) -> EncodedSequence:
    """Encode a character string under an alphabet policy.

    ``alphabet_policy`` is one of ``"dna"``, ``"protein"``, ``"text"`` or an
    explicit :class:`Alphabet`. DNA and protein use fixed canonical
    alphabets; symbols outside them raise :class:`SequenceError` unless
    ``skip_unknown`` is set. The text policy builds the alphabet from the
    observed symbols, with the space always a member.
    """
    if isinstance(alphabet_policy, Alphabet):
        alphabet = alphabet_policy
        chars = [c for c in raw if not c.isspace() or c in alphabet]
    elif alphabet_policy == "dna":
        alphabet = Alphabet.dna()
        chars = [c for c in raw.lower() if not c.isspace()]
    elif alphabet_policy == "protein":
        alphabet = Alphabet.protein()
        chars = [c for c in raw.upper() if not c.isspace() and c != "*"]
    elif alphabet_policy == "text":
        text = normalize_text(raw)
        if not text:
            raise SequenceError("empty sequence after normalization")
        observed = sorted(set(text) - {SPACE})
        alphabet = Alphabet((SPACE, *observed), "text")
        return EncodedSequence([alphabet.index(c) for c in text], alphabet)
    else:
        raise SequenceError(f"unknown alphabet policy {alphabet_policy!r}")

    data = []
    for pos, c in enumerate(chars):
        if c in alphabet:
            data.append(alphabet.index(c))
        elif not skip_unknown:
            raise SequenceError(f"symbol {c!r} at position {pos} not in {alphabet.name} alphabet")
    if not data:
        raise SequenceError("empty sequence after normalization")
    return EncodedSequence(data, alphabet)


def generate_periodic(pattern: EncodedSequence, repeats: int, tail: int = 0) -> EncodedSequence:
    """Repeat ``pattern`` and append its first ``tail`` symbols."""
    if repeats < 1:
        raise SequenceError("repeats must be >= 1")
    if not 0 <= tail < pattern.L:
        raise SequenceError(f"tail {tail} must be in [0, {pattern.L})")
    data = np.concatenate([np.tile(pattern.data, repeats), pattern.data[:tail]])
    return EncodedSequence(data, pattern.alphabet)


def periodic_from_string(pattern: str, repeats: int, tail: int = 0) -> EncodedSequence:
    """Periodic sequence over the distinct symbols of ``pattern`` (first-seen order)."""
    alphabet = Alphabet.from_symbols(pattern)
    return generate_periodic(
        EncodedSequence([alphabet.index(c) for c in pattern], alphabet), repeats, tail
    )


def generate_random(
    freqs: Sequence[float],
    L: int,
    seed: int = 0,
    alphabet: Alphabet | None = None,
) -> EncodedSequence:
    """I.i.d. sequence of length ``L`` with symbol probabilities ``freqs``."""
    p = np.asarray(freqs, dtype=float)
    if alphabet is None:
        if p.size <= len(string.ascii_lowercase):
            alphabet = Alphabet(tuple(string.ascii_lowercase[: p.size]))
        else:
            alphabet = Alphabet(tuple(chr(0x100 + i) for i in range(p.size)))
    if p.size != alphabet.k:
        raise SequenceError(f"{p.size} frequencies for alphabet of size {alphabet.k}")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise SequenceError("frequencies must be non-negative and sum to 1")
    if L < 1:
        raise SequenceError("L must be >= 1")
    rng = np.random.default_rng(seed)
    return EncodedSequence(rng.choice(alphabet.k, size=L, p=p), alphabet)


def mutate(seq: EncodedSequence, spec: MutationSpec) -> EncodedSequence:
    """Replace ``round(fraction * L)`` distinct positions chosen uniformly.

    In ``substitute`` mode each chosen position receives a uniformly drawn
    symbol other than its current one, so the Hamming distance to the input
    is exactly the number of chosen positions. In ``redraw`` mode the new
    symbol is drawn from the whole alphabet.
    """
    n_changes = int(round(spec.fraction * seq.L))
    if n_changes == 0:
        return seq
    rng = np.random.default_rng(spec.seed)
    positions = rng.choice(seq.L, size=n_changes, replace=False)
    data = seq.data.copy()
    k = seq.k
    if spec.mode == "substitute":
        # shift by 1..k-1 modulo k: uniform over the other symbols
        data[positions] = (data[positions] + rng.integers(1, k, size=n_changes)) % k
    else:
        data[positions] = rng.integers(0, k, size=n_changes)
    return EncodedSequence(data, seq.alphabet)


def hamming(a: EncodedSequence, b: EncodedSequence) -> int:
    if a.L != b.L:
        raise SequenceError("sequences differ in length")
    return int(np.count_nonzero(a.data != b.data))
