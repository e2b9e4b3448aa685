"""Sequence input, result serialization and run configuration."""

from __future__ import annotations

import io
import json
import math
import os
import warnings
from dataclasses import dataclass, field
from typing import Iterable, TextIO

from .core import Alphabet, EncodedSequence, SequenceError, encode_text
from .infostat import InfoStat
from .scan import IdSpectrum, PeriodType, ScanHit

SPECTRUM_COLUMNS = ("n", "I_nats", "J_nats", "df", "mc_mean", "mc_sd", "Z")

DEFAULT_THRESHOLDS = {"dna": 7.0, "protein": 6.0, "text": 5.0, "custom": 7.0}


class FormatError(ValueError):
    """Malformed input file."""


@dataclass
class RunConfig:
    alphabet: str | Alphabet = "dna"
    n_min: int = 2
    n_max: int = 200
    window_len: int = 2000
    step: int = 1000
    trials: int = 100
    seed: int = 0
    threshold: float | None = None
    triplet_aware: bool = False
    output_format: str = "tsv"
    skip_unknown: bool = False
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.threshold is None:
            self.threshold = DEFAULT_THRESHOLDS[self.policy_name]
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")
        if self.output_format not in ("tsv", "json"):
            raise ValueError(f"unknown output format {self.output_format!r}")

    @property
    def policy_name(self) -> str:
        return self.alphabet.name if isinstance(self.alphabet, Alphabet) else self.alphabet


def parse_alphabet(value: str) -> str | Alphabet:
    """``dna``, ``protein``, ``text`` or ``custom=<symbols>``."""
    if value in ("dna", "protein", "text"):
        return value
    if value.startswith("custom="):
        return Alphabet.from_symbols(value[len("custom=") :], "custom")
    raise ValueError(f"unknown alphabet {value!r}")


def _encode(raw: str, policy, skip_unknown: bool) -> EncodedSequence:
    return encode_text(raw, policy, skip_unknown=skip_unknown)


def parse_fasta(handle: TextIO, policy="dna", skip_unknown: bool = False) -> list[tuple[str, EncodedSequence]]:
    records: list[tuple[str, list[str]]] = []
    for lineno, line in enumerate(handle, 1):
        line = line.rstrip("\r\n")
        if line.startswith(">"):
            header = line[1:].strip()
            if not header:
                raise FormatError(f"line {lineno}: empty FASTA header")
            records.append((header, []))
        elif line.strip():
            if not records:
                raise FormatError(f"line {lineno}: sequence data before the first header")
            records[-1][1].append(line.strip())
    if not records:
        warnings.warn("no FASTA records found", stacklevel=2)
    out = []
    for header, chunks in records:
        if not chunks:
            raise FormatError(f"record {header!r} has no sequence")
        try:
            seq = _encode("".join(chunks), policy, skip_unknown)
        except SequenceError as exc:
            raise SequenceError(f"record {header!r}: {exc}") from exc
        out.append((header, seq))
    return out


def read_fasta(path: str | os.PathLike, policy="dna", skip_unknown: bool = False) -> list[tuple[str, EncodedSequence]]:
    """Records of a FASTA file as ``(id, sequence)`` pairs in file order.

    The id is the header text after ``>``. Wrapped sequence lines are
    joined before encoding.
    """
    with open(path, encoding="utf-8") as fh:
        return parse_fasta(fh, policy, skip_unknown)


def read_sequences(path: str | os.PathLike, policy="dna", skip_unknown: bool = False) -> list[tuple[str, EncodedSequence]]:
    """FASTA when the first non-blank character is ``>``, otherwise one plain-text record."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith(">"):
        return parse_fasta(io.StringIO(text), policy, skip_unknown)
    if not text.strip():
        warnings.warn(f"{path} is empty", stacklevel=2)
        return []
    return [(os.path.basename(str(path)), _encode(text, policy, skip_unknown))]


def fmt(v: float) -> str:
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    return f"{v:.6g}"


def _round6(v):
    if isinstance(v, float):
        return None if math.isnan(v) else float(f"{v:.6g}")
    return v


def spectrum_to_tsv(spec: IdSpectrum) -> str:
    lines = ["\t".join(SPECTRUM_COLUMNS)]
    for e in spec.entries:
        lines.append("\t".join([str(e.n), fmt(e.I), fmt(e.J), str(e.df), fmt(e.mc_mean), fmt(e.mc_sd), fmt(e.Z)]))
    return "\n".join(lines) + "\n"


def spectrum_to_json(spec: IdSpectrum) -> dict:
    return {
        "sequence_id": spec.sequence_id,
        "region": list(spec.region),
        "entries": [{c: _round6(e.as_dict()[c]) for c in SPECTRUM_COLUMNS} for e in spec.entries],
    }


def write_spectrum(spec: IdSpectrum, fmt_name: str = "tsv") -> bytes:
    """Serialize a spectrum. TSV columns are ``n I_nats J_nats df mc_mean
    mc_sd Z``; JSON carries the same field names. Floats keep 6 significant
    digits."""
    if fmt_name == "tsv":
        return spectrum_to_tsv(spec).encode()
    if fmt_name == "json":
        return (json.dumps(spectrum_to_json(spec), sort_keys=True) + "\n").encode()
    raise ValueError(f"unknown format {fmt_name!r}")


def read_spectrum_json(data: bytes | str) -> IdSpectrum:
    obj = json.loads(data)
    entries = []
    for e in obj["entries"]:
        entries.append(
            InfoStat(
                int(e["n"]),
                e["I_nats"],
                e["J_nats"],
                int(e["df"]),
                math.nan if e["Z"] is None else e["Z"],
                e["mc_mean"],
                e["mc_sd"],
            )
        )
    return IdSpectrum(entries, obj.get("sequence_id", ""), tuple(obj.get("region", (0, 0))))


def hit_record(hit: ScanHit, **provenance) -> dict:
    # full precision so a hit can be re-validated bit for bit
    rec = dict(provenance)
    rec.update({k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in hit.as_dict().items()})
    return rec


def write_hits(hits: Iterable[ScanHit], out: TextIO, **provenance) -> int:
    """One JSON object per line; returns the number of hits written."""
    count = 0
    for h in hits:
        out.write(json.dumps(hit_record(h, **provenance), sort_keys=True) + "\n")
        count += 1
    return count


def period_type_json(pt: PeriodType, **extra) -> str:
    obj = dict(extra)
    obj.update(pt.as_dict())
    return json.dumps(obj, sort_keys=True) + "\n"
