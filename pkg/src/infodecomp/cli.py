"""Command-line interface.

Examples::

    infodecomp spectrum seq.fa --n-max 100
    infodecomp scan genome.fa --triplet-aware > hits.jsonl
    infodecomp typematrix seq.fa --n 7 --start 100 --end 800
    infodecomp fourier seq.fa
    infodecomp simulate --pattern ATAAACT --repeats 100 --mutation 0.5 --replicates 50
    infodecomp calibrate --k 4 --freqs 0.26,0.24,0.24,0.26 --length 2000 --windows 100

Exit status is 0 on success, 1 on usage errors and 2 on data errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings

import numpy as np

from . import __version__
from .core import Alphabet, SequenceError
from .fourier import POWER_SCALE, fourier_spectrum
from .infostat import BackgroundModel
from .io import (
    FormatError,
    RunConfig,
    fmt,
    parse_alphabet,
    period_type_json,
    read_sequences,
    spectrum_to_json,
    write_hits,
    write_spectrum,
)
from .scan import period_type, scan, spectrum
from .workflows import calibrate, simulate

log = logging.getLogger("infodecomp")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p: argparse.ArgumentParser, scanning: bool = False) -> None:
    p.add_argument("--alphabet", default="dna", help="dna, protein, text or custom=<symbols>")
    p.add_argument("--skip-unknown", action="store_true", help="drop symbols outside the alphabet")
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=200)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--triplet-aware", action="store_true")
    p.add_argument("--format", choices=("tsv", "json"), default="tsv")
    if scanning:
        p.add_argument("--window", type=int, default=2000)
        p.add_argument("--step", type=int, default=1000)
        p.add_argument("--threshold", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="infodecomp", description="Latent periodicity by information decomposition.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("spectrum", help="ID spectrum Z(n) of each record")
    p.add_argument("file")
    _common(p)

    p = sub.add_parser("scan", help="windowed search, hits as JSON lines")
    p.add_argument("file")
    _common(p, scanning=True)

    p = sub.add_parser("typematrix", help="period type matrix of a region")
    p.add_argument("file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--end", type=int, default=None)
    p.add_argument("--record", type=int, default=0, help="record index (0-based)")
    p.add_argument("--alphabet", default="dna")
    p.add_argument("--skip-unknown", action="store_true")

    p = sub.add_parser("fourier", help="indicator-sequence power spectrum (TSV)")
    p.add_argument("file")
    p.add_argument("--alphabet", default="dna")
    p.add_argument("--skip-unknown", action="store_true")
    p.add_argument("--per-symbol", action="store_true")

    p = sub.add_parser("simulate", help="ID of a mutated perfect repeat")
    p.add_argument("--pattern", default="ATAAACT")
    p.add_argument("--repeats", type=int, default=100)
    p.add_argument("--mutation", type=float, default=0.0)
    p.add_argument("--mutation-mode", choices=("redraw", "substitute"), default="redraw")
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=100)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("tsv", "json"), default="tsv")

    p = sub.add_parser("calibrate", help="null distribution of the window maximum Z")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--freqs", default=None, help="comma-separated symbol probabilities")
    p.add_argument("--length", type=int, default=2000)
    p.add_argument("--windows", type=int, default=100)
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=200)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.01)
    return parser


def _load(args):
    try:
        policy = parse_alphabet(args.alphabet)
    except ValueError as exc:
        raise UsageError(str(exc))
    if not os.path.exists(args.file):
        raise UsageError(f"no such file: {args.file}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        records = read_sequences(args.file, policy, args.skip_unknown)
    for w in caught:
        log.warning("%s", w.message)
    return policy, records


def _config(args, policy) -> RunConfig:
    try:
        return RunConfig(
            alphabet=policy,
            n_min=args.n_min,
            n_max=args.n_max,
            window_len=getattr(args, "window", 2000),
            step=getattr(args, "step", 1000),
            trials=args.trials,
            seed=args.seed,
            threshold=getattr(args, "threshold", None),
            triplet_aware=args.triplet_aware,
            output_format=args.format,
            skip_unknown=args.skip_unknown,
        )
    except ValueError as exc:
        raise UsageError(str(exc))


def _model(cfg: RunConfig) -> BackgroundModel:
    try:
        return BackgroundModel(trials=cfg.trials, seed=cfg.seed)
    except ValueError as exc:
        raise UsageError(str(exc))


def cmd_spectrum(args, out) -> int:
    policy, records = _load(args)
    cfg = _config(args, policy)
    model = _model(cfg)
    if cfg.n_min < 2:
        raise UsageError("--n-min must be >= 2")
    docs = []
    for i, (rid, seq) in enumerate(records):
        n_max = min(cfg.n_max, seq.L // 2)
        if n_max < cfg.n_max:
            log.warning("%s: n_max clamped to L/2 = %d", rid, n_max)
        if n_max < cfg.n_min:
            raise SequenceError(f"{rid}: sequence of length {seq.L} too short for n_min={cfg.n_min}")
        spec = spectrum(seq, (cfg.n_min, n_max), model, cfg.triplet_aware, sequence_id=rid)
        if cfg.output_format == "json":
            doc = spectrum_to_json(spec)
            doc.update(file=args.file, record=i)
            docs.append(doc)
        else:
            if len(records) > 1:
                out.write(("\n" if i else "") + f"# {args.file}\t{i}\t{rid}\n")
            out.write(write_spectrum(spec, "tsv").decode())
    if docs:
        out.write(json.dumps(docs[0] if len(docs) == 1 else docs, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_scan(args, out) -> int:
    policy, records = _load(args)
    cfg = _config(args, policy)
    model = _model(cfg)
    if cfg.window_len < 4 or cfg.step < 1:
        raise UsageError("--window must be >= 4 and --step >= 1")
    for i, (rid, seq) in enumerate(records):
        hits = scan(
            seq,
            window_len=cfg.window_len,
            step=cfg.step,
            n_range=(cfg.n_min, cfg.n_max),
            threshold=cfg.threshold,
            model=model,
            triplet_aware=cfg.triplet_aware,
            sequence_id=rid,
        )
        write_hits(hits, out, file=args.file, record=i)
    return EXIT_OK


def cmd_typematrix(args, out) -> int:
    policy, records = _load(args)
    if not 0 <= args.record < len(records):
        raise UsageError(f"record {args.record} not in file")
    rid, seq = records[args.record]
    end = seq.L if args.end is None else args.end
    if not 0 <= args.start < end <= seq.L:
        raise UsageError(f"region [{args.start}, {end}) outside sequence of length {seq.L}")
    pt = period_type(seq[args.start : end], args.n)
    out.write(period_type_json(pt, sequence_id=rid, file=args.file, record=args.record, region=[args.start, end]))
    return EXIT_OK


def cmd_fourier(args, out) -> int:
    policy, records = _load(args)
    for i, (rid, seq) in enumerate(records):
        ps = fourier_spectrum(seq)
        if len(records) > 1:
            out.write(("\n" if i else "") + f"# {args.file}\t{i}\t{rid}\n")
        cols = ["f", "period", "power", "power_x1000"]
        if args.per_symbol:
            cols += [f"power_{s}" for s in seq.alphabet.symbols]
        out.write("\t".join(cols) + "\n")
        for j, f in enumerate(ps.frequency):
            row = [str(int(f)), fmt(float(ps.period_axis[j])), fmt(float(ps.power[j])), fmt(float(ps.power[j] * POWER_SCALE))]
            if args.per_symbol:
                row += [fmt(float(v)) for v in ps.per_symbol_power[:, j]]
            out.write("\t".join(row) + "\n")
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    if not args.pattern or len(set(args.pattern)) < 2:
        raise UsageError("--pattern needs at least two distinct symbols")
    if args.replicates < 1 or args.repeats < 1 or args.trials < 2:
        raise UsageError("--replicates and --repeats must be >= 1, --trials >= 2")
    if not 0.0 <= args.mutation <= 1.0:
        raise UsageError("--mutation must be in [0, 1]")
    L = len(args.pattern) * args.repeats
    if args.n_max > L // 2:
        log.warning("n_max clamped to L/2 = %d", L // 2)
    res = simulate(
        args.pattern,
        args.repeats,
        args.mutation,
        args.replicates,
        (args.n_min, args.n_max),
        args.trials,
        args.seed,
        args.mutation_mode,
    )
    Z = res.z_matrix()
    mean = res.mean_curve()
    sd = Z.std(axis=0, ddof=1) if Z.shape[0] > 1 else np.zeros(Z.shape[1])
    if args.format == "json":
        doc = {
            "pattern": args.pattern,
            "repeats": args.repeats,
            "mutation": args.mutation,
            "mutation_mode": args.mutation_mode,
            "seed": args.seed,
            "periods": res.periods,
            "mean_Z": [float(v) for v in mean],
            "sd_Z": [float(v) for v in sd],
            "replicates": [[float(v) for v in row] for row in Z],
        }
        out.write(json.dumps(doc, sort_keys=True) + "\n")
    else:
        cols = ["n", "mean_Z", "sd_Z"] + [f"Z_rep{r}" for r in range(Z.shape[0])]
        out.write("\t".join(cols) + "\n")
        for j, n in enumerate(res.periods):
            out.write("\t".join([str(n), fmt(float(mean[j])), fmt(float(sd[j]))] + [fmt(float(v)) for v in Z[:, j]]) + "\n")
    best = int(np.nanargmax(mean))
    log.info("max mean Z = %.3f at n = %d", mean[best], res.periods[best])
    return EXIT_OK


def cmd_calibrate(args, out) -> int:
    if args.freqs:
        try:
            freqs = [float(v) for v in args.freqs.split(",")]
        except ValueError:
            raise UsageError(f"bad --freqs {args.freqs!r}")
        if len(freqs) != args.k:
            raise UsageError(f"--freqs has {len(freqs)} values for --k {args.k}")
    else:
        freqs = [1.0 / args.k] * args.k
    if abs(sum(freqs) - 1.0) > 1e-9:
        raise UsageError("--freqs must sum to 1")
    if args.windows < 1 or not 0 < args.alpha < 1:
        raise UsageError("--windows must be >= 1 and --alpha in (0, 1)")
    alphabet = Alphabet.dna() if args.k == 4 else None
    n_max = min(args.n_max, args.length // 2)
    res = calibrate(freqs, args.length, args.windows, (args.n_min, n_max), args.trials, args.seed, args.alpha, alphabet)
    doc = {"k": args.k, "freqs": freqs, "length": args.length, "n_range": [args.n_min, n_max], "trials": args.trials, "seed": args.seed}
    doc.update(res.summary())
    out.write(json.dumps(doc, sort_keys=True) + "\n")
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "scan": cmd_scan,
    "typematrix": cmd_typematrix,
    "fourier": cmd_fourier,
    "simulate": cmd_simulate,
    "calibrate": cmd_calibrate,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"infodecomp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if args.command is None:
        build_parser().print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"infodecomp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SequenceError, FormatError, OSError, ValueError) as exc:
        print(f"infodecomp: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


cli_main = main

if __name__ == "__main__":
    sys.exit(main())
