"""Command-line front end.

Exit codes: 0 success / benign, 1 decode failure / covert verdict, 2 usage
or input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path

from . import __version__
from .carriermodel import (ChannelProfile, NaturalUsageParams, PduTrace, generate_natural_trace,
                           natural_schedule, simulate_recognition, synthesize_trace)
from .errors import StegSiriError
from .experiment import (ConfigError, ExperimentConfig, apply_settings, e2e_csv, parse_config,
                         run_e2e, run_sweep, sweep_csv)
from .listener import DecoderParams, decode_trace
from .symbolcodec import (BitMapping, SymbolSchedule, TimingParams, bits_to_schedule,
                          encode_digits, frame_payload)
from .warden import (builtin_corpus, detect_text, detect_traffic, percentile_threshold,
                     read_corpus, text_anomaly_score, traffic_regularity_score, train_ngram)


class UsageError(Exception):
    pass


def _add_fields(parser, cls, seen=None):
    group = parser.add_argument_group(cls.__name__)
    for f in fields(cls):
        if seen is not None:
            if f.name in seen:
                continue
            seen.add(f.name)
        typ = int if f.type in ("int", int) else float
        group.add_argument(f"--{f.name.replace('_', '-')}", f"--{f.name}", dest=f.name, type=typ,
                           default=None, metavar=f.type.upper() if isinstance(f.type, str) else None,
                           help=f"default {f.default}")


def _picked(args, cls) -> dict:
    return {f.name: getattr(args, f.name) for f in fields(cls)
            if getattr(args, f.name, None) is not None}


def _build(cls, args):
    try:
        return cls(**_picked(args, cls))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _write_output(text: str, path) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _mapping(args) -> BitMapping:
    return BitMapping().swapped() if args.invert else BitMapping()


def _payload_from_args(args) -> bytes:
    if args.hex is not None:
        try:
            return bytes.fromhex(args.hex)
        except ValueError as exc:
            raise UsageError(f"malformed hex payload {args.hex!r}") from exc
    try:
        return encode_digits(args.digits, args.digit_encoding)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _parse_trace(text: str) -> PduTrace:
    try:
        return PduTrace.from_text(text)
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"malformed trace: {exc}") from exc


# ------------------------------------------------------------------ commands

def cmd_encode(args) -> int:
    bits = frame_payload(_payload_from_args(args))
    if args.bits:
        _write_output(bits + "\n", args.output)
        return 0
    sched = bits_to_schedule(bits, _build(TimingParams, args), _mapping(args), merge=args.merge)
    _write_output(sched.to_jsonl(), args.output)
    return 0


def cmd_synth(args) -> int:
    try:
        sched = SymbolSchedule.from_jsonl(_read_input(args.schedule).splitlines())
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"malformed schedule: {exc}") from exc
    trace = synthesize_trace(sched, _build(ChannelProfile, args), args.seed)
    _write_output(trace.to_csv() if args.format == "csv" else trace.to_jsonl(), args.output)
    if args.tokens_out:
        Path(args.tokens_out).write_text(" ".join(simulate_recognition(sched, "covert")) + "\n")
    return 0


def cmd_decode(args) -> int:
    trace = _parse_trace(_read_input(args.trace))
    result = decode_trace(trace, _build(DecoderParams, args), _mapping(args))
    _write_output(result.to_json() + "\n", args.output)
    return 0 if result.ok else 1


def _experiment_config(args) -> ExperimentConfig:
    settings = parse_config(_read_input(args.config)) if args.config else {}
    for cls in (TimingParams, ChannelProfile, DecoderParams):
        settings.update(_picked(args, cls))
    if args.hex is not None:
        settings.update(payload=args.hex, payload_format="hex")
    if args.digits is not None:
        settings.update(payload=args.digits, payload_format=args.digit_encoding)
    if args.preset is not None:
        settings["preset"] = args.preset
    if args.seed is not None:
        settings["seed"] = args.seed
    if args.invert:
        settings["invert"] = True
    for key in ("sweep_param", "sweep_min", "sweep_max", "sweep_steps", "sweep_reps"):
        if getattr(args, key, None) is not None:
            settings[key] = getattr(args, key)
    return apply_settings(ExperimentConfig(), settings)


def cmd_e2e(args) -> int:
    cfg = _experiment_config(args)
    _write_output(e2e_csv(run_e2e(cfg).metrics), args.output)
    return 0


def cmd_sweep(args) -> int:
    cfg = _experiment_config(args)
    if cfg.sweep_param is None:
        raise UsageError("sweep needs --param (or sweep_param in the config)")
    _write_output(sweep_csv(cfg, run_sweep(cfg, jobs=args.jobs)), args.output)
    return 0


def _corpus(args):
    if args.corpus:
        sentences = read_corpus(_read_input(args.corpus))
    else:
        sentences = builtin_corpus()
    return sentences


def cmd_gen_natural(args) -> int:
    params = _build(NaturalUsageParams, args)
    profile = _build(ChannelProfile, args)
    trace = generate_natural_trace(params, profile, args.seed)
    _write_output(trace.to_csv() if args.format == "csv" else trace.to_jsonl(), args.output)
    if args.tokens_out:
        lexicon = [w for s in _corpus(args) for w in s]
        tokens = simulate_recognition(natural_schedule(params, args.seed), "natural", lexicon,
                                      seed=args.seed)
        Path(args.tokens_out).write_text(" ".join(tokens) + "\n")
    return 0


def cmd_detect(args) -> int:
    text = _read_input(args.input)
    if args.mode == "text":
        model = train_ngram(_corpus(args), order=args.order, alpha=args.alpha)
        tokens = text.split()
        if args.threshold is not None:
            threshold = args.threshold
        elif args.calibration:
            threshold = percentile_threshold(
                [text_anomaly_score(_read_input(p).split(), model) for p in args.calibration])
        else:
            lexicon = [w for s in _corpus(args) for w in s]
            scores = []
            for i in range(args.calibration_sessions):
                seed = args.seed + i
                toks = simulate_recognition(natural_schedule(NaturalUsageParams(), seed),
                                            "natural", lexicon, seed=seed)
                if toks:
                    scores.append(text_anomaly_score(toks, model))
            threshold = percentile_threshold(scores)
        report = detect_text(tokens, model, threshold)
    else:
        params = _build(DecoderParams, args)
        trace = _parse_trace(text)
        if args.threshold is not None:
            threshold = args.threshold
        elif args.calibration:
            threshold = percentile_threshold(
                [traffic_regularity_score(_parse_trace(_read_input(p)), params)
                 for p in args.calibration])
        else:
            threshold = percentile_threshold(
                [traffic_regularity_score(generate_natural_trace(seed=args.seed + i), params)
                 for i in range(args.calibration_sessions)])
        report = detect_traffic(trace, threshold, params)
    _write_output(report.to_json() + "\n", args.output)
    return 1 if report.verdict == "Covert" else 0


# -------------------------------------------------------------------- parser

def _payload_args(p, required):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--hex", help="payload as a hex string (may be empty)")
    g.add_argument("--digits", help="payload as a decimal digit string")
    p.add_argument("--digit-encoding", choices=("bcd", "ascii"), default="bcd")
    return g


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stegsiri", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="payload -> framed voice/silence schedule (JSONL)")
    _payload_args(p, required=True)
    _add_fields(p, TimingParams)
    p.add_argument("--invert", action="store_true", help="map bit 1 to silence")
    p.add_argument("--merge", action="store_true", help="fuse adjacent same-kind symbols")
    p.add_argument("--bits", action="store_true", help="print the framed bit string instead")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("synth", help="schedule -> PDU trace")
    p.add_argument("schedule", nargs="?", default="-")
    _add_fields(p, ChannelProfile)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--tokens-out", help="also write the covert recognized text here")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("decode", help="PDU trace -> decode result (JSON)")
    p.add_argument("trace", nargs="?", default="-")
    _add_fields(p, DecoderParams)
    p.add_argument("--invert", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_decode)

    for name, func in (("e2e", cmd_e2e), ("sweep", cmd_sweep)):
        p = sub.add_parser(name, help="encode, synthesize, decode and score"
                           if name == "e2e" else "repeat e2e along one parameter axis")
        p.add_argument("--config", help="flat key = value config file")
        _payload_args(p, required=False)
        p.add_argument("--preset", choices=("credit_card",))
        p.add_argument("--seed", type=int)
        p.add_argument("--invert", action="store_true")
        seen: set = set()
        for cls in (TimingParams, ChannelProfile, DecoderParams):
            _add_fields(p, cls, seen)
        if name == "sweep":
            p.add_argument("--param", dest="sweep_param")
            p.add_argument("--min", dest="sweep_min", type=float)
            p.add_argument("--max", dest="sweep_max", type=float)
            p.add_argument("--steps", dest="sweep_steps", type=int)
            p.add_argument("--reps", dest="sweep_reps", type=int)
            p.add_argument("--jobs", type=int, default=1)
        p.add_argument("-o", "--output")
        p.set_defaults(func=func)

    p = sub.add_parser("gen-natural", help="benign Siri-like session trace")
    _add_fields(p, NaturalUsageParams)
    _add_fields(p, ChannelProfile)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--tokens-out", help="also write natural recognized text here")
    p.add_argument("--corpus", help="lexicon source, one sentence per line")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen_natural)

    p = sub.add_parser("detect", help="run a warden on a trace or token file")
    p.add_argument("input", nargs="?", default="-")
    p.add_argument("--mode", choices=("traffic", "text"), default="traffic")
    p.add_argument("--corpus", help="benign corpus for the text model (default: built-in)")
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--threshold", type=float)
    p.add_argument("--calibration", nargs="+", metavar="FILE",
                   help="benign traces / token files; threshold = their 95th percentile")
    p.add_argument("--calibration-sessions", type=int, default=200,
                   help="synthetic benign sessions used when no threshold or files are given")
    p.add_argument("--seed", type=int, default=0)
    _add_fields(p, DecoderParams)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_detect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError, StegSiriError, ValueError) as exc:
        print(f"stegsiri {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
