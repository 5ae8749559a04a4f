"""End-to-end runs and parameter sweeps.

Configs are flat ``key = value`` text files, ``#`` starts a comment. Keys are
the field names of :class:`TimingParams`, :class:`ChannelProfile` and
:class:`DecoderParams` (size-range keys set both the channel and the
decoder), plus::

    payload         hex string, or digits when payload_format is bcd/ascii
    payload_format  hex | bcd | ascii
    preset          credit_card  (16 random digits per seed, BCD)
    invert          true to map bit 1 to silence
    seed            base seed
    sweep_param, sweep_min, sweep_max, sweep_steps, sweep_reps
"""
from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Optional

import numpy as np

from .carriermodel import ChannelProfile, synthesize_trace
from .listener import DecodeResult, DecoderParams, decode_trace
from .metrics import CSV_HEADER, ChannelMetrics, ber, goodput, random_card_number
from .symbolcodec import (BitMapping, TimingParams, bits_to_schedule, encode_digits,
                          frame_payload, schedule_duration)

TIMING_KEYS = [f.name for f in fields(TimingParams)]
PROFILE_KEYS = [f.name for f in fields(ChannelProfile)]
DECODER_KEYS = [f.name for f in fields(DecoderParams)]
SHARED_KEYS = [k for k in PROFILE_KEYS if k in DECODER_KEYS]
SWEEP_KEYS = ["sweep_param", "sweep_min", "sweep_max", "sweep_steps", "sweep_reps"]
OTHER_KEYS = ["payload", "payload_format", "preset", "invert", "seed"]
ALL_KEYS = list(dict.fromkeys(TIMING_KEYS + PROFILE_KEYS + DECODER_KEYS + SWEEP_KEYS + OTHER_KEYS))
PAYLOAD_FORMATS = ("hex", "bcd", "ascii")
PRESETS = ("credit_card",)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    payload: str = ""
    payload_format: str = "hex"
    preset: Optional[str] = None
    invert: bool = False
    timing: TimingParams = field(default_factory=TimingParams)
    profile: ChannelProfile = field(default_factory=ChannelProfile)
    decoder: DecoderParams = field(default_factory=DecoderParams)
    seed: int = 0
    sweep_param: Optional[str] = None
    sweep_min: float = 0.0
    sweep_max: float = 0.0
    sweep_steps: int = 1
    sweep_reps: int = 1

    @property
    def mapping(self) -> BitMapping:
        return BitMapping().swapped() if self.invert else BitMapping()

    def payload_bytes(self, seed: int) -> bytes:
        if self.preset == "credit_card":
            return encode_digits(random_card_number(np.random.default_rng(seed)), "bcd")
        if self.payload_format == "hex":
            try:
                return bytes.fromhex(self.payload)
            except ValueError as exc:
                raise ConfigError(f"malformed hex payload {self.payload!r}") from exc
        try:
            return encode_digits(self.payload, self.payload_format)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def sweep_values(self) -> np.ndarray:
        if self.sweep_steps == 1:
            return np.array([self.sweep_min])
        return np.round(np.linspace(self.sweep_min, self.sweep_max, self.sweep_steps), 12)

    def with_value(self, key: str, value) -> "ExperimentConfig":
        return apply_settings(self, {key: value})


def _coerce(cls_field: dataclasses.Field, raw):
    typ = cls_field.type if isinstance(cls_field.type, str) else cls_field.type.__name__
    try:
        if "int" in typ:
            f = float(raw)
            if f != int(f):
                raise ValueError
            return int(f)
        if "float" in typ:
            return float(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{cls_field.name}: cannot parse {raw!r} as {typ}") from exc
    return raw


def _as_bool(key, raw) -> bool:
    if isinstance(raw, bool):
        return raw
    s = str(raw).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off", ""):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def _update(obj, group_keys, settings):
    changes = {}
    for f in fields(obj):
        if f.name in settings and f.name in group_keys:
            changes[f.name] = _coerce(f, settings[f.name])
    if not changes:
        return obj
    try:
        return replace(obj, **changes)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def apply_settings(cfg: ExperimentConfig, settings: dict) -> ExperimentConfig:
    """Return ``cfg`` with flat ``settings`` applied; unknown keys are errors."""
    unknown = sorted(set(settings) - set(ALL_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    timing = _update(cfg.timing, TIMING_KEYS, settings)
    profile = _update(cfg.profile, PROFILE_KEYS, settings)
    decoder = _update(cfg.decoder, DECODER_KEYS, settings)
    top = {}
    for key in ("payload", "payload_format"):
        if key in settings:
            top[key] = str(settings[key])
    for key in ("preset", "sweep_param"):
        if key in settings:
            top[key] = None if settings[key] in (None, "", "none") else str(settings[key])
    if "invert" in settings:
        top["invert"] = _as_bool("invert", settings["invert"])
    for key, conv in (("seed", int), ("sweep_steps", int), ("sweep_reps", int),
                      ("sweep_min", float), ("sweep_max", float)):
        if key in settings:
            try:
                top[key] = conv(settings[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{key}: cannot parse {settings[key]!r}") from exc
    out = replace(cfg, timing=timing, profile=profile, decoder=decoder, **top)
    validate(out)
    return out


def validate(cfg: ExperimentConfig) -> None:
    if cfg.payload_format not in PAYLOAD_FORMATS:
        raise ConfigError(f"payload_format must be one of {PAYLOAD_FORMATS}")
    if cfg.preset is not None and cfg.preset not in PRESETS:
        raise ConfigError(f"unknown preset {cfg.preset!r}")
    if cfg.seed < 0:
        raise ConfigError("seed must be non-negative")
    if cfg.sweep_steps < 1 or cfg.sweep_reps < 1:
        raise ConfigError("sweep_steps and sweep_reps must be at least 1")
    if cfg.sweep_param is not None and cfg.sweep_param not in (TIMING_KEYS + PROFILE_KEYS
                                                               + DECODER_KEYS):
        raise ConfigError(f"sweep_param {cfg.sweep_param!r} is not a channel, timing or decoder field")
    if cfg.preset is None:
        payload = cfg.payload_bytes(cfg.seed)
        if len(payload) > 255:
            raise ConfigError("payload exceeds 255 bytes")


def parse_config(text: str) -> dict:
    settings = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        settings[key] = value
    return settings


def load_config(text: str, base: ExperimentConfig = ExperimentConfig()) -> ExperimentConfig:
    return apply_settings(base, parse_config(text))


@dataclass
class E2EOutcome:
    metrics: ChannelMetrics
    result: DecodeResult
    sent_bits: str


def run_e2e(cfg: ExperimentConfig, seed: Optional[int] = None) -> E2EOutcome:
    """encode -> synthesize -> decode -> metrics for one seed.

    Goodput counts the payload only when it was recovered intact.
    """
    seed = cfg.seed if seed is None else seed
    payload = cfg.payload_bytes(seed)
    bits = frame_payload(payload)
    schedule = bits_to_schedule(bits, cfg.timing, cfg.mapping)
    elapsed = schedule_duration(schedule)
    trace = synthesize_trace(schedule, cfg.profile, seed)
    result = decode_trace(trace, cfg.decoder, cfg.mapping)
    delivered = len(payload) if result.ok and result.payload == payload else 0
    m = ChannelMetrics(
        payload_len=len(payload),
        elapsed_s=elapsed,
        ber=ber(bits, result.bits),
        goodput_Bps=goodput(delivered, elapsed),
        symbol_rate_sps=len(bits) / elapsed,
    )
    return E2EOutcome(m, result, bits)


def _sweep_point(args):
    cfg, value, rep = args
    seed = cfg.seed + rep
    point = cfg.with_value(cfg.sweep_param, value) if cfg.sweep_param else cfg
    return value, rep, seed, run_e2e(point, seed).metrics


def run_sweep(cfg: ExperimentConfig, jobs: int = 1) -> list[tuple[float, int, int, ChannelMetrics]]:
    """Rows ordered by (sweep value, repetition) whatever ``jobs`` is."""
    tasks = [(cfg, float(v), r) for v in cfg.sweep_values() for r in range(cfg.sweep_reps)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_point, tasks, chunksize=8))
    return [_sweep_point(t) for t in tasks]


def sweep_csv(cfg: ExperimentConfig, rows) -> str:
    name = cfg.sweep_param or "value"
    lines = [",".join((name, "rep", "seed") + CSV_HEADER)]
    for value, rep, seed, m in rows:
        lines.append(f"{value!r},{rep},{seed},{m.csv_row()}")
    return "\n".join(lines) + "\n"


def e2e_csv(m: ChannelMetrics) -> str:
    return ",".join(CSV_HEADER) + "\n" + m.csv_row() + "\n"

