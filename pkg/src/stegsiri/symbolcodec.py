"""Payload framing and the voice/silence symbol schedule.

A payload travels as a self-delimiting frame::

    preamble (10101011) | length (1 byte) | payload | CRC-8 (poly 0x07, init 0)

Bits are MSB-first within each byte and are handled as ``str`` of '0'/'1'.
Each bit becomes one voice or silence interval.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import (ChecksumMismatch, FrameLengthMismatch, NoPreamble, PayloadTooLong,
                     TruncatedFrame)

PREAMBLE = "10101011"
MAX_PAYLOAD = 255
CRC_POLY = 0x07


class SymbolKind(str, enum.Enum):
    VOICE = "voice"
    SILENCE = "silence"

    def other(self) -> "SymbolKind":
        return SymbolKind.SILENCE if self is SymbolKind.VOICE else SymbolKind.VOICE


@dataclass(frozen=True)
class TimingParams:
    voice_symbol_s: float = 1.0
    silence_symbol_s: float = 2.0

    def __post_init__(self):
        if not (self.voice_symbol_s > 0 and self.silence_symbol_s > 0):
            raise ValueError("symbol durations must be positive")

    def duration_of(self, kind: SymbolKind) -> float:
        return self.voice_symbol_s if kind is SymbolKind.VOICE else self.silence_symbol_s


@dataclass(frozen=True)
class BitMapping:
    bit_one: SymbolKind = SymbolKind.VOICE
    bit_zero: SymbolKind = SymbolKind.SILENCE

    def __post_init__(self):
        if self.bit_one == self.bit_zero:
            raise ValueError("bit_one and bit_zero must map to different symbols")

    def swapped(self) -> "BitMapping":
        return BitMapping(bit_one=self.bit_zero, bit_zero=self.bit_one)

    def kind_for(self, bit: str) -> SymbolKind:
        return self.bit_one if bit == "1" else self.bit_zero

    def bit_for(self, kind: SymbolKind) -> str:
        return "1" if kind == self.bit_one else "0"


@dataclass(frozen=True)
class Segment:
    kind: SymbolKind
    duration_s: float

    def __post_init__(self):
        if not self.duration_s > 0:
            raise ValueError(f"segment duration must be positive, got {self.duration_s}")


@dataclass(frozen=True)
class SymbolSchedule:
    segments: tuple[Segment, ...] = ()

    def __len__(self):
        return len(self.segments)

    def __iter__(self) -> Iterator[Segment]:
        return iter(self.segments)

    @property
    def total_duration(self) -> float:
        return schedule_duration(self)

    def merged(self) -> "SymbolSchedule":
        """Same schedule with adjacent same-kind segments fused."""
        out: list[Segment] = []
        for seg in self.segments:
            if out and out[-1].kind == seg.kind:
                out[-1] = Segment(seg.kind, out[-1].duration_s + seg.duration_s)
            else:
                out.append(seg)
        return SymbolSchedule(tuple(out))

    def intervals(self) -> list[tuple[SymbolKind, float, float]]:
        """(kind, start, end) for each segment, start of schedule at t=0."""
        out = []
        t = 0.0
        for seg in self.segments:
            out.append((seg.kind, t, t + seg.duration_s))
            t += seg.duration_s
        return out

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps({"kind": s.kind.value, "dur": s.duration_s}) + "\n" for s in self.segments
        )

    @classmethod
    def from_jsonl(cls, lines: Iterable[str]) -> "SymbolSchedule":
        segs = []
        for line in lines:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            segs.append(Segment(SymbolKind(rec["kind"]), float(rec["dur"])))
        return cls(tuple(segs))


# ------------------------------------------------------------------ framing

def _crc8_table(poly: int = CRC_POLY) -> tuple[int, ...]:
    table = []
    for byte in range(256):
        crc = byte
        for _ in range(8):
            crc = ((crc << 1) ^ poly) & 0xFF if crc & 0x80 else (crc << 1) & 0xFF
        table.append(crc)
    return tuple(table)


_CRC_TABLE = _crc8_table()


def crc8(data: bytes, init: int = 0x00) -> int:
    crc = init
    for b in data:
        crc = _CRC_TABLE[crc ^ b]
    return crc


def bytes_to_bits(data: bytes) -> str:
    return "".join(format(b, "08b") for b in data)


def bits_to_bytes(bits: str) -> bytes:
    if len(bits) % 8:
        raise ValueError("bit string length must be a multiple of 8")
    return bytes(int(bits[i:i + 8], 2) for i in range(0, len(bits), 8))


def frame_payload(payload: bytes) -> str:
    payload = bytes(payload)
    if len(payload) > MAX_PAYLOAD:
        raise PayloadTooLong(f"payload is {len(payload)} bytes, frame carries at most {MAX_PAYLOAD}")
    body = bytes([len(payload)]) + payload
    return PREAMBLE + bytes_to_bits(body) + format(crc8(body), "08b")


def deframe_bits(bits: str, trailing: str = "reject") -> bytes:
    """Find the first preamble in ``bits`` and return the framed payload.

    Garbage before the preamble is skipped. With ``trailing="reject"`` the
    frame must end exactly where ``bits`` ends: a flipped length bit that
    shortens the frame would otherwise expose a payload byte as the CRC,
    which for zero bytes always matches (crc8 of zeros is 0).
    ``trailing="ignore"`` drops whatever follows the CRC. Only the first
    preamble is tried, so a corrupted frame is reported, not skipped.
    """
    if trailing not in ("reject", "ignore"):
        raise ValueError("trailing must be 'reject' or 'ignore'")
    start = bits.find(PREAMBLE)
    if start < 0:
        raise NoPreamble("preamble 10101011 not found")
    pos = start + len(PREAMBLE)
    if len(bits) < pos + 8:
        raise TruncatedFrame("stream ends inside the length field")
    length = int(bits[pos:pos + 8], 2)
    end = pos + 8 + 8 * length + 8
    if len(bits) < end:
        raise TruncatedFrame(f"length field says {length} bytes but the stream ends early")
    body = bits_to_bytes(bits[pos:end - 8])
    if trailing == "reject" and len(bits) != end:
        raise FrameLengthMismatch(
            f"length field says {length} bytes but {len(bits) - end} bits follow the frame")
    received = int(bits[end - 8:end], 2)
    expected = crc8(body)
    if received != expected:
        raise ChecksumMismatch(f"CRC-8 mismatch: got 0x{received:02x}, computed 0x{expected:02x}")
    return body[1:]


# ------------------------------------------------------- payload encodings

def encode_digits(digits: str, mode: str = "bcd") -> bytes:
    """Pack a decimal digit string. ``bcd`` gives two digits per byte, high
    nibble first, padded with 0xF for odd lengths; ``ascii`` one byte each."""
    if not digits.isdigit() and digits != "":
        raise ValueError(f"not a digit string: {digits!r}")
    if mode == "ascii":
        return digits.encode("ascii")
    if mode != "bcd":
        raise ValueError(f"unknown digit encoding {mode!r}")
    nibbles = [int(d) for d in digits]
    if len(nibbles) % 2:
        nibbles.append(0xF)
    return bytes((nibbles[i] << 4) | nibbles[i + 1] for i in range(0, len(nibbles), 2))


def decode_digits(data: bytes, mode: str = "bcd") -> str:
    if mode == "ascii":
        return data.decode("ascii")
    out = []
    for b in data:
        for nib in (b >> 4, b & 0xF):
            if nib == 0xF:
                continue
            if nib > 9:
                raise ValueError(f"invalid BCD nibble 0x{nib:x}")
            out.append(str(nib))
    return "".join(out)


# ------------------------------------------------------------- schedules

def bits_to_schedule(bits: str, timing: TimingParams = TimingParams(),
                     mapping: BitMapping = BitMapping(), merge: bool = True) -> SymbolSchedule:
    segs = []
    for b in bits:
        if b not in "01":
            raise ValueError(f"invalid bit {b!r}")
        kind = mapping.kind_for(b)
        segs.append(Segment(kind, timing.duration_of(kind)))
    sched = SymbolSchedule(tuple(segs))
    return sched.merged() if merge else sched


def schedule_duration(schedule: SymbolSchedule) -> float:
    return float(sum(s.duration_s for s in schedule.segments))


def payload_to_schedule(payload: bytes, timing: TimingParams = TimingParams(),
                        mapping: BitMapping = BitMapping(), merge: bool = True) -> SymbolSchedule:
    return bits_to_schedule(frame_payload(payload), timing, mapping, merge)
