"""Bit-exact encoder/decoder for the 29-byte sensor uplink payload.

Wire layout, all multi-byte fields big-endian::

    offset  size  field
    0       1     header (layout version, 0x01)
    1       1     debug bitfield
    2       4     latitude, signed, 1e-7 deg
    6       4     longitude, signed, 1e-7 deg
    10      4     fix time, unsigned, Unix seconds
    14      2     fix accuracy, unsigned, decimeters (0xFFFF = no fix)
    16      1     battery percent 0-100 (0xFF = invalid)
    17      2     temperature, signed, centi-degC
    19      2     relative humidity, unsigned, centi-%RH (<= 10000)
    21      4     sitting minutes per interval, 0-30 each (0xFF = invalid)
    25      4     interval-mean noise, dBSPL 0-140 each (0xFF = invalid)

Debug bits: bit0 = fix obtained this cycle, bit1 = fix attempt timed out,
bit2 = battery low. Bits 3-7 reserved zero.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from .model import GeoPosition, GeometryError

FRAME_LEN = 29
HEADER_V1 = 0x01

INVALID_BYTE = 0xFF

DEBUG_FIX_OK = 0x01
DEBUG_FIX_TIMEOUT = 0x02
DEBUG_BATTERY_LOW = 0x04

_STRUCT = struct.Struct(">BBiiIHBhH8B")
assert _STRUCT.size == FRAME_LEN


class CodecError(ValueError):
    """Base class for frame encode/decode failures."""


class EncodeError(CodecError):
    def __init__(self, field: str, detail: str):
        super().__init__(f"cannot encode field {field!r}: {detail}")
        self.field = field


class LengthError(CodecError):
    def __init__(self, got: int):
        super().__init__(f"frame must be {FRAME_LEN} bytes, got {got}")
        self.got = got


class UnknownLayoutError(CodecError):
    def __init__(self, header: int):
        super().__init__(f"unknown payload layout header 0x{header:02x}")
        self.header = header


class RangeError(CodecError):
    def __init__(self, field: str, detail: str):
        super().__init__(f"field {field!r} out of range: {detail}")
        self.field = field


@dataclass(frozen=True)
class SensorFrame:
    """Decoded application payload of one uplink."""

    position: GeoPosition
    battery_pct: int
    temperature_centi_c: int
    humidity_centi_rh: int
    sitting_min: tuple[int, int, int, int]
    noise_db: tuple[int, int, int, int]
    debug: int = 0
    header: int = HEADER_V1

    def __post_init__(self):
        object.__setattr__(self, "sitting_min", tuple(self.sitting_min))
        object.__setattr__(self, "noise_db", tuple(self.noise_db))

    @property
    def temperature_c(self) -> float:
        return self.temperature_centi_c / 100.0

    @property
    def humidity_rh(self) -> float:
        return self.humidity_centi_rh / 100.0


def _check_frame(f: SensorFrame, err) -> None:
    if f.header != HEADER_V1:
        raise err("header", f"expected 0x{HEADER_V1:02x}, got 0x{f.header:02x}")
    if not 0 <= f.debug <= 0xFF:
        raise err("debug", str(f.debug))
    if not 0 <= f.position.fix_time_s < 2 ** 32:
        raise err("fix_time_s", str(f.position.fix_time_s))
    if not (0 <= f.battery_pct <= 100 or f.battery_pct == INVALID_BYTE):
        raise err("battery_pct", str(f.battery_pct))
    if not -(2 ** 15) <= f.temperature_centi_c < 2 ** 15:
        raise err("temperature_centi_c", str(f.temperature_centi_c))
    if not 0 <= f.humidity_centi_rh <= 10000:
        raise err("humidity_centi_rh", str(f.humidity_centi_rh))
    if len(f.sitting_min) != 4:
        raise err("sitting_min", "expected 4 values")
    if len(f.noise_db) != 4:
        raise err("noise_db", "expected 4 values")
    for i, v in enumerate(f.sitting_min):
        if not (0 <= v <= 30 or v == INVALID_BYTE):
            raise err(f"sitting_min[{i}]", str(v))
    for i, v in enumerate(f.noise_db):
        if not (0 <= v <= 140 or v == INVALID_BYTE):
            raise err(f"noise_db[{i}]", str(v))


def encode_frame(f: SensorFrame) -> bytes:
    """Pack a frame into its 29-byte wire form.

    Raises EncodeError when any field violates its wire range.
    """
    _check_frame(f, EncodeError)
    p = f.position
    return _STRUCT.pack(
        f.header, f.debug,
        p.lat_e7, p.lon_e7, p.fix_time_s, p.accuracy_dm,
        f.battery_pct, f.temperature_centi_c, f.humidity_centi_rh,
        *f.sitting_min, *f.noise_db,
    )


def decode_frame(b: bytes) -> SensorFrame:
    """Unpack 29 wire bytes; exact inverse of encode_frame on its image."""
    if len(b) != FRAME_LEN:
        raise LengthError(len(b))
    (header, debug, lat_e7, lon_e7, fix_time_s, accuracy_dm,
     battery, temp, hum, *rest) = _STRUCT.unpack(bytes(b))
    if header != HEADER_V1:
        raise UnknownLayoutError(header)
    try:
        position = GeoPosition(lat_e7, lon_e7, accuracy_dm, fix_time_s)
    except GeometryError as e:
        raise RangeError("position", str(e)) from e
    frame = SensorFrame(
        position=position,
        battery_pct=battery,
        temperature_centi_c=temp,
        humidity_centi_rh=hum,
        sitting_min=tuple(rest[0:4]),
        noise_db=tuple(rest[4:8]),
        debug=debug,
        header=header,
    )
    _check_frame(frame, RangeError)
    return frame


def frame_to_hex(f: SensorFrame) -> str:
    """Lowercase hex, no separators; the form used by the CLI and API."""
    return encode_frame(f).hex()


def frame_from_hex(text: str) -> SensorFrame:
    try:
        raw = bytes.fromhex(text.strip())
    except ValueError as e:
        raise CodecError(f"invalid hex payload: {e}") from e
    return decode_frame(raw)


def frame_to_json_dict(f: SensorFrame) -> dict:
    return {
        "header": f.header,
        "debug": f.debug,
        "lat_e7": f.position.lat_e7,
        "lon_e7": f.position.lon_e7,
        "fix_time_s": f.position.fix_time_s,
        "accuracy_dm": f.position.accuracy_dm,
        "battery_pct": f.battery_pct,
        "temperature_centi_c": f.temperature_centi_c,
        "humidity_centi_rh": f.humidity_centi_rh,
        "sitting_min": list(f.sitting_min),
        "noise_db": list(f.noise_db),
    }


def frame_from_json_dict(d: dict) -> SensorFrame:
    try:
        position = GeoPosition(int(d["lat_e7"]), int(d["lon_e7"]),
                               int(d["accuracy_dm"]), int(d["fix_time_s"]))
    except GeometryError as e:
        raise RangeError("position", str(e)) from e
    except KeyError as e:
        raise CodecError(f"missing frame field: {e}") from e
    try:
        return SensorFrame(
            position=position,
            battery_pct=int(d["battery_pct"]),
            temperature_centi_c=int(d["temperature_centi_c"]),
            humidity_centi_rh=int(d["humidity_centi_rh"]),
            sitting_min=tuple(int(v) for v in d["sitting_min"]),
            noise_db=tuple(int(v) for v in d["noise_db"]),
            debug=int(d.get("debug", 0)),
            header=int(d.get("header", HEADER_V1)),
        )
    except KeyError as e:
        raise CodecError(f"missing frame field: {e}") from e
