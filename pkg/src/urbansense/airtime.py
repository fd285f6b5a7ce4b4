"""LoRa time-on-air calculator (Semtech AN1200.13 symbol-count formula).

Returns preamble, payload, and total durations separately: quoted airtime
figures in the wild disagree on whether the preamble (and LoRaWAN MAC
overhead) is included, so callers pick the reading they need.
"""

from __future__ import annotations

from dataclasses import dataclass


class ParamError(ValueError):
    """Radio parameter outside its legal range."""


@dataclass(frozen=True)
class RadioParams:
    """LoRa modulation settings. Defaults: EU868-style SF12 / 125 kHz / CR 4/5.

    ``cr`` is the coding-rate index 1..4 (1 means 4/5). When
    ``low_data_rate_optimize`` is None it follows the usual rule: enabled
    for SF11/SF12 at 125 kHz.
    """

    sf: int = 12
    bw_hz: int = 125_000
    cr: int = 1
    preamble_symbols: int = 8
    explicit_header: bool = True
    crc_on: bool = True
    low_data_rate_optimize: bool | None = None

    def __post_init__(self):
        if not 7 <= self.sf <= 12:
            raise ParamError(f"sf must be in 7..12, got {self.sf}")
        if self.bw_hz <= 0:
            raise ParamError(f"bw_hz must be positive, got {self.bw_hz}")
        if not 1 <= self.cr <= 4:
            raise ParamError(f"cr must be in 1..4, got {self.cr}")
        if self.preamble_symbols < 0:
            raise ParamError("preamble_symbols must be non-negative")

    @property
    def ldro(self) -> bool:
        if self.low_data_rate_optimize is not None:
            return self.low_data_rate_optimize
        return self.sf >= 11 and self.bw_hz == 125_000


@dataclass(frozen=True)
class AirTime:
    preamble_s: float
    payload_s: float

    @property
    def total_s(self) -> float:
        return self.preamble_s + self.payload_s


def symbol_time_s(p: RadioParams) -> float:
    """Duration of one LoRa symbol: 2^SF / BW."""
    return (1 << p.sf) / p.bw_hz


def payload_symbol_count(p: RadioParams, payload_len_bytes: int) -> int:
    """Number of payload symbols, exact integer evaluation.

    n = 8 + max(ceil((8 PL - 4 SF + 28 + 16 CRC - 20 H) / (4 (SF - 2 DE)))
                * (CR + 4), 0)
    """
    if payload_len_bytes < 0:
        raise ParamError("payload_len_bytes must be non-negative")
    h = 0 if p.explicit_header else 1
    de = 1 if p.ldro else 0
    crc = 1 if p.crc_on else 0
    num = 8 * payload_len_bytes - 4 * p.sf + 28 + 16 * crc - 20 * h
    den = 4 * (p.sf - 2 * de)
    ceil_term = -(-num // den)
    return 8 + max(ceil_term * (p.cr + 4), 0)


def time_on_air(p: RadioParams, payload_len_bytes: int) -> AirTime:
    """Preamble and payload durations for a packet of the given length."""
    t_sym = symbol_time_s(p)
    n_payload = payload_symbol_count(p, payload_len_bytes)
    return AirTime(
        preamble_s=(p.preamble_symbols + 4.25) * t_sym,
        payload_s=n_payload * t_sym,
    )
