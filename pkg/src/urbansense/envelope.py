"""Gateway-style uplink envelope: metadata wrapping one application payload."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

from .model import parse_rfc3339, rfc3339


@dataclass(frozen=True)
class UplinkEnvelope:
    """One received uplink as forwarded to the network server."""

    dev_eui: str
    fcnt: int
    port: int
    payload_hex: str
    rssi_dbm: int
    snr_db: float
    received_at: datetime

    def __post_init__(self):
        object.__setattr__(self, "dev_eui", self.dev_eui.lower())
        object.__setattr__(self, "payload_hex", self.payload_hex.lower())
        if len(self.dev_eui) != 16:
            raise ValueError(f"dev_eui must be 16 hex chars: {self.dev_eui!r}")
        if not 0 <= self.fcnt < 2 ** 32:
            raise ValueError(f"fcnt out of range: {self.fcnt}")
        if not 1 <= self.port <= 223:
            raise ValueError(f"port out of range: {self.port}")
        if len(self.payload_hex) % 2 != 0:
            raise ValueError("payload_hex must have even length")
        bytes.fromhex(self.payload_hex)
        if self.received_at.tzinfo is None:
            raise ValueError("received_at must be timezone-aware")

    def to_json_dict(self) -> dict:
        return {
            "dev_eui": self.dev_eui,
            "fcnt": self.fcnt,
            "port": self.port,
            "payload_hex": self.payload_hex,
            "rssi_dbm": self.rssi_dbm,
            "snr_db": self.snr_db,
            "received_at": rfc3339(self.received_at),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> UplinkEnvelope:
        return cls(
            dev_eui=d["dev_eui"],
            fcnt=int(d["fcnt"]),
            port=int(d["port"]),
            payload_hex=d["payload_hex"],
            rssi_dbm=int(d["rssi_dbm"]),
            snr_db=float(d["snr_db"]),
            received_at=parse_rfc3339(d["received_at"]),
        )
