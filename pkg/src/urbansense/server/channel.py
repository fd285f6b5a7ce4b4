"""Lossy uplink channel: seeded random loss plus per-node permanent dropouts.

Delivery is a pure function of (seed, dev_eui, fcnt), so replaying a run
reproduces exactly the same losses regardless of processing order.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from datetime import datetime
from typing import Mapping

from ..envelope import UplinkEnvelope


def _stable_uniform(seed: int, dev_eui: str, fcnt: int) -> float:
    digest = hashlib.sha256(f"{seed}:{dev_eui}:{fcnt}".encode()).digest()
    return int.from_bytes(digest[:8], "big") / 2.0 ** 64


@dataclass(frozen=True)
class ChannelModel:
    """Random loss with probability ``loss_probability``; nodes listed in
    ``dropout_at`` fall permanently silent from that instant on."""

    loss_probability: float = 0.0
    seed: int = 0
    dropout_at: Mapping[str, datetime] = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.loss_probability < 1.0:
            raise ValueError(
                f"loss_probability must be in [0, 1): {self.loss_probability}")

    def deliver(self, env: UplinkEnvelope) -> bool:
        cutoff = self.dropout_at.get(env.dev_eui)
        if cutoff is not None and env.received_at >= cutoff:
            return False
        if self.loss_probability == 0.0:
            return True
        return _stable_uniform(self.seed, env.dev_eui, env.fcnt) >= self.loss_probability
