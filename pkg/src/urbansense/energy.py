"""Duty-cycle energy accounting and battery lifetime projection.

Three contributors: a continuous background draw (accelerometer + microphone
polling), a duty-cycled GNSS session per uplink cycle, and one radio
transmission per cycle. Radio energy is a per-event quantity calibrated from
bench measurements rather than power x airtime, which underestimates the
modem's wake/TX/RX-window overhead.
"""

from __future__ import annotations

from dataclasses import dataclass

HOURS_PER_DAY = 24.0
_DAY_S = 86_400
_CYCLE_S = 7_200


class DomainError(ValueError):
    """Input outside the model's domain (zero/negative energy, bad counts)."""


class TraceError(ValueError):
    """Malformed activity trace (negative duration, overlapping task slots)."""


@dataclass(frozen=True)
class PowerProfile:
    """Per-task power draws and daily duty cycles.

    ``e_uplink_mwh`` is the measured energy of one complete transmission
    event. ``gnss_active_s_per_call`` defaults to the worst-case 300 s cap.
    """

    p_background_mw: float = 0.39
    p_gnss_mw: float = 22.9
    e_uplink_mwh: float = 0.1592
    gnss_active_s_per_call: float = 300.0
    gnss_calls_per_day: int = 12
    uplinks_per_day: int = 12

    def __post_init__(self):
        for name in ("p_background_mw", "p_gnss_mw", "e_uplink_mwh",
                     "gnss_active_s_per_call"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be non-negative")
        max_per_day = _DAY_S // _CYCLE_S
        for name in ("gnss_calls_per_day", "uplinks_per_day"):
            v = getattr(self, name)
            if not 0 <= v <= max_per_day:
                raise DomainError(
                    f"{name} must be in 0..{max_per_day} for the 2 h cycle, got {v}")


@dataclass(frozen=True)
class BatteryModel:
    """Usable battery energy after derating; nominal figures informational."""

    usable_energy_mwh: float = 2053.0
    nominal_capacity_mah: float = 2000.0
    nominal_voltage_v: float = 3.0

    def __post_init__(self):
        if self.usable_energy_mwh <= 0:
            raise DomainError("usable_energy_mwh must be positive")


@dataclass(frozen=True)
class DailyEnergy:
    """Per-task daily energy breakdown in mWh."""

    background_mwh: float
    gnss_mwh: float
    lora_mwh: float

    @property
    def total_mwh(self) -> float:
        return self.background_mwh + self.gnss_mwh + self.lora_mwh


def daily_energy_mwh(p: PowerProfile, gnss_enabled: bool = True) -> DailyEnergy:
    """Closed-form daily energy for the standard schedule."""
    background = p.p_background_mw * HOURS_PER_DAY
    gnss = 0.0
    if gnss_enabled:
        gnss = p.p_gnss_mw * (p.gnss_active_s_per_call * p.gnss_calls_per_day / 3600.0)
    lora = p.e_uplink_mwh * p.uplinks_per_day
    return DailyEnergy(background, gnss, lora)


def lifetime_days(b: BatteryModel, daily_total_mwh: float) -> float:
    """Projected days of operation at a constant daily consumption."""
    if daily_total_mwh <= 0:
        raise DomainError("daily_total_mwh must be positive")
    return b.usable_energy_mwh / daily_total_mwh


@dataclass(frozen=True)
class EnergyLedger:
    """Integrated energy of a recorded activity trace.

    ``timeline`` holds (t_s, cumulative_mwh) breakpoints: one at 0, one at
    each event boundary, one at the span end. Between breakpoints the
    cumulative curve is linear (background draw only).
    """

    background_mwh: float
    gnss_mwh: float
    lora_mwh: float
    span_s: float
    timeline: tuple[tuple[float, float], ...]

    @property
    def total_mwh(self) -> float:
        return self.background_mwh + self.gnss_mwh + self.lora_mwh


def energy_ledger(trace: list[tuple[str, float, float]], p: PowerProfile,
                  span_s: float) -> EnergyLedger:
    """Integrate a (task, start_s, duration_s) trace over ``span_s`` seconds.

    ``gnss`` events integrate p_gnss_mw over their duration; each ``lora``
    event adds e_uplink_mwh; background power covers the whole span. Events
    of the same task must not overlap.
    """
    if span_s < 0:
        raise TraceError("span must be non-negative")
    per_task: dict[str, list[tuple[float, float]]] = {}
    for task, start, dur in trace:
        if dur < 0:
            raise TraceError(f"negative duration for task {task!r} at t={start}")
        if start < 0 or start + dur > span_s:
            raise TraceError(f"event outside span: {task!r} at t={start}")
        per_task.setdefault(task, []).append((start, dur))
    for task, events in per_task.items():
        events.sort()
        for (s1, d1), (s2, _) in zip(events, events[1:]):
            if s1 + d1 > s2:
                raise TraceError(f"overlapping {task!r} events at t={s2}")

    gnss_mwh = sum(p.p_gnss_mw * d / 3600.0 for _, d in per_task.get("gnss", ()))
    lora_mwh = p.e_uplink_mwh * len(per_task.get("lora", ()))
    background_mwh = p.p_background_mw * span_s / 3600.0

    # cumulative curve sampled at event boundaries
    marks = sorted({0.0, span_s}
                   | {float(s) for task in per_task for s, _ in per_task[task]}
                   | {float(s + d) for task in per_task for s, d in per_task[task]})
    points = []
    for t in marks:
        cum = p.p_background_mw * t / 3600.0
        for s, d in per_task.get("gnss", ()):
            cum += p.p_gnss_mw * max(0.0, min(t, s + d) - s) / 3600.0
        cum += p.e_uplink_mwh * sum(1 for s, _ in per_task.get("lora", ()) if s <= t)
        points.append((t, cum))
    return EnergyLedger(background_mwh, gnss_mwh, lora_mwh, span_s, tuple(points))
