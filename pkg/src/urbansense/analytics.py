"""Data-fusion analytics over stored measurements plus a city reference series.

All operations are pure functions over measurement records; persistence and
HTTP access live elsewhere. Local time equals UTC in simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, datetime
from typing import Iterable, Sequence

import numpy as np

from .server.store import MeasurementRecord

SUN = "sun"
SHADE = "shade"

RAIN_HUMIDITY_RH = 80.0

# quadrant split points for the humidity/occupancy scatter
SCATTER_HUMIDITY_SPLIT = 80.0
SCATTER_SITTING_SPLIT = 15


class CoverageError(ValueError):
    """Reference series does not cover the requested records or window."""


class RangeError(ValueError):
    """Input value outside its physical range."""


@dataclass(frozen=True)
class ReferenceSeries:
    """City reference sensor: temperature and rain flags at fixed timestamps."""

    timestamps: tuple[datetime, ...]
    temperature_c: tuple[float, ...]
    rain: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "timestamps", tuple(self.timestamps))
        object.__setattr__(self, "temperature_c", tuple(self.temperature_c))
        object.__setattr__(self, "rain", tuple(self.rain))
        n = len(self.timestamps)
        if len(self.temperature_c) != n or len(self.rain) != n:
            raise ValueError("reference series arrays must have equal length")
        for a, b in zip(self.timestamps, self.timestamps[1:]):
            if b <= a:
                raise ValueError("reference timestamps must be strictly increasing")

    def dates(self) -> list[date]:
        seen: dict[date, None] = {}
        for ts in self.timestamps:
            seen.setdefault(ts.date())
        return list(seen)

    def daily_mean_temp(self) -> dict[date, float]:
        sums: dict[date, list[float]] = {}
        for ts, t in zip(self.timestamps, self.temperature_c):
            sums.setdefault(ts.date(), []).append(t)
        return {d: sum(v) / len(v) for d, v in sums.items()}

    def rain_dates(self) -> set[date]:
        return {ts.date() for ts, r in zip(self.timestamps, self.rain) if r}

    def interp_temp(self, at: Sequence[datetime]) -> list[float]:
        xs = np.array([ts.timestamp() for ts in self.timestamps])
        ys = np.array(self.temperature_c)
        return list(np.interp([t.timestamp() for t in at], xs, ys))


def sun_exposure_classify(node_series: Sequence[tuple[datetime, float]],
                          ref: ReferenceSeries,
                          daytime_window: tuple[float, float] = (10.0, 16.0),
                          delta_c: float = 5.0) -> dict[date, str]:
    """Label each covered day sun or shade from the daytime excess over ref.

    A day is ``sun`` when the mean of (node - reference) over samples inside
    the daytime window is at least ``delta_c``.
    """
    if delta_c <= 0:
        raise ValueError("delta_c must be positive")
    lo, hi = daytime_window
    ref_dates = set(ref.dates())
    by_day: dict[date, list[tuple[datetime, float]]] = {}
    for ts, temp in node_series:
        h = ts.hour + ts.minute / 60.0 + ts.second / 3600.0
        if lo <= h < hi:
            by_day.setdefault(ts.date(), []).append((ts, temp))
    if not by_day:
        raise CoverageError("no node samples inside the daytime window")
    missing = sorted(d for d in by_day if d not in ref_dates)
    if missing:
        raise CoverageError("reference series does not cover: "
                            + ", ".join(d.isoformat() for d in missing))
    labels: dict[date, str] = {}
    for day, samples in sorted(by_day.items()):
        times = [ts for ts, _ in samples]
        ref_temps = ref.interp_temp(times)
        deltas = [temp - r for (_, temp), r in zip(samples, ref_temps)]
        mean_delta = sum(deltas) / len(deltas)
        labels[day] = SUN if mean_delta >= delta_c else SHADE
    return labels


def rain_flag(humidity_rh: float) -> bool:
    """True when humidity sits in the rain band (>= 80 %RH)."""
    if not 0.0 <= humidity_rh <= 100.0:
        raise RangeError(f"humidity out of range: {humidity_rh}")
    return humidity_rh >= RAIN_HUMIDITY_RH


@dataclass(frozen=True)
class ScatterResult:
    """Humidity/occupancy points and their quadrant counts.

    Quadrant keys combine the humidity split (dry < 80 <= humid) with the
    sitting split (low < 15 <= high).
    """

    points: tuple[tuple[float, int], ...]
    quadrants: dict[str, int]


def occupancy_vs_humidity(records: Iterable[MeasurementRecord],
                          square_id: str) -> ScatterResult:
    """One (humidity, sitting) point per frame interval for a square."""
    points: list[tuple[float, int]] = []
    for rec in records:
        if rec.square_id != square_id:
            continue
        for s in rec.intervals():
            if s.sitting_min is None:
                continue
            points.append((rec.humidity_rh, s.sitting_min))
    quadrants = {"dry_low": 0, "dry_high": 0, "humid_low": 0, "humid_high": 0}
    for hum, sit in points:
        wet = "humid" if hum >= SCATTER_HUMIDITY_SPLIT else "dry"
        occ = "high" if sit >= SCATTER_SITTING_SPLIT else "low"
        quadrants[f"{wet}_{occ}"] += 1
    return ScatterResult(tuple(points), quadrants)


@dataclass(frozen=True)
class HourlyProfile:
    """Accumulated sitting minutes per time-of-day bin, day-class normalized.

    Weekday bins carry the Mon-Fri accumulation divided by 5, weekend bins
    the Sat-Sun accumulation divided by 2. ``lunch_window`` is annotation
    only (hours of day).
    """

    bin_h: float
    weekday: tuple[float, ...]
    weekend: tuple[float, ...]
    lunch_window: tuple[float, float] = (12.0, 13.0)

    @property
    def bin_starts_h(self) -> list[float]:
        return [i * self.bin_h for i in range(len(self.weekday))]


def hourly_profile(records: Iterable[MeasurementRecord], square_id: str,
                   bin_h: float = 0.25) -> HourlyProfile:
    """Time-of-day occupancy profile at quarter-hour (default) granularity.

    Each interval's sitting minutes are split evenly over the bins the
    interval spans, starting at its interval_start; the day class (weekday
    vs weekend) is taken from interval_start as well.
    """
    if bin_h <= 0 or not (24.0 / bin_h).is_integer():
        raise ValueError(f"bin_h must divide 24 h evenly: {bin_h}")
    n_bins = int(round(24.0 / bin_h))
    bin_w_s = int(round(bin_h * 3600))
    weekday = [0.0] * n_bins
    weekend = [0.0] * n_bins
    for rec in records:
        if rec.square_id != square_id:
            continue
        if rec.interval_s % bin_w_s == 0:
            bins_per_interval = rec.interval_s // bin_w_s
        elif bin_w_s % rec.interval_s == 0:
            bins_per_interval = 1
        else:
            raise ValueError("interval length and bin width are not aligned")
        for s in rec.intervals():
            if s.sitting_min is None:
                continue
            target = weekday if s.start.weekday() < 5 else weekend
            sec = s.start.hour * 3600 + s.start.minute * 60 + s.start.second
            first_bin = sec // bin_w_s
            share = s.sitting_min / bins_per_interval
            for k in range(bins_per_interval):
                target[(first_bin + k) % n_bins] += share
    return HourlyProfile(
        bin_h=bin_h,
        weekday=tuple(v / 5.0 for v in weekday),
        weekend=tuple(v / 2.0 for v in weekend),
    )


@dataclass(frozen=True)
class DailyUsageRow:
    day: date
    square_id: str
    total_sitting_min: int
    ref_mean_temp_c: float


def daily_sitting_vs_temperature(records: Iterable[MeasurementRecord],
                                 ref: ReferenceSeries,
                                 squares: Sequence[str] | None = None
                                 ) -> list[DailyUsageRow]:
    """Per-day sitting totals per square joined with daily mean ref temperature.

    Days covered by the reference but without records yield zero rows.
    Sitting is attributed to the calendar date of each interval_start.
    """
    daily_temp = ref.daily_mean_temp()
    totals: dict[tuple[date, str], int] = {}
    square_set = set(squares or ())
    missing: set[date] = set()
    for rec in records:
        if rec.square_id is None:
            continue
        square_set.add(rec.square_id)
        for s in rec.intervals():
            if s.sitting_min is None:
                continue
            d = s.start.date()
            if d not in daily_temp:
                missing.add(d)
                continue
            totals[(d, rec.square_id)] = totals.get((d, rec.square_id), 0) + s.sitting_min
    if missing:
        raise CoverageError("reference series does not cover: "
                            + ", ".join(d.isoformat() for d in sorted(missing)))
    rows = []
    for d in sorted(daily_temp):
        for sq in sorted(square_set):
            rows.append(DailyUsageRow(d, sq, totals.get((d, sq), 0),
                                      daily_temp[d]))
    return rows


def profile_mass_balance(profile: HourlyProfile) -> tuple[float, float]:
    """Total normalized mass re-inflated by the day-class constants."""
    return (math.fsum(profile.weekday) * 5.0, math.fsum(profile.weekend) * 2.0)
