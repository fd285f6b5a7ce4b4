"""Scenario files and the synthetic world model behind multi-node runs.

A scenario fixes the deployment (squares, node placements, dropouts), the
weather (daily temperature cycle, cold spells, rain events), and visitor
behavior per square. ``build_world`` turns it into per-node environment
traces, a city reference series, and a channel model, all deterministic
for the scenario seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .analytics import ReferenceSeries
from .model import (GeoPosition, GeometryError, NodeIdentity,
                    SquareDefinition, parse_rfc3339, point_in_square, rfc3339)
from .server.channel import ChannelModel

DAY_S = 86_400
SLOT_S = 1_800      # visitor behavior granularity
CYCLE_S = 7_200     # uplink cadence; rain response is evaluated per cycle
REF_PERIOD_S = 600

# visitor episodes are confined to one slot and sized for realistic sits
EPISODE_MIN_S = 240
EPISODE_MAX_S = 1320
# hard per-slot occupancy cap while the cycle's humidity can reach the
# heavy-rain band; keeps wet slots clearly below full occupation
HEAVY_RAIN_RH = 90.0
HEAVY_RAIN_CAP_S = 1200
RAIN_RH = 80.0


class ScenarioError(ValueError):
    """Scenario file invalid; the message names the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _req(d: dict, key: str, path: str):
    if key not in d:
        raise ScenarioError(f"{path}.{key}", "missing required field")
    return d[key]


@dataclass(frozen=True)
class RainEvent:
    start_day: int
    start_hour: float
    duration_h: float
    strength: float = 0.8

    def window_s(self) -> tuple[float, float]:
        t0 = self.start_day * DAY_S + self.start_hour * 3600.0
        return t0, t0 + self.duration_h * 3600.0


@dataclass(frozen=True)
class WeatherConfig:
    temp_min_c: float = 16.0
    temp_max_c: float = 29.0
    temp_jitter_c: float = 0.8  # hard bound on the day-to-day min/max offset
    cold_days: tuple[int, ...] = ()
    cold_temp_min_c: float = 8.0
    cold_temp_max_c: float = 13.0
    sun_offset_c: float = 13.0
    base_humidity_rh: float = 55.0
    rain_events: tuple[RainEvent, ...] = ()


@dataclass(frozen=True)
class VisitorConfig:
    """Episode intensity (expected sitting episodes per 30-minute slot)."""

    base: float = 0.30
    lunch: float = 1.30
    afternoon: float = 0.45
    evening: float = 0.55
    weekend_day: float = 0.55
    weekend_evening: float = 0.75
    night: float = 0.02
    rain_aversion: float = 0.08
    cold_cutoff_c: float = 15.0
    cold_factor: float = 0.0

    def intensity(self, weekday: int, hour: float) -> float:
        if weekday < 5:
            if hour < 7.0 or hour >= 23.0:
                return self.night
            if 11.5 <= hour < 13.5:
                return self.lunch
            if 13.5 <= hour < 17.0:
                return self.afternoon
            if hour >= 17.0:
                return self.evening
            return self.base
        if hour < 8.0 or hour >= 23.0:
            return self.night
        if 20.0 <= hour < 23.0:
            return self.weekend_evening
        return self.weekend_day


@dataclass(frozen=True)
class NodeSpec:
    identity: NodeIdentity
    square_id: str
    position: GeoPosition
    sun_exposed: bool = False
    dropout_day: int | None = None


@dataclass(frozen=True)
class ScenarioSquare:
    definition: SquareDefinition
    noise_base_db: float = 50.0


@dataclass(frozen=True)
class Scenario:
    seed: int
    duration_days: int
    epoch_utc: datetime
    squares: tuple[ScenarioSquare, ...]
    nodes: tuple[NodeSpec, ...]
    weather: WeatherConfig = field(default_factory=WeatherConfig)
    visitors: dict[str, VisitorConfig] = field(default_factory=dict)
    loss_probability: float = 0.0

    @property
    def duration_s(self) -> int:
        return self.duration_days * DAY_S

    def square(self, square_id: str) -> ScenarioSquare:
        for sq in self.squares:
            if sq.definition.id == square_id:
                return sq
        raise KeyError(square_id)

    def validate(self) -> None:
        if self.seed < 0:
            raise ScenarioError("seed", "must be non-negative")
        if self.duration_days < 1:
            raise ScenarioError("duration_days", "must be at least 1")
        if (self.epoch_utc.hour, self.epoch_utc.minute,
                self.epoch_utc.second) != (0, 0, 0):
            raise ScenarioError("epoch_utc", "must be midnight UTC")
        ids = [sq.definition.id for sq in self.squares]
        if len(set(ids)) != len(ids):
            raise ScenarioError("squares", "duplicate square ids")
        euis = [n.identity.dev_eui for n in self.nodes]
        if len(set(euis)) != len(euis):
            raise ScenarioError("nodes", "duplicate dev_eui")
        for i, node in enumerate(self.nodes):
            if node.square_id not in ids:
                raise ScenarioError(f"nodes[{i}].square",
                                    f"unknown square {node.square_id!r}")
            sq = self.square(node.square_id).definition
            if not point_in_square(node.position, sq):
                raise ScenarioError(
                    f"nodes[{i}]",
                    f"placement is outside square {node.square_id!r}")
            if node.dropout_day is not None and not (
                    0 < node.dropout_day <= self.duration_days):
                raise ScenarioError(f"nodes[{i}].dropout_day",
                                    "must lie within the run duration")
        for sid in ids:
            if sid not in self.visitors:
                raise ScenarioError(f"visitors.{sid}", "missing visitor config")
        for i, ev in enumerate(self.weather.rain_events):
            if not 0 <= ev.start_day < self.duration_days:
                raise ScenarioError(f"weather.rain_events[{i}].start_day",
                                    "outside the run duration")
            if ev.duration_h <= 0:
                raise ScenarioError(f"weather.rain_events[{i}].duration_h",
                                    "must be positive")
            if not 0.0 < ev.strength <= 1.0:
                raise ScenarioError(f"weather.rain_events[{i}].strength",
                                    "must be in (0, 1]")
        for i, d in enumerate(self.weather.cold_days):
            if not 0 <= d < self.duration_days:
                raise ScenarioError(f"weather.cold_days[{i}]",
                                    "outside the run duration")
        if not 0.0 <= self.loss_probability < 1.0:
            raise ScenarioError("channel.loss_probability", "must be in [0, 1)")


# -- JSON (de)serialization ---------------------------------------------------

def scenario_from_dict(d: dict) -> Scenario:
    try:
        epoch = parse_rfc3339(str(_req(d, "epoch_utc", "$")))
    except ValueError as e:
        raise ScenarioError("epoch_utc", str(e)) from e

    squares = []
    for i, s in enumerate(_req(d, "squares", "$")):
        path = f"squares[{i}]"
        boundary = []
        for j, pair in enumerate(_req(s, "boundary", path)):
            if len(pair) != 2:
                raise ScenarioError(f"{path}.boundary[{j}]",
                                    "expected [lat, lon]")
            boundary.append(GeoPosition.from_degrees(pair[0], pair[1]))
        try:
            definition = SquareDefinition(
                str(_req(s, "id", path)), str(s.get("name", "")), tuple(boundary))
        except GeometryError as e:
            raise ScenarioError(f"{path}.boundary", str(e)) from e
        squares.append(ScenarioSquare(definition,
                                      float(s.get("noise_base_db", 50.0))))

    nodes = []
    for i, n in enumerate(_req(d, "nodes", "$")):
        path = f"nodes[{i}]"
        try:
            ident = NodeIdentity(str(_req(n, "dev_eui", path)),
                                 str(n.get("label", "")))
        except ValueError as e:
            raise ScenarioError(f"{path}.dev_eui", str(e)) from e
        pos = GeoPosition.from_degrees(float(_req(n, "lat", path)),
                                       float(_req(n, "lon", path)))
        dropout = n.get("dropout_day")
        nodes.append(NodeSpec(
            identity=ident,
            square_id=str(_req(n, "square", path)),
            position=pos,
            sun_exposed=bool(n.get("sun_exposed", False)),
            dropout_day=None if dropout is None else int(dropout),
        ))

    w = d.get("weather", {})
    weather = WeatherConfig(
        temp_min_c=float(w.get("temp_min_c", 16.0)),
        temp_max_c=float(w.get("temp_max_c", 29.0)),
        temp_jitter_c=float(w.get("temp_jitter_c", 0.8)),
        cold_days=tuple(int(x) for x in w.get("cold_days", ())),
        cold_temp_min_c=float(w.get("cold_temp_min_c", 8.0)),
        cold_temp_max_c=float(w.get("cold_temp_max_c", 13.0)),
        sun_offset_c=float(w.get("sun_offset_c", 13.0)),
        base_humidity_rh=float(w.get("base_humidity_rh", 55.0)),
        rain_events=tuple(
            RainEvent(int(_req(ev, "start_day", f"weather.rain_events[{i}]")),
                      float(_req(ev, "start_hour", f"weather.rain_events[{i}]")),
                      float(_req(ev, "duration_h", f"weather.rain_events[{i}]")),
                      float(ev.get("strength", 0.8)))
            for i, ev in enumerate(w.get("rain_events", ()))),
    )

    visitors = {}
    for sid, v in d.get("visitors", {}).items():
        visitors[str(sid)] = VisitorConfig(
            base=float(v.get("base", 0.30)),
            lunch=float(v.get("lunch", 1.30)),
            afternoon=float(v.get("afternoon", 0.45)),
            evening=float(v.get("evening", 0.55)),
            weekend_day=float(v.get("weekend_day", 0.55)),
            weekend_evening=float(v.get("weekend_evening", 0.75)),
            night=float(v.get("night", 0.02)),
            rain_aversion=float(v.get("rain_aversion", 0.08)),
            cold_cutoff_c=float(v.get("cold_cutoff_c", 15.0)),
            cold_factor=float(v.get("cold_factor", 0.0)),
        )

    scenario = Scenario(
        seed=int(_req(d, "seed", "$")),
        duration_days=int(_req(d, "duration_days", "$")),
        epoch_utc=epoch,
        squares=tuple(squares),
        nodes=tuple(nodes),
        weather=weather,
        visitors=visitors,
        loss_probability=float(d.get("channel", {}).get("loss_probability", 0.0)),
    )
    scenario.validate()
    return scenario


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "seed": s.seed,
        "duration_days": s.duration_days,
        "epoch_utc": rfc3339(s.epoch_utc),
        "squares": [{
            "id": sq.definition.id,
            "name": sq.definition.name,
            "noise_base_db": sq.noise_base_db,
            "boundary": [[round(v.lat_e7 / 1e7, 7), round(v.lon_e7 / 1e7, 7)]
                         for v in sq.definition.boundary],
        } for sq in s.squares],
        "nodes": [{
            "dev_eui": n.identity.dev_eui,
            "label": n.identity.label,
            "square": n.square_id,
            "lat": round(n.position.lat_e7 / 1e7, 7),
            "lon": round(n.position.lon_e7 / 1e7, 7),
            "sun_exposed": n.sun_exposed,
            "dropout_day": n.dropout_day,
        } for n in s.nodes],
        "weather": {
            "temp_min_c": s.weather.temp_min_c,
            "temp_max_c": s.weather.temp_max_c,
            "temp_jitter_c": s.weather.temp_jitter_c,
            "cold_days": list(s.weather.cold_days),
            "cold_temp_min_c": s.weather.cold_temp_min_c,
            "cold_temp_max_c": s.weather.cold_temp_max_c,
            "sun_offset_c": s.weather.sun_offset_c,
            "base_humidity_rh": s.weather.base_humidity_rh,
            "rain_events": [{
                "start_day": ev.start_day,
                "start_hour": ev.start_hour,
                "duration_h": ev.duration_h,
                "strength": ev.strength,
            } for ev in s.weather.rain_events],
        },
        "visitors": {sid: {
            "base": v.base, "lunch": v.lunch, "afternoon": v.afternoon,
            "evening": v.evening, "weekend_day": v.weekend_day,
            "weekend_evening": v.weekend_evening, "night": v.night,
            "rain_aversion": v.rain_aversion,
            "cold_cutoff_c": v.cold_cutoff_c, "cold_factor": v.cold_factor,
        } for sid, v in sorted(s.visitors.items())},
        "channel": {"loss_probability": s.loss_probability},
    }


def load_scenario(path: str | Path) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError("$", f"cannot read scenario file {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError("$", f"invalid JSON: {e}") from e
    return scenario_from_dict(data)


# -- world model ---------------------------------------------------------------

class WeatherModel:
    """Deterministic weather: daily temperature sine, cold spells, rain."""

    def __init__(self, s: Scenario):
        self._w = s.weather
        self._seed = s.seed
        self._duration_days = s.duration_days
        self._day_params: dict[int, tuple[float, float]] = {}

    def _params(self, day: int) -> tuple[float, float]:
        cached = self._day_params.get(day)
        if cached is not None:
            return cached
        w = self._w
        rng = np.random.default_rng([self._seed, 5, max(day, 0)])
        jit_lo, jit_hi = np.clip(rng.normal(0.0, w.temp_jitter_c / 2.0, 2),
                                 -w.temp_jitter_c, w.temp_jitter_c)
        if day in w.cold_days:
            lo, hi = w.cold_temp_min_c + jit_lo, w.cold_temp_max_c + jit_hi
        else:
            lo, hi = w.temp_min_c + jit_lo, w.temp_max_c + jit_hi
        if hi <= lo:
            hi = lo + 1.0
        self._day_params[day] = (lo, hi)
        return (lo, hi)

    def ref_temp_c(self, t_s: float) -> float:
        day = int(t_s // DAY_S)
        lo, hi = self._params(day)
        h = (t_s % DAY_S) / 3600.0
        mid, amp = (lo + hi) / 2.0, (hi - lo) / 2.0
        # coolest around 03:00, warmest around 15:00
        return mid + amp * math.sin(2.0 * math.pi * (h - 9.0) / 24.0)

    def rain_strength(self, t_s: float) -> float:
        strength = 0.0
        for ev in self._w.rain_events:
            t0, t1 = ev.window_s()
            if t0 <= t_s < t1:
                strength = max(strength, ev.strength)
        return strength

    def raining(self, t_s: float) -> bool:
        return self.rain_strength(t_s) > 0.0

    def max_rain_strength(self, t0: float, t1: float) -> float:
        strength = 0.0
        for ev in self._w.rain_events:
            e0, e1 = ev.window_s()
            if e0 < t1 and t0 < e1:
                strength = max(strength, ev.strength)
        return strength

    def ref_humidity_rh(self, t_s: float) -> float:
        strength = self.rain_strength(t_s)
        if strength > 0.0:
            return min(100.0, 82.0 + 16.0 * strength)
        h = (t_s % DAY_S) / 3600.0
        rh = self._w.base_humidity_rh + 8.0 * math.cos(2.0 * math.pi * (h - 3.0) / 24.0)
        return min(75.0, max(30.0, rh))

    def sun_offset_c(self, t_s: float) -> float:
        h = (t_s % DAY_S) / 3600.0
        if not 7.0 <= h <= 19.0 or self.raining(t_s):
            return 0.0
        return self._w.sun_offset_c * math.sin(math.pi * (h - 7.0) / 12.0)

    def build_reference(self, epoch_utc: datetime) -> ReferenceSeries:
        n = (self._duration_days * DAY_S) // REF_PERIOD_S
        times, temps, rain = [], [], []
        for k in range(n):
            t = k * REF_PERIOD_S
            times.append(epoch_utc + timedelta(seconds=t))
            temps.append(round(self.ref_temp_c(t), 3))
            rain.append(self.raining(t))
        return ReferenceSeries(tuple(times), tuple(temps), tuple(rain))


class VisitorModel:
    """Slot-wise Poisson sitting episodes shaped by time, weather, and rain.

    Episodes never cross slot (and hence day) boundaries. While any rain
    event can push the enclosing uplink cycle into the heavy-rain humidity
    band, per-slot occupancy is capped hard; while any rain overlaps the
    cycle, the episode rate is scaled by the aversion factor. Cold days
    (daily mean reference temperature below the cutoff) scale the rate by
    the square's cold factor.
    """

    def __init__(self, s: Scenario, weather: WeatherModel,
                 ref: ReferenceSeries):
        self._s = s
        self._weather = weather
        epoch_date = s.epoch_utc.date()
        daily = ref.daily_mean_temp()
        self._daily_mean = {(d - epoch_date).days: v for d, v in daily.items()}

    def episodes_for_day(self, node_index: int, day: int) -> list[tuple[int, int, float]]:
        """Merged (start_s, duration_s, deviation_g) episodes for one day."""
        s = self._s
        node = s.nodes[node_index]
        cfg = s.visitors[node.square_id]
        weekday = (s.epoch_utc.weekday() + day) % 7
        day_mean = self._daily_mean.get(day)
        cold = day_mean is not None and day_mean < cfg.cold_cutoff_c
        rng = np.random.default_rng([s.seed, 23, node_index, day])
        episodes: list[tuple[int, int, float]] = []
        for slot in range(DAY_S // SLOT_S):
            t_slot = day * DAY_S + slot * SLOT_S
            hour = (slot * SLOT_S) / 3600.0
            lam = cfg.intensity(weekday, hour)
            if cold:
                lam *= cfg.cold_factor
            cyc0 = (t_slot // CYCLE_S) * CYCLE_S
            cycle_rain = self._weather.max_rain_strength(cyc0, cyc0 + CYCLE_S)
            if cycle_rain > 0.0:
                lam *= cfg.rain_aversion
            heavy = 82.0 + 16.0 * cycle_rain >= HEAVY_RAIN_RH
            k = int(rng.poisson(lam)) if lam > 0.0 else 0
            slot_eps = []
            for _ in range(k):
                dur = int(rng.integers(EPISODE_MIN_S, EPISODE_MAX_S + 1))
                start = int(rng.integers(0, SLOT_S - dur + 1))
                dev = 0.08 + 0.10 * float(rng.random())
                slot_eps.append((t_slot + start, dur, dev))
            merged = _merge_episodes(slot_eps)
            if heavy:
                merged = _cap_episodes(merged, HEAVY_RAIN_CAP_S)
            episodes.extend(merged)
        return episodes


def _merge_episodes(eps: list[tuple[int, int, float]]) -> list[tuple[int, int, float]]:
    if not eps:
        return []
    eps = sorted(eps)
    out = [eps[0]]
    for start, dur, dev in eps[1:]:
        p_start, p_dur, p_dev = out[-1]
        if start <= p_start + p_dur:
            end = max(p_start + p_dur, start + dur)
            out[-1] = (p_start, end - p_start, p_dev)
        else:
            out.append((start, dur, dev))
    return out


def _cap_episodes(eps: list[tuple[int, int, float]],
                  cap_s: int) -> list[tuple[int, int, float]]:
    out = []
    budget = cap_s
    for start, dur, dev in eps:
        if budget <= 0:
            break
        take = min(dur, budget)
        out.append((start, take, dev))
        budget -= take
    return out


_HOURS = np.arange(DAY_S) / 3600.0
_NOISE_DAY_SHAPE = 6.0 * np.clip(np.sin(math.pi * (_HOURS - 6.0) / 14.0), 0.0, None)


class NodeTrace:
    """Environment trace of one node; fulfills the node-sim trace protocol."""

    def __init__(self, s: Scenario, node_index: int, weather: WeatherModel,
                 visitors: VisitorModel):
        self._s = s
        self._node = s.nodes[node_index]
        self._index = node_index
        self._weather = weather
        self._visitors = visitors
        self._noise_base = s.square(self._node.square_id).noise_base_db
        self._episode_cache: tuple[int, list[tuple[int, int, float]]] | None = None
        self._noise_cache: tuple[int, np.ndarray] | None = None

    # temperature and humidity carry small node-local sensor jitter,
    # deterministic per (seed, node, second)
    def _sample_rng(self, t_s: int, stream: int) -> np.random.Generator:
        return np.random.default_rng([self._s.seed, stream, self._index, int(t_s)])

    def temperature_c(self, t_s: float) -> float:
        base = self._weather.ref_temp_c(t_s)
        if self._node.sun_exposed:
            base += self._weather.sun_offset_c(t_s)
        jitter = float(np.clip(self._sample_rng(int(t_s), 31).normal(0.0, 0.3),
                               -0.9, 0.9))
        return round(base + jitter, 2)

    def humidity_rh(self, t_s: float) -> float:
        base = self._weather.ref_humidity_rh(t_s)
        jitter = float(np.clip(self._sample_rng(int(t_s), 37).normal(0.0, 1.2),
                               -3.6, 3.6))
        rh = base + jitter
        if self._weather.raining(t_s):
            rh = min(100.0, max(80.0, rh))
        else:
            rh = min(79.0, max(0.0, rh))
        return round(rh, 2)

    def _day_episodes(self, day: int) -> list[tuple[int, int, float]]:
        if self._episode_cache is None or self._episode_cache[0] != day:
            self._episode_cache = (day, self._visitors.episodes_for_day(
                self._index, day))
        return self._episode_cache[1]

    def sitting_segments(self, t0: int, t1: int):
        day = t0 // DAY_S
        if t1 > (day + 1) * DAY_S:
            raise ValueError("interval crosses a day boundary")
        segments: list[tuple[int, float]] = []
        cursor = t0
        for start, dur, dev in self._day_episodes(day):
            end = start + dur
            if end <= t0 or start >= t1:
                continue
            s, e = max(start, t0), min(end, t1)
            if s > cursor:
                segments.append((s - cursor, 0.0))
            segments.append((e - s, dev))
            cursor = e
        if cursor < t1:
            segments.append((t1 - cursor, 0.0))
        return segments

    def noise_series(self, t0: int, n: int) -> np.ndarray:
        day = t0 // DAY_S
        if self._noise_cache is None or self._noise_cache[0] != day:
            rng = np.random.default_rng([self._s.seed, 7, self._index, day])
            slot_offsets = np.repeat(rng.normal(0.0, 1.5, DAY_S // SLOT_S), SLOT_S)
            series = (self._noise_base + _NOISE_DAY_SHAPE + slot_offsets
                      + rng.normal(0.0, 2.5, DAY_S))
            self._noise_cache = (day, np.clip(series, 20.0, 95.0))
        off = t0 - day * DAY_S
        if off + n > DAY_S:
            raise ValueError("noise window crosses a day boundary")
        return self._noise_cache[1][off:off + n]

    def gnss_fix_delay_s(self, t_s: float) -> float:
        rng = self._sample_rng(int(t_s), 11)
        if rng.random() < 0.03:
            return round(320.0 + 200.0 * rng.random(), 1)
        return float(np.clip(round(rng.lognormal(math.log(32.0), 0.55), 1),
                             5.0, 290.0))

    def gnss_accuracy_dm(self, t_s: float) -> int:
        rng = self._sample_rng(int(t_s), 13)
        return int(rng.integers(8, 61))


@dataclass(frozen=True)
class World:
    """Everything a run needs: one trace per node, reference, channel."""

    scenario: Scenario
    traces: dict[str, NodeTrace]
    reference: ReferenceSeries
    channel: ChannelModel


def build_world(s: Scenario) -> World:
    """Materialize the deterministic world model for a validated scenario."""
    s.validate()
    weather = WeatherModel(s)
    reference = weather.build_reference(s.epoch_utc)
    visitors = VisitorModel(s, weather, reference)
    traces = {node.identity.dev_eui: NodeTrace(s, i, weather, visitors)
              for i, node in enumerate(s.nodes)}
    dropout_at = {
        node.identity.dev_eui: s.epoch_utc + timedelta(days=node.dropout_day)
        for node in s.nodes if node.dropout_day is not None
    }
    channel = ChannelModel(loss_probability=s.loss_probability, seed=s.seed,
                           dropout_at=dropout_at)
    return World(s, traces, reference, channel)


# -- built-in scenarios --------------------------------------------------------

def _square_m() -> dict:
    return {
        "id": "M", "name": "Marktplatz", "noise_base_db": 52.0,
        "boundary": [[47.37060, 8.54030], [47.37075, 8.54130],
                     [47.37010, 8.54165], [47.36965, 8.54095],
                     [47.36990, 8.54010]],
    }


def _square_v() -> dict:
    return {
        "id": "V", "name": "Vorbahnhofplatz", "noise_base_db": 48.0,
        "boundary": [[47.41140, 8.54330], [47.41150, 8.54450],
                     [47.41070, 8.54470], [47.41055, 8.54345]],
    }


def default_scenario_dict() -> dict:
    """The 16-node, 61-day reference deployment (two squares, 5 dropouts)."""
    m_lat, m_lon = 47.37020, 8.54090
    v_lat, v_lon = 47.41105, 8.54400
    nodes = []
    placements = [
        ("M", m_lat + 0.00015, m_lon - 0.00020, True, None),
        ("M", m_lat + 0.00020, m_lon + 0.00030, True, None),
        ("M", m_lat - 0.00010, m_lon + 0.00040, True, 9),
        ("M", m_lat - 0.00025, m_lon - 0.00010, False, None),
        ("M", m_lat + 0.00005, m_lon + 0.00005, False, None),
        ("M", m_lat - 0.00015, m_lon - 0.00035, False, None),
        ("M", m_lat + 0.00030, m_lon + 0.00000, False, 18),
        ("M", m_lat - 0.00005, m_lon - 0.00045, False, None),
        ("V", v_lat + 0.00015, v_lon - 0.00030, True, None),
        ("V", v_lat + 0.00020, v_lon + 0.00020, True, None),
        ("V", v_lat - 0.00010, v_lon + 0.00030, False, 27),
        ("V", v_lat - 0.00020, v_lon - 0.00020, False, None),
        ("V", v_lat + 0.00005, v_lon + 0.00000, False, None),
        ("V", v_lat - 0.00015, v_lon + 0.00010, False, 38),
        ("V", v_lat + 0.00025, v_lon - 0.00010, False, None),
        ("V", v_lat - 0.00005, v_lon - 0.00040, False, 50),
    ]
    for i, (sq, lat, lon, sun, dropout) in enumerate(placements, start=1):
        nodes.append({
            "dev_eui": f"70b3d57ed004{i:04x}",
            "label": f"SNZ{i:02d}",
            "square": sq,
            "lat": round(lat, 7), "lon": round(lon, 7),
            "sun_exposed": sun,
            "dropout_day": dropout,
        })
    return {
        "seed": 42,
        "duration_days": 61,
        "epoch_utc": "2022-06-06T00:00:00Z",
        "squares": [_square_m(), _square_v()],
        "nodes": nodes,
        "weather": {
            "temp_min_c": 16.0,
            "temp_max_c": 28.5,
            "temp_jitter_c": 0.6,
            "cold_days": [39, 40, 41, 52],
            "cold_temp_min_c": 8.0,
            "cold_temp_max_c": 13.0,
            "sun_offset_c": 13.0,
            "base_humidity_rh": 55.0,
            "rain_events": [
                {"start_day": 4, "start_hour": 10.0, "duration_h": 9.0, "strength": 0.9},
                {"start_day": 11, "start_hour": 6.0, "duration_h": 14.0, "strength": 0.7},
                {"start_day": 19, "start_hour": 13.0, "duration_h": 6.0, "strength": 1.0},
                {"start_day": 26, "start_hour": 0.0, "duration_h": 20.0, "strength": 0.6},
                {"start_day": 33, "start_hour": 9.0, "duration_h": 10.0, "strength": 0.95},
                {"start_day": 40, "start_hour": 7.0, "duration_h": 12.0, "strength": 0.8},
                {"start_day": 47, "start_hour": 15.0, "duration_h": 8.0, "strength": 0.55},
                {"start_day": 55, "start_hour": 11.0, "duration_h": 5.0, "strength": 0.85},
            ],
        },
        "visitors": {
            "M": {"base": 0.30, "lunch": 1.30, "afternoon": 0.45,
                  "evening": 0.55, "weekend_day": 0.55, "weekend_evening": 0.75,
                  "night": 0.02, "rain_aversion": 0.08,
                  "cold_cutoff_c": 15.0, "cold_factor": 0.0},
            "V": {"base": 0.22, "lunch": 1.10, "afternoon": 0.18,
                  "evening": 0.10, "weekend_day": 0.12, "weekend_evening": 0.06,
                  "night": 0.01, "rain_aversion": 0.08,
                  "cold_cutoff_c": 15.0, "cold_factor": 0.35},
        },
        "channel": {"loss_probability": 0.0},
    }


def default_scenario() -> Scenario:
    return scenario_from_dict(default_scenario_dict())


def smoke_scenario_dict() -> dict:
    """A 2-node, 3-day variant for quick runs and CLI smoke tests."""
    d = default_scenario_dict()
    d["duration_days"] = 3
    d["nodes"] = [n for n in d["nodes"] if n["label"] in ("SNZ01", "SNZ12")]
    for n in d["nodes"]:
        n["dropout_day"] = None
    d["weather"]["cold_days"] = []
    d["weather"]["rain_events"] = [
        {"start_day": 1, "start_hour": 9.0, "duration_h": 8.0, "strength": 0.9},
    ]
    return d


def smoke_scenario() -> Scenario:
    return scenario_from_dict(smoke_scenario_dict())
