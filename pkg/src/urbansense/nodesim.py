"""Deterministic simulation of one sensor node.

Replicates the firmware's behavior: four 30-minute sampling intervals per
2-hour uplink cycle, continuous sitting/noise sampling, one GNSS session in
the second-last interval (capped), temperature/humidity sampled right before
transmission, and a 29-byte frame per cycle.

A node consumes an environment trace object with these methods::

    temperature_c(t_s) -> float
    humidity_rh(t_s) -> float
    noise_series(t0_s, n) -> sequence of n 1 Hz dBSPL reads
    sitting_segments(t0_s, t1_s) -> iterable of (duration_s, deviation_g)
                                    tiles covering [t0, t1) exactly
    gnss_fix_delay_s(t_s) -> float   time to fix for a session starting at t
    gnss_accuracy_dm(t_s) -> int     accuracy reported on a successful fix

Deviation tiles are the per-second magnitude of (mean acceleration -
baseline); the piecewise-constant form lets the occupancy state machine
advance whole tiles at once instead of stepping 86 400 times a day.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from datetime import datetime, timezone

from . import airtime, codec
from .energy import BatteryModel, PowerProfile
from .envelope import UplinkEnvelope
from .model import GeoPosition, NodeIdentity, SimTime

DEFAULT_EPOCH = datetime(2022, 6, 6, tzinfo=timezone.utc)  # a Monday

IDLE = "idle"
OCCUPIED = "occupied"


class SampleError(ValueError):
    """Accelerometer sample batch empty or malformed."""


class ScheduleError(ValueError):
    """Schedule configuration violates the cycle structure."""


@dataclass(frozen=True)
class ScheduleConfig:
    """Task schedule: interval length, cycle structure, sensor rates."""

    interval_s: int = 1800
    intervals_per_cycle: int = 4
    gnss_interval_index: int = 3
    gnss_max_s: int = 300
    accel_rate_hz: int = 26
    noise_rate_hz: int = 1

    def __post_init__(self):
        if self.interval_s <= 0 or self.intervals_per_cycle <= 0:
            raise ScheduleError("interval_s and intervals_per_cycle must be positive")
        if self.gnss_interval_index != self.intervals_per_cycle - 1:
            raise ScheduleError("GNSS must run in the second-last interval")
        if self.gnss_max_s < 0 or self.gnss_max_s > self.interval_s:
            raise ScheduleError("gnss_max_s must fit inside one interval")

    @property
    def cycle_s(self) -> int:
        return self.interval_s * self.intervals_per_cycle


@dataclass
class OccupancyDetector:
    """Threshold occupancy detector with hysteresis and debounce.

    Per second the magnitude of (mean acceleration - baseline) is compared
    against two thresholds. Entering needs ``enter_debounce_s`` consecutive
    seconds at or above the enter threshold (the final one counts as
    occupied); leaving needs ``exit_debounce_s`` consecutive seconds at or
    below the exit threshold (all but the final one still count).
    """

    baseline_g: tuple[float, float, float] = (0.0, 0.0, 1.0)
    enter_threshold_g: float = 0.05
    exit_threshold_g: float = 0.03
    enter_debounce_s: int = 3
    exit_debounce_s: int = 10
    state: str = IDLE
    occupied_s_this_interval: int = 0
    _above_run: int = 0
    _below_run: int = 0

    def __post_init__(self):
        if self.enter_threshold_g <= self.exit_threshold_g:
            raise ValueError("enter threshold must exceed exit threshold")
        if self.enter_debounce_s < 1 or self.exit_debounce_s < 1:
            raise ValueError("debounce times must be >= 1 s")

    def reset_interval(self) -> None:
        self.occupied_s_this_interval = 0

    def step_deviation(self, deviation_g: float) -> bool:
        """Advance one second on a precomputed deviation magnitude."""
        if self.state == IDLE:
            if deviation_g >= self.enter_threshold_g:
                self._above_run += 1
            else:
                self._above_run = 0
            if self._above_run >= self.enter_debounce_s:
                self.state = OCCUPIED
                self._above_run = 0
                self._below_run = 0
                occupied = True
            else:
                occupied = False
        else:
            if deviation_g <= self.exit_threshold_g:
                self._below_run += 1
                if self._below_run >= self.exit_debounce_s:
                    self.state = IDLE
                    self._below_run = 0
                    self._above_run = 0
                    occupied = False
                else:
                    occupied = True
            else:
                self._below_run = 0
                occupied = True
        if occupied:
            self.occupied_s_this_interval += 1
        return occupied

    def step(self, second_of_samples) -> bool:
        """Advance one second from raw accelerometer samples (one per read)."""
        samples = list(second_of_samples)
        if not samples:
            raise SampleError("empty accelerometer sample batch")
        n = len(samples)
        mx = sum(s[0] for s in samples) / n
        my = sum(s[1] for s in samples) / n
        mz = sum(s[2] for s in samples) / n
        bx, by, bz = self.baseline_g
        dev = math.sqrt((mx - bx) ** 2 + (my - by) ** 2 + (mz - bz) ** 2)
        return self.step_deviation(dev)

    def advance(self, deviation_g: float, seconds: int) -> int:
        """Equivalent of ``seconds`` step_deviation calls at a constant value.

        Returns the occupied-second count contributed; O(1) regardless of
        length. Kept exactly in lockstep with step_deviation by tests.
        """
        if seconds < 0:
            raise ValueError("seconds must be non-negative")
        if seconds == 0:
            return 0
        occupied = 0
        if self.state == IDLE:
            if deviation_g < self.enter_threshold_g:
                self._above_run = 0
            else:
                to_enter = self.enter_debounce_s - self._above_run
                if seconds < to_enter:
                    self._above_run += seconds
                else:
                    self.state = OCCUPIED
                    self._above_run = 0
                    self._below_run = 0
                    occupied = seconds - to_enter + 1
        else:
            if deviation_g > self.exit_threshold_g:
                self._below_run = 0
                occupied = seconds
            else:
                to_exit = self.exit_debounce_s - self._below_run
                if seconds < to_exit:
                    self._below_run += seconds
                    occupied = seconds
                else:
                    self.state = IDLE
                    self._below_run = 0
                    self._above_run = 0
                    occupied = to_exit - 1
        self.occupied_s_this_interval += occupied
        return occupied


@dataclass(frozen=True)
class EventRecord:
    """One line of the node event log."""

    t_s: int
    node: str
    event: str
    detail: str = ""


@dataclass
class NodeState:
    """Mutable state of one simulated node."""

    identity: NodeIdentity
    home: GeoPosition
    clock: SimTime
    cfg: ScheduleConfig = field(default_factory=ScheduleConfig)
    detector: OccupancyDetector = field(default_factory=OccupancyDetector)
    profile: PowerProfile = field(default_factory=PowerProfile)
    battery: BatteryModel = field(default_factory=BatteryModel)
    port: int = 2
    last_fix: GeoPosition = field(default_factory=GeoPosition.no_fix)
    frame_counter: int = 0
    consumed_mwh: float = 0.0
    battery_pct: int = 100
    interval_sitting: list[int] = field(default_factory=list)
    interval_noise: list[int] = field(default_factory=list)
    cycle_fix_ok: bool = False
    cycle_timeout: bool = False
    energy_events: list[tuple[str, float, float]] = field(default_factory=list)
    events: list[EventRecord] = field(default_factory=list)
    rng: random.Random = field(default_factory=lambda: random.Random(0))

    def log(self, event: str, detail: str = "") -> None:
        self.events.append(EventRecord(self.clock.t_s, self.identity.dev_eui,
                                       event, detail))


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def run_interval(state: NodeState, trace, idx: int) -> NodeState:
    """Run one sampling interval (1-based ``idx`` within the cycle)."""
    cfg = state.cfg
    if not 1 <= idx <= cfg.intervals_per_cycle:
        raise ScheduleError(f"interval index {idx} outside cycle")
    t0 = state.clock.t_s
    n = cfg.interval_s

    noise_reads = trace.noise_series(t0, n * cfg.noise_rate_hz)
    if len(noise_reads) != n * cfg.noise_rate_hz:
        raise SampleError(f"expected {n} noise reads, got {len(noise_reads)}")
    noise_mean = float(sum(noise_reads)) / len(noise_reads)
    noise_byte = min(140, max(0, _round_half_up(noise_mean)))

    state.detector.reset_interval()
    covered = 0
    for dur, dev in trace.sitting_segments(t0, t0 + n):
        state.detector.advance(dev, int(dur))
        covered += int(dur)
    if covered != n:
        raise SampleError(f"sitting segments cover {covered} s of a {n} s interval")
    occupied_s = state.detector.occupied_s_this_interval
    sitting_min = min(30, _round_half_up(occupied_s / 60.0))

    state.interval_noise.append(noise_byte)
    state.interval_sitting.append(sitting_min)

    if idx == cfg.gnss_interval_index:
        delay = float(trace.gnss_fix_delay_s(t0))
        if delay <= cfg.gnss_max_s:
            session_s = delay
            state.last_fix = GeoPosition(
                state.home.lat_e7, state.home.lon_e7,
                accuracy_dm=int(trace.gnss_accuracy_dm(t0)),
                fix_time_s=state.clock.unix_s() + int(round(delay)),
            )
            state.cycle_fix_ok = True
            state.log("gnss_fix", f"delay_s={delay:g}")
        else:
            session_s = float(cfg.gnss_max_s)
            state.cycle_timeout = True
            state.log("gnss_timeout", f"delay_s={delay:g}")
        state.energy_events.append(("gnss", float(t0), session_s))

    state.clock = state.clock.plus(n)
    return state


_TX_AIRTIME_S = airtime.time_on_air(airtime.RadioParams(), codec.FRAME_LEN).total_s


def run_cycle(state: NodeState, trace) -> tuple[NodeState, UplinkEnvelope]:
    """Run one full uplink cycle and emit the resulting envelope."""
    cfg = state.cfg
    state.cycle_fix_ok = False
    state.cycle_timeout = False
    for idx in range(1, cfg.intervals_per_cycle + 1):
        run_interval(state, trace, idx)
    t_end = state.clock.t_s

    temp_c = float(trace.temperature_c(t_end))
    hum_rh = float(trace.humidity_rh(t_end))

    # charge this cycle's consumption before reporting the battery level
    gnss_s = sum(d for task, s, d in state.energy_events
                 if task == "gnss" and s >= t_end - cfg.cycle_s)
    state.consumed_mwh += (
        state.profile.p_background_mw * cfg.cycle_s / 3600.0
        + state.profile.p_gnss_mw * gnss_s / 3600.0
        + state.profile.e_uplink_mwh
    )
    frac_left = 1.0 - state.consumed_mwh / state.battery.usable_energy_mwh
    state.battery_pct = min(100, max(0, _round_half_up(100.0 * frac_left)))

    debug = 0
    if state.cycle_fix_ok:
        debug |= codec.DEBUG_FIX_OK
    if state.cycle_timeout:
        debug |= codec.DEBUG_FIX_TIMEOUT
    if state.battery_pct <= 10:
        debug |= codec.DEBUG_BATTERY_LOW

    frame = codec.SensorFrame(
        position=state.last_fix,
        battery_pct=state.battery_pct,
        temperature_centi_c=_round_half_up(temp_c * 100.0) if temp_c >= 0
        else -_round_half_up(-temp_c * 100.0),
        humidity_centi_rh=min(10000, max(0, _round_half_up(hum_rh * 100.0))),
        sitting_min=tuple(state.interval_sitting),
        noise_db=tuple(state.interval_noise),
        debug=debug,
    )
    envelope = UplinkEnvelope(
        dev_eui=state.identity.dev_eui,
        fcnt=state.frame_counter,
        port=state.port,
        payload_hex=codec.frame_to_hex(frame),
        rssi_dbm=state.rng.randint(-119, -75),
        snr_db=round(state.rng.uniform(-13.0, 8.0), 1),
        received_at=state.clock.utc(),
    )
    state.energy_events.append(("lora", t_end - _TX_AIRTIME_S, _TX_AIRTIME_S))
    state.log("uplink", f"fcnt={state.frame_counter}")
    state.frame_counter += 1
    state.interval_sitting = []
    state.interval_noise = []
    return state, envelope


@dataclass
class NodeRun:
    """Everything one simulated node produced."""

    envelopes: list[UplinkEnvelope]
    energy_events: list[tuple[str, float, float]]
    events: list[EventRecord]
    state: NodeState
    span_s: int


def make_node_state(identity: NodeIdentity, home: GeoPosition, seed: int = 0,
                    epoch_utc: datetime = DEFAULT_EPOCH,
                    cfg: ScheduleConfig | None = None,
                    detector: OccupancyDetector | None = None,
                    profile: PowerProfile | None = None,
                    battery: BatteryModel | None = None) -> NodeState:
    return NodeState(
        identity=identity,
        home=home,
        clock=SimTime(0, epoch_utc),
        cfg=cfg or ScheduleConfig(),
        detector=detector or OccupancyDetector(),
        profile=profile or PowerProfile(),
        battery=battery or BatteryModel(),
        rng=random.Random(f"{seed}:{identity.dev_eui}"),
    )


def run_node(cfg: ScheduleConfig, trace, duration_s: int, seed: int = 0, *,
             identity: NodeIdentity | None = None,
             home: GeoPosition | None = None,
             epoch_utc: datetime = DEFAULT_EPOCH,
             detector: OccupancyDetector | None = None,
             profile: PowerProfile | None = None,
             battery: BatteryModel | None = None) -> NodeRun:
    """Simulate one node for ``duration_s`` seconds (multiple of interval_s).

    Whole cycles emit envelopes; a trailing partial cycle runs its intervals
    but transmits nothing. Fully deterministic for a given seed and trace.
    """
    if duration_s % cfg.interval_s != 0:
        raise ScheduleError("duration_s must be a multiple of interval_s")
    identity = identity or NodeIdentity("70b3d57ed0000001", "node")
    home = home or GeoPosition.no_fix()
    state = make_node_state(identity, home, seed, epoch_utc, cfg,
                            detector, profile, battery)
    envelopes: list[UplinkEnvelope] = []
    n_cycles, leftover_intervals = divmod(duration_s, cfg.cycle_s)
    for _ in range(n_cycles):
        state, env = run_cycle(state, trace)
        envelopes.append(env)
    for idx in range(1, leftover_intervals // cfg.interval_s + 1):
        run_interval(state, trace, idx)
    return NodeRun(envelopes, state.energy_events, state.events, state, duration_s)
