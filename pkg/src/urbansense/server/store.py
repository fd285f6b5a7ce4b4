"""Embedded durable measurement store (SQLite) with query, export, import.

One frame row per accepted uplink, keyed by (dev_eui, fcnt) so replayed
deliveries are idempotent. Devices auto-register on first uplink; squares
are registered from the scenario (or via the API) and drive geofence
assignment of devices.
"""

from __future__ import annotations

import csv
import io
import json
import sqlite3
import threading
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from pathlib import Path
from typing import Iterable, Iterator

from .. import codec
from ..envelope import UplinkEnvelope
from ..model import (NO_FIX, GeoPosition, SquareDefinition, parse_rfc3339,
                     point_in_square, rfc3339)

DEFAULT_INTERVAL_S = 1800

EXPORT_COLUMNS = [
    "dev_eui", "square_id", "received_at", "interval_start", "sitting_min",
    "noise_db", "temperature_c", "humidity_rh", "battery_pct", "lat", "lon",
    "accuracy_m", "fcnt",
]


class NotFound(LookupError):
    """Unknown device or square."""


class IngestError(ValueError):
    """Envelope rejected at ingestion (payload undecodable)."""

    def __init__(self, reason: str, detail: str):
        super().__init__(f"{reason}: {detail}")
        self.reason = reason
        self.detail = detail


@dataclass(frozen=True)
class IntervalSlice:
    """One 30-minute slice of a frame: its start and the two aggregates."""

    start: datetime
    sitting_min: int | None
    noise_db: int | None


@dataclass(frozen=True)
class MeasurementRecord:
    """A persisted, decoded, square-assigned uplink."""

    dev_eui: str
    fcnt: int
    received_at: datetime
    square_id: str | None
    header: int
    debug: int
    lat_e7: int
    lon_e7: int
    accuracy_dm: int
    fix_time_s: int
    battery_pct: int
    temperature_centi_c: int
    humidity_centi_rh: int
    sitting_min: tuple[int, int, int, int]
    noise_db: tuple[int, int, int, int]
    interval_s: int = DEFAULT_INTERVAL_S

    @property
    def has_fix(self) -> bool:
        return self.accuracy_dm != NO_FIX

    @property
    def temperature_c(self) -> float:
        return self.temperature_centi_c / 100.0

    @property
    def humidity_rh(self) -> float:
        return self.humidity_centi_rh / 100.0

    def intervals(self) -> list[IntervalSlice]:
        n = len(self.sitting_min)
        out = []
        for i in range(n):
            start = self.received_at - timedelta(seconds=(n - i) * self.interval_s)
            sit = self.sitting_min[i]
            noi = self.noise_db[i]
            out.append(IntervalSlice(
                start,
                None if sit == codec.INVALID_BYTE else sit,
                None if noi == codec.INVALID_BYTE else noi,
            ))
        return out

    def to_json_dict(self) -> dict:
        return {
            "dev_eui": self.dev_eui,
            "fcnt": self.fcnt,
            "received_at": rfc3339(self.received_at),
            "square_id": self.square_id,
            "battery_pct": None if self.battery_pct == codec.INVALID_BYTE
            else self.battery_pct,
            "temperature_c": self.temperature_c,
            "humidity_rh": self.humidity_rh,
            "lat": self.lat_e7 / 1e7 if self.has_fix else None,
            "lon": self.lon_e7 / 1e7 if self.has_fix else None,
            "accuracy_m": self.accuracy_dm / 10.0 if self.has_fix else None,
            "fix_time_s": self.fix_time_s,
            "debug": self.debug,
            "intervals": [{
                "start": rfc3339(s.start),
                "sitting_min": s.sitting_min,
                "noise_db": s.noise_db,
            } for s in self.intervals()],
        }

    def export_rows(self) -> list[list[str]]:
        """The four CSV rows of this record, in interval order."""
        if self.has_fix:
            lat = "%.7f" % (self.lat_e7 / 1e7)
            lon = "%.7f" % (self.lon_e7 / 1e7)
            acc = "%.1f" % (self.accuracy_dm / 10.0)
        else:
            lat = lon = acc = ""
        batt = "" if self.battery_pct == codec.INVALID_BYTE else str(self.battery_pct)
        rows = []
        for s in self.intervals():
            rows.append([
                self.dev_eui,
                self.square_id or "",
                rfc3339(self.received_at),
                rfc3339(s.start),
                "" if s.sitting_min is None else str(s.sitting_min),
                "" if s.noise_db is None else str(s.noise_db),
                "%.2f" % self.temperature_c,
                "%.2f" % self.humidity_rh,
                batt,
                lat, lon, acc,
                str(self.fcnt),
            ])
        return rows


@dataclass(frozen=True)
class IngestResult:
    created: bool
    record: MeasurementRecord | None = None

    @property
    def status(self) -> str:
        return "created" if self.created else "duplicate"


@dataclass(frozen=True)
class DeviceInfo:
    dev_eui: str
    label: str
    square_id: str | None
    last_seen: datetime | None
    battery_pct: int | None
    unlocated: bool


_SCHEMA = """
CREATE TABLE IF NOT EXISTS meta (key TEXT PRIMARY KEY, value TEXT);
CREATE TABLE IF NOT EXISTS devices (
    dev_eui TEXT PRIMARY KEY,
    label TEXT NOT NULL DEFAULT '',
    square_id TEXT,
    last_seen TEXT,
    battery_pct INTEGER,
    unlocated INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS squares (
    id TEXT PRIMARY KEY,
    name TEXT NOT NULL,
    boundary TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS frames (
    dev_eui TEXT NOT NULL,
    fcnt INTEGER NOT NULL,
    received_at TEXT NOT NULL,
    square_id TEXT,
    header INTEGER NOT NULL,
    debug INTEGER NOT NULL,
    lat_e7 INTEGER NOT NULL,
    lon_e7 INTEGER NOT NULL,
    accuracy_dm INTEGER NOT NULL,
    fix_time_s INTEGER NOT NULL,
    battery_pct INTEGER NOT NULL,
    temperature_centi_c INTEGER NOT NULL,
    humidity_centi_rh INTEGER NOT NULL,
    s0 INTEGER NOT NULL, s1 INTEGER NOT NULL,
    s2 INTEGER NOT NULL, s3 INTEGER NOT NULL,
    n0 INTEGER NOT NULL, n1 INTEGER NOT NULL,
    n2 INTEGER NOT NULL, n3 INTEGER NOT NULL,
    PRIMARY KEY (dev_eui, fcnt)
);
CREATE INDEX IF NOT EXISTS idx_frames_time ON frames (received_at, dev_eui, fcnt);
CREATE TABLE IF NOT EXISTS reference (
    ts TEXT PRIMARY KEY,
    temperature_c REAL NOT NULL,
    rain INTEGER NOT NULL
);
"""


class MeasurementStore:
    """SQLite-backed store. Writes are serialized by a process-wide lock;
    per-device frame ordering follows from the single writer."""

    def __init__(self, path: str | Path = ":memory:",
                 interval_s: int = DEFAULT_INTERVAL_S):
        self._con = sqlite3.connect(str(path), check_same_thread=False)
        self._con.execute("PRAGMA journal_mode=WAL")
        self._lock = threading.RLock()
        with self._con:
            self._con.executescript(_SCHEMA)
            row = self._con.execute(
                "SELECT value FROM meta WHERE key='interval_s'").fetchone()
            if row is None:
                self._con.execute(
                    "INSERT INTO meta VALUES ('interval_s', ?)", (str(interval_s),))
                self.interval_s = interval_s
            else:
                self.interval_s = int(row[0])
        self._squares_cache: list[SquareDefinition] | None = None

    def close(self) -> None:
        self._con.close()

    # -- squares -------------------------------------------------------------

    def register_square(self, sq: SquareDefinition) -> None:
        boundary = json.dumps([[v.lat_e7, v.lon_e7] for v in sq.boundary])
        with self._lock, self._con:
            self._con.execute(
                "INSERT OR REPLACE INTO squares VALUES (?,?,?)",
                (sq.id, sq.name, boundary))
        self._squares_cache = None

    def squares(self) -> list[SquareDefinition]:
        if self._squares_cache is None:
            rows = self._con.execute(
                "SELECT id, name, boundary FROM squares ORDER BY id").fetchall()
            out = []
            for sid, name, boundary in rows:
                verts = tuple(GeoPosition(lat, lon, accuracy_dm=0)
                              for lat, lon in json.loads(boundary))
                out.append(SquareDefinition(sid, name, verts))
            self._squares_cache = out
        return self._squares_cache

    def square_ids(self) -> list[str]:
        return [sq.id for sq in self.squares()]

    # -- devices -------------------------------------------------------------

    def devices(self) -> list[DeviceInfo]:
        rows = self._con.execute(
            "SELECT dev_eui, label, square_id, last_seen, battery_pct, unlocated"
            " FROM devices ORDER BY dev_eui").fetchall()
        return [DeviceInfo(r[0], r[1], r[2],
                           parse_rfc3339(r[3]) if r[3] else None,
                           r[4], bool(r[5]))
                for r in rows]

    def assign_square(self, dev_eui: str, fix: GeoPosition) -> str | None:
        """Geofence assignment: first square (by id) containing the fix."""
        assigned = None
        for sq in self.squares():
            if point_in_square(fix, sq):
                assigned = sq.id
                break
        with self._lock, self._con:
            self._con.execute(
                "UPDATE devices SET square_id=COALESCE(?, square_id),"
                " unlocated=? WHERE dev_eui=?",
                (assigned, 1 if assigned is None else 0, dev_eui))
        return assigned

    # -- ingestion -----------------------------------------------------------

    def ingest(self, env: UplinkEnvelope) -> IngestResult:
        """Decode, persist, and geofence one uplink; duplicates are no-ops."""
        try:
            frame = codec.frame_from_hex(env.payload_hex)
        except codec.CodecError as e:
            raise IngestError(type(e).__name__, str(e)) from e
        with self._lock:
            with self._con:
                dup = self._con.execute(
                    "SELECT 1 FROM frames WHERE dev_eui=? AND fcnt=?",
                    (env.dev_eui, env.fcnt)).fetchone()
                if dup:
                    return IngestResult(created=False)
                known = self._con.execute(
                    "SELECT square_id FROM devices WHERE dev_eui=?",
                    (env.dev_eui,)).fetchone()
                if known is None:
                    self._con.execute(
                        "INSERT INTO devices (dev_eui) VALUES (?)", (env.dev_eui,))
                    current_square = None
                else:
                    current_square = known[0]
            if frame.position.has_fix:
                new_square = self.assign_square(env.dev_eui, frame.position)
                if new_square is not None:
                    current_square = new_square
            with self._con:
                received = rfc3339(env.received_at)
                self._con.execute(
                    "INSERT INTO frames VALUES (?,?,?,?,?,?,?,?,?,?,?,?,?,"
                    "?,?,?,?,?,?,?,?)",
                    (env.dev_eui, env.fcnt, received, current_square,
                     frame.header, frame.debug,
                     frame.position.lat_e7, frame.position.lon_e7,
                     frame.position.accuracy_dm, frame.position.fix_time_s,
                     frame.battery_pct, frame.temperature_centi_c,
                     frame.humidity_centi_rh, *frame.sitting_min, *frame.noise_db))
                self._con.execute(
                    "UPDATE devices SET last_seen=?, battery_pct=? WHERE dev_eui=?",
                    (received,
                     None if frame.battery_pct == codec.INVALID_BYTE
                     else frame.battery_pct,
                     env.dev_eui))
            return IngestResult(
                created=True, record=self._record_from_key(env.dev_eui, env.fcnt))

    def insert_record(self, rec: MeasurementRecord) -> bool:
        """Direct record insert (CSV import path). Returns False on duplicate."""
        with self._lock, self._con:
            dup = self._con.execute(
                "SELECT 1 FROM frames WHERE dev_eui=? AND fcnt=?",
                (rec.dev_eui, rec.fcnt)).fetchone()
            if dup:
                return False
            self._con.execute(
                "INSERT OR IGNORE INTO devices (dev_eui, square_id, last_seen,"
                " battery_pct) VALUES (?,?,?,?)",
                (rec.dev_eui, rec.square_id, rfc3339(rec.received_at),
                 None if rec.battery_pct == codec.INVALID_BYTE else rec.battery_pct))
            self._con.execute(
                "INSERT INTO frames VALUES (?,?,?,?,?,?,?,?,?,?,?,?,?,"
                "?,?,?,?,?,?,?,?)",
                (rec.dev_eui, rec.fcnt, rfc3339(rec.received_at), rec.square_id,
                 rec.header, rec.debug, rec.lat_e7, rec.lon_e7,
                 rec.accuracy_dm, rec.fix_time_s, rec.battery_pct,
                 rec.temperature_centi_c, rec.humidity_centi_rh,
                 *rec.sitting_min, *rec.noise_db))
        return True

    # -- queries -------------------------------------------------------------

    def _row_to_record(self, r) -> MeasurementRecord:
        return MeasurementRecord(
            dev_eui=r[0], fcnt=r[1], received_at=parse_rfc3339(r[2]),
            square_id=r[3], header=r[4], debug=r[5], lat_e7=r[6], lon_e7=r[7],
            accuracy_dm=r[8], fix_time_s=r[9], battery_pct=r[10],
            temperature_centi_c=r[11], humidity_centi_rh=r[12],
            sitting_min=(r[13], r[14], r[15], r[16]),
            noise_db=(r[17], r[18], r[19], r[20]),
            interval_s=self.interval_s,
        )

    _SELECT = ("SELECT dev_eui, fcnt, received_at, square_id, header, debug,"
               " lat_e7, lon_e7, accuracy_dm, fix_time_s, battery_pct,"
               " temperature_centi_c, humidity_centi_rh,"
               " s0, s1, s2, s3, n0, n1, n2, n3 FROM frames ")

    def _record_from_key(self, dev_eui: str, fcnt: int) -> MeasurementRecord | None:
        r = self._con.execute(
            self._SELECT + "WHERE dev_eui=? AND fcnt=?", (dev_eui, fcnt)).fetchone()
        return self._row_to_record(r) if r else None

    def frame_count(self) -> int:
        return self._con.execute("SELECT COUNT(*) FROM frames").fetchone()[0]

    def query_measurements(self, dev_eui: str | None = None,
                           square_id: str | None = None,
                           from_ts: datetime | None = None,
                           to_ts: datetime | None = None) -> list[MeasurementRecord]:
        """Records with received_at in [from, to), ascending, stable order."""
        if from_ts and to_ts and from_ts > to_ts:
            raise ValueError("from must be <= to")
        clauses, params = [], []
        if dev_eui is not None:
            if not self._con.execute("SELECT 1 FROM devices WHERE dev_eui=?",
                                     (dev_eui,)).fetchone():
                raise NotFound(f"unknown device {dev_eui!r}")
            clauses.append("dev_eui=?")
            params.append(dev_eui)
        if square_id is not None:
            if square_id not in self.square_ids():
                raise NotFound(f"unknown square {square_id!r}")
            clauses.append("square_id=?")
            params.append(square_id)
        if from_ts is not None:
            clauses.append("received_at>=?")
            params.append(rfc3339(from_ts))
        if to_ts is not None:
            clauses.append("received_at<?")
            params.append(rfc3339(to_ts))
        sql = self._SELECT
        if clauses:
            sql += "WHERE " + " AND ".join(clauses)
        sql += " ORDER BY received_at, dev_eui, fcnt"
        return [self._row_to_record(r) for r in self._con.execute(sql, params)]

    def square_day_summary(self, square_id: str, day: date) -> dict:
        """Per-day totals: sitting minutes, mean noise, min/max temperature."""
        if square_id not in self.square_ids():
            raise NotFound(f"unknown square {square_id!r}")
        recs = self.query_measurements(square_id=square_id)
        sitting = 0
        noises: list[int] = []
        temps: list[float] = []
        frames = 0
        for rec in recs:
            slices = rec.intervals()
            for s in slices:
                if s.start.date() != day:
                    continue
                if s.sitting_min is not None:
                    sitting += s.sitting_min
                if s.noise_db is not None:
                    noises.append(s.noise_db)
            if slices[-1].start.date() == day:
                temps.append(rec.temperature_c)
                frames += 1
        return {
            "square_id": square_id,
            "date": day.isoformat(),
            "frames": frames,
            "sitting_min_total": sitting,
            "noise_db_mean": round(sum(noises) / len(noises), 2) if noises else None,
            "temperature_c_min": min(temps) if temps else None,
            "temperature_c_max": max(temps) if temps else None,
        }

    # -- reference series ----------------------------------------------------

    def put_reference(self, timestamps: Iterable[datetime],
                      temperature_c: Iterable[float],
                      rain: Iterable[bool]) -> None:
        with self._lock, self._con:
            self._con.executemany(
                "INSERT OR REPLACE INTO reference VALUES (?,?,?)",
                [(rfc3339(ts), float(t), int(r))
                 for ts, t, r in zip(timestamps, temperature_c, rain)])

    def reference_rows(self) -> list[tuple[datetime, float, bool]]:
        rows = self._con.execute(
            "SELECT ts, temperature_c, rain FROM reference ORDER BY ts").fetchall()
        return [(parse_rfc3339(ts), t, bool(r)) for ts, t, r in rows]

    # -- export / import -----------------------------------------------------

    def export_csv_rows(self, from_ts: datetime | None = None,
                        to_ts: datetime | None = None) -> Iterator[list[str]]:
        yield list(EXPORT_COLUMNS)
        for rec in self.query_measurements(from_ts=from_ts, to_ts=to_ts):
            yield from rec.export_rows()

    def export_csv(self, from_ts: datetime | None = None,
                   to_ts: datetime | None = None) -> bytes:
        """RFC4180 CSV, one row per (frame, interval), UTF-8."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        for row in self.export_csv_rows(from_ts, to_ts):
            writer.writerow(row)
        return buf.getvalue().encode("utf-8")

    def import_csv(self, data: bytes | str) -> int:
        """Load an export back in; returns the number of frames created."""
        text = data.decode("utf-8") if isinstance(data, bytes) else data
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header != EXPORT_COLUMNS:
            raise ValueError("unrecognized CSV header")
        groups: dict[tuple[str, int], list[list[str]]] = {}
        order: list[tuple[str, int]] = []
        for row in reader:
            key = (row[0], int(row[12]))
            if key not in groups:
                order.append(key)
            groups.setdefault(key, []).append(row)
        created = 0
        for key in order:
            rows = groups[key]
            if len(rows) != 4:
                raise ValueError(f"frame {key} has {len(rows)} rows, expected 4")
            rows.sort(key=lambda r: r[3])
            first = rows[0]
            if first[9]:
                lat_e7 = round(float(first[9]) * 1e7)
                lon_e7 = round(float(first[10]) * 1e7)
                accuracy_dm = round(float(first[11]) * 10)
            else:
                lat_e7 = lon_e7 = 0
                accuracy_dm = NO_FIX
            rec = MeasurementRecord(
                dev_eui=first[0],
                fcnt=key[1],
                received_at=parse_rfc3339(first[2]),
                square_id=first[1] or None,
                header=codec.HEADER_V1,
                debug=0,
                lat_e7=lat_e7, lon_e7=lon_e7, accuracy_dm=accuracy_dm,
                fix_time_s=0,
                battery_pct=int(first[8]) if first[8] else codec.INVALID_BYTE,
                temperature_centi_c=round(float(first[6]) * 100),
                humidity_centi_rh=round(float(first[7]) * 100),
                sitting_min=tuple(int(r[4]) if r[4] else codec.INVALID_BYTE
                                  for r in rows),
                noise_db=tuple(int(r[5]) if r[5] else codec.INVALID_BYTE
                               for r in rows),
                interval_s=self.interval_s,
            )
            if self.insert_record(rec):
                created += 1
        return created
