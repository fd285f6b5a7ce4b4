"""HTTP/JSON API over a measurement store, everything under /api/v1.

Ingestion returns 201 for new frames, 200 for replays of known
(dev_eui, fcnt) pairs, 422 with {error, detail} when the payload cannot be
decoded, and 400 for request bodies that are not valid JSON at all.
"""

from __future__ import annotations

from datetime import date, datetime

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, Field

from .. import analytics
from ..model import parse_rfc3339
from .store import IngestError, MeasurementStore, NotFound


class UplinkBody(BaseModel):
    dev_eui: str = Field(min_length=16, max_length=16)
    fcnt: int = Field(ge=0, lt=2 ** 32)
    port: int = Field(ge=1, le=223)
    payload_hex: str
    rssi_dbm: int
    snr_db: float
    received_at: datetime


def _parse_ts(value: str | None, name: str) -> datetime | None:
    if value is None:
        return None
    try:
        return parse_rfc3339(value)
    except ValueError as e:
        raise _HTTPError(400, "bad_timestamp", f"{name}: {e}")


class _HTTPError(Exception):
    def __init__(self, status: int, error: str, detail: str):
        self.status = status
        self.error = error
        self.detail = detail


def _reference(store: MeasurementStore) -> analytics.ReferenceSeries:
    rows = store.reference_rows()
    if not rows:
        raise _HTTPError(404, "no_reference",
                         "store holds no reference series")
    return analytics.ReferenceSeries(tuple(r[0] for r in rows),
                                     tuple(r[1] for r in rows),
                                     tuple(r[2] for r in rows))


def create_app(store: MeasurementStore) -> FastAPI:
    app = FastAPI(title="urbansense", docs_url=None, redoc_url=None)

    @app.exception_handler(_HTTPError)
    async def on_http_error(_req: Request, exc: _HTTPError):
        return JSONResponse(status_code=exc.status,
                            content={"error": exc.error, "detail": exc.detail})

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(_req: Request, exc: RequestValidationError):
        errors = exc.errors()
        malformed = any(e.get("type") == "json_invalid" for e in errors)
        status = 400 if malformed else 422
        detail = "; ".join(
            f"{'.'.join(str(p) for p in e.get('loc', ()))}: {e.get('msg')}"
            for e in errors)
        return JSONResponse(status_code=status,
                            content={"error": "invalid_request", "detail": detail})

    @app.post("/api/v1/uplinks")
    def post_uplink(body: UplinkBody):
        from ..envelope import UplinkEnvelope
        received = body.received_at
        if received.tzinfo is None:
            raise _HTTPError(422, "invalid_request",
                             "received_at must carry a timezone")
        try:
            env = UplinkEnvelope(
                dev_eui=body.dev_eui, fcnt=body.fcnt, port=body.port,
                payload_hex=body.payload_hex, rssi_dbm=body.rssi_dbm,
                snr_db=body.snr_db, received_at=received)
        except ValueError as e:
            raise _HTTPError(422, "invalid_envelope", str(e))
        try:
            result = store.ingest(env)
        except IngestError as e:
            raise _HTTPError(422, e.reason, e.detail)
        status = 201 if result.created else 200
        return JSONResponse(status_code=status,
                            content={"status": result.status,
                                     "dev_eui": env.dev_eui,
                                     "fcnt": env.fcnt})

    @app.get("/api/v1/devices")
    def get_devices():
        from ..model import rfc3339
        return [{
            "dev_eui": d.dev_eui,
            "label": d.label,
            "square_id": d.square_id,
            "last_seen": rfc3339(d.last_seen) if d.last_seen else None,
            "battery_pct": d.battery_pct,
            "unlocated": d.unlocated,
        } for d in store.devices()]

    @app.get("/api/v1/devices/{eui}/measurements")
    def get_measurements(eui: str, from_: str | None = Query(None, alias="from"),
                         to: str | None = None):
        try:
            recs = store.query_measurements(
                dev_eui=eui.lower(),
                from_ts=_parse_ts(from_, "from"), to_ts=_parse_ts(to, "to"))
        except NotFound as e:
            raise _HTTPError(404, "not_found", str(e))
        except ValueError as e:
            raise _HTTPError(400, "bad_range", str(e))
        return [r.to_json_dict() for r in recs]

    @app.get("/api/v1/squares/{square_id}/summary")
    def get_square_summary(square_id: str, date_: str = Query(alias="date")):
        try:
            day = date.fromisoformat(date_)
        except ValueError as e:
            raise _HTTPError(400, "bad_date", str(e))
        try:
            return store.square_day_summary(square_id, day)
        except NotFound as e:
            raise _HTTPError(404, "not_found", str(e))

    @app.get("/api/v1/export.csv")
    def get_export(from_: str | None = Query(None, alias="from"),
                   to: str | None = None):
        try:
            data = store.export_csv(from_ts=_parse_ts(from_, "from"),
                                    to_ts=_parse_ts(to, "to"))
        except ValueError as e:
            raise _HTTPError(400, "bad_range", str(e))
        return Response(content=data, media_type="text/csv; charset=utf-8")

    @app.get("/api/v1/analytics/rain")
    def get_rain(humidity_rh: float):
        try:
            return {"humidity_rh": humidity_rh,
                    "rain": analytics.rain_flag(humidity_rh)}
        except analytics.RangeError as e:
            raise _HTTPError(400, "out_of_range", str(e))

    @app.get("/api/v1/analytics/sun")
    def get_sun(dev_eui: str | None = None, delta_c: float = 5.0,
                window_from_h: float = 10.0, window_to_h: float = 16.0):
        ref = _reference(store)
        devices = [d for d in store.devices()
                   if dev_eui is None or d.dev_eui == dev_eui.lower()]
        if dev_eui is not None and not devices:
            raise _HTTPError(404, "not_found", f"unknown device {dev_eui!r}")
        out = []
        for dev in devices:
            recs = store.query_measurements(dev_eui=dev.dev_eui)
            series = [(r.received_at, r.temperature_c) for r in recs]
            try:
                labels = analytics.sun_exposure_classify(
                    series, ref, (window_from_h, window_to_h), delta_c)
            except analytics.CoverageError:
                continue
            out.extend({"dev_eui": dev.dev_eui, "date": d.isoformat(),
                        "label": label}
                       for d, label in sorted(labels.items()))
        return out

    @app.get("/api/v1/analytics/scatter")
    def get_scatter(square_id: str):
        if square_id not in store.square_ids():
            raise _HTTPError(404, "not_found", f"unknown square {square_id!r}")
        res = analytics.occupancy_vs_humidity(store.query_measurements(),
                                              square_id)
        return {"square_id": square_id,
                "points": [{"humidity_rh": h, "sitting_min": s}
                           for h, s in res.points],
                "quadrants": res.quadrants}

    @app.get("/api/v1/analytics/profile")
    def get_profile(square_id: str, bin_h: float = 0.25):
        if square_id not in store.square_ids():
            raise _HTTPError(404, "not_found", f"unknown square {square_id!r}")
        try:
            prof = analytics.hourly_profile(store.query_measurements(),
                                            square_id, bin_h)
        except ValueError as e:
            raise _HTTPError(400, "bad_bin", str(e))
        return {"square_id": square_id, "bin_h": prof.bin_h,
                "lunch_window_h": list(prof.lunch_window),
                "weekday": list(prof.weekday), "weekend": list(prof.weekend)}

    @app.get("/api/v1/analytics/daily")
    def get_daily(square_id: str | None = None):
        ref = _reference(store)
        squares = store.square_ids()
        if square_id is not None:
            if square_id not in squares:
                raise _HTTPError(404, "not_found",
                                 f"unknown square {square_id!r}")
            squares = [square_id]
        try:
            rows = analytics.daily_sitting_vs_temperature(
                store.query_measurements(), ref, squares=squares)
        except analytics.CoverageError as e:
            raise _HTTPError(409, "coverage", str(e))
        return [{"date": r.day.isoformat(), "square_id": r.square_id,
                 "total_sitting_min": r.total_sitting_min,
                 "ref_mean_temp_c": r.ref_mean_temp_c}
                for r in rows if square_id is None or r.square_id == square_id]

    return app
