from datetime import timedelta

import pytest
from fastapi.testclient import TestClient

from urbansense import codec
from urbansense.model import GeoPosition, SquareDefinition, parse_rfc3339
from urbansense.server.api import create_app
from urbansense.server.store import MeasurementStore

T0 = parse_rfc3339("2022-06-06T02:00:00Z")

SQ_M = SquareDefinition("M", "market", (
    GeoPosition(473_700_000, 85_400_000, 0),
    GeoPosition(473_700_000, 85_410_000, 0),
    GeoPosition(473_710_000, 85_410_000, 0),
    GeoPosition(473_710_000, 85_400_000, 0),
))


def payload_hex(temp=2150, hum=5500, sitting=(5, 0, 12, 3)):
    frame = codec.SensorFrame(
        position=GeoPosition(473_705_000, 85_405_000, 30, 1654480800),
        battery_pct=93, temperature_centi_c=temp, humidity_centi_rh=hum,
        sitting_min=sitting, noise_db=(50, 52, 55, 51), debug=1)
    return codec.frame_to_hex(frame)


def uplink_body(fcnt=0, at=T0, payload=None):
    return {
        "dev_eui": "70b3d57ed0aa0001",
        "fcnt": fcnt,
        "port": 2,
        "payload_hex": payload or payload_hex(),
        "rssi_dbm": -101,
        "snr_db": -3.5,
        "received_at": at.strftime("%Y-%m-%dT%H:%M:%SZ"),
    }


@pytest.fixture
def client():
    store = MeasurementStore()
    store.register_square(SQ_M)
    with TestClient(create_app(store)) as c:
        c.app_store = store
        yield c
    store.close()


class TestUplinks:
    def test_created_then_duplicate(self, client):
        r1 = client.post("/api/v1/uplinks", json=uplink_body())
        assert r1.status_code == 201
        assert r1.json()["status"] == "created"
        r2 = client.post("/api/v1/uplinks", json=uplink_body())
        assert r2.status_code == 200
        assert r2.json()["status"] == "duplicate"

    def test_undecodable_payload_422_with_detail(self, client):
        r = client.post("/api/v1/uplinks",
                        json=uplink_body(payload="00" * 28))
        assert r.status_code == 422
        body = r.json()
        assert body["error"] == "LengthError"
        assert "28" in body["detail"]

    def test_unknown_layout_422(self, client):
        raw = bytearray(bytes.fromhex(payload_hex()))
        raw[0] = 0x07
        r = client.post("/api/v1/uplinks",
                        json=uplink_body(payload=bytes(raw).hex()))
        assert r.status_code == 422
        assert r.json()["error"] == "UnknownLayoutError"

    def test_malformed_json_400(self, client):
        r = client.post("/api/v1/uplinks", content=b"{not json",
                        headers={"content-type": "application/json"})
        assert r.status_code == 400
        assert "detail" in r.json()

    def test_schema_violation_422(self, client):
        body = uplink_body()
        del body["fcnt"]
        r = client.post("/api/v1/uplinks", json=body)
        assert r.status_code == 422


class TestDevices:
    def test_listing_after_ingest(self, client):
        client.post("/api/v1/uplinks", json=uplink_body())
        devices = client.get("/api/v1/devices").json()
        assert len(devices) == 1
        d = devices[0]
        assert d["dev_eui"] == "70b3d57ed0aa0001"
        assert d["square_id"] == "M"
        assert d["battery_pct"] == 93
        assert d["last_seen"] == "2022-06-06T02:00:00Z"

    def test_measurements_endpoint(self, client):
        for i in range(5):
            client.post("/api/v1/uplinks",
                        json=uplink_body(fcnt=i, at=T0 + timedelta(hours=2 * i)))
        r = client.get("/api/v1/devices/70b3d57ed0aa0001/measurements",
                       params={"from": "2022-06-06T04:00:00Z",
                               "to": "2022-06-06T08:00:00Z"})
        assert r.status_code == 200
        rows = r.json()
        assert [row["fcnt"] for row in rows] == [1, 2]
        assert rows[0]["temperature_c"] == 21.5
        assert len(rows[0]["intervals"]) == 4

    def test_unknown_device_404(self, client):
        r = client.get("/api/v1/devices/00000000000000ff/measurements")
        assert r.status_code == 404


class TestSquaresAndExport:
    def test_summary(self, client):
        client.post("/api/v1/uplinks", json=uplink_body())
        r = client.get("/api/v1/squares/M/summary",
                       params={"date": "2022-06-06"})
        assert r.status_code == 200
        assert r.json()["sitting_min_total"] == 20

    def test_summary_unknown_square(self, client):
        r = client.get("/api/v1/squares/Z/summary",
                       params={"date": "2022-06-06"})
        assert r.status_code == 404

    def test_export_empty_store_header_only(self, client):
        r = client.get("/api/v1/export.csv")
        assert r.status_code == 200
        assert r.headers["content-type"].startswith("text/csv")
        assert r.text.strip().splitlines() == [
            "dev_eui,square_id,received_at,interval_start,sitting_min,"
            "noise_db,temperature_c,humidity_rh,battery_pct,lat,lon,"
            "accuracy_m,fcnt"]

    def test_export_matches_store(self, client):
        client.post("/api/v1/uplinks", json=uplink_body())
        r = client.get("/api/v1/export.csv")
        assert r.content == client.app_store.export_csv()


class TestAnalyticsEndpoints:
    def seed(self, client, n=6):
        for i in range(n):
            client.post("/api/v1/uplinks",
                        json=uplink_body(fcnt=i, at=T0 + timedelta(hours=2 * i)))
        store = client.app_store
        times = [T0 + timedelta(hours=h) - timedelta(hours=2) for h in range(24)]
        store.put_reference(times, [20.0] * len(times), [False] * len(times))

    def test_rain(self, client):
        assert client.get("/api/v1/analytics/rain",
                          params={"humidity_rh": 85}).json()["rain"] is True
        assert client.get("/api/v1/analytics/rain",
                          params={"humidity_rh": 79.99}).json()["rain"] is False
        assert client.get("/api/v1/analytics/rain",
                          params={"humidity_rh": 140}).status_code == 400

    def test_scatter(self, client):
        self.seed(client)
        r = client.get("/api/v1/analytics/scatter", params={"square_id": "M"})
        assert r.status_code == 200
        body = r.json()
        assert len(body["points"]) == 6 * 4
        assert sum(body["quadrants"].values()) == 24

    def test_profile(self, client):
        self.seed(client)
        r = client.get("/api/v1/analytics/profile", params={"square_id": "M"})
        body = r.json()
        assert len(body["weekday"]) == 96 and len(body["weekend"]) == 96

    def test_daily(self, client):
        self.seed(client)
        r = client.get("/api/v1/analytics/daily")
        assert r.status_code == 200
        assert any(row["total_sitting_min"] > 0 for row in r.json())

    def test_sun(self, client):
        self.seed(client, n=12)
        r = client.get("/api/v1/analytics/sun")
        assert r.status_code == 200
        rows = r.json()
        assert rows and all(row["label"] in ("sun", "shade") for row in rows)

    def test_analytics_unknown_square_404(self, client):
        assert client.get("/api/v1/analytics/scatter",
                          params={"square_id": "Z"}).status_code == 404
