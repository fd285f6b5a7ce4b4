import json
from pathlib import Path

import pytest

from urbansense.cli import main

REPO = Path(__file__).resolve().parent.parent
SMOKE = str(REPO / "scenarios" / "smoke.json")


@pytest.fixture(scope="module")
def sim_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("simout")
    code = main(["sim", "--scenario", SMOKE, "--out", str(out)])
    assert code == 0
    return out


class TestSim:
    def test_artifacts_written(self, sim_dir):
        for name in ("store.sqlite", "export.csv", "envelopes.jsonl",
                     "events.jsonl", "energy_report.csv", "reference.csv",
                     "summary.json"):
            assert (sim_dir / name).exists(), name
        figures = sim_dir / "figures"
        for name in ("temperature.png", "scatter.png", "profile.png",
                     "daily.png"):
            assert (figures / name).exists(), name
            assert (figures / name.replace(".png", ".csv")).exists(), name

    def test_summary_counts(self, sim_dir):
        summary = json.loads((sim_dir / "summary.json").read_text())
        assert summary["nodes"] == 2
        assert summary["frames_emitted"] == 2 * 3 * 12
        assert summary["frames_stored"] == summary["frames_delivered"]

    def test_rerun_is_byte_identical(self, sim_dir, tmp_path):
        code = main(["sim", "--scenario", SMOKE, "--out", str(tmp_path),
                     "--no-figures"])
        assert code == 0
        assert (tmp_path / "export.csv").read_bytes() == \
            (sim_dir / "export.csv").read_bytes()
        assert (tmp_path / "envelopes.jsonl").read_bytes() == \
            (sim_dir / "envelopes.jsonl").read_bytes()

    def test_missing_scenario_exit_2(self, tmp_path, capsys):
        code = main(["sim", "--scenario", str(tmp_path / "missing.json"),
                     "--out", str(tmp_path)])
        assert code == 2
        assert "missing.json" in capsys.readouterr().err

    def test_invalid_scenario_names_field(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        data = json.loads(Path(SMOKE).read_text())
        del data["nodes"][0]["lat"]
        bad.write_text(json.dumps(data))
        code = main(["sim", "--scenario", str(bad), "--out", str(tmp_path)])
        assert code == 2
        assert "nodes[0].lat" in capsys.readouterr().err

    def test_json_summary(self, tmp_path, capsys):
        code = main(["sim", "--scenario", SMOKE, "--out", str(tmp_path),
                     "--no-figures", "--json"])
        assert code == 0
        out = capsys.readouterr().out
        assert json.loads(out)["frames_emitted"] == 72


class TestAirtime:
    def test_default_prints_ms_with_3_decimals(self, capsys):
        assert main(["airtime"]) == 0
        lines = {line.split(":")[0]: line
                 for line in capsys.readouterr().out.splitlines() if ":" in line}
        assert "1245.184 ms" in lines["payload"]
        assert "1646.592 ms" in lines["total"]
        assert "401.408 ms" in lines["preamble"]

    def test_sf7_mac_payload(self, capsys):
        assert main(["airtime", "--sf", "7", "--payload-len", "42"]) == 0
        assert "74.752 ms" in capsys.readouterr().out

    def test_json_output(self, capsys):
        assert main(["airtime", "--json"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["symbols"] == 38
        assert data["payload_ms"] == 1245.184

    def test_bad_sf_exits_1(self, capsys):
        assert main(["airtime", "--sf", "6"]) == 1
        assert "sf" in capsys.readouterr().err


class TestEnergy:
    def test_total_close_to_reference(self, capsys):
        assert main(["energy", "--json"]) == 0
        data = json.loads(capsys.readouterr().out)
        total = data["per_task_mwh_per_day"]["total"]
        assert abs(total - 33.65) / 33.65 < 0.02
        assert 59 <= data["lifetime_days"] <= 63

    def test_table_output(self, capsys):
        assert main(["energy"]) == 0
        out = capsys.readouterr().out
        assert "background" in out and "gnss" in out and "lora" in out
        assert "lifetime" in out

    def test_csv_written(self, tmp_path, capsys):
        path = tmp_path / "energy.csv"
        assert main(["energy", "--csv", str(path)]) == 0
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "task,energy_mwh_per_day"
        assert len(lines) == 5

    def test_gnss_off(self, capsys):
        assert main(["energy", "--gnss-off", "--json"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["per_task_mwh_per_day"]["gnss"] == 0
        assert data["lifetime_days"] >= 150


class TestCodec:
    FRAME = {
        "header": 1, "debug": 1, "lat_e7": 473661230, "lon_e7": 85517310,
        "fix_time_s": 1700000000, "accuracy_dm": 25, "battery_pct": 87,
        "temperature_centi_c": 2150, "humidity_centi_rh": 5500,
        "sitting_min": [12, 0, 30, 5], "noise_db": [55, 60, 58, 52],
    }

    def test_encode_decode_round_trip(self, capsys):
        assert main(["codec", "encode", json.dumps(self.FRAME)]) == 0
        hex_out = capsys.readouterr().out.strip()
        assert len(hex_out) == 58
        assert main(["codec", "decode", hex_out]) == 0
        assert json.loads(capsys.readouterr().out) == self.FRAME

    def test_decode_zero_header_exits_1(self, capsys):
        assert main(["codec", "decode", "00" * 29]) == 1
        assert "layout" in capsys.readouterr().err

    def test_encode_invalid_json_exits_1(self, capsys):
        assert main(["codec", "encode", "{"]) == 1


class TestAnalyze:
    def test_rain(self, capsys):
        assert main(["analyze", "rain", "--humidity-rh", "85"]) == 0
        assert capsys.readouterr().out.strip() == "rain"
        assert main(["analyze", "rain", "--humidity-rh", "60",
                     "--json"]) == 0
        assert json.loads(capsys.readouterr().out)["rain"] is False

    def test_rain_requires_value(self, capsys):
        assert main(["analyze", "rain"]) == 2

    def test_scatter_requires_square(self, capsys):
        assert main(["analyze", "scatter"]) == 2

    def test_scatter_json(self, sim_dir, capsys):
        code = main(["analyze", "scatter", "--store",
                     str(sim_dir / "store.sqlite"), "--square", "M", "--json"])
        assert code == 0
        data = json.loads(capsys.readouterr().out)
        assert len(data["points"]) == 36 * 4

    def test_profile_csv_and_figure(self, sim_dir, tmp_path, capsys):
        code = main(["analyze", "profile", "--store",
                     str(sim_dir / "store.sqlite"), "--square", "M",
                     "--out", str(tmp_path)])
        assert code == 0
        assert (tmp_path / "profile.csv").exists()
        assert (tmp_path / "profile.png").exists()
        assert len((tmp_path / "profile.csv").read_text()
                   .strip().splitlines()) == 97

    def test_daily_json(self, sim_dir, capsys):
        code = main(["analyze", "daily", "--store",
                     str(sim_dir / "store.sqlite"), "--json"])
        assert code == 0
        rows = json.loads(capsys.readouterr().out)
        assert len(rows) == 3 * 2  # days x squares

    def test_sun_csv(self, sim_dir, tmp_path):
        code = main(["analyze", "sun", "--store",
                     str(sim_dir / "store.sqlite"), "--out", str(tmp_path),
                     "--no-figures"])
        assert code == 0
        lines = (tmp_path / "sun.csv").read_text().strip().splitlines()
        assert lines[0] == "dev_eui,date,label"
        assert len(lines) > 1

    def test_store_env_fallback(self, sim_dir, capsys, monkeypatch):
        monkeypatch.setenv("URBANSENSE_STORE", str(sim_dir / "store.sqlite"))
        assert main(["analyze", "daily", "--json"]) == 0

    def test_missing_store_exit_2(self, tmp_path, capsys, monkeypatch):
        monkeypatch.delenv("URBANSENSE_STORE", raising=False)
        with pytest.raises(SystemExit):
            main(["analyze", "daily", "--json"])


class TestServeArgs:
    def test_bad_bind_exit_2(self, capsys, monkeypatch, tmp_path):
        monkeypatch.setenv("URBANSENSE_STORE", str(tmp_path / "s.sqlite"))
        assert main(["serve", "--bind", "nonsense"]) == 2
