import random
from datetime import date, timedelta

import pytest

from urbansense import analytics
from urbansense.analytics import (CoverageError, RangeError, ReferenceSeries,
                                  daily_sitting_vs_temperature, hourly_profile,
                                  occupancy_vs_humidity, rain_flag,
                                  sun_exposure_classify)
from urbansense.model import NO_FIX, parse_rfc3339
from urbansense.server.store import MeasurementRecord

MONDAY = parse_rfc3339("2022-06-06T00:00:00Z")


def record(received_at, square="M", sitting=(0, 0, 0, 0), noise=(50,) * 4,
           hum_crh=5000, temp_cc=2000, dev="70b3d57ed0aa0001", fcnt=0):
    return MeasurementRecord(
        dev_eui=dev, fcnt=fcnt, received_at=received_at, square_id=square,
        header=1, debug=0, lat_e7=0, lon_e7=0, accuracy_dm=NO_FIX,
        fix_time_s=0, battery_pct=90, temperature_centi_c=temp_cc,
        humidity_centi_rh=hum_crh, sitting_min=tuple(sitting),
        noise_db=tuple(noise))


def flat_reference(days=7, temp=25.0, period_s=600):
    times, temps, rain = [], [], []
    for k in range(days * 86400 // period_s):
        times.append(MONDAY + timedelta(seconds=k * period_s))
        temps.append(temp)
        rain.append(False)
    return ReferenceSeries(tuple(times), tuple(temps), tuple(rain))


class TestReferenceSeries:
    def test_timestamps_strictly_increasing(self):
        t = MONDAY
        with pytest.raises(ValueError):
            ReferenceSeries((t, t), (1.0, 2.0), (False, False))

    def test_daily_mean(self):
        ref = flat_reference(days=2, temp=20.0)
        means = ref.daily_mean_temp()
        assert means == {date(2022, 6, 6): 20.0, date(2022, 6, 7): 20.0}


class TestSunClassify:
    def samples(self, offset, day=0, temps=25.0):
        out = []
        for h in (10, 12, 14):
            ts = MONDAY + timedelta(days=day, hours=h)
            out.append((ts, temps + offset))
        return out

    def test_node_equal_to_ref_is_shade(self):
        labels = sun_exposure_classify(self.samples(0.0), flat_reference())
        assert labels == {date(2022, 6, 6): "shade"}

    def test_hot_node_is_sun(self):
        labels = sun_exposure_classify(self.samples(16.0), flat_reference())
        assert labels == {date(2022, 6, 6): "sun"}

    def test_exact_delta_boundary_is_sun(self):
        labels = sun_exposure_classify(self.samples(5.0), flat_reference())
        assert labels[date(2022, 6, 6)] == "sun"

    def test_just_below_delta_is_shade(self):
        labels = sun_exposure_classify(self.samples(4.99), flat_reference())
        assert labels[date(2022, 6, 6)] == "shade"

    def test_constant_shift_invariance(self):
        ref = flat_reference()
        shifted = ReferenceSeries(ref.timestamps,
                                  tuple(t + 7.5 for t in ref.temperature_c),
                                  ref.rain)
        a = sun_exposure_classify(self.samples(6.0), ref)
        b = sun_exposure_classify(
            [(ts, v + 7.5) for ts, v in self.samples(6.0)], shifted)
        assert a == b

    def test_samples_outside_window_ignored(self):
        night = [(MONDAY + timedelta(hours=2), 60.0)]
        with pytest.raises(CoverageError):
            sun_exposure_classify(night, flat_reference())

    def test_uncovered_day_raises(self):
        with pytest.raises(CoverageError):
            sun_exposure_classify(self.samples(1.0, day=30), flat_reference())

    def test_multiple_days(self):
        series = self.samples(16.0, day=0) + self.samples(0.0, day=1)
        labels = sun_exposure_classify(series, flat_reference())
        assert labels[date(2022, 6, 6)] == "sun"
        assert labels[date(2022, 6, 7)] == "shade"


class TestRainFlag:
    def test_band(self):
        assert rain_flag(85.0) is True
        assert rain_flag(79.99) is False
        assert rain_flag(100.0) is True
        assert rain_flag(80.0) is True

    def test_out_of_range(self):
        with pytest.raises(RangeError):
            rain_flag(-0.1)
        with pytest.raises(RangeError):
            rain_flag(100.1)

    def test_monotone(self):
        values = [rain_flag(h / 10.0) for h in range(0, 1001)]
        assert values == sorted(values)


class TestScatter:
    def test_single_valid_interval_lower_left(self):
        rec = record(MONDAY + timedelta(hours=2), hum_crh=5000,
                     sitting=(10, 0xFF, 0xFF, 0xFF))
        res = occupancy_vs_humidity([rec], "M")
        assert res.points == ((50.0, 10),)
        assert res.quadrants == {"dry_low": 1, "dry_high": 0,
                                 "humid_low": 0, "humid_high": 0}

    def test_point_count_is_4x_frames(self):
        recs = [record(MONDAY + timedelta(hours=2 * (i + 1)), fcnt=i,
                       sitting=(1, 2, 3, 4)) for i in range(10)]
        res = occupancy_vs_humidity(recs, "M")
        assert len(res.points) == 40

    def test_other_square_excluded(self):
        recs = [record(MONDAY + timedelta(hours=2), square="V")]
        assert occupancy_vs_humidity(recs, "M").points == ()

    def test_quadrants_match_brute_force(self):
        rng = random.Random(5)
        recs = [record(MONDAY + timedelta(hours=2 * (i + 1)), fcnt=i,
                       hum_crh=rng.randint(0, 10000),
                       sitting=tuple(rng.randint(0, 30) for _ in range(4)))
                for i in range(50)]
        res = occupancy_vs_humidity(recs, "M")
        expect = {"dry_low": 0, "dry_high": 0, "humid_low": 0, "humid_high": 0}
        for rec in recs:
            for m in rec.sitting_min:
                key = ("humid" if rec.humidity_rh >= 80 else "dry") + "_" + \
                    ("high" if m >= 15 else "low")
                expect[key] += 1
        assert res.quadrants == expect
        assert sum(res.quadrants.values()) == len(res.points)


class TestHourlyProfile:
    def test_96_bins(self):
        prof = hourly_profile([], "M")
        assert len(prof.weekday) == len(prof.weekend) == 96

    def test_empty_input_zero_vectors(self):
        prof = hourly_profile([], "M")
        assert set(prof.weekday) == {0.0} and set(prof.weekend) == {0.0}

    def test_monday_lunch_mass_in_bins_48_49(self):
        # interval_start Monday 12:00 -> spans bins 48 and 49, scaled by 1/5
        rec = record(MONDAY + timedelta(hours=14), sitting=(30, 0, 0, 0))
        prof = hourly_profile([rec], "M")
        assert prof.weekday[48] == pytest.approx(15 / 5.0)
        assert prof.weekday[49] == pytest.approx(15 / 5.0)
        assert sum(prof.weekday) == pytest.approx(30 / 5.0)
        assert set(prof.weekend) == {0.0}

    def test_weekend_attribution_and_scaling(self):
        saturday = MONDAY + timedelta(days=5, hours=14)
        rec = record(saturday, sitting=(20, 0, 0, 0))
        prof = hourly_profile([rec], "M")
        assert set(prof.weekday) == {0.0}
        assert prof.weekend[48] == pytest.approx(10 / 2.0)

    def test_mass_conservation(self):
        rng = random.Random(17)
        recs = []
        for i in range(100):
            at = MONDAY + timedelta(hours=2 * (i + 1))
            recs.append(record(at, fcnt=i,
                               sitting=tuple(rng.randint(0, 30)
                                             for _ in range(4))))
        prof = hourly_profile(recs, "M")
        weekday_total, weekend_total = analytics.profile_mass_balance(prof)
        raw_weekday = raw_weekend = 0
        for rec in recs:
            for s in rec.intervals():
                if s.start.weekday() < 5:
                    raw_weekday += s.sitting_min
                else:
                    raw_weekend += s.sitting_min
        assert weekday_total == pytest.approx(raw_weekday)
        assert weekend_total == pytest.approx(raw_weekend)

    def test_bin_must_divide_day(self):
        with pytest.raises(ValueError):
            hourly_profile([], "M", bin_h=0.7)

    def test_coarse_bins_supported(self):
        rec = record(MONDAY + timedelta(hours=14), sitting=(30, 0, 0, 0))
        prof = hourly_profile([rec], "M", bin_h=1.0)
        assert len(prof.weekday) == 24
        assert prof.weekday[12] == pytest.approx(30 / 5.0)


class TestDailyUsage:
    def test_two_frames_sum(self):
        recs = [
            record(MONDAY + timedelta(hours=8), fcnt=0, sitting=(10, 0, 5, 0)),
            record(MONDAY + timedelta(hours=12), fcnt=1, sitting=(0, 0, 0, 15)),
        ]
        rows = daily_sitting_vs_temperature(recs, flat_reference(days=1))
        assert len(rows) == 1
        assert rows[0].total_sitting_min == 30
        assert rows[0].ref_mean_temp_c == pytest.approx(25.0)

    def test_zero_rows_for_covered_days_without_records(self):
        recs = [record(MONDAY + timedelta(hours=8))]
        rows = daily_sitting_vs_temperature(recs, flat_reference(days=3))
        assert [r.total_sitting_min for r in rows] == [0, 0, 0]
        assert [r.day for r in rows] == [date(2022, 6, 6), date(2022, 6, 7),
                                         date(2022, 6, 8)]

    def test_missing_ref_day_lists_dates(self):
        recs = [record(MONDAY + timedelta(days=9, hours=8),
                       sitting=(1, 0, 0, 0))]
        with pytest.raises(CoverageError) as exc:
            daily_sitting_vs_temperature(recs, flat_reference(days=3))
        assert "2022-06-15" in str(exc.value)

    def test_attribution_follows_interval_start_date(self):
        # frame received at 00:00 carries intervals from the previous day
        rec = record(MONDAY + timedelta(days=1), sitting=(5, 5, 5, 5))
        rows = daily_sitting_vs_temperature([rec], flat_reference(days=2))
        by_day = {r.day: r.total_sitting_min for r in rows}
        assert by_day[date(2022, 6, 6)] == 20
        assert by_day[date(2022, 6, 7)] == 0

    def test_profile_and_daily_ignore_unassigned(self):
        rec = record(MONDAY + timedelta(hours=8), square=None,
                     sitting=(9, 9, 9, 9))
        rows = daily_sitting_vs_temperature([rec], flat_reference(days=1))
        assert rows == []
