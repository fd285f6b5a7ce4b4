import pytest

from urbansense.energy import (BatteryModel, DomainError, PowerProfile,
                               TraceError, daily_energy_mwh, energy_ledger,
                               lifetime_days)


class TestProfiles:
    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            PowerProfile(p_background_mw=-1.0)

    def test_calls_per_day_capped_by_cycle(self):
        with pytest.raises(DomainError):
            PowerProfile(gnss_calls_per_day=13)
        with pytest.raises(DomainError):
            PowerProfile(uplinks_per_day=-1)

    def test_battery_positive(self):
        with pytest.raises(DomainError):
            BatteryModel(usable_energy_mwh=0.0)


class TestDailyEnergy:
    def test_default_breakdown(self):
        de = daily_energy_mwh(PowerProfile())
        assert de.background_mwh == pytest.approx(9.36)
        assert de.gnss_mwh == pytest.approx(22.9)
        assert de.lora_mwh == pytest.approx(1.9104)
        assert de.total_mwh == pytest.approx(34.1704)

    def test_gnss_disabled_removes_exactly_the_gnss_term(self):
        p = PowerProfile()
        on = daily_energy_mwh(p, gnss_enabled=True)
        off = daily_energy_mwh(p, gnss_enabled=False)
        assert off.gnss_mwh == 0.0
        assert on.total_mwh - off.total_mwh == pytest.approx(on.gnss_mwh)
        assert off.background_mwh == on.background_mwh
        assert off.lora_mwh == on.lora_mwh


class TestLifetime:
    def test_reference_two_months(self):
        assert lifetime_days(BatteryModel(2053.0), 33.65) == pytest.approx(
            61.01, abs=0.01)

    def test_gnss_off_exceeds_five_months_floor(self):
        assert lifetime_days(BatteryModel(2053.0), 11.15) == pytest.approx(
            184.1, abs=0.1)

    def test_ratio_identity(self):
        for x in (0.5, 7.0, 341.0):
            assert lifetime_days(BatteryModel(x), x) == pytest.approx(1.0)

    def test_homogeneous_scaling(self):
        base = lifetime_days(BatteryModel(2053.0), 34.17)
        for k in (0.5, 3.0, 10.0):
            assert lifetime_days(BatteryModel(2053.0 * k), 34.17 * k) == \
                pytest.approx(base)

    def test_zero_daily_rejected(self):
        with pytest.raises(DomainError):
            lifetime_days(BatteryModel(), 0.0)


class TestLedger:
    def test_empty_trace_background_only(self):
        led = energy_ledger([], PowerProfile(), span_s=86_400)
        assert led.total_mwh == pytest.approx(9.36)
        assert led.gnss_mwh == 0.0 and led.lora_mwh == 0.0

    def test_single_gnss_session(self):
        led = energy_ledger([("gnss", 100.0, 300.0)], PowerProfile(),
                            span_s=86_400)
        assert led.gnss_mwh == pytest.approx(22.9 * 300 / 3600)
        assert led.total_mwh == pytest.approx(9.36 + 1.9083333, abs=1e-4)

    def test_lora_is_per_event(self):
        led = energy_ledger([("lora", 10.0, 1.6), ("lora", 7200.0, 1.6)],
                            PowerProfile(), span_s=86_400)
        assert led.lora_mwh == pytest.approx(2 * 0.1592)

    def test_negative_duration_rejected(self):
        with pytest.raises(TraceError):
            energy_ledger([("gnss", 0.0, -1.0)], PowerProfile(), 100.0)

    def test_overlapping_same_task_rejected(self):
        with pytest.raises(TraceError):
            energy_ledger([("gnss", 0.0, 100.0), ("gnss", 50.0, 10.0)],
                          PowerProfile(), 1000.0)

    def test_event_outside_span_rejected(self):
        with pytest.raises(TraceError):
            energy_ledger([("gnss", 86_300.0, 300.0)], PowerProfile(), 86_400)

    def test_tasks_may_interleave(self):
        led = energy_ledger([("gnss", 0.0, 300.0), ("lora", 100.0, 2.0)],
                            PowerProfile(), 1000.0)
        assert led.gnss_mwh > 0 and led.lora_mwh > 0

    def test_timeline_is_cumulative_and_ends_at_total(self):
        led = energy_ledger([("gnss", 1000.0, 300.0), ("lora", 7200.0, 1.6)],
                            PowerProfile(), span_s=86_400)
        values = [e for _, e in led.timeline]
        assert values == sorted(values)
        assert led.timeline[0][0] == 0.0
        assert led.timeline[-1][0] == 86_400
        assert led.timeline[-1][1] == pytest.approx(led.total_mwh)

    def test_full_day_matches_closed_form(self):
        # 12 cycles: one 300 s gnss session and one transmission each
        p = PowerProfile()
        events = []
        for c in range(12):
            t0 = c * 7200.0
            events.append(("gnss", t0 + 3600.0, 300.0))
            events.append(("lora", t0 + 7198.0, 1.65))
        led = energy_ledger(events, p, span_s=86_400)
        de = daily_energy_mwh(p)
        assert led.total_mwh == pytest.approx(de.total_mwh, rel=1e-3)
        assert led.background_mwh == pytest.approx(de.background_mwh)
        assert led.gnss_mwh == pytest.approx(de.gnss_mwh)
        assert led.lora_mwh == pytest.approx(de.lora_mwh)
