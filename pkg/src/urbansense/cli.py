"""Operator CLI: run simulations, serve the API, poke codec/airtime/energy,
and run analytics exports. Every command is a thin shell over the library."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import airtime, analytics, codec, energy
from .scenario import ScenarioError, load_scenario
from .server.store import MeasurementStore

STORE_ENV = "URBANSENSE_STORE"


def _store_path(args) -> str:
    path = getattr(args, "store", None) or os.environ.get(STORE_ENV)
    if not path:
        raise SystemExit(
            f"error: no store given (use --store or ${STORE_ENV})")
    return path


def _open_store(args) -> MeasurementStore:
    path = _store_path(args)
    if not Path(path).exists():
        print(f"error: store not found: {path}", file=sys.stderr)
        raise SystemExit(2)
    return MeasurementStore(path)


# -- sim -----------------------------------------------------------------------

def cmd_sim(args) -> int:
    from . import pipeline
    scenario_path = Path(args.scenario)
    if not scenario_path.exists():
        print(f"error: scenario file not found: {scenario_path}", file=sys.stderr)
        return 2
    try:
        scenario = load_scenario(scenario_path)
    except ScenarioError as e:
        print(f"error: invalid scenario: {e}", file=sys.stderr)
        return 2
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    store_file = out_dir / "store.sqlite"
    if store_file.exists():
        store_file.unlink()
    store = MeasurementStore(store_file)
    result = pipeline.simulate(scenario, store)
    written = pipeline.write_artifacts(result, store, out_dir,
                                       figures=not args.no_figures)
    summary = result.summary_dict()
    if args.json:
        print(json.dumps(summary, indent=2))
    else:
        print(f"nodes:            {summary['nodes']} "
              f"({summary['dropouts']} with dropout)")
        print(f"frames emitted:   {summary['frames_emitted']}")
        print(f"frames delivered: {summary['frames_delivered']} "
              f"(lost {summary['frames_lost']})")
        print(f"frames stored:    {summary['frames_stored']}")
        print(f"store:            {store_file}")
        for path in written:
            print(f"wrote {path}")
    store.close()
    return 0


# -- serve ---------------------------------------------------------------------

def cmd_serve(args) -> int:
    import uvicorn

    from .server.api import create_app
    host, _, port_text = args.bind.rpartition(":")
    if not host or not port_text.isdigit():
        print(f"error: --bind must be HOST:PORT, got {args.bind!r}",
              file=sys.stderr)
        return 2
    path = _store_path(args)
    store = MeasurementStore(path)
    app = create_app(store)
    try:
        uvicorn.run(app, host=host, port=int(port_text), log_level="warning")
    except OSError as e:
        print(f"error: cannot bind {args.bind}: {e}", file=sys.stderr)
        return 1
    return 0


# -- codec ---------------------------------------------------------------------

def cmd_codec(args) -> int:
    try:
        if args.action == "encode":
            text = sys.stdin.read() if args.data == "-" else args.data
            frame = codec.frame_from_json_dict(json.loads(text))
            print(codec.frame_to_hex(frame))
        else:
            text = sys.stdin.read() if args.data == "-" else args.data
            frame = codec.frame_from_hex(text)
            print(json.dumps(codec.frame_to_json_dict(frame), indent=2))
    except (codec.CodecError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


# -- airtime ---------------------------------------------------------------------

def cmd_airtime(args) -> int:
    ldro = {"auto": None, "on": True, "off": False}[args.ldro]
    try:
        params = airtime.RadioParams(
            sf=args.sf, bw_hz=args.bw_hz, cr=args.cr,
            preamble_symbols=args.preamble_symbols,
            explicit_header=not args.implicit_header,
            crc_on=not args.no_crc,
            low_data_rate_optimize=ldro)
        toa = airtime.time_on_air(params, args.payload_len)
    except airtime.ParamError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    if args.json:
        print(json.dumps({
            "sf": params.sf, "bw_hz": params.bw_hz, "cr": params.cr,
            "payload_len": args.payload_len,
            "symbols": airtime.payload_symbol_count(params, args.payload_len),
            "preamble_ms": round(toa.preamble_s * 1000, 3),
            "payload_ms": round(toa.payload_s * 1000, 3),
            "total_ms": round(toa.total_s * 1000, 3),
        }, indent=2))
    else:
        print(f"sf={params.sf} bw={params.bw_hz} cr=4/{4 + params.cr} "
              f"preamble={params.preamble_symbols} "
              f"payload={args.payload_len}B ldro={'on' if params.ldro else 'off'}")
        print(f"preamble: {toa.preamble_s * 1000:10.3f} ms")
        print(f"payload:  {toa.payload_s * 1000:10.3f} ms")
        print(f"total:    {toa.total_s * 1000:10.3f} ms")
        print("note: quoted airtimes may mean the payload part alone or "
              "preamble+payload; both are printed above")
    return 0


# -- energy ----------------------------------------------------------------------

def cmd_energy(args) -> int:
    try:
        profile = energy.PowerProfile(
            p_background_mw=args.background_mw,
            p_gnss_mw=args.gnss_mw,
            e_uplink_mwh=args.uplink_mwh,
            gnss_active_s_per_call=args.gnss_seconds,
            gnss_calls_per_day=args.gnss_calls,
            uplinks_per_day=args.uplinks)
        battery = energy.BatteryModel(usable_energy_mwh=args.battery_mwh)
        breakdown = energy.daily_energy_mwh(profile, gnss_enabled=not args.gnss_off)
        life = energy.lifetime_days(battery, breakdown.total_mwh)
    except energy.DomainError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    rows = [("background", breakdown.background_mwh),
            ("gnss", breakdown.gnss_mwh),
            ("lora", breakdown.lora_mwh),
            ("total", breakdown.total_mwh)]
    if args.json:
        print(json.dumps({
            "per_task_mwh_per_day": {k: round(v, 4) for k, v in rows},
            "lifetime_days": round(life, 1),
            "battery_mwh": battery.usable_energy_mwh,
            "gnss_enabled": not args.gnss_off,
        }, indent=2))
    else:
        print(f"{'task':<12}{'mWh/day':>10}")
        for name, value in rows:
            print(f"{name:<12}{value:>10.2f}")
        print(f"projected lifetime: {life:.1f} days "
              f"(battery {battery.usable_energy_mwh:g} mWh)")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write("task,energy_mwh_per_day\n")
            for name, value in rows:
                fh.write(f"{name},{value:.4f}\n")
        if not args.json:
            print(f"wrote {args.csv}")
    return 0


# -- analyze --------------------------------------------------------------------

def _load_reference(store: MeasurementStore) -> analytics.ReferenceSeries:
    rows = store.reference_rows()
    if not rows:
        print("error: store holds no reference series", file=sys.stderr)
        raise SystemExit(1)
    return analytics.ReferenceSeries(tuple(r[0] for r in rows),
                                     tuple(r[1] for r in rows),
                                     tuple(r[2] for r in rows))


def cmd_analyze(args) -> int:
    from . import report
    if args.op == "rain":
        try:
            flag = analytics.rain_flag(args.humidity_rh)
        except analytics.RangeError as e:
            print(f"error: {e}", file=sys.stderr)
            return 1
        if args.json:
            print(json.dumps({"humidity_rh": args.humidity_rh, "rain": flag}))
        else:
            print("rain" if flag else "dry")
        return 0

    store = _open_store(args)
    out_dir = Path(args.out)
    records = store.query_measurements()
    try:
        if args.op == "sun":
            ref = _load_reference(store)
            rows = []
            series_by_label = {}
            for dev in store.devices():
                if args.dev_eui and dev.dev_eui != args.dev_eui.lower():
                    continue
                recs = [r for r in records if r.dev_eui == dev.dev_eui]
                series = [(r.received_at, r.temperature_c) for r in recs]
                series_by_label[dev.label or dev.dev_eui] = series
                try:
                    labels = analytics.sun_exposure_classify(
                        series, ref, delta_c=args.delta_c)
                except analytics.CoverageError:
                    continue
                rows.extend([dev.dev_eui, d.isoformat(), label]
                            for d, label in sorted(labels.items()))
            if args.json:
                print(json.dumps([{"dev_eui": r[0], "date": r[1], "label": r[2]}
                                  for r in rows], indent=2))
            else:
                report.write_csv(out_dir / "sun.csv",
                                 ["dev_eui", "date", "label"], rows)
                print(f"wrote {out_dir / 'sun.csv'} ({len(rows)} rows)")
                if not args.no_figures:
                    p = report.fig_temperature(ref, series_by_label,
                                               out_dir / "sun.png")
                    print(f"wrote {p}")

        elif args.op == "scatter":
            res = analytics.occupancy_vs_humidity(records, args.square)
            if args.json:
                print(json.dumps({
                    "square_id": args.square,
                    "points": [{"humidity_rh": h, "sitting_min": s}
                               for h, s in res.points],
                    "quadrants": res.quadrants}, indent=2))
            else:
                report.write_csv(out_dir / "scatter.csv",
                                 ["humidity_rh", "sitting_min"],
                                 [("%.2f" % h, s) for h, s in res.points])
                print(f"wrote {out_dir / 'scatter.csv'} "
                      f"({len(res.points)} points)")
                print("quadrants:", json.dumps(res.quadrants))
                if not args.no_figures:
                    p = report.fig_scatter({args.square: res},
                                           out_dir / "scatter.png")
                    print(f"wrote {p}")

        elif args.op == "profile":
            prof = analytics.hourly_profile(records, args.square, args.bin_h)
            if args.json:
                print(json.dumps({
                    "square_id": args.square, "bin_h": prof.bin_h,
                    "lunch_window_h": list(prof.lunch_window),
                    "weekday": list(prof.weekday),
                    "weekend": list(prof.weekend)}, indent=2))
            else:
                report.write_csv(
                    out_dir / "profile.csv",
                    ["bin_start_h", "weekday_min", "weekend_min"],
                    [("%.2f" % h, "%.3f" % wd, "%.3f" % we)
                     for h, wd, we in zip(prof.bin_starts_h, prof.weekday,
                                          prof.weekend)])
                print(f"wrote {out_dir / 'profile.csv'}")
                if not args.no_figures:
                    p = report.fig_profiles({args.square: prof},
                                            out_dir / "profile.png")
                    print(f"wrote {p}")

        elif args.op == "daily":
            ref = _load_reference(store)
            squares = [args.square] if args.square else store.square_ids()
            rows = analytics.daily_sitting_vs_temperature(
                [r for r in records if r.square_id in squares], ref,
                squares=squares)
            if args.json:
                print(json.dumps([{
                    "date": r.day.isoformat(), "square_id": r.square_id,
                    "total_sitting_min": r.total_sitting_min,
                    "ref_mean_temp_c": r.ref_mean_temp_c} for r in rows],
                    indent=2))
            else:
                report.write_csv(
                    out_dir / "daily.csv",
                    ["date", "square_id", "total_sitting_min",
                     "ref_mean_temp_c"],
                    [(r.day.isoformat(), r.square_id, r.total_sitting_min,
                      "%.2f" % r.ref_mean_temp_c) for r in rows])
                print(f"wrote {out_dir / 'daily.csv'} ({len(rows)} rows)")
                if not args.no_figures:
                    p = report.fig_daily(rows, out_dir / "daily.png")
                    print(f"wrote {p}")
    except (analytics.CoverageError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    finally:
        store.close()
    return 0


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="urbansense",
        description="Chair-occupancy sensing simulator, server, and analytics")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sim", help="run a scenario end to end")
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("serve", help="serve the HTTP API over a store")
    p.add_argument("--store", help=f"store path (default ${STORE_ENV})")
    p.add_argument("--bind", default="127.0.0.1:8000")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("codec", help="encode/decode a 29-byte frame")
    p.add_argument("action", choices=["encode", "decode"])
    p.add_argument("data", help="frame JSON / payload hex ('-' for stdin)")
    p.set_defaults(func=cmd_codec)

    p = sub.add_parser("airtime", help="LoRa time-on-air for given settings")
    p.add_argument("--sf", type=int, default=12)
    p.add_argument("--bw-hz", type=int, default=125_000)
    p.add_argument("--cr", type=int, default=1, help="coding rate index (1 => 4/5)")
    p.add_argument("--preamble-symbols", type=int, default=8)
    p.add_argument("--payload-len", type=int, default=codec.FRAME_LEN)
    p.add_argument("--implicit-header", action="store_true")
    p.add_argument("--no-crc", action="store_true")
    p.add_argument("--ldro", choices=["auto", "on", "off"], default="auto")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_airtime)

    p = sub.add_parser("energy", help="daily energy breakdown and lifetime")
    p.add_argument("--background-mw", type=float, default=0.39)
    p.add_argument("--gnss-mw", type=float, default=22.9)
    p.add_argument("--uplink-mwh", type=float, default=0.1592)
    p.add_argument("--gnss-seconds", type=float, default=300.0)
    p.add_argument("--gnss-calls", type=int, default=12)
    p.add_argument("--uplinks", type=int, default=12)
    p.add_argument("--battery-mwh", type=float, default=2053.0)
    p.add_argument("--gnss-off", action="store_true")
    p.add_argument("--json", action="store_true")
    p.add_argument("--csv", help="also write the breakdown as CSV")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("analyze", help="run analytics over a store")
    p.add_argument("op", choices=["sun", "rain", "scatter", "profile", "daily"])
    p.add_argument("--store", help=f"store path (default ${STORE_ENV})")
    p.add_argument("--out", default="analysis", help="output directory")
    p.add_argument("--json", action="store_true")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--square", help="square id (scatter/profile, optional for daily)")
    p.add_argument("--dev-eui", help="restrict sun classification to one device")
    p.add_argument("--delta-c", type=float, default=5.0)
    p.add_argument("--bin-h", type=float, default=0.25)
    p.add_argument("--humidity-rh", type=float, help="value for the rain op")
    p.set_defaults(func=cmd_analyze)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "analyze":
        if args.op in ("scatter", "profile") and not args.square:
            print("error: --square is required for this op", file=sys.stderr)
            return 2
        if args.op == "rain" and args.humidity_rh is None:
            print("error: --humidity-rh is required for the rain op",
                  file=sys.stderr)
            return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
