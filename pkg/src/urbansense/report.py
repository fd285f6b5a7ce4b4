"""Figure rendering for the report paths: every plot ships next to its CSV.

Uses the Agg backend; nothing here opens a window. The analytics module
stays data-only, this module is the single place pixels are produced.
"""

from __future__ import annotations

import csv
from datetime import datetime
from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.dates as mdates  # noqa: E402
import matplotlib.pyplot as plt    # noqa: E402

from . import analytics             # noqa: E402
from .analytics import (DailyUsageRow, HourlyProfile, ReferenceSeries,
                        ScatterResult)  # noqa: E402
from .server.store import MeasurementStore  # noqa: E402


def write_csv(path: Path, header: Sequence[str],
              rows: Iterable[Sequence]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def fig_temperature(ref: ReferenceSeries,
                    node_series: dict[str, list[tuple[datetime, float]]],
                    path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(9, 4))
    ax.plot([t for t in ref.timestamps], ref.temperature_c,
            color="tab:blue", lw=1.8, label="city reference")
    for label, series in sorted(node_series.items()):
        if not series:
            continue
        ax.plot([t for t, _ in series], [v for _, v in series],
                lw=0.7, alpha=0.7, label=label)
    ax.set_ylabel("temperature [degC]")
    ax.xaxis.set_major_formatter(mdates.DateFormatter("%m-%d"))
    if len(node_series) <= 8:
        ax.legend(fontsize=7, ncol=3)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path

def fig_scatter(results: dict[str, ScatterResult], path: Path) -> Path:
    n = max(1, len(results))
    fig, axes = plt.subplots(1, n, figsize=(4.5 * n, 4), squeeze=False)
    for ax, (sq, res) in zip(axes[0], sorted(results.items())):
        if res.points:
            ax.scatter([p[0] for p in res.points], [p[1] for p in res.points],
                       s=6, alpha=0.35, edgecolors="none")
        ax.axvline(analytics.SCATTER_HUMIDITY_SPLIT, color="gray", ls="--", lw=0.8)
        ax.axhline(analytics.SCATTER_SITTING_SPLIT, color="gray", ls="--", lw=0.8)
        ax.set_xlim(0, 100)
        ax.set_ylim(-1, 31)
        ax.set_xlabel("humidity [%RH]")
        ax.set_ylabel("sitting [min / interval]")
        ax.set_title(f"square {sq}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def fig_profiles(profiles: dict[str, HourlyProfile], path: Path) -> Path:
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    for ax, kind in zip(axes, ("weekday", "weekend")):
        for sq, prof in sorted(profiles.items()):
            values = prof.weekday if kind == "weekday" else prof.weekend
            ax.step(prof.bin_starts_h, values, where="post", label=f"square {sq}")
        if kind == "weekday":
            lo, hi = profiles[next(iter(profiles))].lunch_window
            ax.axvspan(lo, hi, color="orange", alpha=0.15, label="lunch hour")
        ax.set_xlabel("hour of day")
        ax.set_xlim(0, 24)
        ax.set_xticks(range(0, 25, 4))
        ax.set_title(kind)
        ax.grid(alpha=0.3)
        ax.legend(fontsize=8)
    axes[0].set_ylabel("sitting [min] per day-class day")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def fig_daily(rows: list[DailyUsageRow], path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(9, 4))
    squares = sorted({r.square_id for r in rows})
    width = 0.8 / max(1, len(squares))
    for i, sq in enumerate(squares):
        sq_rows = [r for r in rows if r.square_id == sq]
        xs = [mdates.date2num(r.day) + i * width for r in sq_rows]
        ax.bar(xs, [r.total_sitting_min for r in sq_rows],
               width=width, alpha=0.6, label=f"square {sq}", align="edge")
    ax.xaxis_date()
    ax.set_ylabel("sitting [min/day]")
    ax2 = ax.twinx()
    days = sorted({r.day for r in rows})
    temp = {r.day: r.ref_mean_temp_c for r in rows}
    ax2.plot(days, [temp[d] for d in days], color="tab:red", lw=1.2,
             label="ref temp")
    ax2.set_ylabel("daily mean temperature [degC]")
    ax.legend(loc="upper left", fontsize=8)
    ax.grid(alpha=0.3)
    fig.autofmt_xdate()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def fig_energy(timeline: Sequence[tuple[float, float]], path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(9, 3.5))
    ax.plot([t / 3600.0 for t, _ in timeline], [e for _, e in timeline],
            lw=1.0, color="tab:green")
    ax.set_xlabel("hours")
    ax.set_ylabel("cumulative energy [mWh]")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _reference_from_store(store: MeasurementStore) -> ReferenceSeries | None:
    rows = store.reference_rows()
    if not rows:
        return None
    return ReferenceSeries(tuple(r[0] for r in rows),
                           tuple(r[1] for r in rows),
                           tuple(r[2] for r in rows))


def node_temperature_series(store: MeasurementStore
                            ) -> dict[str, list[tuple[datetime, float]]]:
    series: dict[str, list[tuple[datetime, float]]] = {}
    for dev in store.devices():
        recs = store.query_measurements(dev_eui=dev.dev_eui)
        label = dev.label or dev.dev_eui
        series[label] = [(r.received_at, r.temperature_c) for r in recs]
    return series


def render_run_figures(store: MeasurementStore, fig_dir: str | Path) -> list[Path]:
    """Render the standard report set for a populated store.

    Each figure gets a CSV holding exactly the plotted data.
    """
    fig_dir = Path(fig_dir)
    fig_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    records = store.query_measurements()
    ref = _reference_from_store(store)
    squares = store.square_ids() or sorted(
        {r.square_id for r in records if r.square_id})

    series = node_temperature_series(store)
    if ref is not None:
        rows = [(ts.strftime("%Y-%m-%dT%H:%M:%SZ"), "reference", "%.3f" % v)
                for ts, v in zip(ref.timestamps, ref.temperature_c)]
        for label, sv in sorted(series.items()):
            rows.extend((ts.strftime("%Y-%m-%dT%H:%M:%SZ"), label, "%.2f" % v)
                        for ts, v in sv)
        written.append(write_csv(fig_dir / "temperature.csv",
                                 ["ts", "series", "temperature_c"], rows))
        written.append(fig_temperature(ref, series, fig_dir / "temperature.png"))

    scatter = {sq: analytics.occupancy_vs_humidity(records, sq) for sq in squares}
    rows = [(sq, "%.2f" % hum, sit)
            for sq in squares for hum, sit in scatter[sq].points]
    written.append(write_csv(fig_dir / "scatter.csv",
                             ["square_id", "humidity_rh", "sitting_min"], rows))
    written.append(fig_scatter(scatter, fig_dir / "scatter.png"))

    profiles = {sq: analytics.hourly_profile(records, sq) for sq in squares}
    prof_rows = []
    for sq in squares:
        prof = profiles[sq]
        for i, start in enumerate(prof.bin_starts_h):
            prof_rows.append((sq, "%.2f" % start,
                              "%.3f" % prof.weekday[i], "%.3f" % prof.weekend[i]))
    written.append(write_csv(fig_dir / "profile.csv",
                             ["square_id", "bin_start_h", "weekday_min",
                              "weekend_min"], prof_rows))
    if profiles:
        written.append(fig_profiles(profiles, fig_dir / "profile.png"))

    if ref is not None:
        daily = analytics.daily_sitting_vs_temperature(records, ref,
                                                       squares=squares)
        rows = [(r.day.isoformat(), r.square_id, r.total_sitting_min,
                 "%.2f" % r.ref_mean_temp_c) for r in daily]
        written.append(write_csv(fig_dir / "daily.csv",
                                 ["date", "square_id", "total_sitting_min",
                                  "ref_mean_temp_c"], rows))
        written.append(fig_daily(daily, fig_dir / "daily.png"))
    return written
