"""End-to-end run: scenario -> node simulations -> channel -> store -> reports.

This is the library behind the ``sim`` CLI command; tests drive it directly.
Node simulations are independent (per-node seeded streams), so the outcome
does not depend on the order they are executed in.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .energy import energy_ledger
from .envelope import UplinkEnvelope
from .nodesim import NodeRun, ScheduleConfig, run_node
from .scenario import Scenario, World, build_world
from .server.store import MeasurementStore


@dataclass(frozen=True)
class NodeSummary:
    dev_eui: str
    label: str
    square_id: str
    emitted: int
    delivered: int
    stored: int
    dropout_day: int | None
    energy_total_mwh: float
    energy_mwh_per_day: float


@dataclass
class RunResult:
    scenario: Scenario
    world: World
    node_runs: dict[str, NodeRun]
    delivered: list[UplinkEnvelope]
    nodes: list[NodeSummary] = field(default_factory=list)

    @property
    def frames_emitted(self) -> int:
        return sum(n.emitted for n in self.nodes)

    @property
    def frames_delivered(self) -> int:
        return sum(n.delivered for n in self.nodes)

    @property
    def frames_stored(self) -> int:
        return sum(n.stored for n in self.nodes)

    def summary_dict(self) -> dict:
        return {
            "duration_days": self.scenario.duration_days,
            "seed": self.scenario.seed,
            "nodes": len(self.nodes),
            "dropouts": sum(1 for n in self.nodes if n.dropout_day is not None),
            "frames_emitted": self.frames_emitted,
            "frames_delivered": self.frames_delivered,
            "frames_lost": self.frames_emitted - self.frames_delivered,
            "frames_stored": self.frames_stored,
            "per_node": [{
                "dev_eui": n.dev_eui,
                "label": n.label,
                "square": n.square_id,
                "emitted": n.emitted,
                "delivered": n.delivered,
                "stored": n.stored,
                "dropout_day": n.dropout_day,
                "energy_total_mwh": round(n.energy_total_mwh, 3),
                "energy_mwh_per_day": round(n.energy_mwh_per_day, 3),
            } for n in self.nodes],
        }


def simulate(scenario: Scenario, store: MeasurementStore,
             cfg: ScheduleConfig | None = None) -> RunResult:
    """Run every node, pass uplinks through the channel, ingest survivors."""
    cfg = cfg or ScheduleConfig()
    world = build_world(scenario)
    store.put_reference(world.reference.timestamps,
                        world.reference.temperature_c, world.reference.rain)
    for sq in scenario.squares:
        store.register_square(sq.definition)

    node_runs: dict[str, NodeRun] = {}
    for spec in scenario.nodes:
        trace = world.traces[spec.identity.dev_eui]
        node_runs[spec.identity.dev_eui] = run_node(
            cfg, trace, scenario.duration_s, seed=scenario.seed,
            identity=spec.identity, home=spec.position,
            epoch_utc=scenario.epoch_utc)

    delivered: list[UplinkEnvelope] = []
    delivered_per_node: dict[str, int] = {}
    for dev_eui, run in node_runs.items():
        for env in run.envelopes:
            if world.channel.deliver(env):
                delivered.append(env)
                delivered_per_node[dev_eui] = delivered_per_node.get(dev_eui, 0) + 1
    delivered.sort(key=lambda e: (e.received_at, e.dev_eui, e.fcnt))

    stored_per_node: dict[str, int] = {}
    for env in delivered:
        result = store.ingest(env)
        if result.created:
            stored_per_node[env.dev_eui] = stored_per_node.get(env.dev_eui, 0) + 1

    result = RunResult(scenario, world, node_runs, delivered)
    for spec in scenario.nodes:
        eui = spec.identity.dev_eui
        run = node_runs[eui]
        ledger = energy_ledger(run.energy_events, run.state.profile, run.span_s)
        result.nodes.append(NodeSummary(
            dev_eui=eui,
            label=spec.identity.label,
            square_id=spec.square_id,
            emitted=len(run.envelopes),
            delivered=delivered_per_node.get(eui, 0),
            stored=stored_per_node.get(eui, 0),
            dropout_day=spec.dropout_day,
            energy_total_mwh=ledger.total_mwh,
            energy_mwh_per_day=ledger.total_mwh / scenario.duration_days,
        ))
    return result


def write_artifacts(result: RunResult, store: MeasurementStore,
                    out_dir: str | Path, figures: bool = True) -> list[Path]:
    """Write the run's files: logs, export, energy report, summary, figures."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    env_path = out / "envelopes.jsonl"
    with env_path.open("w", encoding="utf-8") as fh:
        for env in result.delivered:
            fh.write(json.dumps(env.to_json_dict()) + "\n")
    written.append(env_path)

    events_path = out / "events.jsonl"
    with events_path.open("w", encoding="utf-8") as fh:
        for spec in result.scenario.nodes:
            for ev in result.node_runs[spec.identity.dev_eui].events:
                fh.write(json.dumps({
                    "t_s": ev.t_s, "node": ev.node,
                    "event": ev.event, "detail": ev.detail}) + "\n")
    written.append(events_path)

    export_path = out / "export.csv"
    export_path.write_bytes(store.export_csv())
    written.append(export_path)

    energy_path = out / "energy_report.csv"
    with energy_path.open("w", encoding="utf-8", newline="") as fh:
        fh.write("dev_eui,label,square,days,total_mwh,mwh_per_day\n")
        for n in result.nodes:
            fh.write(f"{n.dev_eui},{n.label},{n.square_id},"
                     f"{result.scenario.duration_days},"
                     f"{n.energy_total_mwh:.3f},{n.energy_mwh_per_day:.3f}\n")
    written.append(energy_path)

    ref_path = out / "reference.csv"
    with ref_path.open("w", encoding="utf-8", newline="") as fh:
        fh.write("ts,temperature_c,rain\n")
        for ts, temp, rain in store.reference_rows():
            fh.write(f"{ts.strftime('%Y-%m-%dT%H:%M:%SZ')},{temp:g},{int(rain)}\n")
    written.append(ref_path)

    summary_path = out / "summary.json"
    summary_path.write_text(json.dumps(result.summary_dict(), indent=2) + "\n",
                            encoding="utf-8")
    written.append(summary_path)

    if figures:
        from . import report
        written.extend(report.render_run_figures(store, out / "figures"))
    return written
