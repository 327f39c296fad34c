"""Command line entry points: serve the node, run and compare simulations."""

from __future__ import annotations

import json
from pathlib import Path

import click

from .config import load_config
from .sim import SimConfig, SimMetrics, compare as compare_metrics, run_baseline, run_proposed


@click.group()
def main():
    """scholarnode: a self-hostable community publishing node."""


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host: str, port: int):
    """Run the HTTP node (configuration via environment variables)."""
    import logging
    import threading
    import time
    from datetime import datetime, timezone

    import uvicorn

    from .api import create_app
    from .engine import Node
    from .federation import HttpSyncClient

    logging.basicConfig(level=logging.INFO)
    log = logging.getLogger("scholarnode.serve")
    node = Node(load_config())
    app = create_app(node)

    def tick_loop():
        while True:
            time.sleep(60)
            try:
                fired = node.tick(datetime.now(timezone.utc))
                if fired:
                    log.info("timers fired: %s", fired)
            except Exception:
                log.exception("tick failed")

    def sync_loop():
        clients = [HttpSyncClient(url) for url in node.config.peers]
        while True:
            for client in clients:
                try:
                    applied = client.pull_into(node.federation)
                    if applied:
                        log.info("pulled %d entries from %s", applied, client.base_url)
                except Exception as exc:
                    log.warning("sync with %s failed: %s", client.base_url, exc)
            time.sleep(node.config.sync_interval_seconds)

    threading.Thread(target=tick_loop, daemon=True, name="tick").start()
    if node.config.peers:
        threading.Thread(target=sync_loop, daemon=True, name="sync").start()
    uvicorn.run(app, host=host, port=port)


@click.group()
def sim():
    """Workflow simulations: referee load and time to publication."""


@sim.command("run")
@click.option("--mode", type=click.Choice(["proposed", "baseline"]), required=True)
@click.option("--users", default=300, show_default=True, type=int)
@click.option("--manuscripts", default=200, show_default=True, type=int)
@click.option("--days", default=365, show_default=True, type=int)
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
def sim_run(mode: str, users: int, manuscripts: int, days: int, seed: int, out: Path):
    """Run one simulation and write its metrics as flat JSON."""
    config = SimConfig(users=users, manuscripts=manuscripts, days=days, seed=seed, mode=mode)
    metrics = run_proposed(config) if mode == "proposed" else run_baseline(config)
    out.write_text(json.dumps(metrics.to_dict(), indent=2) + "\n", encoding="utf-8")
    click.echo(f"{mode}: {metrics.total_referee_reports} reports, "
               f"{metrics.published_papers} published, "
               f"{metrics.mean_days_to_publication:.1f} days mean latency -> {out}")


@sim.command("compare")
@click.option("--a", "path_a", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True, help="proposed-mode metrics file")
@click.option("--b", "path_b", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True, help="baseline-mode metrics file")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
def sim_compare(path_a: Path, path_b: Path, out: Path):
    """Compare two metrics files (proposed vs baseline) into a report."""
    proposed = SimMetrics.from_dict(json.loads(path_a.read_text(encoding="utf-8")))
    baseline = SimMetrics.from_dict(json.loads(path_b.read_text(encoding="utf-8")))
    report = compare_metrics(proposed, baseline)
    out.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    click.echo(f"report_reduction={report['report_reduction']:.3f} "
               f"latency_reduction_days={report['latency_reduction_days']:.1f} -> {out}")


main.add_command(sim)

if __name__ == "__main__":
    main()
