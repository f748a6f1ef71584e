"""Operator command line: serve the API, run scenarios, validate files,
and inspect queues or inboxes either over HTTP or straight from a log."""

from __future__ import annotations

import json
import sys
import threading
import time
from pathlib import Path

import click

from . import __version__
from .catalog import render_catalog, validate_catalog
from .chain import default_chain_configs
from .clock import FixedClock, SystemClock
from .config import load_app_config
from .core import Bank
from .errors import BankflowError
from .hub import Channel, InMemorySink
from .scenario import load_scenario, run_scenario
from .store import EventLog


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _configs_from_option(config_path: str | None):
    if config_path is None:
        return default_chain_configs()
    return load_app_config(config_path).configs_by_kind()


def _default_sinks():
    return [InMemorySink(channel) for channel in Channel]


@click.group()
@click.version_option(version=__version__, prog_name="bankflow")
def main() -> None:
    """Event-sourced banking back office."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True),
              help="Chain and token configuration (JSON).")
@click.option("--log", "log_path", required=True, type=click.Path(),
              help="Append-only event log (JSON Lines); created if missing.")
@click.option("--listen", default="127.0.0.1:8000", show_default=True,
              help="host:port to bind.")
@click.option("--ui", "ui_dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="Static console build to serve under /console.")
@click.option("--allow-truncated", is_flag=True,
              help="Drop a crash-truncated final log line instead of refusing to start.")
@click.option("--drive-interval", default=1.0, show_default=True,
              help="Seconds between background outbox drives; 0 disables.")
def serve(config_path, log_path, listen, ui_dir, allow_truncated, drive_interval) -> None:
    """Run the HTTP API."""
    import uvicorn

    from .service import create_app

    try:
        app_config = load_app_config(config_path)
        log = EventLog.open(log_path, allow_truncated=allow_truncated)
        bank = Bank(app_config.configs_by_kind(), log, sinks=_default_sinks())
    except BankflowError as exc:
        _fail(f"{exc.code}: {exc}")
        return
    if drive_interval > 0:
        def drive_forever() -> None:
            while True:
                time.sleep(drive_interval)
                try:
                    bank.drive_outbox()
                except BankflowError:
                    pass  # keep serving; queued records stay queued

        threading.Thread(target=drive_forever, daemon=True, name="outbox-driver").start()
    host, _, port = listen.rpartition(":")
    if not host or not port.isdigit():
        _fail(f"--listen must be host:port, got {listen!r}")
        return
    application = create_app(bank, app_config.token_table(), ui_dir=ui_dir)
    uvicorn.run(application, host=host, port=int(port))


@main.group()
def scenario() -> None:
    """Scripted end-to-end runs."""


@scenario.command("run")
@click.argument("file", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Chain configuration; defaults to the built-in three-tier setup.")
@click.option("--log", "log_path", type=click.Path(), default=None,
              help="Write the event log here instead of keeping it in memory.")
@click.option("--fixed-clock", is_flag=True,
              help="Deterministic timestamps, for reproducible logs.")
@click.option("--allow-truncated", is_flag=True,
              help="Drop a crash-truncated final line when resuming an existing log.")
def scenario_run(file, config_path, log_path, fixed_clock, allow_truncated) -> None:
    """Execute FILE and exit 0 only if every step and assertion passed."""
    try:
        steps = load_scenario(file)
        configs = _configs_from_option(config_path)
        clock = FixedClock() if fixed_clock else SystemClock()
        log = (EventLog.open(log_path, clock, allow_truncated=allow_truncated)
               if log_path else EventLog.memory(clock))
        bank = Bank(configs, log, clock, sinks=_default_sinks())
    except BankflowError as exc:
        _fail(f"{exc.code}: {exc}")
        return
    result = run_scenario(steps, bank)
    for line in result.lines():
        click.echo(line)
    passed = sum(1 for r in result.results if r.ok)
    click.echo(f"{passed}/{len(result.results)} steps passed")
    sys.exit(0 if result.ok else 1)


@main.group()
def config() -> None:
    """Configuration files."""


@config.command("validate")
@click.argument("path", type=click.Path(exists=True))
def config_validate(path) -> None:
    """Check a chain/token configuration document."""
    try:
        app_config = load_app_config(path)
    except BankflowError as exc:
        click.echo(f"{path}: invalid", err=True)
        for diagnostic in getattr(exc, "diagnostics", [str(exc)]):
            click.echo(f"  - {diagnostic}", err=True)
        sys.exit(1)
    chains = ", ".join(
        f"{c.chain_id} ({c.applies_to_kind.value}, {len(c.tiers)} tiers)"
        for c in app_config.chains
    )
    click.echo(f"{path}: ok — chains: {chains}; tokens: {len(app_config.tokens)}")


@main.group()
def catalog() -> None:
    """Pattern catalog files."""


@catalog.command("validate")
@click.argument("path", type=click.Path(exists=True))
def catalog_validate(path) -> None:
    """Check a pattern catalog document."""
    try:
        descriptors = validate_catalog(path)
    except BankflowError as exc:
        click.echo(f"{path}: invalid", err=True)
        problems = getattr(exc, "problems", None)
        if problems:
            for name, fields in problems.items():
                click.echo(f"  - {name}: {', '.join(fields)}", err=True)
        else:
            click.echo(f"  - {exc}", err=True)
        sys.exit(1)
    names = ", ".join(d.name for d in descriptors) or "(none)"
    click.echo(f"{path}: ok — {len(descriptors)} pattern(s): {names}")


@catalog.command("render")
@click.argument("path", type=click.Path(exists=True))
@click.option("-o", "--output", type=click.Path(), default=None,
              help="Write markdown here instead of stdout.")
def catalog_render(path, output) -> None:
    """Render a validated catalog to markdown."""
    try:
        document = render_catalog(validate_catalog(path))
    except BankflowError as exc:
        _fail(f"{exc.code}: {exc}")
        return
    if output:
        Path(output).write_text(document, encoding="utf-8")
        click.echo(f"wrote {output}")
    else:
        click.echo(document, nl=False)


def _table(rows: list[list[str]], headers: list[str]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    def fmt(cells):
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    lines = [fmt(headers), fmt(["-" * w for w in widths])]
    lines.extend(fmt(r) for r in rows)
    return "\n".join(lines)


def _api_get(api: str, token: str, path: str):
    import httpx

    response = httpx.get(api.rstrip("/") + path,
                         headers={"Authorization": f"Bearer {token}"}, timeout=10.0)
    if response.status_code != 200:
        try:
            body = response.json()
            _fail(f"{body.get('code', response.status_code)}: {body.get('message', '')}")
        except (ValueError, KeyError):
            _fail(f"HTTP {response.status_code}: {response.text}")
    return response.json()


def _replayed_bank(log_path: str, config_path: str | None, allow_truncated: bool) -> Bank:
    configs = _configs_from_option(config_path)
    from .store import read_log

    return Bank.replay(configs, read_log(log_path, allow_truncated=allow_truncated))


@main.group()
def queue() -> None:
    """Tier work queues."""


@queue.command("list")
@click.argument("tier_id")
@click.option("--api", "api_url", default=None, help="Base URL of a running service.")
@click.option("--token", default=None, help="Bearer token for --api.")
@click.option("--log", "log_path", type=click.Path(exists=True), default=None,
              help="Replay this event log instead of calling an API.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--allow-truncated", is_flag=True)
def queue_list(tier_id, api_url, token, log_path, config_path, allow_truncated) -> None:
    """Pending requests waiting at TIER_ID, oldest first."""
    try:
        if api_url:
            if not token:
                _fail("--api needs --token")
            items = _api_get(api_url, token, f"/queues/{tier_id}")
            rows = [[i["request_id"], i["kind"], str(i["amount"]), i["currency"],
                     i["customer_id"], i["submitted_at"]] for i in items]
        elif log_path:
            bank = _replayed_bank(log_path, config_path, allow_truncated)
            rows = []
            for instance in bank.pending_for_tier(tier_id):
                request = bank.request(instance.request_id)
                rows.append([request.request_id, request.kind.value, str(request.amount),
                             request.currency, request.customer_id,
                             request.submitted_at.isoformat()])
        else:
            _fail("pass either --api/--token or --log")
            return
    except BankflowError as exc:
        _fail(f"{exc.code}: {exc}")
        return
    click.echo(_table(rows, ["request", "kind", "amount", "currency", "customer", "submitted"]))
    click.echo(f"{len(rows)} pending at {tier_id}")


@main.command()
@click.argument("customer_id")
@click.option("--api", "api_url", default=None, help="Base URL of a running service.")
@click.option("--token", default=None, help="Bearer token for --api.")
@click.option("--log", "log_path", type=click.Path(exists=True), default=None,
              help="Replay this event log instead of calling an API.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--allow-truncated", is_flag=True)
def inbox(customer_id, api_url, token, log_path, config_path, allow_truncated) -> None:
    """Notifications delivered (or pending) for CUSTOMER_ID."""
    try:
        if api_url:
            if not token:
                _fail("--api needs --token")
            items = _api_get(api_url, token, f"/customers/{customer_id}/notifications")
            rows = [[str(n["event_seq"]), n["topic"], n["channel"], n["status"],
                     str(n["attempts"]), json.dumps(n["payload"], sort_keys=True)]
                    for n in items]
        elif log_path:
            bank = _replayed_bank(log_path, config_path, allow_truncated)
            rows = [[str(r.event_seq), e.topic, r.channel.value, r.status.value,
                     str(r.attempts), json.dumps(dict(e.payload), sort_keys=True)]
                    for r, e in bank.deliveries_for(customer_id)]
        else:
            _fail("pass either --api/--token or --log")
            return
    except BankflowError as exc:
        _fail(f"{exc.code}: {exc}")
        return
    click.echo(_table(rows, ["event", "topic", "channel", "status", "attempts", "payload"]))
    click.echo(f"{len(rows)} notification(s) for {customer_id}")


if __name__ == "__main__":
    main()
