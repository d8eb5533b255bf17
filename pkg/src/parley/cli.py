"""Command-line entry points: serve the HTTP API and run admin tasks
(user creation, tallies, log integrity checks, ballot export) directly
against the event log.
"""

from __future__ import annotations

import sys
from datetime import datetime, timezone
from pathlib import Path

import click

from . import store
from .errors import ParleyError
from .platform import Platform
from .service import ServiceConfig, create_app, hash_password


def _open_platform(log_path: str) -> Platform:
    path = Path(log_path)
    if path.exists():
        platform = store.replay(path)
    else:
        platform = Platform()
    platform.attach_log(store.EventLog(path))
    return platform


@click.group()
def main():
    """Deliberation platform administration."""


@main.command()
@click.option("--log", "log_path", default="parley.log", show_default=True,
              help="Event log file (created if absent).")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--domain", default="parley.local", show_default=True,
              help="Email gateway domain for Message-IDs and reply addresses.")
@click.option("--token-ttl", default=24 * 3600, show_default=True,
              help="Session token lifetime in seconds.")
def serve(log_path, host, port, domain, token_ttl):
    """Replay the log and serve the JSON API."""
    import uvicorn

    platform = _open_platform(log_path)
    app = create_app(platform, ServiceConfig(domain=domain,
                                             token_ttl_seconds=token_ttl))
    uvicorn.run(app, host=host, port=port)


@main.command("create-user")
@click.option("--log", "log_path", default="parley.log", show_default=True)
@click.option("--name", required=True, help="Display name.")
@click.option("--email", required=True)
@click.password_option()
def create_user(log_path, name, email, password):
    """Register a user account with a login password."""
    platform = _open_platform(log_path)
    try:
        user = platform.register_user(name, email,
                                      datetime.now(timezone.utc),
                                      password_hash=hash_password(password))
    except ParleyError as exc:
        raise click.ClickException(exc.message)
    click.echo(f"created user {user.id}: {user.display_name} <{user.email}>")


@main.command()
@click.argument("decision_id", type=int)
@click.option("--log", "log_path", default="parley.log", show_default=True)
def tally(decision_id, log_path):
    """Print the current (or final) tally of a decision."""
    platform = _open_platform(log_path)
    try:
        result = platform.tally(decision_id, datetime.now(timezone.utc))
    except ParleyError as exc:
        raise click.ClickException(exc.message)
    click.echo(f"decision {decision_id} "
               f"({'provisional' if result.provisional else 'final'})")
    for option, score in result.per_option_scores.items():
        click.echo(f"  {option}: {score}")
    outcome = result.outcome
    verdict = outcome.kind.value
    if outcome.option:
        verdict += f" {outcome.option}"
    elif outcome.options:
        verdict += " " + ", ".join(outcome.options)
    click.echo(f"  ballots: {result.ballots_cast}  "
               f"abstentions: {result.abstentions}  outcome: {verdict}")


@main.command("replay-check")
@click.option("--log", "log_path", default="parley.log", show_default=True)
@click.option("--snapshot", "snapshot_path", default=None,
              help="Also verify this snapshot matches the log prefix.")
def replay_check(log_path, snapshot_path):
    """Verify log integrity (checksums, sequence density, replayability)."""
    try:
        platform = store.replay(log_path)
    except ParleyError as exc:
        click.echo(f"FAIL: {exc.message}", err=True)
        sys.exit(1)
    digest = store.state_digest(platform)
    click.echo(f"ok: {platform.head_seq} events, state digest {digest}")
    if snapshot_path:
        try:
            snap = store.load_snapshot(snapshot_path)
        except ParleyError as exc:
            click.echo(f"FAIL: snapshot: {exc.message}", err=True)
            sys.exit(1)
        prefix = Platform.replay(
            e for e in store.read_events(log_path) if e.seq <= snap.head_seq)
        if store.state_digest(prefix) != store.state_digest(snap):
            click.echo("FAIL: snapshot state diverges from log prefix", err=True)
            sys.exit(1)
        click.echo(f"ok: snapshot matches log prefix at seq {snap.head_seq}")


@main.command("export-ballots")
@click.argument("decision_id", type=int)
@click.option("--log", "log_path", default="parley.log", show_default=True)
def export_ballots(decision_id, log_path):
    """Dump one tab-separated line per current ballot."""
    platform = _open_platform(log_path)
    try:
        text = platform.export_ballots(decision_id)
    except ParleyError as exc:
        raise click.ClickException(exc.message)
    if text:
        click.echo(text)


if __name__ == "__main__":
    main()
