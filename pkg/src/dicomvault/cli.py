"""Command-line entry points: serve, bench, corpus, reindex, audit export."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .bench import (
    CorpusSpec,
    generate_corpus,
    load_scenario,
    reference_buckets_with_total,
    run_scenario,
    scaled_reference_buckets,
)
from .config import load_config


@click.group()
def main():
    """Multi-tenant DICOMWeb archive with role-based access control."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="YAML config file; environment variables override it.")
@click.option("--host", default=None, help="Listen address override.")
@click.option("--port", type=int, default=None, help="Listen port override.")
@click.option("--data-dir", type=click.Path(file_okay=False), default=None,
              help="Directory for the entity store, index, blobs, and audit trail.")
@click.option("--rbac/--no-rbac", "rbac_mode", default=None,
              help="Start with the DICOMWeb access filter on or off.")
@click.option("--console-dir", type=click.Path(file_okay=False), default=None,
              help="Static admin-console build to mount under /console.")
def serve(config_path, host, port, data_dir, rbac_mode, console_dir):
    """Run the archive server."""
    import uvicorn

    from .server import VaultServices, create_app

    config = load_config(config_path) if config_path else load_config()
    if host is not None:
        config.host = host
    if port is not None:
        config.port = port
    if data_dir is not None:
        config.data_dir = Path(data_dir)
    if rbac_mode is not None:
        config.rbac_mode = rbac_mode

    services = VaultServices(config)
    console = Path(console_dir) if console_dir else Path("frontend/dist")
    app = create_app(services, console_dir=console if console.is_dir() else None)
    click.echo(f"dicomvault listening on {config.host}:{config.port} "
               f"(rbac_mode={'on' if config.rbac_mode else 'off'}, data={config.data_dir})")
    try:
        uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    finally:
        services.close()


@main.group()
def bench():
    """Latency benchmark harness."""


@bench.command("run")
@click.option("--scenario", "scenario_path", required=True,
              type=click.Path(exists=True, dir_okay=False), help="Scenario JSON file.")
@click.option("--target", required=True, help="Base URL of the server under test.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False),
              help="Directory for the report, request log, and figures.")
def bench_run(scenario_path, target, out_dir):
    """Drive a scenario against a server and write the report."""
    scenario = load_scenario(scenario_path)
    click.echo(f"running {scenario.service} scenario '{scenario.name}' against {target}")
    report = run_scenario(scenario, target)
    paths = report.write(out_dir)
    click.echo(report.text_table())
    click.echo("\nwrote: " + ", ".join(str(p) for p in paths.values()))
    if report.mode_equivalent is False:
        click.echo("warning: open/protected response bodies diverged", err=True)
        sys.exit(2)


@main.group()
def corpus():
    """Synthetic DICOM corpus tools."""


@corpus.command("generate")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--seed", type=int, default=0)
@click.option("--scale", type=float, default=None,
              help="Scale factor applied to the reference size distribution.")
@click.option("--total", type=int, default=None,
              help="Exact file count apportioned over the reference distribution.")
@click.option("--bucket", "buckets", multiple=True, metavar="COUNT:SIZE_KB",
              help="Explicit bucket, repeatable (e.g. --bucket 100:131).")
def corpus_generate(out_dir, seed, scale, total, buckets):
    """Generate synthetic DICOM files plus a manifest."""
    if buckets:
        parsed = []
        for piece in buckets:
            count, _, size = piece.partition(":")
            parsed.append((int(count), int(size)))
    elif total is not None:
        parsed = reference_buckets_with_total(total)
    elif scale is not None:
        parsed = scaled_reference_buckets(scale)
    else:
        raise click.UsageError("give --scale, --total, or --bucket")
    entries = generate_corpus(CorpusSpec(buckets=parsed, seed=seed), out_dir)
    total_bytes = sum(e.size for e in entries)
    click.echo(f"generated {len(entries)} files ({total_bytes / 1_048_576:.1f} MiB) in {out_dir}")


@main.command()
@click.option("--data-dir", required=True, type=click.Path(exists=True, file_okay=False))
def reindex(data_dir):
    """Rebuild the metadata index from stored blobs (server must be stopped)."""
    from .archive import Archive, BlobStore
    from .db import Database
    from .rbac import RbacEngine, RbacStore

    data = Path(data_dir)
    db = Database(data / "vault.db")
    store = RbacStore(db)
    archive = Archive(db, BlobStore(data / "blobs"), store, RbacEngine(store))
    records, failures = archive.reindex()
    click.echo(f"rebuilt {records} records")
    for uri, error in failures:
        click.echo(f"failed {uri}: {error}", err=True)
    db.close()


@main.group()
def audit():
    """Audit trail tools."""


@audit.command("export")
@click.option("--data-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default="-",
              help="Output file, '-' for stdout.")
def audit_export(data_dir, out_path):
    """Dump the audit trail as newline-delimited JSON."""
    from .audit import AuditLog

    log = AuditLog(Path(data_dir) / "audit.db")
    try:
        if out_path == "-":
            count = log.export_ndjson(sys.stdout)
        else:
            with open(out_path, "w") as fp:
                count = log.export_ndjson(fp)
        click.echo(f"exported {count} records", err=True)
    finally:
        log.close()


if __name__ == "__main__":
    main()
