"""Command-line interface.

Machine-readable JSON goes to stdout, diagnostics to stderr. Exit codes:
0 success, 1 domain error, 2 usage error. State lives in a data directory
(--data-dir or NEXUS_DATA, default ./nexus-data) holding the registry
snapshot; search index and knowledge base are rebuilt per invocation.
"""

from __future__ import annotations

import json
from pathlib import Path

import click

from nexus import fixtures as fixtures_mod
from nexus import service as service_mod
from nexus.errors import DomainError
from nexus.graph import Graph
from nexus.guide import GuideConfig, map_features, suggest_copies, timeline_query
from nexus.portal import Portal, ServiceConfig


def _echo(payload) -> None:
    click.echo(json.dumps(payload, ensure_ascii=False, indent=2))


def _open_portal(data_dir: str) -> Portal:
    config = ServiceConfig(data_directory=data_dir)
    return Portal.open(config)


@click.group()
@click.option("--data-dir", envvar="NEXUS_DATA", default="nexus-data",
              help="Directory holding the registry snapshot.")
@click.pass_context
def main(ctx: click.Context, data_dir: str) -> None:
    """Archival metadata portal: registry, search, helpdesk, guides."""
    ctx.ensure_object(dict)
    ctx.obj["data_dir"] = data_dir


def _run(ctx: click.Context, action) -> None:
    try:
        action()
    except DomainError as exc:
        click.echo(f"error {exc.code}: {exc.message}", err=True)
        _echo(exc.to_dict())
        ctx.exit(1)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.pass_context
def serve(ctx: click.Context, config_path: str) -> None:
    """Run the HTTP service until interrupted."""
    try:
        config = ServiceConfig.load(config_path)
    except DomainError as exc:
        click.echo(f"error {exc.code}: {exc.message}", err=True)
        ctx.exit(2)
    ctx.exit(service_mod.serve(config))


@main.command()
@click.option("--repo", "repo_code", required=True, help="Repository code, e.g. jmp.")
@click.option("--profile", "profile_path", required=True, type=click.Path(exists=True))
@click.option("--input", "input_ref", required=True,
              help="Export file path, or harvest endpoint URL (http...).")
@click.option("--from", "from_timestamp", default=None,
              help="Harvest only records with datestamp >= this value.")
@click.pass_context
def ingest(ctx: click.Context, repo_code: str, profile_path: str, input_ref: str,
           from_timestamp: str | None) -> None:
    """Import one export (file or harvest URL) under a repository."""

    def action() -> None:
        portal = _open_portal(ctx.obj["data_dir"])
        if input_ref.startswith(("http://", "https://")):
            from nexus.ingest import load_profile
            report = portal.ingest_harvest(repo_code, load_profile(profile_path), input_ref,
                                           from_timestamp)
        else:
            report = portal.ingest_file(repo_code, profile_path, input_ref)
        portal.save()
        _echo(report.to_dict())
        if report.rejected:
            click.echo(f"{len(report.rejected)} record(s) rejected", err=True)

    _run(ctx, action)


@main.command()
@click.argument("query")
@click.option("--lang", "languages", default="", help="Comma-separated language codes.")
@click.option("--facet", "facets", multiple=True, help="Facet filter name:value, repeatable.")
@click.option("--page", default=1, type=int)
@click.option("--size", default=0, type=int)
@click.pass_context
def search(ctx: click.Context, query: str, languages: str, facets: tuple[str, ...],
           page: int, size: int) -> None:
    """Expanded, faceted search over the registry."""

    def action() -> None:
        portal = _open_portal(ctx.obj["data_dir"])
        filters: dict[str, list[str]] = {}
        for pair in facets:
            if ":" not in pair:
                raise DomainError("invalid-facet", f"facet {pair!r} is not name:value")
            name, value = pair.split(":", 1)
            filters.setdefault(name, []).append(value)
        langs = [s for s in languages.split(",") if s] or None
        result = portal.search(query, langs, filters or None, page, size or None)
        _echo(result.to_dict())

    _run(ctx, action)


@main.command()
@click.argument("question")
@click.option("--lang", "languages", default="en", help="Comma-separated language codes.")
@click.pass_context
def ask(ctx: click.Context, question: str, languages: str) -> None:
    """Route a free-text question to suitable institutions."""

    def action() -> None:
        portal = _open_portal(ctx.obj["data_dir"])
        answer = portal.ask(question, [s for s in languages.split(",") if s])
        _echo(answer.to_dict())

    _run(ctx, action)


@main.group()
def vocab() -> None:
    """Terminological database: thesaurus, authorities, concordance."""


@vocab.command("load")
@click.option("--kind", type=click.Choice(["thesaurus", "concordance", "persons", "places",
                                           "events", "repositories", "stopwords"]),
              required=True)
@click.argument("path", type=click.Path(exists=True))
@click.pass_context
def vocab_load(ctx: click.Context, kind: str, path: str) -> None:
    """Load a vocabulary or authority file into the registry."""

    def action() -> None:
        portal = _open_portal(ctx.obj["data_dir"])
        loader = {
            "thesaurus": portal.load_thesaurus_file,
            "concordance": portal.load_concordance_file,
            "persons": portal.load_persons_file,
            "places": portal.load_places_file,
            "events": portal.load_events_file,
            "repositories": portal.load_repositories_file,
            "stopwords": portal.load_stopword_file,
        }[kind]
        count = loader(path)
        portal.save()
        _echo({"kind": kind, "loaded": count})

    _run(ctx, action)


@vocab.command("lookup")
@click.argument("term")
@click.option("--lang", "language", default=None)
@click.pass_context
def vocab_lookup(ctx: click.Context, term: str, language: str | None) -> None:
    """Concept ids matching a term."""

    def action() -> None:
        portal = _open_portal(ctx.obj["data_dir"])
        _echo(sorted(portal.thesaurus.lookup(term, language)))

    _run(ctx, action)


@vocab.command("expand")
@click.argument("terms", nargs=-1, required=True)
@click.option("--lang", "languages", default="", help="Comma-separated language codes.")
@click.option("--max-depth", default=None, type=int)
@click.pass_context
def vocab_expand(ctx: click.Context, terms: tuple[str, ...], languages: str,
                 max_depth: int | None) -> None:
    """Expanded term set with the trace."""

    def action() -> None:
        portal = _open_portal(ctx.obj["data_dir"])
        langs = [s for s in languages.split(",") if s] or None
        _echo(portal.thesaurus.expand_query(list(terms), langs, max_depth).to_dict())

    _run(ctx, action)


@main.group()
def guide() -> None:
    """Research guides over themed sub-corpora."""


@guide.command("build")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.pass_context
def guide_build(ctx: click.Context, config_path: str) -> None:
    """Assemble and validate a guide from its config file."""

    def action() -> None:
        portal = _open_portal(ctx.obj["data_dir"])
        built = portal.build_guide(GuideConfig.load(config_path))
        _echo(built.to_dict())

    _run(ctx, action)


@guide.command("suggest-copies")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--threshold", default=0.85, type=float)
@click.option("--confirm", is_flag=True, help="Confirm every candidate found.")
@click.option("--source", default="", help="Assertion source text used with --confirm.")
@click.pass_context
def guide_suggest_copies(ctx: click.Context, config_path: str, threshold: float,
                         confirm: bool, source: str) -> None:
    """List (and optionally confirm) cross-archive copy candidates."""

    def action() -> None:
        portal = _open_portal(ctx.obj["data_dir"])
        built = portal.build_guide(GuideConfig.load(config_path))
        candidates = suggest_copies(built, portal.graph, threshold)
        confirmed = []
        if confirm:
            for candidate in candidates:
                assertion = portal.confirm_copy(built.guide_id, candidate.unit_a,
                                                candidate.unit_b, source)
                confirmed.append(assertion.to_dict())
            portal.save()
        _echo({"candidates": [c.to_dict() for c in candidates], "confirmed": confirmed})

    _run(ctx, action)


@guide.command("map")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.pass_context
def guide_map(ctx: click.Context, config_path: str) -> None:
    """Geographic feature collection for a guide."""

    def action() -> None:
        portal = _open_portal(ctx.obj["data_dir"])
        built = portal.build_guide(GuideConfig.load(config_path))
        _echo(map_features(built, portal.graph, portal.store))

    _run(ctx, action)


@guide.command("timeline")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--from", "from_text", default="0001")
@click.option("--to", "to_text", default="9999")
@click.pass_context
def guide_timeline(ctx: click.Context, config_path: str, from_text: str, to_text: str) -> None:
    """Events of a guide overlapping a date range."""

    def action() -> None:
        portal = _open_portal(ctx.obj["data_dir"])
        built = portal.build_guide(GuideConfig.load(config_path))
        events = timeline_query(built, portal.graph, from_text, to_text)
        _echo([e.to_dict() for e in events])

    _run(ctx, action)


@main.command()
@click.argument("snapshot", type=click.Path(exists=True))
@click.pass_context
def validate(ctx: click.Context, snapshot: str) -> None:
    """Load a snapshot and run the full structural invariant scan."""

    def action() -> None:
        graph = Graph.load(snapshot)
        problems = graph.check_invariants()
        _echo({"nodes": graph.node_count(), "edges": graph.edge_count(),
               "problems": problems})
        if problems:
            raise DomainError("invalid-snapshot", f"{len(problems)} invariant violation(s)")

    _run(ctx, action)


@main.command()
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_context
def export(ctx: click.Context, out_path: str) -> None:
    """Write the current registry to a snapshot file."""

    def action() -> None:
        portal = _open_portal(ctx.obj["data_dir"])
        portal.sync_vocab_nodes()
        count = portal.graph.snapshot(out_path)
        _echo({"records": count, "path": out_path})

    _run(ctx, action)


@main.command()
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", default=42, type=int)
@click.pass_context
def fixtures(ctx: click.Context, out_dir: str, seed: int) -> None:
    """Generate the synthetic four-archive fixture corpus."""

    def action() -> None:
        manifest = fixtures_mod.generate_fixtures(out_dir, seed)
        _echo(manifest.to_dict())

    _run(ctx, action)


@main.command()
@click.option("--fixtures", "fixture_dir", required=True, type=click.Path(exists=True),
              help="Directory produced by `nexus fixtures`.")
@click.pass_context
def bootstrap(ctx: click.Context, fixture_dir: str) -> None:
    """Load vocabulary, authorities, repositories, and events from a fixture
    directory (imports still go through `nexus ingest`)."""

    def action() -> None:
        base = Path(fixture_dir)
        portal = _open_portal(ctx.obj["data_dir"])
        loaded = {
            "thesaurus": portal.load_thesaurus_file(str(base / "thesaurus.tsv")),
            "persons": portal.load_persons_file(str(base / "persons.jsonl")),
            "concordance": portal.load_concordance_file(str(base / "concordance.tsv")),
            "places": portal.load_places_file(str(base / "places.jsonl")),
            "repositories": portal.load_repositories_file(str(base / "repositories.jsonl")),
            "events": portal.load_events_file(str(base / "events.jsonl")),
        }
        portal.save()
        _echo(loaded)

    _run(ctx, action)


if __name__ == "__main__":
    main()
