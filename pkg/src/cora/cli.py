"""Command-line interface: ingest, build, infer, whatif, explain, metrics,
template generalize/instantiate, serve.

``--format json`` output is byte-stable: canonical JSON (sorted keys,
compact separators) plus a trailing newline.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import builder, dsl, inference, kb as kb_mod, metrics as metrics_mod, model as model_mod
from .service import ServiceConfig, serve as run_service
from .util import canonical_json


def _echo_json(payload) -> None:
    click.echo(canonical_json(payload))


def _load_model(path: str) -> model_mod.CausalModel:
    text = Path(path).read_text(encoding="utf-8")
    try:
        if path.endswith(".dsl") or path.endswith(".cm"):
            return dsl.parse_model(text)
        return model_mod.from_json(json.loads(text))
    except (
        dsl.ModelSyntaxError,
        model_mod.SchemaError,
        json.JSONDecodeError,
    ) as exc:
        raise click.ClickException(f"{path}: {exc}")


def _write_or_print(document: dict, output: str | None) -> None:
    if output:
        Path(output).write_text(
            json.dumps(document, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
        click.echo(f"wrote {output}")
    else:
        _echo_json(document)


@click.group()
@click.version_option()
def main() -> None:
    """Qualitative causal reasoning over evidence-backed maps."""


@main.command()
@click.argument("events_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--kb", "kb_path", required=True, type=click.Path(file_okay=False))
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
def ingest(events_file: str, kb_path: str, fmt: str) -> None:
    """Ingest a JSONL stream of event records into a knowledge base."""
    with open(events_file, encoding="utf-8") as fh:
        lines = [line for line in fh if line.strip()]
    try:
        report = kb_mod.ingest_events(lines, kb_path)
    except kb_mod.KnowledgeBaseError as exc:
        raise click.ClickException(str(exc))
    if fmt == "json":
        _echo_json(report.to_dict())
    else:
        click.echo(f"accepted {report.accepted}, rejected {report.rejected}")
        for rejected in report.rejection_reasons:
            click.echo(f"  line {rejected.line}: {rejected.reason}", err=True)


@main.command()
@click.option("--kb", "kb_path", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--source", "sources", multiple=True, required=True,
              help="Concept label, optionally 'label=value'.")
@click.option("--target", required=True)
@click.option("--max-hops", default=6, show_default=True)
@click.option("--min-confidence", default=0.0, show_default=True)
@click.option("--heuristic", default="trigram", show_default=True)
@click.option("--top-k", default=None, type=int)
@click.option("-o", "--output", type=click.Path(dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
def build(kb_path: str, sources: tuple[str, ...], target: str, max_hops: int,
          min_confidence: float, heuristic: str, top_k: int | None,
          output: str | None, fmt: str) -> None:
    """Build a causal map from KB evidence connecting sources to a target."""
    source_specs: list = []
    for item in sources:
        if "=" in item:
            label, value = item.split("=", 1)
            source_specs.append({"concept": label, "value": value})
        else:
            source_specs.append(item)
    try:
        kb = kb_mod.KnowledgeBase.load(kb_path)
        result = builder.build_map(
            kb, source_specs, target,
            params=builder.SearchParams(
                max_hops=max_hops, min_confidence=min_confidence,
                heuristic=heuristic, top_k=top_k,
            ),
        )
    except (kb_mod.KnowledgeBaseError, builder.BuildError) as exc:
        raise click.ClickException(str(exc))
    document = model_mod.to_json(result.model)
    if fmt == "json" and not output:
        _echo_json({"map": document, "diagnostics": result.diagnostics.to_dict()})
        return
    if output:
        _write_or_print(document, output)
    diag = result.diagnostics
    click.echo(
        f"{len(result.model.nodes)} nodes, {len(result.model.edges)} edges; "
        f"paths retained {diag.paths_retained}/{diag.paths_found}"
    )
    for note in diag.notes:
        click.echo(f"  note: {note}")
    if diag.unmapped_predicates:
        click.echo(f"  unmapped predicates: {dict(sorted(diag.unmapped_predicates.items()))}")


def _infer_params(tau: float, max_hops: int) -> inference.InferenceParams:
    try:
        return inference.InferenceParams(tau=tau, max_path_len=max_hops)
    except inference.InferenceError as exc:
        raise click.ClickException(str(exc))


@main.command("infer")
@click.argument("map_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--tau", default=inference.DEFAULT_TAU, show_default=True)
@click.option("--max-hops", default=inference.DEFAULT_MAX_PATH_LEN, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
def infer_cmd(map_file: str, tau: float, max_hops: int, fmt: str) -> None:
    """Run causal inference on a map's scenario."""
    model = _load_model(map_file)
    try:
        result = inference.infer(model, _infer_params(tau, max_hops))
    except inference.InferenceError as exc:
        raise click.ClickException(str(exc))
    if fmt == "json":
        _echo_json(result.to_dict())
    else:
        click.echo(result.explanation)


@main.command("whatif")
@click.argument("map_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--edits", "edits_file", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--tau", default=inference.DEFAULT_TAU, show_default=True)
@click.option("--max-hops", default=inference.DEFAULT_MAX_PATH_LEN, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
def whatif_cmd(map_file: str, edits_file: str, tau: float, max_hops: int, fmt: str) -> None:
    """Apply an edit set (JSON array) and re-run inference; the map file is untouched."""
    model = _load_model(map_file)
    raw = json.loads(Path(edits_file).read_text(encoding="utf-8"))
    if isinstance(raw, dict) and "edits" in raw:
        raw = raw["edits"]
    try:
        edits = inference.parse_edits(raw)
        result = inference.whatif(model, edits, _infer_params(tau, max_hops))
    except (inference.EditRejection, inference.InferenceError) as exc:
        raise click.ClickException(str(exc))
    if fmt == "json":
        _echo_json(result.to_dict())
    else:
        click.echo(result.explanation)


@main.command("explain")
@click.argument("map_file", type=click.Path(exists=True, dir_okay=False))
@click.option("-k", "top_k", default=inference.DEFAULT_EXPLAIN_TOP_K, show_default=True)
@click.option("--tau", default=inference.DEFAULT_TAU, show_default=True)
@click.option("--max-hops", default=inference.DEFAULT_MAX_PATH_LEN, show_default=True)
def explain_cmd(map_file: str, top_k: int, tau: float, max_hops: int) -> None:
    """Infer and print the pressure-grouped explanation with top-k chains."""
    model = _load_model(map_file)
    try:
        result = inference.infer(model, _infer_params(tau, max_hops))
        click.echo(inference.explain(result, top_k))
    except (inference.InferenceError, ValueError) as exc:
        raise click.ClickException(str(exc))


@main.command("metrics")
@click.argument("annotations_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--complexity", "complexity_file",
              type=click.Path(exists=True, dir_okay=False))
@click.option("--count-all-citations", is_flag=True, default=False)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
def metrics_cmd(annotations_file: str, complexity_file: str | None,
                count_all_citations: bool, fmt: str) -> None:
    """Compute answer-verifiability metrics from an annotation file."""
    try:
        annotations = metrics_mod.annotations_from_json(
            json.loads(Path(annotations_file).read_text(encoding="utf-8"))
        )
        complexity = None
        if complexity_file:
            complexity = metrics_mod.complexity_from_json(
                json.loads(Path(complexity_file).read_text(encoding="utf-8"))
            )
        report = metrics_mod.compute_metrics(
            annotations, complexity, count_all_citations=count_all_citations
        )
    except (metrics_mod.AnnotationError, json.JSONDecodeError) as exc:
        raise click.ClickException(str(exc))
    if fmt == "json":
        # insertion order is the table's column order; keep it
        click.echo(json.dumps(report.to_dict(), ensure_ascii=False))
    else:
        click.echo(report.to_text())


@main.group()
def template() -> None:
    """Research templates: generalize a map, instantiate with bindings."""


@template.command("generalize")
@click.argument("map_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--kb", "kb_path", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False))
def template_generalize(map_file: str, kb_path: str, output: str | None) -> None:
    """Typed nodes become slots; the edge structure is preserved."""
    model = _load_model(map_file)
    try:
        kb = kb_mod.KnowledgeBase.load(kb_path)
        tpl = builder.generalize_map(model, kb.types)
    except (kb_mod.KnowledgeBaseError, builder.BuildError) as exc:
        raise click.ClickException(str(exc))
    _write_or_print(tpl.to_json(), output)


@template.command("instantiate")
@click.argument("template_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--bind", "bindings", multiple=True, required=True,
              help="slot=concept, e.g. '?x1=methotrexate'.")
@click.option("--kb", "kb_path", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False))
def template_instantiate(template_file: str, bindings: tuple[str, ...],
                         kb_path: str, output: str | None) -> None:
    """Bind slots to concrete concepts and re-evidence edges from the KB."""
    binding_map: dict[str, str] = {}
    for item in bindings:
        if "=" not in item:
            raise click.ClickException(f"binding '{item}' must look like slot=concept")
        slot, concept = item.split("=", 1)
        binding_map[slot] = concept
    try:
        kb = kb_mod.KnowledgeBase.load(kb_path)
        tpl = builder.template_from_json(
            json.loads(Path(template_file).read_text(encoding="utf-8"))
        )
        instantiated = builder.instantiate_template(tpl, binding_map, kb)
    except (kb_mod.KnowledgeBaseError, builder.BuildError, model_mod.SchemaError) as exc:
        raise click.ClickException(str(exc))
    _write_or_print(model_mod.to_json(instantiated), output)


@main.command("serve")
@click.option("--port", default=None, type=int, help="Overrides CORA_PORT.")
@click.option("--kb", "kb_path", default=None, help="Overrides CORA_KB.")
@click.option("--maps-dir", default=None, help="Overrides CORA_MAPS.")
@click.option("--ui-dir", default=None, help="Overrides CORA_UI.")
def serve_cmd(port: int | None, kb_path: str | None, maps_dir: str | None,
              ui_dir: str | None) -> None:
    """Run the HTTP service."""
    try:
        config = ServiceConfig.from_env(
            port=port, kb_path=kb_path, maps_dir=maps_dir, ui_dir=ui_dir
        )
        run_service(config)
    except (ValueError, kb_mod.KnowledgeBaseError) as exc:
        raise click.ClickException(str(exc))


def run_cli(argv: list[str]) -> int:
    """Programmatic entry point; returns the exit code."""
    try:
        main.main(args=argv, standalone_mode=False)
        return 0
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.exceptions.Exit as exc:  # --help and friends
        return exc.exit_code
    except click.exceptions.Abort:
        return 130


if __name__ == "__main__":
    main()
