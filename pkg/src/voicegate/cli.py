"""Command-line front end.

Model files follow a directory convention shared by every subcommand:
``<axis>.vgm`` for float models and ``<axis>.int8.vgm`` for quantized
ones, e.g. ``GoogleTrait.vgm``. Subcommands that produce data accept
``--out`` for a machine-readable JSON report; without it the report goes to
stdout.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .errors import GatewayUnreachableError
from .gateway.app import create_app
from .gateway.audit import AuditLog
from .gateway.challenges import DEFAULT_TTL_MS
from .gateway.service import Gateway
from .harness.bench import DEFAULT_RUNS, DEFAULT_WARMUP, bench_latency
from .harness.evalmatrix import eval_matrix, eval_sensitive
from .harness.scenarios import default_scenarios, run_scenarios
from .noise import NoiseSpec, corrupt_text, vocabulary_from_texts
from .nlu.classifier import Hyperparams
from .nlu.io import load_model, save_model
from .nlu.metrics import evaluate
from .nlu.model import predict, quantize, train
from .policy import decide, default_policy, load_policy
from .resources import default_generator_spec
from .taxonomy import (
    AXES_BY_PLATFORM,
    Corpus,
    GeneratorSpec,
    Platform,
    TaxonomyAxis,
    corpus_stats,
    generate_synthetic_corpus,
    load_corpus,
    save_corpus,
    split_corpus,
)

_PLATFORM_NAMES = [p.value for p in Platform]
_AXIS_NAMES = [a.value for a in TaxonomyAxis]


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        click.echo(text)


def _model_path(models_dir: str | Path, axis: TaxonomyAxis, quantized: bool) -> Path:
    suffix = ".int8.vgm" if quantized else ".vgm"
    return Path(models_dir) / f"{axis.value}{suffix}"


def _load_platform_models(models_dir: str, platform: Platform, quantized: bool):
    models = {}
    for axis in AXES_BY_PLATFORM[platform]:
        path = _model_path(models_dir, axis, quantized)
        if not path.exists():
            raise click.UsageError(f"missing model file {path}")
        models[axis] = load_model(path)
    return models


def _parse_op_mix(value: str) -> tuple[float, float, float]:
    parts = [p.strip() for p in value.split(",")]
    if len(parts) != 3:
        raise click.BadParameter("op-mix needs three comma-separated probabilities")
    return tuple(float(p) for p in parts)  # type: ignore[return-value]


def _noise_spec_for(corpus: Corpus, wer: float, seed: int, op_mix: str) -> NoiseSpec:
    return NoiseSpec(
        target_wer=wer,
        op_mix=_parse_op_mix(op_mix),
        vocabulary=vocabulary_from_texts(u.text for u in corpus),
        seed=seed,
    )


@click.group()
def main():
    """Access-control gateway for voice-assistant commands."""


@main.command("gen-corpus")
@click.option("--platform", type=click.Choice(_PLATFORM_NAMES + ["both"]), default="both")
@click.option("--spec", "spec_path", type=click.Path(exists=True), default=None,
              help="Custom generator spec (JSON); default uses the shipped ones.")
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--corpus-out", type=click.Path(), required=True, help="Corpus JSONL destination.")
@click.option("--out", type=click.Path(), default=None, help="Stats report path.")
def gen_corpus(platform: str, spec_path: str | None, seed: int, corpus_out: str, out: str | None):
    """Generate a labeled synthetic corpus from template specs."""
    if spec_path is not None:
        specs = [GeneratorSpec.from_file(spec_path)]
    elif platform == "both":
        specs = [default_generator_spec(p) for p in Platform]
    else:
        specs = [default_generator_spec(Platform(platform))]

    utterances = []
    inventory = None
    for spec in specs:
        part = generate_synthetic_corpus(spec, seed=seed)
        inventory = part.inventory
        utterances.extend(part.utterances)
    corpus = Corpus(tuple(utterances), inventory, provenance=f"gen-corpus(seed={seed})")
    save_corpus(corpus, corpus_out)
    _emit({"size": len(corpus), "stats": corpus_stats(corpus).to_dict()}, out)


@main.command()
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), required=True)
@click.option("--ratio", type=float, default=0.85, show_default=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--train-out", type=click.Path(), required=True)
@click.option("--test-out", type=click.Path(), required=True)
@click.option("--out", type=click.Path(), default=None)
def split(corpus_path: str, ratio: float, seed: int, train_out: str, test_out: str, out: str | None):
    """Split a corpus into train/test by unique normalized text."""
    corpus = load_corpus(corpus_path)
    result = split_corpus(corpus, ratio=ratio, seed=seed)
    save_corpus(result.train, train_out)
    save_corpus(result.test, test_out)
    _emit(
        {
            "ratio": ratio,
            "seed": seed,
            "total": len(corpus),
            "train_size": len(result.train),
            "test_size": len(result.test),
        },
        out,
    )


@main.command("train")
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), required=True)
@click.option("--platform", type=click.Choice(_PLATFORM_NAMES), required=True)
@click.option("--axis", type=click.Choice(_AXIS_NAMES), required=True)
@click.option("--model-out", type=click.Path(), required=True)
@click.option("--epochs", type=int, default=30, show_default=True)
@click.option("--batch-size", type=int, default=32, show_default=True)
@click.option("--learning-rate", type=float, default=0.1, show_default=True)
@click.option("--l2", type=float, default=1e-4, show_default=True)
@click.option("--feature-dim", type=int, default=2**18, show_default=True)
@click.option("--ngram-max", type=int, default=2, show_default=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--out", type=click.Path(), default=None)
def train_cmd(
    corpus_path: str,
    platform: str,
    axis: str,
    model_out: str,
    epochs: int,
    batch_size: int,
    learning_rate: float,
    l2: float,
    feature_dim: int,
    ngram_max: int,
    seed: int,
    out: str | None,
):
    """Train one (platform, axis) classifier and save it."""
    hp = Hyperparams(
        epochs=epochs,
        batch_size=batch_size,
        learning_rate=learning_rate,
        l2=l2,
        feature_dim=feature_dim,
        ngram_max=ngram_max,
        seed=seed,
    )
    corpus = load_corpus(corpus_path)
    model = train(corpus, (Platform(platform), TaxonomyAxis(axis)), hp)
    save_model(model, model_out)
    _emit(
        {
            "model": model_out,
            "platform": platform,
            "axis": axis,
            "classes": list(model.classes),
            "loss_history": list(model.loss_history),
            "file_bytes": Path(model_out).stat().st_size,
        },
        out,
    )


@main.command("quantize")
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--model-out", type=click.Path(), required=True)
@click.option("--out", type=click.Path(), default=None)
def quantize_cmd(model_path: str, model_out: str, out: str | None):
    """Post-training int8 quantization of a float model file."""
    model = load_model(model_path)
    quantized = quantize(model)
    save_model(quantized, model_out)
    _emit(
        {
            "model": model_out,
            "float_bytes": Path(model_path).stat().st_size,
            "int8_bytes": Path(model_out).stat().st_size,
        },
        out,
    )


@main.command("eval")
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), default=None)
def eval_cmd(model_path: str, corpus_path: str, out: str | None):
    """Clean-text accuracy report for one model."""
    model = load_model(model_path)
    report = evaluate(model, load_corpus(corpus_path))
    _emit(report.to_dict(), out)


@main.command("eval-matrix")
@click.option("--models-dir", type=click.Path(exists=True), required=True)
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), required=True)
@click.option("--wer", type=float, default=0.15, show_default=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--op-mix", default="0.6,0.2,0.2", show_default=True)
@click.option("--out", type=click.Path(), default=None)
def eval_matrix_cmd(models_dir: str, corpus_path: str, wer: float, seed: int, op_mix: str, out: str | None):
    """NLU vs E2E accuracy for every model found in the directory."""
    corpus = load_corpus(corpus_path)
    spec = _noise_spec_for(corpus, wer, seed, op_mix)
    models = []
    for axis in TaxonomyAxis:
        for quantized in (False, True):
            path = _model_path(models_dir, axis, quantized)
            if path.exists():
                models.append(load_model(path))
    if not models:
        raise click.UsageError(f"no model files found in {models_dir}")
    matrix = eval_matrix(models, corpus, spec)
    click.echo(matrix.render())
    _emit(matrix.to_dict(), out)


@main.command("eval-sensitive")
@click.option("--models-dir", type=click.Path(exists=True), required=True)
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), required=True)
@click.option("--platform", type=click.Choice(_PLATFORM_NAMES), required=True)
@click.option("--policy", "policy_path", type=click.Path(exists=True), default=None)
@click.option("--quantized", is_flag=True, default=False)
@click.option("--out", type=click.Path(), default=None)
def eval_sensitive_cmd(
    models_dir: str,
    corpus_path: str,
    platform: str,
    policy_path: str | None,
    quantized: bool,
    out: str | None,
):
    """Binary sensitive-class precision/recall under a policy."""
    plat = Platform(platform)
    corpus = load_corpus(corpus_path)
    models = _load_platform_models(models_dir, plat, quantized)
    policy = load_policy(policy_path) if policy_path else default_policy(plat)
    report = eval_sensitive(models, corpus, policy)
    _emit(report.to_dict(), out)


@main.command()
@click.option("--models-dir", type=click.Path(exists=True), required=True)
@click.option("--platform", type=click.Choice(_PLATFORM_NAMES), required=True)
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), required=True)
@click.option("--runs", type=int, default=DEFAULT_RUNS, show_default=True)
@click.option("--warmup", type=int, default=DEFAULT_WARMUP, show_default=True)
@click.option("--quantized", is_flag=True, default=False)
@click.option("--out", type=click.Path(), default=None)
def bench(
    models_dir: str,
    platform: str,
    corpus_path: str,
    runs: int,
    warmup: int,
    quantized: bool,
    out: str | None,
):
    """Latency of the local pipeline (normalize, predict per axis, decide)."""
    plat = Platform(platform)
    models = _load_platform_models(models_dir, plat, quantized)
    corpus = load_corpus(corpus_path)
    texts = [u.text for u in corpus.for_platform(plat)]
    sizes = {}
    for axis in AXES_BY_PLATFORM[plat]:
        for quant in (False, True):
            path = _model_path(models_dir, axis, quant)
            if path.exists():
                sizes[path.name] = path.stat().st_size
    report = bench_latency(
        models,
        default_policy(plat),
        texts,
        n_runs=runs,
        warmup=warmup,
        model_file_sizes=sizes,
    )
    click.echo(report.render())
    _emit(report.to_dict(), out)


@main.command("decide")
@click.option("--models-dir", type=click.Path(exists=True), required=True)
@click.option("--platform", type=click.Choice(_PLATFORM_NAMES), required=True)
@click.option("--text", required=True)
@click.option("--policy", "policy_path", type=click.Path(exists=True), default=None)
@click.option("--quantized", is_flag=True, default=False)
@click.option("--out", type=click.Path(), default=None)
def decide_cmd(
    models_dir: str,
    platform: str,
    text: str,
    policy_path: str | None,
    quantized: bool,
    out: str | None,
):
    """One-shot local decision for a command, no server required."""
    plat = Platform(platform)
    models = _load_platform_models(models_dir, plat, quantized)
    policy = load_policy(policy_path) if policy_path else default_policy(plat)
    predictions = {axis: predict(models[axis], text) for axis in AXES_BY_PLATFORM[plat]}
    decision = decide(policy, predictions)
    _emit(
        {
            "text": text,
            "decision": decision.to_dict(),
            "predictions": {
                axis.value: [[label.name, prob] for label, prob in pred.ranking[:3]]
                for axis, pred in predictions.items()
            },
        },
        out,
    )


@main.command()
@click.option("--models-dir", type=click.Path(exists=True), required=True)
@click.option("--audit", "audit_path", type=click.Path(), default="audit.jsonl", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--policy", "policy_paths", multiple=True,
              help="platform=path override; default uses the shipped policies.")
@click.option("--ttl-ms", type=int, default=DEFAULT_TTL_MS, show_default=True)
@click.option("--quantized", is_flag=True, default=False)
@click.option("--wer", type=float, default=0.15, show_default=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--op-mix", default="0.6,0.2,0.2", show_default=True)
def serve(
    models_dir: str,
    audit_path: str,
    host: str,
    port: int,
    policy_paths: tuple[str, ...],
    ttl_ms: int,
    quantized: bool,
    wer: float,
    seed: int,
    op_mix: str,
):
    """Run the REST gateway with models found in the directory."""
    import uvicorn

    models = {}
    for platform in Platform:
        try:
            models.update(_load_platform_models(models_dir, platform, quantized))
        except click.UsageError:
            pass  # serve whatever platforms have models; healthz reports the rest
    if not models:
        raise click.UsageError(f"no usable model pairs in {models_dir}")

    policies = {}
    overrides = dict(p.split("=", 1) for p in policy_paths)
    for platform in Platform:
        if platform.value in overrides:
            policies[platform] = load_policy(overrides[platform.value])
        else:
            policies[platform] = default_policy(platform)

    vocab = []
    for platform in Platform:
        spec = default_generator_spec(platform)
        corpus = generate_synthetic_corpus(spec, seed=seed)
        vocab.extend(u.text for u in corpus)
    noise_spec = NoiseSpec(
        target_wer=wer,
        op_mix=_parse_op_mix(op_mix),
        vocabulary=vocabulary_from_texts(vocab),
        seed=seed,
    )

    gateway = Gateway(
        models=models,
        policies=policies,
        audit=AuditLog(audit_path),
        noise_spec=noise_spec,
        challenge_ttl_ms=ttl_ms,
    )
    uvicorn.run(create_app(gateway), host=host, port=port, log_level="warning")


@main.command()
@click.option("--endpoint", default="http://127.0.0.1:8000", show_default=True)
@click.option("--out", type=click.Path(), default=None)
def simulate(endpoint: str, out: str | None):
    """Run the four access-control scenarios against a running gateway."""
    try:
        results = run_scenarios(default_scenarios(), base_url=endpoint)
    except GatewayUnreachableError as exc:
        raise click.ClickException(f"gateway unreachable at {endpoint}: {exc}")
    for result in results:
        status = "pass" if result.passed else f"FAIL ({result.detail})"
        click.echo(f"{result.name:28} {status}")
    _emit({"scenarios": [r.to_dict() for r in results]}, out)
    if not all(r.passed for r in results):
        sys.exit(1)


@main.command("corrupt")
@click.option("--wer", type=float, default=0.15, show_default=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--op-mix", default="0.6,0.2,0.2", show_default=True)
@click.option("--vocab-corpus", type=click.Path(exists=True), required=True,
              help="Corpus JSONL supplying the substitution vocabulary.")
def corrupt_cmd(wer: float, seed: int, op_mix: str, vocab_corpus: str):
    """Noise-channel filter: reads lines on stdin, writes corrupted lines."""
    corpus = load_corpus(vocab_corpus)
    spec = _noise_spec_for(corpus, wer, seed, op_mix)
    for line in sys.stdin:
        line = line.strip()
        if line:
            click.echo(corrupt_text(line, spec))


if __name__ == "__main__":
    main()
