"""Command-line interface: generate, train, evaluate, serve.

Every failure prints a single machine-parseable line to stderr in the form
``error: <ExceptionType>: <message>`` and exits nonzero.
"""

from __future__ import annotations

import dataclasses
import json
import os
import sys
from pathlib import Path

import click

from .autoencoder import AutoencoderConfig
from .bundle import bundle_from_models, load_bundle, save_bundle
from .errors import ProtoPalError
from .evaluation import comparison_to_csv, evaluate_cohort, train_disease_models
from .lvq import TrainingConfig
from .schema import FeatureSchema, load_cohort, write_cohort
from .synthetic import config_from_file, demo_config, generate_synthetic_cohort

DEFAULT_ADDR = "127.0.0.1:8000"


def _fail(exc: BaseException) -> None:
    message = " ".join(str(exc).split()) or exc.__class__.__name__
    click.echo(f"error: {type(exc).__name__}: {message}", err=True)
    sys.exit(1)


_CAUGHT = (ProtoPalError, OSError, ValueError, TypeError, KeyError)


@click.group()
def main():
    """Prototype-based disease risk: synthetic cohorts, training, evaluation, serving."""


@main.command("generate")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Generator config JSON; omitted means the built-in demo cohort.")
@click.option("--seed", type=int, default=None, help="Override the config's seed.")
@click.option("--n", type=int, default=None, help="Override the cohort size.")
@click.option("--out", required=True, type=click.Path(), help="Cohort CSV output path.")
@click.option("--schema-out", type=click.Path(), default=None,
              help="Also write the feature schema JSON to this path.")
def generate(config_path, seed, n, out, schema_out):
    """Draw a synthetic cohort CSV; byte-identical for identical configs and seeds."""
    try:
        config = config_from_file(config_path) if config_path else demo_config()
        if seed is not None:
            config = dataclasses.replace(config, seed=seed)
        if n is not None:
            config = dataclasses.replace(config, n=n)
        dataset = generate_synthetic_cohort(config)
        write_cohort(dataset, out)
        if schema_out:
            Path(schema_out).write_text(config.schema.to_json() + "\n", encoding="utf-8")
        click.echo(f"wrote {len(dataset)} individuals to {out}")
        if schema_out:
            click.echo(f"wrote schema to {schema_out}")
    except _CAUGHT as exc:
        _fail(exc)


def _parse_train_config(path: str | None):
    obj = json.loads(Path(path).read_text(encoding="utf-8")) if path else {}
    if not isinstance(obj, dict):
        raise ValueError("training config JSON must be an object")
    k_min = int(obj.pop("k_min", 30))
    ae_config = AutoencoderConfig(**obj.pop("autoencoder", {}))
    disease_names = {str(k): str(v) for k, v in obj.pop("disease_names", {}).items()}
    return TrainingConfig(**obj), ae_config, k_min, disease_names


@main.command("train")
@click.option("--cohort", required=True, type=click.Path(), help="Training cohort CSV.")
@click.option("--schema", "schema_path", required=True, type=click.Path(),
              help="Feature schema JSON.")
@click.option("--diseases", default=None,
              help="Comma-separated ICD-10 codes; default: every labeled code in the cohort.")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Training config JSON (prototype counts, rates, epochs, seed, ...).")
@click.option("--out-bundle", required=True, type=click.Path(), help="Bundle output path.")
def train_command(cohort, schema_path, diseases, config_path, out_bundle):
    """Fit per-disease prototype models plus autoencoders and save one bundle."""
    try:
        schema = FeatureSchema.from_file(schema_path)
        dataset = load_cohort(cohort, schema)
        config, ae_config, k_min, disease_names = _parse_train_config(config_path)
        codes = ([c.strip() for c in diseases.split(",") if c.strip()]
                 if diseases else None)
        models = train_disease_models(dataset, codes, config=config,
                                      ae_config=ae_config, k_min=k_min,
                                      disease_names=disease_names)
        save_bundle(bundle_from_models(schema, models), out_bundle)
        click.echo(f"trained {len(models)} disease model(s) on {len(dataset)} individuals")
        for m in models:
            click.echo(f"  {m.disease}: final cost {m.final_cost:.6f}")
        click.echo(f"wrote bundle to {out_bundle}")
    except _CAUGHT as exc:
        _fail(exc)


@main.command("evaluate")
@click.option("--bundle", "bundle_path", required=True, type=click.Path(),
              help="Bundle whose schema and per-disease configs drive the evaluation.")
@click.option("--cohort", required=True, type=click.Path(), help="Evaluation cohort CSV.")
@click.option("--split-seed", type=int, default=0, show_default=True,
              help="Seed for the train/test shuffle.")
@click.option("--test-fraction", type=float, default=0.2, show_default=True)
@click.option("--out-table", required=True, type=click.Path(),
              help="Comparison table CSV output path.")
def evaluate_command(bundle_path, cohort, split_seed, test_fraction, out_table):
    """Refit on the train split and compare against the Cox baseline on the test split."""
    try:
        bundle = load_bundle(bundle_path)
        dataset = load_cohort(cohort, bundle.schema)
        codes = [m.disease for m in bundle.models]
        names = {m.disease: m.name for m in bundle.models}
        config = bundle.models[0].config if bundle.models else TrainingConfig()
        result = evaluate_cohort(dataset, codes, config=config,
                                 test_fraction=test_fraction, seed=split_seed,
                                 disease_names=names)
        Path(out_table).write_text(comparison_to_csv(result.table), encoding="utf-8")
        click.echo(f"train {result.n_train} / test {result.n_test}")
        for row in result.table.rows:
            cox = "-" if row.cox_auc is None else f"{row.cox_auc:.3f}"
            lvq = "-" if row.lvq_auc is None else f"{row.lvq_auc:.3f}"
            click.echo(f"  {row.disease}: cox auc {cox}, lvq auc {lvq}"
                       + (f" -> {row.winner}" if row.winner else ""))
        wins = result.table.wins()
        click.echo(f"wins: lvq {wins['lvq']}, cox {wins['cox']}, ties {wins['tie']}")
        click.echo(f"wrote table to {out_table}")
    except _CAUGHT as exc:
        _fail(exc)


@main.command("serve")
@click.option("--bundle", "bundle_path", required=True, type=click.Path(),
              help="Bundle to serve.")
@click.option("--addr", default=None,
              help="host:port bind address; default $PROTOPAL_ADDR or "
                   + DEFAULT_ADDR + ".")
def serve_command(bundle_path, addr):
    """Serve the HTTP API over a trained bundle."""
    try:
        import uvicorn

        from .api import create_app

        addr = addr or os.environ.get("PROTOPAL_ADDR") or DEFAULT_ADDR
        host, sep, port_text = addr.rpartition(":")
        if not sep or not host:
            raise ValueError(f"bind address must be host:port, got {addr!r}")
        port = int(port_text)
        app = create_app(bundle_path)
        click.echo(f"serving {bundle_path} on {host}:{port}")
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except _CAUGHT as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
