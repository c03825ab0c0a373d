"""Command-line mirror of the staged workflow.

A data directory (``prime ingest``) records the validated input sources; an
output directory carries the stage state (``state.json``) plus the report
bundle files.  Later stages replay the recorded parameters through the same
pipeline functions the HTTP service uses, so CLI and API outputs match byte
for byte.

Exit codes: 0 ok, 2 validation error, 3 data error, 4 internal error.
"""

from __future__ import annotations

import functools
import json
import sys
import traceback
import warnings
from pathlib import Path

import click

from . import pipeline, report
from .features import correlation_matrix
from .errors import DataError, SchemaError, StepOrderError, ValidationError
from .models import FAMILIES
from .synthetic import generate_synthetic

FAMILY_ALIASES = {
    "rf": "random_forest",
    "gbt": "gradient_boosted_trees",
    "xgb": "gradient_boosted_trees",
    "poly": "polynomial",
}


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ValidationError as exc:
            click.echo(f"validation error: {exc}", err=True)
            sys.exit(2)
        except (SchemaError, DataError, StepOrderError) as exc:
            click.echo(f"data error: {exc}", err=True)
            sys.exit(3)
        except click.ClickException:
            raise
        except Exception as exc:  # noqa: BLE001 - last-resort boundary
            click.echo(f"internal error: {exc}", err=True)
            traceback.print_exc()
            sys.exit(4)
    return wrapper


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(report.dump_json(obj))


def _read_json(path: Path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _load_dataset(data_dir: Path) -> pipeline.LoadedData:
    meta_path = Path(data_dir) / "dataset.json"
    if not meta_path.exists():
        raise DataError(f"{meta_path} not found; run `prime ingest` first")
    meta = _read_json(meta_path)
    src = meta["sources"]
    data = pipeline.load_inputs(src["hazards"], src["population"], src["socio"],
                                geometry=src.get("geometry"),
                                region_pattern=meta.get("region_pattern",
                                                        r"^\d{5}$"),
                                loess_span=meta.get("loess_span", 0.75))
    for name, digest in meta["digests"].items():
        if data.digests.get(name) != digest:
            raise DataError(f"input file {src[name]} changed since ingest "
                            f"(digest mismatch); re-run `prime ingest`")
    return data


def _load_state(out_dir: Path) -> dict:
    state_path = Path(out_dir) / "state.json"
    if not state_path.exists():
        raise StepOrderError(f"{state_path} not found; run `prime score` first")
    return _read_json(state_path)


def _replay(state: dict, need: str):
    """Re-run recorded stages up to ``need`` ('scores'|'aligned'|'pruned')."""
    data = _load_dataset(Path(state["data_dir"]))
    fp = state["filter"]
    params = pipeline.FilterParams(
        years=tuple(fp["years"]), hazard_types=fp["hazard_types"],
        regions=fp["regions"], region_prefixes=fp["region_prefixes"],
        aggregation=fp["aggregation"], pooled=fp["pooled"],
        damage_note=fp["damage_note"])
    scores = pipeline.run_scoring(data, params)
    if need == "scores":
        return data, params, scores, None, None
    aligned = pipeline.build_aligned(data, scores)
    if need == "aligned":
        return data, params, scores, aligned, None
    prune_params = state.get("prune")
    pruning_report = None
    if prune_params:
        aligned, pruning_report = pipeline.run_pruning(
            aligned, mode=prune_params["mode"],
            threshold=prune_params.get("threshold") or 0.7,
            names=prune_params.get("names"))
    return data, params, scores, aligned, pruning_report


@click.group()
def main():
    """PRIME: resilience scoring and socioeconomic driver inference."""


@main.command()
@click.option("--hazards", required=True, type=click.Path(exists=True))
@click.option("--population", required=True, type=click.Path(exists=True))
@click.option("--socio", required=True, type=click.Path(exists=True))
@click.option("--geometry", type=click.Path(exists=True))
@click.option("--data", "data_dir", default="prime_data", type=click.Path())
@click.option("--region-pattern", default=r"^\d{5}$", show_default=True)
@click.option("--loess-span", default=0.75, show_default=True)
@_handle_errors
def ingest(hazards, population, socio, geometry, data_dir, region_pattern, loess_span):
    """Validate the input files and record them as the active dataset."""
    data = pipeline.load_inputs(hazards, population, socio, geometry=geometry,
                                region_pattern=region_pattern,
                                loess_span=loess_span)
    data_dir = Path(data_dir)
    meta = {
        "sources": {k: str(Path(v).resolve()) for k, v in data.sources.items()},
        "digests": data.digests,
        "region_pattern": region_pattern,
        "loess_span": loess_span,
        "coverage": data.coverage(),
    }
    _write_json(data_dir / "dataset.json", meta)
    _write_json(data_dir / "ingest_report.json", {
        "hazards": data.hazard_report.to_dict(),
        "socio_interpolation": data.socio_report.to_dict(),
        "geometry_notes": data.geometry_notes,
    })
    click.echo(f"loaded {data.hazard_report.accepted} events "
               f"({len(data.hazard_report.rejected)} rejected), "
               f"{len(data.population.regions)} regions; dataset registered in "
               f"{data_dir}")


@main.command()
@click.option("--years", required=True, help="inclusive window, e.g. 2000:2020")
@click.option("--hazards", "hazard_types", default=None,
              help="comma-separated hazard type whitelist")
@click.option("--regions", default=None, help="comma-separated region codes")
@click.option("--prefix", "prefixes", default=None,
              help="comma-separated region code prefixes")
@click.option("--agg", "aggregation", default="per-year",
              type=click.Choice(["per-year", "whole-window"]), show_default=True)
@click.option("--pooled", is_flag=True,
              help="normalize yearly scores across all years at once")
@click.option("--damage-note", default="")
@click.option("--data", "data_dir", default="prime_data", type=click.Path())
@click.option("--out", "out_dir", default="prime_out", type=click.Path())
@_handle_errors
def score(years, hazard_types, regions, prefixes, aggregation, pooled,
          damage_note, data_dir, out_dir):
    """Filter the disaster data and compute region scores and map layers."""
    try:
        y0, y1 = (int(p) for p in years.split(":"))
    except ValueError:
        raise ValidationError(f"--years expects A:B, got {years!r}", field="years")
    params = pipeline.FilterParams(
        years=(y0, y1),
        hazard_types=hazard_types.split(",") if hazard_types else None,
        regions=regions.split(",") if regions else None,
        region_prefixes=prefixes.split(",") if prefixes else [],
        aggregation=aggregation, pooled=pooled, damage_note=damage_note)
    data = _load_dataset(Path(data_dir))
    scores = pipeline.run_scoring(data, params)

    out = Path(out_dir)
    bundle = pipeline.build_output_bundle(data, scores,
                                          filter_params=params.to_dict())
    report.write_bundle(out, bundle)
    _write_json(out / "state.json", {
        "data_dir": str(Path(data_dir).resolve()),
        "filter": params.to_dict(),
    })
    _write_json(out / "scoring_report.json", {
        "excluded_region_years": scores.excluded,
        "hazard_stats": {k: {"likelihood": v.likelihood, "weightage": v.weightage}
                         for k, v in sorted(scores.hazard_stats.items())},
    })
    click.echo(f"scored {len(scores.display_rows)} region-year rows "
               f"({len(scores.excluded)} excluded); wrote {out}/scores.csv and layers/")


@main.command()
@click.option("--out", "out_dir", default="prime_out", type=click.Path())
@_handle_errors
def corr(out_dir):
    """Print and export the feature correlation matrix."""
    state = _load_state(Path(out_dir))
    data, params, scores, aligned, _ = _replay(state, "aligned")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        matrix, names = correlation_matrix(aligned)
    out = Path(out_dir)
    bundle = report.build_bundle(corr=matrix, corr_names=names)
    report.write_bundle(out, bundle)
    width = max(len(n) for n in names)
    click.echo(" " * width + "  " + "  ".join(f"{n[:7]:>7}" for n in names))
    for i, n in enumerate(names):
        click.echo(f"{n:>{width}}  " + "  ".join(f"{matrix[i, j]:7.3f}"
                                                 for j in range(len(names))))
    click.echo(f"wrote {out}/correlation.csv and correlation.json")


@main.command()
@click.option("--threshold", type=float, default=None,
              help="|r| threshold for automatic removal")
@click.option("--drop", "names", default=None,
              help="comma-separated names to remove manually")
@click.option("--out", "out_dir", default="prime_out", type=click.Path())
@_handle_errors
def prune(threshold, names, out_dir):
    """Remove collinear (or manually chosen) socioeconomic variables."""
    if threshold is None and not names:
        raise ValidationError("pass --threshold and/or --drop", field="mode")
    state = _load_state(Path(out_dir))
    data, params, scores, aligned, _ = _replay(state, "aligned")
    mode = "threshold" if threshold is not None else "manual"
    name_list = names.split(",") if names else None
    pruned, rep = pipeline.run_pruning(aligned, mode=mode,
                                       threshold=threshold or 0.7,
                                       names=name_list)
    out = Path(out_dir)
    report.write_bundle(out, report.build_bundle(pruning=rep))
    state["prune"] = {"mode": mode, "threshold": threshold, "names": name_list}
    _write_json(out / "state.json", state)
    click.echo(f"retained {len(rep['retained'])} of "
               f"{len(rep['retained']) + len(rep['removed'])} variables "
               f"({len(rep['removed'])} removed); wrote {out}/pruning.json")


@main.command()
@click.option("--families", default="linear",
              help=f"comma-separated from {','.join(FAMILIES)} (aliases rf, gbt)")
@click.option("--targets", default="all",
              help="comma-separated targets, or 'all'")
@click.option("--split", "split_fraction", default=0.8, show_default=True)
@click.option("--seed", default=42, show_default=True)
@click.option("--folds", default=5, show_default=True)
@click.option("--causal", "run_causal", is_flag=True,
              help="also learn a bootstrap DAG per target")
@click.option("--causal-b", default=100, show_default=True,
              help="bootstrap replicates for --causal")
@click.option("--out", "out_dir", default="prime_out", type=click.Path())
@_handle_errors
def train(families, targets, split_fraction, seed, folds, run_causal,
          causal_b, out_dir):
    """Tune, train, and evaluate the model zoo; write the report bundle."""
    state = _load_state(Path(out_dir))
    data, params, scores, aligned, pruning_report = _replay(state, "pruned")
    family_list = [FAMILY_ALIASES.get(f.strip(), f.strip())
                   for f in families.split(",")]
    target_list = (["all"] if targets.strip() == "all"
                   else [t.strip() for t in targets.split(",")])
    tp = pipeline.TrainParams(
        families=family_list, targets=target_list,
        split_fraction=split_fraction, seed=seed, run_causal=run_causal,
        cv_folds=folds, causal_options={"B": causal_b, "seed": seed})
    result = pipeline.run_training(aligned, tp)
    out = Path(out_dir)
    bundle = pipeline.build_output_bundle(
        data, scores, aligned=aligned, pruning_report=pruning_report,
        train=result, filter_params=params.to_dict(),
        prune_params=state.get("prune"), train_params=tp.to_dict())
    report.write_bundle(out, bundle)
    state["train"] = tp.to_dict()
    _write_json(out / "state.json", state)
    click.echo((out / "metrics.txt").read_text())
    click.echo(f"wrote report bundle to {out}")


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data", "data_dir", default="prime_data", type=click.Path())
@click.option("--static", "static_dir", default=None, type=click.Path(),
              help="workbench bundle directory to serve at /")
@_handle_errors
def serve(port, host, data_dir, static_dir):
    """Run the HTTP service over the ingested dataset."""
    import uvicorn

    from .service import create_app

    data = _load_dataset(Path(data_dir))
    app = create_app(data, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.option("--out", "out_dir", default="synthetic_data", type=click.Path())
@click.option("--regions", "n_regions", default=200, show_default=True)
@click.option("--years", default="2000:2020", show_default=True)
@click.option("--seed", default=None, type=int)
@_handle_errors
def synth(out_dir, n_regions, years, seed):
    """Generate the bundled synthetic study area with known ground truth."""
    y0, y1 = (int(p) for p in years.split(":"))
    kwargs = {"n_regions": n_regions, "years": (y0, y1)}
    if seed is not None:
        kwargs["seed"] = seed
    paths = generate_synthetic(out_dir, **kwargs)
    click.echo("\n".join(f"{k}: {v}" for k, v in paths.items()))


if __name__ == "__main__":
    main()
