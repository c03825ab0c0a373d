"""The staged analysis workflow shared by the CLI and the HTTP service.

Stages: load inputs -> filter/score -> align + scale -> (inspect correlation)
-> prune -> train (+ optional causal structure learning) -> report bundle.
Both interfaces drive these functions with the same parameters, so their
analytical outputs are identical byte for byte.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import causal as causal_mod
from . import features as features_mod
from . import ingest, report, scoring
from .errors import DataError, ValidationError
from .models import DEFAULT_GRIDS, FAMILIES, ModelSpec, run_model_suite

VERSION = "0.1.0"


@dataclass
class LoadedData:
    events: list
    hazard_report: ingest.LoadReport
    population: ingest.PopulationPanel
    socio: ingest.SocioPanel
    socio_report: ingest.InterpolationReport
    geometry: ingest.RegionGeometry | None
    geometry_notes: list[str]
    digests: dict[str, str]
    sources: dict[str, str]

    def coverage(self) -> dict:
        pop_years = self.population.years
        return {
            "hazard_years": [min(e.year for e in self.events),
                             max(e.year for e in self.events)] if self.events else None,
            "hazard_types": sorted({e.hazard_type for e in self.events}),
            "population_years": [pop_years[0], pop_years[-1]] if pop_years else None,
            "scoreable_years": [pop_years[0] + 1, pop_years[-1] - 1]
                               if len(pop_years) >= 3 else None,
            "n_regions": len(self.population.regions),
            "indicators": list(self.socio.indicators),
            "excluded_regions": dict(self.socio_report.excluded_regions),
        }


def load_inputs(hazards, population, socio, geometry=None,
                region_pattern=ingest.DEFAULT_REGION_PATTERN,
                loess_span: float = 0.75) -> LoadedData:
    """Load and validate the input files; interpolate the socio panel once."""
    events, hazard_report = ingest.load_hazard_events(hazards,
                                                      region_pattern=region_pattern)
    pop = ingest.load_population(population)
    socio_raw = ingest.load_socio(socio)
    obs_years = sorted({y for _, y in socio_raw.values})
    if not obs_years:
        raise DataError("socio panel is empty")
    socio_filled, socio_rep = ingest.interpolate_socio_panel(
        socio_raw, range(obs_years[0], obs_years[-1] + 1), span=loess_span)

    geo, notes = (None, [])
    digests = {"hazards": report.file_digest(hazards),
               "population": report.file_digest(population),
               "socio": report.file_digest(socio)}
    sources = {"hazards": str(hazards), "population": str(population),
               "socio": str(socio)}
    if geometry is not None:
        geo, notes = ingest.load_geometry(geometry)
        digests["geometry"] = report.file_digest(geometry)
        sources["geometry"] = str(geometry)
    return LoadedData(events, hazard_report, pop, socio_filled, socio_rep,
                      geo, notes, digests, sources)


@dataclass
class FilterParams:
    years: tuple[int, int]
    hazard_types: list[str] | None = None
    regions: list[str] | None = None
    region_prefixes: list[str] = field(default_factory=list)
    aggregation: str = "per-year"
    pooled: bool = False
    damage_note: str = ""

    def to_dict(self):
        return {
            "years": list(self.years),
            "hazard_types": self.hazard_types,
            "regions": self.regions,
            "region_prefixes": list(self.region_prefixes),
            "aggregation": self.aggregation,
            "pooled": self.pooled,
            "damage_note": self.damage_note,
        }


@dataclass
class ScoresResult:
    params: FilterParams
    yearly_rows: list[scoring.RegionYearScores]
    display_rows: list[scoring.RegionYearScores]
    row_classes: dict
    region_values: dict     # kind -> {region: display value}
    region_classes: dict    # kind -> {region: class 1..4}
    hazard_stats: dict
    excluded: list[dict]


def validate_filter(params: FilterParams, data: LoadedData) -> None:
    y0, y1 = params.years
    if y1 < y0:
        raise ValidationError(f"empty year range {y0}..{y1}", field="years")
    cov = data.coverage()
    scoreable = cov["scoreable_years"]
    if scoreable is None:
        raise DataError("population panel spans fewer than 3 years")
    if y0 < scoreable[0] or y1 > scoreable[1]:
        raise ValidationError(
            f"years {y0}..{y1} outside data coverage {scoreable[0]}..{scoreable[1]} "
            f"(population must cover year-1 and year+1)", field="years")
    if params.aggregation not in ("per-year", "whole-window"):
        raise ValidationError(f"unknown aggregation {params.aggregation!r}",
                              field="aggregation")
    if params.hazard_types:
        known = set(cov["hazard_types"])
        unknown = [h for h in params.hazard_types if h not in known]
        if unknown:
            raise ValidationError(f"unknown hazard type(s): {unknown}",
                                  field="hazard_types")


def run_scoring(data: LoadedData, params: FilterParams) -> ScoresResult:
    """Filter events, compute the empirical parameters, and score regions."""
    validate_filter(params, data)
    window = params.years
    events = scoring.filter_events(
        data.events, window,
        hazard_types=set(params.hazard_types) if params.hazard_types else None,
        regions=set(params.regions) if params.regions else None,
        region_prefixes=tuple(params.region_prefixes))
    stats = scoring.compute_hazard_stats(events, window)
    threat = scoring.compute_threat(events, stats)
    damage = scoring.compute_damage(events)

    universe = data.population.regions
    if params.regions or params.region_prefixes:
        allowed = set(params.regions or [])
        universe = [r for r in universe
                    if r in allowed
                    or any(r.startswith(p) for p in params.region_prefixes)]
    if not universe:
        raise ValidationError("no regions match the filter", field="regions")

    keys, excluded = [], []
    recovery = {}
    for region in universe:
        for year in range(window[0], window[1] + 1):
            try:
                recovery[(region, year)] = scoring.compute_recovery(
                    data.population, region, year)
                keys.append((region, year))
            except DataError as exc:
                excluded.append({"region_code": region, "year": year,
                                 "reason": str(exc)})
    if not keys:
        raise DataError("no scoreable region-years (population coverage too sparse)")

    threat_f = {k: threat.get(k, 0.0) for k in keys}
    damage_f = {k: damage.get(k, 0.0) for k in keys}

    yearly = scoring.compute_scores(threat_f, damage_f, recovery,
                                    aggregation="per-year", pooled=params.pooled)
    if params.aggregation == "whole-window":
        display = scoring.compute_scores(
            threat_f, damage_f, recovery, aggregation="whole-window",
            window_label=f"{window[0]}-{window[1]}")
    else:
        display = yearly

    # per-row classes within each aggregation unit
    row_classes: dict = {}
    units: dict = {}
    for row in display:
        units.setdefault(row.year, []).append(row)
    for unit_rows in units.values():
        for kind in report.SCORE_KINDS:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                classes = scoring.quantile_classify(
                    {r.region_code: getattr(r, kind) for r in unit_rows})
            for r in unit_rows:
                row_classes.setdefault((r.region_code, r.year), {})[kind] = \
                    classes[r.region_code]

    # one display value per region per kind: window score, or the mean of the
    # yearly scores (long-term reading of the yearly indices)
    region_values = {}
    for kind in report.SCORE_KINDS:
        per_region: dict[str, list[float]] = {}
        for row in display:
            per_region.setdefault(row.region_code, []).append(getattr(row, kind))
        region_values[kind] = {r: float(np.mean(v)) for r, v in per_region.items()}
    region_classes = {}
    for kind in report.SCORE_KINDS:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            region_classes[kind] = scoring.quantile_classify(region_values[kind])

    return ScoresResult(params, yearly, display, row_classes,
                        region_values, region_classes, stats, excluded)


def build_aligned(data: LoadedData, scores: ScoresResult) -> features_mod.AlignedDataset:
    """Lag-align yearly scores to the socio panel and min-max scale features."""
    aligned = features_mod.align(scores.yearly_rows, data.socio)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return features_mod.scale_features(aligned)


def run_pruning(aligned, mode: str = "threshold", threshold: float = 0.7,
                names: list[str] | None = None):
    """Prune the aligned dataset; returns (pruned dataset, pruning report dict)."""
    if mode == "manual":
        pruned = features_mod.prune_collinear(aligned, threshold=1.0,
                                              manual_removals=names or [])
    elif mode == "threshold":
        pruned = features_mod.prune_collinear(aligned, threshold=threshold,
                                              manual_removals=names)
    else:
        raise ValidationError(f"unknown prune mode {mode!r}", field="mode")
    rep = {"removed": pruned.pruned, "retained": list(pruned.feature_names),
           "mode": mode, "threshold": threshold if mode == "threshold" else None}
    return pruned, rep


@dataclass
class TrainParams:
    families: list[str] = field(default_factory=lambda: list(FAMILIES))
    targets: list[str] = field(default_factory=lambda: list(features_mod.TARGETS))
    split_fraction: float = 0.8
    seed: int = 42
    run_causal: bool = False
    cv_folds: int = 5
    grids: dict | None = None          # family -> grid override
    causal_options: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "families": list(self.families),
            "targets": list(self.targets),
            "split_fraction": self.split_fraction,
            "seed": self.seed,
            "run_causal": self.run_causal,
            "cv_folds": self.cv_folds,
            "grids": self.grids,
            "causal_options": dict(self.causal_options),
        }


@dataclass
class TrainResult:
    suite: object
    causal: dict | None


def run_training(aligned, params: TrainParams) -> TrainResult:
    """Tune/refit/evaluate the requested families; optionally learn DAGs."""
    bad = [f for f in params.families if f not in FAMILIES]
    if bad:
        raise ValidationError(f"unknown families: {bad}", field="families")
    if params.targets == ["all"]:
        params.targets = list(features_mod.TARGETS)
    specs = [ModelSpec(family=f,
                       grid=(params.grids or {}).get(f, DEFAULT_GRIDS[f]),
                       cv_folds=params.cv_folds, seed=params.seed)
             for f in params.families]
    split_spec = features_mod.SplitSpec(params.split_fraction, params.seed)
    suite = run_model_suite(aligned, specs, split_spec,
                            targets=tuple(params.targets))

    causal_reports = None
    if params.run_causal:
        causal_reports = {}
        opts = params.causal_options
        for target in params.targets:
            matrix = np.column_stack([aligned.X, aligned.targets[target]])
            node_names = [*aligned.feature_names, target]
            dag = causal_mod.bootstrap_learn(
                matrix,
                B=opts.get("B", 100),
                subsample_fraction=opts.get("subsample_fraction", 0.9),
                alpha=opts.get("alpha", 0.05),
                seed=opts.get("seed", params.seed),
                confidence_threshold=opts.get("confidence_threshold", 0.5),
                max_depth=opts.get("max_depth", 3),
                node_names=node_names)
            parents = causal_mod.extract_parents(dag, target, matrix, node_names)
            causal_reports[target] = {"dag": dag, "parents": parents}
    return TrainResult(suite=suite, causal=causal_reports)


def build_output_bundle(data: LoadedData, scores: ScoresResult | None,
                        aligned=None, pruning_report=None,
                        train: TrainResult | None = None,
                        filter_params: dict | None = None,
                        prune_params: dict | None = None,
                        train_params: dict | None = None) -> dict[str, bytes]:
    """Assemble the full report bundle for whatever stages have run."""
    corr = corr_names = None
    if aligned is not None and aligned.n_rows >= 2:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            corr, corr_names = features_mod.correlation_matrix(aligned)
    suite = train.suite if train else None
    manifest = report.build_manifest(
        data.digests, data.sources, filter_params, prune_params, train_params,
        suite, pruning_report["removed"] if pruning_report else None, VERSION)
    if train is None or train.causal is None:
        manifest["causal"] = "not run"
    return report.build_bundle(
        scores_result=scores, corr=corr, corr_names=corr_names,
        pruning=pruning_report, suite=suite,
        causal=train.causal if train else None,
        geometry=data.geometry, manifest=manifest)
