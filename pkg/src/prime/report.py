"""Output bundle assembly: score tables, geo layers, metrics, DAG exports.

Everything analytical is serialized once into an in-memory bundle mapping
relative paths to bytes; the CLI writes that map to disk and the HTTP service
returns it verbatim, which is what makes the two interfaces byte-identical.
JSON is the single source of truth; the text table renders the same numbers
with 5 decimal places.
"""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path

from .errors import DataError

DISPLAY_NAMES = {
    "linear": "Linear Regression",
    "ridge": "Ridge Regression",
    "lasso": "Lasso Regression",
    "polynomial": "Polynomial Regression",
    "random_forest": "Random Forest Regression",
    "gradient_boosted_trees": "Gradient Boosted Trees Regression",
}

MODEL_NOTES = {
    "gradient_boosted_trees": ("plain least-squares gradient boosting; no "
                               "second-order or regularized split objective"),
}

# class 1..4 color ramps; vulnerability reads blue (low) to red (high),
# adaptability and resilience read red (low) to blue (high)
LAYER_COLORS = {
    "vulnerability": ["#2166ac", "#92c5de", "#f4a582", "#b2182b"],
    "adaptability": ["#b2182b", "#f4a582", "#92c5de", "#2166ac"],
    "resilience": ["#b2182b", "#f4a582", "#92c5de", "#2166ac"],
}

SCORE_KINDS = ("vulnerability", "adaptability", "resilience")

SCORES_CSV_COLUMNS = [
    "region_code", "year", "threat_raw", "damage_raw", "recovery_raw",
    "threat_norm", "damage_norm", "recovery_norm",
    "vulnerability", "adaptability", "resilience",
    "v_class", "a_class", "r_class",
]


def dump_json(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=2) + "\n").encode("utf-8")


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def scores_csv_bytes(rows, row_classes) -> bytes:
    lines = [",".join(SCORES_CSV_COLUMNS)]
    for row in rows:
        classes = row_classes.get((row.region_code, row.year), {})
        cells = [
            row.region_code, str(row.year),
            repr(float(row.threat_raw)), repr(float(row.damage_raw)),
            repr(float(row.recovery_raw)),
            repr(float(row.threat_norm)), repr(float(row.damage_norm)),
            repr(float(row.recovery_norm)),
            repr(float(row.vulnerability)), repr(float(row.adaptability)),
            repr(float(row.resilience)),
            str(classes.get("vulnerability", "")),
            str(classes.get("adaptability", "")),
            str(classes.get("resilience", "")),
        ]
        lines.append(",".join(cells))
    return ("\n".join(lines) + "\n").encode("utf-8")


def export_geolayers(region_values, region_classes, geometry):
    """One GeoJSON FeatureCollection per score kind, plus a missing-geometry list.

    ``region_values``/``region_classes`` map kind -> {region: value/class}.
    Every feature carries all three scores and classes in its properties for
    hover tooltips; the class color map rides along as layer metadata.
    """
    regions = sorted(region_values["resilience"])
    matched = [r for r in regions if geometry is not None and r in geometry]
    missing = [r for r in regions if r not in matched]
    if not matched:
        raise DataError("no scored region has a geometry")

    layers = {}
    for kind in SCORE_KINDS:
        colors = LAYER_COLORS[kind]
        features = []
        for code in matched:
            cls = region_classes[kind][code]
            props = {
                "UniqueCode": code,
                "name": geometry.names.get(code, code),
                "value": region_values[kind][code],
                "class": cls,
                "color": colors[cls - 1],
            }
            for k in SCORE_KINDS:
                props[k] = region_values[k][code]
                props[f"{k[0]}_class"] = region_classes[k][code]
            features.append({
                "type": "Feature",
                "geometry": geometry.features[code],
                "properties": props,
            })
        layers[kind] = {
            "type": "FeatureCollection",
            "metadata": {
                "layer": kind,
                "classes": {str(i + 1): c for i, c in enumerate(colors)},
                "value_field": "value",
                "class_field": "class",
            },
            "features": features,
        }
    return layers, missing


def metrics_payload(suite, notes=True) -> dict:
    targets: dict[str, list] = {}
    for row in suite.rows:
        entry = {
            "family": row.family,
            "display_name": DISPLAY_NAMES[row.family],
            "hyperparams": row.hyperparams,
            "mse": row.metrics["mse"],
            "rmse": row.metrics["rmse"],
            "mae": row.metrics["mae"],
        }
        if notes and row.family in MODEL_NOTES:
            entry["note"] = MODEL_NOTES[row.family]
        targets.setdefault(row.target, []).append(entry)
    return {
        "targets": targets,
        "n_train": suite.n_train,
        "n_test": suite.n_test,
        "split_fraction": suite.split_spec.train_fraction if suite.split_spec else None,
        "seed": suite.split_spec.seed if suite.split_spec else None,
    }


def metrics_text(payload: dict) -> str:
    """Text table mirroring the published layout: one group per target score."""
    lines = ["Machine Learning models performance", ""]
    header = ("Machine Learning Regressors | Mean Squared Error | "
              "Root Mean Squared Error | Mean Absolute Error")
    for target in SCORE_KINDS:
        if target not in payload["targets"]:
            continue
        lines.append(f"{target.capitalize()} Score")
        lines.append(header)
        for entry in payload["targets"][target]:
            lines.append(f"{entry['display_name']} | {entry['mse']:.5f} | "
                         f"{entry['rmse']:.5f} | {entry['mae']:.5f}")
        lines.append("")
    return "\n".join(lines)


def build_manifest(digests, sources, filter_params, prune_params, train_params,
                   suite, pruned, version) -> dict:
    chosen = {}
    if suite is not None:
        for row in suite.rows:
            chosen[f"{row.target}/{row.family}"] = row.hyperparams
    return {
        "tool": "prime-resilience",
        "version": version,
        "inputs": {"digests": digests, "sources": sources},
        "filter": filter_params,
        "prune": prune_params,
        "train": train_params,
        "pruning_decisions": pruned,
        "chosen_hyperparams": chosen,
        "created_at": datetime.now(timezone.utc).isoformat(),
    }


def build_bundle(scores_result=None, corr=None, corr_names=None, pruning=None,
                 suite=None, causal=None, geometry=None, manifest=None) -> dict[str, bytes]:
    """Assemble every artifact into a {relative path: bytes} map.

    Sections whose stage has not run are simply absent (`causal/not run` is
    marked in the manifest rather than with placeholder files).
    """
    bundle: dict[str, bytes] = {}

    if scores_result is not None:
        bundle["scores.csv"] = scores_csv_bytes(scores_result.display_rows,
                                                scores_result.row_classes)
        if geometry is not None:
            layers, missing = export_geolayers(scores_result.region_values,
                                               scores_result.region_classes, geometry)
            for kind, doc in layers.items():
                bundle[f"layers/{kind}.geojson"] = dump_json(doc)
            bundle["layers/missing_geometry.json"] = dump_json(
                {"missing": missing})

    if corr is not None:
        lines = ["," + ",".join(corr_names)]
        for i, name in enumerate(corr_names):
            lines.append(name + "," + ",".join(repr(float(v)) for v in corr[i]))
        bundle["correlation.csv"] = ("\n".join(lines) + "\n").encode("utf-8")
        bundle["correlation.json"] = dump_json({
            "names": list(corr_names),
            "matrix": [[float(v) for v in row] for row in corr],
        })

    if pruning is not None:
        bundle["pruning.json"] = dump_json(pruning)

    if suite is not None:
        payload = metrics_payload(suite)
        bundle["metrics.json"] = dump_json(payload)
        bundle["metrics.txt"] = metrics_text(payload).encode("utf-8")
        for row in suite.rows:
            bundle[f"explanations/{row.target}_{row.family}.json"] = dump_json({
                "target": row.target,
                "family": row.family,
                "kind": row.explanation_kind,
                "entries": row.explanation,
            })

    if causal:
        for target, section in causal.items():
            dag = section["dag"]
            doc = dag.to_json_dict()
            signs = {p["name"]: p for p in section["parents"]}
            for arc in doc["arcs"]:
                if arc["to"] == target and arc["from"] in signs:
                    arc["sign"] = signs[arc["from"]]["sign"]
            doc["score_node"] = target
            doc["parents"] = section["parents"]
            bundle[f"dag/{target}.json"] = dump_json(doc)
            bundle[f"dag/{target}.dot"] = dag.to_dot(highlight=target).encode("utf-8")

    if manifest is not None:
        bundle["manifest.json"] = dump_json(manifest)
    return bundle


def write_bundle(outdir, bundle: dict[str, bytes]) -> None:
    outdir = Path(outdir)
    for rel, content in bundle.items():
        path = outdir / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(content)
