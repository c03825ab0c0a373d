import json
import re

import numpy as np
import pytest

from prime import pipeline
from prime.causal import Dag
from prime.errors import DataError
from prime.features import SplitSpec
from prime.ingest import RegionGeometry
from prime.models import ModelSpec, run_model_suite
from prime.report import (
    build_bundle,
    dump_json,
    export_geolayers,
    metrics_payload,
    metrics_text,
)
from test_tuning import SMALL_GRIDS, tiny_aligned


def strict_geojson_check(doc):
    """Minimal RFC 7946 structural validator."""
    assert doc["type"] == "FeatureCollection"
    assert isinstance(doc["features"], list)
    for feat in doc["features"]:
        assert feat["type"] == "Feature"
        assert "properties" in feat and isinstance(feat["properties"], dict)
        geom = feat["geometry"]
        if geom is None:
            continue
        assert geom["type"] in ("Point", "MultiPoint", "LineString",
                                "MultiLineString", "Polygon", "MultiPolygon",
                                "GeometryCollection")
        if geom["type"] == "Polygon":
            for ring in geom["coordinates"]:
                assert len(ring) >= 4
                assert ring[0] == ring[-1]  # closed
                for pos in ring:
                    assert len(pos) >= 2
                    assert all(isinstance(c, (int, float)) for c in pos)


def square(code, x0=0.0, y0=0.0):
    ring = [[x0, y0], [x0 + 1, y0], [x0 + 1, y0 + 1], [x0, y0 + 1], [x0, y0]]
    return {"type": "Polygon", "coordinates": [ring]}


def geometry_for(codes):
    geo = RegionGeometry()
    for i, code in enumerate(codes):
        geo.features[code] = square(code, x0=float(i))
        geo.names[code] = f"Region {code}"
    return geo


def values_for(codes):
    values = {k: {c: float(i + 1) for i, c in enumerate(codes)}
              for k in ("vulnerability", "adaptability", "resilience")}
    classes = {k: {c: (i % 4) + 1 for i, c in enumerate(codes)}
               for k in ("vulnerability", "adaptability", "resilience")}
    return values, classes


class TestGeoLayers:
    def test_full_match_counts(self):
        codes = ["00001", "00002", "00003"]
        values, classes = values_for(codes)
        layers, missing = export_geolayers(values, classes, geometry_for(codes))
        assert set(layers) == {"vulnerability", "adaptability", "resilience"}
        assert all(len(doc["features"]) == 3 for doc in layers.values())
        assert missing == []

    def test_missing_geometry_sidecar(self):
        codes = ["00001", "00002", "00003"]
        values, classes = values_for(codes)
        layers, missing = export_geolayers(values, classes,
                                           geometry_for(codes[:2]))
        assert missing == ["00003"]
        assert all(len(doc["features"]) == 2 for doc in layers.values())

    def test_tooltip_properties_present(self):
        codes = ["00001"]
        values, classes = values_for(codes)
        layers, _ = export_geolayers(values, classes, geometry_for(codes))
        props = layers["resilience"]["features"][0]["properties"]
        for key in ("name", "resilience", "adaptability", "vulnerability",
                    "r_class", "a_class", "v_class"):
            assert key in props

    def test_no_matchable_regions_error(self):
        codes = ["00001"]
        values, classes = values_for(codes)
        with pytest.raises(DataError):
            export_geolayers(values, classes, geometry_for(["99999"]))

    def test_layers_are_strict_geojson(self):
        codes = ["00001", "00002"]
        values, classes = values_for(codes)
        layers, _ = export_geolayers(values, classes, geometry_for(codes))
        for doc in layers.values():
            strict_geojson_check(json.loads(dump_json(doc)))

    def test_color_ramp_orientation(self):
        codes = ["00001"]
        values, classes = values_for(codes)
        layers, _ = export_geolayers(values, classes, geometry_for(codes))
        assert layers["vulnerability"]["metadata"]["classes"]["4"] == "#b2182b"
        assert layers["adaptability"]["metadata"]["classes"]["4"] == "#2166ac"


def small_suite(targets=("vulnerability", "adaptability", "resilience")):
    data = tiny_aligned()
    specs = [ModelSpec(f, grid=SMALL_GRIDS[f], cv_folds=3, seed=0)
             for f in SMALL_GRIDS]
    return run_model_suite(data, specs, SplitSpec(0.8, 42), targets=targets)


class TestMetricsRendering:
    def test_row_format_matches_published_layout(self):
        payload = {"targets": {"vulnerability": [
            {"family": "linear", "display_name": "Linear Regression",
             "hyperparams": {}, "mse": 0.000157, "rmse": 0.012523, "mae": 0.001762},
        ]}, "n_train": 0, "n_test": 0, "split_fraction": 0.8, "seed": 1}
        text = metrics_text(payload)
        assert "Linear Regression | 0.00016 | 0.01252 | 0.00176" in text

    def test_structure_three_groups(self):
        suite = small_suite()
        text = metrics_text(metrics_payload(suite))
        for heading in ("Vulnerability Score", "Adaptability Score",
                        "Resilience Score"):
            assert heading in text
        rows = [l for l in text.splitlines()
                if re.fullmatch(r"[^|]+ \| \d+\.\d{5} \| \d+\.\d{5} \| \d+\.\d{5}", l)]
        assert len(rows) == 18  # 6 families x 3 targets

    def test_text_roundtrips_from_json(self):
        suite = small_suite()
        payload = metrics_payload(suite)
        text = metrics_text(payload)
        lines = iter(text.splitlines())
        for target in ("vulnerability", "adaptability", "resilience"):
            for line in lines:
                if line == f"{target.capitalize()} Score":
                    break
            next(lines)  # header
            for entry in payload["targets"][target]:
                row = next(lines)
                cells = [c.strip() for c in row.split("|")]
                assert cells[0] == entry["display_name"]
                assert cells[1] == f"{entry['mse']:.5f}"
                assert cells[2] == f"{entry['rmse']:.5f}"
                assert cells[3] == f"{entry['mae']:.5f}"


class TestBundle:
    def test_bundle_paths_for_full_run(self, loaded, scored, aligned):
        tp = pipeline.TrainParams(families=["linear"], targets=["resilience"],
                                  run_causal=False)
        import warnings
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            pruned, rep = pipeline.run_pruning(aligned, mode="threshold",
                                               threshold=0.7)
        train = pipeline.run_training(pruned, tp)
        bundle = pipeline.build_output_bundle(
            loaded, scored, aligned=pruned, pruning_report=rep, train=train,
            filter_params=scored.params.to_dict(), prune_params={"mode": "threshold"},
            train_params=tp.to_dict())
        for expected in ("scores.csv", "layers/vulnerability.geojson",
                         "layers/adaptability.geojson", "layers/resilience.geojson",
                         "correlation.csv", "correlation.json", "pruning.json",
                         "metrics.json", "metrics.txt",
                         "explanations/resilience_linear.json", "manifest.json"):
            assert expected in bundle, expected
        manifest = json.loads(bundle["manifest.json"])
        assert manifest["causal"] == "not run"
        assert "created_at" in manifest

    def test_determinism_modulo_timestamp(self, loaded, scored, aligned):
        tp = pipeline.TrainParams(families=["linear"], targets=["resilience"])

        def make():
            train = pipeline.run_training(aligned, tp)
            return pipeline.build_output_bundle(
                loaded, scored, aligned=aligned, train=train,
                filter_params=scored.params.to_dict(), train_params=tp.to_dict())

        b1, b2 = make(), make()
        assert set(b1) == set(b2)
        for rel in b1:
            if rel == "manifest.json":
                m1 = json.loads(b1[rel])
                m2 = json.loads(b2[rel])
                m1.pop("created_at"), m2.pop("created_at")
                assert m1 == m2
            else:
                assert b1[rel] == b2[rel], rel

    def test_causal_section_export(self):
        dag = Dag(nodes=["a", "resilience"],
                  arcs=[{"from": "a", "to": "resilience", "confidence": 0.9}])
        causal = {"resilience": {
            "dag": dag,
            "parents": [{"name": "a", "coefficient": 1.5, "sign": "+"}]}}
        bundle = build_bundle(causal=causal)
        doc = json.loads(bundle["dag/resilience.json"])
        assert doc["score_node"] == "resilience"
        assert doc["arcs"][0]["sign"] == "+"
        assert bundle["dag/resilience.dot"].decode().startswith("digraph")

    def test_scores_csv_columns(self, loaded, scored):
        bundle = pipeline.build_output_bundle(loaded, scored)
        header = bundle["scores.csv"].decode().splitlines()[0]
        assert header == ("region_code,year,threat_raw,damage_raw,recovery_raw,"
                          "threat_norm,damage_norm,recovery_norm,vulnerability,"
                          "adaptability,resilience,v_class,a_class,r_class")

    def test_every_score_row_satisfies_identity(self, loaded, scored):
        bundle = pipeline.build_output_bundle(loaded, scored)
        rows = bundle["scores.csv"].decode().splitlines()[1:]
        for line in rows:
            cells = line.split(",")
            t_n, d_n, r_n = map(float, cells[5:8])
            resilience = float(cells[10])
            assert abs(resilience - (r_n - 2 * d_n + t_n)) <= 1e-12
