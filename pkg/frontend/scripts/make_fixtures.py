"""Regenerate the workbench test fixtures from the synthetic dataset.

Run from the repository root:

    python3 frontend/scripts/make_fixtures.py

Writes JSON payloads (as served by the HTTP API) into frontend/tests/fixtures.
"""

import json
import sys
import tempfile
import time
from pathlib import Path

from fastapi.testclient import TestClient

from prime import pipeline
from prime.service import create_app
from prime.synthetic import generate_synthetic

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        paths = generate_synthetic(tmp)
        data = pipeline.load_inputs(paths["hazards"], paths["population"],
                                    paths["socio"], geometry=paths["geometry"])
        with TestClient(create_app(data)) as client:
            meta = client.get("/meta").json()
            sid = client.post("/sessions").json()["session_id"]
            filter_resp = client.post(f"/sessions/{sid}/filter",
                                      json={"years": [2000, 2020]}).json()
            layers = {
                kind: client.get(url).json()
                for kind, url in filter_resp["layer_urls"].items()
            }
            correlation = client.get(f"/sessions/{sid}/correlation").json()
            prune = client.post(f"/sessions/{sid}/prune",
                                json={"mode": "threshold", "threshold": 0.7}).json()
            client.post(f"/sessions/{sid}/train", json={
                "families": ["linear", "random_forest"],
                "targets": ["all"], "split_fraction": 0.8, "seed": 42,
                "run_causal": True, "causal_b": 50,
                "grids": {"random_forest": {"n_trees": [15], "max_depth": [6]}},
            })
            while True:
                resp = client.get(f"/sessions/{sid}/results")
                if resp.status_code != 202:
                    break
                time.sleep(0.05)
            results = resp.json()
            results.pop("files")  # raw byte map not needed by the UI fixtures

    fixtures = {
        "meta.json": meta,
        "filter_response.json": filter_resp,
        "correlation.json": correlation,
        "pruning.json": prune,
        "results.json": results,
    }
    for kind, doc in layers.items():
        fixtures[f"layer_{kind}.geojson"] = doc
    for name, doc in fixtures.items():
        (OUT / name).write_text(json.dumps(doc, sort_keys=True) + "\n")
        print(f"wrote {OUT / name}")


if __name__ == "__main__":
    sys.exit(main())
