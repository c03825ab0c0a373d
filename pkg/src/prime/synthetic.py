"""Deterministic synthetic study area with known ground truth.

Generates hazard events, a population panel, a socioeconomic panel, and grid
geometries for a configurable number of 5-digit regions.  The generating
structural model plants effects the pipeline is expected to recover:

* population recovery (hence the resilience score) rises with ``median_rent``
  and falls with ``pct_over_65``;
* ``median_household_income`` is collinear with ``owner_occupied_units``
  (latent r = 0.95) and should be pruned at the 0.7 threshold;
* ``pct_below_poverty`` depends negatively on ``pct_employed`` and
  ``pct_under_5`` positively on ``avg_household_size`` (moderate links that
  survive pruning);
* hazard damages and durations are independent of every indicator.

Indicator series are mostly year-to-year noise around a regional base so the
panel behaves like n_regions x n_years independent observations.
"""

from __future__ import annotations

import csv
import json
from datetime import date, timedelta
from pathlib import Path

import numpy as np

DEFAULT_SEED = 2
# Indicator draws are year-independent: persistent region effects would
# shrink the panel's effective sample size and litter the CI tests with
# spurious near-threshold dependence.
BASE_VARIANCE_SHARE = 0.0
RECOVERY_AMPLITUDE = 0.012         # planted growth response, per latent sd
RECOVERY_NOISE = 0.004

# (name, mean, sd, clip_at_zero)
INDICATORS = [
    ("pct_under_5", 6.0, 1.2, True),
    ("pct_over_65", 16.0, 4.0, True),
    ("avg_household_size", 2.55, 0.25, True),
    ("pct_female_workforce", 47.0, 3.0, True),
    ("pct_no_diploma", 13.0, 5.0, True),
    ("median_rent", 820.0, 240.0, True),
    ("owner_occupied_units", 12000.0, 3000.0, True),
    ("median_household_income", 52000.0, 12000.0, True),
    ("pct_below_poverty", 15.0, 4.5, True),
    ("pct_employed", 58.0, 5.0, True),
    ("pct_mobile_homes", 10.0, 5.0, True),
    ("houses_per_sqmile", 120.0, 70.0, True),
    ("households_no_fuel", 900.0, 400.0, True),
    ("num_hospitals", 2.5, 1.5, True),
]

# latent-space links: child = weight * parent + sqrt(1 - weight^2) * own noise
LATENT_LINKS = [
    ("median_household_income", "owner_occupied_units", 0.95),
    ("pct_below_poverty", "pct_employed", -0.5),
    ("pct_under_5", "avg_household_size", 0.45),
]

# (type, yearly rate, lognormal median damage per capita, sigma, base days, gamma shape/scale)
HAZARD_TYPES = [
    ("Flood", 0.35, 8.0, 1.0, 1.0, (2.0, 1.5)),
    ("SevereStorm", 0.50, 3.0, 0.8, 1.0, (1.5, 1.0)),
    ("Hurricane", 0.06, 60.0, 1.2, 2.0, (2.0, 2.0)),
    ("Drought", 0.08, 25.0, 1.0, 30.0, (3.0, 20.0)),
    ("Tornado", 0.20, 10.0, 1.1, 1.0, (1.0, 0.25)),
    ("WinterWeather", 0.25, 4.0, 0.9, 1.0, (2.0, 1.0)),
]

GROUND_TRUTH = {
    "resilience_drivers": {"median_rent": "+", "pct_over_65": "-"},
    "collinear_pair": {
        "kept": "owner_occupied_units",
        "pruned": "median_household_income",
        "latent_r": 0.95,
    },
    "feature_links": [
        {"from": "pct_employed", "to": "pct_below_poverty", "weight": -0.5},
        {"from": "avg_household_size", "to": "pct_under_5", "weight": 0.45},
    ],
}


def generate_synthetic(outdir, n_regions: int = 200,
                       years: tuple[int, int] = (2000, 2020),
                       seed: int = DEFAULT_SEED) -> dict[str, Path]:
    """Write the four input files plus the ground-truth note; returns their paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rng = np.random.Generator(np.random.PCG64(seed))

    regions = [f"{10000 + i + 1:05d}" for i in range(n_regions)]
    y0, y1 = years
    socio_years = list(range(y0 - 1, y1 + 1))          # lag coverage
    names = [row[0] for row in INDICATORS]
    k = len(names)
    n_years = len(socio_years)

    w = np.sqrt(BASE_VARIANCE_SHARE)
    base = rng.standard_normal((n_regions, k))
    eps = rng.standard_normal((n_regions, n_years, k))
    latent = w * base[:, None, :] + np.sqrt(1 - w**2) * eps
    col = {name: j for j, name in enumerate(names)}
    for child, parent, weight in LATENT_LINKS:
        latent[:, :, col[child]] = (
            weight * latent[:, :, col[parent]]
            + np.sqrt(1 - weight**2) * latent[:, :, col[child]]
        )

    values = np.empty_like(latent)
    for j, (_, mu, sd, clip) in enumerate(INDICATORS):
        values[:, :, j] = mu + sd * latent[:, :, j]
        if clip:
            values[:, :, j] = np.maximum(values[:, :, j], 0.0)

    # population path: growth in year t responds to that year's rent/age latents
    growth = (
        0.5 * RECOVERY_AMPLITUDE
        * (latent[:, :, col["median_rent"]] - latent[:, :, col["pct_over_65"]])
        + RECOVERY_NOISE * rng.standard_normal((n_regions, n_years))
    )
    pop0 = np.round(np.exp(rng.normal(10.3, 0.55, size=n_regions))).astype(int)
    pop = {}
    for i, code in enumerate(regions):
        p = max(1000, int(pop0[i]))
        pop[(code, socio_years[0])] = p
        for t, year in enumerate(socio_years):
            p = max(100, int(round(p * (1.0 + growth[i, t]))))
            pop[(code, year + 1)] = p

    # hazard events, independent of the socioeconomic indicators
    events = []
    for i, code in enumerate(regions):
        for year in range(y0, y1 + 1):
            for hazard, rate, med, sigma, base_days, (g_shape, g_scale) in HAZARD_TYPES:
                for _ in range(rng.poisson(rate)):
                    damage = float(np.exp(np.log(med) + sigma * rng.standard_normal()))
                    duration = float(base_days + rng.gamma(g_shape, g_scale))
                    onset = date(year, 1, 1) + timedelta(
                        days=int(rng.integers(0, 365 - int(min(duration, 300)))))
                    events.append((code, hazard, year, damage, duration, onset))

    paths = {
        "hazards": outdir / "hazards.csv",
        "population": outdir / "population.csv",
        "socio": outdir / "socio.csv",
        "geometry": outdir / "regions.geojson",
        "ground_truth": outdir / "ground_truth.json",
    }

    with open(paths["hazards"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["UniqueCode", "Disaster", "Year", "DamageRIM",
                         "Duration (days)", "Date"])
        for code, hazard, year, damage, duration, onset in events:
            writer.writerow([code, hazard, year, repr(damage), repr(duration),
                             onset.isoformat()])

    with open(paths["population"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["UniqueCode", "Year", "Population"])
        for (code, year), p in sorted(pop.items()):
            writer.writerow([code, year, p])

    with open(paths["socio"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["UniqueCode", "Year", *names])
        for i, code in enumerate(regions):
            for t, year in enumerate(socio_years):
                writer.writerow([code, year, *(repr(float(v)) for v in values[i, t])])

    with open(paths["geometry"], "w", encoding="utf-8") as fh:
        json.dump(_grid_geojson(regions), fh)

    with open(paths["ground_truth"], "w", encoding="utf-8") as fh:
        json.dump({**GROUND_TRUTH, "seed": seed, "n_regions": n_regions,
                   "years": list(years)}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths


def _grid_geojson(regions):
    features = []
    cols = 20
    for i, code in enumerate(regions):
        r, c = divmod(i, cols)
        lon = -120.0 + 0.8 * c
        lat = 30.0 + 0.8 * r
        ring = [[lon, lat], [lon + 0.75, lat], [lon + 0.75, lat + 0.75],
                [lon, lat + 0.75], [lon, lat]]
        features.append({
            "type": "Feature",
            "geometry": {"type": "Polygon", "coordinates": [ring]},
            "properties": {"UniqueCode": code, "name": f"Region {code}"},
        })
    return {"type": "FeatureCollection", "features": features}
