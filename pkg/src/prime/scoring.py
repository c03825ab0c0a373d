"""Empirical threat/damage/recovery parameters and composite scores.

For a study window, each hazard type gets a per-day occurrence likelihood
(count of events / calendar days in the window) and a weightage (mean
per-capita damage per day over its events).  Region-year threat is the sum of
``duration x likelihood x weightage`` over events; damage is the sum of
per-capita damages; recovery is the relative population change from the year
before an event year to the year after.  The three parameters are min-max
normalized within each aggregation unit and combined:

    vulnerability = damage_norm - threat_norm
    adaptability  = recovery_norm - damage_norm
    resilience    = adaptability - vulnerability
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from datetime import date

import numpy as np

from .errors import DataError
from .ingest import HazardEvent, PopulationPanel


@dataclass(frozen=True)
class HazardTypeStats:
    hazard_type: str
    likelihood: float  # events per calendar day over the window
    weightage: float   # mean damage per day per capita


@dataclass
class RegionYearScores:
    region_code: str
    year: int | str  # calendar year, or a window label like "2000-2020"
    threat_raw: float
    damage_raw: float
    recovery_raw: float
    threat_norm: float = 0.0
    damage_norm: float = 0.0
    recovery_norm: float = 0.0
    vulnerability: float = 0.0
    adaptability: float = 0.0
    resilience: float = 0.0


def window_days(window: tuple[int, int]) -> int:
    """Number of calendar days in an inclusive year window (leap-aware)."""
    start, end = window
    if end < start:
        raise DataError(f"empty study window {window}")
    return (date(end + 1, 1, 1) - date(start, 1, 1)).days


def filter_events(
    events: list[HazardEvent],
    window: tuple[int, int],
    hazard_types: set[str] | None = None,
    regions: set[str] | None = None,
    region_prefixes: tuple[str, ...] = (),
) -> list[HazardEvent]:
    """Select events inside the window matching the optional whitelists."""
    out = []
    for ev in events:
        if not window[0] <= ev.year <= window[1]:
            continue
        if hazard_types is not None and ev.hazard_type not in hazard_types:
            continue
        if regions is not None and ev.region_code not in regions:
            if not any(ev.region_code.startswith(p) for p in region_prefixes):
                continue
        elif regions is None and region_prefixes:
            if not any(ev.region_code.startswith(p) for p in region_prefixes):
                continue
        out.append(ev)
    return out


def compute_hazard_stats(
    events: list[HazardEvent], window: tuple[int, int]
) -> dict[str, HazardTypeStats]:
    """Per-hazard-type likelihood and weightage over the window."""
    days = window_days(window)
    by_type: dict[str, list[HazardEvent]] = {}
    for ev in events:
        by_type.setdefault(ev.hazard_type, []).append(ev)
    stats = {}
    for hazard, evs in by_type.items():
        likelihood = len(evs) / days
        weightage = float(np.mean([e.damage_per_capita / e.duration_days for e in evs]))
        stats[hazard] = HazardTypeStats(hazard, likelihood, weightage)
    return stats


def compute_threat(
    events: list[HazardEvent], stats: dict[str, HazardTypeStats]
) -> dict[tuple[str, int], float]:
    """Sum duration x likelihood x weightage per (region, year), in input order."""
    threat: dict[tuple[str, int], float] = {}
    for ev in events:
        st = stats.get(ev.hazard_type)
        if st is None:
            raise DataError(f"no hazard stats for type {ev.hazard_type!r}")
        key = (ev.region_code, ev.year)
        threat[key] = threat.get(key, 0.0) + ev.duration_days * st.likelihood * st.weightage
    return threat


def compute_damage(events: list[HazardEvent]) -> dict[tuple[str, int], float]:
    """Sum per-capita damages per (region, year), in input order."""
    damage: dict[tuple[str, int], float] = {}
    for ev in events:
        key = (ev.region_code, ev.year)
        damage[key] = damage.get(key, 0.0) + ev.damage_per_capita
    return damage


def compute_recovery(pop: PopulationPanel, region: str, year: int) -> float:
    """Relative population change from year-1 to year+1; None years are fatal."""
    before = pop.get(region, year - 1)
    after = pop.get(region, year + 1)
    if before is None or after is None:
        missing = year - 1 if before is None else year + 1
        raise DataError(f"population missing for {region}/{missing}")
    return (after - before) / before


def min_max_normalize(values: dict) -> dict:
    """Map values to [0,1] by (x - min) / (max - min); constant input maps to 0."""
    if not values:
        raise DataError("cannot normalize an empty value map")
    arr = np.array(list(values.values()), dtype=float)
    lo, hi = arr.min(), arr.max()
    if hi == lo:
        return {k: 0.0 for k in values}
    return {k: (v - lo) / (hi - lo) for k, v in values.items()}


def compute_scores(
    threat: dict[tuple[str, int], float],
    damage: dict[tuple[str, int], float],
    recovery: dict[tuple[str, int], float],
    aggregation: str = "per-year",
    window_label: str | None = None,
    pooled: bool = False,
) -> list[RegionYearScores]:
    """Normalize the three parameter maps and derive the composite scores.

    ``per-year`` normalizes within each calendar year across regions (set
    ``pooled`` to normalize across all region-years at once).  ``whole-window``
    first sums threat and damage per region and averages the yearly recovery
    rates, then normalizes once across regions.
    """
    keys = set(threat)
    if keys != set(damage) or keys != set(recovery):
        diff = keys ^ set(damage) | keys ^ set(recovery)
        raise DataError(f"threat/damage/recovery key sets differ: {sorted(diff)[:5]}")
    if not keys:
        raise DataError("no region-years to score")

    if aggregation == "whole-window":
        regions = sorted({r for r, _ in keys})
        label = window_label or "window"
        t = {r: sum(v for (rr, _), v in threat.items() if rr == r) for r in regions}
        d = {r: sum(v for (rr, _), v in damage.items() if rr == r) for r in regions}
        rec = {
            r: float(np.mean([v for (rr, _), v in recovery.items() if rr == r]))
            for r in regions
        }
        rows = [RegionYearScores(r, label, t[r], d[r], rec[r]) for r in regions]
        _normalize_unit(rows)
        return rows

    if aggregation != "per-year":
        raise DataError(f"unknown aggregation mode {aggregation!r}")

    rows = [
        RegionYearScores(r, y, threat[(r, y)], damage[(r, y)], recovery[(r, y)])
        for r, y in sorted(keys)
    ]
    if pooled:
        _normalize_unit(rows)
    else:
        for year in sorted({row.year for row in rows}):
            _normalize_unit([row for row in rows if row.year == year])
    return rows


def _normalize_unit(rows: list[RegionYearScores]) -> None:
    keys = range(len(rows))
    t = min_max_normalize({i: rows[i].threat_raw for i in keys})
    d = min_max_normalize({i: rows[i].damage_raw for i in keys})
    r = min_max_normalize({i: rows[i].recovery_raw for i in keys})
    for i in keys:
        row = rows[i]
        row.threat_norm, row.damage_norm, row.recovery_norm = t[i], d[i], r[i]
        row.vulnerability = row.damage_norm - row.threat_norm
        row.adaptability = row.recovery_norm - row.damage_norm
        row.resilience = row.adaptability - row.vulnerability


def quantile_classify(scores: dict[str, float], n_classes: int = 4) -> dict[str, int]:
    """Assign 1..n_classes by empirical quantile; boundary ties take the lower class.

    Boundaries come from the linear-interpolation empirical quantile function.
    Degenerate distributions (fewer distinct values than classes) are allowed
    and produce a warning.
    """
    if not scores:
        raise DataError("cannot classify an empty score map")
    values = np.array(list(scores.values()), dtype=float)
    if len(np.unique(values)) < n_classes:
        warnings.warn(
            f"fewer than {n_classes} distinct values; classes will be degenerate",
            stacklevel=2,
        )
    bounds = [np.quantile(values, k / n_classes, method="linear")
              for k in range(1, n_classes)]

    def classify(v):
        cls = 1
        for b in bounds:
            if v > b:
                cls += 1
        return cls

    return {k: classify(v) for k, v in scores.items()}
