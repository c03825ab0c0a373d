"""Loading, validation, and harmonization of the three input tables.

Inputs are plain CSV files following the processed-disaster schema
(``UniqueCode, Disaster, Year, DamageRIM, Duration (days)`` plus an optional
ISO ``Date``), a population panel (``UniqueCode, Year, Population``), a
socioeconomic panel (``UniqueCode, Year, <one column per indicator>``), and a
GeoJSON file of region boundaries keyed by a ``UniqueCode`` property.

Malformed rows never abort a hazard load: they are collected in a validation
report so sparse real-world extracts still run.  Schema-level problems
(missing columns, duplicate panel keys) are fatal.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

from .errors import DataError, SchemaError
from .loess import loess_predict

DEFAULT_REGION_PATTERN = r"^\d{5}$"
DEFAULT_YEAR_BOUNDS = (1900, 2100)

HAZARD_COLUMNS = {
    "region_code": "UniqueCode",
    "hazard_type": "Disaster",
    "year": "Year",
    "damage_per_capita": "DamageRIM",
    "duration_days": "Duration (days)",
    "date": "Date",
}


@dataclass(frozen=True)
class HazardEvent:
    """One dated, typed hazard occurrence in one region."""

    region_code: str
    hazard_type: str
    year: int
    damage_per_capita: float
    duration_days: float
    date: date | None = None


@dataclass
class RejectedRow:
    line: int
    reason: str
    raw: dict


@dataclass
class LoadReport:
    rows_in: int = 0
    accepted: int = 0
    rejected: list[RejectedRow] = field(default_factory=list)

    def reject(self, line, reason, raw):
        self.rejected.append(RejectedRow(line, reason, dict(raw)))

    def to_dict(self):
        return {
            "rows_in": self.rows_in,
            "accepted": self.accepted,
            "rejected": [
                {"line": r.line, "reason": r.reason, "raw": r.raw} for r in self.rejected
            ],
        }


@dataclass
class PopulationPanel:
    """Population counts keyed by (region_code, year)."""

    counts: dict[tuple[str, int], int] = field(default_factory=dict)

    def get(self, region, year):
        return self.counts.get((region, year))

    @property
    def regions(self):
        return sorted({r for r, _ in self.counts})

    @property
    def years(self):
        return sorted({y for _, y in self.counts})


@dataclass
class SocioPanel:
    """Indicator vectors keyed by (region_code, year).

    ``indicators`` fixes the column order; every stored vector has one value
    per indicator (NaN marks a missing observation before interpolation).
    """

    indicators: list[str]
    values: dict[tuple[str, int], np.ndarray] = field(default_factory=dict)

    @property
    def regions(self):
        return sorted({r for r, _ in self.values})

    def years_for(self, region):
        return sorted(y for r, y in self.values if r == region)

    def get(self, region, year, indicator):
        vec = self.values.get((region, year))
        if vec is None:
            return None
        return float(vec[self.indicators.index(indicator)])


@dataclass
class RegionGeometry:
    """Region boundaries plus display names, keyed by region code."""

    features: dict[str, dict] = field(default_factory=dict)  # code -> geometry dict
    names: dict[str, str] = field(default_factory=dict)

    def __contains__(self, code):
        return code in self.features


def load_hazard_events(
    path,
    schema_config: dict | None = None,
    region_pattern: str = DEFAULT_REGION_PATTERN,
    year_bounds: tuple[int, int] = DEFAULT_YEAR_BOUNDS,
) -> tuple[list[HazardEvent], LoadReport]:
    """Load the processed disaster CSV, returning events plus a validation report.

    ``schema_config`` maps logical names (region_code, hazard_type, year,
    damage_per_capita, duration_days, date) to the file's column headers, so
    non-SHELDUS extracts load without code edits.
    """
    cols = dict(HAZARD_COLUMNS)
    if schema_config:
        cols.update(schema_config)
    pattern = re.compile(region_pattern)

    events: list[HazardEvent] = []
    report = LoadReport()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        required = [cols[k] for k in ("region_code", "hazard_type", "year",
                                      "damage_per_capita", "duration_days")]
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(f"hazard file {path} is missing required column(s): "
                              f"{', '.join(missing)}")
        has_date = cols["date"] in header

        for line_no, row in enumerate(reader, start=2):
            report.rows_in += 1
            code = (row.get(cols["region_code"]) or "").strip()
            if not pattern.match(code):
                report.reject(line_no, f"region code {code!r} does not match pattern", row)
                continue
            hazard = (row.get(cols["hazard_type"]) or "").strip()
            if not hazard:
                report.reject(line_no, "empty hazard type", row)
                continue
            try:
                year = int(row[cols["year"]])
            except (ValueError, TypeError):
                report.reject(line_no, f"unparseable year {row.get(cols['year'])!r}", row)
                continue
            if not year_bounds[0] <= year <= year_bounds[1]:
                report.reject(line_no, f"year {year} outside study bounds {year_bounds}", row)
                continue
            try:
                damage = float(row[cols["damage_per_capita"]])
                duration = float(row[cols["duration_days"]])
            except (ValueError, TypeError):
                report.reject(line_no, "unparseable numeric cell", row)
                continue
            if not np.isfinite(damage) or damage < 0:
                report.reject(line_no, "negative damage", row)
                continue
            if not np.isfinite(duration) or duration <= 0:
                report.reject(line_no, "nonpositive duration", row)
                continue
            event_date = None
            if has_date and (row.get(cols["date"]) or "").strip():
                try:
                    event_date = date.fromisoformat(row[cols["date"]].strip())
                except ValueError:
                    report.reject(line_no, f"invalid date {row[cols['date']]!r}", row)
                    continue
            events.append(HazardEvent(code, hazard, year, damage, duration, event_date))

    report.accepted = len(events)
    return events, report


def write_hazard_events(path, events: list[HazardEvent]) -> None:
    """Write events back out in the documented column order (round-trip safe)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["UniqueCode", "Disaster", "Year", "DamageRIM",
                         "Duration (days)", "Date"])
        for ev in events:
            writer.writerow([
                ev.region_code, ev.hazard_type, ev.year,
                repr(ev.damage_per_capita), repr(ev.duration_days),
                ev.date.isoformat() if ev.date else "",
            ])


def load_population(path) -> PopulationPanel:
    """Load the population panel; duplicates and nonpositive counts are fatal."""
    panel = PopulationPanel()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in ("UniqueCode", "Year", "Population") if c not in header]
        if missing:
            raise SchemaError(f"population file {path} is missing column(s): "
                              f"{', '.join(missing)}")
        for line_no, row in enumerate(reader, start=2):
            code = (row["UniqueCode"] or "").strip()
            try:
                year = int(row["Year"])
                pop = int(float(row["Population"]))
            except (ValueError, TypeError):
                raise SchemaError(f"population file line {line_no}: unparseable row {row}")
            if pop <= 0:
                raise DataError(f"nonpositive population {pop} for {code}/{year} "
                                f"(line {line_no})")
            key = (code, year)
            if key in panel.counts:
                raise DataError(f"duplicate population entry for {code}/{year} "
                                f"(line {line_no})")
            panel.counts[key] = pop
    return panel


def load_socio(path) -> SocioPanel:
    """Load the socioeconomic panel; every non-key column is an indicator."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in ("UniqueCode", "Year") if c not in header]
        if missing:
            raise SchemaError(f"socio file {path} is missing column(s): {', '.join(missing)}")
        indicators = [c for c in header if c not in ("UniqueCode", "Year")]
        if not indicators:
            raise SchemaError(f"socio file {path} has no indicator columns")
        panel = SocioPanel(indicators=indicators)
        for line_no, row in enumerate(reader, start=2):
            code = (row["UniqueCode"] or "").strip()
            try:
                year = int(row["Year"])
            except (ValueError, TypeError):
                raise SchemaError(f"socio file line {line_no}: unparseable year")
            key = (code, year)
            if key in panel.values:
                raise DataError(f"duplicate socio entry for {code}/{year} (line {line_no})")
            vec = np.full(len(indicators), np.nan)
            for j, name in enumerate(indicators):
                cell = (row.get(name) or "").strip()
                if cell:
                    try:
                        vec[j] = float(cell)
                    except ValueError:
                        raise SchemaError(
                            f"socio file line {line_no}: unparseable value {cell!r} "
                            f"in column {name}")
            panel.values[key] = vec
    return panel


def load_geometry(path) -> tuple[RegionGeometry, list[str]]:
    """Load region boundaries from a GeoJSON FeatureCollection.

    Returns the geometry table and a list of skipped-feature notes (features
    without a usable ``UniqueCode``).
    """
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("type") != "FeatureCollection":
        raise SchemaError(f"geometry file {path} is not a FeatureCollection")
    geo = RegionGeometry()
    skipped = []
    for i, feat in enumerate(doc.get("features", [])):
        props = feat.get("properties") or {}
        code = props.get("UniqueCode")
        if code is None:
            skipped.append(f"feature {i} has no UniqueCode property")
            continue
        code = str(code)
        geo.features[code] = feat.get("geometry")
        geo.names[code] = str(props.get("name", props.get("NAME", code)))
    return geo, skipped


@dataclass
class InterpolationReport:
    filled: int = 0
    passed_through: int = 0
    excluded_regions: dict[str, str] = field(default_factory=dict)

    def to_dict(self):
        return {
            "filled": self.filled,
            "passed_through": self.passed_through,
            "excluded_regions": self.excluded_regions,
        }


def interpolate_socio_panel(
    panel: SocioPanel,
    target_years: range,
    span: float = 0.75,
    clamp: bool = True,
) -> tuple[SocioPanel, InterpolationReport]:
    """Fill missing census years per (region, indicator) with a Loess trend fit.

    Observed values pass through unchanged.  With ``clamp`` on (default) the
    filled values never leave the observed [min, max] of their series, which
    avoids extrapolation artifacts in short panels.  Regions with any series
    shorter than two observations are excluded and reported.
    """
    years = list(target_years)
    if not years:
        raise DataError("empty target year range for interpolation")
    out = SocioPanel(indicators=list(panel.indicators))
    report = InterpolationReport()

    for region in panel.regions:
        obs_years = panel.years_for(region)
        series = {y: panel.values[(region, y)] for y in obs_years}
        all_years = sorted(set(years) | set(obs_years))
        grid = {y: np.full(len(panel.indicators), np.nan) for y in all_years}

        ok = True
        for j in range(len(panel.indicators)):
            xs = [y for y in obs_years if np.isfinite(series[y][j])]
            if len(xs) < 2:
                report.excluded_regions[region] = (
                    f"indicator {panel.indicators[j]!r} has {len(xs)} observation(s)")
                ok = False
                break
            ys = np.array([series[y][j] for y in xs])
            missing = [y for y in all_years if y not in xs]
            if missing:
                filled = loess_predict(np.array(xs, dtype=float), ys,
                                       np.array(missing, dtype=float), span=span)
                if clamp:
                    filled = np.clip(filled, ys.min(), ys.max())
                for y, v in zip(missing, filled):
                    grid[y][j] = v
                report.filled += len(missing)
            for y in xs:
                grid[y][j] = series[y][j]  # bit-for-bit pass-through
                report.passed_through += 1
        if not ok:
            continue
        for y in all_years:
            out.values[(region, y)] = grid[y]
    return out, report
