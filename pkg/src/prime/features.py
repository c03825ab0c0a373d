"""Modeling dataset assembly: lag alignment, scaling, collinearity pruning, split.

Scores for (region, year) are joined to the socioeconomic indicators of
``year - 1`` (pre-disaster conditions).  Features are min-max scaled on the
full dataset, then highly correlated columns are removed keeping the first in
column order.  Scaling before splitting mirrors the upstream pipeline order;
the induced leakage is noted in the dataset metadata.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DataError, ValidationError
from .ingest import SocioPanel
from .scoring import RegionYearScores

TARGETS = ("vulnerability", "adaptability", "resilience")
LAG_YEARS = 1


@dataclass
class AlignedDataset:
    keys: list[tuple[str, int]]            # (region_code, score year)
    feature_names: list[str]
    X: np.ndarray                          # n_rows x n_features
    targets: dict[str, np.ndarray]
    scaled: bool = False
    scaling: dict[str, tuple[float, float]] = field(default_factory=dict)
    pruned: list[dict] = field(default_factory=list)
    dropped_rows: list[dict] = field(default_factory=list)
    lag: int = LAG_YEARS
    notes: list[str] = field(default_factory=list)

    @property
    def n_rows(self):
        return len(self.keys)

    def column(self, name):
        return self.X[:, self.feature_names.index(name)]


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    seed: int


def align(scores: list[RegionYearScores], socio: SocioPanel) -> AlignedDataset:
    """One row per scored (region, year) with the previous year's indicators."""
    keys, rows, dropped = [], [], []
    tvals = {t: [] for t in TARGETS}
    for s in scores:
        if not isinstance(s.year, int):
            raise DataError("align requires per-year scores, not window aggregates")
        vec = socio.values.get((s.region_code, s.year - LAG_YEARS))
        if vec is None or not np.all(np.isfinite(vec)):
            dropped.append({
                "region_code": s.region_code, "year": s.year,
                "reason": f"no socio data for {s.region_code}/{s.year - LAG_YEARS}",
            })
            continue
        keys.append((s.region_code, s.year))
        rows.append(vec)
        for t in TARGETS:
            tvals[t].append(getattr(s, t))
    if not keys:
        raise DataError("no alignable rows: score years and socio years do not overlap")
    return AlignedDataset(
        keys=keys,
        feature_names=list(socio.indicators),
        X=np.array(rows, dtype=float),
        targets={t: np.array(v, dtype=float) for t, v in tvals.items()},
        dropped_rows=dropped,
    )


def correlation_matrix(data: AlignedDataset) -> tuple[np.ndarray, list[str]]:
    """Pearson correlation of the feature columns.

    Zero-variance columns are excluded (with a warning) before computing;
    the returned name list gives the matrix ordering.
    """
    if data.n_rows < 2:
        raise DataError("correlation needs at least 2 rows")
    keep, names = [], []
    for j, name in enumerate(data.feature_names):
        if np.std(data.X[:, j]) == 0.0:
            warnings.warn(f"dropping zero-variance column {name!r} from correlation",
                          stacklevel=2)
            continue
        keep.append(j)
        names.append(name)
    if len(keep) < 1:
        raise DataError("no columns with nonzero variance")
    corr = np.corrcoef(data.X[:, keep], rowvar=False)
    corr = np.atleast_2d(corr)
    return corr, names


def prune_collinear(
    data: AlignedDataset,
    threshold: float = 0.7,
    manual_removals: list[str] | None = None,
) -> AlignedDataset:
    """Drop columns with |r| above the threshold against an earlier retained column.

    Manual removals apply first.  The scan runs in input column order and
    compares each candidate only against already-retained columns, so column
    order is part of the reproducibility contract.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValidationError(f"threshold must be in (0, 1], got {threshold}",
                              field="threshold")
    manual = list(manual_removals or [])
    unknown = [m for m in manual if m not in data.feature_names]
    if unknown:
        raise ValidationError(f"unknown column(s) for manual removal: {unknown}",
                              field="names")

    removed: list[dict] = [
        {"name": m, "reason": "manual", "trigger": None, "r": None} for m in manual
    ]
    names = [n for n in data.feature_names if n not in manual]
    sub = _select(data, names)

    corr, corr_names = correlation_matrix(sub)
    idx = {n: i for i, n in enumerate(corr_names)}
    retained: list[str] = []
    for name in names:
        if name not in idx:  # zero-variance: keep out of correlation checks
            retained.append(name)
            continue
        trigger = None
        for prev in retained:
            if prev not in idx:
                continue
            r = corr[idx[name], idx[prev]]
            if abs(r) > threshold:
                trigger = (prev, float(r))
                break
        if trigger is None:
            retained.append(name)
        else:
            removed.append({
                "name": name, "reason": f"|r| > {threshold} with {trigger[0]}",
                "trigger": trigger[0], "r": trigger[1],
            })

    out = _select(data, retained)
    out.pruned = list(data.pruned) + removed
    return out


def _select(data: AlignedDataset, names: list[str]) -> AlignedDataset:
    cols = [data.feature_names.index(n) for n in names]
    return replace(
        data,
        feature_names=list(names),
        X=data.X[:, cols] if cols else data.X[:, :0],
        scaling={n: data.scaling[n] for n in names if n in data.scaling},
        pruned=list(data.pruned),
        dropped_rows=list(data.dropped_rows),
        notes=list(data.notes),
    )


def scale_features(data: AlignedDataset) -> AlignedDataset:
    """Min-max scale every feature column to [0,1]; targets are never scaled."""
    X = data.X.copy()
    scaling = {}
    for j, name in enumerate(data.feature_names):
        lo, hi = float(X[:, j].min()), float(X[:, j].max())
        scaling[name] = (lo, hi)
        if hi == lo:
            warnings.warn(f"constant column {name!r} scaled to all zeros", stacklevel=2)
            X[:, j] = 0.0
        else:
            X[:, j] = (X[:, j] - lo) / (hi - lo)
    out = replace(data, X=X, scaled=True, scaling=scaling)
    out.notes = list(data.notes)
    if "scaled before split (leakage of test extrema into scaling)" not in out.notes:
        out.notes.append("scaled before split (leakage of test extrema into scaling)")
    return out


def split(data: AlignedDataset, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic seeded row split; returns (train_indices, test_indices).

    Shuffling uses numpy's PCG64 stream, which is platform independent.  The
    train size is round(train_fraction * n) with half-up rounding.
    """
    if not 0.0 < spec.train_fraction < 1.0:
        raise ValidationError(
            f"train fraction must be in (0, 1), got {spec.train_fraction}",
            field="split_fraction")
    n = data.n_rows
    if n < 2:
        raise DataError("need at least 2 rows to split")
    n_train = int(np.floor(spec.train_fraction * n + 0.5))
    if n_train == 0 or n_train == n:
        raise DataError(
            f"split of {n} rows at fraction {spec.train_fraction} would leave an "
            f"empty side")
    perm = np.random.Generator(np.random.PCG64(spec.seed)).permutation(n)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])
