"""Locally weighted (Loess) trend estimation for short yearly series.

Degree-1 local regression with tricube weights over the ``span`` fraction of
nearest observations.  Yearly census panels carry no seasonal component, so a
plain local-linear trend is used to fill unobserved years.
"""

from __future__ import annotations

import math

import numpy as np


def loess_predict(
    x_obs: np.ndarray,
    y_obs: np.ndarray,
    x_new: np.ndarray,
    span: float = 0.75,
) -> np.ndarray:
    """Evaluate a tricube-weighted local-linear fit of (x_obs, y_obs) at x_new.

    ``span`` is the fraction of observations entering each local fit
    (at least 2).  With exactly two support points the fit reduces to the
    chord through them.
    """
    x_obs = np.asarray(x_obs, dtype=float)
    y_obs = np.asarray(y_obs, dtype=float)
    if x_obs.ndim != 1 or x_obs.shape != y_obs.shape:
        raise ValueError("x_obs and y_obs must be 1-d arrays of equal length")
    m = x_obs.size
    if m < 2:
        raise ValueError("loess needs at least 2 observations")
    if not 0.0 < span <= 1.0:
        raise ValueError(f"span must be in (0, 1], got {span}")

    k = min(m, max(2, math.ceil(span * m)))
    out = np.empty(len(x_new), dtype=float)
    for i, x0 in enumerate(np.asarray(x_new, dtype=float)):
        out[i] = _fit_at(x_obs, y_obs, x0, k)
    return out


def _fit_at(x_obs, y_obs, x0, k):
    d = np.abs(x_obs - x0)
    order = np.argsort(d, kind="stable")
    h = d[order[k - 1]]
    if h == 0.0:
        # x0 coincides with an observation and the bandwidth collapsed
        return float(y_obs[order[0]])

    # all points within the bandwidth participate (ties at h included)
    sel = order[d[order] <= h]
    r = d[sel] / h
    w = np.clip(1.0 - r**3, 0.0, None) ** 3
    if w.sum() <= 0.0:
        # every selected point sits exactly at distance h (e.g. two
        # equidistant supports); fall back to an unweighted fit
        w = np.ones_like(w)

    xs, ys = x_obs[sel], y_obs[sel]
    sw = w.sum()
    xm = (w * xs).sum() / sw
    ym = (w * ys).sum() / sw
    sxx = (w * (xs - xm) ** 2).sum()
    if sxx <= 1e-12 * max(1.0, xm * xm):
        return float(ym)
    slope = (w * (xs - xm) * (ys - ym)).sum() / sxx
    return float(ym + slope * (x0 - xm))
