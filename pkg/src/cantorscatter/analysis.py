"""Experiment drivers: k sweeps, rho-k grids, saturation, scaling fits, resonances.

Evaluation is split into fixed-size chunks that do not depend on the worker
count, so outputs are bit-identical for any ``workers`` value.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, InsufficientPoints, InvalidSpec
from .geometry import PotentialSpec, check_spec, validate_spec
from .scattering import brute_force_matrix, transmission_from_matrix
from .spp import (
    _closed_form_terms,
    area_preserving_height,
    log10_transmission,
    log_denominator,
    transmission_closed_form,
)

CHUNK = 256
SATURATION_DELTA = 0.05
NULL_T = 1e-6
METHODS = ("closed", "oracle", "both")


def _map(func, items, workers: int = 1):
    items = list(items)
    if workers == 1 or len(items) <= 1:
        return [func(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers or None) as pool:
        return list(pool.map(func, items))


def _chunks(k: np.ndarray):
    return [k[i : i + CHUNK] for i in range(0, k.size, CHUNK)]


def _closed_chunk(spec, k):
    x = log_denominator(spec, k)
    lse = np.logaddexp(0.0, x)
    return np.exp(-lse), np.exp(x - lse)


def _oracle_chunk(spec, k):
    return transmission_from_matrix(brute_force_matrix(spec, k))


@dataclass
class SweepTable:
    axis: np.ndarray
    t: np.ndarray
    r: np.ndarray
    meta: dict
    t_oracle: np.ndarray | None = None
    r_oracle: np.ndarray | None = None
    discrepancy: float | None = None

    def columns(self) -> dict:
        cols = {"k": self.axis, "T": self.t, "R": self.r}
        if self.t_oracle is not None:
            cols["T_oracle"] = self.t_oracle
            cols["R_oracle"] = self.r_oracle
        return cols


def k_sweep(spec: PotentialSpec, k_min: float, k_max: float, n_points: int,
            method: str = "closed", workers: int = 1) -> SweepTable:
    if not 0 < k_min < k_max:
        raise DomainError("need 0 < k_min < k_max")
    if n_points < 2:
        raise DomainError("need at least 2 points")
    if method not in METHODS:
        raise DomainError(f"method must be one of {METHODS}")
    check_spec(spec)
    k = np.linspace(k_min, k_max, n_points)
    meta = {"method": method}

    def run(fn):
        parts = _map(partial(fn, spec), _chunks(k), workers)
        return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])

    if method == "oracle":
        t, r = run(_oracle_chunk)
        return SweepTable(k, t, r, meta)
    t, r = run(_closed_chunk)
    table = SweepTable(k, t, r, meta)
    if method == "both":
        table.t_oracle, table.r_oracle = run(_oracle_chunk)
        table.discrepancy = float(np.max(np.abs(table.t - table.t_oracle)))
    return table


@dataclass
class GridTable:
    rho_axis: np.ndarray
    k_axis: np.ndarray
    t: np.ndarray  # (n_rho, n_k); NaN rows mark invalid specs
    valid: np.ndarray
    meta: dict = field(default_factory=dict)


def _grid_row(args):
    spec, k = args
    if validate_spec(spec):
        return np.full(k.size, np.nan)
    return transmission_closed_form(spec, k)


def rho_k_grid(template: PotentialSpec, rho_min: float, rho_max: float, n_rho: int,
               k_min: float, k_max: float, n_k: int, workers: int = 1) -> GridTable:
    """Closed-form T over a rho-k grid; rows with an invalid rho are NaN."""
    if n_rho < 1 or n_k < 1 or rho_min > rho_max or not 0 < k_min <= k_max:
        raise DomainError("malformed grid")
    rhos = np.linspace(rho_min, rho_max, n_rho)
    ks = np.linspace(k_min, k_max, n_k)
    specs = [template.replace(rho=float(r)) for r in rhos]
    rows = _map(_grid_row, [(s, ks) for s in specs], workers)
    t = np.vstack(rows)
    return GridTable(rhos, ks, t, valid=~np.isnan(t[:, 0]))


@dataclass
class SaturationResult:
    stages: list[int]
    k: np.ndarray
    log10_t: np.ndarray  # (n_stages, n_k)
    distance: np.ndarray  # sup-norm of |log10 T_s - log10 T_s'|

    def pair(self, s: int, s2: int) -> float:
        return float(self.distance[self.stages.index(s), self.stages.index(s2)])

    def saturated_beyond(self, delta: float = SATURATION_DELTA):
        """Smallest listed stage from which all later pairs are within ``delta``, or None.

        At least one pair is required: the last stage alone proves nothing.
        """
        n = len(self.stages)
        for i in range(n - 1):
            if np.all(self.distance[i:, i:] <= delta):
                return self.stages[i]
        return None


def _log10_row(args):
    spec, k = args
    return log10_transmission(spec, k)


def saturation_metric(template: PotentialSpec, stages, k_min: float, k_max: float,
                      n_points: int, workers: int = 1) -> SaturationResult:
    stages = [int(s) for s in stages]
    if len(set(stages)) != len(stages):
        raise DomainError("stages must be distinct")
    specs = [template.replace(S=s) for s in stages]
    for s in specs:
        check_spec(s)
    k = np.linspace(k_min, k_max, n_points)
    logs = np.vstack(_map(_log10_row, [(s, k) for s in specs], workers))
    dist = np.max(np.abs(logs[:, None, :] - logs[None, :, :]), axis=-1)
    return SaturationResult(stages, k, logs, dist)


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    residual: float  # RMS of the log-log residuals
    n_used: int
    n_excluded: int
    V_S: float


def scaling_fit(spec: PotentialSpec, V0: float, k_lo: float, k_hi: float, n_points: int,
                null_threshold: float = 1e-14) -> ScalingFit:
    """Least-squares slope of log R against log k at the area-preserving height.

    Resonance nulls (R below ``null_threshold``) are dropped and counted.
    """
    VS = area_preserving_height(spec, V0)
    if k_lo * k_lo < 100.0 * VS:
        raise DomainError(f"k_lo^2 = {k_lo * k_lo:g} below 100 V_S = {100 * VS:g}")
    k = np.geomspace(k_lo, k_hi, n_points)
    x = log_denominator(spec.replace(V=VS), k)
    log_r = x - np.logaddexp(0.0, x)
    keep = log_r >= math.log(null_threshold)
    if keep.sum() < 8:
        raise InsufficientPoints(f"only {keep.sum()} points above the null threshold")
    lk = np.log(k[keep])
    (slope, intercept), res, *_ = np.polyfit(lk, log_r[keep], 1, full=True)
    rms = math.sqrt(float(res[0]) / keep.sum()) if len(res) else 0.0
    return ScalingFit(float(slope), float(intercept), rms, int(keep.sum()), int((~keep).sum()), VS)


@dataclass(frozen=True)
class Resonance:
    k: float
    T: float
    width: float


@dataclass
class ResonanceScan:
    peaks: list[Resonance]
    plateau: bool = False  # T == 1 over the whole window (V = 0)


def _refine(spec, a, b, c, tol):
    f = lambda z: float(log_denominator(spec, z))
    res = minimize_scalar(f, bracket=(a, b, c), method="golden", tol=tol / b)
    return min(max(res.x, a), c)


def _crossing(spec, inside, outside, level, tol=1e-12):
    for _ in range(200):
        if abs(outside - inside) <= tol:
            break
        mid = 0.5 * (inside + outside)
        if transmission_closed_form(spec, mid) >= level:
            inside = mid
        else:
            outside = mid
    return inside


def _half_width(spec, k0, grid, t_grid, level):
    """k-extent around ``k0`` where T stays at or above ``level``."""
    i = int(np.searchsorted(grid, k0))
    j = i - 1
    while j >= 0 and t_grid[j] >= level:
        j -= 1
    left = _crossing(spec, k0, grid[j], level) if j >= 0 else grid[0]
    j = i
    while j < grid.size and t_grid[j] >= level:
        j += 1
    right = _crossing(spec, k0, grid[j], level) if j < grid.size else grid[-1]
    return right - left


def find_resonances(spec: PotentialSpec, k_min: float, k_max: float, coarse_points: int = 2000,
                    threshold: float = 0.99, tol: float = 1e-10) -> ResonanceScan:
    """Transmission peaks reaching ``threshold``, refined by golden-section search.

    Every local maximum of T on the coarse grid is refined on its two
    neighbouring intervals (minimising the log of the reflection term, which
    keeps resolution where T is within rounding of 1).  Refined peaks at or
    above ``threshold`` are kept; the width is the k-interval where
    T >= threshold/2.
    """
    if not 0 < threshold < 1:
        raise DomainError("threshold must lie in (0, 1)")
    if coarse_points < 100:
        raise DomainError("coarse_points must be >= 100")
    check_spec(spec)
    if spec.V == 0:
        return ResonanceScan([], plateau=True)
    k = np.linspace(k_min, k_max, coarse_points)
    x = log_denominator(spec, k)
    t_grid = np.exp(-np.logaddexp(0.0, x))
    found: list[float] = []
    for i in range(1, coarse_points - 1):
        if x[i] <= x[i - 1] and x[i] <= x[i + 1]:
            if x[i] == x[i - 1] == x[i + 1]:
                ks = k[i]
            else:
                ks = _refine(spec, k[i - 1], k[i], k[i + 1], tol)
            if transmission_closed_form(spec, ks) >= threshold:
                found.append(float(ks))
    found.sort()
    merged: list[float] = []
    for ks in found:
        if merged and ks - merged[-1] < 1e-9:
            if transmission_closed_form(spec, ks) > transmission_closed_form(spec, merged[-1]):
                merged[-1] = ks
            continue
        merged.append(ks)
    peaks = [
        Resonance(ks, float(transmission_closed_form(spec, ks)), _half_width(spec, ks, k, t_grid, threshold / 2))
        for ks in merged
    ]
    return ResonanceScan(peaks)


def bloch_bands(spec: PotentialSpec, k_min: float, k_max: float, n_points: int = 20000,
                level: int | None = None):
    """k-intervals where the Bloch argument of ``level`` (default: outermost) satisfies |Gamma| <= 1."""
    check_spec(spec)
    if spec.S == 0:
        raise DomainError("no Bloch arguments at S = 0")
    q = (spec.S if level is None else level) - 1
    k = np.linspace(k_min, k_max, n_points)
    g = np.concatenate([_closed_form_terms(spec, c).gamma[q] for c in _chunks(k)])
    inside = np.abs(g) <= 1.0
    bands = []
    start = None
    for i, flag in enumerate(inside):
        if flag and start is None:
            start = i
        if not flag and start is not None:
            bands.append((float(k[start]), float(k[i - 1])))
            start = None
    if start is not None:
        bands.append((float(k[start]), float(k[-1])))
    return bands


def resonance_window(spec: PotentialSpec, k_min: float, k_max: float, n_points: int = 20000,
                     pad: float = 0.2):
    """Zoom window around the lowest band of the outermost Bloch argument."""
    bands = bloch_bands(spec, k_min, k_max, n_points)
    if not bands:
        raise DomainError("no band of the outermost Bloch argument in range")
    a, b = bands[0]
    step = (k_max - k_min) / (n_points - 1)
    w = max(b - a, step)
    return max(k_min, a - pad * w - step), b + pad * w + step
