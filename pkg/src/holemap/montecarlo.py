"""Statistical cross-checks: particle escape rates and cylinder counting.

These estimators share nothing with the spectral/kneading machinery, which is
the point: they validate it at coarse tolerance from raw dynamics.

Reproducibility contract: particles are processed in fixed-size batches of
BATCH_SIZE; batch b draws from a Philox counter-based generator seeded with
SeedSequence(entropy=seed, spawn_key=(b,)).  Batch results are pure counts,
so any scheduling of batches over workers yields identical totals; a given
seed fixes the output exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .errors import CombinatorialBlowup, InsufficientData
from .maps import ValidatedMap

BATCH_SIZE = 65536
BREAKPOINT_GAP = 1e-12


@dataclass(frozen=True)
class SurvivalSeries:
    n_points: int
    k_max: int
    seed: int
    counts: Tuple[int, ...]  # survivors after 0..k_max steps; non-increasing


def _batch_rng(seed: int, batch_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(batch_index,))
    return np.random.Generator(np.random.Philox(ss))


def simulate_survival(
    vmap: ValidatedMap, n_points: int, k_max: int, seed: int,
) -> SurvivalSeries:
    """Iterate a uniform ensemble in float64; a point dies entering the hole.

    counts[0] already excludes points sampled inside the hole.  Initial
    points closer than 1e-12 to a breakpoint are redrawn (their branch
    choice would be meaningless at double precision).
    """
    lo, hi = (float(v) for v in vmap.map.domain)
    hlo, hhi = (float(v) for v in vmap.map.hole)
    breaks = np.array([float(b) for b in vmap.breakpoints])
    inner = breaks[1:-1]
    n_pieces = vmap.n_pieces
    slopes = np.zeros(n_pieces)
    intercepts = np.zeros(n_pieces)
    for k, lap_idx in enumerate(vmap.pieces):
        if lap_idx >= 0:
            slopes[k] = float(vmap.map.laps[lap_idx].slope)
            intercepts[k] = float(vmap.map.laps[lap_idx].intercept)

    counts = np.zeros(k_max + 1, dtype=np.int64)
    done = 0
    batch_index = 0
    while done < n_points:
        nb = min(BATCH_SIZE, n_points - done)
        rng = _batch_rng(seed, batch_index)
        xs = lo + (hi - lo) * rng.random(nb)
        for _ in range(64):
            near = np.min(np.abs(xs[:, None] - breaks[None, :]), axis=1) < BREAKPOINT_GAP
            if not near.any():
                break
            xs[near] = lo + (hi - lo) * rng.random(int(near.sum()))
        alive = ~((xs > hlo) & (xs < hhi))
        counts[0] += int(alive.sum())
        for k in range(1, k_max + 1):
            piece = np.searchsorted(inner, xs, side="right")
            xs = np.where(alive, slopes[piece] * xs + intercepts[piece], xs)
            np.clip(xs, lo, hi, out=xs)
            alive &= ~((xs > hlo) & (xs < hhi))
            counts[k] += int(alive.sum())
        done += nb
        batch_index += 1
    return SurvivalSeries(n_points, k_max, seed, tuple(int(c) for c in counts))


def estimate_escape_rate(series: SurvivalSeries, burn_in: int = 0) -> Tuple[float, float]:
    """Least-squares slope of log survivors vs step, negated, with its
    standard error; requires at least 5 post-burn-in counts above 100."""
    ks, ys = [], []
    for k in range(burn_in, series.k_max + 1):
        c = series.counts[k]
        if c > 0:
            ks.append(float(k))
            ys.append(math.log(c))
    usable = sum(1 for k in range(burn_in, series.k_max + 1) if series.counts[k] > 100)
    if usable < 5:
        raise InsufficientData(
            f"only {usable} post-burn-in counts above 100; need at least 5"
        )
    k_arr, y_arr = np.array(ks), np.array(ys)
    k_mean = k_arr.mean()
    sxx = float(((k_arr - k_mean) ** 2).sum())
    slope = float(((k_arr - k_mean) * (y_arr - y_arr.mean())).sum() / sxx)
    resid = y_arr - (y_arr.mean() + slope * (k_arr - k_mean))
    dof = max(len(k_arr) - 2, 1)
    std_err = math.sqrt(float((resid**2).sum()) / dof / sxx)
    return -slope, std_err


def _refine(vmap: ValidatedMap, cylinders, max_cylinders: int):
    """One exact refinement step: intersect each cylinder's image with every
    lap and pull back through the inverse branch."""
    out = []
    for clo, chi, s, c in cylinders:
        ilo, ihi = s * clo + c, s * chi + c
        if ilo > ihi:
            ilo, ihi = ihi, ilo
        for lap in vmap.map.laps:
            cut_lo, cut_hi = max(ilo, lap.lo), min(ihi, lap.hi)
            if cut_lo >= cut_hi:
                continue
            plo, phi = (cut_lo - c) / s, (cut_hi - c) / s
            if plo > phi:
                plo, phi = phi, plo
            out.append((plo, phi, lap.slope * s, lap.slope * c + lap.intercept))
            if len(out) > max_cylinders:
                raise CombinatorialBlowup(f"more than {max_cylinders} cylinders")
    return out


def _moran_exponent(lengths: np.ndarray) -> float:
    """Solve sum lengths**s = 1 by bisection."""
    logs = np.log(lengths)

    def f(s):
        return float(np.exp(s * logs).sum()) - 1.0

    lo, hi = 0.0, 1.0
    while f(hi) > 0:
        hi *= 2.0
        if hi > 64:
            raise ValueError("cylinder exponent out of range")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def cylinder_dimension_profile(
    vmap: ValidatedMap, depth: int, max_cylinders: int = 10**7
) -> List[float]:
    """s_k for k = 1..depth, where s_k solves sum of depth-k cylinder
    lengths**s = 1.  Cylinders are enumerated exactly over the rationals."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    one = vmap.map.domain[0] - vmap.map.domain[0] + 1  # Fraction(1)
    cylinders = [(vmap.map.domain[0], vmap.map.domain[1], one, 0 * one)]
    profile = []
    for _ in range(depth):
        cylinders = _refine(vmap, cylinders, max_cylinders)
        if not cylinders:
            profile.append(0.0)
            break
        lengths = np.array([float(hi - lo) for lo, hi, _, _ in cylinders])
        profile.append(_moran_exponent(lengths))
    return profile


def cylinder_dimension(vmap: ValidatedMap, depth: int, max_cylinders: int = 10**7) -> float:
    """Richardson-extrapolated cylinder-counting dimension.

    s_k converges like s + c/k, so k*s_k - (k-1)*s_{k-1} cancels the leading
    error term; for exactly self-similar maps every s_k already equals s.
    """
    profile = cylinder_dimension_profile(vmap, depth, max_cylinders)
    if len(profile) == 1:
        return profile[0]
    k = len(profile)
    return k * profile[-1] - (k - 1) * profile[-2]
