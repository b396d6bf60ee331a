"""Seeded generator of random Markov maps for identity testing.

Random slopes almost never produce finite critical orbits, so the generator
works on a rational grid: breakpoints are multiples of 1/den and every lap
gets an integer slope and a grid intercept.  The grid is then closed under
the map (integer slope times k/den plus e/den stays on the grid), which
forces every critical orbit to be eventually periodic or to escape -- the
Markov property by construction.

Strict-mode conventions hold: the first and last laps fix the endpoints.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import List, Optional, Tuple

from .maps import HoleMap, Lap, ValidatedMap, validate_map


def _grid_map(rng: random.Random) -> Optional[HoleMap]:
    den = rng.choice([6, 8, 10, 12])
    n_pieces = rng.choice([3, 4, 4, 5])
    if n_pieces - 1 > den - 1:
        return None
    cuts = sorted(rng.sample(range(1, den), n_pieces - 1))
    bounds = [0] + cuts + [den]
    hole_piece = rng.randrange(1, n_pieces - 1)

    laps: List[Lap] = []
    for k in range(n_pieces):
        lo, hi = bounds[k], bounds[k + 1]
        if k == hole_piece:
            continue
        length = hi - lo
        smax = den // length
        if smax < 2:
            return None
        mag = rng.randint(2, min(smax, 6))
        span = mag * length
        if k == 0:
            # fix the left endpoint: F(0) = 0
            sign, start = 1, 0
        elif k == n_pieces - 1:
            # fix the right endpoint: F(1) = 1
            sign, start = 1, den - span
        else:
            sign = rng.choice([1, -1])
            start = rng.randint(0, den - span)
        if sign > 0:
            slope = Fraction(mag)
            intercept = Fraction(start, den) - slope * Fraction(lo, den)
        else:
            slope = Fraction(-mag)
            intercept = Fraction(start + span, den) - slope * Fraction(lo, den)
        laps.append(Lap(Fraction(lo, den), Fraction(hi, den), slope, intercept))

    return HoleMap(
        domain=(Fraction(0), Fraction(1)),
        laps=tuple(laps),
        hole=(Fraction(bounds[hole_piece], den), Fraction(bounds[hole_piece + 1], den)),
        name=f"grid-{den}",
    )


def _full_branch_map(rng: random.Random) -> Optional[HoleMap]:
    """Every lap maps onto [0, 1]; lap lengths are 1/slope, one gap is the hole."""
    n_laps = rng.choice([2, 2, 3])
    mags = [rng.randint(2, 5) for _ in range(n_laps)]
    total = sum(Fraction(1, m) for m in mags)
    if total >= 1:
        return None
    gap = 1 - total
    hole_after = rng.randrange(0, n_laps - 1)

    laps: List[Lap] = []
    cursor = Fraction(0)
    for k, mag in enumerate(mags):
        lo, hi = cursor, cursor + Fraction(1, mag)
        first, last = k == 0, k == n_laps - 1
        sign = 1 if first or last else rng.choice([1, -1])
        if sign > 0:
            slope = Fraction(mag)
            intercept = -slope * lo
        else:
            slope = Fraction(-mag)
            intercept = -slope * hi
        laps.append(Lap(lo, hi, slope, intercept))
        cursor = hi
        if k == hole_after:
            cursor += gap
    hole = (laps[hole_after].hi, laps[hole_after].hi + gap)
    return HoleMap((Fraction(0), Fraction(1)), tuple(laps), hole, name="full-branch")


def generate_corpus(
    n_maps: int = 20, seed: int = 20260810, full_branch_share: float = 0.35,
    min_entropy: float = 0.05, root_gap: float = 1e-5,
) -> List[ValidatedMap]:
    """Deterministic list of validated Markov maps.

    Two degenerate families are rerolled.  Maps with spectral radius of A at
    or below e**min_entropy carry (near) zero entropy.  Maps where a
    reciprocal Perron root at beta = 0 or 1 sits within root_gap of a
    cyclotomic root of R(t) defeat the determinant-root cross-check by
    construction (the root-discard window cannot tell the two apart; e.g. a
    surviving set that is a single fixed point); the identity suite still
    holds on them, but they make useless route-agreement subjects.
    """
    import numpy as np

    from .invariants import numeric_q, r_factor_roots
    from .kneading import r_polynomial
    from .markov import build_markov_partition, transition_matrix
    from .orbits import kneading_data

    rng = random.Random(seed)
    out: List[ValidatedMap] = []
    attempts = 0
    while len(out) < n_maps and attempts < 10000 * n_maps:
        attempts += 1
        want_full = rng.random() < full_branch_share
        hm = _full_branch_map(rng) if want_full else _grid_map(rng)
        if hm is None:
            continue
        try:
            vmap = validate_map(hm)
            data = kneading_data(vmap, cap=5000)
            part = build_markov_partition(vmap, data)
        except Exception:
            continue
        a = transition_matrix(vmap, part)
        sr0 = float(np.max(np.abs(np.linalg.eigvals(np.array(a, dtype=float)))))
        if sr0 <= float(np.exp(min_entropy)):
            continue
        rfac = r_polynomial(data, vmap)
        mags = vmap.lap_magnitudes()
        clash = False
        for beta in (0, 1):
            q = numeric_q(vmap, part, a, beta)
            sr = float(np.max(np.abs(np.linalg.eigvals(q))))
            if sr <= 0:
                clash = True
                break
            if beta == 1 and sr >= 1.0 - 1e-9:
                # zero escape rate: a closed subsystem never sees the hole
                clash = True
                break
            t_perron = 1.0 / sr
            for r in r_factor_roots(rfac, beta, mags):
                if abs(t_perron - r) < root_gap * max(1.0, r):
                    clash = True
                    break
            if clash:
                break
        if clash:
            continue
        out.append(vmap)
    if len(out) < n_maps:
        raise RuntimeError("corpus generation failed to produce enough maps")
    return out
