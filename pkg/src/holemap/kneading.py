"""Weighted invariant coordinates, kneading increments, matrix, determinant.

The invariant coordinate of a critical point is the formal power series
sum_k tau_k t^k S_k, where S_k is the k-th itinerary symbol and tau_k is the
signed product of the weights w_i = |slope_i|**(-beta) collected along the
first k steps.  An (eventually) periodic tail closes into the rational form
head + cycle/(1 - tau_cycle t^q); the factor 1 - tau_cycle t^q is the tail's
cyclotomic polynomial and the only kind of denominator that ever appears.
Denominators are therefore kept as explicit factor lists and never expanded
or cancelled via GCDs: identity checks multiply through by them instead.

Hole symbols carry sign 0, so an escaping orbit contributes a plain
polynomial coordinate; truncated (aperiodic) orbits contribute a degree-K
polynomial flagged approximate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import NonSquareKneadingMatrix
from .maps import HOLE, LEFT, RIGHT, ValidatedMap
from .orbits import (
    ESCAPED,
    EVENTUALLY_PERIODIC,
    PERIODIC,
    TRUNCATED,
    Itinerary,
    KneadingData,
)
from .weightring import WeightPoly, det_bareiss


@dataclass(frozen=True)
class RationalFn:
    """numer / prod(denom_factors); factors stay in factored cyclotomic form."""

    numer: WeightPoly
    denom_factors: Tuple[WeightPoly, ...] = ()

    def is_zero(self) -> bool:
        return self.numer.is_zero()


def _factor_sort(factors) -> Tuple[WeightPoly, ...]:
    return tuple(sorted(factors, key=lambda f: f.key()))


def _dedupe(factors) -> List[WeightPoly]:
    out: List[WeightPoly] = []
    seen = set()
    for f in factors:
        k = f.key()
        if k not in seen:
            seen.add(k)
            out.append(f)
    return out


def rf_combine(a: RationalFn, b: RationalFn, subtract: bool) -> RationalFn:
    """a +/- b over the union of their (distinct) denominator factors."""
    factors = _dedupe(list(a.denom_factors) + list(b.denom_factors))
    a_keys = {f.key() for f in a.denom_factors}
    b_keys = {f.key() for f in b.denom_factors}
    na, nb = a.numer, b.numer
    for f in factors:
        if f.key() not in a_keys:
            na = na * f
        if f.key() not in b_keys:
            nb = nb * f
    return RationalFn(na - nb if subtract else na + nb, _factor_sort(factors))


def tau_sequence(itin: Itinerary, vmap: ValidatedMap) -> List[WeightPoly]:
    """tau_k as monomials (t-degree 0) for k = 0..len(symbols)."""
    n = vmap.n_laps
    taus = [WeightPoly.one(n)]
    sign = 1
    exps = [0] * n
    for eps, lap in zip(itin.signs, itin.laps):
        if eps == 0:
            sign = 0
        else:
            sign *= eps
            exps[lap] += 1
        taus.append(WeightPoly.monomial(sign, 0, tuple(exps), n) if sign else WeightPoly.zero(n))
    return taus


def cyclotomic_factor(itin: Itinerary, vmap: ValidatedMap) -> Optional[WeightPoly]:
    """1 - tau_cycle * t^q for a periodic tail; None for escaped/truncated."""
    if itin.kind not in (PERIODIC, EVENTUALLY_PERIODIC):
        return None
    n = vmap.n_laps
    sign = 1
    exps = [0] * n
    for k in range(itin.preperiod, itin.preperiod + itin.period):
        sign *= itin.signs[k]
        exps[itin.laps[k]] += 1
    return WeightPoly.one(n) - WeightPoly.monomial(sign, itin.period, tuple(exps), n)


def invariant_coordinate(itin: Itinerary, vmap: ValidatedMap) -> List[RationalFn]:
    """Coordinate vector over the lap symbols (spatial order; no H column).

    The H term of an escaping itinerary is deliberately dropped: its sign is
    0, so it never feeds a tau product, and the kneading matrix carries no
    hole column.
    """
    n = vmap.n_laps
    from .orbits import Alphabet

    alphabet = Alphabet.for_map(vmap)
    col_of_lap = {alphabet.lap_of_symbol[s]: c for c, s in enumerate(alphabet.lap_symbols)}
    taus = tau_sequence(itin, vmap)

    head_end = len(itin.symbols)
    cyc = None
    if itin.kind in (PERIODIC, EVENTUALLY_PERIODIC):
        head_end = itin.preperiod
        cyc = cyclotomic_factor(itin, vmap)

    heads = [WeightPoly.zero(n) for _ in range(len(col_of_lap))]
    cycles = [WeightPoly.zero(n) for _ in range(len(col_of_lap))]
    for k, lap in enumerate(itin.laps):
        if lap is None:
            continue  # hole symbol
        c = col_of_lap[lap]
        term = taus[k].mul_t(k)
        if k < head_end:
            heads[c] = heads[c] + term
        else:
            cycles[c] = cycles[c] + term

    out = []
    for c in range(len(col_of_lap)):
        if cyc is None:
            out.append(RationalFn(heads[c]))
        else:
            out.append(RationalFn(heads[c] * cyc + cycles[c], (cyc,)))
    return out


def kneading_increment(
    plus: Optional[Sequence[RationalFn]], minus: Optional[Sequence[RationalFn]]
) -> List[RationalFn]:
    """theta_plus - theta_minus; hole endpoints pass a single one-sided side."""
    if plus is None and minus is None:
        raise ValueError("at least one one-sided coordinate required")
    if plus is None:
        return list(minus)
    if minus is None:
        return list(plus)
    return [rf_combine(p, m, subtract=True) for p, m in zip(plus, minus)]


@dataclass(frozen=True)
class KneadingMatrix:
    """Rows are kneading increments (one per interior breakpoint, in order);
    columns are the lap symbols.  `cleared[i]` holds row i multiplied through
    by `row_denoms[i]` (the distinct cyclotomic factors of that row)."""

    lap_symbols: Tuple[str, ...]
    row_labels: Tuple[str, ...]
    rows: Tuple[Tuple[RationalFn, ...], ...]
    cleared: Tuple[Tuple[WeightPoly, ...], ...]
    row_denoms: Tuple[Tuple[WeightPoly, ...], ...]
    approximate_depth: Optional[int] = None

    @property
    def size(self) -> int:
        return len(self.rows)


def kneading_matrix(vmap: ValidatedMap, data: KneadingData) -> KneadingMatrix:
    bps = vmap.breakpoints
    hole_piece = vmap.hole_index
    hole_lo, hole_hi = bps[hole_piece], bps[hole_piece + 1]

    coords: Dict[Tuple, List[RationalFn]] = {}
    for e in data.entries:
        coords[(e.point.x, e.point.side)] = invariant_coordinate(e.itin, vmap)

    rows: List[Tuple[RationalFn, ...]] = []
    labels: List[str] = []
    for i in range(1, len(bps) - 1):
        x = bps[i]
        plus = coords.get((x, RIGHT))
        minus = coords.get((x, LEFT))
        if x == hole_lo:
            plus = None  # right side faces the hole
        if x == hole_hi:
            minus = None
        rows.append(tuple(kneading_increment(plus, minus)))
        labels.append(f"a{i + 1}")

    n = vmap.n_laps
    if len(rows) != n:
        raise NonSquareKneadingMatrix(
            f"{len(rows)} increments vs {n} lap columns"
        )

    cleared_rows: List[Tuple[WeightPoly, ...]] = []
    denoms: List[Tuple[WeightPoly, ...]] = []
    for row in rows:
        factors = _dedupe(f for entry in row for f in entry.denom_factors)
        keys = [f.key() for f in factors]
        cleared = []
        for entry in row:
            value = entry.numer
            entry_keys = {f.key() for f in entry.denom_factors}
            for f, k in zip(factors, keys):
                if k not in entry_keys:
                    value = value * f
            cleared.append(value)
        cleared_rows.append(tuple(cleared))
        denoms.append(_factor_sort(factors))

    depth = None
    if data.truncated():
        depth = max(len(e.itin.symbols) for e in data.entries)

    from .orbits import Alphabet

    return KneadingMatrix(
        Alphabet.for_map(vmap).lap_symbols,
        tuple(labels),
        tuple(rows),
        tuple(cleared_rows),
        tuple(denoms),
        approximate_depth=depth,
    )


def r_polynomial(data: KneadingData, vmap: ValidatedMap) -> Tuple[WeightPoly, ...]:
    """Distinct cyclotomic factors of the periodic tails in the kneading data.

    All tracked orbits contribute, the endpoint ones included: their fixed
    (or eventually periodic) tails sit inside the transfer matrix whether or
    not an interior itinerary happens to share them, so the determinant
    identity D * R = P_Q needs their factors in R.  Escaped itineraries
    contribute nothing; distinctness is polynomial equality in the per-lap
    ring.
    """
    factors = []
    for e in data.all_tracked():
        f = cyclotomic_factor(e.itin, vmap)
        if f is not None:
            factors.append(f)
    return _factor_sort(_dedupe(factors))


def kneading_determinant(
    km: KneadingMatrix, nvars: int, r_factors: Optional[Sequence[WeightPoly]] = None
) -> RationalFn:
    """Exact determinant, normalized so the numerator's constant term is +1
    and the denominator is the full cyclotomic product R(t).

    The raw determinant over the cleared rows equals numer * prod(excess)
    where excess collects factors shared between rows; that division is
    exact whenever the kneading orbits are (eventually) periodic or escaped.
    When `r_factors` (from r_polynomial) contains tails absent from every
    increment row -- endpoint orbits whose tail no interior itinerary shares
    -- the determinant is presented over the full R by multiplying those
    factors into the numerator, which is what makes numer equal P_Q.
    """
    det = det_bareiss([list(r) for r in km.cleared])

    multiset: Dict[Tuple, Tuple[WeightPoly, int]] = {}
    for denom in km.row_denoms:
        for f in denom:
            k = f.key()
            poly, count = multiset.get(k, (f, 0))
            multiset[k] = (poly, count + 1)

    numer = det
    for poly, count in multiset.values():
        for _ in range(count - 1):
            numer = numer.exact_div(poly)

    if r_factors is None:
        denominator = _factor_sort(poly for poly, _ in multiset.values())
    else:
        row_keys = set(multiset)
        if not row_keys <= {f.key() for f in r_factors}:
            raise ValueError("increment rows carry a cyclotomic factor outside R(t)")
        for f in r_factors:
            if f.key() not in row_keys:
                numer = numer * f
        denominator = _factor_sort(r_factors)

    const = numer.constant()
    if const < 0:
        numer = -numer

    if km.approximate_depth is not None:
        numer = numer.truncate_t(km.approximate_depth)

    return RationalFn(numer, denominator)
