"""Exact orbits of the lateral critical points and their symbolic itineraries.

The critical points of a map with n laps are the one-sided limits at its
breakpoints.  Every orbit here is computed over the rationals with exact
recurrence detection, so its classification (periodic / eventually periodic /
escaped to the hole / truncated at a depth cap) is certain, never a floating
guess.  Itineraries attach one alphabet symbol per orbit point plus the sign
of the local slope; the hole symbol carries sign 0 and ends the orbit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .errors import DenominatorBlowup
from .maps import HOLE, LEFT, RIGHT, SIDE_LABEL, SidedPoint, ValidatedMap

PERIODIC = "periodic"
EVENTUALLY_PERIODIC = "eventually-periodic"
ESCAPED = "escaped"
TRUNCATED = "truncated"

DEFAULT_CAP = 10_000
DEFAULT_DENOM_BITS = 4096


@dataclass(frozen=True)
class Alphabet:
    """Ordered symbols, one per partition piece: laps get L, M1..Mk, R; the
    hole gets H.  Order matches the real-line order of the pieces."""

    symbols: Tuple[str, ...]          # one per piece, spatial order
    lap_symbols: Tuple[str, ...]      # symbols of laps only, spatial order
    lap_of_symbol: Dict[str, int]     # lap symbol -> lap index

    @classmethod
    def for_map(cls, vmap: ValidatedMap) -> "Alphabet":
        lap_pieces = [k for k, idx in enumerate(vmap.pieces) if idx != HOLE]
        names = {}
        if lap_pieces:
            names[lap_pieces[0]] = "L"
            if len(lap_pieces) > 1:
                names[lap_pieces[-1]] = "R"
            for j, k in enumerate(lap_pieces[1:-1], start=1):
                names[k] = f"M{j}"
        symbols = tuple(
            "H" if idx == HOLE else names[k] for k, idx in enumerate(vmap.pieces)
        )
        lap_symbols = tuple(symbols[k] for k in lap_pieces)
        lap_of_symbol = {symbols[k]: vmap.pieces[k] for k in lap_pieces}
        return cls(symbols, lap_symbols, lap_of_symbol)


@dataclass(frozen=True)
class OrbitRecord:
    start: SidedPoint
    points: Tuple[SidedPoint, ...]
    kind: str
    preperiod: int = 0   # periodic / eventually-periodic
    period: int = 0
    steps: int = 0       # escaped: F^steps(start) lies in the hole
    depth: int = 0       # truncated

    def cycle(self) -> Tuple[SidedPoint, ...]:
        if self.kind not in (PERIODIC, EVENTUALLY_PERIODIC):
            return ()
        return self.points[self.preperiod : self.preperiod + self.period]


@dataclass(frozen=True)
class Itinerary:
    """Symbols, slope signs and lap indices along an orbit.

    signs[k] is +1/-1 by the slope at the k-th point and 0 at an H; laps[k]
    is the lap index (None at an H).  Structure mirrors the orbit class.
    """

    symbols: Tuple[str, ...]
    signs: Tuple[int, ...]
    laps: Tuple[Optional[int], ...]
    kind: str
    preperiod: int = 0
    period: int = 0

    def notation(self) -> str:
        toks = list(self.symbols)
        if self.kind in (PERIODIC, EVENTUALLY_PERIODIC):
            head = "".join(toks[: self.preperiod])
            cycle = "".join(toks[self.preperiod : self.preperiod + self.period])
            return f"{head}({cycle})^inf"
        if self.kind == TRUNCATED:
            return "".join(toks) + "..."
        return "".join(toks)


def orbit(
    vmap: ValidatedMap,
    start: SidedPoint,
    cap: int = DEFAULT_CAP,
    denom_bits: int = DEFAULT_DENOM_BITS,
    truncate: bool = False,
) -> OrbitRecord:
    """Iterate eval_sided with exact recurrence detection.

    Recurrence is keyed on the exact (rational, side) pair.  A denominator
    exceeding `denom_bits` raises DenominatorBlowup unless `truncate` is set,
    in which case (like hitting `cap`) the orbit is returned as truncated.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    seen: Dict[Tuple[Fraction, int], int] = {}
    points: List[SidedPoint] = []
    p: Optional[SidedPoint] = start
    for k in range(cap + 1):
        if p is None:
            # previous point was in the hole and already recorded
            return OrbitRecord(start, tuple(points), ESCAPED, steps=len(points) - 1)
        if p.x.denominator.bit_length() > denom_bits:
            if truncate:
                return OrbitRecord(start, tuple(points), TRUNCATED, depth=len(points))
            raise DenominatorBlowup(
                f"denominator exceeds {denom_bits} bits at step {k}",
                step=k,
                bits=p.x.denominator.bit_length(),
            )
        key = (p.x, p.side)
        if key in seen:
            first = seen[key]
            points.append(p)
            period = k - first
            kind = PERIODIC if first == 0 else EVENTUALLY_PERIODIC
            return OrbitRecord(start, tuple(points), kind, preperiod=first, period=period)
        seen[key] = k
        points.append(p)
        if vmap.pieces[vmap.piece_at(p)] == HOLE:
            return OrbitRecord(start, tuple(points), ESCAPED, steps=k)
        p = vmap.eval_sided(p)
    return OrbitRecord(start, tuple(points), TRUNCATED, depth=cap)


def itinerary(vmap: ValidatedMap, rec: OrbitRecord, alphabet: Optional[Alphabet] = None) -> Itinerary:
    """Symbol/sign/lap sequence for an orbit record of the same map.

    Orbit recurrence is detected on exact (point, side) pairs, but the
    symbolic sequence can repeat sooner: a negative-slope lap fixing an
    interior point gives a side-alternating orbit of point period 1, whose
    sided period is 2.  The cycle is reduced to the minimal period of the
    (symbol, sign, lap) triples (and the preperiod shortened likewise), so
    downstream cyclotomic factors use the true symbolic period.
    """
    alphabet = alphabet or Alphabet.for_map(vmap)
    if rec.kind in (PERIODIC, EVENTUALLY_PERIODIC):
        pts = rec.points[: rec.preperiod + rec.period]
    else:
        pts = rec.points
    symbols, signs, laps = [], [], []
    for p in pts:
        piece = vmap.piece_at(p)
        lap_idx = vmap.pieces[piece]
        symbols.append(alphabet.symbols[piece])
        if lap_idx == HOLE:
            signs.append(0)
            laps.append(None)
        else:
            signs.append(vmap.map.laps[lap_idx].sign)
            laps.append(lap_idx)

    pre, per = rec.preperiod, rec.period
    kind = rec.kind
    if kind in (PERIODIC, EVENTUALLY_PERIODIC):
        triples = list(zip(symbols, signs, laps))
        cycle = triples[pre : pre + per]
        for d in range(1, per + 1):
            if per % d == 0 and all(cycle[k] == cycle[k % d] for k in range(per)):
                per = d
                break
        while pre > 0 and triples[pre - 1] == triples[pre - 1 + per]:
            pre -= 1
        symbols = symbols[: pre + per]
        signs = signs[: pre + per]
        laps = laps[: pre + per]
        kind = PERIODIC if pre == 0 else EVENTUALLY_PERIODIC

    return Itinerary(
        tuple(symbols), tuple(signs), tuple(laps), kind, pre, per,
    )


@dataclass(frozen=True)
class KneadingEntry:
    label: str                 # e.g. "a2-"
    point: SidedPoint
    record: OrbitRecord
    itin: Itinerary


@dataclass(frozen=True)
class KneadingData:
    """Itineraries of the tracked lateral critical points.

    `entries` are the kneading tuple proper: both sides of every interior
    breakpoint except the hole-facing ones, in breakpoint order.  `endpoints`
    carry the orbits of the outermost laterals (fixed points in strict mode);
    `hole_inner` are the two hole-facing laterals, recorded without orbits
    (they only matter to the chain complex).
    """

    alphabet: Alphabet
    entries: Tuple[KneadingEntry, ...]
    endpoints: Tuple[KneadingEntry, ...]
    hole_inner: Tuple[Tuple[str, SidedPoint], ...]

    def notations(self) -> Tuple[str, ...]:
        return tuple(e.itin.notation() for e in self.entries)

    def all_tracked(self) -> Tuple[KneadingEntry, ...]:
        return self.entries + self.endpoints

    def truncated(self) -> bool:
        return any(e.record.kind == TRUNCATED for e in self.all_tracked())


def _label(vmap: ValidatedMap, p: SidedPoint) -> str:
    i = vmap.breakpoints.index(p.x) + 1
    return f"a{i}{SIDE_LABEL[p.side]}"


def kneading_data(
    vmap: ValidatedMap,
    cap: int = DEFAULT_CAP,
    denom_bits: int = DEFAULT_DENOM_BITS,
    truncate: bool = False,
) -> KneadingData:
    alphabet = Alphabet.for_map(vmap)
    bps = vmap.breakpoints
    hole_piece = vmap.hole_index
    hole_lo, hole_hi = bps[hole_piece], bps[hole_piece + 1]

    def tracked(p: SidedPoint) -> KneadingEntry:
        rec = orbit(vmap, p, cap=cap, denom_bits=denom_bits, truncate=truncate)
        return KneadingEntry(_label(vmap, p), p, rec, itinerary(vmap, rec, alphabet))

    entries: List[KneadingEntry] = []
    hole_inner: List[Tuple[str, SidedPoint]] = []
    for i in range(1, len(bps) - 1):
        x = bps[i]
        for side in (LEFT, RIGHT):
            p = SidedPoint(x, side)
            faces_hole = (x == hole_lo and side == RIGHT) or (
                x == hole_hi and side == LEFT
            )
            if faces_hole:
                hole_inner.append((_label(vmap, p), p))
            else:
                entries.append(tracked(p))

    endpoints: List[KneadingEntry] = []
    if vmap.pieces[0] != HOLE:
        endpoints.append(tracked(SidedPoint(bps[0], RIGHT)))
    if vmap.pieces[-1] != HOLE:
        endpoints.append(tracked(SidedPoint(bps[-1], LEFT)))

    return KneadingData(alphabet, tuple(entries), tuple(endpoints), tuple(hole_inner))


def shadow_orbit(vmap: ValidatedMap, start: SidedPoint, n_steps: int) -> List[float]:
    """Double-precision shadow of an orbit, for diagnostics only.

    Branches are chosen by nearest containment of the float iterate; no side
    tags.  Useful to see where floating iteration loses the exact lap
    sequence (typically once the iterate drifts within ~1e-9 of a breakpoint).
    """
    xs = [float(start.x)]
    laps = vmap.map.laps
    for _ in range(n_steps):
        x = xs[-1]
        chosen = None
        for lap in laps:
            if float(lap.lo) <= x <= float(lap.hi):
                chosen = lap
                break
        if chosen is None:
            break
        xs.append(float(chosen.slope) * x + float(chosen.intercept))
    return xs


def shadow_agreement_steps(vmap: ValidatedMap, rec: OrbitRecord, tol: float = 1e-9) -> int:
    """Number of initial steps where the shadow's lap sequence matches the
    exact orbit's, stopping once the shadow sits within `tol` of a breakpoint."""
    xs = shadow_orbit(vmap, rec.start, len(rec.points) - 1)
    agree = 0
    for p, x in zip(rec.points, xs):
        if min(abs(x - float(b)) for b in vmap.breakpoints) < tol:
            break
        exact_piece = vmap.piece_at(p)
        lo, hi = vmap.breakpoints[exact_piece], vmap.breakpoints[exact_piece + 1]
        if not (float(lo) <= x <= float(hi)):
            break
        agree += 1
    return agree
