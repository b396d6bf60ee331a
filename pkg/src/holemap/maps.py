"""Piecewise-linear expanding interval maps with one open hole.

A map is a list of affine laps (each with |slope| > 1) whose closed domains,
together with the closure of one open hole, tile a compact interval.  Points
are evaluated exactly over the rationals.  Breakpoints (lap endpoints and
hole endpoints) are ambiguous as bare numbers, so evaluation works on
side-tagged points: (x, LEFT) means the one-sided limit from below, and the
side propagates through a lap according to the sign of its slope.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple, Union

from .errors import (
    EndpointNotFixed,
    GapNotHole,
    ImageEscapesDomain,
    MapDefinitionError,
    NonExpandingLap,
    OverlappingLaps,
)

LEFT = 0
RIGHT = 1

SIDE_LABEL = {LEFT: "-", RIGHT: "+"}

RationalLike = Union[Fraction, int, str]


def rat(x: RationalLike) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class SidedPoint:
    x: Fraction
    side: int  # LEFT or RIGHT

    def __repr__(self):
        return f"({self.x}{SIDE_LABEL[self.side]})"


@dataclass(frozen=True)
class Lap:
    lo: Fraction
    hi: Fraction
    slope: Fraction
    intercept: Fraction

    def __post_init__(self):
        if not self.lo < self.hi:
            raise MapDefinitionError(f"lap [{self.lo}, {self.hi}] is empty")

    def __call__(self, x: Fraction) -> Fraction:
        return self.slope * x + self.intercept

    @property
    def image(self) -> Tuple[Fraction, Fraction]:
        a, b = self(self.lo), self(self.hi)
        return (a, b) if a <= b else (b, a)

    @property
    def sign(self) -> int:
        return 1 if self.slope > 0 else -1

    @property
    def magnitude(self) -> Fraction:
        return abs(self.slope)


@dataclass(frozen=True)
class HoleMap:
    domain: Tuple[Fraction, Fraction]
    laps: Tuple[Lap, ...]
    hole: Tuple[Fraction, Fraction]
    name: str = ""


def make_map(domain, laps, hole, name="") -> HoleMap:
    """Build a HoleMap from rational-like inputs.

    `laps` is a sequence of (lo, hi, slope, intercept) tuples or Lap objects.
    """
    lap_objs = tuple(
        lap if isinstance(lap, Lap) else Lap(*(rat(v) for v in lap)) for lap in laps
    )
    return HoleMap(
        domain=(rat(domain[0]), rat(domain[1])),
        laps=lap_objs,
        hole=(rat(hole[0]), rat(hole[1])),
        name=name,
    )


def from_ifs(domain, contractions, name="") -> HoleMap:
    """Derive the expanding map from a contracting IFS.

    Each contraction x -> rho*x + shift (0 < |rho| < 1) on the domain interval
    becomes the inverse branch x -> x/rho - shift/rho on its image.  The single
    gap left uncovered is the hole.
    """
    lo, hi = rat(domain[0]), rat(domain[1])
    branches = []
    for k, (rho, shift) in enumerate(contractions):
        rho, shift = rat(rho), rat(shift)
        if not 0 < abs(rho) < 1:
            raise MapDefinitionError(f"contraction {k}: ratio {rho} not in (0, 1)")
        a, b = rho * lo + shift, rho * hi + shift
        blo, bhi = (a, b) if a <= b else (b, a)
        branches.append(Lap(blo, bhi, 1 / rho, -shift / rho))
    branches.sort(key=lambda lap: lap.lo)
    gaps = []
    cursor = lo
    for lap in branches:
        if lap.lo > cursor:
            gaps.append((cursor, lap.lo))
        cursor = lap.hi
    if cursor < hi:
        gaps.append((cursor, hi))
    if len(gaps) != 1:
        raise GapNotHole(f"IFS leaves {len(gaps)} gaps; exactly one hole expected")
    return HoleMap(domain=(lo, hi), laps=tuple(branches), hole=gaps[0], name=name)


HOLE = -1  # piece marker used in ValidatedMap.pieces


class ValidatedMap:
    """A HoleMap checked against the model constraints, with derived indexing.

    pieces[k] is the k-th partition interval in spatial order; its value is a
    lap index or HOLE.  breakpoints[i] are the n_pieces+1 partition endpoints.
    Immutable after construction; safe to share between threads.
    """

    def __init__(self, holemap: HoleMap, strict: bool = True):
        self.map = holemap
        self.strict = strict

        lo, hi = holemap.domain
        if not lo < hi:
            raise MapDefinitionError("empty domain")
        hlo, hhi = holemap.hole
        if not hlo < hhi:
            raise GapNotHole(f"hole ({hlo}, {hhi}) is empty")

        pieces = [("lap", i, lap.lo, lap.hi) for i, lap in enumerate(holemap.laps)]
        pieces.append(("hole", HOLE, hlo, hhi))
        pieces.sort(key=lambda p: (p[2], p[3]))

        cursor = lo
        for kind, _, plo, phi in pieces:
            if plo < cursor:
                raise OverlappingLaps(
                    f"{kind} starting at {plo} overlaps the previous piece"
                )
            if plo > cursor:
                raise GapNotHole(f"uncovered gap ({cursor}, {plo}) is not the hole")
            cursor = phi
        if cursor != hi:
            if cursor < hi:
                raise GapNotHole(f"uncovered gap ({cursor}, {hi}) is not the hole")
            raise MapDefinitionError(f"pieces extend past the domain end {hi}")

        for i, lap in enumerate(holemap.laps):
            if abs(lap.slope) <= 1:
                raise NonExpandingLap(f"lap {i} has slope {lap.slope}, |slope| <= 1")
            ilo, ihi = lap.image
            if ilo < lo or ihi > hi:
                raise ImageEscapesDomain(
                    f"lap {i} maps onto [{ilo}, {ihi}] outside [{lo}, {hi}]"
                )

        self.pieces: Tuple[int, ...] = tuple(p[1] for p in pieces)
        self.breakpoints: Tuple[Fraction, ...] = tuple(
            [p[2] for p in pieces] + [pieces[-1][3]]
        )
        self.n_laps = len(holemap.laps)
        self.n_pieces = len(pieces)
        self.hole_index = self.pieces.index(HOLE)

        if strict:
            first, last = self.pieces[0], self.pieces[-1]
            if first != HOLE and holemap.laps[first](lo) != lo:
                raise EndpointNotFixed(f"F({lo}) = {holemap.laps[first](lo)} != {lo}")
            if last != HOLE and holemap.laps[last](hi) != hi:
                raise EndpointNotFixed(f"F({hi}) = {holemap.laps[last](hi)} != {hi}")

    # --- point location -----------------------------------------------------

    def piece_at(self, p: SidedPoint) -> int:
        """Partition-piece index containing (x, side); side breaks ties."""
        x = p.x
        lo, hi = self.map.domain
        if x < lo or x > hi:
            raise ValueError(f"{x} outside the domain [{lo}, {hi}]")
        k = bisect.bisect_left(self.breakpoints, x)
        if k < len(self.breakpoints) and self.breakpoints[k] == x:
            # at breakpoint k: piece k-1 lies left of it, piece k right of it
            piece = k - 1 if p.side == LEFT else k
            if piece < 0 or piece >= self.n_pieces:
                raise ValueError(f"point {p} faces outward from the domain")
            return piece
        return k - 1

    def lap_at(self, p: SidedPoint) -> Optional[int]:
        """Lap index at (x, side), or None inside the hole."""
        piece = self.piece_at(p)
        idx = self.pieces[piece]
        return None if idx == HOLE else idx

    def eval_sided(self, p: SidedPoint) -> Optional[SidedPoint]:
        """One exact step of the map; None if the point falls in the hole."""
        lap_idx = self.lap_at(p)
        if lap_idx is None:
            return None
        lap = self.map.laps[lap_idx]
        y = lap(p.x)
        side = p.side if lap.slope > 0 else (RIGHT if p.side == LEFT else LEFT)
        return SidedPoint(y, side)

    def lap_weight(self, lap_index: int) -> Tuple[int, Fraction]:
        """(sign of slope, |slope|); |slope|**(-beta) is the lap's weight."""
        lap = self.map.laps[lap_index]
        return lap.sign, lap.magnitude

    def lap_magnitudes(self) -> Tuple[Fraction, ...]:
        return tuple(lap.magnitude for lap in self.map.laps)

    def is_breakpoint(self, x: Fraction) -> bool:
        k = bisect.bisect_left(self.breakpoints, x)
        return k < len(self.breakpoints) and self.breakpoints[k] == x

    def full_branch(self) -> bool:
        """True when every lap maps its domain onto the whole interval."""
        return all(lap.image == self.map.domain for lap in self.map.laps)


def validate_map(holemap: HoleMap, strict: bool = True) -> ValidatedMap:
    return ValidatedMap(holemap, strict=strict)
