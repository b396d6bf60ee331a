"""Markov partition, transfer matrices, chain complex, and identity checks.

The orbits of the tracked lateral points refine the lap/hole partition into a
Markov partition J_1..J_m (the hole is a union of consecutive J's).  On top of
it live:

  A      m x m 0/1 transition matrix, a_ij = 1 iff F(int J_j) contains int J_i
  Q      A with column j scaled by the weight of the lap containing J_j
  B      q x m incidence matrix of the boundary map from intervals to points
  V      q x q weighted matrix of the point-transition map; where F jumps over
         breakpoints, the crossed breakpoint pairs receive +/- duplicated
         entries so that B.Q = V.B holds exactly
  U      q x n_laps 0/1 matrix assigning chain points to laps (hole points
         get a zero row)
  K      n_laps diagonal matrix of signed lap weights
  Pi     permutation aligning the orbit-enumeration order of the chain points
         with their spatial order; Theta = Pi V Pi^T

The chain points are the lateral points of every breakpoint plus all
non-breakpoint orbit points, each entered once.  Their enumeration order
follows the kneading tuple: each tracked critical point, then the new points
its orbit contributes, with the two hole-facing laterals appended last.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import ImageNotInChain, NotMarkov
from .kneading import RationalFn, _factor_sort
from .maps import HOLE, LEFT, RIGHT, SIDE_LABEL, SidedPoint, ValidatedMap
from .orbits import TRUNCATED, KneadingData
from .weightring import (
    Matrix,
    WeightPoly,
    char_poly,
    first_difference,
    int_mat_mul_poly,
    mat_mul,
    poly_mat_mul_int,
)


@dataclass(frozen=True)
class MarkovPartition:
    points: Tuple[Fraction, ...]            # b_1 < ... < b_{m+1}
    intervals: Tuple[Tuple[Fraction, Fraction], ...]
    hole_indices: Tuple[int, ...]           # J's inside the hole closure
    lap_of_interval: Tuple[Optional[int], ...]

    @property
    def size(self) -> int:
        return len(self.intervals)


def build_markov_partition(vmap: ValidatedMap, data: KneadingData) -> MarkovPartition:
    if data.truncated():
        raise NotMarkov("a tracked orbit is truncated; no finite Markov partition")
    pts = set(vmap.breakpoints)
    for e in data.all_tracked():
        for p in e.record.points:
            pts.add(p.x)
    points = tuple(sorted(pts))
    intervals = tuple((points[i], points[i + 1]) for i in range(len(points) - 1))

    hole_piece = vmap.hole_index
    hole_lo = vmap.breakpoints[hole_piece]
    hole_hi = vmap.breakpoints[hole_piece + 1]
    hole_indices = []
    lap_of_interval: List[Optional[int]] = []
    for j, (lo, hi) in enumerate(intervals):
        if hole_lo <= lo and hi <= hole_hi:
            hole_indices.append(j)
            lap_of_interval.append(None)
        else:
            lap_of_interval.append(vmap.lap_at(SidedPoint(lo, RIGHT)))
    return MarkovPartition(points, intervals, tuple(hole_indices), tuple(lap_of_interval))


def transition_matrix(vmap: ValidatedMap, part: MarkovPartition) -> List[List[int]]:
    m = part.size
    a = [[0] * m for _ in range(m)]
    for j in range(m):
        lap_idx = part.lap_of_interval[j]
        if lap_idx is None:
            continue
        lap = vmap.map.laps[lap_idx]
        lo, hi = part.intervals[j]
        ylo, yhi = lap(lo), lap(hi)
        if ylo > yhi:
            ylo, yhi = yhi, ylo
        for i in range(m):
            ilo, ihi = part.intervals[i]
            if ylo <= ilo and ihi <= yhi:
                a[i][j] = 1
    return a


def weighted_transition_matrix(
    a: Sequence[Sequence[int]], vmap: ValidatedMap, part: MarkovPartition
) -> Matrix:
    n = vmap.n_laps
    m = part.size
    q: Matrix = [[WeightPoly.zero(n) for _ in range(m)] for _ in range(m)]
    for j in range(m):
        lap_idx = part.lap_of_interval[j]
        if lap_idx is None:
            continue
        w = WeightPoly.var(lap_idx, n)
        for i in range(m):
            if a[i][j]:
                q[i][j] = w
    return q


@dataclass(frozen=True)
class ChainPoint:
    x: Fraction
    side: int
    is_lateral: bool  # True when x is a breakpoint (side is significant)

    def label(self) -> str:
        return f"{self.x}{SIDE_LABEL[self.side]}" if self.is_lateral else str(self.x)


@dataclass(frozen=True)
class ChainData:
    z_points: Tuple[ChainPoint, ...]        # orbit-enumeration order
    y_points: Tuple[ChainPoint, ...]        # spatial order
    rho: Tuple[int, ...]                    # y_i = z_{rho[i]} (0-based)
    pairs: Tuple[Tuple[int, int], ...]      # y-index pairs (left, right) at one breakpoint

    @property
    def size(self) -> int:
        return len(self.y_points)


def build_chain(vmap: ValidatedMap, data: KneadingData) -> ChainData:
    if data.truncated():
        raise NotMarkov("a tracked orbit is truncated; no finite chain complex")
    bp_set = set(vmap.breakpoints)
    seen: Dict[object, int] = {}
    z_points: List[ChainPoint] = []

    def add(p: SidedPoint):
        lateral = p.x in bp_set
        key = (p.x, p.side) if lateral else p.x
        if key not in seen:
            seen[key] = len(z_points)
            z_points.append(ChainPoint(p.x, p.side, lateral))

    for e in data.entries:
        for p in e.record.points:
            add(p)
    for e in data.endpoints:
        for p in e.record.points:
            add(p)
    for _, p in data.hole_inner:
        add(p)

    order = sorted(range(len(z_points)), key=lambda i: (z_points[i].x, z_points[i].side))
    y_points = tuple(z_points[i] for i in order)
    pairs = []
    for i in range(len(y_points) - 1):
        a, b = y_points[i], y_points[i + 1]
        if a.x == b.x and a.is_lateral and b.is_lateral:
            pairs.append((i, i + 1))
    return ChainData(tuple(z_points), y_points, tuple(order), tuple(pairs))


def _y_index(chain: ChainData, bp_set, p: SidedPoint) -> Optional[int]:
    lateral = p.x in bp_set
    for i, cp in enumerate(chain.y_points):
        if lateral:
            if cp.x == p.x and cp.side == p.side and cp.is_lateral:
                return i
        elif not cp.is_lateral and cp.x == p.x:
            return i
    return None


def incidence_matrix(vmap: ValidatedMap, part: MarkovPartition, chain: ChainData) -> List[List[int]]:
    """q x m boundary bookkeeping: column j is -1 at J_j's lower endpoint
    (facing into J_j) and +1 at its upper endpoint."""
    bp_set = set(vmap.breakpoints)
    q, m = chain.size, part.size
    b = [[0] * m for _ in range(q)]
    for j, (lo, hi) in enumerate(part.intervals):
        ilow = _y_index(chain, bp_set, SidedPoint(lo, RIGHT))
        ihigh = _y_index(chain, bp_set, SidedPoint(hi, LEFT))
        if ilow is None or ihigh is None:
            raise ImageNotInChain(f"endpoints of J_{j + 1} missing from the chain")
        b[ilow][j] = -1
        b[ihigh][j] = 1
    return b


def _line_pos(cp: ChainPoint):
    """Lexicographic position on the line; laterals sit at x -/+ 0."""
    if cp.is_lateral:
        return (cp.x, -1 if cp.side == LEFT else 1)
    return (cp.x, 0)


def v_matrix(vmap: ValidatedMap, chain: ChainData) -> Matrix:
    """Weighted point-transition matrix.

    Column j carries the signed weight of y_j's lap at the row of F(y_j).
    Every breakpoint pair the segment from y_j to F(y_j) crosses receives
    the weight duplicated with alternating signs: + at the member nearer the
    source, - at the other.  Whether a pair is crossed is decided with
    laterals at x -/+ 0, so a segment ending at (b, +) from above stops short
    of b while one arriving from below passes it; this is what makes the
    boundary telescoping behind Lemma 1 exact, and it reduces to the
    familiar reading (source pair duplicated when the source is its outer
    member, image pair never) whenever the image is not itself a breakpoint.
    Hole points contribute zero columns.
    """
    n = vmap.n_laps
    q = chain.size
    bp_set = set(vmap.breakpoints)
    v: Matrix = [[WeightPoly.zero(n) for _ in range(q)] for _ in range(q)]

    for j, cp in enumerate(chain.y_points):
        p = SidedPoint(cp.x, cp.side)
        lap_idx = vmap.lap_at(p)
        if lap_idx is None:
            continue  # in the hole: escapes, zero column
        image = vmap.eval_sided(p)
        if image.x == cp.x:
            # fixed location: a negative slope flips the side tag, but the
            # transition map sends the chain point to itself
            i = j
        else:
            i = _y_index(chain, bp_set, image)
        if i is None:
            raise ImageNotInChain(f"F({cp.label()}) = {image} is not a chain point")
        sign, _ = vmap.lap_weight(lap_idx)
        w = WeightPoly.var(lap_idx, n) if sign > 0 else -WeightPoly.var(lap_idx, n)
        v[i][j] = v[i][j] + w
        src = _line_pos(cp)
        dst = _line_pos(chain.y_points[i])
        lo, hi = (src, dst) if src <= dst else (dst, src)
        for k, k1 in chain.pairs:
            pk, pk1 = _line_pos(chain.y_points[k]), _line_pos(chain.y_points[k1])
            if lo < pk < hi or lo < pk1 < hi:
                if src <= pk:
                    v[k][j] = v[k][j] + w
                    v[k1][j] = v[k1][j] - w
                else:
                    v[k1][j] = v[k1][j] + w
                    v[k][j] = v[k][j] - w
    return v


def u_matrix(vmap: ValidatedMap, chain: ChainData) -> List[List[int]]:
    """q x n_laps assignment of chain points to laps; hole rows are zero."""
    u = [[0] * vmap.n_laps for _ in range(chain.size)]
    for i, cp in enumerate(chain.y_points):
        lap_idx = vmap.lap_at(SidedPoint(cp.x, cp.side))
        if lap_idx is not None:
            u[i][lap_idx] = 1
    return u


def k_matrix(vmap: ValidatedMap) -> Matrix:
    n = vmap.n_laps
    k: Matrix = [[WeightPoly.zero(n) for _ in range(n)] for _ in range(n)]
    for i in range(n):
        sign, _ = vmap.lap_weight(i)
        w = WeightPoly.var(i, n)
        k[i][i] = w if sign > 0 else -w
    return k


def pi_matrix(chain: ChainData) -> List[List[int]]:
    """Permutation matrix with Pi[rho[i]][i] = 1, so Theta = Pi V Pi^T is V
    rewritten in the orbit-enumeration basis."""
    q = chain.size
    pi = [[0] * q for _ in range(q)]
    for i, r in enumerate(chain.rho):
        pi[r][i] = 1
    return pi


def theta_matrix(v: Matrix, chain: ChainData) -> Matrix:
    """Theta[r][s] = V[sigma(r)][sigma(s)] with sigma = rho^-1 (= Pi V Pi^T)."""
    sigma = [0] * chain.size
    for i, r in enumerate(chain.rho):
        sigma[r] = i
    return [[v[sigma[r]][sigma[s]] for s in range(chain.size)] for r in range(chain.size)]


@dataclass(frozen=True)
class MatrixBundle:
    part: MarkovPartition
    chain: ChainData
    A: List[List[int]]
    Q: Matrix
    B: List[List[int]]
    V: Matrix
    U: List[List[int]]
    K: Matrix
    Pi: List[List[int]]
    Theta: Matrix


def build_bundle(vmap: ValidatedMap, data: KneadingData) -> MatrixBundle:
    part = build_markov_partition(vmap, data)
    chain = build_chain(vmap, data)
    a = transition_matrix(vmap, part)
    q = weighted_transition_matrix(a, vmap, part)
    b = incidence_matrix(vmap, part, chain)
    v = v_matrix(vmap, chain)
    u = u_matrix(vmap, chain)
    k = k_matrix(vmap)
    pi = pi_matrix(chain)
    theta = theta_matrix(v, chain)
    return MatrixBundle(part, chain, a, q, b, v, u, k, pi, theta)


def zeta_function(q: Matrix) -> RationalFn:
    """1 / det(I - t Q), the weighted dynamical zeta function."""
    nvars = q[0][0].nvars if q else 0
    return RationalFn(WeightPoly.one(nvars), _factor_sort([char_poly(q)]))


# --- identity verification -------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class VerificationReport:
    checks: Tuple[CheckResult, ...]

    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __iter__(self):
        return iter(self.checks)


def _transpose_int(m: Sequence[Sequence[int]]) -> List[List[int]]:
    return [list(col) for col in zip(*m)]


def verify_identities(
    vmap: ValidatedMap,
    bundle: MatrixBundle,
    determinant: RationalFn,
    r_factors: Sequence[WeightPoly],
) -> VerificationReport:
    """Exact checks of the five structural identities.

    1. boundary intertwines transfer:      B Q  = V B
    2. lap classes collapse V's columns:   columns of U^T V constant per lap
    3. the collapsed action is diagonal:   U^T V = K U^T
    4. characteristic polys factor:        P_V = P_Q P_K
    5. determinant matches transfer:       numer(D) = P_Q  (i.e. D R = P_Q)

    All equalities are integer-coefficient polynomial identities: no
    tolerances anywhere.  Failures carry the first differing entry.
    """
    checks: List[CheckResult] = []

    bq = int_mat_mul_poly(bundle.B, bundle.Q)
    vb = poly_mat_mul_int(bundle.V, bundle.B)
    diff = first_difference(bq, vb)
    checks.append(
        CheckResult("lemma1:BQ=VB", diff is None, "" if diff is None else f"first difference at {diff}")
    )

    ut = _transpose_int(bundle.U)
    utv = int_mat_mul_poly(ut, bundle.V)
    lap_cols: Dict[int, List[int]] = {}
    for i, cp in enumerate(bundle.chain.y_points):
        lap_idx = vmap.lap_at(SidedPoint(cp.x, cp.side))
        if lap_idx is not None:
            lap_cols.setdefault(lap_idx, []).append(i)
    lemma2_ok, lemma2_detail = True, ""
    for lap_idx, cols in lap_cols.items():
        ref = cols[0]
        for c in cols[1:]:
            for r in range(len(utv)):
                if utv[r][c] != utv[r][ref]:
                    lemma2_ok = False
                    lemma2_detail = f"columns {ref} and {c} of U^T V differ in row {r}"
                    break
            if not lemma2_ok:
                break
        if not lemma2_ok:
            break
    checks.append(CheckResult("lemma2:column-constancy", lemma2_ok, lemma2_detail))

    kut = mat_mul(bundle.K, [[WeightPoly.const(c, vmap.n_laps) for c in row] for row in ut])
    diff = first_difference(utv, kut)
    checks.append(
        CheckResult("lemma3:UV=KU", diff is None, "" if diff is None else f"first difference at {diff}")
    )

    p_v = char_poly(bundle.V)
    p_q = char_poly(bundle.Q)
    p_k = char_poly(bundle.K)
    lhs, rhs = p_v, p_q * p_k
    checks.append(
        CheckResult(
            "theorem1:PV=PQ*PK",
            lhs == rhs,
            "" if lhs == rhs else f"difference {(lhs - rhs).pretty()}",
        )
    )

    numer = determinant.numer
    det_keys = {f.key() for f in determinant.denom_factors}
    r_keys = {f.key() for f in r_factors}
    ok = numer == p_q and det_keys == r_keys
    detail = ""
    if numer != p_q:
        detail = f"numerator difference {(numer - p_q).pretty()}"
    elif det_keys != r_keys:
        detail = "denominator factors do not match the kneading tails"
    checks.append(CheckResult("theorem2:D*R=PQ", ok, detail))

    return VerificationReport(tuple(checks))


def theta_similarity_check(bundle: MatrixBundle) -> CheckResult:
    """Pi V Pi^T as a literal matrix product must equal the index-mapped Theta."""
    pvpt = poly_mat_mul_int(int_mat_mul_poly(bundle.Pi, bundle.V), _transpose_int(bundle.Pi))
    diff = first_difference(pvpt, bundle.Theta)
    return CheckResult(
        "theta:PiVPi^T", diff is None, "" if diff is None else f"first difference at {diff}"
    )
