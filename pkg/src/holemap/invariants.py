"""Numeric extraction of dimension, escape rate, and entropy.

The primary route is spectral: P(beta) = log of the Perron root of the
weighted transition matrix evaluated at beta, found by power iteration.
Then

    dim_H  solves P(beta) = 0,
    gamma  = -P(1),
    h_top  = P(0) = log(spectral radius of A).

The kneading determinant supplies an independent route: dim_H as the root in
beta of numer(D)(1, beta), gamma = log t_1 and h_top = -log t_0 with t_1, t_0
the least positive roots of numer(D)(., 1) and numer(D)(., 0) (roots merely
inherited from the cyclotomic denominator are discarded first).  Both routes
are computed and compared; disagreements are reported, never papered over.

Weights |slope|**(-beta) and all polynomial evaluations run in extended
precision (mpmath, >= 128 bits); matrix spectral radii run in float64, whose
~1e-13 relative accuracy is far inside every agreement tolerance used here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath as mp
import numpy as np

from .errors import NoBracket, NoConvergence
from .kneading import RationalFn
from .maps import ValidatedMap
from .markov import MarkovPartition, MatrixBundle
from .weightring import WeightPoly

DEFAULT_PRECISION = 128
POWER_TOL = 1e-14
POWER_CAP = 10**6
ROOT_SCAN_STEPS = 10**4
ROOT_BISECT_TOL = 1e-12
R_ROOT_WINDOW = 1e-9


def lap_weights_numeric(vmap: ValidatedMap, beta, precision=DEFAULT_PRECISION) -> List[float]:
    """|slope_i| ** (-beta) per lap, computed in extended precision."""
    out = []
    with mp.workprec(precision):
        b = mp.mpf(beta)
        for mag in vmap.lap_magnitudes():
            val = mp.e ** (-b * mp.log(mp.mpf(mag.numerator) / mp.mpf(mag.denominator)))
            out.append(float(val))
    return out


def numeric_q(
    vmap: ValidatedMap, part: MarkovPartition, a: Sequence[Sequence[int]], beta,
    precision=DEFAULT_PRECISION,
) -> np.ndarray:
    weights = lap_weights_numeric(vmap, beta, precision)
    m = part.size
    q = np.zeros((m, m))
    for j in range(m):
        lap_idx = part.lap_of_interval[j]
        if lap_idx is None:
            continue
        w = weights[lap_idx]
        for i in range(m):
            if a[i][j]:
                q[i, j] = w
    return q


def perron_root(mat: np.ndarray, tol: float = POWER_TOL, max_iter: int = POWER_CAP):
    """Spectral radius of a nonnegative matrix by power iteration.

    Iterates on mat + I (positive diagonal keeps the dominant eigenvalue
    strictly ahead of any complex competitor).  On the rare non-convergent
    case (equal Perron roots chained across communicating classes) falls back
    to dense eigenvalues and says so in the returned method tag.
    """
    n = mat.shape[0]
    if n == 0:
        return 0.0, 0, 0.0, "power"
    shifted = mat + np.eye(n)
    x = np.full(n, 1.0 / n)
    lam_prev = None
    for it in range(1, max_iter + 1):
        y = shifted @ x
        s = float(y.sum())
        x = y / s
        if lam_prev is not None:
            delta = abs(s - lam_prev)
            if delta <= tol * max(1.0, abs(s)):
                return s - 1.0, it, delta, "power"
        lam_prev = s
    eig = float(np.max(np.abs(np.linalg.eigvals(mat))))
    residual = abs((lam_prev - 1.0) - eig) if lam_prev is not None else float("nan")
    if residual > 1e-6 * max(1.0, eig):
        raise NoConvergence(
            "power iteration did not converge and disagrees with dense spectrum",
            residual=residual, iterations=max_iter,
        )
    return eig, max_iter, residual, "eigvals-fallback"


def pressure(
    vmap: ValidatedMap,
    part: MarkovPartition,
    a: Sequence[Sequence[int]],
    beta,
    precision=DEFAULT_PRECISION,
    tol: float = POWER_TOL,
    max_iter: int = POWER_CAP,
) -> float:
    """log of the Perron root of Q at beta; -inf when everything escapes."""
    lam, _, _, _ = perron_root(numeric_q(vmap, part, a, beta, precision), tol, max_iter)
    if lam <= 0.0:
        return -math.inf
    return math.log(lam)


# --- determinant-root machinery --------------------------------------------------


def _poly_evaluator(poly: WeightPoly, beta, magnitudes, precision):
    """(float eval, extended-precision eval, absolute-value eval) at fixed
    beta.  The third evaluator sums |term| values and bounds the float
    evaluator's rounding noise, which root scans need to recognize exact
    zeros."""
    terms = [(c, t, exps) for (t, exps), c in poly.terms.items()]
    logm = [math.log(float(m)) for m in magnitudes]
    fb = float(beta)
    float_terms = [
        (c, t, math.exp(-fb * sum(e * logm[i] for i, e in enumerate(exps))))
        for c, t, exps in terms
    ]

    def f_float(t_val: float) -> float:
        return sum(c * (t_val ** t) * w for c, t, w in float_terms)

    def f_abs(t_val: float) -> float:
        return sum(abs(c) * (abs(t_val) ** t) * w for c, t, w in float_terms)

    def f_mp(t_val):
        with mp.workprec(precision):
            b = mp.mpf(beta)
            logs = [
                -b * mp.log(mp.mpf(m.numerator) / mp.mpf(m.denominator))
                for m in magnitudes
            ]
            total = mp.mpf(0)
            for c, t, exps in terms:
                lw = mp.fsum(e * logs[i] for i, e in enumerate(exps) if e)
                total += c * mp.power(mp.mpf(t_val), t) * mp.e**lw
            return total

    return f_float, f_mp, f_abs


def _bisect_mp(f, lo, hi, tol, precision):
    """Bisection on an mp-confirmed bracket; None when the floating scan's
    sign change evaporates at extended precision (tangency or noise)."""
    with mp.workprec(precision):
        flo, fhi = f(lo), f(hi)
        if flo == 0:
            return mp.mpf(lo)
        if fhi == 0:
            return mp.mpf(hi)
        if mp.sign(flo) == mp.sign(fhi):
            return None
        lo, hi = mp.mpf(lo), mp.mpf(hi)
        while hi - lo > tol:
            mid = (lo + hi) / 2
            fm = f(mid)
            if fm == 0:
                return mid
            if mp.sign(fm) == mp.sign(flo):
                lo, flo = mid, fm
            else:
                hi = mid
        return (lo + hi) / 2


def _scan_roots(f_float, f_mp, f_abs, grid, tol, precision) -> List[float]:
    """Sign-change scan robust to roots landing (almost) exactly on grid
    points: a value below the float evaluator's rounding noise at that point
    is classed as 0 and the bracket is taken between the flanking nonzero
    values."""
    vals = [f_float(t) for t in grid]

    def cls(k):
        v = vals[k]
        return 0 if abs(v) <= 1e-12 * max(1e-300, f_abs(grid[k])) else (1 if v > 0 else -1)

    classes = [cls(k) for k in range(len(grid))]
    nonzero = [k for k in range(len(grid)) if classes[k] != 0]
    roots: List[float] = []
    for a, b in zip(nonzero, nonzero[1:]):
        if classes[a] != classes[b]:
            r = _bisect_mp(f_mp, grid[a], grid[b], tol, precision)
            roots.append(float(r) if r is not None else float(0.5 * (grid[a] + grid[b])))
        elif b - a > 1:
            # zero run without a sign change: an even-order touch; report the
            # run's center so callers can at least discard it against R(t)
            roots.append(float(0.5 * (grid[a + 1] + grid[b - 1])))
    if nonzero and nonzero[-1] < len(grid) - 1:
        roots.append(float(grid[-1]))
    return sorted(set(roots))


def positive_roots(
    poly: WeightPoly, beta, magnitudes, t_max: float,
    steps: int = ROOT_SCAN_STEPS, tol: float = ROOT_BISECT_TOL,
    precision=DEFAULT_PRECISION,
) -> List[float]:
    """Real roots of poly(., beta) in (0, t_max], by scan + bisection."""
    f_float, f_mp, f_abs = _poly_evaluator(poly, beta, magnitudes, precision)
    grid = np.linspace(0.0, t_max, steps + 1)
    return [r for r in _scan_roots(f_float, f_mp, f_abs, grid, tol, precision) if r > 0]


def r_factor_roots(r_factors: Sequence[WeightPoly], beta, magnitudes, precision=DEFAULT_PRECISION) -> List[float]:
    """Positive real roots of each cyclotomic factor 1 - tau t^q."""
    roots = []
    with mp.workprec(precision):
        b = mp.mpf(beta)
        logs = [-b * mp.log(mp.mpf(m.numerator) / mp.mpf(m.denominator)) for m in magnitudes]
        for f in r_factors:
            tail = [(k, c) for k, c in f.terms.items() if k[0] > 0]
            if len(tail) != 1:
                continue
            (qdeg, exps), coeff = tail[0]
            tau = -coeff * mp.e ** mp.fsum(e * logs[i] for i, e in enumerate(exps) if e)
            if tau > 0:
                roots.append(float(mp.power(tau, mp.mpf(-1) / qdeg)))
    return roots


def determinant_root(
    vmap: ValidatedMap, numer: WeightPoly, r_factors: Sequence[WeightPoly], beta,
    precision=DEFAULT_PRECISION,
) -> Optional[float]:
    """Least positive root of numer(., beta) not shared with R(t)."""
    t_max = 2.0 * max(float(m) for m in vmap.lap_magnitudes())
    roots = positive_roots(numer, beta, vmap.lap_magnitudes(), t_max, precision=precision)
    discard = r_factor_roots(r_factors, beta, vmap.lap_magnitudes(), precision)
    kept = [
        t for t in roots
        if all(abs(t - r) > R_ROOT_WINDOW * max(1.0, abs(r)) for r in discard)
    ]
    return kept[0] if kept else None


# --- the three invariants ----------------------------------------------------------


@dataclass
class InvariantReport:
    hausdorff_dimension: float
    escape_rate: float
    topological_entropy: float
    moran: Optional[float] = None
    approximate: bool = False
    truncation_depth: Optional[int] = None
    diagnostics: Dict[str, object] = field(default_factory=dict)

    def routes_agree(self, tol: float = 1e-8) -> bool:
        deltas = [
            self.diagnostics.get("dimension_route_delta"),
            self.diagnostics.get("escape_route_delta"),
            self.diagnostics.get("entropy_route_delta"),
        ]
        return all(d is not None and d <= tol for d in deltas)


def _bisect_pressure(press, lo: float, hi: float, tol: float):
    plo, phi = press(lo), press(hi)
    if abs(plo) < 1e-12:
        return lo, 0, (plo, phi)
    if abs(phi) < 1e-12:
        # no actual escape (a closed subsystem avoids the hole): P(1) = 0
        return hi, 0, (plo, phi)
    if plo < 0 or phi > 0:
        raise NoBracket(f"pressure has no sign change on [{lo}, {hi}]: P({lo})={plo}, P({hi})={phi}")
    iters = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if press(mid) > 0:
            lo = mid
        else:
            hi = mid
        iters += 1
    return 0.5 * (lo + hi), iters, (plo, phi)


def hausdorff_dimension(
    vmap: ValidatedMap,
    part: MarkovPartition,
    a: Sequence[Sequence[int]],
    numer: Optional[WeightPoly] = None,
    precision=DEFAULT_PRECISION,
    beta_tol: float = 1e-10,
) -> Tuple[float, Dict[str, object]]:
    """Root of P(beta) = 0 on [0, 1], cross-checked against numer(D)(1, .)."""
    press = lambda b: pressure(vmap, part, a, b, precision)
    root, iters, bracket = _bisect_pressure(press, 0.0, 1.0, beta_tol)
    diag: Dict[str, object] = {
        "dimension_bracket": bracket,
        "dimension_iterations": iters,
        "dimension_pressure_residual": press(root),
    }
    if numer is not None:
        droot = _determinant_dimension_root(vmap, numer, precision, reference=root)
        if droot is not None:
            diag["dimension_determinant_root"] = droot
            diag["dimension_route_delta"] = abs(droot - root)
    return root, diag


def _determinant_dimension_root(vmap, numer, precision, tol=ROOT_BISECT_TOL, reference=None):
    """Root in beta of numer(D)(t=1, beta) on [0, 1].

    numer(D)(1, .) vanishes whenever any real eigenvalue of Q crosses 1, not
    only the Perron root, so there can be several roots; the dimension is the
    Perron crossing.  With a spectral `reference` the closest root is
    returned (losing none of the root's independence, only selecting among
    candidates); otherwise the largest, which is the Perron crossing because
    subdominant eigenvalues reach 1 at smaller beta.
    """
    mags = vmap.lap_magnitudes()
    grid = np.linspace(0.0, 1.0, 257)

    def g_float(b):
        return _poly_evaluator(numer, b, mags, precision)[0](1.0)

    def g_mp(b):
        return _poly_evaluator(numer, b, mags, precision)[1](1.0)

    def g_abs(b):
        return _poly_evaluator(numer, b, mags, precision)[2](1.0)

    roots = _scan_roots(g_float, g_mp, g_abs, grid, tol, precision)
    if not roots:
        return None
    if reference is None:
        return roots[-1]
    return min(roots, key=lambda r: abs(r - reference))


def escape_rate(
    vmap: ValidatedMap,
    part: MarkovPartition,
    a: Sequence[Sequence[int]],
    numer: Optional[WeightPoly] = None,
    r_factors: Sequence[WeightPoly] = (),
    precision=DEFAULT_PRECISION,
) -> Tuple[float, Dict[str, object]]:
    """gamma = -P(1); also log t_1 from the determinant's least positive root."""
    gamma = -pressure(vmap, part, a, 1, precision)
    diag: Dict[str, object] = {}
    if numer is not None:
        t1 = determinant_root(vmap, numer, r_factors, 1, precision)
        if t1 is not None and t1 > 0:
            diag["escape_determinant_t1"] = t1
            diag["escape_determinant_value"] = math.log(t1)
            diag["escape_route_delta"] = abs(math.log(t1) - gamma)
    return gamma, diag


def topological_entropy(
    vmap: ValidatedMap,
    part: MarkovPartition,
    a: Sequence[Sequence[int]],
    numer: Optional[WeightPoly] = None,
    r_factors: Sequence[WeightPoly] = (),
    precision=DEFAULT_PRECISION,
) -> Tuple[float, Dict[str, object]]:
    """h_top = P(0) = log sr(A); also -log t_0 from the determinant at beta=0."""
    h = pressure(vmap, part, a, 0, precision)
    diag: Dict[str, object] = {}
    if numer is not None:
        t0 = determinant_root(vmap, numer, r_factors, 0, precision)
        if t0 is not None and t0 > 0:
            diag["entropy_determinant_t0"] = t0
            diag["entropy_determinant_value"] = -math.log(t0)
            diag["entropy_route_delta"] = abs(-math.log(t0) - h)
    return h, diag


def moran_dimension(vmap: ValidatedMap, tol: float = 1e-12, precision=DEFAULT_PRECISION) -> Optional[float]:
    """Solution of sum |slope_i| ** (-s) = 1 for full-branch maps, else None."""
    if not vmap.full_branch():
        return None
    mags = [float(m) for m in vmap.lap_magnitudes()]

    def f(s):
        return sum(m ** (-s) for m in mags) - 1.0

    lo, hi = 0.0, 1.0
    while f(hi) > 0:
        hi *= 2.0
        if hi > 64:
            raise NoBracket("Moran equation has no root below s = 64")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def compute_invariants(
    vmap: ValidatedMap,
    bundle: MatrixBundle,
    determinant: RationalFn,
    r_factors: Sequence[WeightPoly],
    precision=DEFAULT_PRECISION,
) -> InvariantReport:
    part, a = bundle.part, bundle.A
    numer = determinant.numer
    dim, d1 = hausdorff_dimension(vmap, part, a, numer, precision)
    gamma, d2 = escape_rate(vmap, part, a, numer, r_factors, precision)
    h, d3 = topological_entropy(vmap, part, a, numer, r_factors, precision)
    diag = {**d1, **d2, **d3}
    diag["pressure_at_0"] = h
    diag["pressure_at_1"] = -gamma
    moran = moran_dimension(vmap)
    if moran is not None:
        diag["moran_delta"] = abs(moran - dim)
    return InvariantReport(
        hausdorff_dimension=dim,
        escape_rate=gamma,
        topological_entropy=h,
        moran=moran,
        diagnostics=diag,
    )


def invariants_from_determinant(
    vmap: ValidatedMap,
    numer: WeightPoly,
    r_factors: Sequence[WeightPoly],
    depth: int,
    precision=DEFAULT_PRECISION,
) -> InvariantReport:
    """Truncation mode: no Markov partition, so only the determinant route.

    The numerator is a degree-limited approximation; every value is flagged
    approximate with the depth recorded.
    """
    diag: Dict[str, object] = {"mode": "determinant-only"}
    dim = _determinant_dimension_root(vmap, numer, precision)
    t1 = determinant_root(vmap, numer, r_factors, 1, precision)
    t0 = determinant_root(vmap, numer, r_factors, 0, precision)
    gamma = math.log(t1) if t1 else float("nan")
    h = -math.log(t0) if t0 else float("nan")
    return InvariantReport(
        hausdorff_dimension=dim if dim is not None else float("nan"),
        escape_rate=gamma,
        topological_entropy=h,
        moran=moran_dimension(vmap),
        approximate=True,
        truncation_depth=depth,
        diagnostics=diag,
    )


def pressure_profile(
    vmap: ValidatedMap,
    part: MarkovPartition,
    a: Sequence[Sequence[int]],
    betas: Sequence[float],
    precision=DEFAULT_PRECISION,
) -> List[float]:
    return [pressure(vmap, part, a, b, precision) for b in betas]
