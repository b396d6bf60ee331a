"""Sparse polynomials in t and one weight indeterminate per lap.

Coefficients are arbitrary-precision integers; a monomial is keyed by its t
degree and the vector of weight exponents.  The intended substitution is
w_i = |slope_i| ** (-beta), so evaluating a polynomial at real beta turns the
symbolic identities of the kneading machinery into numeric ones.

Every lap keeps its own indeterminate even when two laps share |slope|;
identities are checked in this finer ring and only merged for display.  The
ring is an integral domain, which is what makes fraction-free (Bareiss)
elimination exact: every division it performs is exact and `exact_div`
enforces that.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import mpmath as mp

from .errors import InexactDivision

Key = Tuple[int, Tuple[int, ...]]


class WeightPoly:
    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Optional[Dict[Key, int]] = None):
        self.nvars = nvars
        self.terms: Dict[Key, int] = {}
        if terms:
            for key, c in terms.items():
                if c:
                    self.terms[key] = c

    # --- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> "WeightPoly":
        return cls(nvars)

    @classmethod
    def const(cls, c: int, nvars: int) -> "WeightPoly":
        return cls(nvars, {(0, (0,) * nvars): int(c)})

    @classmethod
    def one(cls, nvars: int) -> "WeightPoly":
        return cls.const(1, nvars)

    @classmethod
    def monomial(cls, c: int, t_deg: int, exps: Sequence[int], nvars: int) -> "WeightPoly":
        exps = tuple(exps)
        assert len(exps) == nvars
        return cls(nvars, {(t_deg, exps): int(c)})

    @classmethod
    def var(cls, i: int, nvars: int) -> "WeightPoly":
        exps = [0] * nvars
        exps[i] = 1
        return cls.monomial(1, 0, exps, nvars)

    @classmethod
    def t(cls, nvars: int, degree: int = 1) -> "WeightPoly":
        return cls.monomial(1, degree, (0,) * nvars, nvars)

    # --- predicates -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, WeightPoly)
            and self.nvars == other.nvars
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.nvars, self.key()))

    def key(self) -> Tuple:
        """Canonical hashable form (sorted term list)."""
        return tuple(sorted(self.terms.items()))

    def t_degree(self) -> int:
        return max((k[0] for k in self.terms), default=0)

    def constant(self) -> int:
        return self.terms.get((0, (0,) * self.nvars), 0)

    def n_terms(self) -> int:
        return len(self.terms)

    # --- arithmetic ---------------------------------------------------------

    def __add__(self, other: "WeightPoly") -> "WeightPoly":
        assert self.nvars == other.nvars
        res = dict(self.terms)
        for key, c in other.terms.items():
            s = res.get(key, 0) + c
            if s:
                res[key] = s
            else:
                res.pop(key, None)
        out = WeightPoly(self.nvars)
        out.terms = res
        return out

    def __sub__(self, other: "WeightPoly") -> "WeightPoly":
        assert self.nvars == other.nvars
        res = dict(self.terms)
        for key, c in other.terms.items():
            s = res.get(key, 0) - c
            if s:
                res[key] = s
            else:
                res.pop(key, None)
        out = WeightPoly(self.nvars)
        out.terms = res
        return out

    def __neg__(self) -> "WeightPoly":
        out = WeightPoly(self.nvars)
        out.terms = {key: -c for key, c in self.terms.items()}
        return out

    def scale(self, c: int) -> "WeightPoly":
        if c == 0:
            return WeightPoly(self.nvars)
        out = WeightPoly(self.nvars)
        out.terms = {key: c * v for key, v in self.terms.items()}
        return out

    def __mul__(self, other: "WeightPoly") -> "WeightPoly":
        assert self.nvars == other.nvars
        res: Dict[Key, int] = {}
        for (ta, ea), ca in self.terms.items():
            for (tb, eb), cb in other.terms.items():
                key = (ta + tb, tuple(x + y for x, y in zip(ea, eb)))
                s = res.get(key, 0) + ca * cb
                if s:
                    res[key] = s
                else:
                    res.pop(key, None)
        out = WeightPoly(self.nvars)
        out.terms = res
        return out

    def mul_t(self, degree: int) -> "WeightPoly":
        out = WeightPoly(self.nvars)
        out.terms = {(t + degree, e): c for (t, e), c in self.terms.items()}
        return out

    def truncate_t(self, max_degree: int) -> "WeightPoly":
        out = WeightPoly(self.nvars)
        out.terms = {k: c for k, c in self.terms.items() if k[0] <= max_degree}
        return out

    # --- division ---------------------------------------------------------

    @staticmethod
    def _order(key: Key) -> Tuple:
        t, exps = key
        return (t + sum(exps), t, exps)

    def _leading(self) -> Tuple[Key, int]:
        key = max(self.terms, key=self._order)
        return key, self.terms[key]

    def exact_div(self, other: "WeightPoly") -> "WeightPoly":
        """Exact quotient self / other; raises InexactDivision otherwise."""
        assert self.nvars == other.nvars
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        rem = dict(self.terms)
        quo: Dict[Key, int] = {}
        lk, lc = other._leading()
        lt, lexps = lk
        while rem:
            rkey = max(rem, key=self._order)
            rc = rem[rkey]
            rt, rexps = rkey
            qt = rt - lt
            qexps = tuple(a - b for a, b in zip(rexps, lexps))
            if qt < 0 or any(e < 0 for e in qexps) or rc % lc != 0:
                raise InexactDivision("polynomial division is not exact")
            qc = rc // lc
            qkey = (qt, qexps)
            quo[qkey] = quo.get(qkey, 0) + qc
            for (ot, oexps), oc in other.terms.items():
                key = (ot + qt, tuple(a + b for a, b in zip(oexps, qexps)))
                s = rem.get(key, 0) - qc * oc
                if s:
                    rem[key] = s
                else:
                    rem.pop(key, None)
        out = WeightPoly(self.nvars)
        out.terms = quo
        return out

    # --- substitution -------------------------------------------------------

    def merge(self, group_of_var: Sequence[int], n_groups: int) -> "WeightPoly":
        """Identify variables: exponent of group g = sum of its members'."""
        res: Dict[Key, int] = {}
        for (t, exps), c in self.terms.items():
            merged = [0] * n_groups
            for i, e in enumerate(exps):
                merged[group_of_var[i]] += e
            key = (t, tuple(merged))
            s = res.get(key, 0) + c
            if s:
                res[key] = s
            else:
                res.pop(key, None)
        out = WeightPoly(n_groups)
        out.terms = res
        return out

    def substitute_ones(self) -> Dict[int, int]:
        """Set every weight to 1 (beta = 0); returns {t_degree: coefficient}."""
        res: Dict[int, int] = {}
        for (t, _), c in self.terms.items():
            res[t] = res.get(t, 0) + c
        return {t: c for t, c in res.items() if c}

    def eval_numeric(self, t_val, log_weights: Sequence) -> mp.mpf:
        """Evaluate with w_i = exp(log_weights[i]); mpmath precision applies."""
        total = mp.mpf(0)
        for (t, exps), c in self.terms.items():
            logw = mp.fsum(e * log_weights[i] for i, e in enumerate(exps) if e)
            total += c * mp.power(t_val, t) * mp.e**logw
        return total

    def eval_beta(self, t_val, beta, magnitudes: Sequence) -> mp.mpf:
        """Evaluate at w_i = magnitudes[i] ** (-beta)."""
        logs = [-mp.mpf(beta) * mp.log(mp.mpf(m.numerator) / mp.mpf(m.denominator))
                if hasattr(m, "numerator") else -mp.mpf(beta) * mp.log(mp.mpf(m))
                for m in magnitudes]
        return self.eval_numeric(t_val, logs)

    # --- display --------------------------------------------------------------

    def pretty(self, varnames: Optional[Sequence[str]] = None, tname: str = "t") -> str:
        if not self.terms:
            return "0"
        names = varnames or [f"w{i+1}" for i in range(self.nvars)]
        parts = []
        for (t, exps), c in sorted(self.terms.items(), key=lambda kv: (kv[0][0], kv[0][1])):
            factors = []
            if abs(c) != 1 or (t == 0 and not any(exps)):
                factors.append(str(abs(c)))
            for i, e in enumerate(exps):
                if e == 1:
                    factors.append(names[i])
                elif e > 1:
                    factors.append(f"{names[i]}^{e}")
            if t == 1:
                factors.append(tname)
            elif t > 1:
                factors.append(f"{tname}^{t}")
            mono = "*".join(factors) if factors else "1"
            parts.append(("- " if c < 0 else "+ ") + mono)
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    def __repr__(self):
        return f"WeightPoly({self.pretty()})"

    def sorted_terms(self) -> List[Tuple[int, Tuple[int, ...], int]]:
        return [(t, exps, c) for (t, exps), c in sorted(self.terms.items())]


# --- matrices over the ring ----------------------------------------------------

Matrix = List[List[WeightPoly]]


def mat_zero(rows: int, cols: int, nvars: int) -> Matrix:
    return [[WeightPoly.zero(nvars) for _ in range(cols)] for _ in range(rows)]


def mat_identity(n: int, nvars: int) -> Matrix:
    out = mat_zero(n, n, nvars)
    for i in range(n):
        out[i][i] = WeightPoly.one(nvars)
    return out


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    rows, inner, cols = len(a), len(b), len(b[0])
    nvars = a[0][0].nvars
    out = mat_zero(rows, cols, nvars)
    for i in range(rows):
        for k in range(inner):
            aik = a[i][k]
            if aik.is_zero():
                continue
            for j in range(cols):
                if not b[k][j].is_zero():
                    out[i][j] = out[i][j] + aik * b[k][j]
    return out


def int_mat_mul_poly(a: Sequence[Sequence[int]], b: Matrix) -> Matrix:
    rows, inner, cols = len(a), len(b), len(b[0])
    nvars = b[0][0].nvars
    out = mat_zero(rows, cols, nvars)
    for i in range(rows):
        for k in range(inner):
            c = a[i][k]
            if not c:
                continue
            for j in range(cols):
                if not b[k][j].is_zero():
                    out[i][j] = out[i][j] + b[k][j].scale(c)
    return out


def poly_mat_mul_int(a: Matrix, b: Sequence[Sequence[int]]) -> Matrix:
    rows, inner, cols = len(a), len(b), len(b[0])
    nvars = a[0][0].nvars
    out = mat_zero(rows, cols, nvars)
    for i in range(rows):
        for k in range(inner):
            aik = a[i][k]
            if aik.is_zero():
                continue
            for j in range(cols):
                if b[k][j]:
                    out[i][j] = out[i][j] + aik.scale(b[k][j])
    return out


def mat_eq(a: Matrix, b: Matrix) -> bool:
    return first_difference(a, b) is None


def first_difference(a: Matrix, b: Matrix) -> Optional[Tuple[int, int]]:
    if len(a) != len(b) or len(a[0]) != len(b[0]):
        return (-1, -1)
    for i in range(len(a)):
        for j in range(len(a[0])):
            if a[i][j] != b[i][j]:
                return (i, j)
    return None


def det_bareiss(matrix: Matrix) -> WeightPoly:
    """Fraction-free determinant over the weight ring (exact divisions only)."""
    n = len(matrix)
    nvars = matrix[0][0].nvars if n else 0
    if n == 0:
        return WeightPoly.one(nvars)
    m = [row[:] for row in matrix]
    prev = WeightPoly.one(nvars)
    sign = 1
    for k in range(n - 1):
        if m[k][k].is_zero():
            pivot_row = next((r for r in range(k + 1, n) if not m[r][k].is_zero()), None)
            if pivot_row is None:
                return WeightPoly.zero(nvars)
            m[k], m[pivot_row] = m[pivot_row], m[k]
            sign = -sign
        pivot = m[k][k]
        for i in range(k + 1, n):
            mik = m[i][k]
            for j in range(k + 1, n):
                num = pivot * m[i][j] - mik * m[k][j]
                m[i][j] = num.exact_div(prev)
            m[i][k] = WeightPoly.zero(nvars)
        prev = pivot
    result = m[n - 1][n - 1]
    return result if sign == 1 else -result


def char_poly(matrix: Matrix) -> WeightPoly:
    """det(I - t*M) for a square matrix over the weight ring."""
    n = len(matrix)
    if n == 0:
        return WeightPoly.one(0)
    nvars = matrix[0][0].nvars
    shifted = []
    for i in range(n):
        row = []
        for j in range(n):
            entry = -matrix[i][j].mul_t(1)
            if i == j:
                entry = entry + WeightPoly.one(nvars)
            row.append(entry)
        shifted.append(row)
    return det_bareiss(shifted)


def det_cofactor(matrix: Matrix) -> WeightPoly:
    """Direct cofactor expansion; quadratic blowup, test oracle only."""
    n = len(matrix)
    nvars = matrix[0][0].nvars if n else 0
    if n == 0:
        return WeightPoly.one(nvars)
    if n == 1:
        return matrix[0][0]
    total = WeightPoly.zero(nvars)
    for j in range(n):
        if matrix[0][j].is_zero():
            continue
        minor = [
            [matrix[i][jj] for jj in range(n) if jj != j] for i in range(1, n)
        ]
        term = matrix[0][j] * det_cofactor(minor)
        total = total + (term if j % 2 == 0 else -term)
    return total
