"""Exact arithmetic kernel: rationals, sparse multivariate polynomials and
dense rational/polynomial matrices with rank, nullspace, determinants and
minors.

Rationals are gmpy2.mpq when available (much faster), fractions.Fraction
otherwise.  Polynomials are stored sparsely as {monomial: coefficient} with a
session-global variable table, terms kept in graded-lexicographic order on
variable ids.
"""

from __future__ import annotations

import itertools
import re
import threading

try:
    from gmpy2 import mpq as Rat
except ImportError:  # pragma: no cover
    from fractions import Fraction as Rat

__all__ = [
    "Rat", "rat", "VarTable", "VARS", "Poly", "poly_eval", "poly_substitute",
    "mat_rank_nullspace", "mat_det", "minors", "nullspace_basis",
    "parse_poly", "normalize_poly",
]


def rat(num, den=1):
    """Exact rational from ints or a 'p/q' string."""
    if isinstance(num, str):
        if "/" in num:
            a, b = num.split("/")
            return Rat(int(a), int(b))
        return Rat(int(num))
    return Rat(num, den)


class VarTable:
    """Session-global name <-> id table.

    Ids are assigned in registration order; concurrent reads are safe, writes
    are serialized.
    """

    def __init__(self):
        self._names = []
        self._ids = {}
        self._lock = threading.Lock()

    def id(self, name):
        vid = self._ids.get(name)
        if vid is None:
            with self._lock:
                vid = self._ids.get(name)
                if vid is None:
                    vid = len(self._names)
                    self._names.append(name)
                    self._ids[name] = vid
        return vid

    def name(self, vid):
        return self._names[vid]

    def __len__(self):
        return len(self._names)


VARS = VarTable()


def _mono_mul(m1, m2):
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for v, e in m2:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def _mono_sort_key(mono):
    # descending graded order; ties broken lexicographically by variable id
    # with larger exponents on smaller ids first
    deg = sum(e for _, e in mono)
    return (-deg, tuple((v, -e) for v, e in sorted(mono)))


class Poly:
    """Sparse multivariate polynomial with exact rational coefficients.

    Monomials are tuples of (variable-id, exponent) sorted by id; zero
    coefficients and zero exponents are never stored.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = terms if terms is not None else {}

    @classmethod
    def const(cls, c):
        c = Rat(c)
        return cls({(): c} if c != 0 else {})

    @classmethod
    def var(cls, name, exp=1):
        if exp == 0:
            return cls.const(1)
        return cls({((VARS.id(name), exp),): Rat(1)})

    def copy(self):
        return Poly(dict(self.terms))

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.terms == other.terms
        if isinstance(other, (int, Rat)):
            return self.terms == ({(): Rat(other)} if other != 0 else {})
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            nc = out.get(m, 0) + c
            if nc == 0:
                out.pop(m, None)
            else:
                out[m] = nc
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = Rat(other)
            if c == 0:
                return Poly()
            return Poly({m: co * c for m, co in self.terms.items()})
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                nc = out.get(m, 0) + c1 * c2
                if nc == 0:
                    out.pop(m, None)
                else:
                    out[m] = nc
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative power")
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def degree(self):
        """Total degree (0 for constants, -1 for the zero polynomial)."""
        if not self.terms:
            return -1
        return max(sum(e for _, e in m) for m in self.terms)

    def variables(self):
        """Variable names occurring in this polynomial."""
        seen = set()
        for m in self.terms:
            for v, _ in m:
                seen.add(v)
        return {VARS.name(v) for v in seen}

    def num_terms(self):
        return len(self.terms)

    def coefficient(self, mono_names):
        """Coefficient of the monomial given as {name: exponent}."""
        m = tuple(sorted((VARS.id(n), e) for n, e in mono_names.items() if e))
        return Rat(self.terms.get(m, 0))

    def eval(self, assignment):
        """Exact evaluation; assignment maps variable name -> Rat/int."""
        by_id = {}
        total = Rat(0)
        for m, c in self.terms.items():
            val = c
            for v, e in m:
                if v not in by_id:
                    name = VARS.name(v)
                    if name not in assignment:
                        raise KeyError(f"unassigned variable {name!r}")
                    by_id[v] = Rat(assignment[name])
                val = val * by_id[v] ** e
            total += val
        return total

    def eval_float(self, assignment):
        total = 0.0
        for m, c in self.terms.items():
            val = float(c)
            for v, e in m:
                val *= float(assignment[VARS.name(v)]) ** e
            total += val
        return total

    def substitute(self, subst):
        """Substitute polynomials for variables; result fully expanded.

        Every variable occurring in self must be covered by subst (values may
        be Poly, Rat or int).
        """
        cache = {}
        out = Poly()
        for m, c in self.terms.items():
            term = Poly.const(c)
            for v, e in m:
                name = VARS.name(v)
                if name not in subst:
                    raise KeyError(f"unsubstituted variable {name!r}")
                key = (v, e)
                if key not in cache:
                    rep = subst[name]
                    if not isinstance(rep, Poly):
                        rep = Poly.const(rep)
                    cache[key] = rep ** e
                term = term * cache[key]
            out = out + term
        return out

    def derivative(self, name):
        vid = VARS.id(name)
        out = {}
        for m, c in self.terms.items():
            for i, (v, e) in enumerate(m):
                if v == vid:
                    nc = c * e
                    if e == 1:
                        nm = m[:i] + m[i + 1:]
                    else:
                        nm = m[:i] + ((v, e - 1),) + m[i + 1:]
                    prev = out.get(nm, 0)
                    nc = prev + nc
                    if nc == 0:
                        out.pop(nm, None)
                    else:
                        out[nm] = nc
                    break
        return Poly(out)

    def sorted_terms(self):
        """Terms in canonical (graded-lex, descending) order."""
        return sorted(self.terms.items(), key=lambda t: _mono_sort_key(t[0]))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            factors = []
            num, den = c.numerator, c.denominator
            coeff = f"{num}" if den == 1 else f"{num}/{den}"
            factors.append(coeff.lstrip("-"))
            for v, e in sorted(m):
                factors.append(VARS.name(v) if e == 1 else f"{VARS.name(v)}^{e}")
            s = "*".join(factors)
            if not parts:
                parts.append(("-" if num < 0 else "") + s)
            else:
                parts.append(("- " if num < 0 else "+ ") + s)
        return " ".join(parts)

    __repr__ = __str__


def parse_poly(text):
    """Parse the canonical polynomial text format back into a Poly."""
    text = text.strip()
    if text == "0":
        return Poly()
    out = Poly()
    # split on top-level + / - keeping signs
    tokens = re.split(r"\s*([+-])\s*", text)
    if tokens[0] == "":
        tokens = tokens[1:]
    pending_sign = 1
    for tok in tokens:
        if tok == "+":
            pending_sign = 1
            continue
        if tok == "-":
            pending_sign = -1
            continue
        if not tok:
            continue
        if tok.startswith("-"):
            pending_sign = -pending_sign
            tok = tok[1:]
        coeff = Rat(1)
        mono = Poly.const(1)
        for factor in tok.split("*"):
            factor = factor.strip()
            if not factor:
                raise ValueError(f"bad term {tok!r}")
            if factor[0].isdigit():
                coeff = coeff * rat(factor)
            else:
                if "^" in factor:
                    name, e = factor.split("^")
                    mono = mono * Poly.var(name, int(e))
                else:
                    mono = mono * Poly.var(factor)
        out = out + mono * (coeff * pending_sign)
        pending_sign = 1
    return out


def normalize_poly(p):
    """Canonical representative: integer-cleared, content-free, leading term
    (canonical order) positive."""
    if p.is_zero():
        return p
    from math import gcd
    dens = [c.denominator for c in p.terms.values()]
    lcm = 1
    for d in dens:
        lcm = lcm * d // gcd(lcm, int(d))
    q = p * lcm
    g = 0
    for c in q.terms.values():
        g = gcd(g, int(c.numerator))
    if g > 1:
        q = q * Rat(1, g)
    lead_coeff = q.sorted_terms()[0][1]
    if lead_coeff < 0:
        q = -q
    return q


# ---------------------------------------------------------------------------
# exact dense matrices


def poly_eval(p, assignment):
    """Module-level alias; exact evaluation of p at a variable assignment."""
    return p.eval(assignment)


def poly_substitute(p, subst):
    return p.substitute(subst)


def _bareiss_echelon(rows):
    """Fraction-free (Bareiss) elimination on integer rows.

    Returns (echelon rows, pivot column list).  Input rows are consumed.
    """
    m = [list(r) for r in rows]
    nrows = len(m)
    ncols = len(m[0]) if m else 0
    piv_cols = []
    prev = 1
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, nrows):
            if m[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, nrows):
            for j in range(c + 1, ncols):
                m[i][j] = (m[r][c] * m[i][j] - m[i][c] * m[r][j]) // prev
            m[i][c] = 0
        prev = m[r][c]
        piv_cols.append(c)
        r += 1
        if r == nrows:
            break
    return m[:r], piv_cols


def _clear_rows(mat):
    """Scale each rational row to integers."""
    from math import gcd
    out = []
    for row in mat:
        row = [Rat(x) for x in row]
        lcm = 1
        for x in row:
            d = int(x.denominator)
            lcm = lcm * d // gcd(lcm, d)
        out.append([int(x.numerator) * (lcm // int(x.denominator)) for x in row])
    return out


def mat_rank_nullspace(mat):
    """Exact rank and nullspace basis of a rational matrix.

    Elimination is fraction-free on integer-cleared rows; the nullspace basis
    is exact with one vector per free column (rank + len(basis) == ncols).
    """
    if not mat or not mat[0]:
        ncols = len(mat[0]) if mat else 0
        basis = []
        for j in range(ncols):
            v = [Rat(0)] * ncols
            v[j] = Rat(1)
            basis.append(v)
        return 0, basis
    rows = _clear_rows(mat)
    ech, piv_cols = _bareiss_echelon(rows)
    rank = len(piv_cols)
    ncols = len(mat[0])
    free_cols = [j for j in range(ncols) if j not in set(piv_cols)]
    basis = []
    for fc in free_cols:
        v = [Rat(0)] * ncols
        v[fc] = Rat(1)
        # back substitution over the echelon rows
        for i in range(rank - 1, -1, -1):
            pc = piv_cols[i]
            s = Rat(0)
            for j in range(pc + 1, ncols):
                if v[j] != 0 and ech[i][j] != 0:
                    s += Rat(ech[i][j]) * v[j]
            v[pc] = -s / ech[i][pc]
        basis.append(v)
    return rank, basis


def nullspace_basis(mat):
    return mat_rank_nullspace(mat)[1]


def mat_det(mat):
    """Exact determinant; Bareiss for rational entries, cofactor expansion for
    polynomial entries."""
    n = len(mat)
    if n == 0:
        return Rat(1)
    if any(len(row) != n for row in mat):
        raise ValueError("determinant of a non-square matrix")
    if isinstance(mat[0][0], Poly):
        return _det_cofactor(mat)
    rows = _clear_rows(mat)
    scale = Rat(1)
    for orig, cleared in zip(mat, rows):
        # recover the scaling applied by _clear_rows
        for x, y in zip(orig, cleared):
            x = Rat(x)
            if x != 0:
                scale = scale * (x / y)
                break
        else:
            return Rat(0)
    m = [list(r) for r in rows]
    prev = 1
    sign = 1
    for c in range(n - 1):
        piv = None
        for i in range(c, n):
            if m[i][c] != 0:
                piv = i
                break
        if piv is None:
            return Rat(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            sign = -sign
        for i in range(c + 1, n):
            for j in range(c + 1, n):
                m[i][j] = (m[c][c] * m[i][j] - m[i][c] * m[c][j]) // prev
            m[i][c] = 0
        prev = m[c][c]
    return Rat(sign * m[n - 1][n - 1]) * scale


def _det_cofactor(mat):
    n = len(mat)
    if n == 1:
        return mat[0][0]
    if n == 2:
        return mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0]
    det = Poly()
    rest = [row[1:] for row in mat]
    for i in range(n):
        minor_rows = [rest[r] for r in range(n) if r != i]
        term = mat[i][0] * _det_cofactor(minor_rows)
        det = det + (term if i % 2 == 0 else -term)
    return det


def minors(mat, t):
    """All t x t minors, lexicographic on (row tuple, column tuple)."""
    nrows, ncols = len(mat), len(mat[0])
    if t < 0 or t > min(nrows, ncols):
        raise ValueError(f"minor size {t} out of range for {nrows}x{ncols}")
    out = []
    for rsel in itertools.combinations(range(nrows), t):
        for csel in itertools.combinations(range(ncols), t):
            sub = [[mat[r][c] for c in csel] for r in rsel]
            out.append(mat_det(sub))
    return out
