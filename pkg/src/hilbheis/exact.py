"""Exact scalars, Laurent polynomials in t, z, q and dense rational matrices.

Everything here works over :class:`fractions.Fraction`; nothing is ever
rounded.  Values are treated as immutable.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

from .errors import FormatError

RationalScalar = Fraction

#: Variables a :class:`LaurentPoly` may use, in canonical order.
VARIABLES = ("t", "z", "q")
_INDEX = {v: k for k, v in enumerate(VARIABLES)}
# only q may carry negative exponents
_LAURENT_VARS = frozenset("q")

_RATIONAL_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


def parse_rational(value) -> Fraction:
    """Read a rational literal: an integer or a ``"p/q"`` string with q > 0."""
    if isinstance(value, bool):
        raise FormatError(f"not a rational literal: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        s = value.strip()
        if _RATIONAL_RE.match(s):
            try:
                return Fraction(s)
            except ZeroDivisionError:
                pass
    raise FormatError(f"not a rational literal: {value!r}")


def format_rational(x: Fraction) -> int | str:
    """Inverse of :func:`parse_rational`; integers stay JSON numbers."""
    x = Fraction(x)
    if x.denominator == 1:
        return x.numerator
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# Laurent polynomials
# ---------------------------------------------------------------------------

Exponents = tuple  # (t, z, q) exponent triple


def _key(mono) -> Exponents:
    if isinstance(mono, Mapping):
        items = mono.items()
    elif isinstance(mono, tuple) and len(mono) == 3 and all(isinstance(e, int) for e in mono):
        return mono
    else:
        items = mono
    exps = [0, 0, 0]
    for var, e in items:
        if var not in _INDEX:
            raise ValueError(f"unknown variable {var!r}; expected one of {VARIABLES}")
        exps[_INDEX[var]] += int(e)
    return tuple(exps)


class LaurentPoly:
    """Finite sum of monomials t^a z^b q^c with rational coefficients.

    ``t`` and ``z`` exponents are non-negative, ``q`` exponents may be
    negative.  Zero coefficients are never stored.  ``variables`` is the
    ordered set of declared variables; equality only looks at the terms.
    """

    __slots__ = ("_terms", "_vars")

    def __init__(self, terms: Mapping | None = None, variables: Iterable[str] = ()):
        clean: dict[Exponents, Fraction] = {}
        for mono, c in (terms or {}).items():
            k = _key(mono)
            clean[k] = clean.get(k, 0) + (c if isinstance(c, Fraction) else parse_rational(c))
        self._init(clean, variables)

    def _init(self, terms: dict, variables: Iterable[str]) -> None:
        terms = {k: c for k, c in terms.items() if c}
        declared = set(variables)
        for var in declared:
            if var not in _INDEX:
                raise ValueError(f"unknown variable {var!r}")
        for k in terms:
            for var, e in zip(VARIABLES, k):
                if e:
                    declared.add(var)
                    if e < 0 and var not in _LAURENT_VARS:
                        raise ValueError(f"negative exponent of {var} not allowed")
        self._terms = terms
        self._vars = tuple(v for v in VARIABLES if v in declared)

    @classmethod
    def _raw(cls, terms: dict, variables: Iterable[str]) -> "LaurentPoly":
        p = cls.__new__(cls)
        p._init(terms, variables)
        return p

    # -- constructors -------------------------------------------------------

    @classmethod
    def const(cls, c=1) -> "LaurentPoly":
        return cls._raw({(0, 0, 0): Fraction(c)}, ())

    @classmethod
    def var(cls, name: str) -> "LaurentPoly":
        return cls._raw({_key({name: 1}): Fraction(1)}, (name,))

    @classmethod
    def monomial(cls, coeff=1, **exps: int) -> "LaurentPoly":
        return cls._raw({_key(exps): Fraction(coeff)}, exps)

    @classmethod
    def from_coefficients(cls, var: str, coeffs: Sequence, start: int = 0) -> "LaurentPoly":
        """``sum coeffs[k] * var**(start + k)``."""
        k = _INDEX[var]
        terms = {}
        for j, c in enumerate(coeffs):
            e = [0, 0, 0]
            e[k] = start + j
            terms[tuple(e)] = Fraction(c)
        return cls._raw(terms, (var,))

    @classmethod
    def from_table(cls, table: Mapping[tuple, object], variables: Sequence[str]) -> "LaurentPoly":
        """Build from ``{(e_1, ..., e_k): coeff}`` with exponents aligned to ``variables``."""
        terms: dict[Exponents, Fraction] = {}
        for exps, c in table.items():
            k = _key(zip(variables, exps))
            terms[k] = terms.get(k, 0) + Fraction(c)
        return cls._raw(terms, variables)

    # -- inspection ---------------------------------------------------------

    @property
    def variables(self) -> tuple[str, ...]:
        return self._vars

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_constant(self) -> bool:
        return all(k == (0, 0, 0) for k in self._terms)

    def terms(self) -> Iterator[tuple[dict[str, int], Fraction]]:
        """Yield ``({var: exp}, coeff)`` in sorted order, zero exponents omitted."""
        for k in sorted(self._terms):
            yield {v: e for v, e in zip(VARIABLES, k) if e}, self._terms[k]

    def coefficient(self, **exps: int) -> Fraction:
        return self._terms.get(_key(exps), Fraction(0))

    def coefficients(self, var: str) -> dict[int, "LaurentPoly"]:
        """Collect by powers of ``var``: ``{e: coefficient of var**e}``."""
        k = _INDEX[var]
        rest = [v for v in self._vars if v != var]
        out: dict[int, dict] = {}
        for mono, c in self._terms.items():
            e = mono[k]
            m = list(mono)
            m[k] = 0
            out.setdefault(e, {})[tuple(m)] = c
        return {e: LaurentPoly._raw(t, rest) for e, t in sorted(out.items())}

    def table(self, variables: Sequence[str]) -> dict[tuple[int, ...], Fraction]:
        """Coefficients keyed by exponent tuples aligned to ``variables``."""
        idx = [_INDEX[v] for v in variables]
        out = {}
        for mono, c in self._terms.items():
            if any(e and j not in idx for j, e in enumerate(mono)):
                raise ValueError(f"polynomial involves variables outside {tuple(variables)}")
            out[tuple(mono[j] for j in idx)] = c
        return dict(sorted(out.items()))

    def to_list(self, var: str, length: int) -> list[Fraction]:
        """Dense coefficient list ``[c_0, ..., c_{length-1}]`` of a univariate polynomial."""
        tab = self.table((var,))
        if tab and min(e for (e,) in tab) < 0:
            raise ValueError("negative exponents cannot be listed from 0")
        return [tab.get((e,), Fraction(0)) for e in range(length)]

    def max_degree(self, var: str) -> int | None:
        k = _INDEX[var]
        return max((m[k] for m in self._terms), default=None)

    def min_degree(self, var: str) -> int | None:
        k = _INDEX[var]
        return min((m[k] for m in self._terms), default=None)

    # -- transformations ----------------------------------------------------

    def truncate(self, var: str, order: int) -> "LaurentPoly":
        """Drop every term whose ``var`` exponent exceeds ``order``."""
        k = _INDEX[var]
        return LaurentPoly._raw({m: c for m, c in self._terms.items() if m[k] <= order}, self._vars)

    def shift(self, var: str, amount: int) -> "LaurentPoly":
        k = _INDEX[var]
        out = {}
        for m, c in self._terms.items():
            m = list(m)
            m[k] += amount
            out[tuple(m)] = c
        return LaurentPoly._raw(out, self._vars)

    def subs(self, **values) -> "LaurentPoly":
        """Substitute rational values for variables."""
        out: dict[Exponents, Fraction] = {}
        for m, c in self._terms.items():
            m = list(m)
            for var, val in values.items():
                k = _INDEX[var]
                c = c * Fraction(val) ** m[k]
                m[k] = 0
            m = tuple(m)
            out[m] = out.get(m, 0) + c
        return LaurentPoly._raw(out, [v for v in self._vars if v not in values])

    def rename(self, **mapping: str) -> "LaurentPoly":
        """Rename variables, e.g. ``p.rename(z="q")``."""
        out: dict[Exponents, Fraction] = {}
        for m, c in self._terms.items():
            e = [0, 0, 0]
            for var, x in zip(VARIABLES, m):
                e[_INDEX[mapping.get(var, var)]] += x
            e = tuple(e)
            out[e] = out.get(e, 0) + c
        return LaurentPoly._raw(out, [mapping.get(v, v) for v in self._vars])

    # -- arithmetic ---------------------------------------------------------

    @staticmethod
    def _coerce(other) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return LaurentPoly.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, 0) + c
        return LaurentPoly._raw(out, self._vars + other._vars)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly._raw({m: -c for m, c in self._terms.items()}, self._vars)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[Exponents, Fraction] = {}
        for (a0, a1, a2), c in self._terms.items():
            for (b0, b1, b2), d in other._terms.items():
                m = (a0 + b0, a1 + b1, a2 + b2)
                out[m] = out.get(m, 0) + c * d
        return LaurentPoly._raw(out, self._vars + other._vars)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        result = LaurentPoly._raw({(0, 0, 0): Fraction(1)}, self._vars)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        if not self._terms:
            return "0"
        parts = []
        for exps, c in self.terms():
            mono = "*".join(v if e == 1 else f"{v}^{e}" for v, e in exps.items())
            if not mono:
                body = str(abs(c))
            elif abs(c) == 1:
                body = mono
            else:
                body = f"{abs(c)}*{mono}"
            parts.append(("-" if c < 0 else "+", body))
        first_sign, first = parts[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text


def laurent_arith(a: LaurentPoly, b: LaurentPoly, op: str) -> LaurentPoly:
    """``op`` is one of ``"add"``, ``"sub"``, ``"mul"``."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def truncated_series_quotient(num: LaurentPoly, den: LaurentPoly, var: str, order: int) -> LaurentPoly:
    """Power series ``num / den`` in ``var`` up to and including ``var**order``.

    The lowest ``var``-coefficient of ``den`` must be a nonzero constant.
    Exact long division: ``num - den * result`` has no terms of ``var``-degree
    below ``order + 1 + lowdeg(den)``.
    """
    den_by = den.coefficients(var)
    if not den_by:
        raise ZeroDivisionError("not a unit for series division")
    d0 = min(den_by)
    lead = den_by[d0]
    if not lead.is_constant():
        raise ZeroDivisionError("not a unit for series division")
    lead_c = lead.coefficient()
    num_by = num.coefficients(var)
    if not num_by:
        return LaurentPoly._raw({}, num.variables + den.variables)
    zero = LaurentPoly._raw({}, ())
    start = min(num_by) - d0
    tail = [(k - d0, c) for k, c in den_by.items() if k != d0]
    result: dict[int, LaurentPoly] = {}
    for e in range(start, order + 1):
        acc = num_by.get(e + d0, zero)
        for k, c in tail:
            prev = result.get(e - k)
            if prev is not None and prev:
                acc = acc - c * prev
        result[e] = acc * (1 / lead_c)
    out = zero
    for e, c in result.items():
        if c:
            out = out + c.shift(var, e)
    return LaurentPoly._raw(dict(out._terms), num.variables + den.variables + (var,))


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------

Vector = tuple  # tuple of Fractions


def _rref_in_place(rows: list[list[Fraction]], ncols: int) -> list[int]:
    """Reduce ``rows`` to reduced row echelon form; return pivot columns."""
    nrows = len(rows)
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if rows[i][c]), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        pr = rows[r]
        lead = pr[c]
        if lead != 1:
            pr[:] = [x / lead for x in pr]
        nz = [j for j in range(c, ncols) if pr[j]]
        for i in range(nrows):
            ri = rows[i]
            f = ri[c]
            if i != r and f:
                for j in nz:
                    ri[j] -= f * pr[j]
        pivots.append(c)
        r += 1
    return pivots


class LinearSolution(NamedTuple):
    solution: Vector | None
    rank: int
    consistent: bool


class RationalMatrix:
    """Dense matrix with :class:`Fraction` entries and an explicit shape."""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, entries: Sequence[Sequence] = (), cols: int | None = None):
        data = tuple(tuple(parse_rational(x) for x in row) for row in entries)
        if data:
            width = len(data[0])
            if any(len(row) != width for row in data):
                raise ValueError("ragged matrix rows")
            if cols is not None and cols != width:
                raise ValueError(f"declared {cols} columns but rows have {width}")
        else:
            width = cols or 0
        self.rows = len(data)
        self.cols = width
        self._data = data

    @classmethod
    def _raw(cls, rows: int, cols: int, data: tuple) -> "RationalMatrix":
        m = cls.__new__(cls)
        m.rows, m.cols, m._data = rows, cols, data
        return m

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RationalMatrix":
        z = Fraction(0)
        return cls._raw(rows, cols, tuple((z,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        one, z = Fraction(1), Fraction(0)
        return cls._raw(n, n, tuple(tuple(one if i == j else z for j in range(n)) for i in range(n)))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int) -> "RationalMatrix":
        cols = [tuple(Fraction(x) for x in col) for col in columns]
        if any(len(c) != rows for c in cols):
            raise ValueError("column length mismatch")
        return cls._raw(rows, len(cols), tuple(tuple(c[i] for c in cols) for i in range(rows)))

    @staticmethod
    def vstack(*blocks: "RationalMatrix") -> "RationalMatrix":
        cols = {b.cols for b in blocks}
        if len(cols) > 1:
            raise ValueError("vstack: column counts differ")
        data = tuple(row for b in blocks for row in b._data)
        return RationalMatrix._raw(len(data), cols.pop() if cols else 0, data)

    @staticmethod
    def hstack(*blocks: "RationalMatrix") -> "RationalMatrix":
        rows = {b.rows for b in blocks}
        if len(rows) > 1:
            raise ValueError("hstack: row counts differ")
        n = rows.pop() if rows else 0
        data = tuple(tuple(x for b in blocks for x in b._data[i]) for i in range(n))
        return RationalMatrix._raw(n, sum(b.cols for b in blocks), data)

    # -- access -------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def data(self) -> tuple[tuple[Fraction, ...], ...]:
        return self._data

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self._data[i][j]

    def column(self, j: int) -> Vector:
        return tuple(row[j] for row in self._data)

    def tolist(self) -> list[list[int | str]]:
        return [[format_rational(x) for x in row] for row in self._data]

    def is_zero(self) -> bool:
        return not any(x for row in self._data for x in row)

    def is_identity(self) -> bool:
        if self.rows != self.cols:
            return False
        return all(x == (i == j) for i, row in enumerate(self._data) for j, x in enumerate(row))

    @property
    def T(self) -> "RationalMatrix":
        return RationalMatrix._raw(self.cols, self.rows, tuple(zip(*self._data)) if self.rows else tuple(() for _ in range(self.cols)))

    # -- arithmetic ---------------------------------------------------------

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch: {self.shape} @ {other.shape}")
        z = Fraction(0)
        odata = other._data
        onz = [[(j, x) for j, x in enumerate(row) if x] for row in odata]
        out = []
        for row in self._data:
            acc = [z] * other.cols
            for k, a in enumerate(row):
                if a:
                    for j, b in onz[k]:
                        acc[j] += a * b
            out.append(tuple(acc))
        return RationalMatrix._raw(self.rows, other.cols, tuple(out))

    def matvec(self, v: Sequence[Fraction]) -> Vector:
        if len(v) != self.cols:
            raise ValueError(f"shape mismatch: {self.shape} @ vector of length {len(v)}")
        nz = [(k, x) for k, x in enumerate(v) if x]
        z = Fraction(0)
        return tuple(sum((row[k] * x for k, x in nz if row[k]), z) for row in self._data)

    def _zip(self, other: "RationalMatrix", sign: int) -> "RationalMatrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch: {self.shape} vs {other.shape}")
        if sign > 0:
            data = tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self._data, other._data))
        else:
            data = tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self._data, other._data))
        return RationalMatrix._raw(self.rows, self.cols, data)

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        return self._zip(other, 1)

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        return self._zip(other, -1)

    def __neg__(self) -> "RationalMatrix":
        return self.scale(-1)

    def scale(self, c) -> "RationalMatrix":
        c = Fraction(c)
        return RationalMatrix._raw(self.rows, self.cols, tuple(tuple(c * x for x in row) for row in self._data))

    def __eq__(self, other):
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self):
        return hash((self.rows, self.cols, self._data))

    def __repr__(self):
        return f"RationalMatrix({self.tolist()!r}, cols={self.cols})"

    # -- elimination --------------------------------------------------------

    def rref(self) -> tuple["RationalMatrix", list[int]]:
        rows = [list(r) for r in self._data]
        pivots = _rref_in_place(rows, self.cols)
        return RationalMatrix._raw(self.rows, self.cols, tuple(tuple(r) for r in rows)), pivots

    def rank(self) -> int:
        rows = [list(r) for r in self._data]
        return len(_rref_in_place(rows, self.cols))

    def nullspace(self) -> list[Vector]:
        """Basis of the right kernel, one vector per free column (RREF order)."""
        rows = [list(r) for r in self._data]
        pivots = _rref_in_place(rows, self.cols)
        pivset = set(pivots)
        z, one = Fraction(0), Fraction(1)
        basis = []
        for f in range(self.cols):
            if f in pivset:
                continue
            v = [z] * self.cols
            v[f] = one
            for k, p in enumerate(pivots):
                v[p] = -rows[k][f]
            basis.append(tuple(v))
        return basis


def solve_linear(A: RationalMatrix, b: Sequence) -> LinearSolution:
    """Solve ``A x = b`` exactly.

    Returns a particular solution (free variables set to zero), the rank of
    ``A`` and a consistency flag; ``solution`` is ``None`` when inconsistent.
    """
    if len(b) != A.rows:
        raise ValueError(f"shape mismatch: matrix has {A.rows} rows, right side has {len(b)}")
    rhs = [parse_rational(x) for x in b]
    rows = [list(r) + [rhs[i]] for i, r in enumerate(A.data)]
    pivots = _rref_in_place(rows, A.cols + 1)
    if pivots and pivots[-1] == A.cols:
        return LinearSolution(None, len(pivots) - 1, False)
    x = [Fraction(0)] * A.cols
    for k, p in enumerate(pivots):
        x[p] = rows[k][A.cols]
    return LinearSolution(tuple(x), len(pivots), True)
