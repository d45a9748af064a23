"""Transform between Hilbert-scheme Poincare polynomials and the D-graded
Jacobian polynomial.

The two are related by the kernel ``1 / ((1 - z)(1 - t^2 z))``: the
coefficient of ``z^k`` in that kernel is ``1 + t^2 + ... + t^(2k)``, the
Poincare polynomial of ``Sym^k(Q + Q[2])``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import FormatError, InsufficientTruncation, NotMacdonaldFamily
from .exact import LaurentPoly, truncated_series_quotient

T = LaurentPoly.var("t")
Z = LaurentPoly.var("z")
#: (1 - z)(1 - t^2 z)
SYM_DENOMINATOR = (1 - Z) * (1 - T * T * Z)


@dataclass(frozen=True)
class PoincareFamily:
    """``polys[n][i] = dim H_i`` at level ``n``, for ``n = 0..N``."""

    polys: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        cleaned = []
        for p in self.polys:
            p = list(int(c) for c in p)
            while p and p[-1] == 0:
                p.pop()
            cleaned.append(tuple(p))
        object.__setattr__(self, "polys", tuple(cleaned))

    @property
    def N(self) -> int:
        return len(self.polys) - 1

    def poly(self, n: int) -> LaurentPoly:
        return LaurentPoly.from_coefficients("t", self.polys[n])

    def generating_function(self) -> LaurentPoly:
        """``sum_n P_n(t) z^n``."""
        out = LaurentPoly({}, ("t", "z"))
        for n in range(len(self.polys)):
            out = out + self.poly(n).shift("z", n)
        return out

    def violations(self, curve_like: bool = True) -> list[str]:
        problems = []
        for n, p in enumerate(self.polys):
            if any(c < 0 for c in p):
                problems.append(f"negative coefficient at level {n}")
            if curve_like and len(p) - 1 > 2 * n:
                problems.append(f"degree of P_{n} exceeds {2 * n}")
        if curve_like and self.polys and self.polys[0] != (1,):
            problems.append("P_0 != 1")
        return problems

    def to_json(self) -> dict:
        return {"N": self.N, "polys": [list(p) for p in self.polys]}

    @classmethod
    def from_json(cls, data: Mapping) -> "PoincareFamily":
        try:
            polys = data["polys"]
            if not all(isinstance(c, int) and not isinstance(c, bool) for p in polys for c in p):
                raise FormatError("Poincare coefficients must be integers")
            fam = cls(tuple(tuple(p) for p in polys))
        except (KeyError, TypeError) as exc:
            raise FormatError(f"malformed Poincare family: {exc}") from None
        if "N" in data and data["N"] != fam.N:
            raise FormatError(f"N = {data['N']} but {len(polys)} polynomials given")
        return fam

    @classmethod
    def from_dims(cls, dims: Mapping[tuple[int, int], int], N: int) -> "PoincareFamily":
        polys = [[0] * (2 * N + 1) for _ in range(N + 1)]
        for (i, n), d in dims.items():
            if n <= N:
                if i >= len(polys[n]):
                    polys[n].extend([0] * (i + 1 - len(polys[n])))
                polys[n][i] += d
        return cls(tuple(tuple(p) for p in polys))


@dataclass(frozen=True)
class DGradedPoly:
    """``coeffs[(i, n)] = dim D_n H_i(J)`` together with the genus."""

    genus: int
    coeffs: Mapping[tuple[int, int], int]

    def __post_init__(self):
        clean = {(int(i), int(n)): int(d) for (i, n), d in self.coeffs.items() if d}
        object.__setattr__(self, "coeffs", dict(sorted(clean.items(), key=lambda kv: (kv[0][1], kv[0][0]))))

    def __hash__(self):
        return hash((self.genus, tuple(self.coeffs.items())))

    @property
    def poly(self) -> LaurentPoly:
        return LaurentPoly.from_table(self.coeffs, ("t", "z"))

    @classmethod
    def from_poly(cls, genus: int, p: LaurentPoly) -> "DGradedPoly":
        tab = p.table(("t", "z"))
        for k, c in tab.items():
            if c.denominator != 1:
                raise ValueError(f"non-integer coefficient {c} at {k}")
        return cls(genus, {k: int(c) for k, c in tab.items()})

    def violations(self) -> list[str]:
        problems = []
        for (i, n), d in self.coeffs.items():
            if d < 0:
                problems.append(f"negative coefficient at ({i},{n})")
            if not 0 <= n <= 2 * self.genus:
                problems.append(f"level {n} outside [0, {2 * self.genus}] at ({i},{n})")
        return problems

    def to_json(self) -> dict:
        return {"genus": self.genus, "coeffs": [[i, n, d] for (i, n), d in self.coeffs.items()]}

    @classmethod
    def from_json(cls, data: Mapping) -> "DGradedPoly":
        try:
            g = data["genus"]
            entries = data["coeffs"]
            coeffs = {}
            for e in entries:
                if len(e) != 3 or not all(isinstance(x, int) and not isinstance(x, bool) for x in e):
                    raise FormatError(f"bad coefficient entry {e!r}")
                coeffs[(e[0], e[1])] = coeffs.get((e[0], e[1]), 0) + e[2]
        except (KeyError, TypeError) as exc:
            raise FormatError(f"malformed D-graded polynomial: {exc}") from None
        if not isinstance(g, int) or isinstance(g, bool) or g < 0:
            raise FormatError("genus must be a non-negative integer")
        return cls(g, coeffs)


def hilb_from_d(d: DGradedPoly, N: int) -> PoincareFamily:
    """``P_n(t)`` = coefficient of ``z^n`` in ``P_D(t, z) / ((1 - z)(1 - t^2 z))``."""
    series = truncated_series_quotient(d.poly, SYM_DENOMINATOR, "z", N)
    by_level = series.coefficients("z")
    polys = []
    for n in range(N + 1):
        p = by_level.get(n)
        coeffs = p.to_list("t", p.max_degree("t") + 1) if p is not None and p else []
        polys.append(tuple(int(c) for c in coeffs))
    return PoincareFamily(tuple(polys))


def d_from_hilb(p: PoincareFamily, g: int) -> DGradedPoly:
    """Invert :func:`hilb_from_d`: multiply by ``(1 - z)(1 - t^2 z)``.

    Every coefficient must be a non-negative integer and levels above ``2g``
    must cancel exactly; otherwise :class:`NotMacdonaldFamily` lists the
    offending ``(i, n)`` in ``locations``.
    """
    N = p.N
    if N < 2 * g:
        raise InsufficientTruncation(f"insufficient truncation: N = {N} < 2g = {2 * g}")
    prod = (p.generating_function() * SYM_DENOMINATOR).truncate("z", N)
    tab = prod.table(("t", "z"))
    bad = sorted(
        ((i, n) for (i, n), c in tab.items() if c < 0 or c.denominator != 1 or n > 2 * g),
        key=lambda s: (s[1], s[0]),
    )
    if bad:
        i, n = bad[0]
        raise NotMacdonaldFamily(
            f"input is not a Macdonald family for genus {g}: offending (i,n) = ({i},{n})",
            locations=bad,
        )
    return DGradedPoly(g, {k: int(c) for k, c in tab.items()})


def check_duality(d: DGradedPoly) -> bool:
    """``coeff(k, n) == coeff(k + 2g - 2n, 2g - n)`` for every ``(k, n)``.

    Indices are read as (cohomological degree, level) exactly as stored.
    """
    g = d.genus
    c = d.coeffs
    return all(c.get((k + 2 * g - 2 * n, 2 * g - n), 0) == v for (k, n), v in c.items())


def duality_violations(d: DGradedPoly) -> list[tuple[int, int]]:
    g = d.genus
    c = d.coeffs
    return [(k, n) for (k, n), v in c.items() if c.get((k + 2 * g - 2 * n, 2 * g - n), 0) != v]


def _chi(poly: Sequence[int]) -> int:
    return sum(c if i % 2 == 0 else -c for i, c in enumerate(poly))


def euler_specialize(x):
    """Set ``t = -1``.

    A :class:`PoincareFamily` gives an :class:`~hilbheis.bps.EulerSeries`
    (``chi`` per level); a :class:`DGradedPoly` gives a
    :class:`~hilbheis.bps.DEulerPoly`.
    """
    from .bps import DEulerPoly, EulerSeries

    if isinstance(x, PoincareFamily):
        return EulerSeries(tuple(_chi(p) for p in x.polys))
    if isinstance(x, DGradedPoly):
        L = [0] * (2 * x.genus + 1)
        for (i, n), d in x.coeffs.items():
            if not 0 <= n <= 2 * x.genus:
                raise ValueError(f"level {n} outside [0, {2 * x.genus}]")
            L[n] += d if i % 2 == 0 else -d
        return DEulerPoly(x.genus, tuple(L))
    raise TypeError(f"cannot specialize {type(x).__name__}")


def sym_kernel(N: int) -> LaurentPoly:
    """``1 / ((1 - z)(1 - t^2 z))`` to order ``z^N``."""
    return truncated_series_quotient(LaurentPoly.const(1), SYM_DENOMINATOR, "z", N)
