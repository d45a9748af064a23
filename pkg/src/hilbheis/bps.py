"""BPS numbers from Euler characteristics of Hilbert schemes of points.

Two independent routes are provided:

* :func:`ng_from_z` matches ``Z(q) = sum chi(C^[n]) q^n`` against
  ``sum_h n_h q^(g-h) (1-q)^(2h-2)`` by solving an overdetermined linear
  system over the first ``N + 1`` coefficients.
* :func:`ng_prime_from_L` expands ``q^-g L(q)``, with ``L = (1-q)^2 Z``, in
  powers of ``s = q^-1 - 2 + q`` by peeling off leading terms.

:func:`compare_bps` checks that both give the same integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import (
    FormatError,
    InconsistentSeries,
    InsufficientTruncation,
    IntegralityViolation,
    NotBpsRational,
    SymmetryFailure,
)
from .exact import LaurentPoly, RationalMatrix, solve_linear, truncated_series_quotient

Q = LaurentPoly.var("q")


def _ints(values, what: str) -> tuple[int, ...]:
    if not all(isinstance(c, int) and not isinstance(c, bool) for c in values):
        raise FormatError(f"{what} must be integers")
    return tuple(values)


def _opt_int(data: Mapping, key: str):
    v = data.get(key)
    if v is not None and (not isinstance(v, int) or isinstance(v, bool) or v < 0):
        raise FormatError(f"{key} must be a non-negative integer or null")
    return v


@dataclass(frozen=True)
class EulerSeries:
    """Coefficients ``c_0..c_N`` of ``Z(q)`` plus arithmetic and geometric genus."""

    coeffs: tuple[int, ...]
    g: int | None = None
    g_tilde: int | None = None

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    @property
    def poly(self) -> LaurentPoly:
        return LaurentPoly.from_coefficients("q", self.coeffs)

    def to_json(self) -> dict:
        return {"coeffs": list(self.coeffs), "g": self.g, "g_tilde": self.g_tilde}

    @classmethod
    def from_json(cls, data: Mapping) -> "EulerSeries":
        try:
            coeffs = _ints(data["coeffs"], "Euler coefficients")
        except (KeyError, TypeError) as exc:
            raise FormatError(f"malformed Euler series: {exc}") from None
        if not coeffs:
            raise FormatError("empty Euler series")
        return cls(coeffs, _opt_int(data, "g"), _opt_int(data, "g_tilde"))


@dataclass(frozen=True)
class DEulerPoly:
    """``L_0..L_{2g}`` with ``L_n = chi(D_n H^*(J))``."""

    genus: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if any(Fraction(x).denominator != 1 for x in self.coeffs):
            raise ValueError("L coefficients must be integers")
        c = tuple(int(x) for x in self.coeffs)
        if len(c) > 2 * self.genus + 1:
            if any(c[2 * self.genus + 1:]):
                raise ValueError(f"support exceeds [0, {2 * self.genus}]")
            c = c[: 2 * self.genus + 1]
        c = c + (0,) * (2 * self.genus + 1 - len(c))
        object.__setattr__(self, "coeffs", c)

    @property
    def poly(self) -> LaurentPoly:
        return LaurentPoly.from_coefficients("q", self.coeffs)

    def total(self) -> int:
        """``L(1)``."""
        return sum(self.coeffs)

    def to_json(self) -> dict:
        return {"genus": self.genus, "coeffs": list(self.coeffs)}


@dataclass(frozen=True)
class BpsVector:
    """``n[h]`` for ``h = 0..g``."""

    n: tuple[int, ...]
    g_tilde: int | None = field(default=None, compare=False)

    @property
    def genus(self) -> int:
        return len(self.n) - 1

    def vanishing_below(self) -> int:
        """Smallest ``h`` with ``n[h] != 0`` (``len(n)`` if all vanish)."""
        return next((h for h, x in enumerate(self.n) if x), len(self.n))

    def to_json(self) -> dict:
        return {"n": list(self.n)}

    @classmethod
    def from_json(cls, data: Mapping) -> "BpsVector":
        try:
            return cls(_ints(data["n"], "BPS numbers"))
        except (KeyError, TypeError) as exc:
            raise FormatError(f"malformed BPS vector: {exc}") from None


def _genus(Z: EulerSeries) -> int:
    if Z.g is None:
        raise ValueError("arithmetic genus g required")
    return Z.g


def d_euler_from_z(Z: EulerSeries) -> DEulerPoly:
    """``L = (1 - q)^2 Z`` truncated at ``q^N``; degrees above ``2g`` must vanish."""
    g = _genus(Z)
    if Z.N < 2 * g:
        raise InsufficientTruncation(f"insufficient truncation: N = {Z.N} < 2g = {2 * g}")
    L = ((1 - Q) ** 2 * Z.poly).truncate("q", Z.N).to_list("q", Z.N + 1)
    tail = [k for k in range(2 * g + 1, Z.N + 1) if L[k]]
    if tail:
        raise InconsistentSeries(
            f"series inconsistent with arithmetic genus {g}: nonzero coefficient at q^{tail[0]}",
            locations=tail,
        )
    return DEulerPoly(g, tuple(int(c) for c in L[: 2 * g + 1]))


def check_q_symmetry(L: DEulerPoly) -> bool:
    """``L_k == L_{2g-k}``, i.e. ``q^-g L`` is invariant under ``q -> 1/q``."""
    c = L.coeffs
    return all(c[k] == c[2 * L.genus - k] for k in range(len(c)))


def basis_series(g: int, h: int, N: int) -> list[Fraction]:
    """Coefficients of ``q^(g-h) (1-q)^(2h-2)`` up to ``q^N``."""
    e = 2 * h - 2
    if e >= 0:
        p = (1 - Q) ** e
    else:
        p = truncated_series_quotient(LaurentPoly.const(1), (1 - Q) ** (-e), "q", N)
    return p.shift("q", g - h).truncate("q", N).to_list("q", N + 1)


def ng_from_z(Z: EulerSeries) -> BpsVector:
    """Solve ``Z = sum_{h = g~}^{g} n_h q^(g-h) (1-q)^(2h-2)`` to order ``q^N``.

    The system has ``N + 1`` equations; every one must hold exactly and the
    unique solution must be integral.
    """
    g = _genus(Z)
    if Z.N < 2 * g:
        raise InsufficientTruncation(f"insufficient truncation: N = {Z.N} < 2g = {2 * g}")
    lo = Z.g_tilde if Z.g_tilde is not None else 0
    if lo > g:
        raise ValueError(f"geometric genus {lo} exceeds arithmetic genus {g}")
    hs = list(range(lo, g + 1))
    A = RationalMatrix.from_columns([basis_series(g, h, Z.N) for h in hs], Z.N + 1)
    sol = solve_linear(A, Z.coeffs)
    if not sol.consistent:
        raise NotBpsRational("not a BPS-rational series: residual does not vanish")
    if sol.rank < len(hs):
        raise NotBpsRational("not a BPS-rational series: basis not independent at this truncation")
    n = [0] * (g + 1)
    for h, x in zip(hs, sol.solution):
        if x.denominator != 1:
            raise IntegralityViolation(f"integrality violated: n_{h} = {x}", locations=[h])
        n[h] = int(x)
    return BpsVector(tuple(n), Z.g_tilde)


def ng_prime_from_L(L: DEulerPoly) -> BpsVector:
    """Expand ``q^-g L(q)`` as ``sum_h n'_h (q^-1 - 2 + q)^h``.

    ``s^h`` has leading term ``q^h`` with coefficient 1, so the expansion is
    found top-down.  Refuses asymmetric input, which no such sum can match.
    """
    if not check_q_symmetry(L):
        raise SymmetryFailure("L(q) is not invariant under q -> 1/q; no expansion in (q^-1 - 2 + q)")
    g = L.genus
    s = LaurentPoly.monomial(1, q=-1) - 2 + Q
    rest = L.poly.shift("q", -g)
    n = [0] * (g + 1)
    for h in range(g, -1, -1):
        c = rest.coefficient(q=h)
        if c.denominator != 1:
            raise IntegralityViolation(f"integrality violated: n'_{h} = {c}", locations=[h])
        n[h] = int(c)
        if c:
            rest = rest - c * s ** h
    if rest:
        raise SymmetryFailure(f"expansion left remainder {rest}")
    return BpsVector(tuple(n))


def compare_bps(a: BpsVector, b: BpsVector) -> bool:
    """Entrywise equality; vectors of different genus never agree."""
    return a.n == b.n


def ng_sum_check(L: DEulerPoly, nprime: BpsVector) -> bool:
    """``L(1) == n'_0``: every ``s^h`` with ``h >= 1`` vanishes at ``q = 1``."""
    return L.total() == nprime.n[0]


@dataclass
class BpsReport:
    """Everything the two routes produce for one Euler series."""

    series: EulerSeries
    L: DEulerPoly | None = None
    symmetric: bool | None = None
    n_from_z: BpsVector | None = None
    n_prime: BpsVector | None = None
    equal: bool | None = None
    sum_check: bool | None = None
    failures: list[tuple[str, str]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        out = {
            "check": "bps",
            "passed": self.passed,
            "g": self.series.g,
            "g_tilde": self.series.g_tilde,
            "L": list(self.L.coeffs) if self.L else None,
            "q_symmetric": self.symmetric,
            "n_from_z": list(self.n_from_z.n) if self.n_from_z else None,
            "n_prime_from_L": list(self.n_prime.n) if self.n_prime else None,
            "equal": self.equal,
            "integral": not any(c == IntegralityViolation.check for c, _ in self.failures),
            "sum_L_equals_n0": self.sum_check,
            "failures": [{"check": c, "message": m} for c, m in self.failures],
        }
        if self.n_from_z is not None:
            out["vanishing_below"] = self.n_from_z.vanishing_below()
        return out


def bps_pipeline(Z: EulerSeries) -> BpsReport:
    """Run every check, collecting failures instead of stopping at the first."""
    from .errors import CheckFailure

    rep = BpsReport(Z)
    try:
        rep.L = d_euler_from_z(Z)
    except CheckFailure as exc:
        rep.failures.append((exc.check, str(exc)))
        return rep
    rep.symmetric = check_q_symmetry(rep.L)
    if not rep.symmetric:
        rep.failures.append((SymmetryFailure.check, "L(q) is not q <-> 1/q symmetric"))
    try:
        rep.n_from_z = ng_from_z(Z)
    except CheckFailure as exc:
        rep.failures.append((exc.check, str(exc)))
    if rep.symmetric:
        try:
            rep.n_prime = ng_prime_from_L(rep.L)
            rep.sum_check = ng_sum_check(rep.L, rep.n_prime)
            if not rep.sum_check:
                rep.failures.append(("bps-sum", "L(1) != n'_0"))
        except CheckFailure as exc:
            rep.failures.append((exc.check, str(exc)))
    if rep.n_from_z is not None and rep.n_prime is not None:
        rep.equal = compare_bps(rep.n_from_z, rep.n_prime)
        if not rep.equal:
            rep.failures.append(("bps-agreement", "n_g != n'_g"))
    return rep
