"""Ground-truth generators: numerical semigroups and their ideals, the node,
smooth curves, and the explicit operator quartet of the projective line.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import reduce
from itertools import combinations
from math import gcd
from typing import Sequence

from .bps import EulerSeries
from .exact import LaurentPoly, RationalMatrix, truncated_series_quotient
from .graded import BigradedSpace, OperatorQuartet, make_operator
from .macdonald import DGradedPoly, PoincareFamily, hilb_from_d

Q = LaurentPoly.var("q")

#: Largest colength enumerated without an explicit override.
DEFAULT_COLENGTH_CAP = 24


@dataclass(frozen=True)
class NumericalSemigroup:
    generators: tuple[int, ...]
    members: frozenset[int] = field(repr=False)
    bound: int = field(repr=False)
    gaps: tuple[int, ...] = ()

    @property
    def delta(self) -> int:
        return len(self.gaps)

    @property
    def frobenius(self) -> int:
        """Largest gap, ``-1`` for the full semigroup."""
        return self.gaps[-1] if self.gaps else -1

    @property
    def conductor(self) -> int:
        return self.frobenius + 1

    @property
    def multiplicity(self) -> int:
        return self.generators[0]

    def __contains__(self, x: int) -> bool:
        if x < 0:
            return False
        return x > self.frobenius or x in self.members

    def elements(self, upto: int) -> list[int]:
        """Members in ``[0, upto]``."""
        return [x for x in range(upto + 1) if x in self]

    def apery(self) -> dict[int, int]:
        """Smallest member in each residue class mod the multiplicity."""
        m = self.multiplicity
        out: dict[int, int] = {}
        x = 0
        while len(out) < m:
            if x in self and x % m not in out:
                out[x % m] = x
            x += 1
        return out

    @property
    def label(self) -> str:
        return "<" + ",".join(map(str, self.generators)) + ">"


def semigroup(generators: Sequence[int]) -> NumericalSemigroup:
    """The numerical semigroup spanned by ``generators`` (coprime, positive)."""
    gens = tuple(sorted(set(int(g) for g in generators)))
    if not gens or gens[0] <= 0:
        raise ValueError("generators must be positive integers")
    if reduce(gcd, gens) != 1:
        raise ValueError(f"gcd of generators {list(gens)} is not 1")
    m = gens[0]
    # Sieve until m consecutive members appear; after that everything is a member.
    member = [True]
    run = 1
    x = 0
    while run < m:
        x += 1
        ok = any(x >= g and member[x - g] for g in gens)
        member.append(ok)
        run = run + 1 if ok else 0
    gaps = tuple(i for i, ok in enumerate(member) if not ok)
    return NumericalSemigroup(gens, frozenset(i for i, ok in enumerate(member) if ok), x, gaps)


def search_bound(G: NumericalSemigroup, k: int) -> int:
    """Every ideal of colength ``k`` contains all members above this bound.

    A removed ``s`` forces removal of every member ``t`` with ``s - t`` in the
    semigroup; at most ``2 delta`` values of ``t`` in ``[0, s]`` fail that, so
    ``s + 1 - 2 delta <= k``.
    """
    return k + 2 * G.delta - 1


# ---------------------------------------------------------------------------
# enumerator 1: subsets of small members closed downward
# ---------------------------------------------------------------------------


def _count_subsets(G: NumericalSemigroup, k: int) -> int:
    if k == 0:
        return 1
    cand = G.elements(search_bound(G, k))
    below = {s: [t for t in cand if t <= s and (s - t) in G] for s in cand}
    cand = [s for s in cand if len(below[s]) <= k]
    count = 0
    for S in combinations(cand, k):
        removed = set(S)
        if all(t in removed for s in S for t in below[s]):
            count += 1
    return count


# ---------------------------------------------------------------------------
# enumerator 2: minimal element per residue class
# ---------------------------------------------------------------------------


def _counts_by_residue_minima(G: NumericalSemigroup, K: int) -> list[int]:
    """An ideal is fixed by its least element ``a_r`` in each class mod ``m``.

    Writing ``a_r = w_r + m j_r`` with ``w_r`` the least semigroup member of
    the class, the colength is ``sum j_r`` and the ideal condition reads
    ``a_r + g >= a_{(r + g) mod m}`` for every generator ``g``.
    """
    m = G.multiplicity
    w = G.apery()
    gens = [g for g in G.generators if g != m]
    counts = [0] * (K + 1)
    a = [0] * m

    def ok():
        return all(a[r] + g >= a[(r + g) % m] for r in range(m) for g in gens)

    def rec(r: int, used: int):
        if r == m:
            if ok():
                counts[used] += 1
            return
        for j in range(K - used + 1):
            a[r] = w[r] + m * j
            rec(r + 1, used + j)

    rec(0, 0)
    return counts


METHODS = ("subset", "generators")


def count_ideals(G: NumericalSemigroup, k: int, method: str = "subset") -> int:
    """Number of cofinite ideals ``D`` of ``G`` with ``#(G \\ D) == k``."""
    if k < 0:
        raise ValueError("colength must be non-negative")
    if method == "subset":
        return _count_subsets(G, k)
    if method == "generators":
        return _counts_by_residue_minima(G, k)[k]
    raise ValueError(f"unknown method {method!r}")


def ideal_counts(G: NumericalSemigroup, K: int, method: str = "subset", jobs: int = 1) -> list[int]:
    """``count_ideals(G, k)`` for ``k = 0..K``.

    With ``jobs > 1`` the subset enumerator runs colengths in separate
    processes; the result does not depend on ``jobs``.
    """
    if method == "generators":
        return _counts_by_residue_minima(G, K)
    if method != "subset":
        raise ValueError(f"unknown method {method!r}")
    if jobs > 1 and K > 0:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_count_subsets, [G] * (K + 1), range(K + 1)))
    return [_count_subsets(G, k) for k in range(K + 1)]


def node_ideal_counts(K: int) -> list[int]:
    """Monomial ideals of ``k[x, y] / (xy)`` by colength.

    Proper cofinite ones are ``(x^a, y^b)`` with ``a, b >= 1`` and colength
    ``a + b - 1``; the unit ideal has colength 0.
    """
    counts = [0] * (K + 1)
    counts[0] = 1
    for a in range(1, K + 1):
        for b in range(1, K + 2 - a):
            counts[a + b - 1] += 1
    return counts


# ---------------------------------------------------------------------------
# Euler series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LocalEulerSeries:
    coeffs: tuple[int, ...]
    delta: int
    branches: int = 1
    label: str = ""

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1


def local_euler_series(model, N: int, method: str = "subset", jobs: int = 1) -> LocalEulerSeries:
    """Punctual Euler series at a monomial unibranch point or at a node.

    ``model`` is a :class:`NumericalSemigroup`, a generator list, or ``"node"``.
    """
    if isinstance(model, str):
        if model != "node":
            raise ValueError(f"unknown singularity model {model!r}")
        return LocalEulerSeries(tuple(node_ideal_counts(N)), delta=1, branches=2, label="node")
    G = model if isinstance(model, NumericalSemigroup) else semigroup(model)
    return LocalEulerSeries(tuple(ideal_counts(G, N, method, jobs)), delta=G.delta, branches=1, label=G.label)


def global_euler(locals_: Sequence[LocalEulerSeries], chi_smooth_locus: int, N: int,
                 g_tilde: int | None = None) -> EulerSeries:
    """``(1 - q)^(-chi) * prod(locals)`` to order ``q^N``.

    The normalization genus is ``(2 - chi - #branches) / 2`` unless given.
    """
    if g_tilde is None:
        twice = 2 - chi_smooth_locus - sum(loc.branches for loc in locals_)
        if twice < 0 or twice % 2:
            raise ValueError(f"no normalization genus fits chi = {chi_smooth_locus}")
        g_tilde = twice // 2
    if chi_smooth_locus >= 0:
        Z = truncated_series_quotient(LaurentPoly.const(1), (1 - Q) ** chi_smooth_locus, "q", N)
    else:
        Z = (1 - Q) ** (-chi_smooth_locus)
    for loc in locals_:
        if loc.N < N:
            raise ValueError(f"local series {loc.label} only known to order {loc.N}")
        Z = (Z * LaurentPoly.from_coefficients("q", loc.coeffs)).truncate("q", N)
    coeffs = tuple(int(c) for c in Z.truncate("q", N).to_list("q", N + 1))
    g = sum(loc.delta for loc in locals_) + g_tilde
    return EulerSeries(coeffs, g, g_tilde)


def rational_curve_euler(model, N: int, method: str = "subset", jobs: int = 1) -> EulerSeries:
    """Rational curve with a single singular point of the given type."""
    loc = local_euler_series(model, N, method, jobs)
    return global_euler([loc], 2 - loc.branches, N, g_tilde=0)


def smooth_poincare(g: int, N: int) -> PoincareFamily:
    """Poincare polynomials of ``Sym^n`` of a smooth genus ``g`` curve."""
    if g < 0 or N < 0:
        raise ValueError("genus and truncation must be non-negative")
    d = DGradedPoly.from_poly(g, (1 + LaurentPoly.var("t") * LaurentPoly.var("z")) ** (2 * g))
    return hilb_from_d(d, N)


def p1_quartet(N: int) -> OperatorQuartet:
    """Operators on ``H_*(P^n)``, ``n <= N``, basis ``e(n,k) = [P^k]`` in degree ``2k``."""
    if N < 0:
        raise ValueError("truncation must be non-negative")
    dims = {(2 * k, n): 1 for n in range(N + 1) for k in range(n + 1)}
    labels = {(2 * k, n): (f"e({n},{k})",) for n in range(N + 1) for k in range(n + 1)}
    space = BigradedSpace(N, dims, labels, curve_like=True)

    def blocks(dk: int, dn: int, coeff):
        out = {}
        for n in range(N + 1):
            for k in range(n + 1):
                n2, k2 = n + dn, k + dk
                if 0 <= n2 <= N and 0 <= k2 <= n2:
                    c = coeff(n, k)
                    if c:
                        out[(2 * k, n)] = RationalMatrix([[c]])
        return out

    return OperatorQuartet(
        space,
        mu_plus_pt=make_operator(space, "mu_plus_pt", blocks(0, 1, lambda n, k: 1)),
        mu_minus_pt=make_operator(space, "mu_minus_pt", blocks(-1, -1, lambda n, k: 1)),
        mu_plus_C=make_operator(space, "mu_plus_C", blocks(1, 1, lambda n, k: k + 1)),
        mu_minus_C=make_operator(space, "mu_minus_C", blocks(0, -1, lambda n, k: n - k)),
        genus=0,
        provenance="p1",
    )
