"""Heisenberg relations and the free-module structure they force.

Given an :class:`~hilbheis.graded.OperatorQuartet`, this module checks the six
commutation relations, computes the lowest-weight space ``W`` (joint kernel
of the two annihilators), certifies that ``W`` freely generates the space
under the two creators, and writes any vector in those free coordinates by
the constructive nilpotency induction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, NamedTuple, Sequence

from .errors import CheckFailure, InsufficientTruncation, InvalidQuartet, RankDefect, RelationFailure
from .exact import RationalMatrix, Vector, solve_linear
from .graded import (
    EXPECTED_BIDEGREES,
    BigradedSpace,
    GradedOperator,
    OperatorQuartet,
    Slice,
    commutator,
    make_operator,
    slice_key,
    validate,
)
from .macdonald import DGradedPoly


class GradingWarning(UserWarning):
    """The D-grading read off a truncated quartet may be incomplete."""


class Relation(NamedTuple):
    name: str
    left: str
    right: str
    identity: bool  # commutator should be the identity (else zero)


RELATIONS = (
    Relation("[mu_minus_pt, mu_plus_C] = id", "mu_minus_pt", "mu_plus_C", True),
    Relation("[mu_minus_C, mu_plus_pt] = id", "mu_minus_C", "mu_plus_pt", True),
    Relation("[mu_plus_pt, mu_plus_C] = 0", "mu_plus_pt", "mu_plus_C", False),
    Relation("[mu_minus_pt, mu_minus_C] = 0", "mu_minus_pt", "mu_minus_C", False),
    Relation("[mu_minus_pt, mu_plus_pt] = 0", "mu_minus_pt", "mu_plus_pt", False),
    Relation("[mu_minus_C, mu_plus_C] = 0", "mu_minus_C", "mu_plus_C", False),
)

HOLDS, FAILS, OUT_OF_RANGE = "holds", "fails", "out-of-range"


def _by_level(slices):
    return sorted(slices, key=lambda s: (s[1], s[0]))


# ---------------------------------------------------------------------------
# relations
# ---------------------------------------------------------------------------


@dataclass
class SliceCheck:
    relation: str
    slice: Slice
    status: str
    block: RationalMatrix | None = None
    discrepancy: RationalMatrix | None = None

    def to_dict(self, with_blocks: bool = False) -> dict:
        out = {"relation": self.relation, "slice": slice_key(self.slice), "status": self.status}
        if self.discrepancy is not None:
            out["discrepancy"] = self.discrepancy.tolist()
        if with_blocks and self.block is not None:
            out["block"] = self.block.tolist()
        return out


@dataclass
class RelationReport:
    checks: list[SliceCheck]

    @property
    def passed(self) -> bool:
        return all(c.status != FAILS for c in self.checks)

    def failures(self) -> list[SliceCheck]:
        return [c for c in self.checks if c.status == FAILS]

    def for_relation(self, name: str) -> list[SliceCheck]:
        return [c for c in self.checks if c.relation == name]

    def summary(self) -> dict[str, dict[str, int]]:
        out = {r.name: {HOLDS: 0, FAILS: 0, OUT_OF_RANGE: 0} for r in RELATIONS}
        for c in self.checks:
            out[c.relation][c.status] += 1
        return out

    def to_dict(self) -> dict:
        return {
            "check": "heisenberg-relations",
            "passed": self.passed,
            "summary": self.summary(),
            "failures": [c.to_dict() for c in self.failures()],
            "slices": [c.to_dict() for c in self.checks if c.status != FAILS],
        }


def _require_valid(q: OperatorQuartet) -> None:
    report = validate(q)
    if not report.ok:
        raise InvalidQuartet(
            "quartet failed validation: " + "; ".join(p.message for p in report.problems),
            locations=[p.slice for p in report.problems if p.slice is not None],
        )


def check_relations(q: OperatorQuartet) -> RelationReport:
    """Check every relation on every slice where both orders are defined.

    Compositions dipping below level 0 are genuinely zero, so the identity
    relations are checked at level 0 as well; anything passing above the
    truncation is reported ``out-of-range``.
    """
    _require_valid(q)
    ops = q.operators
    checks = []
    for rel in RELATIONS:
        c = commutator(ops[rel.left], ops[rel.right])
        for s in q.space.slices():
            if s not in c.domain:
                checks.append(SliceCheck(rel.name, s, OUT_OF_RANGE))
                continue
            block = c.block(s)
            if rel.identity:
                expected = RationalMatrix.identity(q.space.dim(s))
            else:
                expected = RationalMatrix.zeros(*block.shape)
            if block == expected:
                checks.append(SliceCheck(rel.name, s, HOLDS, block))
            else:
                checks.append(SliceCheck(rel.name, s, FAILS, block, block - expected))
    return RelationReport(checks)


def _require_relations(q: OperatorQuartet) -> None:
    report = check_relations(q)
    if not report.passed:
        bad = report.failures()
        first = bad[0]
        raise RelationFailure(
            f"relation {first.relation} fails at {slice_key(first.slice)} ({len(bad)} failing slice checks)",
            locations=[c.slice for c in bad],
        )


# ---------------------------------------------------------------------------
# lowest weight space
# ---------------------------------------------------------------------------


def _joint_kernel(q: OperatorQuartet, s: Slice, names=("mu_minus_pt", "mu_minus_C")) -> list[Vector]:
    blocks = [q.operators[name].block(s) for name in names]
    return RationalMatrix.vstack(*blocks).nullspace()


@dataclass
class LowestWeightSpace:
    """Joint kernel of both annihilators, one basis list per slice."""

    parent: OperatorQuartet
    basis: dict[Slice, list[Vector]]

    @property
    def dims(self) -> dict[Slice, int]:
        return {s: len(v) for s, v in self.basis.items() if v}

    def as_space(self) -> BigradedSpace:
        return BigradedSpace(self.parent.truncation, self.dims)

    def total_dim(self) -> int:
        return sum(self.dims.values())

    def max_level(self) -> int | None:
        return max((s[1] for s in self.dims), default=None)

    def to_dict(self) -> dict:
        return {slice_key(s): d for s, d in _sorted_items(self.dims)}


def _sorted_items(d: Mapping):
    return sorted(d.items(), key=lambda kv: (kv[0][1], kv[0][0]))


def lowest_weight(q: OperatorQuartet, check: bool = True) -> LowestWeightSpace:
    """``ker mu_-[pt] & ker mu_-[C]`` slice by slice.

    With ``check`` (the default) the relations are verified first and a
    :class:`RelationFailure` is raised if any fails.
    """
    if check:
        _require_relations(q)
    else:
        _require_valid(q)
    basis = {}
    for s in q.space.slices():
        ker = _joint_kernel(q, s)
        if ker:
            basis[s] = ker
    return LowestWeightSpace(q, basis)


# ---------------------------------------------------------------------------
# free-module decomposition
# ---------------------------------------------------------------------------


class ImageVector(NamedTuple):
    a: int  # power of mu_+[pt]
    b: int  # power of mu_+[C]
    source: Slice  # slice of the generator in W
    index: int  # index of the generator in W.basis[source]
    target: Slice
    vector: Vector


class SliceRank(NamedTuple):
    dim: int
    images: int
    rank: int

    @property
    def ok(self) -> bool:
        return self.dim == self.images == self.rank


@dataclass
class DecompositionCertificate:
    """Images ``mu_+[pt]^a mu_+[C]^b w`` and the per-slice rank statements.

    ``kernel_ranks`` certifies the intermediate step: the images with
    ``b == 0`` form a basis of ``ker mu_-[pt]`` in every slice.
    """

    W: LowestWeightSpace
    images: list[ImageVector]
    slice_ranks: dict[Slice, SliceRank]
    kernel_ranks: dict[Slice, SliceRank] = field(default_factory=dict)

    def images_at(self, s: Slice) -> list[ImageVector]:
        return [im for im in self.images if im.target == tuple(s)]

    def basis_matrix(self, s: Slice) -> RationalMatrix:
        """Columns are the image vectors landing in ``s``."""
        ims = self.images_at(s)
        return RationalMatrix.from_columns([im.vector for im in ims], self.W.parent.space.dim(s))

    def to_dict(self) -> dict:
        return {
            "check": "free-module-basis",
            "W": self.W.to_dict(),
            "slices": {
                slice_key(s): {"dim": r.dim, "images": r.images, "rank": r.rank}
                for s, r in _sorted_items(self.slice_ranks)
            },
            "kernel_mu_minus_pt": {
                slice_key(s): {"dim": r.dim, "images": r.images, "rank": r.rank}
                for s, r in _sorted_items(self.kernel_ranks)
            },
            "images": [
                {"a": im.a, "b": im.b, "generator": [slice_key(im.source), im.index], "target": slice_key(im.target)}
                for im in self.images
            ],
        }


def _power_chain(op: GradedOperator, s: Slice, v: Vector, limit: int):
    """Yield ``(k, slice, op^k v)`` for ``k = 0, 1, ...`` while defined."""
    k = 0
    while True:
        yield k, s, v
        if k == limit or not op.defined_at(s):
            return
        v = op.apply(s, v)
        s = op.target(s)
        k += 1


def _rank_statement(space: BigradedSpace, s: Slice, vectors: list[Vector], dim: int) -> SliceRank:
    if not vectors:
        return SliceRank(dim, 0, 0)
    rank = RationalMatrix.from_columns(vectors, space.dim(s)).rank()
    return SliceRank(dim, len(vectors), rank)


def decompose(q: OperatorQuartet, check: bool = True) -> DecompositionCertificate:
    """Certify that ``W (x) Q[mu_+[pt], mu_+[C]]`` maps isomorphically onto
    every slice up to the truncation.

    Raises :class:`RankDefect` naming the first slice where the images fail
    to form a basis.
    """
    W = lowest_weight(q, check=check)
    N = q.truncation
    plus_pt, plus_C = q.mu_plus_pt, q.mu_plus_C
    images: list[ImageVector] = []
    for s_w, vecs in W.basis.items():
        for r, w in enumerate(vecs):
            for b, s_b, v_b in _power_chain(plus_C, s_w, w, N):
                for a, s_ab, v_ab in _power_chain(plus_pt, s_b, v_b, N):
                    images.append(ImageVector(a, b, s_w, r, s_ab, v_ab))

    by_slice: dict[Slice, list[Vector]] = {}
    kernel_side: dict[Slice, list[Vector]] = {}
    for im in images:
        by_slice.setdefault(im.target, []).append(im.vector)
        if im.b == 0:
            kernel_side.setdefault(im.target, []).append(im.vector)

    space = q.space
    ranks = {}
    for s in _by_level(set(space.slices()) | set(by_slice)):
        ranks[s] = _rank_statement(space, s, by_slice.get(s, []), space.dim(s))
    kernel_ranks = {}
    minus_pt = q.mu_minus_pt
    for s in space.slices():
        nullity = len(minus_pt.block(s).nullspace())
        vecs = kernel_side.get(s, [])
        # every b == 0 image must lie in ker mu_-[pt]
        stray = [v for v in vecs if any(minus_pt.apply(s, v))]
        st = _rank_statement(space, s, vecs, nullity)
        if stray:
            st = SliceRank(nullity, len(vecs), -1)
        kernel_ranks[s] = st

    cert = DecompositionCertificate(W, images, ranks, kernel_ranks)
    for s, r in list(ranks.items()) + list(kernel_ranks.items()):
        if not r.ok:
            raise RankDefect(
                f"rank defect at {slice_key(s)}: dim {r.dim}, {r.images} images, rank {r.rank}",
                locations=[s],
            )
    return cert


def predicted_dims(W_dims: Mapping[Slice, int], N: int, kind: str = "homology") -> dict[Slice, int]:
    """Slice dimensions of the free module on ``W_dims`` truncated at level ``N``."""
    (pi, pn), (ci, cn) = EXPECTED_BIDEGREES[kind]["mu_plus_pt"], EXPECTED_BIDEGREES[kind]["mu_plus_C"]
    out: dict[Slice, int] = {}
    for (i, m), d in W_dims.items():
        for b in range(N + 1):
            for a in range(N + 1):
                t = (i + a * pi + b * ci, m + a * pn + b * cn)
                if t[1] > N:
                    break
                out[t] = out.get(t, 0) + d
    return {s: d for s, d in _sorted_items(out) if d}


# ---------------------------------------------------------------------------
# constructive coordinates
# ---------------------------------------------------------------------------


def _sub(u: Vector, v: Vector) -> Vector:
    return tuple(x - y for x, y in zip(u, v))


def _add(u: Vector, v: Vector) -> Vector:
    return tuple(x + y for x, y in zip(u, v))


def _shift(s: Slice, deg, k: int) -> Slice:
    return (s[0] + k * deg[0], s[1] + k * deg[1])


def split_nilpotent(v: Vector, s: Slice, lower: GradedOperator, raise_: GradedOperator) -> list[Vector]:
    """Write ``v = sum_j raise_^j v_j`` with every ``v_j`` killed by ``lower``.

    Requires ``[lower, raise_] = id`` on the slices involved.  Induction on
    nilpotency: split ``lower(v)`` first, then subtract
    ``sum_j raise_^(j+1) u_j / (j+1)``; the rest lies in ``ker lower``.
    Piece ``j`` lives in slice ``s - j * bidegree(raise_)``.
    """
    t = lower.target(s)
    if t[1] < 0:
        return [tuple(v)]
    u = lower.apply(s, v)
    if u is None:
        raise ValueError(f"{lower.name} undefined at {slice_key(s)}")
    if not any(u):
        return [tuple(v)]
    parts = split_nilpotent(u, t, lower, raise_)
    pieces = []
    correction = (Fraction(0),) * len(v)
    for j, part in enumerate(parts):
        piece = tuple(x / (j + 1) for x in part)
        pieces.append(piece)
        w, sw = piece, _shift(t, raise_.bidegree, -j)
        for _ in range(j + 1):
            w = raise_.apply(sw, w)
            if w is None:
                raise ValueError(f"{raise_.name} undefined at {slice_key(sw)}")
            sw = raise_.target(sw)
        if sw != tuple(s):
            raise ValueError("operators are not a creation/annihilation pair")
        correction = _add(correction, w)
    head = _sub(v, correction)
    if any(lower.apply(s, head)):
        raise RelationFailure(
            f"[{lower.name}, {raise_.name}] = id fails below {slice_key(s)}: remainder not in kernel",
            locations=[s],
        )
    return [head] + pieces


class Coordinate(NamedTuple):
    a: int
    b: int
    slice: Slice  # slice of the W component
    coeffs: Vector  # coefficients in the basis W.basis[slice]


def coordinates(q: OperatorQuartet, s: Slice, v: Sequence, W: LowestWeightSpace | None = None) -> list[Coordinate]:
    """Free coordinates of ``v`` (a vector in slice ``s``).

    Returns the nonzero terms of ``v = sum mu_+[pt]^a mu_+[C]^b w_{a,b}``.
    First ``v`` is split along ``(mu_-[pt], mu_+[C])`` into pieces of
    ``ker mu_-[pt]``; each piece is then split along ``(mu_-[C], mu_+[pt])``
    inside that kernel, landing in ``W``.
    """
    s = tuple(s)
    v = tuple(Fraction(x) for x in v)
    if len(v) != q.space.dim(s):
        raise ValueError(f"vector of length {len(v)} in slice {slice_key(s)} of dimension {q.space.dim(s)}")
    if W is None:
        W = lowest_weight(q)
    out = []
    k_parts = split_nilpotent(v, s, q.mu_minus_pt, q.mu_plus_C)
    for b, k_b in enumerate(k_parts):
        s_b = _shift(s, q.mu_plus_C.bidegree, -b)
        for a, w in enumerate(split_nilpotent(k_b, s_b, q.mu_minus_C, q.mu_plus_pt)):
            if not any(w):
                continue
            s_ab = _shift(s_b, q.mu_plus_pt.bidegree, -a)
            basis = W.basis.get(s_ab, [])
            sol = solve_linear(RationalMatrix.from_columns(basis, len(w)), w) if basis else None
            if sol is None or not sol.consistent:
                raise RelationFailure(f"component at {slice_key(s_ab)} is not lowest weight", locations=[s_ab])
            out.append(Coordinate(a, b, s_ab, sol.solution))
    return sorted(out)


def reconstruct(q: OperatorQuartet, s: Slice, coords: Sequence[Coordinate], W: LowestWeightSpace) -> Vector:
    """``sum mu_+[pt]^a mu_+[C]^b w`` for the given coordinates."""
    total = (Fraction(0),) * q.space.dim(s)
    for c in coords:
        basis = W.basis[c.slice]
        w = tuple(sum((x * vec[k] for x, vec in zip(c.coeffs, basis)), Fraction(0)) for k in range(len(basis[0])))
        sw = c.slice
        for _ in range(c.b):
            w, sw = q.mu_plus_C.apply(sw, w), q.mu_plus_C.target(sw)
        for _ in range(c.a):
            w, sw = q.mu_plus_pt.apply(sw, w), q.mu_plus_pt.target(sw)
        if sw != tuple(s):
            raise ValueError(f"coordinate {c} does not land in {slice_key(s)}")
        total = _add(total, w)
    return total


# ---------------------------------------------------------------------------
# duality
# ---------------------------------------------------------------------------


def quotient_dims(q: OperatorQuartet) -> dict[Slice, int]:
    """``dim V / (im mu_+[pt] + im mu_+[C])`` per slice."""
    out = {}
    for s in q.space.slices():
        cols = []
        for op in (q.mu_plus_pt, q.mu_plus_C):
            src = _shift(s, op.bidegree, -1)
            if src[1] >= 0:
                cols.append(op.block(src))
        rank = RationalMatrix.hstack(*cols).rank() if cols else 0
        d = q.space.dim(s) - rank
        if d:
            out[s] = d
    return out


def dualize(q: OperatorQuartet) -> OperatorQuartet:
    """Transpose every block and swap creators with annihilators.

    Also confirms that the quotient of the dual by the images of its two
    creators has, slice by slice, the dimension of the lowest-weight space of
    ``q``.
    """
    _require_valid(q)
    kind = "cohomology" if q.kind == "homology" else "homology"

    def dual(name: str, source: GradedOperator) -> GradedOperator:
        op = source.transpose()
        return GradedOperator(q.space, op.bidegree, dict(op.blocks), name=name)

    prov = q.provenance
    if prov.startswith("dual of "):
        prov = prov[len("dual of "):]
    elif prov == "dual":
        prov = ""
    else:
        prov = f"dual of {prov}" if prov else "dual"
    qc = OperatorQuartet(
        q.space,
        mu_plus_pt=dual("mu_plus_pt", q.mu_minus_pt),
        mu_minus_pt=dual("mu_minus_pt", q.mu_plus_pt),
        mu_plus_C=dual("mu_plus_C", q.mu_minus_C),
        mu_minus_C=dual("mu_minus_C", q.mu_plus_C),
        genus=q.genus,
        provenance=prov,
        kind=kind,
    )
    kernel = {s: len(_joint_kernel(q, s)) for s in q.space.slices()}
    kernel = {s: d for s, d in kernel.items() if d}
    quotient = quotient_dims(qc)
    if kernel != quotient:
        bad = sorted(set(kernel) ^ set(quotient) | {s for s in kernel if kernel[s] != quotient.get(s)})
        raise CheckFailure("dual quotient dimensions differ from lowest weight dimensions",
                           locations=bad, check="dual-quotient")
    return qc


# ---------------------------------------------------------------------------
# D-grading and stabilization
# ---------------------------------------------------------------------------


def d_grading(q: OperatorQuartet, check: bool = True) -> DGradedPoly:
    """Bigraded Poincare polynomial of ``W``: ``sum dim W(i, n) t^i z^n``.

    Uses ``q.genus`` when present, otherwise infers ``g`` from the highest
    level carrying ``W`` (that level should be ``2g``).  Emits
    :class:`GradingWarning` when the data may be incomplete.
    """
    W = lowest_weight(q, check=check)
    top = W.max_level()
    inferred = math.ceil(top / 2) if top is not None else 0
    g = q.genus if q.genus is not None else inferred
    N = q.truncation
    if q.genus is not None:
        if top is not None and top > 2 * g:
            warnings.warn(f"W has support at level {top} beyond 2g = {2 * g}", GradingWarning, stacklevel=2)
        if inferred != g:
            warnings.warn(f"genus metadata {g} differs from inferred genus {inferred}", GradingWarning, stacklevel=2)
    if N < 2 * g:
        warnings.warn(f"truncation {N} < 2g = {2 * g}: grading possibly incomplete", GradingWarning, stacklevel=2)
    return DGradedPoly(g, W.dims)


@dataclass
class StabilizationReport:
    genus: int
    kernel_dims: dict[int, int]  # level -> dim ker mu_-[pt]
    w_total: int
    stable: bool

    @property
    def passed(self) -> bool:
        return self.stable

    def to_dict(self) -> dict:
        return {
            "check": "kernel-stabilization",
            "passed": self.passed,
            "genus": self.genus,
            "kernel_dims": {str(n): d for n, d in self.kernel_dims.items()},
            "w_total": self.w_total,
        }


def stabilization_check(q: OperatorQuartet, g: int | None = None, check: bool = True) -> StabilizationReport:
    """``dim ker mu_-[pt]`` on level ``n`` is the same for ``2g <= n <= N`` and
    equals ``dim W``."""
    if g is None:
        g = q.genus
    if g is None:
        raise ValueError("genus required")
    N = q.truncation
    if N < 2 * g + 1:
        raise InsufficientTruncation(f"insufficient truncation: N = {N} < 2g + 1 = {2 * g + 1}")
    W = lowest_weight(q, check=check)
    kd = {n: 0 for n in range(N + 1)}
    for s in q.space.slices():
        kd[s[1]] += len(q.mu_minus_pt.block(s).nullspace())
    tail = {kd[n] for n in range(2 * g, N + 1)}
    stable = tail == {W.total_dim()}
    return StabilizationReport(g, kd, W.total_dim(), stable)


# ---------------------------------------------------------------------------
# free quartets
# ---------------------------------------------------------------------------


def free_quartet(W: BigradedSpace | Mapping[Slice, int], N: int, genus: int | None = None,
                 provenance: str = "free") -> OperatorQuartet:
    """``W (x) Q[x, y]`` truncated at level ``N``.

    ``x`` has bidegree (0, 1) and ``y`` bidegree (2, 1); the creators act by
    multiplication with ``x`` and ``y``, the annihilators by ``d/dy``
    (paired with ``y``) and ``d/dx`` (paired with ``x``).
    """
    w_dims = W.dims if isinstance(W, BigradedSpace) else {s: d for s, d in W.items() if d}
    elements: dict[Slice, list[tuple]] = {}
    for (j, m), d in _sorted_items(w_dims):
        if m > N:
            continue
        for b in range(N - m + 1):
            for a in range(N - m - b + 1):
                s = (j + 2 * b, m + a + b)
                for r in range(d):
                    elements.setdefault(s, []).append((j, m, r, a, b))
    index = {s: {e: k for k, e in enumerate(els)} for s, els in elements.items()}
    labels = {
        s: tuple(f"w({j},{m})[{r}]*x^{a}*y^{b}" for (j, m, r, a, b) in els) for s, els in elements.items()
    }
    space = BigradedSpace(N, {s: len(els) for s, els in elements.items()}, labels)

    def build(name: str, step) -> GradedOperator:
        bideg = EXPECTED_BIDEGREES["homology"][name]
        blocks = {}
        for s, els in elements.items():
            t = (s[0] + bideg[0], s[1] + bideg[1])
            if not 0 <= t[1] <= N or t not in index:
                continue
            rows = [[0] * len(els) for _ in range(len(index[t]))]
            for col, e in enumerate(els):
                image = step(e)
                if image is not None:
                    coeff, e2 = image
                    rows[index[t][e2]][col] = coeff
            blocks[s] = RationalMatrix(rows, cols=len(els))
        return make_operator(space, name, blocks)

    def times_x(e):
        j, m, r, a, b = e
        return 1, (j, m, r, a + 1, b)

    def times_y(e):
        j, m, r, a, b = e
        return 1, (j, m, r, a, b + 1)

    def d_dy(e):
        j, m, r, a, b = e
        return (b, (j, m, r, a, b - 1)) if b else None

    def d_dx(e):
        j, m, r, a, b = e
        return (a, (j, m, r, a - 1, b)) if a else None

    return OperatorQuartet(
        space,
        mu_plus_pt=build("mu_plus_pt", times_x),
        mu_minus_pt=build("mu_minus_pt", d_dy),
        mu_plus_C=build("mu_plus_C", times_y),
        mu_minus_C=build("mu_minus_C", d_dx),
        genus=genus,
        provenance=provenance,
    )
