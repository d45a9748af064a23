"""Truncated bigraded vector spaces and bidegree-shifting operators.

A slice ``(i, n)`` is the piece of homological degree ``i`` at level ``n``;
levels run over ``0..truncation``.  An operator of bidegree ``(di, dn)`` maps
slice ``(i, n)`` to ``(i + di, n + dn)``.

Truncation rule: a map whose target level exceeds the truncation is *not
defined* there (we have no data), whereas a map into a negative level is
defined and is the zero map into the zero space.  Compositions inherit this,
so every statement about operators is made only where it is defined.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import FormatError
from .exact import RationalMatrix, Vector, format_rational, parse_rational

Slice = tuple  # (i, n)

OPERATOR_NAMES = ("mu_plus_pt", "mu_minus_pt", "mu_plus_C", "mu_minus_C")

EXPECTED_BIDEGREES = {
    "homology": {
        "mu_plus_pt": (0, 1),
        "mu_minus_pt": (-2, -1),
        "mu_plus_C": (2, 1),
        "mu_minus_C": (0, -1),
    },
    # transposes of the homological operators with the signs swapped
    "cohomology": {
        "mu_plus_pt": (2, 1),
        "mu_minus_pt": (0, -1),
        "mu_plus_C": (0, 1),
        "mu_minus_C": (-2, -1),
    },
}


def slice_key(s: Slice) -> str:
    return f"({s[0]},{s[1]})"


def parse_slice_key(text: str) -> Slice:
    body = text.strip()
    if not (body.startswith("(") and body.endswith(")")):
        raise FormatError(f"bad slice key {text!r}")
    try:
        i, n = (int(x) for x in body[1:-1].split(","))
    except ValueError:
        raise FormatError(f"bad slice key {text!r}") from None
    return (i, n)


@dataclass(frozen=True, eq=False)
class BigradedSpace:
    """Dimension table ``dims[(i, n)]`` for levels ``0..truncation``.

    Only positive dimensions are stored.  ``labels`` optionally names the
    basis vectors of each slice.  ``curve_like`` marks data that should look
    like homology of Hilbert schemes of a curve (one-dimensional level 0,
    degrees at most ``2n``).
    """

    truncation: int
    dims: Mapping[Slice, int]
    labels: Mapping[Slice, tuple[str, ...]] | None = None
    curve_like: bool = False

    def __post_init__(self):
        clean = {}
        for (i, n), d in self.dims.items():
            d = int(d)
            if d < 0:
                raise ValueError(f"negative dimension at {slice_key((i, n))}")
            if d:
                clean[(int(i), int(n))] = d
        object.__setattr__(self, "dims", dict(sorted(clean.items(), key=lambda kv: (kv[0][1], kv[0][0]))))
        if self.labels is not None:
            object.__setattr__(self, "labels", {s: tuple(v) for s, v in self.labels.items()})

    def dim(self, s: Slice) -> int:
        return self.dims.get(tuple(s), 0)

    def slices(self, level: int | None = None) -> list[Slice]:
        """Slices of positive dimension, ordered by level then degree."""
        return [s for s in self.dims if level is None or s[1] == level]

    def level_dim(self, n: int) -> int:
        return sum(d for (i, m), d in self.dims.items() if m == n)

    def total_dim(self) -> int:
        return sum(self.dims.values())

    def in_range(self, level: int) -> bool:
        return 0 <= level <= self.truncation

    def poincare(self, n: int) -> list[int]:
        """Coefficient list of ``sum_i dim(i, n) t^i``."""
        degs = {i: d for (i, m), d in self.dims.items() if m == n}
        if not degs:
            return [] if n else [0]
        return [degs.get(i, 0) for i in range(max(degs) + 1)]

    def invariant_violations(self) -> list[str]:
        problems = []
        for (i, n) in self.dims:
            if not self.in_range(n):
                problems.append(f"slice {slice_key((i, n))} outside levels 0..{self.truncation}")
            if i < 0:
                problems.append(f"slice {slice_key((i, n))} has negative degree")
            if self.curve_like and i > 2 * n:
                problems.append(f"slice {slice_key((i, n))} violates degree bound i <= 2n")
        if self.curve_like and {s: d for s, d in self.dims.items() if s[1] == 0} != {(0, 0): 1}:
            problems.append("level 0 is not one-dimensional in degree 0")
        if self.labels is not None:
            for s, names in self.labels.items():
                if len(names) != self.dim(s):
                    problems.append(f"labels at {slice_key(s)}: {len(names)} for dimension {self.dim(s)}")
        return problems

    def same_dims(self, other: "BigradedSpace") -> bool:
        return self.dims == other.dims

    def __eq__(self, other):
        if not isinstance(other, BigradedSpace):
            return NotImplemented
        return (self.truncation, self.dims, self.labels, self.curve_like) == (
            other.truncation, other.dims, other.labels, other.curve_like)


@dataclass(frozen=True, eq=False)
class GradedOperator:
    """Linear map on a :class:`BigradedSpace` of fixed bidegree.

    ``blocks[src]`` is the matrix from slice ``src`` to ``src + bidegree``;
    absent blocks are zero maps.  ``domain``, when given, restricts the set of
    source slices on which the operator is defined (used for compositions);
    otherwise the operator is defined wherever its target level does not
    exceed the truncation.
    """

    space: BigradedSpace
    bidegree: tuple[int, int]
    blocks: Mapping[Slice, RationalMatrix] = field(default_factory=dict)
    domain: frozenset | None = None
    name: str = ""

    def target(self, s: Slice) -> Slice:
        return (s[0] + self.bidegree[0], s[1] + self.bidegree[1])

    def defined_at(self, s: Slice) -> bool:
        if self.domain is not None:
            return tuple(s) in self.domain
        return self.space.in_range(s[1]) and self.target(s)[1] <= self.space.truncation

    def block(self, s: Slice) -> RationalMatrix | None:
        """Matrix from ``s`` to its target, or ``None`` where undefined."""
        s = tuple(s)
        if not self.defined_at(s):
            return None
        b = self.blocks.get(s)
        if b is not None:
            return b
        t = self.target(s)
        rows = self.space.dim(t) if t[1] >= 0 else 0
        return RationalMatrix.zeros(rows, self.space.dim(s))

    def apply(self, s: Slice, v: Sequence[Fraction]) -> Vector | None:
        b = self.blocks.get(tuple(s))
        if b is None:
            m = self.block(s)
            if m is None:
                return None
            return (Fraction(0),) * m.rows
        return b.matvec(v)

    def is_zero(self) -> bool:
        return all(b.is_zero() for b in self.blocks.values())

    def scale(self, c) -> "GradedOperator":
        return replace(self, blocks={s: b.scale(c) for s, b in self.blocks.items()})

    def transpose(self) -> "GradedOperator":
        """Dual operator on the dual space, of opposite bidegree."""
        di, dn = self.bidegree
        return GradedOperator(
            self.space, (-di, -dn), {self.target(s): b.T for s, b in self.blocks.items()}, name=self.name
        )

    def equal_blocks(self, other: "GradedOperator") -> bool:
        keys = set(self.blocks) | set(other.blocks)
        for s in keys:
            a, b = self.block(s), other.block(s)
            if a is None or b is None or a != b:
                if not ((a is None or a.is_zero()) and (b is None or b.is_zero())):
                    return False
        return True


def _nonzero(blocks: Mapping[Slice, RationalMatrix]) -> dict:
    return {s: b for s, b in blocks.items() if not b.is_zero()}


def compose(f: GradedOperator, g: GradedOperator) -> GradedOperator:
    """``f`` after ``g``.

    Defined at a source slice when ``g`` is defined there and either ``g``
    lands below level 0 (the composite is then genuinely zero) or ``f`` is
    defined at ``g``'s target.
    """
    if f.space is not g.space and not f.space.same_dims(g.space):
        raise ValueError("operators act on different spaces")
    space = g.space
    bideg = (f.bidegree[0] + g.bidegree[0], f.bidegree[1] + g.bidegree[1])
    blocks, domain = {}, set()
    for s in _candidate_sources(space, g):
        if not g.defined_at(s):
            continue
        mid = g.target(s)
        if mid[1] < 0:
            domain.add(s)
            continue
        if not f.defined_at(mid):
            continue
        domain.add(s)
        gb = g.blocks.get(s)
        fb = f.blocks.get(mid)
        if gb is None or fb is None:
            continue
        blocks[s] = fb @ gb
    return GradedOperator(space, bideg, _nonzero(blocks), frozenset(domain), name=f"{f.name}*{g.name}")


def _candidate_sources(space: BigradedSpace, op: GradedOperator) -> list[Slice]:
    if op.domain is not None:
        return sorted(op.domain, key=lambda s: (s[1], s[0]))
    return space.slices()


def commutator(f: GradedOperator, g: GradedOperator) -> GradedOperator:
    """``f g - g f`` on the slices where both compositions are defined."""
    fg, gf = compose(f, g), compose(g, f)
    if fg.bidegree != gf.bidegree:
        raise ValueError(f"bidegrees differ: {fg.bidegree} vs {gf.bidegree}")
    domain = fg.domain & gf.domain
    blocks = {}
    for s in domain:
        a, b = fg.blocks.get(s), gf.blocks.get(s)
        if a is None and b is None:
            continue
        if a is None:
            blocks[s] = -b
        elif b is None:
            blocks[s] = a
        else:
            blocks[s] = a - b
    return GradedOperator(fg.space, fg.bidegree, _nonzero(blocks), frozenset(domain), name=f"[{f.name},{g.name}]")


@dataclass(frozen=True, eq=False)
class OperatorQuartet:
    """A space with its two creation and two annihilation operators.

    ``kind`` is ``"homology"`` or ``"cohomology"``; it fixes the expected
    bidegrees (see :data:`EXPECTED_BIDEGREES`).
    """

    space: BigradedSpace
    mu_plus_pt: GradedOperator
    mu_minus_pt: GradedOperator
    mu_plus_C: GradedOperator
    mu_minus_C: GradedOperator
    genus: int | None = None
    provenance: str = ""
    kind: str = "homology"

    @property
    def truncation(self) -> int:
        return self.space.truncation

    @property
    def operators(self) -> dict[str, GradedOperator]:
        return {name: getattr(self, name) for name in OPERATOR_NAMES}

    def with_operator(self, name: str, op: GradedOperator) -> "OperatorQuartet":
        return replace(self, **{name: op})

    def same_as(self, other: "OperatorQuartet") -> bool:
        """Blockwise equality of spaces, operators and metadata."""
        return (
            self.space == other.space
            and (self.genus, self.provenance, self.kind) == (other.genus, other.provenance, other.kind)
            and all(
                tuple(a.bidegree) == tuple(b.bidegree) and a.equal_blocks(b)
                for a, b in zip(self.operators.values(), other.operators.values())
            )
        )


def make_operator(space: BigradedSpace, name: str, blocks: Mapping[Slice, RationalMatrix], kind: str = "homology") -> GradedOperator:
    return GradedOperator(space, EXPECTED_BIDEGREES[kind][name], _nonzero(dict(blocks)), name=name)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


@dataclass
class Problem:
    kind: str
    message: str
    operator: str | None = None
    slice: Slice | None = None

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "message": self.message}
        if self.operator:
            out["operator"] = self.operator
        if self.slice is not None:
            out["slice"] = slice_key(self.slice)
        return out


@dataclass
class ValidationReport:
    problems: list[Problem]

    @property
    def ok(self) -> bool:
        return not self.problems

    def to_dict(self) -> dict:
        return {"check": "validate", "passed": self.ok, "problems": [p.to_dict() for p in self.problems]}


def validate(q: OperatorQuartet) -> ValidationReport:
    """Structural checks: bidegrees, block placement and shapes, space invariants."""
    problems = [Problem("space", msg) for msg in q.space.invariant_violations()]
    if q.kind not in EXPECTED_BIDEGREES:
        problems.append(Problem("kind", f"unknown kind {q.kind!r}"))
        return ValidationReport(problems)
    if q.genus is not None and q.genus < 0:
        problems.append(Problem("genus", "negative genus"))
    for name, op in q.operators.items():
        expected = EXPECTED_BIDEGREES[q.kind][name]
        if tuple(op.bidegree) != expected:
            problems.append(Problem("bidegree", f"wrong bidegree {tuple(op.bidegree)}, expected {expected}", name))
        if op.space is not q.space and not op.space.same_dims(q.space):
            problems.append(Problem("space", "operator acts on a different space", name))
        for s, b in sorted(op.blocks.items(), key=lambda kv: (kv[0][1], kv[0][0])):
            t = op.target(s)
            if not q.space.in_range(s[1]) or not q.space.in_range(t[1]):
                problems.append(Problem("range", f"block outside truncation range at {slice_key(s)}", name, s))
                continue
            want = (q.space.dim(t), q.space.dim(s))
            if b.shape != want:
                problems.append(Problem(
                    "shape", f"block shape mismatch at {slice_key(s)}: {b.shape[0]}x{b.shape[1]}, expected {want[0]}x{want[1]}", name, s))
    return ValidationReport(problems)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def quartet_to_dict(q: OperatorQuartet) -> dict:
    ops = {}
    for name, op in q.operators.items():
        ops[name] = {
            slice_key(s): b.tolist()
            for s, b in sorted(op.blocks.items(), key=lambda kv: (kv[0][1], kv[0][0]))
            if not b.is_zero()
        }
    out = {
        "truncation": q.space.truncation,
        "dims": [[i, n, d] for (i, n), d in q.space.dims.items()],
        "operators": ops,
        "genus": q.genus,
        "provenance": q.provenance,
        "kind": q.kind,
        "curve_like": q.space.curve_like,
    }
    if q.space.labels is not None:
        out["labels"] = {slice_key(s): list(v) for s, v in q.space.labels.items()}
    return out


def _int(x, what: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise FormatError(f"{what} must be an integer, got {x!r}")
    return x


def quartet_from_dict(data: Mapping) -> OperatorQuartet:
    try:
        N = _int(data["truncation"], "truncation")
        dims = {}
        for entry in data["dims"]:
            if len(entry) != 3:
                raise FormatError(f"dims entry must be [i, n, d], got {entry!r}")
            i, n, d = (_int(x, "dims entry") for x in entry)
            dims[(i, n)] = d
        labels = None
        if data.get("labels") is not None:
            labels = {parse_slice_key(k): tuple(str(x) for x in v) for k, v in data["labels"].items()}
        kind = data.get("kind", "homology")
        if kind not in EXPECTED_BIDEGREES:
            raise FormatError(f"unknown kind {kind!r}")
        space = BigradedSpace(N, dims, labels, bool(data.get("curve_like", False)))
        ops = {}
        raw_ops = data["operators"]
        unknown = set(raw_ops) - set(OPERATOR_NAMES)
        if unknown:
            raise FormatError(f"unknown operators {sorted(unknown)}")
        for name in OPERATOR_NAMES:
            blocks = {}
            for key, rows in raw_ops.get(name, {}).items():
                s = parse_slice_key(key)
                try:
                    blocks[s] = RationalMatrix(rows, cols=None if rows else space.dim(s))
                except ValueError as exc:
                    raise FormatError(f"{name} block {key}: {exc}") from None
            ops[name] = GradedOperator(space, EXPECTED_BIDEGREES[kind][name], blocks, name=name)
        genus = data.get("genus")
        if genus is not None:
            genus = _int(genus, "genus")
        return OperatorQuartet(space, **ops, genus=genus, provenance=str(data.get("provenance", "")), kind=kind)
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise FormatError(f"malformed quartet: {exc}") from None


def dump_json(obj, path: str | Path | None = None) -> str:
    """Deterministic JSON text (sorted keys); written to ``path`` if given."""
    text = json.dumps(obj, sort_keys=True, indent=1) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def load_json(path: str | Path):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from None


def load_quartet(path: str | Path) -> OperatorQuartet:
    return quartet_from_dict(load_json(path))


def dump_quartet(q: OperatorQuartet, path: str | Path | None = None) -> str:
    return dump_json(quartet_to_dict(q), path)


def vector_to_json(v: Iterable[Fraction]) -> list:
    return [format_rational(x) for x in v]


def vector_from_json(v: Iterable) -> Vector:
    return tuple(parse_rational(x) for x in v)
