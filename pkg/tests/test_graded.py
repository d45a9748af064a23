import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hilbheis.curves import p1_quartet
from hilbheis.errors import FormatError
from hilbheis.exact import RationalMatrix
from hilbheis.graded import (
    BigradedSpace,
    GradedOperator,
    commutator,
    compose,
    dump_quartet,
    load_quartet,
    parse_slice_key,
    quartet_from_dict,
    quartet_to_dict,
    slice_key,
    validate,
)
from hilbheis.heisenberg import free_quartet


def test_slice_keys_round_trip():
    assert slice_key((2, 3)) == "(2,3)"
    assert parse_slice_key("(2,3)") == (2, 3)
    assert parse_slice_key(" ( -1 , 4 ) ") == (-1, 4)
    with pytest.raises(FormatError):
        parse_slice_key("2,3")


def test_space_drops_zero_dims_and_orders_slices():
    V = BigradedSpace(2, {(2, 1): 1, (0, 0): 1, (0, 1): 0, (0, 2): 3})
    assert V.slices() == [(0, 0), (2, 1), (0, 2)]
    assert V.level_dim(2) == 3 and V.total_dim() == 5


def test_curve_like_invariants():
    bad = BigradedSpace(1, {(0, 0): 2, (3, 1): 1}, curve_like=True)
    msgs = bad.invariant_violations()
    assert any("i <= 2n" in m for m in msgs)
    assert any("level 0" in m for m in msgs)
    assert p1_quartet(3).space.invariant_violations() == []


def test_compose_with_zero_is_zero():
    q = p1_quartet(3)
    zero = GradedOperator(q.space, (0, 1), {})
    assert compose(zero, q.mu_plus_C).is_zero()
    assert compose(q.mu_plus_C, zero).is_zero()


def test_compose_plus_operators_on_p1():
    q = p1_quartet(3)
    both = compose(q.mu_plus_C, q.mu_plus_pt)  # x first, then y
    assert both.bidegree == (2, 2)
    # e(0,0) -> e(1,0) -> 1 * e(2,1)
    assert both.block((0, 0)) == RationalMatrix([[1]])
    # e(1,1) -> e(2,1) -> 2 * e(3,2)
    assert both.block((2, 1)) == RationalMatrix([[2]])


def test_compose_respects_truncation():
    N = 3
    q = p1_quartet(N)
    two_up = compose(q.mu_plus_pt, q.mu_plus_pt)
    for s in q.space.slices(N - 1):
        assert not two_up.defined_at(s)
        assert two_up.block(s) is None
        assert s not in two_up.blocks
    assert two_up.defined_at((0, N - 2))


def test_map_below_level_zero_is_zero_not_undefined():
    q = p1_quartet(2)
    down = q.mu_minus_C
    assert down.defined_at((0, 0))
    assert down.block((0, 0)).shape == (0, 1)


def test_commutator_examples():
    q = free_quartet({(0, 0): 1}, 4)
    assert commutator(q.mu_plus_pt, q.mu_plus_pt).is_zero()
    assert commutator(q.mu_plus_pt, q.mu_plus_C).is_zero()
    c = commutator(q.mu_minus_pt, q.mu_plus_C)  # [d/dy, y]
    for s in q.space.slices():
        if s in c.domain:
            assert c.block(s) == RationalMatrix.identity(q.space.dim(s))
    assert c.domain == frozenset(s for s in q.space.slices() if s[1] < 4)


def test_compose_shape_mismatch_raises():
    V = BigradedSpace(2, {(0, 0): 1, (0, 1): 2, (0, 2): 1})
    f = GradedOperator(V, (0, 1), {(0, 0): RationalMatrix([[1], [0]])})
    g = GradedOperator(V, (0, 1), {(0, 1): RationalMatrix([[1, 0, 0]])})
    with pytest.raises(ValueError):
        compose(g, f)


def test_validate_p1_passes():
    assert validate(p1_quartet(4)).ok


def test_validate_wrong_bidegree():
    q = p1_quartet(4)
    op = q.mu_plus_pt
    bad = q.with_operator("mu_plus_pt", GradedOperator(op.space, (1, 1), op.blocks, name=op.name))
    rep = validate(bad)
    assert not rep.ok
    assert any("wrong bidegree" in p.message for p in rep.problems)


def test_validate_shape_mismatch_reports_slice():
    q = free_quartet({(1, 1): 2}, 3)
    s = (1, 1)  # dim 2, mu_plus_pt target (1,2) has dim 2
    blocks = dict(q.mu_plus_pt.blocks)
    blocks[s] = RationalMatrix([[1, 0, 0], [0, 1, 0]])
    bad = q.with_operator("mu_plus_pt", GradedOperator(q.space, (0, 1), blocks, name="mu_plus_pt"))
    rep = validate(bad)
    assert [p.slice for p in rep.problems] == [s]
    assert "block shape mismatch at (1,1): 2x3" in rep.problems[0].message


def test_validate_out_of_range_block():
    q = p1_quartet(2)
    blocks = dict(q.mu_plus_pt.blocks)
    blocks[(0, 2)] = RationalMatrix([[1]])
    rep = validate(q.with_operator("mu_plus_pt", GradedOperator(q.space, (0, 1), blocks, name="mu_plus_pt")))
    assert any("outside truncation range" in p.message for p in rep.problems)


def test_json_round_trip(tmp_path):
    for q in (p1_quartet(4), free_quartet({(0, 0): 1, (1, 1): 2}, 3, genus=1)):
        path = tmp_path / "q.json"
        dump_quartet(q, path)
        back = load_quartet(path)
        assert back.same_as(q)
        assert dump_quartet(back) == path.read_text()


def test_json_rejects_malformed():
    d = quartet_to_dict(p1_quartet(2))
    for mutate in (
        lambda d: d.pop("operators"),
        lambda d: d.__setitem__("truncation", "2"),
        lambda d: d["operators"].__setitem__("mu_sideways", {}),
        lambda d: d["operators"]["mu_plus_pt"].__setitem__("(0,0)", [[1.5]]),
        lambda d: d["operators"]["mu_plus_pt"].__setitem__("(0,0)", [[1], [1, 2]]),
    ):
        dd = json.loads(json.dumps(d))
        mutate(dd)
        with pytest.raises(FormatError):
            quartet_from_dict(dd)


def test_rational_entries_serialize_as_strings():
    q = p1_quartet(1)
    d = quartet_to_dict(q.with_operator("mu_plus_pt", q.mu_plus_pt.scale(RationalMatrix([["1/2"]])[0, 0])))
    assert d["operators"]["mu_plus_pt"]["(0,0)"] == [["1/2"]]
    assert quartet_from_dict(d).mu_plus_pt.block((0, 0)) == RationalMatrix([["1/2"]])


@settings(max_examples=25, deadline=None)
@given(st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 2)), st.integers(1, 2), max_size=3),
       st.integers(0, 3))
def test_free_quartets_validate_and_round_trip(W, N):
    q = free_quartet(W, N)
    assert validate(q).ok
    assert quartet_from_dict(json.loads(dump_quartet(q))).same_as(q)
