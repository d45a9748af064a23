from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hilbheis.bps import DEulerPoly
from hilbheis.curves import global_euler, smooth_poincare
from hilbheis.errors import FormatError, InsufficientTruncation, NotMacdonaldFamily
from hilbheis.exact import LaurentPoly, truncated_series_quotient
from hilbheis.macdonald import (
    DGradedPoly,
    PoincareFamily,
    check_duality,
    d_from_hilb,
    euler_specialize,
    hilb_from_d,
    sym_kernel,
)

t, z = LaurentPoly.var("t"), LaurentPoly.var("z")


def smooth_d(g):
    return DGradedPoly.from_poly(g, (1 + t * z) ** (2 * g))


def sym_power_betti(g, n):
    """Betti numbers of Sym^n of a genus-g curve, by counting a basis.

    H^*(C) has one even class in degrees 0 and 2 and 2g odd classes in degree
    1.  A basis of Sym^n H^* is: a power of the degree-0 class, a power of the
    degree-2 class, and a set (not multiset) of distinct odd classes, with the
    total count equal to n.
    """
    betti = [0] * (2 * n + 1)
    for k in range(min(n, 2 * g) + 1):
        odd_sets = len(list(combinations(range(2 * g), k)))
        for two in range(n - k + 1):
            betti[k + 2 * two] += odd_sets
    while betti and betti[-1] == 0:
        betti.pop()
    return tuple(betti)


def test_hilb_from_d_examples():
    assert hilb_from_d(DGradedPoly(0, {(0, 0): 1}), 3).polys == ((1,), (1, 0, 1), (1, 0, 1, 0, 1), (1, 0, 1, 0, 1, 0, 1))
    assert hilb_from_d(smooth_d(1), 2).polys == ((1,), (1, 2, 1), (1, 2, 2, 2, 1))
    assert hilb_from_d(smooth_d(2), 1).polys == ((1,), (1, 4, 1))


@pytest.mark.parametrize("g", range(5))
def test_smooth_family_matches_symmetric_power_count(g):
    N = 2 * g + 3
    fam = smooth_poincare(g, N)
    for n in range(N + 1):
        assert fam.polys[n] == sym_power_betti(g, n)


def test_d_from_hilb_examples():
    assert d_from_hilb(smooth_poincare(0, 4), 0).coeffs == {(0, 0): 1}
    assert d_from_hilb(smooth_poincare(1, 4), 1).coeffs == {(0, 0): 1, (1, 1): 2, (2, 2): 1}


def _perturb(fam, n, i, by):
    polys = [list(p) + [0] * (i + 1 - len(p)) for p in fam.polys]
    polys[n][i] += by
    return PoincareFamily(tuple(map(tuple, polys)))


def test_perturbed_family_is_rejected_with_location():
    # projective-space family with P_1 += t
    with pytest.raises(NotMacdonaldFamily, match=r"offending \(i,n\) = \(1,1\)") as exc:
        d_from_hilb(_perturb(smooth_poincare(0, 4), 1, 1, 1), 0)
    assert exc.value.locations[0] == (1, 1)
    # in genus 1 the extra t is absorbed at level 1 and shows up as a negative entry at level 2
    with pytest.raises(NotMacdonaldFamily) as exc:
        d_from_hilb(_perturb(smooth_poincare(1, 4), 1, 1, 1), 1)
    assert exc.value.locations[0] == (1, 2)


def test_negative_coefficient_rejected():
    with pytest.raises(NotMacdonaldFamily) as exc:
        d_from_hilb(_perturb(smooth_poincare(1, 4), 2, 1, -1), 1)
    assert (1, 2) in exc.value.locations


def test_family_with_support_beyond_2g_rejected():
    # the genus-1 family read as genus 0 leaves D in levels 1 and 2
    with pytest.raises(NotMacdonaldFamily):
        d_from_hilb(smooth_poincare(1, 4), 0)


def test_inverse_needs_2g_levels():
    with pytest.raises(InsufficientTruncation):
        d_from_hilb(smooth_poincare(2, 3), 2)


def test_duality_examples():
    for g in range(4):
        assert check_duality(smooth_d(g))
    assert check_duality(DGradedPoly(0, {(0, 0): 1}))
    assert not check_duality(DGradedPoly(1, {(0, 0): 1, (1, 1): 1}))


def test_euler_specialize_examples():
    assert euler_specialize(smooth_d(1)) == DEulerPoly(1, (1, -2, 1))
    assert euler_specialize(smooth_poincare(0, 5)).coeffs == (1, 2, 3, 4, 5, 6)


@pytest.mark.parametrize("g", range(4))
def test_specialization_commutes_with_transform(g):
    N = 2 * g + 3
    chi = euler_specialize(smooth_poincare(g, N))
    assert chi.coeffs == global_euler([], 2 - 2 * g, N).coeffs
    # t = -1 of the kernel is 1 / (1 - z)^2
    L = euler_specialize(smooth_d(g)).poly
    series = truncated_series_quotient(L, (1 - LaurentPoly.var("q")) ** 2, "q", N)
    assert tuple(int(c) for c in series.to_list("q", N + 1)) == chi.coeffs


def test_kernel_coefficients():
    k = sym_kernel(3).coefficients("z")
    assert k[2] == 1 + t ** 2 + t ** 4


random_d = st.integers(0, 3).flatmap(
    lambda g: st.dictionaries(
        st.tuples(st.integers(0, 2 * g + 2), st.integers(0, 2 * g)), st.integers(1, 5), max_size=8
    ).map(lambda c: DGradedPoly(g, c))
)


@settings(max_examples=100, deadline=None)
@given(random_d)
def test_round_trip(d):
    fam = hilb_from_d(d, 2 * d.genus + 2)
    assert d_from_hilb(fam, d.genus) == d


@settings(max_examples=30, deadline=None)
@given(random_d, st.integers(0, 4))
def test_round_trip_with_more_levels(d, extra):
    assert d_from_hilb(hilb_from_d(d, 2 * d.genus + extra), d.genus) == d


def test_json_round_trips():
    d = smooth_d(2)
    assert DGradedPoly.from_json(d.to_json()) == d
    fam = smooth_poincare(2, 5)
    assert PoincareFamily.from_json(fam.to_json()) == fam
    with pytest.raises(FormatError):
        PoincareFamily.from_json({"N": 3, "polys": [[1], [1, 0, 1]]})
    with pytest.raises(FormatError):
        DGradedPoly.from_json({"genus": 1, "coeffs": [[0, 0]]})


def test_family_violations():
    assert smooth_poincare(2, 4).violations() == []
    assert PoincareFamily(((1,), (1, 0, 0, 1))).violations() == ["degree of P_1 exceeds 2"]
