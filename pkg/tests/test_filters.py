from itertools import combinations

import pytest

from powlab.filters import (
    FilterError, extend_to_ultrafilter, principal_ultrafilter, subsets, tails, ultrafilters_over, validate_filter,
)


def test_principal_supersets():
    ground = ["a", "b", "c"]
    U = validate_filter(ground, [s for s in subsets(ground) if "a" in s])
    assert U.is_ultrafilter and U.principal == "a"
    assert U == principal_ultrafilter(ground, "a")


def test_axiom_failures_are_named():
    with pytest.raises(FilterError) as e:
        validate_filter([0, 1, 2], [{0}, {0, 1, 2}])
    assert e.value.axiom == "superset"
    with pytest.raises(FilterError) as e:
        validate_filter([0, 1], [set(), {0}, {1}, {0, 1}])
    assert e.value.axiom == "empty-excluded"
    with pytest.raises(FilterError) as e:
        validate_filter([0, 1, 2], [{0, 1}, {1, 2}, {0, 1, 2}])
    assert e.value.axiom == "intersection"
    with pytest.raises(FilterError):
        validate_filter([0, 1], [{0}])


def test_non_ultra_filter_flags():
    F = validate_filter([0, 1, 2], [{0, 1}, {0, 1, 2}])
    assert not F.is_ultrafilter and F.principal is None


def test_tails_of_chain():
    ground = [0, 1, 2]
    F = tails(ground, lambda a, b: a <= b)
    assert F.is_tails and frozenset({2}) in F.members
    extensions = [U for U in ultrafilters_over(ground) if F.members <= U.members]
    assert [U.principal for U in extensions] == [2]


def test_every_finite_ultrafilter_is_principal():
    ground = list(range(4))
    found = []
    for k in range(1, 17):
        for fam in combinations(subsets(ground), k):
            try:
                U = validate_filter(ground, fam)
            except FilterError:
                continue
            if U.is_ultrafilter:
                found.append(U.principal)
    assert sorted(found) == ground


def test_extend_to_ultrafilter():
    U = extend_to_ultrafilter([0, 1, 2, 3], [{1, 2, 3}, {2, 3}])
    assert U.is_ultrafilter and U.principal == 2
