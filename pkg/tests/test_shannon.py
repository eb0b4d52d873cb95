import itertools
from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings

from conftest import binary, rational_distributions, random_distribution
from entrocone.core import evaluate
from entrocone.polyhedra import implies
from entrocone.shannon import (JointDistribution, conditional_mutual_information,
                               elemental_inequalities, entropy_vector, monotonicity)

HALF = Fraction(1, 2)


def brute_force_elementals(n):
    """Enumerate the definition: full-set monotonicities and I(i:j|K) >= 0."""
    full = (1 << n) - 1
    out = set()
    for i in range(n):
        rest = full & ~(1 << i)
        out.add(((full, 1), (rest, -1)) if rest else ((full, 1),))
    for i, j in itertools.combinations(range(n), 2):
        rest = [b for b in range(n) if b not in (i, j)]
        for r in range(len(rest) + 1):
            for ks in itertools.combinations(rest, r):
                k = sum(1 << b for b in ks)
                terms = {}
                for m, c in ((k | 1 << i, 1), (k | 1 << j, 1), (k | 1 << i | 1 << j, -1), (k, -1)):
                    if m:
                        terms[m] = terms.get(m, 0) + c
                out.add(tuple(sorted(terms.items())))
    return out


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_elemental_set_matches_definition(n):
    ineqs = elemental_inequalities(n)
    got = {tuple((m, int(c)) for m, c in q.terms) for q in ineqs}
    assert got == {tuple(sorted(t)) for t in brute_force_elementals(n)}
    assert len(ineqs) == n + comb(n, 2) * 2 ** (n - 2) if n >= 2 else len(ineqs) == 1


def test_elementals_n2_explicit():
    rendered = {str(q) for q in elemental_inequalities(["1", "2"])}
    assert rendered == {"-1*H(1) +1*H(1,2) >= 0", "-1*H(2) +1*H(1,2) >= 0",
                        "+1*H(1) +1*H(2) -1*H(1,2) >= 0"}


def test_elementals_reject_zero():
    with pytest.raises(ValueError):
        elemental_inequalities(0)


def test_entropy_independent_bits():
    d = JointDistribution(binary("XY"), {o: Fraction(1, 4) for o in itertools.product((0, 1), repeat=2)})
    assert entropy_vector(d).values == (0, 1, 1, 2)


def test_entropy_correlated_bits():
    d = JointDistribution(binary("XY"), {(0, 0): HALF, (1, 1): HALF})
    assert entropy_vector(d).values == (0, 1, 1, 1)


def test_entropy_three_copies():
    d = JointDistribution(binary("XYZ"), {(0, 0, 0): HALF, (1, 1, 1): HALF})
    assert entropy_vector(d).values[1:] == (1,) * 7


def test_entropy_float_path_and_forced_kinds():
    d = JointDistribution(binary("XY"), {(0, 0): Fraction(1, 3), (1, 1): Fraction(2, 3)})
    v = entropy_vector(d)
    assert v.kind == "float" and abs(v.values[1] - 0.9182958340544896) < 1e-12
    with pytest.raises(ValueError):
        entropy_vector(d, exact=True)


def test_cmi_examples():
    ind = entropy_vector(JointDistribution(binary("XY"), {o: Fraction(1, 4) for o in
                                                          itertools.product((0, 1), repeat=2)}))
    assert conditional_mutual_information(ind, ["X"], ["Y"]) == 0
    cor = entropy_vector(JointDistribution(binary("XY"), {(0, 0): HALF, (1, 1): HALF}))
    assert conditional_mutual_information(cor, ["X"], ["Y"]) == 1
    three = entropy_vector(JointDistribution(binary("XYZ"), {(0, 0, 0): HALF, (1, 1, 1): HALF}))
    assert conditional_mutual_information(three, ["X"], ["Y"], ["Z"]) == 0
    with pytest.raises(ValueError):
        conditional_mutual_information(three, ["X"], ["X"])


def test_distribution_validation():
    with pytest.raises(ValueError):
        JointDistribution(binary("X"), {(0,): HALF})
    with pytest.raises(ValueError):
        JointDistribution([("X", 1)], {(0,): 1})
    with pytest.raises(ValueError):
        JointDistribution(binary("X"), {(2,): 1})


def test_distribution_json_round_trip(rng):
    d = random_distribution(rng, [("X", 2), ("Y", 3)], exact=True)
    assert JointDistribution.from_json(d.to_json()).probs == d.probs


@settings(max_examples=60, deadline=None)
@given(rational_distributions(("X", "Y", "Z", "W"), max_card=3))
def test_entropy_vectors_satisfy_elementals(d):
    v = entropy_vector(d, exact=False)
    for q in elemental_inequalities(d.names):
        assert evaluate(q, v)[1]


def test_generic_monotonicity_is_implied():
    names = ("X", "Y", "Z", "W")
    base = elemental_inequalities(names)
    for big in range(1, 16):
        for small in range(1, 16):
            if small & ~big or small == big:
                continue
            assert implies(base, monotonicity(names, big, small)) is not None


def test_product_distribution_is_additive(rng):
    d1 = random_distribution(rng, [("X", 2), ("Y", 3)])
    d2 = random_distribution(rng, [("Z", 2)])
    prod = {a + b: p * q for a, p in d1.probs.items() for b, q in d2.probs.items()}
    d = JointDistribution(d1.variables + d2.variables, prod)
    v, v1, v2 = entropy_vector(d), entropy_vector(d1), entropy_vector(d2)
    for m1 in range(4):
        for m2 in range(2):
            assert abs(v.values[m1 | m2 << 2] - v1.values[m1] - v2.values[m2]) < 1e-12
