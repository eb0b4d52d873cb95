import itertools

import pytest

from conftest import random_distribution
from entrocone.catalog import chsh_entropic, imm_entropic
from entrocone.causal import bell_structure
from entrocone.core import GE, LinearInequality, evaluate, normalize, parse_inequality
from entrocone.marginal import (MarginalScenario, bell_scenario, canonical_form, classify,
                                merge_cones, project_scenario, symmetry_group)
from entrocone.polyhedra import ConeH, extreme_rays, is_facet
from entrocone.shannon import entropy_vector

CHSH_NAMES = ("A0", "A1", "B0", "B1")


def labels(scenario, masks):
    return {tuple(scenario.ground[i] for i in range(len(scenario.ground)) if m >> i & 1)
            for m in masks}


def test_bell_scenario_22():
    sc = bell_scenario([2, 2])
    assert labels(sc, sc.maximal_contexts) == {("A0", "B0"), ("A0", "B1"), ("A1", "B0"), ("A1", "B1")}
    assert len(sc.coords) == 8


def test_bell_scenario_33_and_222():
    assert len(bell_scenario([3, 3]).maximal_contexts) == 9
    sc = bell_scenario([2, 2, 2])
    assert len(sc.maximal_contexts) == 8
    assert all(bin(m).count("1") == 3 for m in sc.maximal_contexts)


def test_scenario_json_round_trip():
    sc = bell_scenario([2, 3])
    assert MarginalScenario.from_json(sc.to_json()) == sc
    free = MarginalScenario(("X", "Y", "Z"), frozenset([0b011, 0b110]))
    assert MarginalScenario.from_json(free.to_json()) == free


def test_group_sizes():
    assert len(symmetry_group(bell_scenario([2, 2]))) == 8
    assert len(symmetry_group(bell_scenario([2, 3]))) == 12
    assert len(symmetry_group(bell_scenario([3, 3]))) == 72


def brute_orbit(q, scenario):
    """Distinct normalized images under every variable permutation that preserves contexts."""
    n = len(scenario.ground)
    ctx = set(scenario.coords)
    out = set()
    for perm in itertools.permutations(range(n)):
        img = lambda m: sum(1 << perm[i] for i in range(n) if m >> i & 1)
        if {img(m) for m in ctx} != ctx:
            continue
        terms = tuple((img(m), c) for m, c in q.terms)
        out.add(normalize(LinearInequality(q.names, terms, q.relation)))
    return out


def test_chsh_images_form_one_class():
    sc = bell_scenario([2, 2])
    q = chsh_entropic().inequality
    images = brute_orbit(q, sc)
    (cls,) = classify(list(images), sc)
    assert not cls.trivial and cls.orbit_size == len(images) == 4


def test_trivial_class_and_empty():
    sc = bell_scenario([2, 2])
    (cls,) = classify([parse_inequality("+1*H(A0) -1*H(A0,B0) <= 0", CHSH_NAMES)], sc)
    assert cls.trivial
    assert classify([], sc) == []


def test_classify_rejects_foreign_coordinates():
    with pytest.raises(ValueError):
        classify([parse_inequality("+1*H(A0,A1) >= 0", CHSH_NAMES)], bell_scenario([2, 2]))


def test_canonical_form_is_orbit_invariant():
    sc = bell_scenario([3, 3])
    group = symmetry_group(sc)
    q = imm_entropic(3).inequality
    rep, size = canonical_form(q, group, sc.coords)
    for perm in group[::7]:
        terms = tuple((sum(1 << perm[i] for i in range(6) if m >> i & 1), c) for m, c in q.terms)
        img = LinearInequality(q.names, terms, q.relation)
        assert canonical_form(img, group, sc.coords) == (rep, size)


def nontrivial(classes):
    return [c for c in classes if not c.trivial]


def test_chsh_scenario_single_nontrivial_class():
    sc = bell_scenario([2, 2])
    (cls,) = nontrivial(project_scenario(None, sc))
    assert cls.representative == classify([chsh_entropic().inequality], sc)[0].representative


@pytest.mark.parametrize("structure", [None, bell_structure([2, 2]), bell_structure([2, 2], True)],
                         ids=["shannon", "bell", "bounded"])
def test_pieces_and_direct_agree_on_22(structure):
    sc = bell_scenario([2, 2])
    direct = project_scenario(structure, sc, strategy="direct")
    pieces = project_scenario(structure, sc, strategy="pieces")
    assert direct == pieces


def test_pieces_needs_bipartite_bell():
    with pytest.raises(ValueError):
        project_scenario(None, bell_scenario([2, 2, 2]), strategy="pieces")
    with pytest.raises(ValueError):
        project_scenario(None, bell_scenario([2, 2]), strategy="sideways")


def test_projection_soundness_sampling(rng):
    sc = bell_scenario([2, 2])
    cone = project_scenario(None, sc, classify_output=False)
    ineqs = cone.to_inequalities()
    for _ in range(200):
        d = random_distribution(rng, [(v, rng.choice((2, 3))) for v in CHSH_NAMES])
        v = entropy_vector(d)
        assert all(evaluate(q, v)[1] for q in ineqs)


def test_nontrivial_representatives_are_facets():
    sc = bell_scenario([2, 2])
    cone = project_scenario(None, sc, classify_output=False)
    v = extreme_rays(cone)
    for cls in nontrivial(project_scenario(None, sc)):
        assert is_facet(v, cls.representative.remap(cone.names))[0]


def test_merge_cones_unions_rows():
    a = ConeH((1, 2), [(1, 0)], (), ("x", "y"))
    b = ConeH((2, 3), [(1, -1)], (), ("x", "y"))
    m = merge_cones([a, b])
    assert m.coords == (1, 2, 3) and set(m.inequalities) == {(1, 0, 0), (0, 1, -1)}


def test_direct_on_explicit_cone():
    sc = bell_scenario([2, 2])
    cone = bell_structure([2, 2]).cone()
    assert project_scenario(cone, sc) == project_scenario(bell_structure([2, 2]), sc)


def test_class_json():
    sc = bell_scenario([2, 2])
    obj = classify([chsh_entropic().inequality], sc)[0].to_json()
    assert obj["orbit"] == 4 and obj["trivial"] is False
    assert isinstance(obj["representative"], str)


def test_ge_orientation_of_representatives():
    for cls in project_scenario(None, bell_scenario([2, 2])):
        assert cls.representative.relation == GE
