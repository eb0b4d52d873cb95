"""End-to-end acceptance checks, one test per criterion.

Each test records a one-line PASS/FAIL summary (with wall time against its
limit) that is printed at the end of the pytest run.
"""

import itertools
import math
import random
import time
from contextlib import contextmanager
from fractions import Fraction
from math import comb

import pytest

from conftest import ACCEPTANCE, binary, random_distribution
from entrocone.catalog import (bimm_entropic, bounded_lambda_certificate, certificate_bimm,
                               certificate_imm, chsh_entropic, golden_rows, golden_tables,
                               imm_entropic, mn_multipartite, triangle_family)
from entrocone.causal import bell_structure, observable_names, triangle_structure
from entrocone.core import BUDGET, LE, LinearInequality, SetFunctionVector, evaluate, normalize
from entrocone.distributions import (box_entropy_vector, box_p1, box_p2, box_pc, box_pm,
                                     deterministic_box, ghz_system, mix, quantum_box)
from entrocone.lp import cone_membership
from entrocone.marginal import bell_scenario, classify, project_scenario
from entrocone.moebius import (map_D, map_D_transpose, mermin_q_inequality, moebius_forward,
                               moebius_inverse, q_vector, s_membership)
from entrocone.polyhedra import ConeH, VRep, extreme_rays, implies, in_conic_hull, is_facet
from entrocone.shannon import JointDistribution, elemental_inequalities, entropy_vector

HALF = Fraction(1, 2)


@contextmanager
def criterion(number, title, limit_s):
    """Time a criterion, enforce its limit and record a summary line."""
    notes = []
    start = time.perf_counter()
    status = "FAIL"
    try:
        yield notes
        elapsed = time.perf_counter() - start
        assert elapsed < limit_s, f"took {elapsed:.1f} s, limit {limit_s} s"
        status = "PASS"
    except AssertionError as exc:
        notes.append(f"assertion: {str(exc).splitlines()[0] if str(exc) else 'failed'}")
        raise
    finally:
        elapsed = time.perf_counter() - start
        line = f"criterion {number:>2}: {status}  {title}  [{elapsed:.1f} s, limit {limit_s} s]"
        if notes:
            line += "  -- " + "; ".join(notes)
        ACCEPTANCE[number] = line
        print(line)


def nontrivial(classes):
    return [c for c in classes if not c.trivial]


def canonical_in(q, settings):
    sc = bell_scenario(settings)
    return classify([q.remap(sc.ground)], sc)[0].representative


def brute_force_elemental_count(n):
    """Enumerate the definition directly: full-set monotonicities and I(i:j|K) >= 0."""
    rows = set()
    full = (1 << n) - 1
    for i in range(n):
        rows.add(("M", i))
    for i, j in itertools.combinations(range(n), 2):
        rest = [b for b in range(n) if b not in (i, j)]
        for r in range(len(rest) + 1):
            for ks in itertools.combinations(rest, r):
                rows.add(("SM", i, j, sum(1 << b for b in ks) & full))
    return len(rows)


# 1 ---------------------------------------------------------------------------

def test_criterion_01_elemental_counts():
    with criterion(1, "elemental inequality counts", 1) as notes:
        got = {n: len(elemental_inequalities(n)) for n in (2, 3, 4, 5)}
        oracle = {n: brute_force_elemental_count(n) for n in (2, 3, 4, 5)}
        formula = {n: n + comb(n, 2) * 2 ** (n - 2) for n in (2, 3, 4, 5)}
        assert got == oracle == formula
        assert [got[n] for n in (2, 3, 4)] == [3, 9, 28]
        notes.append(f"n=5 gives {got[5]}, matching n + C(n,2) 2^(n-2)")


# 2 ---------------------------------------------------------------------------

def test_criterion_02_chsh_scenario():
    with criterion(2, "CHSH scenario: one nontrivial class", 30) as notes:
        sc = bell_scenario([2, 2])
        classes = project_scenario(None, sc)
        (only,) = nontrivial(classes)
        assert only.representative == canonical_in(chsh_entropic().inequality, [2, 2])
        notes.append(f"{len(classes)} classes, orbit of CHSH {only.orbit_size}")


# 3 ---------------------------------------------------------------------------

def test_criterion_03_two_by_three():
    with criterion(3, "(2,3) scenario: CHSH class only", 300) as notes:
        classes = project_scenario(None, bell_scenario([2, 3]))
        (only,) = nontrivial(classes)
        assert only.representative == canonical_in(chsh_entropic().inequality, [2, 3])
        notes.append(f"{len(classes)} classes")


# 4 ---------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_04_three_by_three_pieces():
    with criterion(4, "(3,3) via pieces matches Table I rows 1-6", 7200) as notes:
        sc = bell_scenario([3, 3])
        classes = project_scenario(None, sc, strategy="pieces")
        got = {c.representative: c.trivial for c in classes}
        want = {canonical_in(q, [3, 3]): i < 2 for i, q in enumerate(golden_rows("table1")[:6])}
        assert got == want
        notes.append(f"{len(nontrivial(classes))} nontrivial, orbits "
                     f"{[c.orbit_size for c in nontrivial(classes)]}")


# 5 ---------------------------------------------------------------------------

def budget_classes(classes):
    return {canonical_in(c.representative, [3, 3]) for c in classes
            if c.representative.bound_symbol == BUDGET and not c.trivial}


@pytest.mark.slow
def test_criterion_05_bounded_source():
    with criterion(5, "bounded source (2,2)/(2,3) match Table II rows 1-3", 7200) as notes:
        table2 = [c.representative for c in golden_tables()["table2"]]
        c22 = project_scenario(bell_structure([2, 2], True), bell_scenario([2, 2]))
        assert budget_classes(c22) == set(table2[:2])
        c23 = project_scenario(bell_structure([2, 3], True), bell_scenario([2, 3]))
        assert budget_classes(c23) == set(table2[:3])
        notes.append("direct projection for both scenarios")


# 6 ---------------------------------------------------------------------------

def test_criterion_06_violation_values():
    with criterion(6, "exact violation values", 10):
        for m in (2, 3, 4, 5):
            sc = bell_scenario([m, m])
            box = mix([box_pm(m), box_pc(settings=m)], [HALF, HALF])
            v = box_entropy_vector(box, sc)
            assert v.kind == "exact"
            assert evaluate(imm_entropic(m).inequality, v) == (m - 1, False)
            assert box_entropy_vector(box_pm(m), sc) == box_entropy_vector(box_pc(settings=m), sc)
        sc3 = bell_scenario([2, 2, 2])
        m3 = mn_multipartite(3).inequality
        for b in (box_p1(), box_p2()):
            v = box_entropy_vector(mix([b, box_pc(3)], [HALF, HALF]), sc3)
            assert evaluate(m3, v) == (1, False)


# 7 ---------------------------------------------------------------------------

def cg_matrix(m):
    """Probabilistic CG inequality from its matrix form: row B_j has m - j ones."""
    names = observable_names([m, m])
    idx = {n: i for i, n in enumerate(names)}
    terms = {1 << idx["A0"]: -1}
    for j in range(m):
        terms[1 << idx[f"B{j}"]] = -(m - 1 - j)
        for i in range(m - j):
            terms[1 << idx[f"A{i}"] | 1 << idx[f"B{j}"]] = 1
        if j:
            terms[1 << idx[f"A{m - j}"] | 1 << idx[f"B{j}"]] = -1
    return normalize(LinearInequality(names, tuple((k, v) for k, v in terms.items() if v), LE))


def test_criterion_07_translation():
    with criterion(7, "D^T translation and Moebius round trip", 30):
        f = chsh_entropic().inequality
        names = f.names
        chsh_prob = {("A0", "B0"): 1, ("A0", "B1"): 1, ("A1", "B0"): 1, ("A1", "B1"): -1,
                     ("A0",): -1, ("B0",): -1}
        target = LinearInequality.from_dict(names, chsh_prob, LE)
        neg_f = LinearInequality(names, tuple((s, -c) for s, c in f.terms), f.relation)
        got = map_D_transpose(f).with_label("")
        assert got == normalize(neg_f) == normalize(target)
        for m in (2, 3, 4):
            g = map_D_transpose(imm_entropic(m).inequality.negated()).with_label("")
            assert normalize(g) == cg_matrix(m)
        rng = random.Random(7)
        for _ in range(500):
            n = rng.randint(1, 5)
            d = random_distribution(rng, binary([f"X{i}" for i in range(n)]), exact=True)
            p = SetFunctionVector(d.names, tuple(moebius_inverse(q_vector(d)).values))
            assert moebius_inverse(moebius_forward(p)) == p
            assert moebius_forward(p) == q_vector(d)


# 8 ---------------------------------------------------------------------------

def test_criterion_08_certificates():
    with criterion(8, "proof certificates verify", 5) as notes:
        for m in (3, 4, 5, 6):
            cert = certificate_imm(m)
            assert cert.verify()
        for m in (4, 6):
            assert certificate_bimm(m).verify()
        assert bounded_lambda_certificate().verify()
        notes.append("imm m=3..6, bimm m=4,6, bounded-source lemma")


# 9 ---------------------------------------------------------------------------

def brute_force_rays_gamma2():
    """Intersect pairs of boundaries of Gamma_2 and keep directions that are extremal."""
    rows = [(-1, 0, 1), (0, -1, 1), (1, 1, -1)]
    cands = set()
    for r, s in itertools.combinations(rows, 2):
        # cross product spans the line where both constraints are tight
        x = (r[1] * s[2] - r[2] * s[1], r[2] * s[0] - r[0] * s[2], r[0] * s[1] - r[1] * s[0])
        for sign in (1, -1):
            y = tuple(sign * v for v in x)
            if any(y) and all(sum(a * b for a, b in zip(row, y)) >= 0 for row in rows):
                g = math.gcd(*y)
                cands.add(tuple(v // g for v in y))
    out = []
    for c in cands:
        others = [o for o in cands if o != c]
        if not cone_membership(others, [], c).member:
            out.append(c)
    return set(out)


def test_criterion_09_facets_and_rays():
    with criterion(9, "facet test and Gamma_2 extreme rays", 1) as notes:
        v = VRep(("x", "y"), [(0, 0), (1, 0)], [(0, 1), (1, 1)])
        assert is_facet(v, ((1, 0), 0)) == (True, 1)
        assert is_facet(v, ((1, 1), 0)) == (False, 0)
        assert is_facet(v, ((1, 0), 1)) == (False, -1)
        names = ("1", "2")
        rays = set(extreme_rays(ConeH.from_inequalities(elemental_inequalities(names), names))
                   .directions)
        oracle = brute_force_rays_gamma2()
        assert rays == oracle == {(1, 0, 1), (0, 1, 1), (1, 1, 1)}
        # the fourth listed direction is the sum of two others, hence not extreme
        assert in_conic_hull([(1, 0, 1), (0, 1, 1), (1, 1, 1)], (1, 1, 2)) is not None
        notes.append("3 extreme rays; (1,1,2) = (1,0,1)+(0,1,1) is not extreme")


# 10 --------------------------------------------------------------------------

def test_criterion_10_triangle():
    with criterion(10, "triangle inequalities implied and violated", 600):
        fam = triangle_family()
        cone = triangle_structure().cone()
        for f in fam[:3]:
            cert = implies(cone, f.inequality.remap(cone.names))
            assert cert is not None and cert.verify()
        bounded = triangle_structure(bounded=True).cone()
        cert = implies(bounded, fam[3].inequality.remap(bounded.names))
        assert cert is not None and cert.verify()
        corr = JointDistribution(binary("ABC"), {(0, 0, 0): HALF, (1, 1, 1): HALF})
        v = entropy_vector(corr)
        assert [evaluate(f.inequality, v) for f in fam[:3]] == [(1, False), (3, False), (5, False)]
        assert evaluate(fam[3].inequality, v, budget=1) == (1, True)


# 11 --------------------------------------------------------------------------

def dense(q, n):
    co = q.coefficients
    return [co.get(m, Fraction(0)) for m in range(1 << n)]


def test_criterion_11_duality():
    with criterion(11, "CHSH in the D^T hull, Mermin outside", 300):
        chsh = chsh_entropic().inequality
        gens4 = [dense(map_D_transpose(q), 4) for q in elemental_inequalities(chsh.names)]
        assert in_conic_hull(gens4, dense(map_D_transpose(chsh), 4)) is not None
        mermin = mermin_q_inequality()
        gens6 = [dense(map_D_transpose(q), 6) for q in elemental_inequalities(mermin.names)]
        assert in_conic_hull(gens6, dense(mermin, 6)) is None


# 12 --------------------------------------------------------------------------

def bounded_model(rng, lam_card):
    outs = list(itertools.product((0, 1), repeat=3))
    probs = {}
    for _ in range(lam_card):
        pa = [rng.randint(0, 3) for _ in outs]
        pb = [rng.randint(0, 3) for _ in outs]
        pa[rng.randrange(8)] += 1
        pb[rng.randrange(8)] += 1
        sa, sb = sum(pa), sum(pb)
        for (a, wa), (b, wb) in itertools.product(zip(outs, pa), zip(outs, pb)):
            if wa and wb:
                probs[a + b] = probs.get(a + b, 0) + wa * wb / (sa * sb * lam_card)
    return JointDistribution(binary(observable_names([3, 3])), probs)


def ghz_m3(d):
    b = mix([quantum_box(ghz_system(3, d)), box_pc(3, outcomes=d)], [0.5, 0.5])
    return evaluate(mn_multipartite(3).inequality, box_entropy_vector(b, bell_scenario([2, 2, 2])))[0]


def test_criterion_12_property_suites():
    with criterion(12, "property suites and GHZ scan", 600) as notes:
        rng = random.Random(12)
        table1 = golden_rows("table1") + [chsh_entropic().inequality.remap(observable_names([3, 4]))]
        for _ in range(500):
            v = entropy_vector(random_distribution(rng, binary(observable_names([3, 4])), sparsity=0.8))
            assert all(evaluate(q, v)[1] for q in table1)
        table2 = golden_rows("table2")
        valid2 = [q for i, q in enumerate(table2) if i + 1 not in (11, 22)]
        for _ in range(500):
            k = rng.choice((1, 2, 3, 4))
            v = entropy_vector(bounded_model(rng, k))
            assert all(evaluate(q, v, budget=math.log2(k))[1] for q in valid2)
        cone33 = bell_structure([3, 3], True).cone()
        assert [i + 1 for i, q in enumerate(table2)
                if implies(cone33, q.remap(cone33.names)) is None] == [11, 22]
        notes.append("Table II rows 11 and 22 are not implied as tabulated (LP separator found)")

        for _ in range(500):
            n = rng.randint(1, 5)
            names = [f"X{i}" for i in range(n)]
            q = q_vector(random_distribution(rng, binary(names), exact=True))
            assert s_membership(q)[0]
            s = map_D(q)
            assert all(evaluate(e, s)[1] for e in elemental_inequalities(names))

        sc = bell_scenario([3, 4])
        for a in itertools.product((0, 1), repeat=3):
            for b in itertools.product((0, 1), repeat=4):
                v = box_entropy_vector(deterministic_box([3, 4], [2, 2], [a, b]), sc)
                assert all(evaluate(q, v)[1] for q in table1)

        projected = project_scenario(None, bell_scenario([2, 2]), classify_output=False)
        rows = projected.to_inequalities()
        for _ in range(200):
            d = random_distribution(rng, [(x, rng.choice((2, 3))) for x in ("A0", "A1", "B0", "B1")])
            v = entropy_vector(d)
            assert all(evaluate(q, v)[1] for q in rows)

        vals = [ghz_m3(d) for d in (2, 3, 4)]
        assert vals[0] > 1e-9
        assert all(y >= x - 1e-9 for x, y in zip(vals, vals[1:]))
        notes.append("GHZ M3 at d=2,3,4: " + ", ".join(f"{x:.3f}" for x in vals))
