"""Marginal scenarios, projection pipelines and symmetry classification."""

from __future__ import annotations

import hashlib
import itertools
import json
import os
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .causal import HIDDEN, CausalStructure, ci_equality, observable_names
from .core import BUDGET, LE, LinearInequality, bits, mask_of, normalize
from .lp import cone_membership
from .polyhedra import ConeH, FMStats, project
from .shannon import elemental_inequalities

__all__ = [
    "InequalityClass",
    "MarginalScenario",
    "bell_scenario",
    "classify",
    "merge_cones",
    "project_scenario",
    "symmetry_group",
]

CACHE_ENV = "ENTROCONE_CACHE_DIR"


def _subsets(mask: int):
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


@dataclass(frozen=True)
class MarginalScenario:
    """Jointly observable subsets of ``ground``, closed under subsets.

    ``parties`` optionally groups the variables (as index tuples) for the
    symmetry group of Bell-type scenarios.
    """

    ground: tuple[str, ...]
    contexts: frozenset
    parties: tuple = ()

    def __post_init__(self):
        ground = tuple(self.ground)
        object.__setattr__(self, "ground", ground)
        closed = set()
        for c in self.contexts:
            m = c if isinstance(c, int) else mask_of(c, ground)
            closed.update(_subsets(m))
        object.__setattr__(self, "contexts", frozenset(closed))
        object.__setattr__(self, "parties", tuple(tuple(p) for p in self.parties))

    @property
    def coords(self) -> tuple[int, ...]:
        """Nonempty contexts in ascending mask order."""
        return tuple(sorted(m for m in self.contexts if m))

    @property
    def maximal_contexts(self) -> tuple[int, ...]:
        ctx = self.coords
        return tuple(m for m in ctx if not any(o != m and o & m == m for o in ctx))

    def to_json(self) -> dict:
        if self.parties:
            return {"parties": [{"name": self.ground[p[0]][0], "settings": len(p)}
                                for p in self.parties]}
        return {"variables": list(self.ground),
                "contexts": [[self.ground[i] for i in bits(m)] for m in self.maximal_contexts]}

    @classmethod
    def from_json(cls, obj) -> "MarginalScenario":
        if isinstance(obj, str):
            obj = json.loads(obj)
        if "parties" in obj:
            return bell_scenario([p["settings"] for p in obj["parties"]])
        ground = tuple(obj["variables"])
        return cls(ground, frozenset(mask_of(c, ground) for c in obj["contexts"]))


def bell_scenario(settings_per_party: Sequence[int]) -> MarginalScenario:
    """Contexts with at most one observable per party."""
    settings = list(settings_per_party)
    if not settings or any(m < 1 for m in settings):
        raise ValueError("need at least one party with at least one setting")
    ground = observable_names(settings)
    parties = []
    start = 0
    for m in settings:
        parties.append(tuple(range(start, start + m)))
        start += m
    maximal = [sum(1 << i for i in combo) for combo in itertools.product(*parties)]
    return MarginalScenario(ground, frozenset(maximal), tuple(parties))


# symmetry ---------------------------------------------------------------------

def symmetry_group(scenario: MarginalScenario) -> list[tuple[int, ...]]:
    """Variable permutations generated by setting relabelings and party swaps.

    Each permutation ``perm`` sends variable ``i`` to ``perm[i]``. Parties
    with the same number of settings may be exchanged. Scenarios without a
    party structure have only the identity.
    """
    n = len(scenario.ground)
    if not scenario.parties:
        return [tuple(range(n))]
    parties = scenario.parties
    group = set()
    per_party = [list(itertools.permutations(p)) for p in parties]
    # party exchanges among equal arities
    idx = list(range(len(parties)))
    exchanges = [sig for sig in itertools.permutations(idx)
                 if all(len(parties[i]) == len(parties[sig[i]]) for i in idx)]
    for sig in exchanges:
        for choice in itertools.product(*per_party):
            perm = [0] * n
            for pi, party in enumerate(parties):
                target = choice[sig[pi]]
                for k, var in enumerate(party):
                    perm[var] = target[k]
            group.add(tuple(perm))
    return sorted(group)


def _apply(perm, mask):
    out = 0
    for i in bits(mask):
        out |= 1 << perm[i]
    return out


@dataclass(frozen=True)
class InequalityClass:
    representative: LinearInequality
    orbit_size: int
    trivial: bool

    def to_json(self) -> dict:
        from .core import inequality_to_json, render_inequality
        return {"representative": render_inequality(self.representative),
                "inequality": inequality_to_json(self.representative),
                "orbit": self.orbit_size, "trivial": self.trivial}


def _dense_key(q: LinearInequality, coords):
    coeffs = q.coefficients
    return (0 if q.bound_symbol is None else 1, q.bound, q.relation,
            tuple(coeffs.get(m, Fraction(0)) for m in coords))


def canonical_form(q: LinearInequality, group, coords) -> tuple[LinearInequality, int]:
    """Smallest normalized image under ``group`` and the orbit size."""
    images = {}
    for perm in group:
        terms = tuple((_apply(perm, m), c) for m, c in q.terms)
        img = normalize(LinearInequality(q.names, terms, q.relation, q.bound, q.bound_symbol))
        images[_dense_key(img, coords)] = img
    best = min(images)
    return images[best], len(images)


def _trivial_system(scenario: MarginalScenario):
    rows = set()
    for ctx in scenario.maximal_contexts:
        sub_names = [scenario.ground[i] for i in bits(ctx)]
        for q in elemental_inequalities(sub_names):
            rows.add(q.remap(scenario.ground))
    return list(rows)


def classify(ineqs: Sequence[LinearInequality], scenario: MarginalScenario,
             group=None, check_trivial: bool = True) -> list[InequalityClass]:
    """Group inequalities into symmetry orbits.

    Each class carries the lexicographically smallest normalized member of
    its orbit (comparing dense coefficient vectors over the scenario
    coordinates), the orbit size and whether the inequality already follows
    from the elemental inequalities of the individual contexts.
    """
    if not ineqs:
        return []
    if group is None:
        group = symmetry_group(scenario)
    coords = scenario.coords
    allowed = set(coords)
    classes: dict = {}
    for q in ineqs:
        q = normalize(q.remap(scenario.ground))
        if any(m not in allowed for m, _ in q.terms):
            raise ValueError(f"inequality {q} uses coordinates outside the scenario")
        rep, size = canonical_form(q, group, coords)
        key = _dense_key(rep, coords)
        if key not in classes:
            classes[key] = (rep, size)
    trivial_rows = None
    out = []
    for key in sorted(classes):
        rep, size = classes[key]
        trivial = False
        if check_trivial:
            if trivial_rows is None:
                base = _trivial_system(scenario)
                cone = ConeH.from_inequalities(base, scenario.ground, coords + (BUDGET,))
                trivial_rows = (cone, list(cone.inequalities))
            cone, rows = trivial_rows
            trivial = cone_membership(rows, [], cone.row_of(rep)).member
        out.append(InequalityClass(rep, size, trivial))
    return out


# projection pipelines -------------------------------------------------------

def merge_cones(cones: Sequence[ConeH]) -> ConeH:
    """Union of constraint lists over the union of coordinates."""
    from .polyhedra import _coord_key
    names = cones[0].names
    coords = sorted({c for cone in cones for c in cone.coords}, key=_coord_key)
    pos = {c: i for i, c in enumerate(coords)}
    ineqs, eqs = [], []
    for cone in cones:
        if cone.names != names:
            raise ValueError("cones over different ground sets")
        for src, dst in ((cone.inequalities, ineqs), (cone.equalities, eqs)):
            for r in src:
                row = [0] * len(coords)
                for c, v in zip(cone.coords, r):
                    row[pos[c]] = v
                dst.append(row)
    return ConeH(tuple(coords), ineqs, eqs, names)


def _cache_path(cone: ConeH, keep) -> Path | None:
    root = os.environ.get(CACHE_ENV)
    if not root:
        return None
    blob = json.dumps({"cone": cone.to_json(), "keep": sorted(map(str, keep))}, sort_keys=True)
    digest = hashlib.sha256(blob.encode()).hexdigest()[:32]
    return Path(root) / f"piece-{digest}.json"


def cached_project(cone: ConeH, keep, **kwargs) -> ConeH:
    """``project`` memoized on disk when ``ENTROCONE_CACHE_DIR`` is set."""
    path = _cache_path(cone, keep)
    if path is not None and path.exists():
        obj = json.loads(path.read_text())
        return ConeH(tuple(c if isinstance(c, str) else int(c) for c in obj["coords"]),
                     obj["inequalities"], obj["equalities"], cone.names)
    out = project(cone, keep, **kwargs)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps({"coords": list(out.coords),
                                    "inequalities": [list(r) for r in out.inequalities],
                                    "equalities": [list(r) for r in out.equalities]}))
    return out


def _sub_cone(ground, members: Sequence[str], extra: Sequence[LinearInequality] = ()) -> ConeH:
    """Elementals of a subset of the ground (plus ``extra``) as a cone."""
    idx = sorted(ground.index(v) for v in members)
    sub = [ground[i] for i in idx]
    full = sum(1 << i for i in idx)
    coords = [m for m in range(1, 1 << len(ground)) if m & full == m]
    rows = [q.remap(ground) for q in elemental_inequalities(sub)] + list(extra)
    if any(q.bound_symbol == BUDGET for q in rows):
        coords.append(BUDGET)
    return ConeH.from_inequalities(rows, ground, coords)


def _bipartite_pieces(scenario: MarginalScenario, budget: bool, fm_kwargs):
    if len(scenario.parties) != 2:
        raise ValueError("the pieces strategy needs a bipartite Bell scenario")
    obs = scenario.ground
    a_vars = [obs[i] for i in scenario.parties[0]]
    b_vars = [obs[i] for i in scenario.parties[1]]
    ground = obs + ((HIDDEN,) if budget else ())
    a_all = mask_of(a_vars, ground)
    b_all = mask_of(b_vars, ground)
    lam = mask_of([HIDDEN], ground) if budget else 0
    pieces = []
    if not budget:
        for b in b_vars:
            bm = mask_of([b], ground)
            keep = [m for m in _subsets(a_all) if m] + [bm]
            keep += [(1 << i) | bm for i in bits(a_all)]
            pieces.append(cached_project(_sub_cone(ground, a_vars + [b]), keep, **fm_kwargs))
        return ground, pieces
    bound = LinearInequality(ground, ((lam, Fraction(1)),), LE, Fraction(1), BUDGET)
    for own, others, own_all in ((a_vars, b_vars, a_all), (b_vars, a_vars, b_all)):
        for o in others:
            om = mask_of([o], ground)
            ci = ci_equality(ground, own_all, om, lam)
            cone = _sub_cone(ground, own + [o, HIDDEN], [ci, bound])
            keep = [m for m in _subsets(own_all | lam) if m]
            keep += [(1 << i) | om for i in bits(own_all)] + [om]
            pieces.append(cached_project(cone, keep, **fm_kwargs))
    return ground, pieces


def project_scenario(structure, scenario: MarginalScenario, strategy: str = "direct",
                     classify_output: bool = True, stats: FMStats | None = None,
                     **fm_kwargs):
    """Entropic description of ``scenario`` under ``structure``.

    ``structure`` is a :class:`CausalStructure`, a :class:`ConeH` over a
    ground set containing the scenario variables, or None for plain Shannon
    constraints on the observables. ``strategy="pieces"`` uses the
    decomposition of a bipartite Bell scenario into subsystems sharing one
    party's observables (and the source when a budget is present); it is only
    available for Bell structures. Returns classes, or the projected cone when
    ``classify_output`` is false.
    """
    stats = stats if stats is not None else FMStats()
    fm_kwargs = dict(fm_kwargs, stats=stats)
    if strategy == "pieces":
        budget = isinstance(structure, CausalStructure) and structure.has_budget
        if structure is not None and not isinstance(structure, CausalStructure):
            raise ValueError("the pieces strategy needs a Bell causal structure")
        ground, pieces = _bipartite_pieces(scenario, budget, fm_kwargs)
        merged = merge_cones(pieces)
    elif strategy == "direct":
        if structure is None:
            merged = ConeH.from_inequalities(elemental_inequalities(scenario.ground),
                                             scenario.ground)
        elif isinstance(structure, CausalStructure):
            merged = structure.cone()
        else:
            merged = structure
        ground = merged.names
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    keep = [mask_of([scenario.ground[i] for i in bits(m)], ground) for m in scenario.coords]
    projected = project(merged, keep, **fm_kwargs)
    if not classify_output:
        return projected
    ineqs = [q.remap(scenario.ground) for q in _strip(projected)]
    return classify(ineqs, scenario)


def _strip(cone: ConeH) -> list[LinearInequality]:
    """Inequalities of a projected cone."""
    return cone.to_inequalities()
