"""Causal structures as linear constraints on entropy vectors.

A structure is a ground set of variables (observable and hidden), a list of
conditional independences ``I(A:B|K) = 0`` and entropy bounds
``H(S) <= bound`` where the bound is a rational or the budget ``C``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .core import BUDGET, EQ, LE, LinearInequality, bits, mask_of, normalize
from .shannon import elemental_inequalities, mi_expression

__all__ = [
    "CausalStructure",
    "HIDDEN",
    "attach_budget",
    "bell_structure",
    "ci_equality",
    "observable_names",
    "party_names",
    "triangle_structure",
]

HIDDEN = "L"


def party_names(count: int) -> list[str]:
    if count > 26:
        raise ValueError("at most 26 parties")
    return [chr(ord("A") + i) for i in range(count)]


def observable_names(settings_per_party: Sequence[int]) -> tuple[str, ...]:
    """``A0, A1, ..., B0, ...`` for the given setting counts."""
    out = []
    for p, m in zip(party_names(len(settings_per_party)), settings_per_party):
        out.extend(f"{p}{i}" for i in range(m))
    return tuple(out)


def _as_mask(x, names) -> int:
    if isinstance(x, int):
        return x
    if isinstance(x, str):
        x = [x]
    return mask_of(x, names)


def ci_equality(names, a, b, k=()) -> LinearInequality:
    """``I(A:B|K) = 0`` as a normalized equality."""
    names = tuple(names)
    a, b, k = (_as_mask(x, names) for x in (a, b, k))
    if not a or not b:
        raise ValueError("independence needs nonempty A and B")
    coeffs = mi_expression(names, a, b, k)
    q = LinearInequality(names, tuple(coeffs.items()), EQ)
    return normalize(q).with_label(_ci_label(names, a, b, k))


def _ci_label(names, a, b, k):
    f = lambda m: "".join(names[i] for i in bits(m))
    return f"CI[{f(a)}:{f(b)}" + (f"|{f(k)}]" if k else "]")


@dataclass(frozen=True)
class CausalStructure:
    """Observable and hidden variables with CI equalities and entropy bounds.

    ``ci_constraints`` holds mask triples ``(A, B, K)``; ``entropy_bounds``
    holds ``(S, bound)`` pairs with ``bound`` either ``"C"`` or a Fraction.
    """

    ground: tuple[str, ...]
    ci_constraints: tuple = ()
    entropy_bounds: tuple = ()
    hidden: tuple[str, ...] = ()

    def __post_init__(self):
        ground = tuple(self.ground)
        if len(set(ground)) != len(ground):
            raise ValueError("duplicate variable names")
        object.__setattr__(self, "ground", ground)
        full = (1 << len(ground)) - 1
        cis = []
        for a, b, k in self.ci_constraints:
            a, b, k = (_as_mask(x, ground) for x in (a, b, k))
            if (a | b | k) & ~full:
                raise ValueError("independence mentions unknown variables")
            if a & b or a & k or b & k or not a or not b:
                raise ValueError("independence arguments must be nonempty and disjoint")
            key = (min(a, b), max(a, b), k)
            if key not in cis:
                cis.append(key)
        bounds = []
        for s, bound in self.entropy_bounds:
            s = _as_mask(s, ground)
            if not s or s & ~full:
                raise ValueError("entropy bound on an unknown or empty set")
            bound = BUDGET if bound == BUDGET else Fraction(bound)
            if (s, bound) not in bounds:
                bounds.append((s, bound))
        object.__setattr__(self, "ci_constraints", tuple(cis))
        object.__setattr__(self, "entropy_bounds", tuple(bounds))
        hidden = tuple(self.hidden)
        if not set(hidden) <= set(ground):
            raise ValueError("hidden variables must belong to the ground set")
        used = 0
        for a, b, k in cis:
            used |= a | b | k
        for s, _ in bounds:
            used |= s
        for h in hidden:
            if not used >> ground.index(h) & 1:
                raise ValueError(f"hidden variable {h} appears in no constraint")
        object.__setattr__(self, "hidden", hidden)

    @property
    def observables(self) -> tuple[str, ...]:
        return tuple(v for v in self.ground if v not in self.hidden)

    @property
    def has_budget(self) -> bool:
        return any(b == BUDGET for _, b in self.entropy_bounds)

    def constraints(self) -> list[LinearInequality]:
        """CI equalities followed by the entropy bounds."""
        out = [ci_equality(self.ground, a, b, k) for a, b, k in self.ci_constraints]
        for s, bound in self.entropy_bounds:
            f = "".join(self.ground[i] for i in bits(s))
            if bound == BUDGET:
                q = LinearInequality(self.ground, ((s, Fraction(1)),), LE, Fraction(1), BUDGET)
            else:
                q = LinearInequality(self.ground, ((s, Fraction(1)),), LE, bound)
            out.append(q.with_label(f"B[H({f}) <= {bound}]"))
        return out

    def all_constraints(self) -> list[LinearInequality]:
        """Elemental inequalities of the ground set plus the structure."""
        return elemental_inequalities(self.ground) + self.constraints()

    def cone(self):
        from .polyhedra import ConeH
        return ConeH.from_inequalities(self.all_constraints(), self.ground)

    def to_json(self) -> dict:
        f = lambda m: [self.ground[i] for i in bits(m)]
        return {
            "variables": list(self.ground),
            "hidden": list(self.hidden),
            "ci": [{"A": f(a), "B": f(b), "K": f(k)} for a, b, k in self.ci_constraints],
            "bounds": [{"S": f(s), "bound": str(b)} for s, b in self.entropy_bounds],
        }

    @classmethod
    def from_json(cls, obj) -> "CausalStructure":
        if isinstance(obj, str):
            obj = json.loads(obj)
        ground = tuple(obj["variables"])
        cis = [(tuple(c["A"]), tuple(c["B"]), tuple(c.get("K", ()))) for c in obj.get("ci", [])]
        cis = [tuple(mask_of(x, ground) for x in t) for t in cis]
        bounds = []
        for b in obj.get("bounds", []):
            val = b["bound"]
            bounds.append((mask_of(b["S"], ground), BUDGET if val == BUDGET else Fraction(str(val))))
        return cls(ground, tuple(cis), tuple(bounds), tuple(obj.get("hidden", ())))


def attach_budget(cs: CausalStructure, s) -> CausalStructure:
    """Add ``H(S) <= C``; attaching the same bound twice changes nothing."""
    if isinstance(s, str):
        s = [s]
    if not isinstance(s, int):
        unknown = [x for x in s if x not in cs.ground]
        if unknown:
            raise ValueError(f"unknown variables {unknown}")
    mask = _as_mask(s, cs.ground)
    return CausalStructure(cs.ground, cs.ci_constraints,
                           cs.entropy_bounds + ((mask, BUDGET),), cs.hidden)


def bell_structure(settings_per_party: Sequence[int], budget: bool = False) -> CausalStructure:
    """Local hidden variable model: one source ``L`` screening off all parties.

    For ``N`` parties the constraints are ``I(P_j : P_{j+1} ... P_N | L) = 0``
    for ``j < N``, which together say the parties' blocks are independent
    given ``L``.
    """
    settings = list(settings_per_party)
    if len(settings) < 2:
        raise ValueError("a Bell structure needs at least two parties")
    if any(m < 1 for m in settings):
        raise ValueError("each party needs at least one setting")
    obs = observable_names(settings)
    ground = obs + (HIDDEN,)
    blocks = []
    start = 0
    for m in settings:
        blocks.append(sum(1 << (start + i) for i in range(m)))
        start += m
    lam = 1 << len(obs)
    cis = []
    for j in range(len(blocks) - 1):
        rest = 0
        for b in blocks[j + 1:]:
            rest |= b
        cis.append((blocks[j], rest, lam))
    cs = CausalStructure(ground, tuple(cis), (), (HIDDEN,))
    return attach_budget(cs, HIDDEN) if budget else cs


def triangle_structure(bounded: bool = False,
                       extra_ci: Iterable = ()) -> CausalStructure:
    """Three observables ``A, B, C`` with either pairwise or a common source.

    Unbounded: sources ``L1`` (shared by A, B), ``L2`` (A, C), ``L3`` (B, C)
    that are mutually independent; each observable is independent of its
    non-descendants given its two sources. ``extra_ci`` appends further
    independences given as name-tuple triples.

    Bounded: a single source ``L`` with ``H(L) <= C`` that screens off all
    three observables.
    """
    if bounded:
        ground = ("A", "B", "C", HIDDEN)
        cis = [(("A",), ("B",), (HIDDEN,)), (("A",), ("C",), (HIDDEN,)),
               (("B",), ("C",), (HIDDEN,)), (("A",), ("B", "C"), (HIDDEN,))]
        cis += list(extra_ci)
        cis = [tuple(mask_of(x, ground) for x in t) for t in cis]
        return CausalStructure(ground, tuple(cis), ((mask_of([HIDDEN], ground), BUDGET),),
                               (HIDDEN,))
    ground = ("A", "B", "C", "L1", "L2", "L3")
    cis = [
        (("L1",), ("L2",), ()), (("L1",), ("L3",), ()), (("L2",), ("L3",), ()),
        (("L1",), ("L2", "L3"), ()),
        (("A",), ("B",), ("L1",)), (("A",), ("C",), ("L2",)), (("B",), ("C",), ("L3",)),
        (("A",), ("B", "C", "L3"), ("L1", "L2")),
        (("B",), ("A", "C", "L2"), ("L1", "L3")),
        (("C",), ("A", "B", "L1"), ("L2", "L3")),
    ]
    cis += list(extra_ci)
    cis = [tuple(mask_of(x, ground) for x in t) for t in cis]
    return CausalStructure(ground, tuple(cis), (), ("L1", "L2", "L3"))
