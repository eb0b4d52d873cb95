"""Named entropic inequality families, their proofs and reference tables.

Bipartite families are laid out as a coefficient matrix: ``a[i]`` multiplies
``H(A_i)``, ``b[j]`` multiplies ``H(B_j)`` and ``pairs[i, j]`` multiplies
``H(A_i B_j)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Mapping, Sequence

from .causal import HIDDEN, bell_structure, observable_names, party_names
from .core import BUDGET, GE, LE, LinearInequality, mask_of
from .polyhedra import Certificate
from .shannon import expand_to_elementals, monotonicity, submodularity

__all__ = [
    "FAMILIES",
    "NamedInequality",
    "bimm_entropic",
    "bounded_lambda_certificate",
    "certificate_bimm",
    "certificate_imm",
    "chsh_entropic",
    "decode_table_row",
    "golden_rows",
    "golden_tables",
    "imm_entropic",
    "imm_prob",
    "mn_multipartite",
    "named",
    "triangle_family",
]


@dataclass(frozen=True)
class NamedInequality:
    family: str
    parameters: tuple
    inequality: LinearInequality
    description: str = field(default="", compare=False)


def _bipartite(ma: int, mb: int, a: Mapping, b: Mapping, pairs: Mapping,
               relation=LE, bound=0, symbol=None, label="") -> LinearInequality:
    names = observable_names([ma, mb])
    idx = {nm: i for i, nm in enumerate(names)}
    coeffs: dict[int, Fraction] = {}

    def add(mask, c):
        if c:
            coeffs[mask] = coeffs.get(mask, Fraction(0)) + Fraction(c)

    for i, c in a.items():
        add(1 << idx[f"A{i}"], c)
    for j, c in b.items():
        add(1 << idx[f"B{j}"], c)
    for (i, j), c in pairs.items():
        add(1 << idx[f"A{i}"] | 1 << idx[f"B{j}"], c)
    q = LinearInequality(names, tuple(coeffs.items()), relation, bound, symbol)
    return q.with_label(label)


def _imm_rows(m: int, first_row: bool = True) -> dict:
    pairs = {}
    for j in range(m):
        if j == 0 and not first_row:
            continue
        for i in range(min(m, m - j + 1)):
            pairs[i, j] = 1 if (j > 0 and i == m - j) else -1
    return pairs


def chsh_entropic() -> NamedInequality:
    """``H(A0B0) + H(A0B1) + H(A1B0) - H(A1B1) - H(A0) - H(B0) >= 0``."""
    pairs = {(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): -1}
    q = _bipartite(2, 2, {0: -1}, {0: -1}, pairs, GE, label="CHSH_E")
    return NamedInequality("chsh", (), q, "entropic CHSH inequality")


def imm_entropic(m: int) -> NamedInequality:
    """Entropic Collins-Gisin inequality ``I_mm <= 0`` for ``m`` settings per party.

    Marginals: ``H(A0)`` and ``(m-1-j) H(B_j)``. Pair ``(i, j)`` carries -1
    for ``i < m - j`` and +1 at ``i = m - j`` (rows ``j >= 1``).
    """
    if m < 2:
        raise ValueError("imm_entropic needs m >= 2")
    b = {j: m - 1 - j for j in range(m)}
    q = _bipartite(m, m, {0: 1}, b, _imm_rows(m), LE, label=f"I_E[{m}{m}]")
    return NamedInequality("imm", (m,), q, f"entropic CG inequality, {m} settings")


def bimm_entropic(m: int) -> NamedInequality:
    """Bounded shared randomness version ``BI_mm <= C``.

    Same as ``I_mm`` except the ``B0`` row: marginal 1 and a single -1 on
    ``H(A_{m-1} B0)``.
    """
    if m < 2:
        raise ValueError("bimm_entropic needs m >= 2")
    pairs = _imm_rows(m, first_row=False)
    pairs[m - 1, 0] = -1
    b = {j: m - 1 - j for j in range(1, m)}
    b[0] = 1
    q = _bipartite(m, m, {0: 1}, b, pairs, LE, 1, BUDGET, label=f"BI_E[{m}{m}]")
    return NamedInequality("bimm", (m,), q, f"entropic CG inequality with bounded "
                           f"shared randomness, {m} settings")


def mn_multipartite(n_parties: int) -> NamedInequality:
    """``M_N <= 0`` over two settings per party.

    ``H(all at 1) - H(all at 0) - sum_k H(party k at 1, rest at 0)
    + sum_k H(all but party k, at 0)``.
    """
    if n_parties < 2:
        raise ValueError("mn_multipartite needs at least two parties")
    names = observable_names([2] * n_parties)
    parties = party_names(n_parties)

    def ctx(settings):
        return mask_of([f"{p}{s}" for p, s in settings], names)

    coeffs: dict[int, Fraction] = {}

    def add(mask, c):
        coeffs[mask] = coeffs.get(mask, Fraction(0)) + c

    add(ctx([(p, 1) for p in parties]), 1)
    add(ctx([(p, 0) for p in parties]), -1)
    for k in range(n_parties):
        add(ctx([(p, 1 if i == k else 0) for i, p in enumerate(parties)]), -1)
        add(ctx([(p, 0) for i, p in enumerate(parties) if i != k]), 1)
    q = LinearInequality(names, tuple(coeffs.items()), LE).with_label(f"M[{n_parties}]")
    return NamedInequality("mn", (n_parties,), q, f"{n_parties}-party chain-rule inequality")


_TRIANGLE = {
    "triangle_1": (1, 1, 1, -1, -1, 0, 0),
    "triangle_2": (3, 3, 3, -3, -2, -2, 1),
    "triangle_3": (5, 5, 5, -4, -4, -4, 2),
}


def triangle_family() -> list[NamedInequality]:
    """Three inequalities for the triangle network plus the common-ancestor bound.

    Coefficients are listed over ``(H_A, H_B, H_C, H_AB, H_AC, H_BC, H_ABC)``.
    """
    names = ("A", "B", "C")
    order = (0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111)
    out = []
    for label, vec in _TRIANGLE.items():
        q = LinearInequality(names, tuple(zip(order, vec)), LE).with_label(label)
        out.append(NamedInequality("triangle", (label,), q, "triangle network inequality"))
    anc = LinearInequality(names, ((0b011, 1), (0b101, 1), (0b110, 1), (0b111, -2)),
                           LE, 1, BUDGET).with_label("triangle_ancestor")
    out.append(NamedInequality("triangle", ("ancestor",), anc,
                               "common ancestor with bounded entropy"))
    return out


def imm_prob(m: int) -> NamedInequality:
    """The probabilistic ``I_mm22 <= 0`` over ``q`` coordinates.

    Coefficients are the negatives of :func:`imm_entropic`.
    """
    base = imm_entropic(m).inequality
    q = LinearInequality(base.names, tuple((s, -c) for s, c in base.terms), LE)
    return NamedInequality("imm_prob", (m,), q.with_label(f"I[{m}{m}22]"),
                           f"CG inequality on q coordinates, {m} settings")


FAMILIES = {
    "chsh": (chsh_entropic, 0),
    "imm": (imm_entropic, 1),
    "bimm": (bimm_entropic, 1),
    "mn": (mn_multipartite, 1),
    "imm_prob": (imm_prob, 1),
    "triangle": (triangle_family, 0),
}


def named(family: str, *params) -> list[NamedInequality]:
    """Look up a family by name; always returns a list."""
    if family not in FAMILIES:
        raise KeyError(f"unknown family {family!r}; known: {', '.join(sorted(FAMILIES))}")
    fn, arity = FAMILIES[family]
    if len(params) != arity:
        raise ValueError(f"family {family!r} takes {arity} parameter(s)")
    out = fn(*params)
    return out if isinstance(out, list) else [out]


# certificates ---------------------------------------------------------------

class _Terms:
    """Accumulates Shannon inequalities for a certificate."""

    def __init__(self, names, elemental: bool):
        self.names = tuple(names)
        self.elemental = elemental
        self.items: list[tuple[LinearInequality, Fraction]] = []

    def m(self, *xs) -> int:
        return mask_of(xs, self.names)

    def sm(self, a, b, k=()):
        a, b, k = (self.m(*x) if not isinstance(x, int) else x for x in (a, b, k))
        if self.elemental:
            self.items.extend(expand_to_elementals(self.names, "SM", a, b, k))
        else:
            self.items.append((submodularity(self.names, a, b, k), Fraction(1)))

    def mono(self, big, small):
        big, small = self.m(*big), self.m(*small)
        if big == small:
            return
        if self.elemental:
            self.items.extend(expand_to_elementals(self.names, "M", big, small))
        else:
            self.items.append((monotonicity(self.names, big, small), Fraction(1)))

    def add(self, q, mult=1):
        self.items.append((q, Fraction(mult)))


def _As(lo, hi):
    return [f"A{i}" for i in range(lo, hi + 1)]


def _imm_first_step(t: _Terms, m: int):
    """Rows 0, 1, m-1 and ``H(A0)``, leaving ``H(A0A1) - H(A0..A_{m-2})``."""
    head = _As(0, m - 2)
    t.sm(["B0"], ["B1"], head)
    for b in ("B0", "B1"):
        for k in range(m - 2):
            t.sm([f"A{k}"], _As(k + 1, m - 2), [b])
    t.sm([f"A{m - 1}"], ["B1"], ["B0"])
    t.mono([f"A{m - 1}", "B0", "B1"], [f"A{m - 1}", "B1"])
    t.sm([f"B{m - 1}"], ["A1"], ["A0"])
    t.mono(["A0", "A1", f"B{m - 1}"], ["A1", f"B{m - 1}"])
    t.mono(head + ["B0", "B1"], ["B0", "B1"])


def _imm_middle_rows(t: _Terms, m: int):
    """Rows ``j = 2..m-2``, leaving ``H(A0..A_{m-2}) - H(A0A1)``."""
    for j in range(2, m - 1):
        bj = f"B{j}"
        top = m - j
        t.sm([f"A{top}"], [bj], _As(0, top - 1))
        t.mono(_As(0, top) + [bj], [f"A{top}", bj])
        for k in range(top - 1, 0, -1):
            t.sm([f"A{k}"], _As(0, k - 1), [bj])


def certificate_imm(m: int, elemental: bool = False) -> Certificate:
    """Unit-weight Shannon inequalities summing to ``-I_mm >= 0``.

    With ``elemental=True`` every submodularity and monotonicity is expanded
    into elemental inequalities first.
    """
    if m < 3:
        raise ValueError("certificate_imm covers m >= 3")
    target = imm_entropic(m).inequality
    t = _Terms(target.names, elemental)
    _imm_first_step(t, m)
    _imm_middle_rows(t, m)
    return Certificate.from_inequalities(t.items, target)


def _bounded_lambda_terms(t: _Terms, a_set, b_set, full_b, structure_eq):
    """``H(A) + H(B) - H(AB) <= C`` from the screening equality and ``H(L) <= C``.

    When ``b_set`` is a proper part of the screened block, the independence
    of ``A`` and ``b_set`` given ``L`` is first obtained from the full one.
    """
    lam = [HIDDEN]
    # the equality may be stored as -I(A:B|L) = 0 after normalization
    sign = 1 if structure_eq.coeff(t.m(*(list(a_set) + lam))) > 0 else -1
    t.add(structure_eq, -sign)
    rest = [x for x in full_b if x not in b_set]
    if rest:
        t.sm(a_set, rest, lam + list(b_set))
    t.sm(b_set, lam, a_set)
    t.mono(list(b_set) + lam, b_set)
    bound = LinearInequality(t.names, ((t.m(HIDDEN), Fraction(1)),), LE, 1, BUDGET)
    t.add(bound.with_label("B[H(L) <= C]"))


def bounded_lambda_certificate(m: int = 2) -> Certificate:
    """Four-constraint derivation of ``H(A) + H(B) <= H(AB) + C`` for ``m`` settings."""
    cs = bell_structure([m, m], budget=True)
    names = cs.ground
    a_set, b_set = _As(0, m - 1), [f"B{j}" for j in range(m)]
    t = _Terms(names, False)
    eq = cs.constraints()[0]
    _bounded_lambda_terms(t, a_set, b_set, b_set, eq)
    coeffs = {t.m(*a_set): 1, t.m(*b_set): 1, t.m(*(a_set + b_set)): -1}
    target = LinearInequality.from_dict(names, coeffs, LE, 1, BUDGET, "H(A)+H(B)-H(AB) <= C")
    return Certificate.from_inequalities(t.items, target)


def certificate_bimm(m: int, elemental: bool = False) -> Certificate:
    """Proof of ``BI_mm <= C`` for even ``m >= 4`` over the bounded Bell structure."""
    if m < 4 or m % 2:
        raise ValueError("certificate_bimm covers even m >= 4")
    cs = bell_structure([m, m], budget=True)
    names = cs.ground
    target = bimm_entropic(m).inequality.remap(names)
    t = _Terms(names, elemental)
    all_a = _As(0, m - 1)
    all_b = [f"B{j}" for j in range(m)]
    # last row and H(A0)
    t.sm([f"B{m - 1}"], ["A1"], ["A0"])
    t.mono(["A0", "A1", f"B{m - 1}"], ["A1", f"B{m - 1}"])
    # pairs of the B1 row
    for k in range(0, m - 3, 2):
        t.sm([f"A{k}"], [f"A{k + 1}"], ["B1"])
    # I(A : B0B1) <= C
    _bounded_lambda_terms(t, all_a, ["B0", "B1"], all_b, cs.constraints()[0])
    t.sm([f"A{m - 1}"], ["B1"], ["B0"])
    t.sm(_As(0, m - 2), ["B0"], [f"A{m - 1}", "B1"])
    t.sm([f"A{m - 1}"], ["B1"], _As(0, m - 2))
    # telescoping chain over the pairs (A0A1), (A2A3), ...
    for k in range(0, m - 3, 2):
        t.sm([f"A{k}", f"A{k + 1}"], _As(k + 2, m - 2), ["B1"])
    _imm_middle_rows(t, m)
    return Certificate.from_inequalities(t.items, target)


# reference tables -------------------------------------------------------------

@lru_cache(maxsize=1)
def _table_data() -> dict:
    with resources.files("entrocone").joinpath("data/reference_tables.json").open() as fh:
        return json.load(fh)


def _pair_slots(row: Mapping, labels: Sequence[str]) -> dict:
    layout = row["layout"]
    vals = row["ab"]
    if layout == "grid":
        return {(int(l[0]), int(l[1])): v for l, v in zip(labels, vals)}
    if layout == "consecutive3x3":
        order = [(x, y) for x in range(3) for y in range(3)]
    elif layout == "consecutive2x2":
        order = [(x, y) for x in range(2) for y in range(2)]
    else:
        raise ValueError(f"unknown layout {layout!r}")
    if any(vals[len(order):]):
        raise ValueError("nonzero entries beyond the declared layout")
    return dict(zip(order, vals))


def decode_table_row(table: str, row: Mapping) -> LinearInequality:
    """Turn one stored table row into an inequality over its table's observables."""
    layout = _table_data()[table]
    labels = layout["columns"]["ab"]
    if row["layout"] == "replaced":
        rep = row["replacement"]
        a, b = rep["a"], rep["b"]
        pairs = {(int(k[0]), int(k[1])): v for k, v in rep["ab"].items()}
    else:
        a, b = row["a"], row["b"]
        pairs = _pair_slots(row, labels)
    ma = max(int(l[0]) for l in labels) + 1
    mb = max(int(l[1]) for l in labels) + 1
    amap = {i: c for i, c in enumerate(a) if c}
    bmap = {j: c for j, c in enumerate(b) if c}
    if any(i >= ma for i in amap) or any(j >= mb for j in bmap):
        raise ValueError("marginal outside the table scenario")
    if "c" in row:
        return _bipartite(ma, mb, amap, bmap, pairs, LE, row["c"], BUDGET,
                          label=f"{table}:{row['row']}")
    return _bipartite(ma, mb, amap, bmap, pairs, LE, label=f"{table}:{row['row']}")


def golden_rows(table: str) -> list[LinearInequality]:
    """Decoded rows of ``"table1"`` (bipartite, ``<= 0``) or ``"table2"`` (``<= c C``)."""
    return [decode_table_row(table, r) for r in _table_data()[table]["rows"]]


def golden_tables() -> dict:
    """Reference classes, canonicalized in the scenario each table lives in.

    ``table1`` uses three settings for A and four for B; ``table2`` three and
    three with the budget bound.
    """
    from .marginal import bell_scenario, classify

    out = {}
    for table, sett in (("table1", (3, 4)), ("table2", (3, 3))):
        sc = bell_scenario(sett)
        classes = []
        for q in golden_rows(table):
            (cls,) = classify([q], sc)
            classes.append(cls)
        out[table] = classes
    return out
