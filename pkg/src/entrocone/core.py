"""Subset-indexed vectors and rational linear inequalities over them.

A ground set of ``n`` named variables is fixed by a tuple of names. Subsets
are encoded as bitmasks: variable ``i`` is in the subset iff bit ``i`` is set.
A set function is stored as a dense tuple of ``2**n`` values indexed by mask,
so the empty set sits at index 0.

Linear inequalities carry exact rational coefficients. A bound may be a plain
rational constant, or a multiple of the symbolic shared-randomness budget
``C`` (``bound_symbol == "C"``), in which case ``bound`` is the multiplier.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

__all__ = [
    "BUDGET",
    "FLOAT_TOL",
    "LinearInequality",
    "SetFunctionVector",
    "bits",
    "evaluate",
    "mask_of",
    "normalize",
    "parse_inequality",
    "parse_inequalities",
    "render_inequality",
    "render_inequalities",
    "subset_label",
    "inequality_from_json",
    "inequality_to_json",
]

BUDGET = "C"
FLOAT_TOL = 1e-9

GE, LE, EQ = ">=", "<=", "="
_RELATIONS = (GE, LE, EQ)


def bits(mask: int) -> list[int]:
    """Indices of the set bits of ``mask``, ascending."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def mask_of(members: Iterable, names: Sequence[str]) -> int:
    """Bitmask of a subset given by variable names or indices."""
    mask = 0
    lookup = {name: i for i, name in enumerate(names)}
    for m in members:
        if isinstance(m, str):
            if m not in lookup:
                raise KeyError(f"unknown variable {m!r}")
            i = lookup[m]
        else:
            i = int(m)
            if not 0 <= i < len(names):
                raise IndexError(f"variable index {i} out of range")
        mask |= 1 << i
    return mask


def subset_label(mask: int, names: Sequence[str]) -> str:
    return ",".join(names[i] for i in bits(mask))


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("inequality coefficients must be exact (int/Fraction/str)")
    return Fraction(x)


@dataclass(frozen=True)
class SetFunctionVector:
    """A value per subset of the ground set.

    ``values[mask]`` is the value at subset ``mask``; entries may be ``None``
    for subsets that were not observed (marginal restrictions). ``kind`` is
    ``"exact"`` when every known value is a Fraction, ``"float"`` otherwise.
    """

    names: tuple[str, ...]
    values: tuple
    kind: str = "exact"

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        vals = tuple(self.values)
        if len(vals) != 1 << len(self.names):
            raise ValueError(
                f"expected {1 << len(self.names)} entries, got {len(vals)}"
            )
        if self.kind not in ("exact", "float"):
            raise ValueError(f"unknown scalar kind {self.kind!r}")
        if self.kind == "exact":
            vals = tuple(None if v is None else _frac(v) for v in vals)
        else:
            vals = tuple(None if v is None else float(v) for v in vals)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def is_complete(self) -> bool:
        return all(v is not None for v in self.values)

    def __getitem__(self, subset):
        if isinstance(subset, int):
            return self.values[subset]
        return self.values[mask_of(subset, self.names)]

    @classmethod
    def from_mapping(cls, names, mapping: Mapping, kind: str | None = None):
        """Build from ``{subset: value}``; subsets are masks or name tuples."""
        names = tuple(names)
        vals: list = [None] * (1 << len(names))
        for key, v in mapping.items():
            m = key if isinstance(key, int) else mask_of(key, names)
            vals[m] = v
        if kind is None:
            kind = (
                "float"
                if any(isinstance(v, float) for v in vals if v is not None)
                else "exact"
            )
        return cls(names, tuple(vals), kind)

    def restrict(self, masks: Iterable[int]) -> "SetFunctionVector":
        keep = set(masks)
        vals = tuple(v if m in keep else None for m, v in enumerate(self.values))
        return SetFunctionVector(self.names, vals, self.kind)

    def as_dict(self) -> dict:
        return {
            subset_label(m, self.names): v
            for m, v in enumerate(self.values)
            if v is not None
        }


@dataclass(frozen=True)
class LinearInequality:
    """``sum_S coeff_S * h_S  (relation)  bound`` with rational coefficients.

    ``terms`` is a tuple of ``(mask, Fraction)`` pairs with nonzero
    coefficients, sorted by mask. With ``bound_symbol == "C"`` the right-hand
    side is ``bound * C``.
    """

    names: tuple[str, ...]
    terms: tuple[tuple[int, Fraction], ...]
    relation: str = GE
    bound: Fraction = Fraction(0)
    bound_symbol: str | None = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if self.relation not in _RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")
        if self.bound_symbol not in (None, BUDGET):
            raise ValueError(f"unknown bound symbol {self.bound_symbol!r}")
        size = 1 << len(self.names)
        acc: dict[int, Fraction] = {}
        for mask, c in self.terms:
            mask = int(mask)
            if not 0 <= mask < size:
                raise ValueError(f"subset mask {mask} outside ground of size {len(self.names)}")
            acc[mask] = acc.get(mask, Fraction(0)) + _frac(c)
        terms = tuple(sorted((m, c) for m, c in acc.items() if c != 0))
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "bound", _frac(self.bound))

    # construction helpers -------------------------------------------------

    @classmethod
    def from_dict(cls, names, coeffs: Mapping, relation=GE, bound=0,
                  bound_symbol=None, label=""):
        names = tuple(names)
        terms = []
        for key, c in coeffs.items():
            m = key if isinstance(key, int) else mask_of(key, names)
            terms.append((m, c))
        return cls(names, tuple(terms), relation, _frac(bound), bound_symbol, label)

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def coefficients(self) -> dict[int, Fraction]:
        return dict(self.terms)

    def coeff(self, subset) -> Fraction:
        m = subset if isinstance(subset, int) else mask_of(subset, self.names)
        return self.coefficients.get(m, Fraction(0))

    @property
    def is_homogeneous(self) -> bool:
        return self.bound == 0

    def with_label(self, label: str) -> "LinearInequality":
        return LinearInequality(self.names, self.terms, self.relation,
                                self.bound, self.bound_symbol, label)

    def negated(self) -> "LinearInequality":
        """Same solution set, both sides multiplied by -1."""
        flip = {GE: LE, LE: GE, EQ: EQ}[self.relation]
        return LinearInequality(self.names, tuple((m, -c) for m, c in self.terms),
                                flip, -self.bound, self.bound_symbol, self.label)

    def scaled(self, factor) -> "LinearInequality":
        factor = _frac(factor)
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return LinearInequality(self.names, tuple((m, c * factor) for m, c in self.terms),
                                self.relation, self.bound * factor, self.bound_symbol,
                                self.label)

    def ge_form(self) -> tuple[dict[int, Fraction], Fraction]:
        """``(coeffs, budget_coeff)`` of the equivalent ``expr >= 0`` form.

        The budget coefficient multiplies ``C`` when ``bound_symbol`` is set and
        the constant term otherwise. Equalities keep their orientation.
        """
        coeffs = dict(self.terms)
        if self.relation == LE:
            return {m: -c for m, c in coeffs.items()}, self.bound
        return coeffs, -self.bound

    def remap(self, names: Sequence[str]) -> "LinearInequality":
        """Re-express over another ground set that contains all used variables."""
        names = tuple(names)
        if names == self.names:
            return self
        index = {nm: i for i, nm in enumerate(names)}
        terms = []
        for m, c in self.terms:
            new = 0
            for i in bits(m):
                nm = self.names[i]
                if nm not in index:
                    raise ValueError(f"variable {nm!r} missing from target ground")
                new |= 1 << index[nm]
            terms.append((new, c))
        return LinearInequality(names, tuple(terms), self.relation, self.bound,
                                self.bound_symbol, self.label)

    def used_variables(self) -> tuple[str, ...]:
        used = 0
        for m, _ in self.terms:
            used |= m
        return tuple(self.names[i] for i in bits(used))

    def __str__(self) -> str:
        return render_inequality(self)


def normalize(ineq: LinearInequality) -> LinearInequality:
    """Canonical form with the same solution set.

    Coefficients (and bound) are scaled to coprime integers. Homogeneous
    inequalities are oriented as ``expr >= 0``; inequalities with a nonzero
    bound as ``expr <= bound``; equalities so that the lowest-mask coefficient
    is positive. The all-zero inequality becomes ``0 >= 0``.
    """
    values = [c for _, c in ineq.terms]
    if ineq.bound != 0:
        values.append(ineq.bound)
    if not ineq.terms:
        if ineq.bound == 0 or ineq.relation == EQ:
            return LinearInequality(ineq.names, (), GE if ineq.bound == 0 else EQ,
                                    Fraction(0) if ineq.bound == 0 else ineq.bound,
                                    ineq.bound_symbol if ineq.bound else None,
                                    ineq.label)
    den = 1
    for v in values:
        den = den * v.denominator // math.gcd(den, v.denominator)
    num = 0
    for v in values:
        num = math.gcd(num, abs(v.numerator * (den // v.denominator)))
    scale = Fraction(den, num) if num else Fraction(1)
    terms = tuple((m, c * scale) for m, c in ineq.terms)
    bound = ineq.bound * scale
    rel = ineq.relation
    sign = 1
    if rel == EQ:
        if terms and terms[0][1] < 0:
            sign = -1
    elif bound == 0:
        if rel == LE:
            sign = -1
    else:
        if rel == GE:
            sign = -1
    if sign == -1:
        terms = tuple((m, -c) for m, c in terms)
        bound = -bound
        if rel != EQ:
            rel = LE if rel == GE else GE
    symbol = ineq.bound_symbol if bound != 0 else None
    return LinearInequality(ineq.names, terms, rel, bound, symbol, ineq.label)


def _compare(lhs, rhs, relation: str, tol: float | None) -> bool:
    if tol is None:
        if relation == GE:
            return lhs >= rhs
        if relation == LE:
            return lhs <= rhs
        return lhs == rhs
    diff = float(lhs) - float(rhs)
    if relation == GE:
        return diff >= -tol
    if relation == LE:
        return diff <= tol
    return abs(diff) <= tol


def evaluate(ineq: LinearInequality, v: SetFunctionVector, budget=None):
    """Return ``(value, satisfied)`` of ``ineq`` on the set function ``v``.

    ``value`` is the left-hand side. Exact vectors (and exact budgets) are
    compared exactly; anything involving floats uses an absolute tolerance of
    ``FLOAT_TOL``.
    """
    if ineq.names != v.names:
        if not set(ineq.used_variables()) <= set(v.names):
            raise ValueError(
                f"dimension mismatch: inequality over {ineq.names}, vector over {v.names}"
            )
        ineq = ineq.remap(v.names)
    if ineq.bound_symbol == BUDGET:
        if budget is None:
            raise ValueError("inequality is bounded by C; a budget value is required")
        is_float = isinstance(budget, float)
        budget = budget if is_float else _frac(budget)
        rhs = ineq.bound * budget if not is_float else float(ineq.bound) * budget
    else:
        is_float = False
        rhs = ineq.bound
    exact = v.kind == "exact" and not is_float
    value = Fraction(0) if exact else 0.0
    for m, c in ineq.terms:
        h = v.values[m]
        if h is None:
            raise ValueError(
                f"vector has no value for subset {{{subset_label(m, v.names)}}}"
            )
        value += c * h if exact else float(c) * h
    ok = _compare(value, rhs, ineq.relation, None if exact else FLOAT_TOL)
    return value, ok


# text format ---------------------------------------------------------------

def _fmt_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _fmt_bound(ineq: LinearInequality) -> str:
    if ineq.bound_symbol == BUDGET:
        if ineq.bound == 1:
            return "C"
        return f"{_fmt_rational(ineq.bound)}*C"
    return _fmt_rational(ineq.bound)


def render_inequality(ineq: LinearInequality) -> str:
    """One-line text form, e.g. ``+1*H(A0) +1*H(B0) -1*H(A0,B0) >= 0``."""
    parts = []
    for m, c in ineq.terms:
        sign = "+" if c > 0 else "-"
        parts.append(f"{sign}{_fmt_rational(abs(c))}*H({subset_label(m, ineq.names)})")
    lhs = " ".join(parts) if parts else "0"
    return f"{lhs} {ineq.relation} {_fmt_bound(ineq)}"


def render_inequalities(ineqs: Sequence[LinearInequality]) -> str:
    if not ineqs:
        return ""
    names = ineqs[0].names
    lines = ["# vars: " + ",".join(names)]
    lines.extend(render_inequality(q.remap(names)) for q in ineqs)
    return "\n".join(lines) + "\n"


_TERM = re.compile(r"([+-])\s*(\d+(?:/\d+)?)\s*\*\s*H\(([^)]*)\)")
_REL = re.compile(r"\s(>=|<=|=)\s")


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 1, column: int = 1):
        super().__init__(f"line {line}, column {column}: {msg}")
        self.line = line
        self.column = column


def parse_inequality(text: str, names: Sequence[str] | None = None,
                     line: int = 1) -> LinearInequality:
    """Parse one line of the text format.

    Without ``names`` the ground set is the used variables in order of first
    appearance.
    """
    rel_match = _REL.search(text)
    if not rel_match:
        raise ParseError("missing relation token (>=, <=, =)", line, 1)
    lhs, rel, rhs = text[: rel_match.start()], rel_match.group(1), text[rel_match.end():]
    pos = 0
    parsed = []
    seen: list[str] = []
    stripped = lhs.strip()
    if stripped != "0":
        for m in _TERM.finditer(lhs):
            gap = lhs[pos:m.start()]
            if gap.strip():
                raise ParseError(f"unexpected text {gap.strip()!r}", line, pos + 1)
            subset = [s.strip() for s in m.group(3).split(",") if s.strip()]
            for s in subset:
                if s not in seen:
                    seen.append(s)
            coeff = Fraction(m.group(2))
            if m.group(1) == "-":
                coeff = -coeff
            parsed.append((subset, coeff))
            pos = m.end()
        if lhs[pos:].strip():
            raise ParseError(f"unexpected text {lhs[pos:].strip()!r}", line, pos + 1)
        if not parsed:
            raise ParseError("no terms found", line, 1)
    ground = tuple(names) if names is not None else tuple(seen)
    rhs = rhs.strip()
    symbol = None
    try:
        if rhs == "C":
            bound, symbol = Fraction(1), BUDGET
        elif rhs.endswith("*C"):
            bound, symbol = Fraction(rhs[:-2]), BUDGET
        else:
            bound = Fraction(rhs)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad bound {rhs!r}", line, rel_match.end() + 1) from None
    try:
        terms = tuple((mask_of(sub, ground), c) for sub, c in parsed)
    except KeyError as exc:
        raise ParseError(str(exc), line, 1) from None
    return LinearInequality(ground, terms, rel, bound, symbol)


def parse_inequalities(text: str, names: Sequence[str] | None = None) -> list[LinearInequality]:
    """Parse a multi-line text block; ``# vars: a,b,c`` fixes the ground set."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s:
            continue
        if s.startswith("#"):
            body = s[1:].strip()
            if body.startswith("vars:"):
                names = tuple(x.strip() for x in body[5:].split(",") if x.strip())
            continue
        out.append(parse_inequality(s, names, lineno))
    return out


# JSON mirror ---------------------------------------------------------------

def inequality_to_json(ineq: LinearInequality) -> dict:
    return {
        "n": ineq.n,
        "variables": list(ineq.names),
        "terms": [
            {"subset": [ineq.names[i] for i in bits(m)], "coeff": _fmt_rational(c)}
            for m, c in ineq.terms
        ],
        "relation": ineq.relation,
        "bound": _fmt_bound(ineq),
    }


def inequality_from_json(obj: Mapping) -> LinearInequality:
    names = tuple(obj["variables"])
    if "n" in obj and obj["n"] != len(names):
        raise ValueError("field n disagrees with the variable list")
    terms = tuple((mask_of(t["subset"], names), Fraction(str(t["coeff"])))
                  for t in obj["terms"])
    bound = str(obj.get("bound", "0"))
    symbol = None
    if bound == "C":
        b, symbol = Fraction(1), BUDGET
    elif bound.endswith("*C"):
        b, symbol = Fraction(bound[:-2]), BUDGET
    else:
        b = Fraction(bound)
    return LinearInequality(names, terms, obj.get("relation", GE), b, symbol)


def dumps_inequalities(ineqs: Sequence[LinearInequality]) -> str:
    return json.dumps([inequality_to_json(q) for q in ineqs], indent=2, sort_keys=True)
