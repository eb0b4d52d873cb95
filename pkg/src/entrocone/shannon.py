"""Elemental Shannon inequalities and entropy vectors of joint distributions."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .core import GE, LinearInequality, SetFunctionVector, bits, mask_of, normalize

__all__ = [
    "JointDistribution",
    "conditional_mutual_information",
    "default_names",
    "elemental_inequalities",
    "entropy_vector",
    "expand_to_elementals",
    "mi_expression",
    "monotonicity",
    "submodularity",
]


def default_names(n: int) -> tuple[str, ...]:
    return tuple(f"X{i + 1}" for i in range(n))


def _ground(n_or_names) -> tuple[str, ...]:
    if isinstance(n_or_names, int):
        if n_or_names < 1:
            raise ValueError("need at least one variable")
        return default_names(n_or_names)
    names = tuple(n_or_names)
    if not names:
        raise ValueError("need at least one variable")
    if len(set(names)) != len(names):
        raise ValueError("duplicate variable names")
    return names


def mi_expression(names, a: int, b: int, k: int = 0) -> dict[int, Fraction]:
    """Coefficients of ``I(A:B|K) = h(AK) + h(BK) - h(ABK) - h(K)``."""
    if a & b or a & k or b & k:
        raise ValueError("arguments of a conditional mutual information must be disjoint")
    coeffs: dict[int, Fraction] = {}
    for m, c in ((a | k, 1), (b | k, 1), (a | b | k, -1), (k, -1)):
        if m:
            coeffs[m] = coeffs.get(m, Fraction(0)) + c
    return {m: c for m, c in coeffs.items() if c}


def submodularity(names, a, b, k=0) -> LinearInequality:
    """``I(A:B|K) >= 0``; subsets given as masks or name collections."""
    names = tuple(names)
    a, b, k = (x if isinstance(x, int) else mask_of(x, names) for x in (a, b, k))
    ineq = LinearInequality(names, tuple(mi_expression(names, a, b, k).items()), GE)
    return ineq.with_label(_label_mi(names, a, b, k))


def monotonicity(names, big, small) -> LinearInequality:
    """``h(big) - h(small) >= 0`` for ``small`` contained in ``big``."""
    names = tuple(names)
    big, small = (x if isinstance(x, int) else mask_of(x, names) for x in (big, small))
    if small & ~big:
        raise ValueError("monotonicity needs small to be a subset of big")
    terms = [(big, Fraction(1))]
    if small:
        terms.append((small, Fraction(-1)))
    label = f"M[{_fmt(names, big)} >= {_fmt(names, small)}]"
    return LinearInequality(names, tuple(terms), GE).with_label(label)


def _fmt(names, mask):
    return "".join(names[i] for i in bits(mask)) or "{}"


def _label_mi(names, a, b, k):
    cond = f"|{_fmt(names, k)}" if k else ""
    return f"SM[{_fmt(names, a)}:{_fmt(names, b)}{cond}]"


def elemental_inequalities(n) -> list[LinearInequality]:
    """Minimal elemental description of the Shannon cone.

    ``n`` is a variable count (names ``X1..Xn``) or a sequence of names.
    Returns the ``n`` monotonicities ``h(N) - h(N - i) >= 0`` followed by the
    submodularities ``I(i:j|K) >= 0`` for ``i < j`` and ``K`` avoiding both,
    ordered by ``(i, j, K)``.
    """
    names = _ground(n)
    count = len(names)
    full = (1 << count) - 1
    out = [monotonicity(names, full, full & ~(1 << i)) for i in range(count)]
    for i, j in itertools.combinations(range(count), 2):
        rest = full & ~(1 << i) & ~(1 << j)
        sub = rest
        ks = []
        while True:  # enumerate subsets of rest
            ks.append(sub)
            if sub == 0:
                break
            sub = (sub - 1) & rest
        for k in sorted(ks):
            out.append(submodularity(names, 1 << i, 1 << j, k))
    return [normalize(q).with_label(q.label) for q in out]


def expand_to_elementals(names, ineq_kind: str, *args) -> list[tuple[LinearInequality, Fraction]]:
    """Write a generic Shannon inequality as a sum of elemental ones.

    ``ineq_kind`` is ``"SM"`` with arguments ``(A, B, K)`` for
    ``I(A:B|K) >= 0`` or ``"M"`` with ``(big, small)`` for
    ``h(big) >= h(small)``. The chain rule splits the conditional mutual
    information into single-variable terms; monotonicity steps are reduced to
    a full-set monotonicity plus submodularities.
    """
    names = tuple(names)
    full = (1 << len(names)) - 1
    masks = [x if isinstance(x, int) else mask_of(x, names) for x in args]
    terms: list[tuple[LinearInequality, Fraction]] = []

    def add_mi(a, b, k):
        # I(A:B|K) = sum_x sum_y I(x:y | K, earlier x's, earlier y's)
        seen_a = 0
        for x in bits(a):
            seen_b = 0
            for y in bits(b):
                i, j = sorted((x, y))
                terms.append((submodularity(names, 1 << i, 1 << j, k | seen_a | seen_b),
                              Fraction(1)))
                seen_b |= 1 << y
            seen_a |= 1 << x

    def add_cond_entropy(x, r):
        # h(x | R) = h(x | everything else) + I(x : rest | R)
        others = full & ~(1 << x)
        terms.append((monotonicity(names, full, others), Fraction(1)))
        rest = others & ~r
        if rest:
            add_mi(1 << x, rest, r)

    if ineq_kind == "SM":
        a, b, k = masks
        if a & b or a & k or b & k:
            raise ValueError("overlapping arguments")
        add_mi(a, b, k)
    elif ineq_kind == "M":
        big, small = masks
        if small & ~big:
            raise ValueError("small must be a subset of big")
        r = small
        for x in bits(big & ~small):
            add_cond_entropy(x, r)
            r |= 1 << x
    else:
        raise ValueError(f"unknown inequality kind {ineq_kind!r}")
    return [(normalize(q).with_label(q.label), c) for q, c in terms]


def conditional_mutual_information(v: SetFunctionVector, a, b, k=()):
    """``v(A u K) + v(B u K) - v(A u B u K) - v(K)`` for disjoint A, B, K."""
    a, b, k = (x if isinstance(x, int) else mask_of(x, v.names) for x in (a, b, k))
    if a & b or a & k or b & k:
        raise ValueError("arguments of a conditional mutual information must be disjoint")
    vals = v.values
    return vals[a | k] + vals[b | k] - vals[a | b | k] - vals[k]


# joint distributions ------------------------------------------------------

@dataclass(frozen=True)
class JointDistribution:
    """Probability table over named finite variables.

    ``probs`` maps outcome tuples (one entry per variable, values in
    ``range(card)``) to probabilities; missing outcomes have probability 0.
    """

    variables: tuple[tuple[str, int], ...]
    probs: Mapping[tuple, object]

    def __post_init__(self):
        variables = tuple((str(n), int(c)) for n, c in self.variables)
        object.__setattr__(self, "variables", variables)
        if not variables:
            raise ValueError("distribution needs at least one variable")
        if any(c < 2 for _, c in variables):
            raise ValueError("cardinalities must be at least 2")
        names = [n for n, _ in variables]
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names")
        probs = {}
        exact = True
        for outcome, p in dict(self.probs).items():
            outcome = tuple(int(o) for o in outcome)
            if len(outcome) != len(variables) or any(
                not 0 <= o < c for o, (_, c) in zip(outcome, variables)
            ):
                raise ValueError(f"outcome {outcome} does not fit the variables")
            if isinstance(p, float):
                exact = False
            elif not isinstance(p, Fraction):
                p = Fraction(p)
            if p < 0:
                raise ValueError("probabilities must be nonnegative")
            probs[outcome] = probs.get(outcome, 0) + p
        total = sum(probs.values())
        if exact:
            if total != 1:
                raise ValueError(f"probabilities sum to {total}, not 1")
        elif abs(float(total) - 1) > 1e-12:
            raise ValueError(f"probabilities sum to {float(total)}, not 1")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "_exact", exact)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.variables)

    @property
    def is_exact(self) -> bool:
        return self._exact

    @classmethod
    def from_function(cls, variables, fn) -> "JointDistribution":
        """Tabulate ``fn(outcome)`` over all outcomes."""
        variables = tuple(variables)
        probs = {}
        for outcome in itertools.product(*(range(c) for _, c in variables)):
            p = fn(outcome)
            if p:
                probs[outcome] = p
        return cls(variables, probs)

    def marginal(self, mask: int) -> dict[tuple, object]:
        idx = bits(mask)
        out: dict[tuple, object] = {}
        for outcome, p in self.probs.items():
            key = tuple(outcome[i] for i in idx)
            out[key] = out.get(key, 0) + p
        return out

    def to_json(self) -> dict:
        def fmt(p):
            return p if isinstance(p, float) else f"{p.numerator}/{p.denominator}"

        return {
            "variables": [{"name": n, "card": c} for n, c in self.variables],
            "probs": [{"outcome": list(o), "p": fmt(p)} for o, p in sorted(self.probs.items())],
        }

    @classmethod
    def from_json(cls, obj) -> "JointDistribution":
        if isinstance(obj, str):
            obj = json.loads(obj)
        variables = [(v["name"], v["card"]) for v in obj["variables"]]
        probs = {}
        for entry in obj["probs"]:
            p = entry["p"]
            probs[tuple(entry["outcome"])] = p if isinstance(p, float) else Fraction(str(p))
        return cls(variables, probs)


def dyadic_exponent(p: Fraction) -> int | None:
    """``k`` when ``p == 2**-k``, else None."""
    if p.numerator != 1:
        return None
    d = p.denominator
    if d & (d - 1):
        return None
    return d.bit_length() - 1


def shannon_entropy(probs: Iterable, exact: bool = False):
    """Base-2 entropy of a probability list; exact only for dyadic values."""
    if exact:
        total = Fraction(0)
        for p in probs:
            if p:
                total += p * dyadic_exponent(p)
        return total
    return -sum(float(p) * math.log2(float(p)) for p in probs if p)


def _all_dyadic(marginals) -> bool:
    for marg in marginals:
        for p in marg.values():
            if p and (not isinstance(p, Fraction) or dyadic_exponent(p) is None):
                return False
    return True


def entropy_vector(d: JointDistribution, exact: bool | None = None,
                   masks: Iterable[int] | None = None) -> SetFunctionVector:
    """Entropies ``H(X_S)`` in bits for every subset ``S`` of the variables.

    The result is float-typed in general. With ``exact=None`` (the default) a
    rational-typed vector is returned when every marginal probability is a
    power of one half, since the entropies are then rational. ``masks``
    restricts the computation to the given subsets (others are None).
    """
    n = len(d.variables)
    wanted = range(1 << n) if masks is None else sorted(set(masks) | {0})
    marginals = {m: d.marginal(m) for m in wanted if m}
    if exact is None:
        exact = d.is_exact and _all_dyadic(marginals.values())
    elif exact and not (d.is_exact and _all_dyadic(marginals.values())):
        raise ValueError("exact entropies need dyadic rational probabilities")
    values: list = [None] * (1 << n)
    values[0] = Fraction(0) if exact else 0.0
    for m, marg in marginals.items():
        values[m] = shannon_entropy(marg.values(), exact)
    return SetFunctionVector(d.names, tuple(values), "exact" if exact else "float")
