"""Möbius transforms between event probabilities and the maps D and D^T.

For ``n`` binary variables, ``p(A) = Pr[X_A = 0 and X_{A^c} = 1]`` and
``q(A) = Pr[X_A = 0]``; ``q`` is the superset sum of ``p``. The map
``(D s)_A = s_empty - s_A`` sends valid ``q`` vectors into the Shannon cone,
so ``D^T`` turns every Shannon-type inequality into an inequality on ``q``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .core import GE, LinearInequality, SetFunctionVector, bits, normalize
from .shannon import JointDistribution

__all__ = [
    "map_D",
    "map_D_transpose",
    "moebius_forward",
    "moebius_inverse",
    "negative_entries",
    "p_vector",
    "q_vector",
    "s_membership",
    "mermin_q_inequality",
]


def _superset_zeta(vals: list, n: int, sign: int) -> list:
    vals = list(vals)
    for i in range(n):
        bit = 1 << i
        for m in range(1 << n):
            if not m & bit:
                vals[m] = vals[m] + sign * vals[m | bit]
    return vals


def moebius_forward(p: SetFunctionVector) -> SetFunctionVector:
    """``q(A) = sum over B containing A of p(B)`` by the fast zeta transform."""
    if not p.is_complete:
        raise ValueError("p vector must have every entry")
    return SetFunctionVector(p.names, tuple(_superset_zeta(p.values, p.n, 1)), p.kind)


def moebius_inverse(q: SetFunctionVector) -> SetFunctionVector:
    """Inverse transform; negative entries mean ``q`` was not a valid q vector.

    See :func:`negative_entries`.
    """
    if not q.is_complete:
        raise ValueError("q vector must have every entry")
    return SetFunctionVector(q.names, tuple(_superset_zeta(q.values, q.n, -1)), q.kind)


def negative_entries(v: SetFunctionVector) -> list[int]:
    return [m for m, x in enumerate(v.values) if x is not None and x < 0]


def _binary(d: JointDistribution):
    if any(c != 2 for _, c in d.variables):
        raise ValueError("p and q vectors are defined for binary variables only")


def p_vector(d: JointDistribution) -> SetFunctionVector:
    """``p(A)``: probability that exactly the variables in ``A`` are 0."""
    _binary(d)
    n = len(d.variables)
    vals: list = [Fraction(0) if d.is_exact else 0.0] * (1 << n)
    for outcome, prob in d.probs.items():
        mask = sum(1 << i for i, o in enumerate(outcome) if o == 0)
        vals[mask] += prob
    return SetFunctionVector(d.names, tuple(vals), "exact" if d.is_exact else "float")


def q_vector(d: JointDistribution) -> SetFunctionVector:
    """``q(A) = Pr[X_A = 0]``."""
    return moebius_forward(p_vector(d))


def map_D(s: SetFunctionVector) -> SetFunctionVector:
    """``(D s)_A = s_empty - s_A``."""
    base = s.values[0]
    return SetFunctionVector(s.names, tuple(base - v for v in s.values), s.kind)


def map_D_transpose(f: LinearInequality) -> LinearInequality:
    """Pull a homogeneous inequality back along ``D``.

    ``(D^T f)_empty`` is the sum of all coefficients at nonempty sets and
    ``(D^T f)_A = -f_A`` otherwise; the relation is kept.
    """
    if f.bound != 0:
        raise ValueError("only homogeneous inequalities can be translated")
    coeffs = f.coefficients
    total = sum((c for m, c in coeffs.items() if m), Fraction(0))
    terms = [(m, -c) for m, c in coeffs.items() if m]
    if total:
        terms.append((0, total))
    q = LinearInequality(f.names, tuple(terms), f.relation)
    return normalize(q).with_label(f.label)


def s_membership(q: SetFunctionVector):
    """Check nonnegativity, decrease and supermodularity of ``q``.

    Returns ``(True, None)`` or ``(False, description)`` for the first
    violated constraint.
    """
    n = q.n
    vals = q.values
    tol = 0 if q.kind == "exact" else 1e-12
    for m, v in enumerate(vals):
        if v < -tol:
            return False, f"negative at {{{_lbl(q, m)}}}"
    for m in range(1 << n):
        for i in range(n):
            if not m >> i & 1 and vals[m | 1 << i] > vals[m] + tol:
                return False, f"increasing: q({_lbl(q, m | 1 << i)}) > q({_lbl(q, m)})"
    for i in range(n):
        for j in range(i + 1, n):
            bi, bj = 1 << i, 1 << j
            for k in range(1 << n):
                if k & (bi | bj):
                    continue
                lhs = vals[k | bi | bj] + vals[k]
                rhs = vals[k | bi] + vals[k | bj]
                if lhs < rhs - tol:
                    return False, (f"not supermodular at {_lbl(q, bi)},{_lbl(q, bj)}"
                                   f" given {{{_lbl(q, k)}}}")
    return True, None


def _lbl(v, m):
    return ",".join(v.names[i] for i in bits(m))


def mermin_q_inequality(names: Sequence[str] = ("A0", "A1", "B0", "B1", "C0", "C1")) -> LinearInequality:
    """Mermin's inequality as a homogeneous inequality on ``q``.

    With outcome 0 read as +1, the correlator of three observables is
    ``<XYZ> = 8 q_XYZ - 4 (q_XY + q_XZ + q_YZ) + 2 (q_X + q_Y + q_Z) - q_empty``
    and the inequality ``<A1B0C0> + <A0B1C0> + <A0B0C1> - <A1B1C1> <= 2``
    becomes ``2 q_empty - (...) >= 0`` after homogenizing with ``q_empty = 1``.
    """
    names = tuple(names)
    a0, a1, b0, b1, c0, c1 = (1 << i for i in range(6))
    coeffs: dict[int, Fraction] = {0: Fraction(2)}

    def add_correlator(x, y, z, sign):
        parts = [(x | y | z, 8), (x | y, -4), (x | z, -4), (y | z, -4),
                 (x, 2), (y, 2), (z, 2), (0, -1)]
        for m, c in parts:
            coeffs[m] = coeffs.get(m, Fraction(0)) - sign * c

    add_correlator(a1, b0, c0, 1)
    add_correlator(a0, b1, c0, 1)
    add_correlator(a0, b0, c1, 1)
    add_correlator(a1, b1, c1, -1)
    q = LinearInequality(names, tuple(coeffs.items()), GE)
    return normalize(q).with_label("Mermin (q form)")
