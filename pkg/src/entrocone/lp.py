"""Exact cone-membership linear programs.

The basic question answered here is the Farkas alternative for a finite
family of generator rows ``g_k`` (used with nonnegative weights), equality
rows ``e_j`` (used with arbitrary sign) and a target row ``t``:

* either ``t = sum_k y_k g_k + sum_j z_j e_j`` with ``y >= 0``;
* or there is ``x`` with ``g_k . x >= 0``, ``e_j . x = 0`` and ``t . x < 0``.

Both outcomes are returned with an exact rational witness that has been
checked by exact arithmetic. A floating-point LP (HiGHS through scipy) is
used as a guide to find a candidate witness quickly; whenever the candidate
cannot be confirmed exactly the dense rational simplex with Bland's rule is
run instead, so answers never depend on floating-point tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

try:  # scipy is only a guide; the exact solver works without it
    from scipy.optimize import linprog
except ImportError:  # pragma: no cover
    linprog = None

__all__ = [
    "MembershipResult",
    "LPStats",
    "STATS",
    "cone_membership",
    "exact_cone_membership",
    "solve_linear_system",
    "rank",
]


@dataclass
class LPStats:
    calls: int = 0
    exact_fallbacks: int = 0

    def reset(self):
        self.calls = 0
        self.exact_fallbacks = 0


STATS = LPStats()


@dataclass(frozen=True)
class MembershipResult:
    """Outcome of a membership query.

    ``member`` tells which side of the alternative holds. For members,
    ``multipliers`` (one per generator, all >= 0) and ``eq_multipliers`` (one
    per equality row) reproduce the target. Otherwise ``separator`` is a
    rational vector certifying non-membership.
    """

    member: bool
    multipliers: tuple = ()
    eq_multipliers: tuple = ()
    separator: tuple | None = None


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b) if x and y)


# exact linear algebra -------------------------------------------------------

def _rref(rows: list[list[Fraction]], ncols: int):
    """In-place reduced row echelon form; returns the pivot columns."""
    pivots = []
    r = 0
    nrows = len(rows)
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        pr = rows[r]
        inv = 1 / pr[c]
        if inv != 1:
            rows[r] = pr = [v * inv for v in pr]
        for i in range(nrows):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                ri = rows[i]
                rows[i] = [a - f * b for a, b in zip(ri, pr)]
        pivots.append(c)
        r += 1
    return pivots


def rank(vectors: Sequence[Sequence]) -> int:
    """Exact rank of a list of rational vectors."""
    vecs = [list(map(Fraction, v)) for v in vectors if any(v)]
    if not vecs:
        return 0
    return len(_rref(vecs, len(vecs[0])))


def solve_linear_system(matrix: Sequence[Sequence], rhs: Sequence):
    """One exact solution of ``matrix @ x = rhs`` (free variables set to 0).

    Returns None when the system is inconsistent.
    """
    m = len(matrix)
    if m == 0:
        return []
    n = len(matrix[0])
    rows = [[Fraction(v) for v in matrix[i]] + [Fraction(rhs[i])] for i in range(m)]
    pivots = _rref(rows, n)
    for row in rows[len(pivots):]:
        if row[n] != 0:
            return None
    x = [Fraction(0)] * n
    for r, c in enumerate(pivots):
        x[c] = rows[r][n]
    return x


# exact simplex --------------------------------------------------------------

def exact_cone_membership(gens, eqs, target) -> MembershipResult:
    """Phase-one simplex over the rationals with Bland's rule."""
    STATS.calls += 1
    gens = [list(map(Fraction, g)) for g in gens]
    eqs = [list(map(Fraction, e)) for e in eqs]
    t = list(map(Fraction, target))
    d = len(t)
    cols = gens + eqs + [[-v for v in e] for e in eqs]
    ng, ne = len(gens), len(eqs)
    nstruct = len(cols)
    sign = [1 if t[i] >= 0 else -1 for i in range(d)]
    # tableau rows: structural coefficients, artificial identity, rhs
    tab = []
    for i in range(d):
        s = sign[i]
        row = [s * col[i] for col in cols]
        row += [Fraction(1) if j == i else Fraction(0) for j in range(d)]
        row.append(s * t[i])
        tab.append(row)
    ncols = nstruct + d
    basis = [nstruct + i for i in range(d)]
    # reduced costs of phase one: c_j - sum over rows
    cost = [Fraction(0)] * nstruct + [Fraction(1)] * d
    rc = cost[:] + [Fraction(0)]
    for row in tab:
        for j in range(ncols + 1):
            if row[j]:
                rc[j] -= row[j]
    while True:
        enter = next((j for j in range(ncols) if rc[j] < 0), None)
        if enter is None:
            break
        best = None
        for i, row in enumerate(tab):
            a = row[enter]
            if a > 0:
                ratio = row[-1] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:  # unbounded cannot happen in phase one
            raise RuntimeError("phase-one simplex unbounded")
        r = best[1]
        prow = tab[r]
        piv = prow[enter]
        if piv != 1:
            prow = [v / piv for v in prow]
            tab[r] = prow
        for i in range(d):
            if i != r and tab[i][enter] != 0:
                f = tab[i][enter]
                tab[i] = [a - f * b for a, b in zip(tab[i], prow)]
        f = rc[enter]
        rc = [a - f * b for a, b in zip(rc, prow)]
        basis[r] = enter
    objective = -rc[-1]
    if objective == 0:
        x = [Fraction(0)] * ncols
        for i, b in enumerate(basis):
            x[b] = tab[i][-1]
        y = tuple(x[:ng])
        z = tuple(x[ng + j] - x[ng + ne + j] for j in range(ne))
        res = MembershipResult(True, y, z, None)
        if not _verify_member(gens, eqs, t, res):
            raise RuntimeError("exact simplex produced an invalid combination")
        return res
    pi = [1 - rc[nstruct + i] for i in range(d)]
    sep = tuple(-sign[i] * pi[i] for i in range(d))
    sep = _primitive(sep)
    res = MembershipResult(False, separator=sep)
    if not _verify_separator(gens, eqs, t, sep):
        raise RuntimeError("exact simplex produced an invalid separator")
    return res


# verification ---------------------------------------------------------------

def _primitive(vec):
    """Scale a rational vector to coprime integers (as Fractions)."""
    den = 1
    for v in vec:
        v = Fraction(v)
        den = den * v.denominator // math.gcd(den, v.denominator)
    ints = [int(Fraction(v) * den) for v in vec]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    g = g or 1
    return tuple(Fraction(v // g) for v in ints)


def _int_matrix(rows, d):
    """Integer numpy matrix for integral rows (object dtype if large)."""
    big = max((abs(int(v)) for r in rows for v in r), default=0)
    dtype = np.int64 if big < 2**40 else object
    mat = np.zeros((len(rows), d), dtype=dtype)
    for i, r in enumerate(rows):
        mat[i, :] = [int(v) for v in r]
    return mat


def _matvec(mat, vec):
    """Exact ``mat @ vec`` for integer matrices and integer vectors."""
    big = max((abs(v) for v in vec), default=0)
    if mat.dtype != object and big < 2**20:
        return mat @ np.asarray(vec, dtype=np.int64)
    return mat.astype(object) @ np.asarray(vec, dtype=object)


def _verify_member(gens, eqs, t, res: MembershipResult) -> bool:
    if any(y < 0 for y in res.multipliers):
        return False
    acc = [Fraction(0)] * len(t)
    for y, g in zip(res.multipliers, gens):
        if y:
            for i, v in enumerate(g):
                if v:
                    acc[i] += y * v
    for z, e in zip(res.eq_multipliers, eqs):
        if z:
            for i, v in enumerate(e):
                if v:
                    acc[i] += z * v
    return acc == [Fraction(v) for v in t]


def _verify_separator(gens, eqs, t, x) -> bool:
    if _dot(t, x) >= 0:
        return False
    if any(_dot(g, x) < 0 for g in gens):
        return False
    return all(_dot(e, x) == 0 for e in eqs)


class _IntProblem:
    """Integral copy of a membership problem for fast exact checks."""

    def __init__(self, gens, eqs, t):
        self.d = len(t)
        self.gscale = [_row_scale(g) for g in gens]
        self.escale = [_row_scale(e) for e in eqs]
        self.tscale = _row_scale(t)
        self.G = _int_matrix([[v * s for v in g] for g, s in zip(gens, self.gscale)], self.d)
        self.E = _int_matrix([[v * s for v in e] for e, s in zip(eqs, self.escale)], self.d)
        self.t = [int(v * self.tscale) for v in t]

    def check_separator(self, x) -> bool:
        xi = [int(v) for v in x]
        if sum(a * b for a, b in zip(self.t, xi)) >= 0:
            return False
        if len(self.G) and (_matvec(self.G, xi) < 0).any():
            return False
        if len(self.E) and (_matvec(self.E, xi) != 0).any():
            return False
        return True

    def check_member(self, y, z) -> bool:
        """``y``, ``z`` are multipliers for the scaled rows and target."""
        if any(v < 0 for v in y):
            return False
        den = 1
        for v in list(y) + list(z):
            den = den * v.denominator // math.gcd(den, v.denominator)
        acc = np.zeros(self.d, dtype=object)
        for mat, mult in ((self.G, y), (self.E, z)):
            idx = [k for k, v in enumerate(mult) if v]
            if idx:
                w = np.asarray([int(mult[k] * den) for k in idx], dtype=object)
                acc = acc + w @ mat[idx].astype(object)
        return all(int(a) == v * den for a, v in zip(acc, self.t))

    def unscale(self, y, z):
        """Multipliers for the original rows from those of the scaled rows."""
        ts = self.tscale
        return (tuple(v * s / ts for v, s in zip(y, self.gscale)),
                tuple(v * s / ts for v, s in zip(z, self.escale)))


def _row_scale(row) -> int:
    den = 1
    for v in row:
        if not isinstance(v, int):
            v = Fraction(v)
            den = den * v.denominator // math.gcd(den, v.denominator)
    return den


# float-guided path ----------------------------------------------------------

def _rationalize(values, limit=10**6):
    return [Fraction(float(v)).limit_denominator(limit) for v in values]


def _recover_member(prob: _IntProblem, y_float, z_float):
    """Exact multipliers (for the scaled rows) from a float solution."""
    support = [k for k, v in enumerate(y_float) if v > 1e-9]
    y = [Fraction(0)] * len(y_float)
    for k, v in zip(support, _rationalize([y_float[k] for k in support])):
        y[k] = v
    z = _rationalize(z_float)
    if prob.check_member(y, z):
        return y, z
    # solve exactly on the support columns
    cols = [prob.G[k] for k in support] + [prob.E[j] for j in range(len(prob.E))]
    mat = [[int(c[i]) for c in cols] for i in range(prob.d)]
    sol = solve_linear_system(mat, prob.t)
    if sol is None:
        return None
    y = [Fraction(0)] * len(y_float)
    for k, v in zip(support, sol[: len(support)]):
        y[k] = v
    z = sol[len(support):]
    return (y, z) if prob.check_member(y, z) else None


def _recover_separator(prob: _IntProblem, x_float):
    x = _primitive(_rationalize(x_float, 10**4))
    if any(x) and prob.check_separator(x):
        return x
    # active-set solve at the returned vertex of the boxed LP
    d = prob.d
    active = []
    if len(prob.G):
        slack = prob.G.astype(float) @ x_float
        active += [list(map(int, prob.G[k])) for k in np.flatnonzero(np.abs(slack) <= 1e-8)]
    active += [list(map(int, e)) for e in prob.E]
    rhs = [0] * len(active)
    for i, v in enumerate(x_float):
        if abs(abs(v) - 1) <= 1e-8:
            row = [0] * d
            row[i] = 1
            active.append(row)
            rhs.append(1 if v > 0 else -1)
    sol = solve_linear_system(active, rhs) if active else None
    if sol is None:
        return None
    x = _primitive(sol)
    return x if any(x) and prob.check_separator(x) else None


def _float_membership(gens, eqs, t):
    prob = _IntProblem(gens, eqs, t)
    d = prob.d
    ng, ne = len(prob.G), len(prob.E)
    G = prob.G.astype(float)
    E = prob.E.astype(float)
    b = np.asarray(prob.t, dtype=float)
    if ng + ne:
        A = np.hstack([G.T, E.T]) if ne else G.T
        bounds = [(0, None)] * ng + [(None, None)] * ne
        res = linprog(np.zeros(ng + ne), A_eq=A, b_eq=b, bounds=bounds, method="highs-ds")
        status = res.status
    else:
        status = 2
    if status == 0:
        got = _recover_member(prob, res.x[:ng], res.x[ng:])
        if got is None:
            return None
        y, z = prob.unscale(*got)
        return MembershipResult(True, y, z)
    if status != 2:
        return None
    # infeasible: look for a separating vector in the unit box
    sep = linprog(b, A_ub=-G if ng else None, b_ub=np.zeros(ng) if ng else None,
                  A_eq=E if ne else None, b_eq=np.zeros(ne) if ne else None,
                  bounds=[(-1, 1)] * d, method="highs-ds")
    if sep.status != 0 or sep.fun >= -1e-9:
        return None
    x = _recover_separator(prob, sep.x)
    return None if x is None else MembershipResult(False, separator=x)


def cone_membership(gens: Sequence[Sequence], eqs: Sequence[Sequence],
                    target: Sequence, exact: bool = False) -> MembershipResult:
    """Decide whether ``target`` lies in ``cone(gens) + span(eqs)``.

    With ``exact=True`` the rational simplex is used directly.
    """
    gens = [tuple(g) for g in gens]
    eqs = [tuple(e) for e in eqs]
    target = tuple(target)
    if not any(target):
        return MembershipResult(True, tuple(Fraction(0) for _ in gens),
                                tuple(Fraction(0) for _ in eqs))
    if not exact and linprog is not None:
        STATS.calls += 1
        res = _float_membership(gens, eqs, target)
        if res is not None:
            return res
        STATS.exact_fallbacks += 1
        STATS.calls -= 1
    return exact_cone_membership(gens, eqs, target)
