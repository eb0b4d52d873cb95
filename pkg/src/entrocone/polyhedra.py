"""Exact polyhedral machinery on integer constraint rows.

A :class:`ConeH` is a list of rows ``r`` meaning ``r . x >= 0`` plus rows
meaning ``r . x = 0`` over named coordinates. Entropy coordinates are subset
masks; two labels are special and never eliminated: ``"C"`` stands for the
shared-randomness budget and ``"1"`` for a constant, which turns affine
systems into cones.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .core import BUDGET, EQ, GE, LinearInequality, normalize
from .lp import cone_membership, rank

__all__ = [
    "CONST",
    "Certificate",
    "ConeH",
    "FMStats",
    "ResourceLimitError",
    "VRep",
    "extreme_rays",
    "fm_eliminate",
    "implies",
    "in_conic_hull",
    "is_facet",
    "project",
    "remove_redundant",
    "substitute_equalities",
]

CONST = "1"
FIXED = (BUDGET, CONST)
DEFAULT_MAX_INEQS = 2_000_000


class ResourceLimitError(RuntimeError):
    """A configured size cap was exceeded."""

    def __init__(self, msg: str, **counters):
        super().__init__(msg + "".join(f"; {k}={v}" for k, v in counters.items()))
        self.counters = counters


def primitive_row(row) -> tuple[int, ...]:
    """Scale a rational row to coprime integers, keeping its direction."""
    row = [v if isinstance(v, (int, Fraction)) else Fraction(v) for v in row]
    den = 1
    for v in row:
        if v and not isinstance(v, int):
            den = den * v.denominator // math.gcd(den, v.denominator)
    ints = [int(v * den) if v else 0 for v in row]
    g = 0
    for v in ints:
        if v:
            g = math.gcd(g, v)
    if g > 1:
        ints = [v // g for v in ints]
    return tuple(ints)


def _orient_eq(row):
    for v in row:
        if v:
            return row if v > 0 else tuple(-x for x in row)
    return row


def _coord_key(c):
    # masks first in ascending order, then other labels, then C, then 1
    if isinstance(c, int):
        return (0, c, "")
    if c == BUDGET:
        return (2, 0, "")
    if c == CONST:
        return (3, 0, "")
    return (1, 0, str(c))


@dataclass(frozen=True)
class ConeH:
    """Inequality description ``{x : A x >= 0, E x = 0}``.

    Rows are stored as coprime integer tuples, deduplicated and sorted, so two
    cones built from the same constraints compare equal.
    """

    coords: tuple
    inequalities: tuple = ()
    equalities: tuple = ()
    names: tuple = ()

    def __post_init__(self):
        coords = tuple(self.coords)
        if len(set(coords)) != len(coords):
            raise ValueError("duplicate coordinates")
        d = len(coords)
        ineqs = set()
        for r in self.inequalities:
            if len(r) != d:
                raise ValueError("row length does not match the coordinates")
            r = primitive_row(r)
            if any(r):
                ineqs.add(r)
        eqs = set()
        for r in self.equalities:
            if len(r) != d:
                raise ValueError("row length does not match the coordinates")
            r = _orient_eq(primitive_row(r))
            if any(r):
                eqs.add(r)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "inequalities", tuple(sorted(ineqs)))
        object.__setattr__(self, "equalities", tuple(sorted(eqs)))
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def index(self, coord) -> int:
        return self.coords.index(coord)

    def with_rows(self, inequalities=None, equalities=None, coords=None) -> "ConeH":
        return ConeH(self.coords if coords is None else coords,
                     self.inequalities if inequalities is None else inequalities,
                     self.equalities if equalities is None else equalities,
                     self.names)

    # conversions ------------------------------------------------------------

    @classmethod
    def from_inequalities(cls, ineqs: Sequence[LinearInequality], names=None,
                          coords=None) -> "ConeH":
        """Cone of the given inequalities.

        Coordinates default to every nonempty subset mask of the ground set,
        followed by ``C`` and ``1`` when some bound needs them.
        """
        ineqs = list(ineqs)
        if names is None:
            if not ineqs:
                raise ValueError("cannot infer the ground set from an empty list")
            names = ineqs[0].names
        names = tuple(names)
        ineqs = [q.remap(names) for q in ineqs]
        if coords is None:
            coords = list(range(1, 1 << len(names)))
            if any(q.bound_symbol == BUDGET for q in ineqs):
                coords.append(BUDGET)
            if any(q.bound != 0 and q.bound_symbol is None for q in ineqs):
                coords.append(CONST)
        coords = tuple(coords)
        pos = {c: i for i, c in enumerate(coords)}
        rows, eqs = [], []
        for q in ineqs:
            coeffs, extra = q.ge_form()
            row = [Fraction(0)] * len(coords)
            for m, c in coeffs.items():
                if m not in pos:
                    raise ValueError(f"coordinate {m} not available")
                row[pos[m]] += c
            if extra:
                key = BUDGET if q.bound_symbol == BUDGET else CONST
                if key not in pos:
                    raise ValueError(f"coordinate {key} not available")
                row[pos[key]] += extra
            (eqs if q.relation == EQ else rows).append(row)
        return cls(coords, rows, eqs, names)

    def row_to_inequality(self, row, relation=GE, label="") -> LinearInequality:
        terms = []
        bound, symbol = Fraction(0), None
        for c, v in zip(self.coords, row):
            if not v:
                continue
            if isinstance(c, int):
                terms.append((c, Fraction(v)))
            elif c in FIXED:
                if symbol is not None and symbol != (BUDGET if c == BUDGET else None):
                    raise ValueError("row mixes the budget and a constant")
                bound = -Fraction(v)
                symbol = BUDGET if c == BUDGET else None
            else:
                raise ValueError(f"coordinate {c!r} is not a subset coordinate")
        if not self.names:
            raise ValueError("cone has no variable names")
        q = LinearInequality(self.names, tuple(terms), relation, bound, symbol, label)
        return normalize(q).with_label(label)

    def to_inequalities(self) -> list[LinearInequality]:
        out = [self.row_to_inequality(r) for r in self.inequalities]
        out += [self.row_to_inequality(r, EQ) for r in self.equalities]
        return out

    def row_of(self, ineq: LinearInequality) -> tuple:
        """Row of an inequality (``>=`` orientation) in this cone's coordinates."""
        c = ConeH.from_inequalities([ineq], self.names, self.coords)
        if ineq.relation == EQ:
            return c.equalities[0] if c.equalities else tuple([0] * self.dim)
        return c.inequalities[0] if c.inequalities else tuple([0] * self.dim)

    def to_json(self) -> dict:
        return {
            "coords": [c if isinstance(c, str) else _mask_label(c, self.names) for c in self.coords],
            "names": list(self.names),
            "inequalities": [list(r) for r in self.inequalities],
            "equalities": [list(r) for r in self.equalities],
        }

    @classmethod
    def from_json(cls, obj) -> "ConeH":
        names = tuple(obj.get("names", ()))
        coords = []
        for c in obj["coords"]:
            if isinstance(c, int) or c in FIXED or not names:
                coords.append(c)
            else:
                from .core import mask_of
                coords.append(mask_of([s for s in c.split(",") if s], names))
        return cls(tuple(coords), obj.get("inequalities", ()), obj.get("equalities", ()), names)


def _mask_label(mask, names):
    from .core import subset_label
    return subset_label(mask, names)


@dataclass(frozen=True)
class VRep:
    """Extreme points and extreme directions over ``coords``.

    A pure cone has no points; its apex is the origin.
    """

    coords: tuple
    points: tuple = ()
    directions: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        object.__setattr__(self, "points", tuple(sorted(tuple(Fraction(v) for v in p) for p in self.points)))
        object.__setattr__(self, "directions", tuple(sorted(tuple(Fraction(v) for v in p) for p in self.directions)))

    def to_json(self) -> dict:
        return {
            "coords": [str(c) for c in self.coords],
            "points": [[str(v) for v in p] for p in self.points],
            "directions": [[str(v) for v in p] for p in self.directions],
        }

    @classmethod
    def from_json(cls, obj, names=()) -> "VRep":
        coords = []
        for c in obj["coords"]:
            if c in FIXED or not names:
                coords.append(int(c) if isinstance(c, str) and c.isdigit() else c)
            else:
                from .core import mask_of
                coords.append(mask_of([s for s in c.split(",") if s], names))
        return cls(tuple(coords), [[Fraction(v) for v in p] for p in obj.get("points", ())],
                   [[Fraction(v) for v in p] for p in obj.get("directions", ())])


@dataclass(frozen=True)
class Certificate:
    """Nonnegative combination of constraint rows equal to a target row.

    ``terms`` holds ``(label, row, multiplier, is_equality)``; equality rows
    may carry a multiplier of either sign.
    """

    coords: tuple
    target: tuple
    terms: tuple = ()
    names: tuple = ()

    def verify(self) -> bool:
        acc = [Fraction(0)] * len(self.coords)
        for _, row, mult, is_eq in self.terms:
            if mult < 0 and not is_eq:
                return False
            for i, v in enumerate(row):
                if v:
                    acc[i] += mult * v
        return acc == [Fraction(v) for v in self.target]

    @classmethod
    def from_inequalities(cls, terms: Iterable, target: LinearInequality,
                          names=None) -> "Certificate":
        """Build from ``(LinearInequality, multiplier)`` pairs.

        Inequalities are taken in their ``>=`` orientation.
        """
        terms = list(terms)
        names = tuple(names or target.names)
        all_ineqs = [q.remap(names) for q, _ in terms] + [target.remap(names)]
        used = sorted({m for q in all_ineqs for m, _ in q.terms if m})
        if any(q.bound_symbol == BUDGET for q in all_ineqs):
            used.append(BUDGET)
        if any(q.bound != 0 and q.bound_symbol is None for q in all_ineqs):
            used.append(CONST)
        cone = ConeH(tuple(used), (), (), names)
        out = []
        for q, mult in terms:
            out.append((q.label or str(q), cone.row_of(q), Fraction(mult), q.relation == EQ))
        return cls(cone.coords, cone.row_of(target), tuple(out), names)

    def __len__(self):
        return len(self.terms)


@dataclass
class FMStats:
    eliminated: int = 0
    max_intermediate: int = 0
    combinations: int = 0
    chernikov_rejected: int = 0
    lp_removed: int = 0
    history: list = field(default_factory=list)


# equality substitution ------------------------------------------------------

def substitute_equalities(c: ConeH, eliminable: Iterable | None = None):
    """Use the equalities to eliminate coordinates.

    Pivots are chosen among ``eliminable`` (all coordinates except ``C`` and
    ``1`` by default), in the order given. Returns ``(reduced_cone,
    substitution)`` where ``substitution`` maps each removed coordinate to the
    row (over the reduced coordinates) expressing it.
    """
    if eliminable is None:
        eliminable = [x for x in c.coords if x not in FIXED]
    elim = [x for x in eliminable if x in c.coords and x not in FIXED]
    if not c.equalities:
        return c, {}
    order = [c.index(x) for x in elim] + [i for i, x in enumerate(c.coords) if x not in elim]
    rows = [[Fraction(r[i]) for i in order] for r in c.equalities]
    from .lp import _rref
    pivots = _rref(rows, len(order))
    n_elim = len(elim)
    pivot_rows = []
    kept_eqs = []
    for r, p in enumerate(pivots):
        if p < n_elim:
            pivot_rows.append((p, rows[r]))
        else:
            kept_eqs.append(rows[r])
    for row in kept_eqs:
        nz = [order[i] for i, v in enumerate(row) if v]
        if nz and all(c.coords[i] == CONST for i in nz):
            raise ValueError("inconsistent equalities")
    removed = {order[p] for p, _ in pivot_rows}
    keep_idx = [i for i in range(c.dim) if i not in removed]
    inv = {orig: k for k, orig in enumerate(order)}
    new_ineqs = []
    for r in c.inequalities:
        row = [Fraction(v) for v in r]
        for p, prow in pivot_rows:
            f = row[order[p]]
            if f:
                for k, v in enumerate(prow):
                    if v:
                        row[order[k]] -= f * v
        new_ineqs.append([row[i] for i in keep_idx])
    new_eqs = []
    for row in kept_eqs:
        full = [Fraction(0)] * c.dim
        for k, v in enumerate(row):
            full[order[k]] = v
        new_eqs.append([full[i] for i in keep_idx])
    subst = {}
    for p, prow in pivot_rows:
        expr = [Fraction(0)] * len(keep_idx)
        for j, i in enumerate(keep_idx):
            v = prow[inv[i]]
            if v:
                expr[j] = -v
        subst[c.coords[order[p]]] = tuple(expr)
    coords = tuple(c.coords[i] for i in keep_idx)
    return ConeH(coords, new_ineqs, new_eqs, c.names), subst


# redundancy -----------------------------------------------------------------

def _implied_by(args):
    gens, eqs, target = args
    return cone_membership(gens, eqs, target).member


def remove_redundant(c: ConeH, workers: int = 1) -> ConeH:
    """Drop every inequality implied by the remaining ones.

    Rows are scanned from the last to the first in canonical order, so the
    earliest of several mutually implied rows survives. With ``workers > 1``
    rows that are not implied by all the others are identified in parallel
    first; the result does not depend on the worker count.
    """
    rows = list(c.inequalities)
    eqs = list(c.equalities)
    if len(rows) <= 1 and not eqs:
        return c
    alive = [True] * len(rows)
    certain = [False] * len(rows)
    if workers > 1 and len(rows) > 8:
        jobs = [(rows[:i] + rows[i + 1:], eqs, rows[i]) for i in range(len(rows))]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            implied = list(ex.map(_implied_by, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
        certain = [not v for v in implied]
    for i in reversed(range(len(rows))):
        if certain[i]:
            continue
        others = [rows[j] for j in range(len(rows)) if j != i and alive[j]]
        if cone_membership(others, eqs, rows[i]).member:
            alive[i] = False
    return c.with_rows([r for r, a in zip(rows, alive) if a])


# Fourier-Motzkin ------------------------------------------------------------

def _popcount_rows(anc):
    return np.bitwise_count(anc).sum(axis=1)


def fm_eliminate(c: ConeH, drop: Iterable, prune_every: int = 1,
                 max_ineqs: int = DEFAULT_MAX_INEQS, workers: int = 1,
                 stats: FMStats | None = None) -> ConeH:
    """Project out the coordinates in ``drop``.

    Equalities touching dropped coordinates are substituted first. Each step
    eliminates the coordinate with the fewest positive-negative pairs,
    discards combinations with too many ancestors (Chernikov's rule) and
    duplicates, and every ``prune_every`` steps (and at the end) removes
    LP-redundant rows. Raises :class:`ResourceLimitError` when the number of
    rows exceeds ``max_ineqs``.
    """
    stats = stats if stats is not None else FMStats()
    drop = [x for x in drop if x in c.coords]
    if any(x in FIXED for x in drop):
        raise ValueError("the budget and constant coordinates cannot be eliminated")
    if not drop:
        return c
    c, _ = substitute_equalities(c, drop)
    eqs = c.equalities
    coords = list(c.coords)
    remaining = [x for x in drop if x in coords]
    rows = np.array(c.inequalities, dtype=np.int64).reshape(len(c.inequalities), len(coords))
    n0 = len(rows)
    words = max(1, (n0 + 63) // 64)
    anc = np.zeros((n0, words), dtype=np.uint64)
    for i in range(n0):
        anc[i, i // 64] = np.uint64(1) << np.uint64(i % 64)
    steps = 0
    since_prune = 0
    while remaining:
        # choose the coordinate with the fewest pairings
        best = None
        for x in remaining:
            j = coords.index(x)
            col = rows[:, j] if len(rows) else np.zeros(0, dtype=np.int64)
            p = int((col > 0).sum())
            n = int((col < 0).sum())
            key = (p * n, coords.index(x))
            if best is None or key < best[0]:
                best = (key, x, j)
        _, x, j = best
        remaining.remove(x)
        steps += 1
        col = rows[:, j]
        pos = np.flatnonzero(col > 0)
        neg = np.flatnonzero(col < 0)
        zero = np.flatnonzero(col == 0)
        parts = [rows[zero]]
        ancs = [anc[zero]]
        if len(pos) and len(neg):
            big = int(np.abs(rows).max())
            if big > 2**30:
                raise ResourceLimitError("coefficient growth exceeds the integer range",
                                         max_coefficient=big)
            P, N = rows[pos], rows[neg]
            cp, cn = P[:, j], -N[:, j]
            AP, AN = anc[pos], anc[neg]
            chunk = max(1, 2_000_000 // max(1, len(neg) * words))
            for s in range(0, len(pos), chunk):
                sl = slice(s, s + chunk)
                union = AP[sl, None, :] | AN[None, :, :]
                counts = np.bitwise_count(union).sum(axis=2)
                ok = counts <= steps + 1
                stats.chernikov_rejected += int((~ok).sum())
                pi, ni = np.nonzero(ok)
                if not len(pi):
                    continue
                pi_abs = pi + s
                new = P[pi_abs] * cn[ni, None] + N[ni] * cp[pi_abs, None]
                g = np.gcd.reduce(np.abs(new), axis=1)
                g[g == 0] = 1
                new //= g[:, None]
                parts.append(new)
                ancs.append(union[pi, ni])
                stats.combinations += len(pi)
                if sum(len(p) for p in parts) > max_ineqs:
                    raise ResourceLimitError(
                        "intermediate inequality count exceeded",
                        rows=sum(len(p) for p in parts), max_ineqs=max_ineqs,
                        eliminated=steps)
        rows = np.concatenate(parts) if parts else rows[:0]
        anc = np.concatenate(ancs) if ancs else anc[:0]
        rows = np.delete(rows, j, axis=1)
        coords.pop(j)
        eqs = tuple(e[:j] + e[j + 1:] for e in eqs)
        # drop zero rows and duplicates, preferring copies with few ancestors
        nonzero = np.any(rows != 0, axis=1)
        rows, anc = rows[nonzero], anc[nonzero]
        if len(rows):
            order = np.argsort(_popcount_rows(anc), kind="stable")
            rows, anc = rows[order], anc[order]
            _, first = np.unique(rows, axis=0, return_index=True)
            first.sort()
            rows, anc = rows[first], anc[first]
        stats.max_intermediate = max(stats.max_intermediate, len(rows))
        since_prune += 1
        if since_prune >= prune_every or not remaining:
            since_prune = 0
            before = len(rows)
            cone = ConeH(tuple(coords), [tuple(map(int, r)) for r in rows], eqs, c.names)
            pruned = remove_redundant(cone, workers)
            keep = set(pruned.inequalities)
            mask = [tuple(map(int, r)) in keep for r in rows]
            rows, anc = rows[mask], anc[mask]
            stats.lp_removed += before - len(rows)
        stats.eliminated += 1
        stats.history.append((x, len(rows)))
    return ConeH(tuple(coords), [tuple(map(int, r)) for r in rows], eqs, c.names)


def project(c: ConeH, keep: Iterable, **kwargs) -> ConeH:
    """Project onto the coordinates in ``keep`` (plus ``C`` and ``1``)."""
    keep = set(keep) | set(FIXED)
    drop = [x for x in c.coords if x not in keep]
    return fm_eliminate(c, drop, **kwargs)


# implication ----------------------------------------------------------------

def _system(c: ConeH):
    rows = list(c.inequalities)
    labels = [f"row{i}" for i in range(len(rows))]
    if CONST in c.coords:
        unit = [0] * c.dim
        unit[c.index(CONST)] = 1
        rows.append(tuple(unit))
        labels.append("1 >= 0")
    return rows, labels


def implies(c, target, names=None) -> Certificate | None:
    """Certificate that ``target`` follows from ``c``, or None.

    ``c`` is a :class:`ConeH` or a list of :class:`LinearInequality`; the
    target is a :class:`LinearInequality` or a row over the cone's
    coordinates.
    """
    labelled = None
    if not isinstance(c, ConeH):
        labelled = list(c)
        ground = names or (target.names if isinstance(target, LinearInequality) else None)
        extra = [target] if isinstance(target, LinearInequality) else []
        c0 = ConeH.from_inequalities(labelled + extra, ground)
        c = c0
    if isinstance(target, LinearInequality):
        if target.relation == EQ:
            raise ValueError("test the two directions of an equality separately")
        trow = c.row_of(target)
    else:
        trow = tuple(target)
    if labelled is not None:
        rows = [c.row_of(q) for q in labelled if q.relation != EQ]
        labels = [q.label or str(q) for q in labelled if q.relation != EQ]
        eqs = [c.row_of(q) for q in labelled if q.relation == EQ]
        eq_labels = [q.label or str(q) for q in labelled if q.relation == EQ]
        if CONST in c.coords:
            unit = [0] * c.dim
            unit[c.index(CONST)] = 1
            rows.append(tuple(unit))
            labels.append("1 >= 0")
    else:
        rows, labels = _system(c)
        eqs = list(c.equalities)
        eq_labels = [f"eq{i}" for i in range(len(eqs))]
    res = cone_membership(rows, eqs, trow)
    if not res.member:
        return None
    terms = [(lab, tuple(r), y, False) for lab, r, y in zip(labels, rows, res.multipliers) if y]
    terms += [(lab, tuple(r), z, True) for lab, r, z in zip(eq_labels, eqs, res.eq_multipliers) if z]
    cert = Certificate(c.coords, trow, tuple(terms), c.names)
    if not cert.verify():
        raise RuntimeError("implication certificate failed verification")
    return cert


def in_conic_hull(generators: Sequence[Sequence], target: Sequence):
    """Nonnegative rational coefficients reproducing ``target``, or None."""
    res = cone_membership(generators, [], target)
    return list(res.multipliers) if res.member else None


# double description ---------------------------------------------------------

def _dot(a, b):
    return sum(x * y for x, y in zip(a, b) if x and y)


def _prim(v):
    g = 0
    for x in v:
        g = math.gcd(g, x)
    return tuple(x // g for x in v) if g > 1 else tuple(v)


def extreme_rays(c: ConeH, max_dim: int = 64) -> VRep:
    """Extreme points and directions by the double description method.

    Cones without a ``1`` coordinate yield only directions (lineality
    vectors are reported in both orientations). With a ``1`` coordinate the
    system is read as affine: rays with positive constant part become points.
    """
    d = c.dim
    if d > max_dim:
        raise ResourceLimitError("dimension exceeds the ray-enumeration cap",
                                 dim=d, max_dim=max_dim)
    constraints = []
    for e in c.equalities:
        constraints.append(tuple(e))
        constraints.append(tuple(-v for v in e))
    constraints += [tuple(r) for r in c.inequalities]
    if CONST in c.coords:
        unit = [0] * d
        unit[c.index(CONST)] = 1
        constraints.insert(0, tuple(unit))
    lineal = [tuple(1 if i == k else 0 for i in range(d)) for k in range(d)]
    rays: list[tuple] = []
    zsets: list[int] = []
    for ci, a in enumerate(constraints):
        bit = 1 << ci
        hit = next((l for l in lineal if _dot(a, l) != 0), None)
        if hit is not None:
            al = _dot(a, hit)
            if al < 0:
                hit = tuple(-v for v in hit)
                al = -al
            new_lineal = []
            for l in lineal:
                if l is hit or l == hit or l == tuple(-v for v in hit):
                    continue
                s = _dot(a, l)
                new_lineal.append(_prim(tuple(al * x - s * y for x, y in zip(l, hit))) if s else l)
            lineal = new_lineal
            new_rays = []
            for r in rays:
                s = _dot(a, r)
                new_rays.append(_prim(tuple(al * x - s * y for x, y in zip(r, hit))) if s else r)
            rays = new_rays
            zsets = [z | bit for z in zsets]
            rays.append(_prim(hit))
            zsets.append(bit - 1)  # tight on every earlier constraint
            continue
        vals = [_dot(a, r) for r in rays]
        pos = [i for i, v in enumerate(vals) if v > 0]
        neg = [i for i, v in enumerate(vals) if v < 0]
        zer = [i for i, v in enumerate(vals) if v == 0]
        need = d - len(lineal) - 2
        new_rays = [rays[i] for i in pos] + [rays[i] for i in zer]
        new_z = [zsets[i] for i in pos] + [zsets[i] | bit for i in zer]
        for p in pos:
            for n in neg:
                common = zsets[p] & zsets[n]
                if common.bit_count() < need:
                    continue
                if any(k != p and k != n and (common & zsets[k]) == common
                       for k in range(len(rays))):
                    continue
                vp, vn = vals[p], vals[n]
                r = _prim(tuple(vp * y - vn * x for x, y in zip(rays[p], rays[n])))
                new_rays.append(r)
                new_z.append(common | bit)
        rays, zsets = new_rays, new_z
    rays = sorted(set(rays))
    dirs = set(rays) | set(lineal) | {tuple(-v for v in l) for l in lineal}
    if CONST not in c.coords:
        return VRep(c.coords, (), sorted(dirs))
    k = c.index(CONST)
    coords = tuple(x for i, x in enumerate(c.coords) if i != k)
    points, directions = set(), set()
    for r in dirs:
        rest = tuple(v for i, v in enumerate(r) if i != k)
        if r[k] > 0:
            points.add(tuple(Fraction(v, r[k]) for v in rest))
        elif r[k] == 0:
            directions.add(rest)
    return VRep(coords, sorted(points), sorted(directions))


# facet test -----------------------------------------------------------------

def _facet_row(v: VRep, ineq):
    """``(coeffs, constant)`` with the meaning ``coeffs . x + constant >= 0``."""
    if isinstance(ineq, LinearInequality):
        if ineq.relation == EQ:
            raise ValueError("facet test needs an inequality")
        coeffs, extra = ineq.ge_form()
        pos = {c: i for i, c in enumerate(v.coords)}
        row = [Fraction(0)] * len(v.coords)
        for m, val in coeffs.items():
            if m not in pos:
                raise ValueError(f"coordinate {m} not in the V-representation")
            row[pos[m]] = val
        const = Fraction(0)
        if extra:
            if ineq.bound_symbol == BUDGET:
                row[pos[BUDGET]] += extra
            else:
                const = extra
        return row, const
    coeffs, const = ineq
    return [Fraction(x) for x in coeffs], Fraction(const)


def is_facet(v: VRep, ineq, ambient_dim: int | None = None) -> tuple[bool, int]:
    """Whether ``ineq`` induces a facet of the set generated by ``v``.

    ``ineq`` is a :class:`LinearInequality` over subset coordinates or a pair
    ``(coeffs, constant)`` meaning ``coeffs . x + constant >= 0``. Returns
    ``(facet, face_dim)`` with ``face_dim == -1`` for the empty face.
    """
    a, const = _facet_row(v, ineq)
    points = [list(p) for p in v.points]
    if not points:
        points = [[Fraction(0)] * len(v.coords)]
    sat_pts = []
    for p in points:
        val = _dot(a, p) + const
        if val < 0:
            raise ValueError("a point of the set violates the inequality")
        if val == 0:
            sat_pts.append(p)
    sat_dirs = []
    for u in v.directions:
        val = _dot(a, u)
        if val < 0:
            raise ValueError("a direction of the set violates the inequality")
        if val == 0:
            sat_dirs.append(list(u))
    if ambient_dim is None:
        p1 = points[0]
        ambient_dim = rank([[x - y for x, y in zip(p, p1)] for p in points[1:]]
                           + [list(u) for u in v.directions])
    if not sat_pts:
        return False, -1
    p1 = sat_pts[0]
    face = rank([[x - y for x, y in zip(p, p1)] for p in sat_pts[1:]] + sat_dirs)
    return face == ambient_dim - 1, face
