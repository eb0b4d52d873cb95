"""Classical boxes, GHZ states with Fourier measurements, and their entropies.

A box is a table ``p(outcomes | settings)`` with one observable per party
per setting. Entropy vectors are indexed by the observables ``A0, A1, B0,
...`` of a Bell-type marginal scenario.
"""

from __future__ import annotations

import itertools
import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .causal import observable_names
from .core import SetFunctionVector, bits
from .shannon import _all_dyadic, shannon_entropy

__all__ = [
    "Box",
    "QuantumSystem",
    "box_entropy_vector",
    "box_p1",
    "box_p1N",
    "box_p2",
    "box_pc",
    "box_pm",
    "deterministic_box",
    "ghz_system",
    "mix",
    "parse_box_expression",
    "quantum_box",
]

_TOL = 1e-12


@dataclass(frozen=True)
class Box:
    """Conditional distributions ``p(a_1..a_N | x_1..x_N)``.

    ``table`` maps each settings tuple to a dict from outcome tuples to
    probabilities (Fractions, or floats for quantum boxes).
    """

    settings: tuple[int, ...]
    outcomes: tuple[int, ...]
    table: Mapping

    def __post_init__(self):
        settings = tuple(int(s) for s in self.settings)
        outcomes = tuple(int(o) for o in self.outcomes)
        if len(settings) != len(outcomes) or not settings:
            raise ValueError("settings and outcomes need one entry per party")
        if any(s < 1 for s in settings) or any(o < 1 for o in outcomes):
            raise ValueError("each party needs a setting and an outcome")
        table = {}
        for x in itertools.product(*(range(s) for s in settings)):
            dist = {tuple(a): p for a, p in dict(self.table.get(x, {})).items() if p}
            for a, p in dist.items():
                if len(a) != len(outcomes) or any(not 0 <= o < c for o, c in zip(a, outcomes)):
                    raise ValueError(f"outcome {a} does not fit the box")
                if p < 0:
                    raise ValueError("probabilities must be nonnegative")
            total = sum(dist.values())
            if isinstance(total, Fraction) or isinstance(total, int):
                ok = total == 1
            else:
                ok = abs(total - 1) < 1e-9
            if not ok:
                raise ValueError(f"p(.|{x}) sums to {total}")
            table[x] = dist
        object.__setattr__(self, "settings", settings)
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "table", table)

    @property
    def parties(self) -> int:
        return len(self.settings)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(p, (Fraction, int)) for d in self.table.values() for p in d.values())

    @property
    def names(self) -> tuple[str, ...]:
        return observable_names(self.settings)

    def marginal(self, choice: Mapping[int, int]) -> dict:
        """Joint outcome distribution of the parties in ``choice`` (party -> setting).

        Parties not in ``choice`` are measured with setting 0; for
        non-signalling boxes the result does not depend on that.
        """
        parties = sorted(choice)
        x = tuple(choice.get(p, 0) for p in range(self.parties))
        out: dict = {}
        for a, p in self.table[x].items():
            key = tuple(a[i] for i in parties)
            out[key] = out.get(key, 0) + p
        return out

    def is_nonsignalling(self) -> bool:
        for k in range(self.parties):
            for rest in itertools.combinations(range(self.parties), k):
                for xs in itertools.product(*(range(self.settings[p]) for p in rest)):
                    choice = dict(zip(rest, xs))
                    ref = None
                    for y in itertools.product(*(range(s) for s in self.settings)):
                        if any(y[p] != v for p, v in choice.items()):
                            continue
                        full = self.table[y]
                        m: dict = {}
                        for a, pr in full.items():
                            key = tuple(a[p] for p in rest)
                            m[key] = m.get(key, 0) + pr
                        if ref is None:
                            ref = m
                        elif any(abs(m.get(kk, 0) - ref.get(kk, 0)) > 1e-9
                                 for kk in set(m) | set(ref)):
                            return False
        return True

    def to_json(self) -> dict:
        def fmt(p):
            return p if isinstance(p, float) else f"{Fraction(p).numerator}/{Fraction(p).denominator}"

        entries = [{"settings": list(x), "outcomes": list(a), "p": fmt(p)}
                   for x, dist in sorted(self.table.items()) for a, p in sorted(dist.items())]
        return {"parties": self.parties, "settings": list(self.settings),
                "outcomes": list(self.outcomes), "entries": entries}

    @classmethod
    def from_json(cls, obj) -> "Box":
        if isinstance(obj, str):
            obj = json.loads(obj)
        table: dict = {}
        for e in obj["entries"]:
            p = e["p"]
            p = p if isinstance(p, float) else Fraction(str(p))
            table.setdefault(tuple(e["settings"]), {})[tuple(e["outcomes"])] = p
        return cls(tuple(obj["settings"]), tuple(obj["outcomes"]), table)


def _parity_box(settings, rule, outcomes=2) -> Box:
    """Uniform over outcome tuples whose sum mod ``outcomes`` equals ``rule(x)``."""
    n = len(settings)
    weight = Fraction(1, outcomes ** (n - 1))
    table = {}
    for x in itertools.product(*(range(s) for s in settings)):
        target = rule(x) % outcomes
        table[x] = {a: weight for a in itertools.product(range(outcomes), repeat=n)
                    if sum(a) % outcomes == target}
    return Box(tuple(settings), (outcomes,) * n, table)


def box_pm(m: int) -> Box:
    """Two parties, ``m`` settings: anticorrelated when ``x + y == m``, else correlated."""
    if m < 2:
        raise ValueError("box_pm needs m >= 2")
    return _parity_box((m, m), lambda x: int(x[0] + x[1] == m))


def box_pc(parties: int = 2, settings: int = 2, outcomes: int = 2) -> Box:
    """Classically correlated box: outcomes sum to 0 mod ``outcomes`` for every setting."""
    if parties < 2:
        raise ValueError("box_pc needs at least two parties")
    return _parity_box((settings,) * parties, lambda x: 0, outcomes)


def box_p1() -> Box:
    """Three parties: ``a + b + c = xyz`` mod 2."""
    return box_p1N(3)


def box_p2() -> Box:
    """Three parties: ``a + b + c = xy + xz + yz`` mod 2."""
    return _parity_box((2, 2, 2), lambda x: x[0] * x[1] + x[0] * x[2] + x[1] * x[2])


def box_p1N(n_parties: int) -> Box:
    """``N`` parties: outcome parity equals the product of the settings."""
    if n_parties < 3:
        raise ValueError("box_p1N needs at least three parties")
    return _parity_box((2,) * n_parties, lambda x: int(all(x)))


def deterministic_box(settings: Sequence[int], outcomes: Sequence[int], strategy) -> Box:
    """Local deterministic box; ``strategy[p][x]`` is party p's outcome for setting x."""
    table = {}
    for x in itertools.product(*(range(s) for s in settings)):
        a = tuple(strategy[p][x[p]] for p in range(len(settings)))
        table[x] = {a: Fraction(1)}
    return Box(tuple(settings), tuple(outcomes), table)


def mix(boxes: Sequence[Box], weights: Sequence) -> Box:
    """Convex combination of boxes with the same shape."""
    boxes = list(boxes)
    if not boxes or len(boxes) != len(weights):
        raise ValueError("need one weight per box")
    shape = (boxes[0].settings, boxes[0].outcomes)
    if any((b.settings, b.outcomes) != shape for b in boxes):
        raise ValueError("boxes have different shapes")
    weights = [w if isinstance(w, float) else Fraction(w) for w in weights]
    if any(w < 0 for w in weights):
        raise ValueError("weights must be nonnegative")
    total = sum(weights)
    if (abs(total - 1) > 1e-12) if isinstance(total, float) else total != 1:
        raise ValueError("weights must sum to 1")
    table = {}
    for x in boxes[0].table:
        acc: dict = {}
        for b, w in zip(boxes, weights):
            for a, p in b.table[x].items():
                acc[a] = acc.get(a, 0) + w * p
        table[x] = acc
    return Box(shape[0], shape[1], table)


_OBS = re.compile(r"^([A-Z])(\d+)$")


def _observable(name: str) -> tuple[int, int]:
    m = _OBS.match(name)
    if not m:
        raise ValueError(f"observable name {name!r} is not of the form <party letter><setting>")
    return ord(m.group(1)) - ord("A"), int(m.group(2))


def box_entropy_vector(b: Box, scenario) -> SetFunctionVector:
    """Entropies of every context of ``scenario``; other coordinates are None.

    Rational entropies are produced when every marginal probability is a
    power of one half.
    """
    names = scenario.ground
    obs = [_observable(nm) for nm in names]
    margs = {}
    for ctx in scenario.coords:
        choice: dict[int, int] = {}
        for i in bits(ctx):
            party, setting = obs[i]
            if party >= b.parties or setting >= b.settings[party]:
                raise ValueError(f"{names[i]} is not an observable of the box")
            if party in choice:
                raise ValueError(f"context {ctx} measures party {party} twice")
            choice[party] = setting
        margs[ctx] = b.marginal(choice)
    exact = b.is_exact and _all_dyadic(margs.values())
    values: list = [None] * (1 << len(names))
    values[0] = Fraction(0) if exact else 0.0
    for ctx, marg in margs.items():
        values[ctx] = shannon_entropy(marg.values(), exact)
    return SetFunctionVector(names, tuple(values), "exact" if exact else "float")


# quantum systems ---------------------------------------------------------------

@dataclass(frozen=True)
class QuantumSystem:
    """Pure state of ``N`` qudits and projective measurements per party and setting.

    ``measurements[p][x]`` is a ``d x d`` unitary whose columns are the
    measurement basis vectors of party ``p`` for setting ``x``.
    """

    n_parties: int
    d: int
    state: np.ndarray
    measurements: tuple

    def __post_init__(self):
        state = np.asarray(self.state, dtype=complex)
        if state.shape != (self.d ** self.n_parties,):
            raise ValueError("state has the wrong length")
        if abs(np.vdot(state, state).real - 1) > _TOL:
            raise ValueError("state is not normalized")
        if len(self.measurements) != self.n_parties:
            raise ValueError("need measurements for every party")
        for per_party in self.measurements:
            for u in per_party:
                u = np.asarray(u)
                if u.shape != (self.d, self.d) or not np.allclose(
                        u.conj().T @ u, np.eye(self.d), atol=_TOL):
                    raise ValueError("measurement basis is not orthonormal")
        object.__setattr__(self, "state", state)


def _fourier_basis(d: int, offset: float, sign: int) -> np.ndarray:
    j = np.arange(d)[:, None]
    k = np.arange(d)[None, :]
    return np.exp(sign * 2j * np.pi * j * (k + offset) / d) / math.sqrt(d)


def ghz_system(n_parties: int, d: int, convention: str = "symmetric") -> QuantumSystem:
    """GHZ state with two Fourier-type measurements per party.

    ``convention="symmetric"`` gives every party offsets 0 and 1/(2N) with
    phase sign +1, so the all-ones setting carries a total offset of 1/2.
    ``convention="alternating"`` gives even-indexed parties offsets 0 and 1/2
    with sign +1 and odd-indexed parties 1/4 and -1/4 with sign -1.
    """
    if not 2 <= d <= 6 or not 2 <= n_parties <= 4:
        raise ValueError("ghz_system supports 2 <= d <= 6 and 2 <= N <= 4")
    state = np.zeros(d ** n_parties, dtype=complex)
    for i in range(d):
        state[sum(i * d ** k for k in range(n_parties))] = 1 / math.sqrt(d)
    meas = []
    for p in range(n_parties):
        if convention == "symmetric":
            meas.append((_fourier_basis(d, 0.0, 1), _fourier_basis(d, 1 / (2 * n_parties), 1)))
        elif convention == "alternating":
            if p % 2 == 0:
                meas.append((_fourier_basis(d, 0.0, 1), _fourier_basis(d, 0.5, 1)))
            else:
                meas.append((_fourier_basis(d, 0.25, -1), _fourier_basis(d, -0.25, -1)))
        else:
            raise ValueError(f"unknown convention {convention!r}")
    return QuantumSystem(n_parties, d, state, tuple(meas))


def quantum_box(qs: QuantumSystem) -> Box:
    """Born-rule probabilities ``|<e_a1 x ... x e_aN | psi>|^2`` for every setting tuple."""
    n, d = qs.n_parties, qs.d
    psi = qs.state.reshape((d,) * n)
    settings = tuple(len(m) for m in qs.measurements)
    table = {}
    for x in itertools.product(*(range(s) for s in settings)):
        amp = psi
        for p in range(n):
            u = np.asarray(qs.measurements[p][x[p]])
            # contract axis p with the conjugated basis vectors
            amp = np.moveaxis(np.tensordot(u.conj().T, amp, axes=([1], [p])), 0, p)
        probs = np.abs(amp) ** 2
        table[x] = {a: float(probs[a]) for a in itertools.product(range(d), repeat=n)
                    if probs[a] > 1e-15}
    return Box(settings, (d,) * n, table)


# small expression language for the command line ---------------------------------

def parse_box_expression(expr: str) -> Box:
    """Build a box from names like ``pm3``, ``pc``, ``p1``, ``p2``, ``p1N4``, ``ghz3d2``.

    ``mix(x, y)`` mixes with equal weights; ``mix(x, y, 1/3)`` gives ``x`` weight 1/3.
    ``pc`` adopts the shape of the other argument of ``mix``.
    """
    expr = expr.replace(" ", "")
    if expr.startswith("mix(") and expr.endswith(")"):
        args = _split_args(expr[4:-1])
        if len(args) not in (2, 3):
            raise ValueError("mix takes two boxes and an optional weight")
        w = Fraction(args[2]) if len(args) == 3 else Fraction(1, 2)
        first = second = None
        if args[0] != "pc":
            first = parse_box_expression(args[0])
        if args[1] != "pc":
            second = parse_box_expression(args[1])
        ref = first or second
        if ref is None:
            raise ValueError("mix needs at least one box besides pc")
        pc = box_pc(ref.parties, ref.settings[0], ref.outcomes[0])
        first, second = first or pc, second or pc
        if not first.is_exact or not second.is_exact:
            w = float(w)
        return mix([first, second], [w, 1 - w])
    m = re.fullmatch(r"pm(\d+)", expr)
    if m:
        return box_pm(int(m.group(1)))
    m = re.fullmatch(r"pc(\d*)", expr)
    if m:
        return box_pc(int(m.group(1) or 2))
    if expr == "p1":
        return box_p1()
    if expr == "p2":
        return box_p2()
    m = re.fullmatch(r"p1N(\d+)", expr)
    if m:
        return box_p1N(int(m.group(1)))
    m = re.fullmatch(r"ghz(\d+)d(\d+)", expr)
    if m:
        return quantum_box(ghz_system(int(m.group(1)), int(m.group(2))))
    raise ValueError(f"unknown box {expr!r}")


def _split_args(s: str) -> list[str]:
    out, depth, cur = [], 0, ""
    for ch in s:
        if ch == "," and depth == 0:
            out.append(cur)
            cur = ""
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur += ch
    out.append(cur)
    return out
