"""Command line front end.

Every subcommand prints its result (text or JSON) and a run manifest to
stderr. Exit codes: 0 success, 2 for a negative answer (violated, not
implied, not a facet), 1 for errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .catalog import FAMILIES, named
from .causal import HIDDEN, CausalStructure, bell_structure, triangle_structure
from .core import (BUDGET, LinearInequality, ParseError, SetFunctionVector, evaluate,
                   inequality_from_json, inequality_to_json, parse_inequalities,
                   render_inequality)
from .distributions import Box, box_entropy_vector, parse_box_expression
from .lp import STATS as LP_STATS
from .marginal import MarginalScenario, bell_scenario, project_scenario
from .moebius import map_D_transpose
from .polyhedra import (ConeH, FMStats, ResourceLimitError, VRep, extreme_rays, implies,
                        is_facet)
from .shannon import JointDistribution, elemental_inequalities, entropy_vector

EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE = 0, 1, 2


class CliError(Exception):
    pass


class Run:
    """Collects the manifest of one invocation."""

    def __init__(self, command: str, params: dict):
        self.command = command
        self.params = params
        self.inputs: dict[str, str] = {}
        self.fm = FMStats()
        self.start = time.perf_counter()
        LP_STATS.reset()

    def read(self, path: str) -> str:
        text = Path(path).read_text()
        self.inputs[path] = hashlib.sha256(text.encode()).hexdigest()
        return text

    def manifest(self) -> dict:
        return {
            "command": self.command,
            "parameters": self.params,
            "input_hashes": self.inputs,
            "version": __version__,
            "wall_time_s": round(time.perf_counter() - self.start, 3),
            "max_intermediate_inequalities": self.fm.max_intermediate,
            "lp_calls": LP_STATS.calls,
        }


# input resolution -------------------------------------------------------------

def _family_members(tokens):
    fam = tokens[0]
    if fam.endswith("_entropic"):
        fam = fam[: -len("_entropic")]
    if fam not in FAMILIES:
        return None
    params = [int(t) for t in tokens[1:]]
    return named(fam, *params)


def _load_inequalities(tokens, run: Run) -> list[LinearInequality]:
    """A text/JSON inequality file, or a catalog family with parameters."""
    if len(tokens) == 1 and Path(tokens[0]).is_file():
        text = run.read(tokens[0])
        if tokens[0].endswith(".json"):
            obj = json.loads(text)
            obj = obj if isinstance(obj, list) else [obj]
            return [inequality_from_json(o) for o in obj]
        return parse_inequalities(text)
    members = _family_members(tokens)
    if members is None:
        raise CliError(f"{' '.join(tokens)!r} is neither a file nor a catalog family")
    return [m.inequality for m in members]


def _load_json(path: str, run: Run):
    return json.loads(run.read(path))


def _parse_budget(text):
    if text is None:
        return None
    return BUDGET if text == BUDGET else Fraction(text)


_PRESETS = {"bell22": (2, 2), "bell23": (2, 3), "bell33": (3, 3), "bell34": (3, 4),
            "bell222": (2, 2, 2)}


def _scenario_and_structure(args, run: Run):
    budget = _parse_budget(args.budget)
    if args.scenario in _PRESETS:
        sett = _PRESETS[args.scenario]
        scenario = bell_scenario(sett)
        structure = bell_structure(sett)
    elif args.scenario == "triangle":
        scenario = MarginalScenario(("A", "B", "C"), frozenset({0b111}))
        structure = triangle_structure(bounded=budget is not None)
        budget = None if budget == BUDGET else budget
    else:
        scenario = MarginalScenario.from_json(_load_json(args.scenario, run))
        structure = None
    if args.structure:
        structure = CausalStructure.from_json(_load_json(args.structure, run))
    if budget is not None:
        if structure is None or HIDDEN not in structure.ground:
            raise CliError("--budget needs a structure with a source variable L")
        mask = 1 << structure.ground.index(HIDDEN)
        structure = CausalStructure(structure.ground, structure.ci_constraints,
                                    structure.entropy_bounds + ((mask, budget),),
                                    structure.hidden)
    return scenario, structure


def _load_cone(path: str, run: Run) -> ConeH:
    obj = _load_json(path, run)
    if "variables" in obj:
        return CausalStructure.from_json(obj).cone()
    return ConeH.from_json(obj)


def _load_vector(args, run: Run, scenario_names) -> SetFunctionVector:
    if args.box:
        if Path(args.box).is_file():
            box = Box.from_json(_load_json(args.box, run))
        else:
            box = parse_box_expression(args.box)
        settings = list(box.settings)
        return box_entropy_vector(box, bell_scenario(settings))
    if args.dist:
        return entropy_vector(JointDistribution.from_json(_load_json(args.dist, run)))
    raise CliError("evaluate needs --box or --dist")


# output -------------------------------------------------------------------------

def _emit(args, text_lines, payload):
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True, default=str))
    else:
        for line in text_lines:
            print(line)


# subcommands ------------------------------------------------------------------------

def cmd_elemental(args, run):
    ineqs = elemental_inequalities(args.n)
    _emit(args, [render_inequality(q) for q in ineqs],
          {"count": len(ineqs), "inequalities": [inequality_to_json(q) for q in ineqs]})
    return EXIT_OK


def _fm_kwargs(args, run):
    kw = {"stats": run.fm, "workers": args.workers or (os.cpu_count() or 1)}
    if args.prune_every is not None:
        kw["prune_every"] = args.prune_every
    if args.max_ineqs is not None:
        kw["max_ineqs"] = args.max_ineqs
    return kw


def cmd_project(args, run):
    scenario, structure = _scenario_and_structure(args, run)
    kw = _fm_kwargs(args, run)
    stats = kw.pop("stats")
    classes = project_scenario(structure, scenario, args.strategy, stats=stats, **kw)
    lines = []
    for c in classes:
        tag = "trivial" if c.trivial else "nontrivial"
        lines.append(f"{render_inequality(c.representative)}    # orbit {c.orbit_size}, {tag}")
    _emit(args, lines, {"classes": [c.to_json() for c in classes]})
    return EXIT_OK


def cmd_rays(args, run):
    cone = _load_cone(args.cone, run)
    v = extreme_rays(cone)
    lines = [" ".join(str(x) for x in p) for p in v.points]
    lines += [" ".join(str(x) for x in d) for d in v.directions]
    _emit(args, lines, v.to_json())
    return EXIT_OK


def cmd_facets(args, run):
    obj = _load_json(args.vrep, run)
    if "inequalities" in obj or "variables" in obj:
        cone = CausalStructure.from_json(obj).cone() if "variables" in obj else ConeH.from_json(obj)
        v, names = extreme_rays(cone), cone.names
    else:
        names = tuple(obj.get("names", ()))
        v = VRep.from_json(obj, names)
    ineqs = _load_inequalities(args.inequality, run)
    results = []
    for q in ineqs:
        q = q.remap(names) if names else q
        facet, dim = is_facet(v, q)
        results.append((q, facet, dim))
    _emit(args, [f"{render_inequality(q)}    # facet={f} face_dim={d}" for q, f, d in results],
          {"results": [{"inequality": render_inequality(q), "facet": f, "face_dim": d}
                       for q, f, d in results]})
    return EXIT_OK if all(f for _, f, _ in results) else EXIT_NEGATIVE


def cmd_translate(args, run):
    ineqs = _load_inequalities(args.inequality, run)
    out = [map_D_transpose(q) for q in ineqs]
    _emit(args, [render_inequality(q) for q in out],
          {"translated": [inequality_to_json(q) for q in out]})
    return EXIT_OK


def cmd_prove(args, run):
    cone = _load_cone(args.cone, run)
    ineqs = _load_inequalities(args.inequality, run)
    lines, payload, all_ok = [], [], True
    for q in ineqs:
        cert = implies(cone, q.remap(cone.names))
        all_ok &= cert is not None
        if cert is None:
            lines.append(f"{render_inequality(q)}    # not implied")
            payload.append({"inequality": render_inequality(q), "implied": False})
            continue
        lines.append(f"{render_inequality(q)}    # implied, {len(cert)} terms")
        lines.extend(f"    {mult} * [{label}]" for label, _, mult, _ in cert.terms)
        payload.append({"inequality": render_inequality(q), "implied": True,
                        "certificate": [{"label": label, "multiplier": str(mult)}
                                        for label, _, mult, _ in cert.terms]})
    _emit(args, lines, {"results": payload})
    return EXIT_OK if all_ok else EXIT_NEGATIVE


def cmd_evaluate(args, run):
    ineqs = _load_inequalities(args.inequality, run)
    budget = _parse_budget(args.budget)
    budget = None if budget == BUDGET else budget
    lines, payload, all_ok = [], [], True
    for q in ineqs:
        v = _load_vector(args, run, q.names)
        value, ok = evaluate(q, v, budget)
        all_ok &= bool(ok)
        lines.append(f"{q.label or render_inequality(q)}: value {value} "
                     f"({'satisfied' if ok else 'violated'})")
        payload.append({"inequality": render_inequality(q), "value": str(value),
                        "satisfied": bool(ok)})
    _emit(args, lines, {"results": payload})
    return EXIT_OK if all_ok else EXIT_NEGATIVE


def cmd_catalog(args, run):
    if not args.family:
        lines = [f"{name} ({arity} parameter{'s' if arity != 1 else ''})"
                 for name, (_, arity) in sorted(FAMILIES.items())]
        _emit(args, lines, {"families": {k: a for k, (_, a) in sorted(FAMILIES.items())}})
        return EXIT_OK
    members = _family_members(args.family)
    if members is None:
        raise CliError(f"unknown family {args.family[0]!r}")
    _emit(args, [render_inequality(m.inequality) for m in members],
          {"members": [{"family": m.family, "parameters": list(m.parameters),
                        "description": m.description,
                        "inequality": inequality_to_json(m.inequality)} for m in members]})
    return EXIT_OK


# parser -------------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    # usage errors are failures (1); exit code 2 is reserved for negative answers
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="entrocone", description=__doc__.splitlines()[0])
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--manifest", help="write the run manifest to this file instead of stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("elemental", help="elemental Shannon inequalities for n variables")
    s.add_argument("n", type=int)
    s.set_defaults(func=cmd_elemental)

    s = sub.add_parser("project", help="entropic description of a marginal scenario")
    s.add_argument("scenario", help="preset (bell22, bell23, bell33, bell34, bell222, "
                                    "triangle) or scenario JSON file")
    s.add_argument("--structure", help="causal structure JSON file")
    s.add_argument("--strategy", choices=("direct", "pieces"), default="direct")
    s.add_argument("--budget", help="bound on H(L): a rational or C")
    s.add_argument("--prune-every", type=int)
    s.add_argument("--max-ineqs", type=int)
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_project)

    s = sub.add_parser("rays", help="extreme rays of a cone")
    s.add_argument("cone", help="cone or causal structure JSON file")
    s.set_defaults(func=cmd_rays)

    s = sub.add_parser("facets", help="facet test against a V-representation")
    s.add_argument("vrep", help="VRep JSON file (or a cone JSON file)")
    s.add_argument("inequality", nargs="+", help="inequality file or catalog family")
    s.set_defaults(func=cmd_facets)

    s = sub.add_parser("translate", help="pull an entropic inequality back to q coordinates")
    s.add_argument("inequality", nargs="+")
    s.set_defaults(func=cmd_translate)

    s = sub.add_parser("prove", help="certificate that a cone implies an inequality")
    s.add_argument("cone", help="cone or causal structure JSON file")
    s.add_argument("inequality", nargs="+")
    s.set_defaults(func=cmd_prove)

    s = sub.add_parser("evaluate", help="evaluate inequalities on a box or distribution")
    s.add_argument("inequality", nargs="+")
    s.add_argument("--box", help="box JSON file or expression such as mix(pm3,pc)")
    s.add_argument("--dist", help="joint distribution JSON file")
    s.add_argument("--budget", help="numeric value substituted for C")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("catalog", help="list families or print one member")
    s.add_argument("family", nargs="*")
    s.set_defaults(func=cmd_catalog)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "manifest")}
    run = Run(args.command, params)
    try:
        code = args.func(args, run)
    except (CliError, ParseError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_ERROR
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        run.params["counters"] = exc.counters
        code = EXIT_ERROR
    manifest = json.dumps(dict(run.manifest(), exit_code=code), sort_keys=True, default=str)
    if args.manifest:
        Path(args.manifest).write_text(manifest + "\n")
    else:
        print(manifest, file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
