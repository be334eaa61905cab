"""Command-line entry point: ``nsclosure <group> <command> [options]``."""
from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from fractions import Fraction
from pathlib import Path

from .box import (
    Box,
    InvalidMixtureError,
    OutsidePolytopeError,
    chsh_values,
    ch_value,
    correlators,
    make_correlated_nl,
    make_edge_box,
    make_extremal_nl,
    make_isotropic,
    make_local_deterministic,
    make_maximally_mixed,
    make_pr,
    make_section_box,
    validate,
)
from .geometry import (
    ParameterError,
    facet_orbit,
    facet_q,
    ns_polytope,
    positivity_facets,
    r_b_polytope,
    tilted_ch,
    uffink_lhs,
)
from .wiring import ArityError, Wiring, and_wiring, apply_wiring, distillation_wiring, identity_wiring

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARAMETER = 3
EXIT_MALFORMED = 4
EXIT_SELFTEST = 5

EPILOG = """\
exit codes:
  0  success (a search that finds violations still succeeds)
  2  usage error: unknown command, flag or config key
  3  parameter out of range (eps, S, n, grid, ...)
  4  malformed input: bad rational, box spec, JSON or config file
  5  selftest failure

rationals are written as integers or num/den; decimal floats are rejected.
boxes are given as pr | mixed | local:MNST | nl:MNS | correlated:EPS |
isotropic:EPS | section:EPS,GAMMA | edge:MNSABC:EPS | @file.json
"""


class MalformedInput(Exception):
    """Bad user input that is not a usage error."""


_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")


def rational(text: str) -> Fraction:
    text = str(text).strip()
    if not _RATIONAL.match(text):
        raise MalformedInput(f"{text!r} is not an exact rational (use num/den)")
    try:
        return Fraction(text)
    except ZeroDivisionError:
        raise MalformedInput(f"{text!r} has a zero denominator") from None


def _bits(text: str, k: int) -> list[int]:
    if len(text) != k or set(text) - {"0", "1"}:
        raise MalformedInput(f"expected {k} bits, got {text!r}")
    return [int(c) for c in text]


def parse_box(spec: str) -> Box:
    spec = spec.strip()
    if spec.startswith("@"):
        try:
            return Box.from_json(json.loads(Path(spec[1:]).read_text()))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise MalformedInput(f"cannot read box from {spec[1:]}: {exc}") from None
    kind, _, arg = spec.partition(":")
    if kind == "pr" and not arg:
        return make_pr()
    if kind == "mixed" and not arg:
        return make_maximally_mixed()
    if kind == "local":
        return make_local_deterministic(*_bits(arg, 4))
    if kind == "nl":
        return make_extremal_nl(*_bits(arg, 3))
    if kind == "correlated":
        return make_correlated_nl(rational(arg))
    if kind == "isotropic":
        return make_isotropic(rational(arg))
    if kind == "section":
        parts = arg.split(",")
        if len(parts) != 2:
            raise MalformedInput(f"section box needs EPS,GAMMA, got {arg!r}")
        return make_section_box(rational(parts[0]), rational(parts[1]))
    if kind == "edge":
        bits, _, eps = arg.partition(":")
        return make_edge_box(*_bits(bits, 6), rational(eps))
    raise MalformedInput(f"unknown box spec {spec!r}")


def parse_wiring(spec: str) -> Wiring:
    if spec.startswith("@"):
        try:
            return Wiring.from_json(json.loads(Path(spec[1:]).read_text()))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise MalformedInput(f"cannot read wiring from {spec[1:]}: {exc}") from None
    name, _, arg = spec.partition(":")
    if name == "identity":
        return identity_wiring()
    if name == "distill":
        return distillation_wiring()
    if name == "and":
        try:
            return and_wiring(int(arg or 2))
        except ValueError:
            raise MalformedInput(f"bad AND arity {arg!r}") from None
    raise MalformedInput(f"unknown wiring {spec!r} (identity | distill | and:N | @file.json)")


def read_config(path: str) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise MalformedInput(f"cannot read config {path}: {exc}") from None
    out = {}
    for no, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise MalformedInput(f"{path}:{no}: expected key = value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _write(path, payload) -> None:
    if path is None:
        return
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path}")


def _box_summary(b: Box) -> dict:
    c = correlators(b)
    rep = validate(b)
    return {
        "box": b.to_json(),
        "correlators": {k: str(v) for k, v in zip(("E00", "E01", "E10", "E11", "mA0", "mA1", "mB0", "mB1"),
                                                  c.as_tuple())},
        "chsh": [str(v) for v in chsh_values(b)],
        "ch": str(ch_value(b)),
        "uffink_lhs": str(uffink_lhs(b)),
        "valid": rep.ok,
    }


# commands

def cmd_box_show(args) -> int:
    b = parse_box(args.box)
    s = _box_summary(b)
    print("p(ab|xy), index 8x+4y+2a+b:", " ".join(s["box"]["p"]))
    print("correlators:", ", ".join(f"{k}={v}" for k, v in s["correlators"].items()))
    print("CHSH forms:", " ".join(s["chsh"]), "| CH:", s["ch"], "| Uffink lhs:", s["uffink_lhs"])
    print("valid:", s["valid"])
    _write(args.out, s)
    return EXIT_OK


def cmd_wire_apply(args) -> int:
    w = parse_wiring(args.wiring)
    boxes = [parse_box(s) for s in args.box]
    if len(boxes) == 1 and w.n > 1:
        boxes = boxes * w.n
    out = apply_wiring(w, boxes)
    s = _box_summary(out)
    print("output:", " ".join(s["box"]["p"]))
    print("CHSH forms:", " ".join(s["chsh"]))
    _write(args.out, {"wiring": w.to_json(), "inputs": [b.to_json() for b in boxes], **s})
    return EXIT_OK


def cmd_distill_iterate(args) -> int:
    from .lab.edges import distill_edge_out

    edge = _bits(args.edge, 6)
    traj = distill_edge_out(*edge, args.eps, args.k, S=args.S)
    for i, e in enumerate(traj.eps):
        print(f"step {i}: eps={e}  (1-eps={float(1 - e):.6g})")
    print("exit step:", traj.exit_step, "for S =", traj.S)
    _write(args.out, traj.to_json())
    return EXIT_OK


def cmd_escape_and(args) -> int:
    from .lab.escape import and_escape_box, and_escape_condition

    res = and_escape_box(args.n, args.eps, with_lp=args.lp)
    lhs, violated = and_escape_condition(args.n, args.eps)
    print(f"q = {res.q}; I(q) on the {args.n}-copy AND box = {res.value}; violated: {res.violated}")
    print(f"escape condition lhs = {lhs} (violated: {violated}); CHSH not increased: {res.chsh_not_increased}")
    if res.separator is not None:
        print("inside R_b:", res.separator.inside)
    _write(args.out, {**res.to_json(), "condition_lhs": str(lhs)})
    return EXIT_OK


def cmd_hull_iterate(args) -> int:
    from .lab.hull import iterate_hull

    rep = iterate_hull(args.eps, args.n_max)
    for s in rep.stages:
        print(f"stage n={s.n}: {s.vertex_count} vertices, {s.outside}/{s.generated} new boxes outside")
    _write(args.out, rep.to_json())
    return EXIT_OK


def cmd_search_two_box(args) -> int:
    from .lab.search import two_box_closure_search

    if args.polytope == "ns":
        poly, facets = ns_polytope(), positivity_facets()
    else:
        S = args.S
        if not 2 < S < 4:
            raise ParameterError(f"S must lie in (2, 4), got {S}")
        poly = r_b_polytope(S)
        facets = facet_orbit(tilted_ch(facet_q(S / 4))) + positivity_facets()
    rep = two_box_closure_search(poly, facets, budget=args.budget, workers=args.workers,
                                 max_witnesses=args.max_witnesses)
    c = rep.counters
    print(f"status: {rep.status}; cells {c['cells_scanned']}/{c['cells_total']}; "
          f"wirings evaluated {c['wirings_evaluated']}; violating wirings {c['violating_wirings']}")
    for t in rep.tracked:
        if t["violated"]:
            print(f"tracked {t['wiring']} on pair {t['pair']}: {t['facet']} = {t['value']}")
    print(f"elapsed {rep.elapsed:.1f}s")
    _write(args.out, rep.to_json())
    return EXIT_OK


def cmd_uffink_scan(args) -> int:
    from .lab.uffink import uffink_escape_scan

    if args.grid < 1 or args.iters < 1:
        raise ParameterError("grid and iters must be positive")
    m = uffink_escape_scan(args.grid, args.iters, workers=args.workers)
    for k in range(1, args.iters + 1):
        print(f"first escape at iteration {k}: {m.count(k)} nodes")
    if args.out:
        m.write_csv(args.out)
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_field_export(args) -> int:
    from .dynamics import MapStep, and_section, distillation_section, protocol_by_name, vector_field, write_field_csv

    if args.grid < 1:
        raise ParameterError("grid must be positive")
    section = {"distill": distillation_section, "and": and_section}[args.section]()
    rows = vector_field(MapStep(protocol_by_name(args.protocol)), section, args.grid, workers=args.workers)
    print(f"{len(rows)} nodes; max residual {max(r[4] for r in rows):.3g}")
    if args.out:
        write_field_csv(rows, args.out)
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    results = run_selftest(args.seed)
    for name, ok in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return EXIT_OK if all(ok for _, ok in results) else EXIT_SELFTEST


# parser

def _parser() -> tuple[argparse.ArgumentParser, dict]:
    root = argparse.ArgumentParser(prog="nsclosure", description="Closure of non-signaling box sets under wirings.",
                                   epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    root.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    groups = root.add_subparsers(dest="group", required=True, metavar="GROUP")
    leaves = {}

    def leaf(group_name, group_help, name, help_, func):
        if group_name not in leaves:
            g = groups.add_parser(group_name, help=group_help, epilog=EPILOG,
                                  formatter_class=argparse.RawDescriptionHelpFormatter)
            leaves[group_name] = (g.add_subparsers(dest="command", required=True, metavar="COMMAND"), {})
        sub, cmds = leaves[group_name]
        p = sub.add_parser(name, help=help_, description=help_, epilog=EPILOG,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", help="key = value file supplying defaults for this command's flags")
        p.set_defaults(func=func)
        cmds[name] = p
        return p

    p = leaf("box", "inspect boxes", "show", "print a box's table, correlators and Bell values", cmd_box_show)
    p.add_argument("--box", default="pr", help="box spec (default pr)")
    p.add_argument("--out", help="JSON output path")

    p = leaf("wire", "apply wirings", "apply", "apply a wiring to boxes", cmd_wire_apply)
    p.add_argument("--wiring", default="distill", help="identity | distill | and:N | @file.json")
    p.add_argument("--box", action="append", required=True,
                   help="box spec, repeat once per box; a single box is copied N times")
    p.add_argument("--out", help="JSON output path")

    p = leaf("distill", "distillation protocol", "iterate",
             "iterate the (conjugated) distillation protocol on an edge box", cmd_distill_iterate)
    p.add_argument("--eps", type=rational, required=True, help="initial eps in (0, 1]")
    p.add_argument("--k", type=int, default=1, help="iterations (default 1)")
    p.add_argument("--edge", default="000010", help="bits mu nu sigma alpha beta gamma (default 000010, the "
                   "correlated line)")
    p.add_argument("--S", type=rational, default=None, help="CHSH cut certifying exit (default 2(1+eps))")
    p.add_argument("--out", help="JSON output path")

    p = leaf("escape", "AND-wiring escape", "and", "AND-wire isotropic boxes and test the tilted CH facet",
             cmd_escape_and)
    p.add_argument("--eps", type=rational, required=True, help="isotropic eps in (1/2, 1)")
    p.add_argument("--n", type=int, default=2, help="number of copies (default 2)")
    p.add_argument("--lp", action="store_true", help="also certify non-membership in R_b by exact LP")
    p.add_argument("--out", help="certificate JSON path")

    p = leaf("hull", "iterated hull growth", "iterate", "grow R_b by orbits of n-copy AND boxes", cmd_hull_iterate)
    p.add_argument("--eps", type=rational, required=True, help="isotropic eps in (1/2, 1)")
    p.add_argument("--n-max", dest="n_max", type=int, default=10, help="last stage (default 10)")
    p.add_argument("--out", help="JSON output path")

    p = leaf("search", "exhaustive wiring search", "two-box",
             "check all deterministic two-box wirings against the facets of a polytope", cmd_search_two_box)
    p.add_argument("--S", type=rational, default=Fraction(5, 2), help="CHSH cut of R_b (default 5/2)")
    p.add_argument("--polytope", choices=("rb", "ns"), default="rb",
                   help="rb: R_b^S with tilted-CH and positivity facets; ns: NS with positivity facets")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("--budget", type=int, default=None, help="cap on scanned cells; partial runs are reported")
    p.add_argument("--max-witnesses", dest="max_witnesses", type=int, default=50)
    p.add_argument("--out", help="report JSON path")

    p = leaf("uffink", "Uffink set", "scan", "label section nodes by first escape from Uffink's set",
             cmd_uffink_scan)
    p.add_argument("--grid", type=int, default=200, help="nodes per unit (default 200)")
    p.add_argument("--iters", type=int, default=3, help="iterations (default 3)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="CSV output path")

    p = leaf("field", "discrete-map vector fields", "export", "export a vector field on a 2D section",
             cmd_field_export)
    p.add_argument("--protocol", choices=("distill", "and"), default="distill")
    p.add_argument("--section", choices=("distill", "and"), default="distill",
                   help="distill: (eps, gamma) section; and: isotropic x P_L^0000 (a guess)")
    p.add_argument("--grid", type=int, default=20)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="CSV output path")

    p = groups.add_parser("selftest", help="run the fast invariant suites", epilog=EPILOG,
                          formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_selftest, command=None)
    leaves["selftest"] = (None, {None: p})
    return root, leaves


def _config_defaults(parser: argparse.ArgumentParser, path: str) -> dict:
    """Config values converted like their flags; config-supplied flags stop being required."""
    actions = {a.dest: a for a in parser._actions if a.option_strings}
    out = {}
    for key, raw in read_config(path).items():
        action = actions.get(key)
        if action is None or key in ("help", "config"):
            parser.error(f"unknown config key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):
            value = raw.lower() in ("1", "true", "yes")
        elif isinstance(action, argparse._AppendAction):
            value = [v.strip() for v in raw.split(";")]
        else:
            value = action.type(raw) if action.type else raw
        if action.choices is not None and value not in action.choices:
            parser.error(f"config {key}={raw!r} not in {sorted(action.choices)}")
        action.required = False
        out[key] = value
    return out


def _parse(argv, root, leaves):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        words = [t for t in argv if not t.startswith("-")]
        group, command = (words + [None, None])[:2]
        cmds = leaves.get(group, (None, {}))[1]
        parser = cmds.get(command) or cmds.get(None)
        if parser is not None:
            # explicit flags still win: config values only replace the defaults
            parser.set_defaults(**_config_defaults(parser, known.config))
    return root.parse_args(argv)


def run(argv=None) -> int:
    root, leaves = _parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = _parse(argv, root, leaves)
    except MalformedInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except MalformedInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except (ParameterError, InvalidMixtureError, OutsidePolytopeError, ArityError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMETER


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
