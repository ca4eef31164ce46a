"""Command-line front end: build networks, compile and replay routes, run
identity suites and percolation sweeps.  All files are UTF-8 JSON.

Exit codes: 0 ok, 1 domain error, 2 usage error, 3 no route.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import compiler, dyn, net, verify
from .errors import CompileError, NoRouteError, SeparationError, UnsupportedInputError

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2
EXIT_NO_ROUTE = 3


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (NoRouteError,) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_NO_ROUTE
    except (
        ValueError,
        KeyError,
        OSError,
        UnsupportedInputError,
        CompileError,
        SeparationError,
    ) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_DOMAIN


def _build_parser():
    parser = argparse.ArgumentParser(prog="spinroute")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a block-lattice network file")
    p.add_argument("--lattice", required=True, choices=sorted(net.LATTICE_BRANCHES))
    p.add_argument("--extent", required=True, help="comma-separated block counts")
    p.add_argument("--chain-length", type=int, required=True, metavar="M")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("route", help="compile a port-to-port pulse schedule")
    p.add_argument("--net", required=True)
    p.add_argument("--from", dest="src", required=True, metavar="SITE")
    p.add_argument("--to", dest="dst", required=True, metavar="SITE")
    p.add_argument("--faults", default="", help="semicolon-separated block coords x,y")
    p.add_argument("--out", required=True, help="schedule JSON path")
    p.add_argument("--report", default=None, help="route report JSON path")
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("simulate", help="run a schedule file on an input state")
    p.add_argument("--net", required=True)
    p.add_argument("--sched", required=True)
    p.add_argument("--input", required=True, metavar="SITE[;SITE]")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--target", default=None, metavar="SITE[;SITE]")
    p.add_argument("--report", required=True, help="state dump / fidelity JSON path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run identity suites")
    p.add_argument(
        "--suite",
        required=True,
        choices=["prototype", "star", "tiling", "commutator", "all"],
    )
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("percolate", help="site-percolation spanning estimate")
    p.add_argument("--lattice", required=True, choices=["square", "triangular", "cubic"])
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_percolate)

    p = sub.add_parser("entangle", help="compile the even-d two-port entangler")
    p.add_argument("--chain-length", type=int, required=True, metavar="M")
    p.add_argument("--branches", type=int, required=True, metavar="D")
    p.add_argument("--from", dest="src", default=None, metavar="PORT")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_entangle)

    return parser


def _seed_override(seed: int) -> int:
    env = os.environ.get("SPINROUTE_SEED")
    return int(env) if env is not None else seed


def _parse_extent(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise ValueError("extent must be comma-separated integers") from None


def _parse_faults(text: str) -> frozenset:
    if not text.strip():
        return frozenset()
    out = []
    for part in text.split(";"):
        out.append(tuple(int(x) for x in part.split(",")))
    return frozenset(out)


def cmd_build(args) -> int:
    if args.chain_length % 2 == 0 or args.chain_length < 5:
        print("error: chain length M must be odd and >= 5", file=sys.stderr)
        return EXIT_USAGE
    try:
        spec = net.LatticeSpec(kind=args.lattice, extent=_parse_extent(args.extent))
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    template = net.build_star_block(args.chain_length, spec.d)
    tiled = net.tile_network(spec, template)
    meta = {
        "kind": spec.kind,
        "M": args.chain_length,
        "d": spec.d,
        "extent": list(spec.extent),
    }
    _write_json(args.out, net.network_to_json(tiled.graph, meta))
    moduli = tiled.graph.coupling_moduli()
    print(
        "%d blocks, %d sites, %d edges, |J| in [%s, %s]"
        % (
            len(spec.blocks()),
            tiled.graph.n_sites,
            len(tiled.graph.edges),
            repr(float(moduli.min())),
            repr(float(moduli.max())),
        )
    )
    return EXIT_OK


def _load_network(path):
    doc = _read_json(path)
    meta = doc.get("meta", {})
    spec = net.LatticeSpec(kind=meta["kind"], extent=tuple(meta["extent"]))
    template = net.build_star_block(meta["M"], meta["d"])
    tiled = net.tile_network(spec, template)
    rebuilt = net.network_from_json(doc)
    if rebuilt.edges != tiled.graph.edges or rebuilt.sites != tiled.graph.sites:
        raise ValueError("network file does not match its declared lattice")
    return tiled


def cmd_route(args) -> int:
    tiled = _load_network(args.net)
    faults = _parse_faults(args.faults)
    src = _site_in(tiled.graph, args.src)
    dst = _site_in(tiled.graph, args.dst)
    sched = compiler.compile_route(tiled, src, dst, faults)
    report = compiler.route_report(tiled, src, dst, faults)
    _write_json(args.out, sched.to_json())
    if args.report:
        _write_json(args.report, report)
    print(
        "route %s -> %s: duration %.6f, fidelity %.12f, %d pulses"
        % (args.src, args.dst, report["duration"], report["fidelity"], report["pulses"])
    )
    return EXIT_OK


def _site_in(graph, label):
    site = graph.label_index.get(label)
    if site is None:
        raise ValueError("site %r not in network" % label)
    return site


def cmd_simulate(args) -> int:
    tiled = _load_network(args.net)
    graph = tiled.graph
    sched = dyn.schedule_from_json(_read_json(args.sched), graph)
    sites = [_site_in(graph, lbl) for lbl in args.input.split(";")]
    if len(sites) != args.k:
        raise ValueError("--input must list exactly k sites")
    basis = dyn.SectorBasis(graph=graph, k=args.k)
    cache = dyn.spectral_cache(graph, args.k)
    state = dyn.run_schedule(basis.basis_state(sites), sched, cache)
    report = state.to_json()
    if args.target:
        tsites = [_site_in(graph, lbl) for lbl in args.target.split(";")]
        report["fidelity"] = dyn.fidelity_up_to_phase(basis.basis_state(tsites), state)
    _write_json(args.report, report)
    if "fidelity" in report:
        print("fidelity %.12f" % report["fidelity"])
    else:
        print("final state written to %s" % args.report)
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = []
    if args.suite in ("prototype", "all"):
        for N in (1, 3, 8):
            g = net.build_prototype_1d(N)
            res = verify.direct_sum_residual(g, net.lambda_basis_1d(g))
            checks.append(_check("prototype.direct_sum.N%d" % N, res, 1e-12))
        g = net.build_prototype_1d(4)
        sched = compiler.compile_1d_route(g, 5, 11)
        checks.append(_check("prototype.route.5->11", 1 - _route_fid(g, sched, 5, 11), 1e-9))
    if args.suite in ("star", "all"):
        for M, d in ((5, 2), (5, 3), (7, 2)):
            block = net.build_star_block(M, d)
            cal = compiler.calibrate_block(block)
            rep = verify.check_star_reflection(block, cal)
            checks.append(_check("star.reflection.M%d.d%d" % (M, d), rep.residual, 1e-9))
            checks.append(
                _check("star.cycle.M%d.d%d" % (M, d), _cycle_residual(block), 1e-12)
            )
    if args.suite in ("tiling", "all"):
        two = net.tile_network(net.LatticeSpec("chain", (2,)), net.build_star_block(5, 1))
        checks.append(
            _check(
                "tiling.direct_sum.chain2",
                verify.direct_sum_residual(two.graph, net.v_pair_basis(two)),
                1e-12,
            )
        )
        sq = net.tile_network(net.LatticeSpec("square", (2, 2)), net.build_star_block(5, 2))
        checks.append(
            _check(
                "tiling.direct_sum.square2x2",
                verify.direct_sum_residual(sq.graph, net.v_pair_basis(sq)),
                1e-12,
            )
        )
        tri = net.tile_network(
            net.LatticeSpec("triangular", (2, 2)), net.build_star_block(5, 3)
        )
        moduli = tri.graph.coupling_moduli()
        checks.append(
            _check("tiling.uniform_modulus.triangular", float(moduli.max() - moduli.min()), 0.0)
        )
    if args.suite in ("commutator", "all"):
        for M, d in ((5, 2), (5, 3)):
            block = net.build_star_block(M, d)
            rep = compiler.commutator_report(block, 1, min(2, d))
            checks.append(
                _check("commutator.support.M%d.d%d" % (M, d), rep["off_support_residual"], 1e-12)
            )
            checks.append(
                {
                    "name": "commutator.coefficient.M%d.d%d" % (M, d),
                    "measured": rep["coefficient"],
                    "pair_once_prediction": rep["pair_once_prediction"],
                    "quoted_prediction": rep["quoted_prediction"],
                    "pass": abs(rep["coefficient"] - rep["pair_once_prediction"]) < 1e-9,
                }
            )
    ok = all(c["pass"] for c in checks)
    print(json.dumps({"suite": args.suite, "pass": ok, "checks": checks}, indent=2))
    return EXIT_OK if ok else EXIT_DOMAIN


def _check(name, residual, bound):
    return {
        "name": name,
        "residual": float(residual),
        "bound": bound,
        "pass": bool(residual <= bound),
    }


def _route_fid(graph, sched, src, dst):
    basis = dyn.SectorBasis(graph=graph, k=1)
    cache = dyn.spectral_cache(graph, 1)
    out = dyn.run_schedule(basis.basis_state([net.site_index(src)]), sched, cache)
    return dyn.fidelity_up_to_phase(basis.basis_state([net.site_index(dst)]), out)


def _cycle_residual(block):
    """Worst deviation of the port-ring pulse from W_k -> W_{k+1 mod d}."""
    d = block.d
    basis = dyn.SectorBasis(graph=block.graph, k=1)
    phases = {block.port(0, j): 2 * math.pi * j / d for j in range(1, d + 1)}
    worst = 0.0
    for k in range(d):
        state = basis.from_site_vector(net.w_state(block, 1, k))
        out = dyn.apply_phase_set(state, phases)
        target = net.w_state(block, 1, (k + 1) % d)
        worst = max(worst, float(np.abs(out.amplitudes - target).max()))
    return worst


def cmd_percolate(args) -> int:
    seed = _seed_override(args.seed)
    result = verify.percolation_estimate(args.lattice, args.size, args.p, args.trials, seed)
    print(json.dumps(result.to_json()))
    return EXIT_OK


def cmd_entangle(args) -> int:
    M, d = args.chain_length, args.branches
    if M % 2 == 0 or M < 5:
        print("error: chain length M must be odd and >= 5", file=sys.stderr)
        return EXIT_USAGE
    if d % 2 != 0:
        print("error: the two-port entangler needs an even branch count", file=sys.stderr)
        return EXIT_USAGE
    block = net.build_star_block(M, d)
    src = block.port(0, 1) if args.src is None else block.graph.label_index[args.src]
    sched = compiler.compile_phase_program(block, src, compiler.entangler_coefficients(d))
    _write_json(args.out, sched.to_json())
    print(
        "entangler on (M=%d, d=%d): duration %.6f, %d pulses"
        % (M, d, sched.total_duration, sched.pulse_count)
    )
    return EXIT_OK


def _read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _write_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


if __name__ == "__main__":
    sys.exit(main())
