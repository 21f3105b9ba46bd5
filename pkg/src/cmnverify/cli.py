"""Command-line front end.

Commands: verify | entropy | periodic | margin | simulate.  Exit codes are
the stable contract: 0 success/pass, 1 failed or inconclusive
certification (or a failed operation), 2 unreadable or invalid spec.
``CMN_THREADS`` caps parallelism; the implementation is single-process and
vectorized, so any cap >= 1 is honored as-is.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import __version__
from .dynamics import (LoopError, NeutralCompositionError, Perturbation,
                       empirical_entropy, periodic_point, step, _locate_batch)
from .geometry import GeometryError
from .network import SpecError, TYPE_I, conjugacy_audit, theorem1_check, theorem2_check, validate_spec
from .specio import (SpecFormatError, canonical_json, certificate_document,
                     load_spec, spec_digest)
from .symbolic import spectral_radius

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INVALID = 2


def _threads_cap() -> int:
    raw = os.environ.get("CMN_THREADS", "")
    if not raw:
        return 1
    try:
        cap = int(raw)
    except ValueError:
        print(f"warning: ignoring non-integer CMN_THREADS={raw!r}", file=sys.stderr)
        return 1
    return max(1, cap)


def _load(path: str):
    with open(path, "rb") as fh:
        raw = fh.read()
    spec = load_spec(path)
    report = validate_spec(spec)
    if not report.ok:
        for err in report.errors:
            print(f"invalid spec: {err}", file=sys.stderr)
        raise SpecFormatError("; ".join(report.errors))
    for warning in report.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return spec, spec_digest(raw)


def _run_check(spec, theorem: int | None, grid: int, pert_eps: float = 0.0):
    if theorem is None:
        theorem = 1 if spec.coupling.kind == TYPE_I else 2
    if theorem == 1:
        return theorem1_check(spec, resolution=grid, pert_amplitude=pert_eps)
    return theorem2_check(spec, resolution=grid, pert_amplitude=pert_eps)


def _emit(doc: dict, out: str | None) -> None:
    text = canonical_json(doc)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_verify(args) -> int:
    spec, digest = _load(args.spec)
    report = _run_check(spec, args.theorem, args.grid)
    extras = {}
    if spec.coupling.ambient is not None:
        audit = conjugacy_audit(spec, seed=args.seed)
        extras["conjugacy_residual"] = audit.worst_residual
        if not audit.ok:
            print(f"conjugacy audit failed (worst residual "
                  f"{audit.worst_residual:.3e})", file=sys.stderr)
    if report.theorem == 1 and report.passed:
        loop = _auto_loop(spec)
        orbit = periodic_point(spec, loop)
        extras["periodic_orbits"] = [{
            "loop": [list(multi) for multi in loop],
            "period": orbit.period,
            "point": [float(v) for v in orbit.point],
            "residual": orbit.residual,
            "interior_margins": [float(m) for m in orbit.interior_margins],
        }]
    doc = certificate_document(report, digest, __version__, extras)
    _emit(doc, args.out)
    summary = f"verdict {report.verdict}"
    if report.entropy_bound is not None:
        summary += f", entropy bound {report.entropy_bound:.6f}"
    if report.period is not None:
        summary += f", period {report.period}"
    print(summary, file=sys.stderr)
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_entropy(args) -> int:
    spec, _ = _load(args.spec)
    bound = sum(math.log(spectral_radius(n.transition, tol=args.tol))
                for n in spec.nodes)
    print(f"bound {bound:.6f}")
    if args.empirical:
        depth, samples, seed = (int(v) for v in args.empirical)
        est = empirical_entropy(spec, depth, samples, seed)
        print(f"empirical {est:.6f}")
        print(f"gap {est - bound:+.6f}")
    return EXIT_PASS


def _auto_loop(spec) -> list[tuple[int, ...]]:
    """Canonical closed loop through the first symbols of every node."""
    perms = []
    for k, node in enumerate(spec.nodes, start=1):
        if not node.transition.is_permutation():
            raise LoopError(f"node {k}: --auto needs permutation transitions")
        perms.append(node.transition.permutation())
    loop = [tuple(1 for _ in spec.nodes)]
    while True:
        nxt = tuple(perms[k][loop[-1][k] - 1] for k in range(spec.d))
        if nxt == loop[0]:
            return loop
        loop.append(nxt)


def cmd_periodic(args) -> int:
    spec, digest = _load(args.spec)
    if args.auto:
        loop = _auto_loop(spec)
    else:
        loop = [tuple(int(t) for t in stop.split("."))
                for stop in args.loop.split(",")]
    cert = periodic_point(spec, loop)
    doc = {
        "format_version": "1",
        "spec_digest": digest,
        "loop": [list(multi) for multi in loop],
        "period": cert.period,
        "point": [float(v) for v in cert.point],
        "residual": cert.residual,
        "interior_margins": [float(m) for m in cert.interior_margins],
    }
    _emit(doc, args.out)
    print(f"period {cert.period}, residual {cert.residual:.3e}", file=sys.stderr)
    return EXIT_PASS


def cmd_margin(args) -> int:
    spec, _ = _load(args.spec)
    report = _run_check(spec, args.theorem, args.grid)
    if not report.passed:
        binding = report.binding_entry()
        print(f"certification fails: verdict {report.verdict}, binding entry "
              f"{binding.source_index}->{binding.target_index} "
              f"(slack {binding.slack:.6g})")
        for failure in binding.failures:
            print(f"  {failure}")
        return EXIT_FAIL
    binding = report.binding_entry()
    print(f"eps* {report.global_eps:.6g}")
    print(f"binding entry {binding.source_index}->{binding.target_index} "
          f"(slack {binding.slack:.6g})")
    return EXIT_PASS


def cmd_simulate(args) -> int:
    spec, _ = _load(args.spec)
    if args.x0:
        state = np.array([float(v) for v in args.x0.split(",")])
    else:
        rng = np.random.default_rng(args.seed)
        lo = np.full(spec.state_dim, np.inf)
        hi = np.full(spec.state_dim, -np.inf)
        block = spec.block_dim
        for k, node in enumerate(spec.nodes):
            for h in node.hsets:
                blo, bhi = h.bounding_box()
                sl = slice(k * block, (k + 1) * block)
                lo[sl] = np.minimum(lo[sl], blo)
                hi[sl] = np.maximum(hi[sl], bhi)
        state = rng.uniform(lo, hi)
    pert = Perturbation(args.pert[0], int(args.pert[1])) if args.pert else None
    lines = []
    for t in range(args.steps + 1):
        symbols, _ = _locate_batch(spec, state.reshape(1, -1))
        lines.append({"t": t, "state": [float(v) for v in state],
                      "symbols": [int(s) for s in symbols[0]]})
        if t < args.steps:
            state = step(spec, state, pert)
    text = "\n".join(canonical_json(line) for line in lines)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmnverify",
        description="Certify covering structure, entropy bounds, periodic "
                    "orbits, and perturbation margins of coupled map networks.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("spec", help="path to a network spec file (JSON)")
        p.add_argument("--tol", type=float, default=1e-12,
                       help="relative tolerance for Perron-root iteration")
        p.add_argument("--grid", type=int, default=64,
                       help="points per face axis for certified grid bounds")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="write the result document here")

    p = sub.add_parser("verify", help="run a theorem check, emit a certificate")
    common(p)
    p.add_argument("--theorem", type=int, choices=(1, 2),
                   help="which check to run (default: inferred from coupling kind)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("entropy", help="print the certified entropy lower bound")
    common(p)
    p.add_argument("--empirical", nargs=3, metavar=("DEPTH", "SAMPLES", "SEED"),
                   help="also estimate from sampled itineraries")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("periodic", help="solve for a periodic orbit on a loop")
    common(p)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--loop", help="steps separated by commas, node symbols "
                                      "within a step by dots (e.g. '1.2,2.1')")
    group.add_argument("--auto", action="store_true",
                       help="canonical loop through the first symbols")
    p.set_defaults(func=cmd_periodic)

    p = sub.add_parser("margin", help="print the admissible perturbation radius")
    common(p)
    p.add_argument("--theorem", type=int, choices=(1, 2))
    p.set_defaults(func=cmd_margin)

    p = sub.add_parser("simulate", help="iterate the network map")
    common(p)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--x0", help="comma-separated initial state")
    p.add_argument("--pert", nargs=2, type=float, metavar=("EPS", "SEED"),
                   help="sinusoidal perturbation amplitude and seed")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    _threads_cap()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpecFormatError, SpecError, GeometryError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (LoopError, NeutralCompositionError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
