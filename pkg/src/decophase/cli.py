"""Command-line entry point.

Subcommands: classify, threshold, tee, oracle, stab.  Options may come
from a line-oriented config file (`[subcommand]` sections with
`key = value` pairs); explicit flags win.  Every output embeds the tool
version, the resolved configuration, the seed, the wall-clock time, and a
content hash of the data section; reruns with identical config and seed
produce byte-identical data sections (at --threads 1, bit-exact).

Exit codes: 0 success, 2 input error, 3 resource cap, 4 statistical
failure.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import math
import os
import sys
import time

from . import __version__
from .anyons import NonSymmetric, Singular, build_theory, read_kmatrix
from .condense import (CriteriaConfig, SearchSpaceTooLarge, classify_model,
                       enumerate_subgroups, render_report)
from .ising import (ChainNotConverged, MCConfig, NoCrossingInGrid,
                    binder_scan, tee_kitaev_preskill)
from .loopmodel import (NotClosed, OutOfRange, TooLarge, TorusLattice,
                        exact_renyi2, exact_string_expectation,
                        exact_wilson_loop, p_to_mu, rectangle_loop,
                        vertex_rectangle)
from .models import get_model
from .stabilizers import (NotMaximal, efd_stabilizer_group,
                          entanglement_entropy, region_qubits)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CAP = 3
EXIT_STATS = 4


class Report:
    """Accumulates header metadata and hashed data lines."""

    def __init__(self, config: dict):
        self.config = config
        self.data = []
        self.t0 = time.time()

    def add(self, line: str):
        self.data.append(line)

    def render(self) -> str:
        body = "\n".join(self.data) + "\n"
        digest = hashlib.sha256(body.encode()).hexdigest()
        cfg = " ".join(f"{k}={v}" for k, v in sorted(self.config.items()))
        head = [f"# decophase {__version__}",
                f"# config: {cfg}",
                f"# wallclock_s: {time.time() - self.t0:.3f}",
                f"# sha256: {digest}"]
        return "\n".join(head) + "\n" + body


def _emit(report: Report, output):
    text = report.render()
    if output:
        with open(output, "w") as fh:
            fh.write(text)
        print(f"wrote {output}")
    else:
        sys.stdout.write(text)


def _float_list(text):
    return [float(x) for x in text.replace(",", " ").split()]


def _int_list(text):
    return [int(x) for x in text.replace(",", " ").split()]


# -- subcommands ------------------------------------------------------------

def cmd_classify(args) -> int:
    if args.kmatrix:
        K = read_kmatrix(args.kmatrix)
        t = build_theory(K, args.replicas)
        model = None
    else:
        model = get_model(args.model)
        t = None
    cfg = CriteriaConfig(
        incoherent_constraint="off" if args.coherent else args.constraint)
    rep = Report({"subcommand": "classify",
                  "model": args.model or args.kmatrix,
                  "replicas": args.replicas, "coherent": args.coherent,
                  "constraint": cfg.incoherent_constraint})
    if model is not None:
        reports = classify_model(model, args.replicas, cfg)
        rep.add(f"phases: {len(reports)}")
        for line in render_report(reports).splitlines():
            rep.add(line)
    else:
        subs = enumerate_subgroups(t, cfg)
        rep.add(f"phases: {len(subs)}")
        for s in subs:
            gens = "; ".join(str(g.residues) for g in s.generators)
            rep.add(f"order {s.order}  gens: {gens}")
    _emit(rep, args.output)
    return EXIT_OK


def cmd_threshold(args) -> int:
    mc = MCConfig(seed=args.seed, sweeps=args.sweeps, therm=args.therm)
    rep = Report({"subcommand": "threshold", "sizes": args.sizes,
                  "pgrid": args.pgrid, "sweeps": args.sweeps,
                  "therm": args.therm, "seed": args.seed})
    points, crossings, pc = binder_scan(_int_list(args.sizes),
                                        _float_list(args.pgrid), mc)
    rep.add("L,p,mu,observable,value,stderr,samples,seed")
    for (L, p), est in sorted(points.items()):
        rep.add(f"{L},{p},{p_to_mu(p):.9f},binder,{est.value:.9f},"
                f"{est.stderr:.9f},{est.samples},{args.seed}")
    rep.add(f"p_c,{pc.value:.6f},{pc.stderr:.6f}")
    _emit(rep, args.output)
    return EXIT_OK


def cmd_tee(args) -> int:
    mc = MCConfig(seed=args.seed, sweeps=args.sweeps, therm=args.therm,
                  check_reverse=args.check_reverse)
    rep = Report({"subcommand": "tee", "size": args.size, "p": args.p,
                  "disk": args.disk, "sweeps": args.sweeps,
                  "therm": args.therm, "seed": args.seed})
    gamma, entropies = tee_kitaev_preskill(args.size, args.p, args.disk, mc)
    rep.add("L,p,mu,observable,value,stderr,samples,seed")
    mu = p_to_mu(args.p)
    for name, est in entropies.items():
        rep.add(f"{args.size},{args.p},{mu:.9f},S2_{name},{est.value:.9f},"
                f"{est.stderr:.9f},{est.samples},{args.seed}")
    rep.add(f"{args.size},{args.p},{mu:.9f},gamma,{gamma.value:.9f},"
            f"{gamma.stderr:.9f},{gamma.samples},{args.seed}")
    _emit(rep, args.output)
    return EXIT_OK


def cmd_oracle(args) -> int:
    lat = TorusLattice(args.size)
    mu = p_to_mu(args.p)
    rep = Report({"subcommand": "oracle", "observable": args.observable,
                  "size": args.size, "p": args.p, "region": args.region})
    w, h = _int_list(args.region)[:2]
    if args.observable == "string":
        path = [x for x in range(w + 1)]  # straight dual path of length w
        val = exact_string_expectation(lat, mu, path)
    elif args.observable == "wilson":
        val = exact_wilson_loop(lat, mu, rectangle_loop(lat, 0, 0, w, h))
    elif args.observable == "renyi2":
        val = exact_renyi2(lat, mu, vertex_rectangle(lat, 0, 0, w, h))
    else:
        raise ValueError(f"unknown observable {args.observable!r}")
    rep.add("L,p,mu,observable,value,stderr,samples,seed")
    rep.add(f"{args.size},{args.p},{mu:.9f},{args.observable},"
            f"{val:.12g},0,0,0")
    _emit(rep, args.output)
    return EXIT_OK


def cmd_stab(args) -> int:
    rep = Report({"subcommand": "stab", "size": args.size,
                  "limit": args.limit, "basis": args.basis,
                  "region": args.region})
    lat = TorusLattice(args.size)
    w, h = _int_list(args.region)[:2]
    group = efd_stabilizer_group(args.size, args.limit, args.basis)
    region = vertex_rectangle(lat, 0, 0, w, h)
    bits = entanglement_entropy(group, region_qubits(region))
    rep.add("L,p,mu,observable,value,stderr,samples,seed")
    p = 0.0 if args.limit == "p0" else 0.5
    rep.add(f"{args.size},{p},{'0' if p == 0 else 'inf'},entropy_bits,"
            f"{bits},0,0,0")
    rep.add(f"entropy: {bits} log2 = {bits * math.log(2):.9f}")
    _emit(rep, args.output)
    return EXIT_OK


# -- argument plumbing ------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="decophase",
        description="Decoherence-induced phases of topological orders")
    top.add_argument("--config", help="ini-style config file")
    top.add_argument("--threads", type=int,
                     default=int(os.environ.get("EFD_THREADS", "1")),
                     help="worker threads (1 = bit-exact reproducibility)")
    sub = top.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="enumerate decohered phases")
    c.add_argument("--model", help="toric | double-semion | laughlin3")
    c.add_argument("--kmatrix", help="K-matrix file (first line M)")
    c.add_argument("--replicas", type=int, default=2)
    c.add_argument("--coherent", action="store_true",
                   help="drop the incoherent-channel constraint")
    c.add_argument("--constraint", default="lattice",
                   choices=["lattice", "blocksum", "off"])
    c.add_argument("--output")
    c.set_defaults(func=cmd_classify)

    t = sub.add_parser("threshold", help="Binder-crossing estimate of p_c")
    t.add_argument("--sizes", default="16 32 64")
    t.add_argument("--pgrid", default="0.15 0.16 0.17 0.18 0.19 0.20")
    t.add_argument("--sweeps", type=int, default=20000)
    t.add_argument("--therm", type=int, default=2000)
    t.add_argument("--seed", type=int, default=1)
    t.add_argument("--output")
    t.set_defaults(func=cmd_threshold)

    e = sub.add_parser("tee", help="Renyi-2 topological entanglement entropy")
    e.add_argument("--size", type=int, default=32)
    e.add_argument("--p", type=float, required=True)
    e.add_argument("--disk", type=int, default=8,
                   help="half-width m of the 2m x 2m tripartite disk")
    e.add_argument("--sweeps", type=int, default=20000)
    e.add_argument("--therm", type=int, default=2000)
    e.add_argument("--seed", type=int, default=1)
    e.add_argument("--check-reverse", action="store_true")
    e.add_argument("--output")
    e.set_defaults(func=cmd_tee)

    o = sub.add_parser("oracle", help="exact loop-model values")
    o.add_argument("--observable", required=True,
                   choices=["string", "wilson", "renyi2"])
    o.add_argument("--size", type=int, default=3)
    o.add_argument("--p", type=float, required=True)
    o.add_argument("--region", default="1 1",
                   help="rectangle 'w h' (loop size / vertex block)")
    o.add_argument("--output")
    o.set_defaults(func=cmd_oracle)

    s = sub.add_parser("stab", help="stabilizer entropies at p=0, 1/2")
    s.add_argument("--size", type=int, default=6)
    s.add_argument("--limit", default="p0", choices=["p0", "phalf"])
    s.add_argument("--basis", default="X", choices=["X", "Z"])
    s.add_argument("--region", default="2 2", help="vertex block 'w h'")
    s.add_argument("--output")
    s.set_defaults(func=cmd_stab)
    return top


def _apply_config_file(parser, argv):
    """Pre-scan for --config and fold file values in as defaults."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    ini = configparser.ConfigParser()
    if not ini.read(known.config):
        raise FileNotFoundError(f"config file {known.config!r} not found")
    sections = [s for s in ("global",) if ini.has_section(s)]
    sections += [s for s in ini.sections() if s != "global"]
    merged = {}
    for s in sections:
        merged.update({k.replace("-", "_"): v for k, v in ini.items(s)})
    for action in parser._subparsers._group_actions:
        for sp in getattr(action, "choices", {}).values():
            sp.set_defaults(**{k: _coerce(sp, k, v)
                               for k, v in merged.items()
                               if _has_option(sp, k)})


def _has_option(subparser, dest):
    return any(a.dest == dest for a in subparser._actions)


def _coerce(subparser, dest, value):
    for a in subparser._actions:
        if a.dest == dest:
            if a.type:
                return a.type(value)
            if isinstance(a.const, bool) or isinstance(a.default, bool):
                return value.strip().lower() in ("1", "true", "yes", "on")
    return value


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        if args.threads != 1:
            try:
                import numba
                numba.set_num_threads(max(1, args.threads))
            except ImportError:
                pass
        if args.command == "classify" and not (args.model or args.kmatrix):
            parser.error("classify needs --model or --kmatrix")
        return args.func(args)
    except (SearchSpaceTooLarge, TooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (NoCrossingInGrid, ChainNotConverged) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STATS
    except (NonSymmetric, Singular, NotClosed, OutOfRange, NotMaximal,
            FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:  # argparse errors
        code = exc.code if isinstance(exc.code, int) else 2
        return EXIT_INPUT if code else EXIT_OK


def run():
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
