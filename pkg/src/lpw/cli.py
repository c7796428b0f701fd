"""Command-line front end.

Subcommands: `verify {partition,bernstein,apbound,commutator,paraproduct,
mapping}`, `exponents`, `iterate`, `probe`.  Output is deterministic under a
fixed seed (sorted-key JSON, shortest-roundtrip floats).  Exit codes: 0 all
properties pass, 1 a measured property failed, 2 usage or hypothesis error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from .exponents import RegularityParams, check_hypotheses, compute_gains
from .grid import GridSpec
from .iteration import DecaySequence, IterationParams, decay_bound, hypothesis_holds
from .probe import custom_equation, equation_spec, run_probe
from .verify import VERIFIERS


def _emit(payload: dict, path: str | None = None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=1)
    print(text)
    if path:
        Path(path).write_text(text + "\n")


def _grid_arg(text: str) -> GridSpec:
    try:
        n, N = (int(t) for t in text.split(","))
        return GridSpec(n, N)
    except Exception as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}: {exc}") from exc


def _cmd_verify(args) -> int:
    fn = VERIFIERS[args.what]
    kwargs = {}
    if args.what in ("partition", "bernstein"):
        kwargs = {"n": args.n, "N": args.N, "seed": args.seed}
    elif args.what in ("apbound", "commutator", "mapping"):
        kwargs = {"seed": args.seed}
        if args.N is not None:
            kwargs["N"] = args.N
    else:
        kwargs = {"seed": args.seed}
    report = fn(**kwargs)
    _emit(report, args.out)
    return 0 if report["passed"] else 1


def _cmd_exponents(args) -> int:
    rep = check_hypotheses(args.n, args.alpha, args.beta, args.gamma, args.s, args.p)
    if not rep.ok:
        _emit({"hypotheses": rep.as_dict()}, args.out)
        return 2
    params = RegularityParams(n=args.n, alpha=args.alpha, beta=args.beta,
                              gamma=args.gamma, s=args.s, p=args.p,
                              sigma=args.sigma, r=args.r)
    gains = compute_gains(params)
    _emit({"hypotheses": rep.as_dict(), **gains.as_dict()}, args.out)
    return 0


def _read_sequence(path: str) -> DecaySequence:
    values = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            try:
                values.append(float(row[-1]))
            except ValueError:
                continue  # header line
    return DecaySequence(values)


def _cmd_iterate(args) -> int:
    seq = _read_sequence(args.csv)
    params = IterationParams(eps=args.eps, delta=args.delta, S=args.S)
    holds, first_bad = hypothesis_holds(seq, params)
    out = {"holds": holds, "first_violation": first_bad,
           "eps": args.eps, "delta": args.delta, "S": args.S, "K": len(seq) - 1}
    if holds:
        out["M"] = decay_bound(seq, params)
        out["M_from_S"] = decay_bound(seq, params, start=args.S)
    _emit(out, args.out)
    return 0 if holds else 1


def _cmd_probe(args) -> int:
    try:
        if args.equation == "custom":
            needed = (args.L, args.P, args.Q, args.alpha, args.beta, args.gamma,
                      args.s, args.p)
            if any(v is None for v in needed):
                raise ValueError("custom equations need --L --P --Q --alpha "
                                 "--beta --gamma --s --p")
            eq = custom_equation(args.grid.dim, args.L, args.P, args.Q,
                                 alpha=args.alpha, beta=args.beta,
                                 gamma=args.gamma, s=args.s, p=args.p,
                                 amplitude=args.amplitude)
        else:
            eq = equation_spec(args.equation, n=args.grid.dim, s=args.s, p=args.p,
                               amplitude=args.amplitude)
    except (KeyError, ValueError) as exc:
        print(json.dumps({"error": str(exc)}, sort_keys=True))
        return 2
    report = run_probe(eq, args.grid, rho=args.rho, seed=args.seed)
    payload = report.as_dict()
    _emit(payload, args.out)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "a_k", "log2_a_k"])
            for k, v in enumerate(report.decay.a_k):
                lv = math.log2(v) if v > 0 else -math.inf
                w.writerow([k, repr(float(v)), repr(float(lv))])
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lpw", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run one measured-estimate verification")
    v.add_argument("what", choices=sorted(VERIFIERS))
    v.add_argument("--n", type=int, default=2)
    v.add_argument("--N", type=int, default=None)
    v.add_argument("--seed", type=int, default=1)
    v.add_argument("--out", default=None)
    v.set_defaults(fn=_cmd_verify)

    e = sub.add_parser("exponents", help="closed-form exponent pipeline")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--alpha", type=float, required=True)
    e.add_argument("--beta", type=float, required=True)
    e.add_argument("--gamma", type=float, required=True)
    e.add_argument("--s", type=float, required=True)
    e.add_argument("--p", type=float, required=True)
    e.add_argument("--sigma", type=float, default=None)
    e.add_argument("--r", type=float, default=None)
    e.add_argument("--out", default=None)
    e.set_defaults(fn=_cmd_exponents)

    i = sub.add_parser("iterate", help="sequence iteration check on a CSV")
    i.add_argument("--csv", required=True)
    i.add_argument("--eps", type=float, required=True)
    i.add_argument("--delta", type=float, required=True)
    i.add_argument("--S", type=int, default=0)
    i.add_argument("--out", default=None)
    i.set_defaults(fn=_cmd_iterate)

    p = sub.add_parser("probe", help="end-to-end decay probe")
    p.add_argument("--equation", required=True,
                   help="ns | biharmonic | gjms | custom (aliases accepted)")
    p.add_argument("--grid", type=_grid_arg, required=True, metavar="n,N")
    p.add_argument("--rho", type=float, default=0.75)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--amplitude", type=float, default=1e-2)
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--L", default=None, help="registry symbol for custom equations")
    p.add_argument("--P", default=None)
    p.add_argument("--Q", default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--csv", default=None)
    p.set_defaults(fn=_cmd_probe)
    return ap


def _apply_verify_defaults(args) -> None:
    if args.command == "verify" and args.what == "partition" and args.N is None:
        args.N = 512
    if args.command == "verify" and args.what == "bernstein" and args.N is None:
        args.N = 512


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    _apply_verify_defaults(args)
    try:
        return args.fn(args)
    except ValueError as exc:
        print(json.dumps({"error": str(exc)}, sort_keys=True))
        return 2


if __name__ == "__main__":
    sys.exit(main())
