"""Command line front end.

    permuton-rs rs 4 2 7 6 1 3 5
    permuton-rs finv --top "3 2 2 1" --right "3 2 2"
    permuton-rs permuton lis --spec fig6-mu1 --k 2
    permuton-rs exp convergence --spec fig6-mu1 --k 1 --n 5000 --seed 1 --outdir out

Experiments exit with 0 when every check passes, 2 when some check is
inconclusive and 1 on failure.  Whenever ``--outdir`` is given a
``manifest.json`` listing the command, its parameters, the seed, library
versions and every written file (with its SHA-256) is written next to the
outputs.  Nothing time-dependent goes into any output.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import platform
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from . import lab
from .fomin import fomin_direct, fomin_inverse
from .permuton import (BUILTINS, NotNonCrossing, SpecError, decompose, lambda_tilde, lds_tilde_discretized,
                       lds_tilde_exact, lis_tilde_discretized, lis_tilde_exact, load_spec, mirror, sample_permutation,
                       sh_tilde, validate_marginals)
from .rs_core import format_partition, format_word, greene_invariants, parse_word, rs_correspondence


class UsageError(Exception):
    pass


class Output:
    """Collects files written by a command and emits the manifest."""

    def __init__(self, outdir: str | None, command: list[str], params: dict, seed=None):
        self.outdir = Path(outdir) if outdir else None
        self.command = command
        self.params = params
        self.seed = seed
        self.files: list[Path] = []

    def write(self, name: str, text: str):
        if self.outdir is None:
            return None
        self.outdir.mkdir(parents=True, exist_ok=True)
        path = self.outdir / name
        path.write_text(text, encoding="utf-8")
        self.files.append(path)
        return path

    def finish(self):
        if self.outdir is None:
            return
        manifest = {
            "command": self.command,
            "params": {k: _plain(v) for k, v in sorted(self.params.items())},
            "seed": self.seed,
            "versions": {"permuton_rs": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                         "python": platform.python_version()},
            "outputs": [{"file": p.name, "sha256": hashlib.sha256(p.read_bytes()).hexdigest()}
                        for p in sorted(self.files)],
        }
        (self.outdir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                                   encoding="utf-8")


def _plain(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def _word_arg(text: str):
    try:
        return parse_word(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _fmt(v) -> str:
    if isinstance(v, Fraction):
        return repr(float(v))
    return str(v)


# ---------------------------------------------------------------------------
# commands


def cmd_rs(args) -> int:
    w = _word_arg(" ".join(args.letters))
    if any(a == 0 for a in w):
        raise UsageError("letter 0 is not allowed in RS input")
    out = Output(args.outdir, ["rs", *args.letters], {"grid": args.grid, "fomin": args.fomin, "kmax": args.kmax})
    pair = rs_correspondence(w)
    lines = ["P:"]
    lines += ["  " + format_word(r) for r in pair.p_rows()]
    lines += ["Q:"]
    lines += ["  " + format_word(r) for r in pair.q_rows()]
    lines.append(f"shape {format_partition(pair.shape)}")
    kmax = args.kmax or max(1, len(pair.shape), pair.shape[0] if pair.shape else 1)
    lis, lds = greene_invariants(w, kmax) if w else ((0,) * kmax, (0,) * kmax)
    lines.append("k LIS_k LDS_k")
    lines += [f"{k} {a} {b}" for k, (a, b) in enumerate(zip(lis, lds), start=1)]
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    out.write("rs.txt", text)
    perm = sorted(w) == list(range(1, len(w) + 1))
    if args.grid or args.fomin:
        if not perm:
            raise UsageError("--grid and --fomin need a permutation")
    if args.grid:
        from .rs_core import lambda_grid
        csv_text = lambda_grid(w).to_csv()
        if out.outdir is None:
            sys.stdout.write(csv_text)
        out.write("lambda_grid.csv", csv_text)
    if args.fomin:
        grid = fomin_direct(w)
        text = grid.render() + "\n"
        text += f"north {format_word(grid.north_word())}\neast {format_word(grid.east_word())}\n"
        if args.rect:
            i, i2, j, j2 = args.rect
            words = grid.rectangle_words(i, i2, j, j2)
            for side in ("top", "right", "bottom", "left"):
                text += f"{side} {format_word(words[side])}\n"
        sys.stdout.write(text)
        out.write("fomin.txt", text)
    out.finish()
    return 0


def cmd_finv(args) -> int:
    top, right = _word_arg(args.top), _word_arg(args.right)
    bottom, left = fomin_inverse(top, right)
    text = f"bottom {format_word(bottom)}\nleft {format_word(left)}\n"
    sys.stdout.write(text)
    out = Output(args.outdir, ["finv"], {"top": args.top, "right": args.right})
    out.write("finv.txt", text)
    out.finish()
    return 0


def _lis_text(sp, k, decreasing=False) -> str:
    exact = lds_tilde_exact if decreasing else lis_tilde_exact
    approx = lds_tilde_discretized if decreasing else lis_tilde_discretized
    try:
        return _fmt(exact(sp, k))
    except NotNonCrossing:
        est = approx(sp, k, 400)
        return f"{est.value!r} +- {est.bound!r} (discretized)"


def cmd_permuton(args) -> int:
    try:
        sp = load_spec(args.spec)
    except (SpecError, KeyError) as exc:
        raise UsageError(str(exc)) from None
    params = {k: v for k, v in vars(args).items() if k not in ("func", "outdir", "command", "sub")}
    out = Output(args.outdir, ["permuton", args.sub], params, seed=getattr(args, "seed", None))
    code = 0
    if args.sub == "validate":
        try:
            res = validate_marginals(sp, args.tol)
            text = ("ok: " if res.ok else "invalid: ") + res.message + "\n"
            code = 0 if res.ok else 1
        except SpecError as exc:
            text, code = f"invalid: {exc}\n", 1
    elif args.sub == "sample":
        seed = lab.resolve_seed(args.seed)
        out.seed = seed
        text = format_word(sample_permutation(sp, args.n, seed)) + "\n"
    elif args.sub == "lis":
        text = _lis_text(sp, args.k) + "\n"
    elif args.sub == "lds":
        text = _lis_text(sp, args.k, decreasing=True) + "\n"
    elif args.sub == "shape":
        sh = sh_tilde(sp, args.kmax)
        text = "alpha " + " ".join(_fmt(a) for a in sh.alpha) + "\n"
        text += "beta " + " ".join(_fmt(b) for b in sh.beta) + "\n"
    elif args.sub == "lambda":
        lam = lambda_tilde(sp, args.kmax)
        pts = [Fraction(i, args.lattice - 1) for i in range(args.lattice)]
        lines = ["x,y,k,value"]
        for x, y, k, v in lam.grid(pts, pts):
            lines.append(f"{float(x)!r},{float(y)!r},{k},{float(v)!r}")
        text = "\n".join(lines) + "\n"
    elif args.sub == "decompose":
        incr, decr, sub = decompose(sp)
        text = f"incr {_fmt(incr.mass)}\ndecr {_fmt(decr.mass)}\nsub {_fmt(sub.mass)}\n"
    elif args.sub == "mirror":
        text = mirror(sp).dumps() + "\n"
    else:  # pragma: no cover
        raise UsageError(f"unknown subcommand {args.sub}")
    sys.stdout.write(text)
    ext = {"lambda": "csv", "mirror": "json"}.get(args.sub, "txt")
    out.write(f"{args.sub}.{ext}", text)
    out.finish()
    return code


def _exit_code(report) -> int:
    return {"pass": 0, "inconclusive": 2, "fail": 1}[report.status]


def _ns(args, default):
    return args.n if args.n else default


def cmd_exp(args) -> int:
    seed = lab.resolve_seed(args.seed)
    name = args.sub
    params = {k: v for k, v in vars(args).items() if k not in ("func", "outdir", "command", "sub", "workers", "seed")}
    workers = args.workers
    if name == "convergence":
        rep = lab.convergence_experiment(args.spec, args.k, _ns(args, [5000]), args.reps or 20, seed,
                                         tol=args.tol or 0.02, workers=workers)
    elif name == "lambda":
        rep = lab.lambda_convergence_experiment(args.spec, (args.n or [5000])[0], args.k, args.lattice,
                                                args.reps or 1, seed, tol=args.tol or 0.05)
    elif name == "upper-tail":
        ns_exact = [n for n in range(2, 10) if n <= args.exact_max]
        ns = args.n or list(range(10, 31))
        rep = lab.upper_tail_experiment(args.spec, args.k, args.alpha, ns_exact, ns, args.reps or 200_000, seed,
                                        workers=workers)
    elif name == "identity":
        rep = lab.identity_probability_experiment(args.spec, _ns(args, list(range(4, 11))), args.reps or 10_000_000,
                                                  seed, tol=args.tol or 0.1, workers=workers)
    elif name == "lower-tail":
        rep = lab.lower_tail_report(args.spec, args.beta, _ns(args, [10, 20, 40]), args.reps or 100_000, seed,
                                    workers=workers)
    elif name == "lower-tail-compare":
        rep = lab.lower_tail_comparison(args.spec, args.other, args.beta, _ns(args, list(range(2, 25))),
                                        args.reps or 100_000, seed, workers=workers)
    elif name == "derivative":
        rep = lab.derivative_check(args.spec, args.x, args.y, args.t, args.s, args.kmax,
                                   tol=args.tol or 1e-6)
    else:  # pragma: no cover
        raise UsageError(f"unknown experiment {name}")
    out = Output(args.outdir, ["exp", name], params, seed=seed)
    out.write(f"{name}.json", rep.dumps())
    out.write(f"{name}.csv", rep.to_csv())
    out.finish()
    for c in rep.checks:
        sys.stdout.write(f"[{c.status}] {c.name}: estimate={_jsonish(c.estimate)} reference={_jsonish(c.reference)}\n")
    sys.stdout.write(f"status {rep.status}\n")
    return _exit_code(rep)


def _jsonish(v):
    return json.dumps(lab._jsonable(v))


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="permuton-rs", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    rs = sub.add_parser("rs", help="RS tableaux, shape and Greene invariants of a word")
    rs.add_argument("letters", nargs="*", help="letters (space separated, may be quoted)")
    rs.add_argument("--grid", action="store_true", help="emit the lambda grid as CSV")
    rs.add_argument("--fomin", action="store_true", help="print the Fomin edge grid")
    rs.add_argument("--rect", type=int, nargs=4, metavar=("I", "I2", "J", "J2"),
                    help="with --fomin, print the words around [I,I2]x[J,J2]")
    rs.add_argument("--kmax", type=int, default=None)
    rs.add_argument("--outdir")
    rs.set_defaults(func=cmd_rs)

    fi = sub.add_parser("finv", help="Fomin inverse map on a top and a right word")
    fi.add_argument("--top", required=True)
    fi.add_argument("--right", required=True)
    fi.add_argument("--outdir")
    fi.set_defaults(func=cmd_finv)

    pm = sub.add_parser("permuton", help="permuton functionals")
    pms = pm.add_subparsers(dest="sub", required=True)
    for name in ("validate", "sample", "lis", "lds", "shape", "lambda", "decompose", "mirror"):
        q = pms.add_parser(name)
        q.add_argument("--spec", required=True, help=f"built-in key ({', '.join(BUILTINS)}) or JSON path")
        q.add_argument("--outdir")
        if name == "validate":
            q.add_argument("--tol", type=float, default=1e-9)
        if name == "sample":
            q.add_argument("--n", type=int, required=True)
            q.add_argument("--seed", type=int, default=None)
        if name in ("lis", "lds"):
            q.add_argument("--k", type=int, default=1)
        if name in ("shape", "lambda"):
            q.add_argument("--kmax", type=int, default=4)
        if name == "lambda":
            q.add_argument("--lattice", type=int, default=11)
        q.set_defaults(func=cmd_permuton)

    ex = sub.add_parser("exp", help="seeded experiments")
    exs = ex.add_subparsers(dest="sub", required=True)
    for name in ("convergence", "lambda", "upper-tail", "identity", "lower-tail", "lower-tail-compare", "derivative"):
        q = exs.add_parser(name)
        q.add_argument("--spec", required=True)
        q.add_argument("--seed", type=int, default=None, help=f"overrides ${lab.SEED_ENV}")
        q.add_argument("--outdir", default="reports")
        q.add_argument("--workers", type=int, default=os.cpu_count() or 1)
        q.add_argument("--reps", type=int, default=None)
        q.add_argument("--tol", type=float, default=None)
        q.add_argument("--n", type=int, nargs="*", default=None)
        q.add_argument("--k", type=int, default=1)
        if name == "lambda":
            q.add_argument("--lattice", type=int, default=21)
        if name == "upper-tail":
            q.add_argument("--alpha", type=float, default=0.8)
            q.add_argument("--exact-max", type=int, default=9)
        if name in ("lower-tail", "lower-tail-compare"):
            q.add_argument("--beta", type=float, default=0.55)
        if name == "lower-tail-compare":
            q.add_argument("--other", required=True)
        if name == "derivative":
            for coord, default in (("x", "1"), ("y", "1"), ("t", "1"), ("s", "1")):
                q.add_argument(f"--{coord}", type=Fraction, default=Fraction(default))
            q.add_argument("--kmax", type=int, default=None)
        q.set_defaults(func=cmd_exp)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2
    except (SpecError, KeyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
