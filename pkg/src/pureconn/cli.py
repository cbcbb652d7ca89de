"""Command-line front end: ``decompose`` point queries and ``check <suite>`` runs.

Reports are JSON lines on stdout (or ``--out``): a config echo record, one record per
check sorted by name, and a summary record. A human summary goes to stderr.
Exit codes: 0 all checks pass, 1 a check failed (or a numerical error), 2 usage/config error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from datetime import datetime, timezone

import numpy as np

from . import __version__, kernels
from .config import load_config
from .curvature import chiral_decompose, riemann
from .errors import ConfigError, PureConnError
from .models import MODEL_NAMES, get_model, metric_jet
from .suites import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _point(text):
    try:
        p = [float(s) for s in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad point {text!r}") from exc
    if len(p) != 4:
        raise ConfigError("a point needs four comma-separated coordinates")
    return np.array(p)


def _common(sp):
    sp.add_argument("--config", help="file of 'key = value' lines (flags override it)")
    sp.add_argument("--model", choices=MODEL_NAMES)
    sp.add_argument("--scale", type=float)
    sp.add_argument("--lambda", dest="lam", type=float)
    sp.add_argument("--scheme", choices=("analytic", "fd"))
    sp.add_argument("--h", type=float)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", help="write the report here instead of stdout")


def build_parser():
    ap = _Parser(prog="pureconn", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"pureconn {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    dec = sub.add_parser("decompose", help="chiral curvature decomposition at a point")
    _common(dec)
    dec.add_argument("--point", required=True, help="x1,x2,x3,x4")
    dec.add_argument("--orientation", type=int, choices=(1, -1), default=1)
    chk = sub.add_parser("check", help="run a verification suite")
    chk.add_argument("suite", choices=sorted(SUITES) + ["all"])
    _common(chk)
    chk.add_argument("--point", help="unused by the suites; accepted for a uniform flag set")
    chk.add_argument("--points", type=int)
    chk.add_argument("--workers", type=int)
    for sp in (dec, chk):
        sp.error = ap.error
    return ap


def _config(args):
    keys = ("model", "scale", "lam", "scheme", "h", "tol", "seed", "out", "points", "workers")
    return load_config(args.config, {k: getattr(args, k, None) for k in keys})


def _emit(lines, out):
    text = "".join(line + "\n" for line in lines)
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _summary(n_pass, n_fail, t0):
    return json.dumps({"summary": {"passed": n_pass, "failed": n_fail, "backend": kernels.BACKEND,
                                   "elapsed_s": round(time.perf_counter() - t0, 3),
                                   "timestamp": datetime.now(timezone.utc).isoformat()}},
                      sort_keys=True)


def cmd_decompose(args):
    cfg = _config(args)
    if cfg.model is None:
        raise ConfigError("decompose needs --model")
    t0 = time.perf_counter()
    p = _point(args.point)
    m = get_model(cfg.model, cfg.scale, args.orientation)
    d = chiral_decompose(riemann(metric_jet(m, p, cfg.scheme, cfg.h)), orientation=args.orientation)
    rec = {"model": cfg.model, "point": p.tolist(), "orientation": args.orientation,
           "scheme": cfg.scheme, "Rplus": d.Rplus.tolist(), "Rminus": d.Rminus.tolist(),
           "C": d.C.tolist(), "scalar": float(d.scalar),
           "spectrum_plus": np.linalg.eigvalsh(d.Rplus).tolist(),
           "spectrum_minus": np.linalg.eigvalsh(d.Rminus).tolist()}
    _emit([json.dumps({"config": cfg.echo()}, sort_keys=True), json.dumps(rec, sort_keys=True),
           _summary(1, 0, t0)], cfg.out)
    print(f"{cfg.model} at {p.tolist()}: scalar {d.scalar:.6g}, spectrum R+ "
          f"{np.round(np.linalg.eigvalsh(d.Rplus), 8).tolist()}", file=sys.stderr)
    return EXIT_OK


def cmd_check(args):
    cfg = _config(args)
    t0 = time.perf_counter()
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    records = sorted((r for n in names for r in run_suite(n, cfg)), key=lambda r: r.name)
    n_fail = sum(not r.passed for r in records)
    lines = [json.dumps({"config": cfg.echo(), "suite": args.suite}, sort_keys=True)]
    lines += [r.to_json() for r in records]
    lines.append(_summary(len(records) - n_fail, n_fail, t0))
    _emit(lines, cfg.out)
    for r in records:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}", file=sys.stderr)
    print(f"{len(records) - n_fail}/{len(records)} checks passed", file=sys.stderr)
    return EXIT_OK if n_fail == 0 else EXIT_FAIL


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return {"decompose": cmd_decompose, "check": cmd_check}[args.command](args)
    except ConfigError as exc:
        print(f"pureconn: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PureConnError as exc:
        print(f"pureconn: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
