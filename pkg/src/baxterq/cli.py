"""Command-line interface: ``baxterq {lfactor, eval, verify}``.

Complex numbers are passed as ``re,im`` pairs and lists as comma-separated
values.  Results are JSON (``schema: 1``) except grid dumps, which are CSV.

Exit codes: 0 on success, 1 when a verification check fails, 2 on a
configuration or domain error.

``BAXTERQ_THREADS`` caps the BLAS/OpenMP worker threads (default: all
logical cores).  It is read before numpy is imported.
"""

from __future__ import annotations

import os

THREADS_ENV = "BAXTERQ_THREADS"


def _configure_threads() -> None:
    n = os.environ.get(THREADS_ENV)
    if not n:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, n)


_configure_threads()

import argparse  # noqa: E402
import csv  # noqa: E402
import json  # noqa: E402
import sys  # noqa: E402

import numpy as np  # noqa: E402

from . import baxter, hecke, specfn, verify, whittaker  # noqa: E402
from .errors import BaxterError  # noqa: E402
from .matgrp import GroupTag  # noqa: E402

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
DEFAULT_SEED = 7


class ConfigError(ValueError):
    """Bad command-line input."""


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _complex(text: str) -> complex:
    parts = _floats(text)
    if len(parts) == 1:
        return complex(parts[0])
    if len(parts) != 2:
        raise ConfigError(f"expected a complex number as 're,im', got {text!r}")
    return complex(parts[0], parts[1])


def _effort(text: str) -> int:
    try:
        val = float(text)
    except ValueError:
        raise ConfigError(f"effort must be a number, got {text!r}") from None
    if val < 0 or val != int(val):
        raise ConfigError(f"effort must be a non-negative integer, got {text!r}")
    return int(val)


def _matrix(text: str, n: int) -> np.ndarray:
    vals = _floats(text)
    if len(vals) != n * n:
        raise ConfigError(f"--g needs {n * n} row-major entries for a {n}x{n} matrix")
    return np.array(vals).reshape(n, n)


def _cplx(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _group(args) -> GroupTag:
    return GroupTag.from_name(args.group, args.l)


def _lam(args, count: int) -> list:
    lam = _floats(args.lam)
    if len(lam) != count:
        raise ConfigError(f"--lam needs {count} entries, got {len(lam)}")
    return lam


def cmd_lfactor(args) -> int:
    group = _group(args)
    lam = _lam(args, group.n_spectral)
    s = _complex(args.s)
    if group.kind == "gl":
        val = specfn.l_factor_gl(s, lam)
    else:
        val = specfn.l_factor_classical(s, lam, group.kind)
    _emit(_cplx(val), args.out)
    return EXIT_OK


def _eval_q_kernel(args) -> dict:
    n = args.l + 1
    x, y = np.array(_floats(args.x)), np.array(_floats(args.y))
    if x.size != n or y.size != n:
        raise ConfigError(f"--x and --y need {n} entries each")
    fn = baxter.q_tilde_kernel if args.kind == "tilde" else baxter.q_kernel
    return {"value": _cplx(fn(x, y, _complex(args.s)))}


def _whittaker_fn(args):
    if args.l not in (0, 1):
        raise ConfigError("whittaker is available for --l 0 and --l 1")
    spec = whittaker.WhittakerSpec(tuple(_lam(args, args.l + 1)), args.l)
    if args.l == 0:
        return lambda pts: whittaker.whittaker_gl1(spec.lam.entries[0], pts[0])
    return lambda pts: whittaker.whittaker_gl2(spec.lam, pts)


def _eval_whittaker(args):
    fn = _whittaker_fn(args)
    n = args.l + 1
    if args.grid:
        bounds = _floats(args.grid)
        if len(bounds) != 3 or bounds[2] < 1:
            raise ConfigError("--grid takes lo,hi,count (write --grid=-1,1,21 for negative lo)")
        lo, hi, count = bounds
        axis = np.linspace(lo, hi, int(count))
        mesh = np.meshgrid(*([axis] * n), indexing="ij")
        pts = np.vstack([m.ravel() for m in mesh])
        vals = fn(pts)
        return pts, vals
    x = np.array(_floats(args.x))
    if x.size != n:
        raise ConfigError(f"--x needs {n} entries")
    return {"value": _cplx(fn(x[:, None])[0])}


def _write_csv(pts: np.ndarray, vals: np.ndarray, out: str | None) -> None:
    header = [f"x{i + 1}" for i in range(pts.shape[0])] + ["re", "im"]
    fh = open(out, "w", newline="", encoding="utf-8") if out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(header)
        for col, v in zip(pts.T, np.atleast_1d(vals)):
            v = complex(v)
            w.writerow([repr(float(c)) for c in col] + [repr(v.real), repr(v.imag)])
    finally:
        if out:
            fh.close()


def _eval_spherical(args) -> dict:
    n = args.l + 1
    g = _matrix(args.g, n)
    res = hecke.spherical_function(g, _lam(args, n), effort=args.effort or 20_000,
                                   seed=args.seed)
    return {"value": _cplx(res.value), "error_estimate": float(res.error_estimate),
            "evaluations": res.evaluations}


def _eval_q_group(args) -> dict:
    group = _group(args)
    g = _matrix(args.g, group.n)
    s = _complex(args.s)
    if group.kind == "gl":
        kind = {"plain": "gl_gaussian", "tilde": "gl_gaussian_tilde",
                "squared": "gl_squared"}[args.kind]
        if kind == "gl_squared":
            res = hecke.q2_group(g, s, effort=args.effort or 200_000, seed=args.seed)
            return {"value": _cplx(res.value), "error_estimate": float(res.error_estimate)}
        return {"value": _cplx(hecke.HeckeElement(group, kind, s)(g))}
    if args.effort:
        res = hecke.q_group_classical(g, s, group, args.effort, args.seed)
        return {"value": _cplx(res.value), "error_estimate": float(res.error_estimate),
                "evaluations": res.evaluations}
    return {"value": _cplx(hecke.HeckeElement(group, "classical", s)(g))}


def _eval_r_g(args) -> dict:
    group = _group(args)
    if group.kind == "gl":
        raise ConfigError("r-g is defined for --group so-even and sp")
    g = _matrix(args.g, group.n)
    res = hecke.r_g(g, _complex(args.s), group, args.effort or 1_000_000, args.seed)
    return {"value": _cplx(res.value), "error_estimate": float(res.error_estimate),
            "evaluations": res.evaluations}


_EVAL = {
    "q-kernel": _eval_q_kernel,
    "whittaker": _eval_whittaker,
    "spherical": _eval_spherical,
    "q-group": _eval_q_group,
    "r-g": _eval_r_g,
}


def cmd_eval(args) -> int:
    result = _EVAL[args.object](args)
    if isinstance(result, tuple):
        _write_csv(*result, args.out)
        return EXIT_OK
    _emit({"schema": verify.SCHEMA, "object": args.object, **result}, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    names = verify.SUITES if args.suite == "all" else (args.suite,)
    cfg = verify.Settings(seed=args.seed, effort=args.effort, tol=args.tol)
    reports = [verify.run_suite(name, cfg) for name in names]
    required = all(r.passed for r in reports if not r.optional)
    payload = {
        "schema": verify.SCHEMA,
        "seed": args.seed,
        "effort": args.effort,
        "pass": required,
        "suites": [r.to_json() for r in reports],
    }
    _emit(payload, args.out)
    for r in reports:
        flag = "PASS" if r.passed else "FAIL"
        note = " (optional)" if r.optional else ""
        print(f"{flag} {r.suite}{note}: {sum(x.passed for x in r.records)}/{len(r.records)}"
              f" checks in {r.seconds:.2f} s", file=sys.stderr)
    return EXIT_OK if required else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--group", default="gl", choices=("gl", "so-even", "sp"))
    common.add_argument("--l", type=int, default=0, help="rank")
    common.add_argument("--s", default="0,-2", help="Baxter parameter as re,im")
    common.add_argument("--lam", default="0", help="spectral parameters, comma-separated")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--effort", type=_effort, default=0,
                        help="Monte Carlo samples (0 = per-check default)")
    common.add_argument("--out", default=None, help="write output to this path")
    common.add_argument("--tol", type=float, default=None,
                        help="override deterministic check tolerances")

    parser = argparse.ArgumentParser(prog="baxterq", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("lfactor", parents=[common], help="local L-factor value")

    ev = sub.add_parser("eval", parents=[common], help="evaluate one object")
    ev.add_argument("object", choices=tuple(_EVAL))
    ev.add_argument("--x", default="0")
    ev.add_argument("--y", default="0")
    ev.add_argument("--g", default="1", help="matrix entries, row-major")
    ev.add_argument("--kind", default="plain", choices=("plain", "tilde", "squared"))
    ev.add_argument("--grid", default=None, help="lo,hi,count: CSV grid dump")

    ve = sub.add_parser("verify", parents=[common], help="run verification suites")
    ve.add_argument("--suite", default="all", choices=verify.SUITES + ("all",))
    return parser


_COMMANDS = {"lfactor": cmd_lfactor, "eval": cmd_eval, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return _COMMANDS[args.command](args)
    except ValueError as exc:
        # ConfigError and the domain errors (poles, convergence, shapes)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BaxterError as exc:
        # numerical failures such as non-converging quadrature
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
