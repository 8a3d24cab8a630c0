"""Command-line interface: ``srexit {eig,mgf,moments,simulate,expcheck}``.

Every output starts with ``#`` manifest lines (command, parameters, version,
timestamp) followed by a CSV header. Numbers use 17 significant digits so
they re-parse to the same double.

Exit codes: 0 success, 2 domain error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import contextlib
import datetime
import os
import sys

import numpy as np

from . import __version__
from .errors import ConvergenceError, DomainError, SRExitError
from .exitlaw import ExitProblem, MgfQuery, mgf, moments, principal_eigenvalue, scaled_mgf
from .montecarlo import SimConfig, empirical_survival, simulate_exit
from .spectral import ModelParams, solve_lambda_a

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def fmt(x):
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _timestamp():
    # SOURCE_DATE_EPOCH pins the clock so repeated runs give identical bytes
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        now = datetime.datetime.fromtimestamp(int(epoch), datetime.timezone.utc)
    else:
        now = datetime.datetime.now(datetime.timezone.utc)
    return now.isoformat(timespec="seconds")


def manifest(command, params):
    stamp = _timestamp()
    lines = [
        f"# command: {command}",
        "# parameters: " + ", ".join(f"{k}={v}" for k, v in params.items()),
        f"# tool_version: {__version__}",
        f"# timestamp: {stamp}",
    ]
    return "\n".join(lines) + "\n"


def _params_of(args):
    return {k: v for k, v in vars(args).items() if k not in ("func", "command")}


@contextlib.contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        yield fh


def _emit(args, header, rows, path=None):
    with _output(path) as fh:
        fh.write(manifest(args.command, _params_of(args)))
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def cmd_eig(args):
    params = ModelParams(args.mu)
    res = solve_lambda_a(args.A, params, args.tol)
    _emit(args, ["A", "mu", "lambda_A", "lo", "hi", "residual", "iterations"],
          [[args.A, args.mu, res.lambda_A, res.bracket_lo, res.bracket_hi, res.residual, res.iterations]])


def cmd_mgf(args):
    params = ModelParams(args.mu)
    problem = ExitProblem(args.A, args.r)
    if args.scaled:
        value = scaled_mgf(args.alpha, problem, params)
    else:
        value = mgf(MgfQuery(args.alpha, problem, params))
    _emit(args, ["A", "r", "mu", "alpha", "scaled", "value"],
          [[args.A, args.r, args.mu, args.alpha, bool(args.scaled), value]])


def cmd_moments(args):
    params = ModelParams(args.mu)
    m = moments(ExitProblem(args.A, args.r), params)
    _emit(args, ["A", "r", "mu", "m1", "m2", "m3"], [[args.A, args.r, args.mu, m.m1, m.m2, m.m3]])


def cmd_simulate(args):
    params = ModelParams(args.mu)
    problem = ExitProblem(args.A, args.r)
    cfg = SimConfig(step=args.step, paths=args.paths, seed=args.seed, bridge=not args.no_bridge)
    sample = simulate_exit(problem, params, cfg)
    with _output(args.out) as fh:
        fh.write(manifest(args.command, _params_of(args)))
        fh.write(f"# censored: {sample.censored}\n")
        fh.write("exit_time\n")
        fh.write("".join(fmt(t) + "\n" for t in sample.times))


def _sub_seed(seed, i):
    return int(np.random.SeedSequence([seed, i]).generate_state(1, dtype=np.uint64)[0])


def expcheck_rows(A, r, mu_list, grid, paths, seed, step):
    """Rows (mu, t, log_surv_est, abs_err, ci_half_width) sorted by mu then t.

    The half-width is for the log-survival, hw(p) / p by the delta method.
    """
    problem = ExitProblem(A, r)
    rows = []
    for i, mu in enumerate(sorted(mu_list)):
        params = ModelParams(mu)
        lam = principal_eigenvalue(A, params)
        cfg = SimConfig(step=step, paths=paths, seed=_sub_seed(seed, i))
        sample = simulate_exit(problem, params, cfg)
        curve = empirical_survival(sample, -lam, grid)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_p = np.log(curve.estimate)
            hw = np.where(curve.estimate > 0, curve.half_width / curve.estimate, np.inf)
        err = np.abs(-log_p - grid)
        for t, lp, e, h in zip(grid, log_p, err, hw):
            rows.append((mu, t, lp, e, h))
    return rows


def cmd_expcheck(args):
    if args.tsteps < 2 or not args.tmax > 0:
        raise DomainError("need tmax > 0 and tsteps >= 2")
    try:
        mus = [float(m) for m in args.mu_list.split(",") if m.strip()]
    except ValueError:
        raise DomainError(f"cannot parse --mu-list {args.mu_list!r}") from None
    if not mus:
        raise DomainError("--mu-list is empty")
    grid = np.linspace(0.0, args.tmax, args.tsteps)
    rows = expcheck_rows(args.A, args.r, mus, grid, args.paths, args.seed, args.step)
    _emit(args, ["mu", "t", "log_surv_est", "abs_err", "ci_half_width"], rows, args.out)


def build_parser():
    p = argparse.ArgumentParser(prog="srexit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("eig", help="principal eigenvalue lambda_A")
    s.add_argument("--A", type=float, required=True)
    s.add_argument("--mu", type=float, default=1.0)
    s.add_argument("--tol", type=float, default=1e-12)
    s.set_defaults(func=cmd_eig)

    s = sub.add_parser("mgf", help="Laplace transform E[exp(-alpha S)]")
    s.add_argument("--A", type=float, required=True)
    s.add_argument("--r", type=float, default=0.0)
    s.add_argument("--mu", type=float, default=1.0)
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--scaled", action="store_true", help="evaluate at -alpha * lambda_A")
    s.set_defaults(func=cmd_mgf)

    s = sub.add_parser("moments", help="first three moments of S")
    s.add_argument("--A", type=float, required=True)
    s.add_argument("--r", type=float, default=0.0)
    s.add_argument("--mu", type=float, default=1.0)
    s.set_defaults(func=cmd_moments)

    s = sub.add_parser("simulate", help="Monte Carlo exit times")
    s.add_argument("--A", type=float, required=True)
    s.add_argument("--r", type=float, default=0.0)
    s.add_argument("--mu", type=float, default=1.0)
    s.add_argument("--paths", type=int, default=10000)
    s.add_argument("--step", type=float, default=1e-3)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--no-bridge", action="store_true", help="disable the bridge crossing correction")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("expcheck", help="log-survival of -lambda_A S against -t")
    s.add_argument("--A", type=float, default=100.0)
    s.add_argument("--r", type=float, default=0.0)
    s.add_argument("--mu-list", default="0.5,1,1.5")
    s.add_argument("--tmax", type=float, default=10.0)
    s.add_argument("--tsteps", type=int, default=101)
    s.add_argument("--paths", type=int, default=100000)
    s.add_argument("--step", type=float, default=0.02)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_expcheck)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except OSError as exc:
        print(f"srexit: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConvergenceError as exc:
        print(f"srexit: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (SRExitError, ValueError) as exc:
        print(f"srexit: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OverflowError as exc:
        print(f"srexit: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
