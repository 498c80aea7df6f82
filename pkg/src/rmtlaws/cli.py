"""Command-line entry point: ``rmtlaws <metric-check|solve|lsd|spiked|clt> ...``.

Exit status is 0 on success, 1 when a reported criterion fails (or a solver
gives up), and 2 on a usage error. Reports are CSV on standard output, or in
the file named by ``--out``.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from . import laws
from .ensembles import EntryLaw, SpikedConfig, haar_orthogonal
from .experiments import (
    DEFAULTS,
    EnsembleConfig,
    format_complex,
    run_clt_experiment,
    run_lsd_experiment,
    run_spiked_experiment,
)
from .spectra import AtomicDistribution
from .union_metric import UnionSpace, metric_axiom_suite, parse_dims_rule

SEED_ENV = "RMTLAWS_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def parse_complex(text: str) -> complex:
    """Parse ``a+bi`` (also ``bi``, ``a-bi``, ``a``)."""
    t = text.strip().replace(" ", "")
    if t.endswith("i"):
        t = t[:-1] + "j"
    try:
        return complex(t)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad complex literal {text!r}; expected a+bi") from exc


def _spectrum(text: str) -> AtomicDistribution:
    try:
        return AtomicDistribution.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _law(text: str) -> EntryLaw:
    try:
        return EntryLaw.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"unknown entry law {text!r}") from exc


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _complex_list(text: str) -> list[complex]:
    return [parse_complex(v) for v in text.split(",") if v.strip()]


def _seed(value) -> int:
    v = int(value)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rmtlaws", description="Random-matrix spectral laws: solvers and Monte Carlo checks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed=True):
        sp.add_argument("--out", help="write CSV to this path instead of standard output")
        if seed:
            sp.add_argument("--seed", type=_seed, default=None,
                            help=f"master seed (default: ${SEED_ENV} or 0)")

    m = sub.add_parser("metric-check", help="randomized metric-axiom check of the union metric")
    m.add_argument("--spaces", type=int, required=True)
    m.add_argument("--dims", required=True, help="'3', '2,5,1' or a range '1-8'")
    m.add_argument("--samples", type=int, required=True)
    common(m)

    s = sub.add_parser("solve", help="evaluate a limiting Stieltjes transform")
    s.add_argument("--law", choices=("silverstein", "deformed", "semicircle"), required=True)
    s.add_argument("--h", type=_spectrum, default=None, help="population spectrum, e.g. 0.5:1.0,0.5:4.0")
    s.add_argument("--y", type=float, default=None)
    s.add_argument("--z", type=parse_complex, required=True, help="point a+bi with b > 0")
    s.add_argument("--tol", type=float, default=1e-12)
    s.add_argument("--max-iter", type=int, default=100_000)
    common(s, seed=False)

    lsd = sub.add_parser("lsd", help="ESD-to-LSD Kolmogorov-Smirnov experiment")
    lsd.add_argument("--ensemble", choices=("wigner", "covariance", "deformed"), required=True)
    lsd.add_argument("--sizes", type=_int_list, required=True)
    lsd.add_argument("--reps", type=int, required=True)
    lsd.add_argument("--law", type=_law, default=EntryLaw.GAUSS_REAL)
    lsd.add_argument("--diag-variance", type=float, default=1.0)
    lsd.add_argument("--h", type=_spectrum, default=None)
    lsd.add_argument("--y", type=float, default=0.5)
    lsd.add_argument("--t-mode", choices=("apportion", "iid"), default="apportion")
    lsd.add_argument("--v", type=float, default=1e-3, help="inversion smoothing for numeric limit CDFs")
    lsd.add_argument("--ks-threshold", type=float, default=None)
    lsd.add_argument("--workers", type=int, default=1)
    common(lsd)

    sp = sub.add_parser("spiked", help="spiked covariance eigenvalue fluctuations")
    sp.add_argument("--lambdas", type=_float_list, required=True, help="distinct eigenvalues, decreasing")
    sp.add_argument("--mult", type=_int_list, default=None, help="multiplicities (default all 1)")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--reps", type=int, required=True)
    sp.add_argument("--rotation", choices=("identity", "random"), default="identity")
    sp.add_argument("--block-draws", type=int, default=100_000)
    sp.add_argument("--var-tol", type=float, default=DEFAULTS.spiked_variance_rel)
    sp.add_argument("--ks-tol", type=float, default=DEFAULTS.spiked_block_ks)
    sp.add_argument("--corr-tol", type=float, default=DEFAULTS.spiked_cross_corr)
    sp.add_argument("--workers", type=int, default=1)
    common(sp)

    c = sub.add_parser("clt", help="CLT for n[s'_ESD - s'_sc] of Wigner matrices")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--reps", type=int, required=True)
    c.add_argument("--z", type=_complex_list, required=True, help="comma-separated points a+bi")
    c.add_argument("--law", type=_law, default=EntryLaw.GAUSS_REAL)
    c.add_argument("--diag-variance", type=float, default=1.0)
    c.add_argument("--v0", type=float, default=0.5)
    c.add_argument("--se-multiple", type=float, default=DEFAULTS.clt_se_multiple)
    c.add_argument("--workers", type=int, default=1)
    common(c)
    return p


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    return _seed(env) if env else 0


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_metric_check(args) -> int:
    if args.spaces < 1 or args.samples < 1:
        raise UsageError("--spaces and --samples must be positive")
    seed = _resolve_seed(args)
    space = UnionSpace(parse_dims_rule(args.dims, args.spaces, seed))
    report = metric_axiom_suite(space, seed, args.samples)
    line = report.csv_line() + "\n"
    if args.out:
        _emit("max_triangle_violation,max_symmetry_violation,zero_distance_failures\n" + line, args.out)
    else:
        sys.stdout.write(line)
    return 0 if report.passed else 1


def _cmd_solve(args) -> int:
    z = args.z
    if not z.imag > 0:
        raise UsageError("--z must have positive imaginary part")
    settings = laws.SolverSettings(tol=args.tol, max_iter=args.max_iter)
    if args.law == "semicircle":
        s = laws.semicircle_stieltjes(z)
        text = f"s_re,s_im,residual,iters\n{s.real!r},{s.imag!r},{abs(s * s + z * s + 1)!r},0\n"
    elif args.law == "silverstein":
        if args.h is None or args.y is None:
            raise UsageError("--law silverstein needs --h and --y")
        m, info = laws.solve_silverstein(args.h, args.y, z, settings, full_output=True)
        text = f"m_re,m_im,residual,iters\n{m.real!r},{m.imag!r},{info.residual!r},{info.iterations}\n"
    else:
        if args.h is None:
            raise UsageError("--law deformed needs --h")
        (s, g), info = laws.solve_deformed_wigner(args.h, z, settings, full_output=True)
        text = (f"s_re,s_im,g_re,g_im,residual,iters\n"
                f"{s.real!r},{s.imag!r},{g.real!r},{g.imag!r},{info.residual!r},{info.iterations}\n")
    _emit(text, args.out)
    return 0


def _cmd_lsd(args) -> int:
    ens = EnsembleConfig(args.ensemble, args.law, args.diag_variance, args.h, args.y, args.t_mode)
    tol = DEFAULTS
    if args.ks_threshold is not None:
        field = {"wigner": "ks_wigner", "covariance": "ks_covariance", "deformed": "ks_deformed"}[args.ensemble]
        tol = replace(tol, **{field: args.ks_threshold})
    report = run_lsd_experiment(ens, args.sizes, args.reps, _resolve_seed(args), args.workers, tol, args.v)
    _emit(report.to_csv(), args.out)
    return 0 if report.passed else 1


def _cmd_spiked(args) -> int:
    mult = args.mult or [1] * len(args.lambdas)
    seed = _resolve_seed(args)
    d = sum(mult)
    rotation = haar_orthogonal(d, seed) if args.rotation == "random" else None
    config = SpikedConfig(tuple(args.lambdas), tuple(mult), args.n, rotation)
    tol = replace(DEFAULTS, spiked_variance_rel=args.var_tol, spiked_block_ks=args.ks_tol,
                  spiked_cross_corr=args.corr_tol)
    report = run_spiked_experiment(config, args.reps, seed, args.workers, args.block_draws, tol)
    _emit(report.to_csv(), args.out)
    return 0 if report.passed else 1


def _cmd_clt(args) -> int:
    tol = replace(DEFAULTS, clt_se_multiple=args.se_multiple)
    report = run_clt_experiment(args.n, args.reps, args.z, args.law, _resolve_seed(args), args.diag_variance,
                                args.v0, args.workers, tol)
    _emit(report.to_csv(), args.out)
    return 0 if report.passed else 1


COMMANDS = {
    "metric-check": _cmd_metric_check,
    "solve": _cmd_solve,
    "lsd": _cmd_lsd,
    "spiked": _cmd_spiked,
    "clt": _cmd_clt,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValueError) as exc:
        print(f"rmtlaws {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (laws.NonConvergenceError, ArithmeticError) as exc:
        print(f"rmtlaws {args.command}: {exc}", file=sys.stderr)
        return 1


cli_main = main

if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
