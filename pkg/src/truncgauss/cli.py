"""Command-line surface: single-point queries, figure data, verify suites.

Emits CSV (default) or JSON.  Exit codes: 0 on success (including claim
findings, which are flagged in the JSON rather than the exit code), 2 on
usage errors, 3 on numeric failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import eta as eta_mod
from . import moments as moments_mod
from . import xi as xi_mod
from .ball import (MultiIndex, Spectrum, ball_integral, ball_integral_mc,
                   verify_structural)
from .errors import DomainError, NumericError, TruncGaussError
from .expansion import convergence_estimate
from .report import Report

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3

_FIGURES = ("delta-grid", "gamma-curves", "gamma-convergence", "cp-table")
_SUITES = ("structural", "inequalities", "eta", "asymptotic", "xi", "all")


@dataclass
class RunConfig:
    command: str
    rho: float | None = None
    rho_range: tuple[float, float, int, str] | None = None
    lambdas: tuple[float, ...] = ()
    v: int | None = None
    index: str = ""
    order: int = 4
    qmax: int = 6
    seed: int = 0
    out: str | None = None
    fmt: str = "csv"
    figure: str | None = None
    suite: str | None = None
    quick: bool = False
    use_mc: bool = False
    samples: int = 1_000_000


def _fmt(x: float) -> str:
    return f"{x:.16e}"


def _threads() -> int:
    raw = os.environ.get("TG_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_grid(fn, items):
    """Apply fn over grid cells, ordered by cell index regardless of workers."""
    workers = _threads()
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _parse_lambdas(raw: str) -> tuple[float, ...]:
    try:
        lams = tuple(float(tok) for tok in raw.split(",") if tok.strip())
    except ValueError as exc:
        raise DomainError(f"could not parse variance list {raw!r}") from exc
    if not lams:
        raise DomainError("variance list is empty")
    return lams


def _parse_index(raw: str, v: int) -> MultiIndex:
    ks = [0] * v
    raw = raw.strip()
    if raw:
        for token in raw.split(","):
            try:
                dim_s, mult_s = token.split(":")
                dim, mult = int(dim_s), int(mult_s)
            except ValueError as exc:
                raise DomainError(
                    f"index token {token!r} is not of the form dim:mult"
                ) from exc
            if not 1 <= dim <= v:
                raise DomainError(f"index dimension {dim} outside 1..{v}")
            if mult < 0:
                raise DomainError(f"multiplicity must be >= 0, got {mult}")
            ks[dim - 1] += mult
    return MultiIndex(tuple(ks))


def _parse_rho_range(raw: str) -> tuple[float, float, int, str]:
    parts = raw.split(":")
    if len(parts) != 4:
        raise DomainError("rho range must be min:max:points:scale")
    try:
        lo, hi = float(parts[0]), float(parts[1])
        points = int(parts[2])
    except ValueError as exc:
        raise DomainError(f"could not parse rho range {raw!r}") from exc
    scale = parts[3]
    if scale not in ("lin", "log"):
        raise DomainError(f"scale must be lin or log, got {scale!r}")
    if points < 2:
        raise DomainError("grids need at least 2 points")
    if not (0.0 < lo < hi):
        raise DomainError(f"need 0 < min < max, got {lo}, {hi}")
    return lo, hi, points, scale


def _grid(lo: float, hi: float, points: int, scale: str) -> np.ndarray:
    if scale == "log":
        return np.geomspace(lo, hi, points)
    return np.linspace(lo, hi, points)


def _emit(lines: list[str], out: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _spectrum(cfg: RunConfig) -> Spectrum:
    spec = Spectrum(cfg.lambdas)
    if cfg.v is not None and cfg.v != spec.v:
        raise DomainError(
            f"--v {cfg.v} does not match the {spec.v} variances given"
        )
    return spec


def _rho_values(cfg: RunConfig) -> list[float] | None:
    if cfg.rho_range is not None:
        return [float(r) for r in _grid(*cfg.rho_range)]
    if cfg.rho is not None:
        return None  # single-point mode
    raise DomainError(f"{cfg.command} needs --rho or --rho-range")


def cmd_integral(cfg: RunConfig) -> int:
    spec = _spectrum(cfg)
    index = _parse_index(cfg.index, spec.v)
    if cfg.use_mc:
        if cfg.rho is None:
            raise DomainError("integral --mc needs --rho")
        est = ball_integral_mc(index, cfg.rho, spec, cfg.samples, cfg.seed)
        if cfg.fmt == "json":
            _emit([json.dumps({"mean": est.mean, "std_error": est.std_error,
                               "n_kept": est.n_kept, "n_total": est.n_total,
                               "seed": est.seed})], cfg.out)
        else:
            _emit(["mean,std_error,n_kept,n_total",
                   f"{_fmt(est.mean)},{_fmt(est.std_error)},"
                   f"{est.n_kept},{est.n_total}"], cfg.out)
        return EXIT_OK
    rhos = _rho_values(cfg)
    if rhos is None:
        result = ball_integral(index, cfg.rho, spec)
        if cfg.fmt == "json":
            _emit([json.dumps({"value": result.value,
                               "est_abs_error": result.est_abs_error})], cfg.out)
        else:
            _emit(["value,est_abs_error",
                   f"{_fmt(result.value)},{_fmt(result.est_abs_error)}"], cfg.out)
        return EXIT_OK
    rows = _map_grid(lambda r: ball_integral(index, r, spec), rhos)
    if cfg.fmt == "json":
        _emit([json.dumps([
            {"rho": r, "value": x.value, "est_abs_error": x.est_abs_error}
            for r, x in zip(rhos, rows)])], cfg.out)
    else:
        lines = ["rho,value,est_abs_error"]
        lines += [f"{_fmt(r)},{_fmt(x.value)},{_fmt(x.est_abs_error)}"
                  for r, x in zip(rhos, rows)]
        _emit(lines, cfg.out)
    return EXIT_OK


def cmd_moments(cfg: RunConfig) -> int:
    spec = _spectrum(cfg)
    rhos = _rho_values(cfg)
    single = rhos is None
    if single:
        rhos = [cfg.rho]

    def at(rho: float):
        return (moments_mod.conditional_moments(rho, spec),
                moments_mod.correlation_set(rho, spec))

    rows = _map_grid(at, rhos)
    if cfg.fmt == "json":
        payload = [
            {
                "rho": rho,
                "second": list(mom.second),
                "fourth": list(mom.fourth),
                "gamma": [list(r) for r in cors.gamma],
                "delta": list(cors.delta),
            }
            for rho, (mom, cors) in zip(rhos, rows)
        ]
        _emit([json.dumps(payload[0] if single else payload)], cfg.out)
        return EXIT_OK
    head = ["rho", "n", "lambda", "second_moment", "fourth_moment", "variance_gap"]
    head += [f"gamma_{m + 1}" for m in range(spec.v)]
    lines = [",".join(head)]
    for rho, (mom, cors) in zip(rhos, rows):
        for n in range(spec.v):
            row = [_fmt(rho), str(n + 1), _fmt(spec.lambdas[n]),
                   _fmt(mom.second[n]), _fmt(mom.fourth[n]),
                   _fmt(cors.delta[n])]
            row += [_fmt(cors.gamma[n][m]) for m in range(spec.v)]
            lines.append(",".join(row))
    _emit(lines, cfg.out)
    return EXIT_OK


def cmd_eta(cfg: RunConfig) -> int:
    spec = _spectrum(cfg)
    rhos = _rho_values(cfg)
    single = rhos is None
    if single:
        rhos = [cfg.rho]
    ks = range(1, cfg.order + 1)
    rows = _map_grid(
        lambda rho: [(k, eta_mod.eta_combinatorial(k, rho, spec)) for k in ks],
        rhos)
    if cfg.fmt == "json":
        payload = [{"rho": rho, "eta": {k: v for k, v in values}}
                   for rho, values in zip(rhos, rows)]
        _emit([json.dumps(payload[0] if single else payload)], cfg.out)
    else:
        lines = ["rho,k,eta"]
        for rho, values in zip(rhos, rows):
            lines += [f"{_fmt(rho)},{k},{_fmt(v)}" for k, v in values]
        _emit(lines, cfg.out)
    return EXIT_OK


def _figure_delta_grid(quick: bool = False) -> list[str]:
    """Variance-gap signs over a log grid of two-dimensional spectra.

    The grid covers rho/lambda in [0.1, 50] on both axes at unit radius
    (60 x 60 points, 20 x 20 in quick mode).
    """
    points = 20 if quick else 60
    rho = 1.0
    lams = np.geomspace(rho / 50.0, rho / 0.1, points)
    lines = ["lambda1,lambda2,delta_1,delta_2"]

    def cell(pair):
        l1, l2 = pair
        spec = Spectrum((l1, l2))
        cors = moments_mod.correlation_set(rho, spec)
        return (f"{_fmt(l1)},{_fmt(l2)},"
                f"{_fmt(cors.delta[0])},{_fmt(cors.delta[1])}")

    cells = [(l1, l2) for l1 in lams for l2 in lams]
    lines.extend(_map_grid(cell, cells))
    return lines


def _figure_gamma_curves(quick: bool = False) -> list[str]:
    spec = Spectrum((1.0, 2.0, 3.0))
    points = 12 if quick else 30
    rhos = np.geomspace(1.0, 30.0, points)
    pairs = [(0, 1), (0, 2), (1, 2)]
    head = "rho_over_lambda3," + ",".join(
        f"abs_gamma_{n + 1}{m + 1}" for n, m in pairs)
    lines = [head]

    def cell(rho):
        cors = moments_mod.correlation_set(float(rho), spec)
        vals = [abs(cors.gamma[n][m]) for n, m in pairs]
        return ",".join([_fmt(rho / 3.0)] + [_fmt(x) for x in vals])

    lines.extend(_map_grid(cell, list(rhos)))
    return lines


def _figure_gamma_convergence(quick: bool = False) -> list[str]:
    spec = Spectrum((1.0, 2.0, 3.0))
    points = 12 if quick else 30
    rhos = np.geomspace(2.0, 60.0, points)
    head = ["rho_over_lambda3"]
    for n in range(3):
        head += [f"gamma3_{n + 1}{n + 1}", f"gamma1_{n + 1}{n + 1}"]
    lines = [",".join(head)]

    def cell(rho):
        rho = float(rho)
        cors = moments_mod.correlation_set(rho, spec)
        row = [_fmt(rho / 3.0)]
        for n in range(3):
            one = moments_mod.correlation_set(rho, Spectrum((spec.lambdas[n],)))
            row += [_fmt(cors.gamma[n][n]), _fmt(one.gamma[0][0])]
        return ",".join(row)

    lines.extend(_map_grid(cell, list(rhos)))
    return lines


def _figure_cp_table(quick: bool = False) -> list[str]:
    lines = ["v,p,C,fit_A,fit_eps,fit_chi2"]
    p_min, p_max = (50, 100)
    for v in range(2, 7):
        est = convergence_estimate(v, p_min, p_max)
        for p, c in zip(est.p_values, est.c_values):
            lines.append(
                f"{v},{p},{_fmt(c)},{_fmt(est.fit_A)},"
                f"{_fmt(est.fit_eps)},{_fmt(est.fit_chi2)}"
            )
    return lines


def cmd_figure(cfg: RunConfig) -> int:
    if cfg.figure not in _FIGURES:
        raise DomainError(
            f"unknown figure {cfg.figure!r}; choose from {', '.join(_FIGURES)}"
        )
    maker = {
        "delta-grid": _figure_delta_grid,
        "gamma-curves": _figure_gamma_curves,
        "gamma-convergence": _figure_gamma_convergence,
        "cp-table": _figure_cp_table,
    }[cfg.figure]
    _emit(maker(cfg.quick), cfg.out)
    return EXIT_OK


def _suite_structural(cfg: RunConfig) -> Report:
    spec = _spectrum(cfg) if cfg.lambdas else Spectrum((1.0, 2.0))
    rho = cfg.rho if cfg.rho is not None else 3.0
    return verify_structural(rho, spec, order_cap=2)


def _suite_inequalities(cfg: RunConfig) -> Report:
    spec = _spectrum(cfg) if cfg.lambdas else Spectrum((1.0, 2.0, 3.0))
    report = Report("inequalities")
    rhos = ([1.0, 5.0] if cfg.quick else [0.5, 1.0, 2.0, 5.0, 10.0, 25.0])
    for rho in rhos:
        sub = moments_mod.inequality_battery(rho * spec.lambda_max, spec)
        report.extend(sub, prefix=f"rho={rho:g}max|")
    return report


def _suite_eta(cfg: RunConfig) -> Report:
    report = Report("eta")
    battery = [
        (Spectrum((1.0,)), (2.0, 3.0, 4.0)),
        (Spectrum((1.0, 2.0)), (2.0, 3.0, 4.0, 5.0, 8.0)),
        (Spectrum((1.0, 2.0, 3.0)), (2.0, 8.0, 11.0, 16.0)),
    ]
    if cfg.quick:
        battery = [(spec, rhos[:2]) for spec, rhos in battery[:2]]
    for spec, rhos in battery:
        for rho in rhos:
            for k in (1, 2, 3):
                comb = eta_mod.eta_combinatorial(k, rho, spec)
                fd = eta_mod.eta_fd_oracle(k, rho, spec)
                denom = max(abs(comb), 1e-10)
                rel = abs(comb - fd) / denom
                report.add(
                    f"oracle-equivalence[v={spec.v},rho={rho:g},k={k}]",
                    rel < 1e-3, 1e-3 - rel,
                    detail=f"combinatorial {comb:.6e}, fd {fd:.6e}")
    return report


def _suite_asymptotic(cfg: RunConfig) -> Report:
    spec = _spectrum(cfg) if cfg.lambdas else Spectrum((1.0, 2.0, 3.0))
    schedule = (20.0, 40.0, 80.0)
    k_max = 2 if cfg.quick else 4
    return eta_mod.asymptotic_checks(spec.v, spec, k_max, schedule)


def _suite_xi(cfg: RunConfig) -> Report:
    report = Report("xi")
    qmax = min(cfg.qmax, 8)
    report.extend(xi_mod.omega_inequality_scan(qmax))
    report.extend(xi_mod.gap_convolution_check(min(qmax, 4)))
    report.extend(xi_mod.inverse_mass_identity_check(min(qmax, 4)))
    return report


def cmd_verify(cfg: RunConfig) -> int:
    if cfg.suite not in _SUITES:
        raise DomainError(
            f"unknown suite {cfg.suite!r}; choose from {', '.join(_SUITES)}"
        )
    runners = {
        "structural": _suite_structural,
        "inequalities": _suite_inequalities,
        "eta": _suite_eta,
        "asymptotic": _suite_asymptotic,
        "xi": _suite_xi,
    }
    report = Report(cfg.suite)
    names = list(runners) if cfg.suite == "all" else [cfg.suite]
    for name in names:
        report.extend(runners[name](cfg))
    _emit([json.dumps(report.to_dict(), indent=2)], cfg.out)
    return EXIT_OK if report.passed else EXIT_NUMERIC


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="truncgauss",
        description="Moments of a diagonal Gaussian truncated to a ball: "
                    "integrals, figure data, and verification suites.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, rho=True):
        p.add_argument("--v", type=int, default=None,
                       help="dimension (checked against --lambda)")
        p.add_argument("--lambda", dest="lambdas", default="",
                       help="comma-separated variances")
        if rho:
            p.add_argument("--rho", type=float, default=None,
                           help="square radius of the ball")
            p.add_argument("--rho-range", default=None,
                           help="min:max:points:scale grid over rho")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", dest="fmt", choices=("csv", "json"),
                       default="csv")

    p = sub.add_parser("integral", help="one ball integral")
    common(p)
    p.add_argument("--index", default="",
                   help="multi-index as dim:mult[,dim:mult...], 1-based dims")
    p.add_argument("--mc", action="store_true",
                   help="use the seeded sampling oracle instead of quadrature")
    p.add_argument("--samples", type=int, default=1_000_000,
                   help="sample budget for --mc")

    p = sub.add_parser("moments", help="conditional moments and correlations")
    common(p)

    p = sub.add_parser("eta", help="coefficient functions at one radius")
    common(p)
    p.add_argument("--order", type=int, default=4, help="highest order")

    for name in ("figure", "cp-table"):
        p = sub.add_parser(name, help="figure-reproduction data")
        if name == "figure":
            p.add_argument("figure", choices=_FIGURES)
        common(p, rho=False)
        p.add_argument("--quick", action="store_true",
                       help="reduced grids for smoke runs")

    p = sub.add_parser("verify", help="verification suites (JSON report)")
    p.add_argument("suite", choices=_SUITES)
    common(p)
    p.add_argument("--qmax", type=int, default=6)
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--quick", action="store_true")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    cfg.v = getattr(args, "v", None)
    raw_lams = getattr(args, "lambdas", "")
    cfg.lambdas = _parse_lambdas(raw_lams) if raw_lams else ()
    cfg.rho = getattr(args, "rho", None)
    raw_range = getattr(args, "rho_range", None)
    cfg.rho_range = _parse_rho_range(raw_range) if raw_range else None
    cfg.index = getattr(args, "index", "")
    cfg.order = getattr(args, "order", 4)
    cfg.qmax = getattr(args, "qmax", 6)
    cfg.seed = getattr(args, "seed", 0)
    cfg.out = getattr(args, "out", None)
    cfg.fmt = getattr(args, "fmt", "csv")
    cfg.figure = getattr(args, "figure", None)
    cfg.suite = getattr(args, "suite", None)
    cfg.quick = getattr(args, "quick", False)
    cfg.use_mc = getattr(args, "mc", False)
    cfg.samples = getattr(args, "samples", 1_000_000)
    if args.command == "cp-table":
        cfg.command = "figure"
        cfg.figure = "cp-table"
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        handler = {
            "integral": cmd_integral,
            "moments": cmd_moments,
            "eta": cmd_eta,
            "figure": cmd_figure,
            "verify": cmd_verify,
        }[cfg.command]
        return handler(cfg)
    except (DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericError, TruncGaussError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
