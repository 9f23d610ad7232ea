"""``fisherlab`` command line: solve | verify | scan | translate.

Exit codes: 0 all checks pass, 1 a verification check failed,
2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import os
import sys
import time

from . import __version__
from .ansatz import (Scan, alpha_with_offset_check, check_scan_request, constants_consistency,
                     fisher_powerlaw_check, fit_scaling_exponent, iter_scan,
                     second_divided_differences)
from .config import (RunConfig, load_config, merge, parse_floats, parse_grid, parse_ints,
                     parse_lambda)
from .core import VerificationReport
from .eigensolver import solve_with_history
from .errors import ConfigError, FisherLabError, NumericalFailure, PotentialError
from .observables import moments
from .report import ScanWriter, build_document, dumps, fmt_float, states_csv
from .translate import shifted_fim_expression, shifted_moments
from .verify import parse_checks, run_suite, state_summary

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("fisherlab")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("potential and solver")
    g.add_argument("--config", metavar="PATH", help="key = value configuration file")
    g.add_argument("--lambda", dest="lambdas", action="append", metavar="K=V", type=parse_lambda,
                   help="multiplier lambda_K (repeatable)")
    g.add_argument("--states", type=int, metavar="N", help="number of lowest states (default 1)")
    g.add_argument("--grid", type=parse_grid, metavar="MIN,MAX,N",
                   help="fixed starting grid; disables automatic domain selection")
    g.add_argument("--auto-domain", action="store_const", const=True, default=None,
                   help="choose the domain automatically even when --grid is given")
    g.add_argument("--tol", type=float, help="relative eigenvalue tolerance (default 1e-8)")
    g.add_argument("--max-refinements", type=int, metavar="N", help="grid doublings allowed (default 8)")
    g.add_argument("--fd-step", type=float, help="relative step for first derivatives (default 1e-4)")
    g.add_argument("--hessian-step", type=float, help="relative step for second derivatives (default 1e-3)")
    g = common.add_argument_group("checks and scans")
    g.add_argument("--checks", metavar="LIST", help="comma-separated subset of verify checks")
    g.add_argument("--scan-k", type=int, metavar="K", help="power scanned by 'scan'")
    g.add_argument("--scan-values", metavar="V1,V2,...", help="lambda_K values for 'scan'")
    g.add_argument("--scan-states", metavar="N1,N2,...", help="state indices for 'scan' (default 0)")
    g.add_argument("--jobs", type=int, metavar="N", help="worker processes for scans (default 1)")
    g = common.add_argument_group("output")
    g.add_argument("--out", metavar="PATH", help="write the primary output here (default stdout)")
    g.add_argument("--format", choices=("json", "csv"), help="primary output format (default json)")
    g.add_argument("--csv", metavar="PATH", help="also write the state or scan CSV here")
    g.add_argument("--timing", action="store_const", const=True, default=None,
                   help="include wall-clock timings (makes output non-reproducible)")
    g.add_argument("-v", "--verbose", action="store_true", help="debug logging to stderr")

    parser = argparse.ArgumentParser(prog="fisherlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {"solve": "solve and dump eigenstates", "verify": "run the verification suite",
             "scan": "single-term power-law scan and fits",
             "translate": "re-centre at the potential minimum"}
    parser.subcommands = {name: sub.add_parser(name, parents=[common], help=text)
                          for name, text in helps.items()}
    return parser


def config_from_args(args) -> RunConfig:
    base = load_config(args.config) if args.config else RunConfig()
    lambdas = {}
    for k, v in args.lambdas or ():
        if k in lambdas:
            raise ConfigError(f"--lambda {k} given twice")
        lambdas[k] = v
    return merge(
        base, lambdas,
        states=args.states, grid=args.grid, auto_domain=args.auto_domain, tol=args.tol,
        max_refinements=args.max_refinements, fd_step=args.fd_step,
        hessian_step=args.hessian_step,
        checks=tuple(c.strip() for c in args.checks.split(",") if c.strip())
        if args.checks is not None else None,
        jobs=args.jobs, scan_k=args.scan_k,
        scan_values=parse_floats(args.scan_values, "scan_values") if args.scan_values is not None else None,
        scan_states=parse_ints(args.scan_states, "scan_states") if args.scan_states is not None else None,
        out=args.out, format=args.format, csv=args.csv, timing=args.timing,
    )


@contextlib.contextmanager
def _open_out(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


class _Clock:
    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.marks = {}
        self._t = time.perf_counter()

    def mark(self, name: str) -> None:
        now = time.perf_counter()
        self.marks[name] = now - self._t
        self._t = now

    def result(self):
        return {"seconds": self.marks} if self.enabled else None


def _grid_dict(grid) -> dict:
    return {"x_min": grid.x_min, "x_max": grid.x_max, "n_points": grid.n_points,
            "spacing": grid.spacing}


def _emit(cfg: RunConfig, doc: dict, csv_text: str | None = None) -> None:
    """Primary output to --out (JSON or CSV), optional CSV copy to --csv."""
    if cfg.format == "csv":
        if csv_text is None:
            csv_text = _checks_csv(doc)
        with _open_out(cfg.out) as fh:
            fh.write(csv_text)
    else:
        with _open_out(cfg.out) as fh:
            fh.write(dumps(doc))
    if cfg.csv and csv_text is not None:
        with _open_out(cfg.csv) as fh:
            fh.write(csv_text)


def _checks_csv(doc: dict) -> str:
    lines = ["name,value,tolerance,bound,pass"]
    for e in doc["checks"]:
        lines.append(f"{e['name']},{fmt_float(e['value'])},{fmt_float(e['tolerance'])},{e['bound']},"
                     f"{str(e['pass']).lower()}")
    return "\n".join(lines) + "\n"


def _say(cfg: RunConfig, text: str) -> None:
    # human-readable lines only when stdout is not carrying the report
    if cfg.out is not None:
        print(text)


# -- commands ------------------------------------------------------------------


def cmd_solve(cfg: RunConfig) -> int:
    clock = _Clock(cfg.timing)
    p = cfg.potential()
    result = solve_with_history(p, cfg.solve_options())
    clock.mark("solve")
    report = VerificationReport()
    if len(result.history) > 1:
        report.add("solve.refinement_change", result.history[-1]["change"], cfg.tol)
    results = {
        "grid": _grid_dict(result.grid),
        "alphas": [s.alpha for s in result.states],
        "states": state_summary(result.states, p),
        "refinement": [{"n_points": h["n_points"], "change": h.get("change")} for h in result.history],
    }
    clock.mark("observables")
    doc = build_document("solve", cfg.to_lines(), report, results, clock.result())
    for s in result.states:
        _say(cfg, f"alpha_{s.index} = {s.alpha:.12g}")
    _emit(cfg, doc, states_csv(result.states))
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_verify(cfg: RunConfig) -> int:
    clock = _Clock(cfg.timing)
    p = cfg.potential()
    try:
        checks = parse_checks(",".join(cfg.checks) if cfg.checks else None)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    suite = run_suite(p, cfg.solve_options(), cfg.fd_config(), checks)
    clock.mark("suite")
    report = suite.report
    results = {
        "checks_run": list(checks),
        "grid": _grid_dict(suite.states[0].grid),
        "states": state_summary(suite.states, p, suite.fisher),
        "details": dict(report.metadata),
    }
    if suite.shift is not None:
        results["shift"] = suite.shift.to_dict()
    doc = build_document("verify", cfg.to_lines(), report, results, clock.result())
    for e in report.failures():
        print(f"FAILED {e.name}: {e.value:.6g} vs {e.tolerance:.3g}", file=sys.stderr)
    _say(cfg, f"{len(report.entries) - len(report.failures())}/{len(report.entries)} checks passed")
    _emit(cfg, doc)
    return EXIT_OK if report.passed else EXIT_FAIL


SCAN_TOLERANCES = {"alpha_exponent": 1e-4, "fisher_exponent": 1e-3, "r_squared": 0.999999,
                   "constants": 1e-3, "convexity": -1e-8}


def cmd_scan(cfg: RunConfig) -> int:
    clock = _Clock(cfg.timing)
    if cfg.scan_k is None:
        raise ConfigError("scan needs --scan-k")
    if not cfg.scan_values:
        raise ConfigError("scan needs a nonempty --scan-values list")
    try:
        check_scan_request(cfg.scan_k, cfg.scan_values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    k = cfg.scan_k
    csv_path = cfg.out if cfg.format == "csv" else cfg.csv
    report = VerificationReport()
    fits = []
    with _open_out(csv_path) if csv_path or cfg.format == "csv" else contextlib.nullcontext() as fh:
        writer = ScanWriter(fh) if fh is not None else None
        for n in cfg.scan_states:
            opts = cfg.solve_options(n_states=n + 1)
            points = []
            try:
                for pt in iter_scan(k, cfg.scan_values, n, opts, cfg.jobs):
                    points.append(pt)
                    if writer:
                        writer.row(n, pt)
            except (NumericalFailure, PotentialError):
                if writer:
                    writer.failure(n, cfg.scan_values[len(points)])
                raise
            fits.append(_scan_fits(Scan(k, n, points), report))
            clock.mark(f"scan.n{n}")
    results = {"k": k, "lambda_values": list(cfg.scan_values), "fits": fits}
    doc = build_document("scan", cfg.to_lines(), report, results, clock.result())
    for f in fits:
        _say(cfg, f"n={f['n']}: exponent {f['alpha_fit']['exponent_fit']:.10g} "
                  f"(theory {f['alpha_fit']['exponent_theory']:.10g}), "
                  f"D_{k} = {f['alpha_fit']['coefficient']:.10g}, C_{k} = {f['fisher_fit']['coefficient']:.10g}")
    if cfg.format == "json":
        with _open_out(cfg.out) as fh:
            fh.write(dumps(doc))
    return EXIT_OK if report.passed else EXIT_FAIL


def _scan_fits(scan: Scan, report: VerificationReport) -> dict:
    k, n = scan.k, scan.n
    a = fit_scaling_exponent(k, scan=scan)
    f = fisher_powerlaw_check(k, scan=scan)
    tag = f"k{k}.n{n}"
    report.add(f"scan.alpha_exponent.{tag}", a.exponent_error, SCAN_TOLERANCES["alpha_exponent"])
    report.add(f"scan.fisher_exponent.{tag}", f.exponent_error, SCAN_TOLERANCES["fisher_exponent"])
    report.add(f"scan.alpha_r_squared.{tag}", a.r_squared, SCAN_TOLERANCES["r_squared"], bound="min")
    report.add(f"scan.fisher_r_squared.{tag}", f.r_squared, SCAN_TOLERANCES["r_squared"], bound="min")
    consts = constants_consistency(f.coefficient, a.coefficient, k)
    for name in ("amplitude_relation", "power_relation"):
        report.add(f"scan.constants_{name}.{tag}", consts.residuals[name], SCAN_TOLERANCES["constants"])
    convex = second_divided_differences(scan.column("moment_k"), scan.column("fisher"))
    report.add(f"scan.fisher_convexity.{tag}", float(convex.min()), SCAN_TOLERANCES["convexity"],
               bound="min")
    return {"n": n, "alpha_fit": a.to_dict(), "fisher_fit": f.to_dict(), "constants": consts.to_dict(),
            "points": [{"lambda_k": pt.lambda_k, "alpha": pt.alpha, "I_direct": pt.fisher,
                        "moment_k": pt.moment_k} for pt in scan.points]}


def cmd_translate(cfg: RunConfig) -> int:
    clock = _Clock(cfg.timing)
    p = cfg.potential()
    suite = run_suite(p, cfg.solve_options(), cfg.fd_config(), ("translate",))
    clock.mark("translate")
    report, shift = suite.report, suite.shift
    ground = suite.states[0]
    k_max = max(p.M, 2)
    mu = shifted_moments(moments(ground, k_max), shift.xi, k_max)
    results = {
        "shift": shift.to_dict(),
        "tie_break_applied": shift.degenerate,
        "states": [{"n": s.index, "alpha": s.alpha, "alpha_bar": s.alpha + shift.lambdas_star[0]}
                   for s in suite.states],
        "shifted_moments": {str(j): mu[j] for j in range(1, k_max + 1)},
        "fisher": suite.fisher[0].to_dict(),
    }
    # frame-fixed forms are closed only when the re-centred potential is quadratic
    live = {j for j, v in shift.lambdas_star.items() if j >= 2 and abs(v) > 1e-9}
    if live == {2}:
        offset = alpha_with_offset_check(p, alpha=ground.alpha)
        report.add("translate.alpha_offset", offset.residual, 1e-5)
        frame = shifted_fim_expression(mu, {2: 1.0})
        fisher = suite.fisher[0].direct
        report.add("translate.frame_fisher", abs(frame - fisher) / max(abs(fisher), 1.0), 1e-5)
        results["alpha_offset"] = offset.to_dict()
        results["frame_fisher"] = frame
    doc = build_document("translate", cfg.to_lines(), report, results, clock.result())
    _say(cfg, f"xi = {shift.xi:.12g}, U_min = {shift.U_min:.12g}"
              + (" (degenerate minimum, tie-break applied)" if shift.degenerate else ""))
    _emit(cfg, doc)
    return EXIT_OK if report.passed else EXIT_FAIL


COMMANDS = {"solve": cmd_solve, "verify": cmd_verify, "scan": cmd_scan, "translate": cmd_translate}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = config_from_args(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, PotentialError) as exc:
        parser.subcommands[args.command].print_usage(sys.stderr)
        print(f"fisherlab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"fisherlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except FisherLabError as exc:
        print(f"fisherlab: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BrokenPipeError:
        # downstream closed early (e.g. `| head`); silence the flush at exit
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
