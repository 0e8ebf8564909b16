"""
Command line front end.

Reproduces the published table, runs the large-n scans, solves the radial
Yamabe equation, and prints sigma bounds and the counterexample report.

Usage:
    python main.py table 7 18
    python main.py table 7 18 --check-reference --format json
    python main.py scan min-k 7 3000 --workers 8
    python main.py scan compare 11 5000
    python main.py scan ratio 1100 1200
    python main.py ode 7 2 1 --mu 42 --shoot 0.5 2
    python main.py ode 7 2 1 --mu 42 --u0 1 --integrate --format csv
    python main.py sigma 7 --two-connected-spin-boundary
    python main.py sigma 9 --dims 3 4
    python main.py counterexample 7 --convention paper-stated

Exit codes: 0 success, 1 violated claim or solver failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, IO, List, Optional

from asymptotics import FConvention, counterexample_report
from exactnum import MIN_PRECISION, CertifiedInterval
from invariants import ModelSpace, lambda_hp2, lambda_lower_min, yamabe_sphere
from reference import ReferenceTable
from scans import ScanReport, compare_series, ratio_scan, scan_min_location
from settings import Settings
from surgery_bounds import SurgeryChain, TopoClass, TopoInput, topo_bound
from yamabe_ode import RadialProblem, ShootingError, SolverError, default_r_max, integrate, norms, shoot, theorem_check

logger = logging.getLogger("yamabound")

FORMATS = ("table", "csv", "json")
SCAN_KINDS = ("min-k", "compare", "ratio")


class UsageError(ValueError):
    """Arguments parsed but do not describe a valid request."""


@dataclass(slots=True)
class OutputConfig:
    format: str = "table"
    precision_bits: int = 256
    sig_digits: int = 10
    output: Optional[str] = None

    def __post_init__(self) -> None:
        if self.format not in FORMATS:
            raise UsageError(f"unknown format {self.format!r}")
        if self.sig_digits < 1:
            raise UsageError(f"--digits must be >= 1, got {self.sig_digits}")
        if self.precision_bits < MIN_PRECISION:
            raise UsageError(f"--precision-bits must be >= {MIN_PRECISION}, got {self.precision_bits}")


@dataclass
class CommandResult:
    """Everything a command produced, independent of the output format.

    Attributes:
        command: str -- subcommand name
        params: Dict -- parsed parameters
        columns: List[str] -- column order of `rows`
        rows: List[Dict] -- tabular payload shared by table, csv and json output
        results: Any -- json payload (defaults to rows)
        certificates: Dict -- interval endpoints backing the printed values
        exit_code: int
        raw_csv: Optional[str] -- replaces the tabular csv output (ode trajectories)
    """

    command: str
    params: Dict[str, Any]
    columns: List[str] = field(default_factory=list)
    rows: List[Dict[str, Any]] = field(default_factory=list)
    results: Any = None
    certificates: Dict[str, Any] = field(default_factory=dict)
    exit_code: int = 0
    raw_csv: Optional[str] = None


def _decimal(value: Optional[CertifiedInterval], cfg: OutputConfig) -> str:
    return "" if value is None else value.to_decimal(cfg.sig_digits)


def cmd_table(n_lo: int, n_hi: int, cfg: OutputConfig, check_reference: bool = False) -> CommandResult:
    if not 7 <= n_lo <= n_hi:
        raise UsageError(f"table range must satisfy 7 <= n_lo <= n_hi, got {n_lo}..{n_hi}")
    result = CommandResult(
        "table",
        {"n_lo": n_lo, "n_hi": n_hi, "check_reference": check_reference},
        columns=["n", "Y(S^n)", "Lambda_{n,>=2}", "lambda_n"],
    )
    enclosures: Dict[int, Dict[str, Optional[CertifiedInterval]]] = {}
    for n in range(n_lo, n_hi + 1):
        sphere = yamabe_sphere(n, cfg.precision_bits)
        minimum = lambda_lower_min(n, cfg.precision_bits)
        hp2 = lambda_hp2(n, cfg.precision_bits).value if n >= 11 else None
        enclosures[n] = {"Y(S^n)": sphere, "Lambda_{n,>=2}": minimum.value, "lambda_n": hp2}
        result.rows.append({
            "n": n,
            "Y(S^n)": _decimal(sphere, cfg),
            "Lambda_{n,>=2}": _decimal(minimum.value, cfg),
            "lambda_n": _decimal(hp2, cfg),
        })
        result.certificates[str(n)] = {
            "Y(S^n)": sphere.to_json(),
            "Lambda_{n,>=2}": minimum.value.to_json(),
            "argmin": sorted(minimum.argmin),
            "lambda_n": hp2.to_json() if hp2 is not None else None,
        }
    if check_reference:
        reference = ReferenceTable.load_from_file()
        mismatches = []
        for n, computed in enclosures.items():
            if n not in reference.rows:
                continue
            expected = reference[n]
            for column, attr in (("Y(S^n)", "yamabe_sphere"), ("Lambda_{n,>=2}", "lambda_min"), ("lambda_n", "lambda_hp2")):
                value = computed[column]
                if not expected.matches(attr, value):
                    shown = value.to_decimal(15) if value is not None else None
                    mismatches.append(f"n={n} {column}: computed {shown!r}, printed {getattr(expected, attr)!r}")
        for message in mismatches:
            logger.error("reference mismatch: %s", message)
        result.params["reference_mismatches"] = mismatches
        result.exit_code = 1 if mismatches else 0
    return result


def cmd_scan(kind: str, n_lo: int, n_hi: int, cfg: OutputConfig, workers: int = 1) -> CommandResult:
    try:
        if kind == "min-k":
            report = scan_min_location(n_lo, n_hi, workers=workers, precision_bits=cfg.precision_bits)
        elif kind == "compare":
            report = compare_series(n_lo, n_hi, workers=workers, precision_bits=cfg.precision_bits)
        elif kind == "ratio":
            report = ratio_scan(n_lo, n_hi, workers=workers, precision_bits=cfg.precision_bits)
        else:
            raise UsageError(f"unknown scan kind {kind!r}")
    except ValueError as err:
        raise UsageError(str(err))
    return _scan_result(kind, report, cfg, workers)


def _scan_result(kind: str, report: ScanReport, cfg: OutputConfig, workers: int) -> CommandResult:
    payload = report.to_json(cfg.sig_digits)
    rows = []
    certificates: Dict[str, Any] = {}
    for row in payload["per_n"]:
        flat = {}
        for key, value in row.items():
            if key.endswith("_interval"):
                certificates.setdefault(str(row["n"]), {})[key[: -len("_interval")]] = value
            else:
                flat[key] = " ".join(str(v) for v in value) if isinstance(value, list) else value
        rows.append(flat)
    columns: List[str] = []
    for row in rows:
        columns.extend(key for key in row if key not in columns)
    for n, detail in report.violations:
        logger.error("violation at n=%d: %s", n, detail)
    summary = {key: payload[key] for key in ("claim", "range", "holds", "violations", "wall_time")}
    summary["per_n"] = rows
    return CommandResult(
        "scan",
        {"kind": kind, "n_lo": report.n_range[0], "n_hi": report.n_range[1], "workers": workers},
        columns=columns,
        rows=rows,
        results=summary,
        certificates=certificates,
        exit_code=0 if report.holds else 1,
    )


def cmd_ode(
    n: int,
    k: int,
    c: str,
    mu: float,
    cfg: OutputConfig,
    u0: Optional[float] = None,
    bracket: Optional[List[float]] = None,
    r_max: Optional[float] = None,
    tol: float = 1e-12,
    trajectory: Optional[str] = None,
    check: bool = False,
) -> CommandResult:
    try:
        model = ModelSpace(n, k, Fraction(c))
    except ValueError as err:
        raise UsageError(str(err))
    params: Dict[str, Any] = {"n": n, "k": k, "c": str(model.c), "mu": mu, "tol": tol}
    summary: Dict[str, Any] = {}
    if bracket is None and u0 is None:
        raise UsageError("ode needs --u0 or --shoot LO HI")
    try:
        if bracket is not None:
            params["action"] = "shoot"
            params["bracket"] = list(bracket)
            shot = shoot(model, mu, (bracket[0], bracket[1]), r_max=r_max, solver_tol=tol)
            solution = shot.solution
            summary.update(u0_star=shot.u0_star, bracket_width=shot.bracket_width, iterations=shot.iterations)
        else:
            params["action"] = "integrate"
            params["u0"] = u0
            horizon = default_r_max(model) if r_max is None else r_max
            solution = integrate(RadialProblem(model, mu, u0), horizon, tol)
    except ValueError as err:
        raise UsageError(str(err))
    verdict = theorem_check(solution)
    summary.update(classification=solution.classification.value, r_max=solution.r_max, r_cross=solution.r_cross)
    if verdict.l2_finite is not None and verdict.functional_ratio is not None:
        report = norms(solution)
        summary["norms"] = {"l2": report.l2, "lpn": report.lpn, "dirichlet": report.dirichlet}
    summary["verdict"] = verdict.to_json()

    buffer = io.StringIO()
    solution.write_csv(buffer)
    if trajectory:
        with open(trajectory, "w", encoding="utf-8", newline="") as fh:
            fh.write(buffer.getvalue())
    rows = [{"key": key, "value": json.dumps(value)} for key, value in summary.items() if key != "verdict"]
    rows.extend({"key": f"verdict.{key}", "value": json.dumps(value)} for key, value in summary["verdict"].items())
    return CommandResult(
        "ode",
        params,
        columns=["key", "value"],
        rows=rows,
        results=summary,
        exit_code=1 if check and not verdict.theorem_holds else 0,
        raw_csv=buffer.getvalue(),
    )


def cmd_sigma(n: int, cfg: OutputConfig, dims: Optional[List[int]] = None, topo: Optional[TopoClass] = None) -> CommandResult:
    kind = SurgeryChain(tuple(dims)) if dims is not None else topo
    if kind is None:
        raise UsageError("sigma needs --dims or a topological class flag")
    try:
        bound = topo_bound(TopoInput(n, kind), cfg.precision_bits)
    except ValueError as err:
        raise UsageError(str(err))
    payload = bound.to_json(cfg.sig_digits)
    rows = [{"term": term["label"], "value": term["value"], "minimum": term["label"] == payload["minimum"]}
            for term in payload["trail"]]
    certificates = {term["label"]: term.pop("interval") for term in payload["trail"]}
    params = {"n": n, "dims": dims, "class": topo.value if topo is not None else None}
    return CommandResult("sigma", params, ["term", "value", "minimum"], rows, payload, certificates)


def cmd_counterexample(n: int, cfg: OutputConfig, convention: FConvention = FConvention.DERIVED) -> CommandResult:
    try:
        report = counterexample_report(n, convention)
    except ValueError as err:
        raise UsageError(str(err))
    payload = report.to_json()
    rows = [{"key": key, "value": json.dumps(value)} for key, value in payload.items()]
    return CommandResult("counterexample", {"n": n, "convention": convention.value}, ["key", "value"], rows, payload)


def render(result: CommandResult, cfg: OutputConfig, stream: IO[str]) -> None:
    if cfg.format == "json":
        document = {
            "command": result.command,
            "params": result.params,
            "results": result.results if result.results is not None else result.rows,
            "certificates": result.certificates,
        }
        json.dump(document, stream, indent=4)
        stream.write("\n")
    elif cfg.format == "csv":
        if result.raw_csv is not None:
            stream.write(result.raw_csv)
            return
        writer = csv.DictWriter(stream, fieldnames=result.columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(result.rows)
    else:
        cells = [[str(row.get(col, "")) for col in result.columns] for row in result.rows]
        widths = [max([len(col)] + [len(line[i]) for line in cells]) for i, col in enumerate(result.columns)]
        stream.write("  ".join(col.ljust(w) for col, w in zip(result.columns, widths)).rstrip() + "\n")
        for line in cells:
            stream.write("  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip() + "\n")


def build_parser(settings: Settings) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="table", help="Output format")
    common.add_argument("--precision-bits", type=int, default=settings.precision_bits, help="Working precision of intervals")
    common.add_argument("--digits", type=int, default=settings.sig_digits, help="Significant digits of printed values")
    common.add_argument("--output", type=str, default=None, help="Write output to this file instead of stdout")
    common.add_argument("--log-level", type=str, default=settings.log_level, help="Logging level")

    parser = argparse.ArgumentParser(prog="yamabound", description="Explicit Yamabe invariant bounds and checks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table", parents=[common], help="Y(S^n), Lambda_{n,>=2} and lambda_n")
    p.add_argument("n_lo", type=int)
    p.add_argument("n_hi", type=int)
    p.add_argument("--check-reference", action="store_true", help="Compare against the shipped reference table")

    p = sub.add_parser("scan", parents=[common], help="Verify a numerical claim over a range of n")
    p.add_argument("kind", choices=SCAN_KINDS)
    p.add_argument("n_lo", type=int)
    p.add_argument("n_hi", type=int)
    p.add_argument("--workers", type=int, default=settings.workers, help="Number of worker processes")

    p = sub.add_parser("ode", parents=[common], help="Radial Yamabe equation on M_c^{n,k}")
    p.add_argument("n", type=int)
    p.add_argument("k", type=int)
    p.add_argument("c", type=str)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--u0", type=float, default=None, help="Center value to integrate from")
    p.add_argument("--shoot", type=float, nargs=2, metavar=("LO", "HI"), default=None, help="Shooting bracket")
    p.add_argument("--integrate", action="store_true", help="Integrate from --u0 (default when --u0 is given)")
    p.add_argument("--check", action="store_true", help="Exit 1 when the L^p => L^2 implication fails on this solution")
    p.add_argument("--r-max", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--trajectory", type=str, default=None, help="Write r,u,du,tau samples to this CSV file")

    p = sub.add_parser("sigma", parents=[common], help="Lower bound for sigma(M)")
    p.add_argument("n", type=int)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--dims", type=int, nargs="*", help="Surgery dimensions leading from S^n to M")
    group.add_argument("--two-connected-spin-boundary", dest="topo", action="store_const",
                       const=TopoClass.TWO_CONNECTED_SPIN_BOUNDARY)
    group.add_argument("--alpha-zero", dest="topo", action="store_const", const=TopoClass.TWO_CONNECTED_ALPHA_ZERO)
    group.add_argument("--alpha-nonzero", dest="topo", action="store_const",
                       const=TopoClass.TWO_CONNECTED_ALPHA_NONZERO)

    p = sub.add_parser("counterexample", parents=[common], help="Integrability exponents of the L^2 counterexample")
    p.add_argument("n", type=int)
    p.add_argument("--convention", choices=[c.value for c in FConvention], default=FConvention.DERIVED.value)
    return parser


def _dispatch(args: argparse.Namespace, cfg: OutputConfig) -> CommandResult:
    if args.command == "table":
        return cmd_table(args.n_lo, args.n_hi, cfg, args.check_reference)
    if args.command == "scan":
        if args.workers < 1:
            raise UsageError(f"--workers must be >= 1, got {args.workers}")
        return cmd_scan(args.kind, args.n_lo, args.n_hi, cfg, args.workers)
    if args.command == "ode":
        if args.integrate and args.u0 is None:
            raise UsageError("--integrate needs --u0")
        return cmd_ode(args.n, args.k, args.c, args.mu, cfg, u0=args.u0, bracket=args.shoot,
                       r_max=args.r_max, tol=args.tol, trajectory=args.trajectory, check=args.check)
    if args.command == "sigma":
        return cmd_sigma(args.n, cfg, dims=args.dims, topo=getattr(args, "topo", None))
    return cmd_counterexample(args.n, cfg, FConvention(args.convention))


def main(argv: Optional[List[str]] = None, stdout: Optional[IO[str]] = None) -> int:
    try:
        settings = Settings.from_env()
    except ValueError as err:
        print(f"yamabound: error: {err}", file=sys.stderr)
        return 2
    parser = build_parser(settings)
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    stdout = sys.stdout if stdout is None else stdout

    try:
        cfg = OutputConfig(args.format, args.precision_bits, args.digits, args.output)
        result = _dispatch(args, cfg)
    except UsageError as err:
        print(f"{parser.prog}: error: {err}", file=sys.stderr)
        return 2
    except (SolverError, ShootingError) as err:
        print(f"{parser.prog}: {err}", file=sys.stderr)
        return 1

    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            render(result, cfg, fh)
    else:
        render(result, cfg, stdout)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
