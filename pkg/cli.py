"""
Command Line Interface
Theta expansions, discriminant lists, twist tables, statistics, package verification and
resumable runs
"""

import argparse
import sys
import time
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import List, Optional

from checkpoint import CheckpointManager, run_key
from config import Config
from discriminants import enumerate_discriminants, enumerate_rational_discriminants, mark_permitted, trace_bound
from errors import CheckpointError, TwistvalsError, ValidationError
from export_import import DataExporter, PackageImporter, fraction_text
from field_arith import field
from lattice_theta import theta_series
from logger import audit_logger, error_handler, logger
from stats import (
    DEFAULT_EXPONENTS, congruence_table, logpower_fit, normalized_count_series, normalized_histogram,
    slice_stats, vanishing_counts,
)
from validators import PackageValidator, RunConfigValidator
from waldspurger import (
    NewformPackage, build_g, rational_verification_ratios, twist_record, verify_package,
)

DEFAULT_GRID = "1e2,1e3,1e4,1e5"


@dataclass
class RunConfig:
    command: str
    package: Optional[str] = None
    bound: Optional[int] = None
    trace_bound: Optional[int] = None
    field: Optional[int] = None
    out: Path = Config.OUTPUT_DIR
    workers: int = Config.THREADS
    grid: List[int] = dc_field(default_factory=list)
    bins: int = 50
    checkpoint: Optional[Path] = None
    force: bool = False
    rational: bool = False


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="twistvals", description="Waldspurger coefficients of Hilbert newforms")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p, package=True):
        if package:
            p.add_argument("--package", required=True, help="package name under packages/ or a path")
        p.add_argument("--out", type=Path, default=Config.OUTPUT_DIR)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--force", action="store_true", help="skip package verification")

    p = sub.add_parser("theta", help="theta series of every lattice and of g")
    common(p)
    p.add_argument("--trace-bound", dest="trace_bound", type=int, required=True)

    p = sub.add_parser("discs", help="fundamental discriminants up to a norm bound")
    common(p, package=False)
    p.add_argument("--field", type=int, default=None)
    p.add_argument("--package", default=None)
    p.add_argument("--bound", type=int, required=True)
    p.add_argument("--rational", action="store_true", help="only D in Z, |D| <= sqrt(X)")

    p = sub.add_parser("twists", help="coefficients of g at permitted discriminants")
    common(p)
    p.add_argument("--bound", type=int, required=True)
    p.add_argument("--checkpoint", type=Path, default=None)

    p = sub.add_parser("stats", help="vanishing counts, congruence ratios, histogram and fit")
    common(p)
    p.add_argument("--bound", type=int, default=None)
    p.add_argument("--grid", default=DEFAULT_GRID)
    p.add_argument("--bins", type=int, default=50)

    p = sub.add_parser("verify", help="structural checks of a package")
    p.add_argument("--package", required=True)
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("resume", help="continue an interrupted twists run")
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--workers", type=int, default=None)

    return parser


def _require(check) -> None:
    ok, message = check
    if not ok:
        raise ValidationError(message)


def parse_config(argv: Optional[List[str]] = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    if args.command is None:
        raise ValidationError("a command is required")
    _require(RunConfigValidator.validate_command(args.command))
    workers = args.workers if getattr(args, "workers", None) is not None else Config.THREADS
    config = RunConfig(
        command=args.command,
        package=getattr(args, "package", None),
        bound=getattr(args, "bound", None),
        trace_bound=getattr(args, "trace_bound", None),
        field=getattr(args, "field", None),
        out=getattr(args, "out", None) or Config.OUTPUT_DIR,
        workers=workers,
        bins=getattr(args, "bins", 50),
        checkpoint=getattr(args, "checkpoint", None),
        force=getattr(args, "force", False),
        rational=getattr(args, "rational", False),
    )
    _require(RunConfigValidator.validate_workers(config.workers))
    if config.command in ("discs", "twists"):
        _require(RunConfigValidator.validate_bound(config.bound))
    if config.command == "theta":
        _require(RunConfigValidator.validate_bound(config.trace_bound, "--trace-bound"))
    if config.command == "stats":
        grid, message = RunConfigValidator.parse_grid(args.grid)
        if grid is None:
            raise ValidationError(message)
        config.grid = grid
        if config.bound is None:
            config.bound = grid[-1]
        _require(RunConfigValidator.validate_bound(config.bound))
        if config.bins < 1:
            raise ValidationError("--bins must be at least 1")
    if config.command == "discs":
        if config.field is None and config.package is None:
            raise ValidationError("discs needs --field or --package")
        if config.field is not None:
            _require(RunConfigValidator.validate_field(config.field))
    return config


def _load(config: RunConfig) -> NewformPackage:
    pkg = PackageImporter.load(config.package)
    _require(PackageValidator.validate_usable(pkg, config.command))
    _require(PackageValidator.validate_weight(pkg.weight))
    if not config.force:
        report = verify_package(pkg)
        if not report.passed:
            details = "; ".join(f"{c.name}: {c.detail}" for c in report.failures)
            raise ValidationError(f"package {pkg.label} failed verification ({details})")
    return pkg


def _manifest(config: RunConfig, pkg: Optional[NewformPackage], started: float, **extra) -> dict:
    manifest = {
        'command': config.command,
        'package': pkg.label if pkg else None,
        'curve': pkg.curve if pkg else None,
        'version': Config.APP_VERSION,
        'X': config.bound,
        'T': config.trace_bound,
        'workers': config.workers,
        'wall_time_s': round(time.time() - started, 3),
    }
    manifest.update(extra)
    return manifest


def run_theta(config: RunConfig) -> int:
    started = time.time()
    pkg = _load(config)
    T = config.trace_bound
    vectors = {}
    for i, (L, P) in enumerate(zip(pkg.lattices, pkg.polys), start=1):
        series = theta_series(L, P, T, config.workers, count_pairs=True)
        DataExporter.export_theta(series, config.out / f"theta_{i}.csv")
        vectors[L.label] = series.nonzero_count()
    g = build_g(pkg, T, config.workers)
    DataExporter.export_theta(g, config.out / "g.csv")
    DataExporter.export_to_json(
        _manifest(config, pkg, started, coefficients=vectors, g_coefficients=g.nonzero_count()),
        config.out / "manifest.json",
    )
    return 0


def run_discs(config: RunConfig) -> int:
    started = time.time()
    pkg = PackageImporter.load(config.package) if config.package else None
    F = pkg.F if pkg else field(config.field)
    if config.rational:
        records = enumerate_rational_discriminants(F, config.bound)
    else:
        records = enumerate_discriminants(F, config.bound, config.workers)
    if pkg:
        records = mark_permitted(records, pkg)
    DataExporter.export_discriminants(records, config.out / "discriminants.csv")
    DataExporter.export_to_json(
        _manifest(
            config, pkg, started,
            field=F.d,
            n_all=len(records),
            n_permitted=sum(r.permitted for r in records),
            n_rational=sum(r.is_rational for r in records),
        ),
        config.out / "manifest.json",
    )
    print(len(records))
    return 0


def _compute_twists(config: RunConfig, pkg: NewformPackage, package_bytes: bytes):
    X = config.bound
    T = trace_bound(pkg.F, X)
    config.trace_bound = T
    partials = {}
    manager = None
    if config.checkpoint:
        meta = {'package': str(PackageImporter.resolve(config.package)), 'out': str(config.out), 'force': config.force}
        manager = CheckpointManager(config.checkpoint, run_key(package_bytes, X), X, meta)
        manager.load()
        partials.update(manager.completed)
        audit_logger.log_run_event(config.command, "checkpoint", {'done': len(partials)})

    def on_chunk(i: int, j: int, result: dict):
        partials[(i, j)] = result
        if manager:
            manager.record(i, j, result)

    g = build_g(pkg, T, config.workers, done=dict(partials), on_chunk=on_chunk)
    if manager:
        manager.mark_finished()

    records = enumerate_discriminants(pkg.F, X, config.workers)
    marked = mark_permitted(records, pkg)
    table = [twist_record(r, g, pkg) for r in marked if r.permitted]
    vectors = {}
    for (i, _), part in partials.items():
        counts = [v for v in part.values() if isinstance(v, int)]
        vectors[pkg.lattices[i].label] = vectors.get(pkg.lattices[i].label, 0) + sum(counts)
    return records, table, vectors


def run_twists(config: RunConfig) -> int:
    started = time.time()
    pkg = _load(config)
    package_bytes = PackageImporter.read_bytes(config.package)
    audit_logger.log_run_event(config.command, "loaded", {'package': pkg.label, 'X': config.bound})
    records, table, vectors = _compute_twists(config, pkg, package_bytes)
    DataExporter.export_twists(table, config.out / "twists.csv")
    DataExporter.export_to_json(
        _manifest(
            config, pkg, started,
            n_discriminants=len(records),
            n_permitted=len(table),
            n_vanish=sum(r.vanishes for r in table),
            enumerated_vectors=vectors,
        ),
        config.out / "manifest.json",
    )
    audit_logger.log_run_event(config.command, "finish", {'vanishing': sum(r.vanishes for r in table)})
    print(sum(r.vanishes for r in table))
    return 0


def run_stats(config: RunConfig) -> int:
    started = time.time()
    pkg = _load(config)
    package_bytes = PackageImporter.read_bytes(config.package)
    records, table, _ = _compute_twists(config, pkg, package_bytes)
    out = config.out

    counts = vanishing_counts(table, config.grid, records)
    DataExporter.export_counts(counts, out / "counts.csv")
    DataExporter.export_ratios(congruence_table(table, pkg, config.bound), out / "ratios.csv")
    DataExporter.export_histogram(normalized_histogram(table, config.bins), out / "histogram.csv")

    fits = {}
    for rational in (False, True):
        name = "rational" if rational else "all"
        for e, points in normalized_count_series(counts, pkg.weight, DEFAULT_EXPONENTS, rational).items():
            DataExporter.export_gnuplot(points, out / f"normalized_{name}_{e:.6f}.dat", f"X  N/(X^p (log X)^{e:.6f})")
        try:
            fit = logpower_fit(counts, pkg.weight, rational)
            fits[name] = {'exponent': fit.exponent, 'constant': fit.constant, 'residual': fit.residual,
                          'x_power': fit.x_power, 'degenerate': fit.degenerate}
            logger.info(f"log-power fit ({name}): e = {fit.exponent:.6g}, C = {fit.constant:.6g}")
        except ValueError as e:
            logger.warning(f"log-power fit ({name}) skipped: {e}")

    base = next((r for r in table if r.is_rational and r.D.a == -3 and r.c != 0), None)
    ratios = []
    if base is not None:
        for r, value, square in rational_verification_ratios(table, base, pkg.weight):
            ratios.append({'D': r.D.a, 'value': fraction_text(value), 'square': square})
            if not square:
                logger.warning(f"(D/D0) L(D)/L(D0) at D={r.D.a} is {fraction_text(value)}, not a square")

    window = slice_stats(table, 0, trace_bound(pkg.F, config.bound) + 1)
    DataExporter.export_to_json(
        _manifest(
            config, pkg, started,
            grid=config.grid,
            counts=counts.rows(),
            fits=fits,
            verification_ratios=ratios,
            window={'vanishing': window.vanishing, 'total': window.total},
        ),
        out / "manifest.json",
    )
    return 0


def run_verify(config: RunConfig) -> int:
    pkg = PackageImporter.load(config.package)
    report = verify_package(pkg)
    for check in report.checks:
        logger.info(f"[{'ok' if check.passed else 'FAIL'}] {check.name} {check.detail}".rstrip())
    if config.out:
        DataExporter.export_to_json(report.as_dict(), Path(config.out) / "verify.json")
    print(f"{pkg.label}: {'passed' if report.passed else 'failed'}; "
          f"discriminant norms {report.discriminant_norms}; unit orders {report.unit_orders}")
    return 0 if report.passed else 1


def run_resume(config: RunConfig) -> int:
    meta = CheckpointManager.read_meta(config.checkpoint)
    if not meta.get('package') or meta.get('X') is None:
        raise CheckpointError(f"{config.checkpoint} carries no run settings")
    out = Path(meta.get('out') or Config.OUTPUT_DIR)
    if meta.get('finished') and (out / "twists.csv").exists():
        logger.info(f"{config.checkpoint} is finished; results are in {out}")
        audit_logger.log_run_event(
            config.command, "finish", {'checkpoint': str(config.checkpoint), 'recomputed': False}
        )
        print(f"already finished: {out / 'twists.csv'}")
        return 0
    resumed = RunConfig(
        command="twists",
        package=meta['package'],
        bound=int(meta['X']),
        out=out,
        workers=config.workers,
        checkpoint=config.checkpoint,
        force=bool(meta.get('force')),
    )
    return run_twists(resumed)


COMMANDS = {
    'theta': run_theta,
    'discs': run_discs,
    'twists': run_twists,
    'stats': run_stats,
    'verify': run_verify,
    'resume': run_resume,
}


def run(config: RunConfig) -> int:
    audit_logger.log_run_event(config.command, "start", {'package': config.package})
    Config.ensure_directories()
    return COMMANDS[config.command](config)


def main(argv: Optional[List[str]] = None) -> int:
    try:
        config = parse_config(argv)
        return run(config)
    except (TwistvalsError, OverflowError) as e:
        print(error_handler.handle_exception(e, "twistvals"), file=sys.stderr)
        return error_handler.exit_code(e)
    except Exception as e:
        print(error_handler.handle_exception(e, "twistvals"), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
