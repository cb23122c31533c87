"""
fbm-rates: точка входа командной строки.

    python -m src.cli [--seed S] [--threads K] [--quiet] [--log-level L] <subcommand> ...

Коды выхода: 0 - успех, 1 - ошибка валидации (аргументы, конфиг, диапазоны параметров),
2 - внутренняя несогласованность (сертификат, расхождение оракулов, мало реплик).
"""
import argparse
import json
import sys
from pathlib import Path

from pydantic import ValidationError

from src.config import __version__, settings
from src.logs import getLogger, set_console_level
from src.models.experiment import ExperimentConfig
from src.models.integrands import parse_integrand
from src.models.paths import SampledFunction, SamplingMethod
from src.services.crossing import crossing_sweep
from src.services.experiment import ito_l1_errors, persist_results, run_experiment
from src.services.fbm_sim import sample_many
from src.services.fraccalc import besov_norms
from src.utils.errors import ConsistencyFailure, DomainError, UsageError, ValidationFailure
from src.utils.export import (canonical_json, export_paths_csv, export_rate_to_excel, export_sweep_csv,
                              export_sweep_to_excel, read_paths_csv, write_json)
from src.utils.utils import default_threads, get_host_stats

logger = getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONSISTENCY = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _read_json(path) -> dict:
    with open(path, encoding="utf-8") as source:
        return json.load(source)


def _echo(title: str, payload: dict):
    """Эхо итоговой конфигурации в stderr до начала вычислений"""
    print(f"[{title}] resolved configuration: {json.dumps(payload, sort_keys=True, default=str)}", file=sys.stderr)


def _seed(args, fallback: int = 0) -> int:
    return args.seed if args.seed is not None else fallback


def cmd_simulate_paths(args) -> int:
    if args.steps < 1:
        raise DomainError(f"--steps must be >= 1, got {args.steps}")
    if args.count < 1:
        raise DomainError(f"--count must be >= 1, got {args.count}")
    seed = _seed(args)
    _echo("simulate-paths", {"hurst": args.hurst, "steps": args.steps, "count": args.count,
                             "seed": seed, "method": args.method, "out": args.out})
    paths = sample_many(args.hurst, args.steps, seed, args.count, args.method)
    export_paths_csv(paths, args.out)
    logger.info(f"{args.count} paths written to {args.out}")
    return EXIT_OK


def cmd_estimate_rate(args) -> int:
    data = _read_json(args.config)
    if args.seed is not None:
        data["seed"] = args.seed
    if args.replicates is not None:
        data["replicates"] = args.replicates
    cfg = ExperimentConfig.model_validate(data)
    if not Path(args.out).resolve().parent.is_dir():
        raise FileNotFoundError(f"output directory does not exist: {Path(args.out).resolve().parent} (for {args.out})")
    _echo("estimate-rate", {**cfg.model_dump(mode="json"), "out": args.out, "threads": args.threads})

    logger.info(f"Host: {get_host_stats()}")
    estimate = run_experiment(cfg, threads=args.threads)
    persist_results(estimate, cfg, args.out)
    if args.xlsx:
        export_rate_to_excel(estimate, args.xlsx)
    if settings.storage.enabled and not args.no_register:
        from src.database.crud import add_run, init_database

        init_database()
        add_run(estimate, cfg, str(args.out))

    print(f"slope={estimate.slope:.6f} stderr={estimate.slope_stderr:.6f} "
          f"exponent={estimate.theoretical_exponent:.6f} passed={estimate.passed}")
    return EXIT_OK


def cmd_crossing_bound(args) -> int:
    _echo("crossing-bound", {"hurst": args.hurst, "s_grid": args.s_grid, "t_grid": args.t_grid,
                             "a_grid": args.a_grid, "quadrature_points": args.quadrature_points, "out": args.out})
    results = crossing_sweep(args.hurst, args.s_grid, args.t_grid, args.a_grid, args.quadrature_points)
    export_sweep_csv(results, args.out)
    if args.xlsx:
        export_sweep_to_excel(results, args.xlsx)
    best = max(results, key=lambda r: r.ratio)
    print(f"max_ratio={best.ratio:.6e} at s={best.query.s:g} t={best.query.t:g} a={best.query.a:g}")
    return EXIT_OK


def cmd_besov(args) -> int:
    _echo("besov", {"input": args.input, "beta": args.beta, "path_id": args.path_id, "out": args.out})
    paths = read_paths_csv(args.input)
    if args.path_id not in paths:
        raise DomainError(f"{args.input}: no path with path_id={args.path_id}")
    report = besov_norms(SampledFunction(values=paths[args.path_id]), args.beta)
    document = report.model_dump(mode="json")
    if args.out:
        write_json(document, args.out)
    sys.stdout.write(canonical_json(document))
    return EXIT_OK


def cmd_verify_ito(args) -> int:
    spec = parse_integrand(_read_json(args.integrand))
    seed = _seed(args)
    _echo("verify-ito", {"hurst": args.hurst, "steps": args.steps, "paths": args.paths, "seed": seed,
                         "method": args.method, "integrand": spec.model_dump(mode="json")})
    errors = ito_l1_errors(args.hurst, args.steps, args.paths, spec, seed, args.method, args.threads)
    sys.stdout.write("n\tl1_error\n")
    for n, value in errors.items():
        sys.stdout.write(f"{n}\t{value!r}\n")
    return EXIT_OK


def cmd_list_runs(args) -> int:
    from src.database.crud import get_runs, init_database

    _echo("list-runs", {"scenario": args.scenario, "limit": args.limit, "storage": settings.storage.url})
    init_database()
    for run in get_runs(args.scenario, args.limit):
        sys.stdout.write(f"{run.id}\t{run.scenario}\tH={run.hurst:g}\tslope={run.slope:.4f}"
                         f"+-{run.slope_stderr:.4f}\texponent={run.theoretical_exponent:.5f}\t"
                         f"passed={run.passed}\tseed={run.seed}\t{run.result_path or ''}\n")
    return EXIT_OK


def _global_options(suppress: bool) -> argparse.ArgumentParser:
    """Глобальные флаги принимаются и до, и после подкоманды"""
    common = _Parser(add_help=False)
    default = (lambda value: argparse.SUPPRESS) if suppress else (lambda value: value)
    common.add_argument("--seed", type=int, default=default(None))
    common.add_argument("--threads", type=int, default=default(default_threads()))
    common.add_argument("--quiet", action="store_true", default=default(False))
    common.add_argument("--log-level", default=default(None),
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fbm-rates", parents=[_global_options(suppress=False)],
                     description="Convergence rates of Riemann-Stieltjes sums against fractional Brownian motion")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = [_global_options(suppress=True)]

    simulate = sub.add_parser("simulate-paths", parents=common, help="sample fBm paths to CSV")
    simulate.add_argument("--hurst", type=float, required=True)
    simulate.add_argument("--steps", type=int, required=True)
    simulate.add_argument("--count", type=int, default=1)
    simulate.add_argument("--method", choices=[m.value for m in SamplingMethod], default=settings.numerics.default_method)
    simulate.add_argument("--out", required=True)
    simulate.set_defaults(func=cmd_simulate_paths)

    estimate = sub.add_parser("estimate-rate", parents=common, help="Monte Carlo convergence-rate experiment")
    estimate.add_argument("--config", required=True)
    estimate.add_argument("--out", required=True)
    estimate.add_argument("--replicates", type=int)
    estimate.add_argument("--xlsx")
    estimate.add_argument("--no-register", action="store_true")
    estimate.set_defaults(func=cmd_estimate_rate)

    crossing = sub.add_parser("crossing-bound", parents=common, help="crossing probabilities against their bound")
    crossing.add_argument("--hurst", type=float, required=True)
    crossing.add_argument("--s-grid", type=float, nargs="+", required=True)
    crossing.add_argument("--t-grid", type=float, nargs="+", required=True)
    crossing.add_argument("--a-grid", type=float, nargs="+", required=True)
    crossing.add_argument("--quadrature-points", type=int)
    crossing.add_argument("--out", required=True)
    crossing.add_argument("--xlsx")
    crossing.set_defaults(func=cmd_crossing_bound)

    besov = sub.add_parser("besov", parents=common, help="Besov norms of a sampled path")
    besov.add_argument("--input", required=True)
    besov.add_argument("--beta", type=float, required=True)
    besov.add_argument("--path-id", type=int, default=0)
    besov.add_argument("--out")
    besov.set_defaults(func=cmd_besov)

    verify = sub.add_parser("verify-ito", parents=common, help="empirical L1 error against the pathwise oracle")
    verify.add_argument("--hurst", type=float, required=True)
    verify.add_argument("--steps", type=int, required=True)
    verify.add_argument("--paths", type=int, required=True)
    verify.add_argument("--integrand", required=True)
    verify.add_argument("--method", choices=[m.value for m in SamplingMethod], default=settings.numerics.default_method)
    verify.set_defaults(func=cmd_verify_ito)

    runs = sub.add_parser("list-runs", parents=common, help="recorded estimate-rate runs")
    runs.add_argument("--scenario")
    runs.add_argument("--limit", type=int)
    runs.set_defaults(func=cmd_list_runs)
    return parser


def dispatch(args) -> int:
    if args.threads < 1:
        raise UsageError(f"--threads must be >= 1, got {args.threads}")
    if args.quiet:
        set_console_level("WARNING")
    elif args.log_level:
        set_console_level(args.log_level)
    return args.func(args)


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return dispatch(args)
    except (ValidationFailure, ValidationError, json.JSONDecodeError, OSError) as e:
        logger.error(f"Validation failure: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConsistencyFailure as e:
        logger.error(f"Consistency failure: {e}", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONSISTENCY


if __name__ == "__main__":
    sys.exit(main())
