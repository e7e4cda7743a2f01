"""Command-line interface."""
import logging
from typing import List, Optional

import click

from app import setup_logging
from app.services.bench_service import BenchService
from app.services.export_service import ExportService
from app.services.solver_service import SolverService
from app.utils.budget import raise_recursion_limit
from app.utils.error_handlers import report
from app.utils.exceptions import ConfigurationError
from app.utils.validators import validate_bench_dir, validate_box, validate_input_file
from config.settings import Mode, SolverConfig, Strategy, get_config

logger = logging.getLogger(__name__)


@click.command(context_settings={'help_option_names': ['-h', '--help']})
@click.argument('input_file', required=False, type=click.Path(dir_okay=False))
@click.option('--mode', type=click.Choice([m.value for m in Mode]), default=None,
              help='smt, maxsmt (weighted soft assertions) or ea (exists-forall).')
@click.option('--strategy', type=click.Choice([s.value for s in Strategy]), default=None,
              help='How artificial domains are relaxed.')
@click.option('--timeout', type=float, default=None, help='Wall-clock budget in seconds.')
@click.option('--alpha', type=float, default=None, help='Correction factor multiplier.')
@click.option('--beta', type=float, default=None, help='Correction factor cap.')
@click.option('--radius', type=int, default=None, help='Domain radius of the jump strategies.')
@click.option('--ood-clauses/--no-ood-clauses', default=None,
              help='Add lower bounds on squares outside the domains.')
@click.option('--no-correction', is_flag=True, default=False, help='Relax by one step at a time.')
@click.option('--stats', is_flag=True, default=False, help='Print statistics after the result.')
@click.option('--seed', type=int, default=None, help='Seed for the heuristics.')
@click.option('--bench', 'bench_dir', type=click.Path(file_okay=False), default=None,
              help='Solve every .smt2 file in a directory.')
@click.option('--jobs', type=int, default=None, help='Worker threads for --bench.')
@click.option('--format', 'report_format', type=click.Choice(['jsonl', 'json', 'csv', 'markdown']),
              default='jsonl', help='Bench report format on stdout.')
@click.option('--oracle-box', type=(int, int), default=None,
              help='Brute force the input over [LO, HI] instead of solving.')
@click.option('--json-log', is_flag=True, default=False, help='Structured JSON logs on stderr.')
@click.option('--log-level', type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR']), default=None)
@click.option('--env', type=click.Choice(['development', 'bench', 'testing', 'default']), default=None,
              help='Configuration environment (defaults to SOLVER_ENV).')
def solver(input_file, mode, strategy, timeout, alpha, beta, radius, ood_clauses, no_correction,
           stats, seed, bench_dir, jobs, report_format, oracle_box, json_log, log_level, env):
    """Decide or optimize non-linear integer arithmetic in SMT-LIB 2 format."""
    env_config = get_config(env)
    setup_logging(env_config, json_logs=json_log or None, level=log_level)
    raise_recursion_limit(env_config.RECURSION_LIMIT)
    cfg = SolverConfig.from_env(
        env_config,
        mode=mode,
        strategy=strategy,
        timeout=timeout,
        alpha=alpha,
        beta=beta,
        radius=radius,
        ood_clauses=ood_clauses,
        correction=False if no_correction else None,
        seed=seed,
        stats=stats,
    )

    if bench_dir is not None:
        ok, message = validate_bench_dir(bench_dir)
        if not ok:
            raise ConfigurationError(message)
        records = BenchService(cfg, jobs or env_config.BENCH_JOBS).run(bench_dir)
        exporter = ExportService()
        if records:
            click.echo(exporter.export(records, report_format))
        click.echo(exporter.export_txt(records), err=True, nl=False)
        return 0

    ok, message = validate_input_file(input_file)
    if not ok:
        raise click.UsageError(message)
    service = SolverService(cfg)
    if oracle_box is not None:
        ok, message = validate_box(*oracle_box, max_width=env_config.ORACLE_MAX_POINTS)
        if not ok:
            raise ConfigurationError(message)
        with open(input_file, encoding='utf-8') as handle:
            outcome = service.oracle_text(handle.read(), oracle_box)
    else:
        outcome = service.solve_file(input_file)
    click.echo(outcome.render(with_stats=cfg.stats))
    return outcome.result.status.exit_code


def run(argv: Optional[List[str]] = None) -> int:
    """
    Entry point returning the process exit code.

    Args:
        argv: Arguments without the program name (defaults to sys.argv)

    Returns:
        0 sat, 1 unsat, 2 unknown, 3 usage, 4 input error, 5 other failure
    """
    try:
        code = solver.main(args=argv, prog_name='boundrelax', standalone_mode=False)
    except click.exceptions.Abort:
        return report(ConfigurationError("aborted"))
    except Exception as e:
        return report(e)
    return code if isinstance(code, int) else 0
