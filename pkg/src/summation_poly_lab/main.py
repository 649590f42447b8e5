from typing import Any, Callable, Dict, List, Optional, Sequence
import argparse
import importlib.metadata
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from . import curves, database, descent, fields, gbprofiler, reductions, statistics, sumpoly
from .curves import WeierstrassModel
from .dimacs import parse_dimacs
from .errors import EXIT_OK, EXIT_REFUTED, EXIT_USAGE, ReductionError, SchemaError, SumpolyLabError, WitnessError
from .experiments import ExperimentBatch
from .fields import parse_field_spec
from .schemas import (CertificateDocument, CorpusDocument, DescentCheckDocument, Document, ErrorDocument,
                      FfdSummaryDocument, InstanceDocument, PolynomialDocument, ReduceDocument, VerifyDocument,
                      WitnessDocument, dump_document, load_document)

DEFAULT_CONFIG_PATH = Path(__file__).parent.parent.parent / "resources" / "default_config.yaml"
MEM_BUDGET_ENV = "SUMPOLY_LAB_MEM_BUDGET"

# (section, key) -> (module, attribute) for the caps that live as module constants
CONFIG_CONSTANTS = {
    ("fields", "table_max_order"): (fields, "TABLE_MAX_ORDER"),
    ("curves", "naive_count_max_order"): (curves, "NAIVE_COUNT_MAX_ORDER"),
    ("curves", "search_trials_per_field"): (curves, "SEARCH_TRIALS_PER_FIELD"),
    ("curves", "search_max_trials"): (curves, "SEARCH_MAX_TRIALS"),
    ("curves", "max_order"): (curves, "MAX_ORDER"),
    ("sumpoly", "max_arity"): (sumpoly, "MAX_ARITY"),
    ("sumpoly", "literal_max_arity"): (sumpoly, "LITERAL_MAX_ARITY"),
    ("descent", "exhaustive_max_n"): (descent, "EXHAUSTIVE_MAX_N"),
    ("descent", "symbolic_max_n"): (descent, "SYMBOLIC_MAX_N"),
    ("descent", "draw_retries"): (descent, "DRAW_RETRIES"),
    ("gbprofiler", "dmax"): (gbprofiler, "DMAX"),
    ("gbprofiler", "memory_budget_bytes"): (gbprofiler, "MEMORY_BUDGET_BYTES"),
    ("gbprofiler", "enumeration_max_dim"): (gbprofiler, "ENUMERATION_MAX_DIM"),
    ("gbprofiler", "draw_retries"): (gbprofiler, "DRAW_RETRIES"),
    ("reductions", "default_p"): (reductions, "DEFAULT_P"),
    ("reductions", "sat_max_vars"): (reductions, "SAT_MAX_VARS"),
    ("reductions", "subset_max_elements"): (reductions, "SUBSET_MAX_ELEMENTS"),
    ("reductions", "order_bound_max"): (reductions, "ORDER_BOUND_MAX"),
}


@dataclass
class RunConfig:
    """Configuration file, environment and flags merged for one invocation."""

    command: str
    json_mode: bool
    verbosity: int
    memory_budget: int
    dmax: int
    default_p: int
    output_dir: str
    database: str
    use_cache: bool
    retention_days: int
    workers: int


def setup_logging(config: Dict[str, Any], json_mode: bool = False, verbosity: int = 0) -> None:
    """Set up logging based on the configuration.

    In JSON mode console logs go to stderr so that stdout carries only the document.
    `verbosity` 1 forces DEBUG, -1 forces WARNING.
    """
    logging_config = config.get('logging', {})
    level = logging_config.get('level', 'INFO').upper()
    if verbosity > 0:
        level = 'DEBUG'
    elif verbosity < 0:
        level = 'WARNING'
    log_file = logging_config.get('file')
    log_to_console = logging_config.get('console', True)
    console_stream = sys.stderr if json_mode else sys.stdout

    handlers: list[logging.Handler] = []
    if log_file:
        handlers.append(logging.FileHandler(log_file, mode='a'))
    if log_to_console:
        handlers.append(logging.StreamHandler(console_stream))

    if not handlers:
        # Default to console if no handler is configured
        handlers.append(logging.StreamHandler(console_stream))

    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True
    )


def load_config(config_path: str) -> Dict[str, Any]:
    """Load configuration from a YAML file; every key has a built-in default, so errors yield {}."""
    try:
        with open(config_path, 'r', encoding='utf-8') as file:
            config = yaml.safe_load(file)
            return config if isinstance(config, dict) else {}
    except FileNotFoundError:
        logging.error(f"Error: File {config_path} not found")
        return {}
    except yaml.YAMLError as e:
        logging.error(f"Error reading YAML file: {e}")
        return {}


def apply_config(config: Dict[str, Any]) -> None:
    """Install the configured caps as module constants."""
    for (section, key), (module, attribute) in CONFIG_CONSTANTS.items():
        value = (config.get(section) or {}).get(key)
        if value is not None:
            setattr(module, attribute, int(value))


def build_run_config(args: argparse.Namespace, config: Dict[str, Any],
                     environ: Optional[Dict[str, str]] = None) -> RunConfig:
    """Merge flags over the environment over the configuration file.

    The memory budget is taken from `--mem`, then SUMPOLY_LAB_MEM_BUDGET, then
    `gbprofiler.memory_budget_bytes`.
    """
    environ = dict(os.environ) if environ is None else environ
    profiler = config.get('gbprofiler', {})
    experiments = config.get('experiments', {})
    memory_budget = int(profiler.get('memory_budget_bytes', gbprofiler.MEMORY_BUDGET_BYTES))
    if environ.get(MEM_BUDGET_ENV):
        try:
            memory_budget = int(environ[MEM_BUDGET_ENV])
        except ValueError:
            raise SumpolyLabError(f"{MEM_BUDGET_ENV} must be an integer byte count, got {environ[MEM_BUDGET_ENV]!r}") from None
    if getattr(args, 'mem', None) is not None:
        memory_budget = args.mem
    if memory_budget <= 0:
        raise SumpolyLabError(f"memory budget must be positive, got {memory_budget}")
    dmax = getattr(args, 'dmax', None)
    return RunConfig(
        command=args.command,
        json_mode=args.json,
        verbosity=1 if args.verbose else -1 if args.quiet else 0,
        memory_budget=memory_budget,
        dmax=int(profiler.get('dmax', gbprofiler.DMAX)) if dmax is None else dmax,
        default_p=int(config.get('reductions', {}).get('default_p', reductions.DEFAULT_P)),
        output_dir=str(experiments.get('output_dir', 'output')),
        database=str(experiments.get('database', database.DB_PATH)),
        use_cache=bool(experiments.get('cache', True)),
        retention_days=int(experiments.get('retention_days', 30)),
        workers=int(experiments.get('workers', 1)),
    )


def emit(run_config: RunConfig, document: Document, lines: Sequence[str]) -> None:
    """Write the JSON document in --json mode, the text lines otherwise."""
    if run_config.json_mode:
        sys.stdout.write(dump_document(document))
    else:
        for line in lines:
            sys.stdout.write(line + "\n")


def _records(df: Any) -> List[Dict[str, Any]]:
    return json.loads(df.to_json(orient='records'))


def _read_text(path: str) -> str:
    with open(path, 'r', encoding='utf-8') as f:
        return f.read()


def _write_text(path: str, text: str) -> bool:
    try:
        with open(path, 'w', encoding='utf-8') as f:
            f.write(text)
        logging.info(f"Successfully wrote {path}")
        return True
    except IOError as e:
        logging.error(f"Error writing {path}: {e}")
        return False


# -- subcommands ---------------------------------------------------------------------------------


def cmd_sumpoly_compute(args: argparse.Namespace, run_config: RunConfig) -> int:
    field = parse_field_spec(args.field)
    model = WeierstrassModel.from_coefficients(field, [args.a1, args.a2, args.a3, args.a4, args.a6])
    poly = sumpoly.summation_poly(model, args.r)
    text = poly.to_text()
    document = PolynomialDocument(curve=model.descriptor(), r=args.r, text=text, polynomial=poly.to_json())
    emit(run_config, document, [text])
    return EXIT_OK


def cmd_descent_check(args: argparse.Namespace, run_config: RunConfig) -> int:
    model, P = descent.draw_ordinary_instance(args.n, args.seed)
    report: Any
    check = args.check
    if check == 'trace-identity':
        report = descent.check_trace_identity(model, P, args.mode)
    else:
        report = descent.linear_trace_combination(model, P)
    verdict = "PASS" if report.holds else "FAIL"
    document = DescentCheckDocument(check=check, n=args.n, seed=args.seed, curve=model.descriptor(),
                                    point=P.to_json(), holds=report.holds, report=report.to_json())
    emit(run_config, document, [f"{verdict} {check} n={args.n} seed={args.seed} on {model}"])
    return EXIT_OK if report.holds else EXIT_REFUTED


def _parse_n_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise SumpolyLabError(f"--n-list must be comma-separated integers, got {text!r}") from None


def cmd_ffd_run(args: argparse.Namespace, run_config: RunConfig) -> int:
    output_dir = args.out or run_config.output_dir
    use_cache = run_config.use_cache and not args.no_cache
    if use_cache:
        database.DB_PATH = Path(run_config.database)
        database.create_tables()
        database.purge_old_runs(run_config.retention_days)

    batch = ExperimentBatch(_parse_n_list(args.n_list), args.trials, args.seed, dmax=run_config.dmax,
                            memory_budget=run_config.memory_budget, subspace=args.subspace,
                            add_trace_relation=args.trace_relation, timings=args.timings,
                            use_cache=use_cache, workers=args.workers or run_config.workers)
    trials_df = batch.run()

    os.makedirs(output_dir, exist_ok=True)
    csv_path = batch.to_csv(output_dir)
    batch.write_sidecars(output_dir)
    if use_cache:
        batch.save_to_db()

    rates = statistics.calculate_ffd_rate(trials_df)
    distribution = statistics.calculate_solving_degree_distribution(trials_df)
    status_counts = statistics.calculate_status_counts(trials_df)
    document = FfdSummaryDocument(n_list=batch.n_list, trials=args.trials, seed=args.seed, dmax=batch.dmax,
                                  memory_budget=batch.memory_budget, csv=csv_path, ffd_rate=_records(rates),
                                  solving_degree_distribution=_records(distribution),
                                  status_counts=_records(status_counts))
    lines = [f"Trials: {len(trials_df)} written to {csv_path}", "First fall degree 2 rate:"]
    lines.append(rates.to_string(index=False) if not rates.empty else "  (no trials)")
    lines.append("Observed solving degree distribution:")
    lines.append(distribution.to_string(index=False) if not distribution.empty else "  (no trials)")
    emit(run_config, document, lines)
    return EXIT_OK if csv_path else EXIT_USAGE


def cmd_reduce(args: argparse.Namespace, run_config: RunConfig) -> int:
    try:
        text = _read_text(args.input)
    except IOError as e:
        logging.error(f"Error reading {args.input}: {e}")
        return EXIT_USAGE
    sat = parse_dimacs(text)
    p = run_config.default_p if args.p is None else args.p
    rng = np.random.default_rng(args.seed)
    chain = reductions.reduce_sat(sat, args.route, p, rng)
    verdict = reductions.decide_vanishing(chain.instance)

    os.makedirs(args.out, exist_ok=True)
    route = reductions.Route(args.route).value
    files = {
        "instance.json": InstanceDocument(route=route, instance=reductions.summation_instance_to_json(chain.instance)),
        "certificate.json": CertificateDocument(route=route, sat=sat.to_json(),
                                                certificates=[reductions.certificate_to_json(c) for c in chain.certificates]),
    }
    if verdict.witness is not None:
        files["witness.json"] = WitnessDocument(relation=reductions.relation_witness_to_json(verdict.witness))
    written = []
    for name, file_document in files.items():
        path = os.path.join(args.out, name)
        if not _write_text(path, dump_document(file_document)):
            return EXIT_USAGE
        written.append(path)

    document = ReduceDocument(route=route, num_vars=sat.num_vars, num_clauses=sat.num_clauses,
                              elements=len(chain.subset_instance), arity=chain.instance.r,
                              vanishes=verdict.vanishes, files=written)
    outcome = "vanishes (satisfiable)" if verdict.vanishes else "does not vanish (unsatisfiable)"
    emit(run_config, document, [f"S_{chain.instance.r} over {chain.instance.model.field!r} {outcome}"] + written)
    return EXIT_OK if verdict.vanishes else EXIT_REFUTED


def _decode(decoder: Callable[[Dict[str, Any]], Any], data: Dict[str, Any], what: str) -> Any:
    try:
        return decoder(data)
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"malformed {what}: {e!r}") from None


def _load_relation(document: WitnessDocument) -> Any:
    try:
        return reductions.relation_witness_from_json(document.relation)
    except (SumpolyLabError, KeyError, TypeError, ValueError) as e:
        raise WitnessError(f"malformed relation: {e}", "relation") from None


def cmd_verify(args: argparse.Namespace, run_config: RunConfig) -> int:
    instance_document = load_document(_read_text(args.instance), InstanceDocument)
    witness_document = load_document(_read_text(args.witness), WitnessDocument)
    instance = _decode(reductions.summation_instance_from_json, instance_document.instance, "instance")
    certificates = []
    if args.certificate:
        certificate_document = load_document(_read_text(args.certificate), CertificateDocument)
        certificates = [_decode(reductions.certificate_from_json, c, "certificate") for c in certificate_document.certificates]
        if not certificates or reductions.summation_instance_to_json(certificates[-1].downstream) != instance_document.instance:
            raise ReductionError("the certificate does not end in the given instance")

    try:
        relation = reductions.check_relation(instance, _load_relation(witness_document))
        subset = assignment = None
        if certificates:
            subset = reductions.pull_back_witness(certificates[-1], relation)
            assignment = reductions.pull_back_chain(certificates[:-1], subset)
    except WitnessError as e:
        document = VerifyDocument(valid=False, stage=e.stage, message=str(e))
        emit(run_config, document, [f"INVALID {e}"])
        return EXIT_REFUTED

    document = VerifyDocument(valid=True, subset=None if subset is None else list(subset),
                              assignment=None if assignment is None else list(assignment))
    lines = ["VALID relation"]
    if assignment is not None:
        lines.append("assignment: " + " ".join(str(i + 1 if v else -(i + 1)) for i, v in enumerate(assignment)))
    emit(run_config, document, lines)
    return EXIT_OK


def cmd_corpus(args: argparse.Namespace, run_config: RunConfig) -> int:
    p = run_config.default_p if args.p is None else args.p
    corpus_df = reductions.verify_corpus(args.count, args.max_vars, args.max_clauses, args.seed, p)
    output_dir = args.out or run_config.output_dir
    os.makedirs(output_dir, exist_ok=True)
    csv_path: Optional[str] = os.path.join(output_dir, f"corpus_seed{args.seed}.csv")
    try:
        corpus_df.to_csv(csv_path, index=False)
        logging.info(f"Successfully exported corpus verdicts to {csv_path}")
    except IOError as e:
        logging.error(f"Error exporting corpus verdicts to {csv_path}: {e}")
        csv_path = None
    agree = int(corpus_df['agree'].sum())
    verified = int((corpus_df['witness_verified'] == True).sum())  # noqa: E712
    satisfiable = int(corpus_df['sat'].sum())
    document = CorpusDocument(count=args.count, seed=args.seed, p=p, agree=agree, satisfiable=satisfiable,
                              witnesses_verified=verified, csv=csv_path)
    emit(run_config, document, [f"{agree}/{args.count} agree, {satisfiable} satisfiable, "
                                f"{verified} witness(es) pulled back to satisfying assignments"])
    all_good = agree == args.count and verified == satisfiable
    return EXIT_OK if all_good else EXIT_REFUTED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="summation-poly-lab",
                                     description="Summation polynomials, Weil descent, first fall degrees and the 3-SAT reduction chain.")
    parser.add_argument('--config', default=str(DEFAULT_CONFIG_PATH), help="YAML configuration file")
    parser.add_argument('--json', action='store_true', help="print a versioned JSON document on stdout")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true')
    verbosity.add_argument('-q', '--quiet', action='store_true')
    commands = parser.add_subparsers(dest='command', required=True)

    sumpoly_parser = commands.add_parser('sumpoly', help="summation polynomials")
    sumpoly_commands = sumpoly_parser.add_subparsers(dest='sumpoly_command', required=True)
    compute = sumpoly_commands.add_parser('compute', help="print S_r for a Weierstrass model")
    for name in ('a1', 'a2', 'a3', 'a4', 'a6'):
        compute.add_argument(f'--{name}', type=int, default=0)
    compute.add_argument('--r', type=int, required=True)
    compute.add_argument('--field', required=True, help="p, p^n or p^n:c0,...,cn")
    compute.set_defaults(handler=cmd_sumpoly_compute)

    descent_parser = commands.add_parser('descent', help="trace identities behind the degree fall")
    descent_commands = descent_parser.add_subparsers(dest='descent_command', required=True)
    for name, alias, check_kind, help_text in (
            ('check-trace', 'check-w7', 'trace-identity', "trace identity for S_3(X0, X1, x(P))"),
            ('check-combination', 'check-w8', 'linear-combination', "linear combination of the descended components")):
        check = descent_commands.add_parser(name, aliases=[alias], help=help_text)
        check.add_argument('--n', type=int, required=True)
        check.add_argument('--seed', type=int, required=True)
        if name == 'check-trace':
            check.add_argument('--mode', choices=['auto', 'exhaustive', 'symbolic'], default='auto')
        check.set_defaults(handler=cmd_descent_check, check=check_kind)

    ffd_parser = commands.add_parser('ffd', help="first fall degree experiments")
    ffd_commands = ffd_parser.add_subparsers(dest='ffd_command', required=True)
    run = ffd_commands.add_parser('run', help="profile seeded subspace instances")
    run.add_argument('--n-list', required=True, help="comma-separated extension degrees, e.g. 8,12")
    run.add_argument('--trials', type=int, required=True)
    run.add_argument('--seed', type=int, required=True)
    run.add_argument('--dmax', type=int)
    run.add_argument('--mem', type=int, help="matrix memory budget in bytes")
    run.add_argument('--out', help="output directory")
    run.add_argument('--subspace', choices=['random', 'fixed'], default='random')
    run.add_argument('--trace-relation', action='store_true', help="add the linear trace relation as a generator")
    run.add_argument('--timings', action='store_true', help="fill the wall_time_ms column")
    run.add_argument('--no-cache', action='store_true')
    run.add_argument('--workers', type=int)
    run.set_defaults(handler=cmd_ffd_run)

    reduce_parser = commands.add_parser('reduce', help="3-SAT to a summation polynomial instance")
    reduce_parser.add_argument('--in', dest='input', required=True, help="DIMACS CNF file")
    reduce_parser.add_argument('--route', choices=[r.value for r in reductions.Route], default='cusp')
    reduce_parser.add_argument('--out', required=True, help="output directory")
    reduce_parser.add_argument('--p', type=int, help="prime for the cuspidal route")
    reduce_parser.add_argument('--seed', type=int, default=0, help="seed for the elliptic route's curve search")
    reduce_parser.set_defaults(handler=cmd_reduce)

    verify_parser = commands.add_parser('verify', help="check a relation witness, optionally back to an assignment")
    verify_parser.add_argument('--instance', required=True)
    verify_parser.add_argument('--witness', required=True)
    verify_parser.add_argument('--certificate')
    verify_parser.set_defaults(handler=cmd_verify)

    corpus_parser = commands.add_parser('corpus', help="end-to-end check on a seeded random 3-SAT corpus")
    corpus_parser.add_argument('--count', type=int, default=200)
    corpus_parser.add_argument('--max-vars', type=int, default=6)
    corpus_parser.add_argument('--max-clauses', type=int, default=6)
    corpus_parser.add_argument('--seed', type=int, required=True)
    corpus_parser.add_argument('--p', type=int)
    corpus_parser.add_argument('--out', help="output directory")
    corpus_parser.set_defaults(handler=cmd_corpus)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse the command line, configure, dispatch and map domain errors to exit codes.
    """
    args = build_parser().parse_args(argv)

    # 1. Load config
    config = load_config(args.config)
    setup_logging(config, args.json, 1 if args.verbose else -1 if args.quiet else 0)

    # Log version
    try:
        version = importlib.metadata.version("summation-poly-lab")
        logging.info(f"Starting summation-poly-lab version {version}")
    except importlib.metadata.PackageNotFoundError:
        logging.warning("Starting summation-poly-lab (version not found)")

    handler: Callable[[argparse.Namespace, RunConfig], int] = args.handler
    json_mode = args.json
    try:
        apply_config(config)
        run_config = build_run_config(args, config)
        return handler(args, run_config)
    except SumpolyLabError as e:
        logging.error(f"{type(e).__name__}: {e}")
        if json_mode:
            sys.stdout.write(dump_document(ErrorDocument(error=str(e), exit_code=e.exit_code)))
        return e.exit_code
    except IOError as e:
        logging.error(f"I/O error: {e}")
        if json_mode:
            sys.stdout.write(dump_document(ErrorDocument(error=str(e), exit_code=EXIT_USAGE)))
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
