import json
import os
import pytest
from unittest.mock import patch

from src.summation_poly_lab import sumpoly
from src.summation_poly_lab.errors import SumpolyLabError
from src.summation_poly_lab.experiments import ExperimentBatch
from src.summation_poly_lab.main import (MEM_BUDGET_ENV, apply_config, build_parser, build_run_config, load_config,
                                         main)

SATISFIABLE = "c x1 false, x2 true\np cnf 2 2\n1 2 0\n-1 0\n"
UNSATISFIABLE = "p cnf 1 2\n1 0\n-1 0\n"


@pytest.fixture
def cli(capsys):
    """Run main() without touching the logging setup or the shipped configuration."""
    with patch('src.summation_poly_lab.main.setup_logging'), \
            patch('src.summation_poly_lab.main.load_config', return_value={}):
        def run(*argv):
            code = main(list(argv))
            return code, capsys.readouterr().out
        yield run


@pytest.fixture
def cnf(tmp_path):
    def write(text, name="formula.cnf"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return write


def test_sumpoly_compute_prints_canonical_text(cli):
    code, out = cli('sumpoly', 'compute', '--r', '2', '--field', '11', '--a4', '1', '--a6', '3')
    assert code == 0
    assert out == "X0 - X1\n"


def test_sumpoly_compute_json(cli):
    code, out = cli('--json', 'sumpoly', 'compute', '--r', '2', '--field', '7')
    document = json.loads(out)
    assert code == 0
    assert document['schema_version'] == '1'
    assert document['kind'] == 'summation-polynomial'
    assert document['text'] == 'X0 - X1'
    assert document['r'] == 2


@pytest.mark.parametrize("argv, expected", [
    (['sumpoly', 'compute', '--r', '8', '--field', '7'], 3),
    (['sumpoly', 'compute', '--r', '3', '--field', 'seven'], 2),
])
def test_sumpoly_compute_errors(cli, argv, expected):
    code, _ = cli(*argv)
    assert code == expected


def test_errors_in_json_mode_are_documents(cli):
    code, out = cli('--json', 'sumpoly', 'compute', '--r', '8', '--field', '7')
    document = json.loads(out)
    assert code == 3
    assert document['kind'] == 'error'
    assert document['exit_code'] == 3
    assert str(sumpoly.MAX_ARITY) in document['error']


@pytest.mark.parametrize("command, check", [
    ('check-trace', 'trace-identity'),
    ('check-w7', 'trace-identity'),
    ('check-combination', 'linear-combination'),
    ('check-w8', 'linear-combination'),
])
def test_descent_checks_pass(cli, command, check):
    code, out = cli('descent', command, '--n', '4', '--seed', '1')
    assert code == 0
    assert out.startswith(f"PASS {check} n=4 seed=1")


def test_descent_check_json_is_deterministic(cli):
    first = cli('--json', 'descent', 'check-trace', '--n', '4', '--seed', '1')
    second = cli('--json', 'descent', 'check-trace', '--n', '4', '--seed', '1')
    assert first == second
    document = json.loads(first[1])
    assert document['holds'] is True
    assert document['report']['mode'] == 'exhaustive'


def test_exhaustive_trace_check_refused_for_large_n(cli):
    code, _ = cli('descent', 'check-trace', '--n', '12', '--seed', '1', '--mode', 'exhaustive')
    assert code == 3


def test_ffd_run_with_no_trials_writes_header(cli, tmp_path):
    code, out = cli('ffd', 'run', '--n-list', '8,12', '--trials', '0', '--seed', '1', '--out', str(tmp_path), '--no-cache')
    assert code == 0
    with open(tmp_path / "ffd_seed1.csv") as f:
        assert f.read().strip() == "n,seed,ffd,solving_degree,matrix_max_dims,wall_time_ms,status"
    assert "First fall degree 2 rate" in out


def test_ffd_run_memory_budget_precedence(cli, tmp_path):
    argv = ['ffd', 'run', '--n-list', '8', '--trials', '0', '--seed', '1', '--out', str(tmp_path), '--no-cache']
    with patch('src.summation_poly_lab.main.ExperimentBatch', wraps=ExperimentBatch) as mock_batch, \
            patch.dict(os.environ, {MEM_BUDGET_ENV: "12345"}):
        cli(*argv)
        cli(*argv, '--mem', '999')
    assert mock_batch.call_args_list[0].kwargs['memory_budget'] == 12345
    assert mock_batch.call_args_list[1].kwargs['memory_budget'] == 999


def test_reduce_and_verify_satisfiable(cli, cnf, tmp_path):
    out_dir = tmp_path / "out"
    code, out = cli('reduce', '--in', cnf(SATISFIABLE), '--route', 'cusp', '--out', str(out_dir))
    assert code == 0
    assert "vanishes" in out
    assert sorted(os.listdir(out_dir)) == ['certificate.json', 'instance.json', 'witness.json']

    code, out = cli('--json', 'verify', '--instance', str(out_dir / 'instance.json'),
                    '--witness', str(out_dir / 'witness.json'), '--certificate', str(out_dir / 'certificate.json'))
    document = json.loads(out)
    assert code == 0
    assert document['valid'] is True
    assert document['assignment'] == [False, True]


def test_reduce_is_byte_identical(cli, cnf, tmp_path):
    path = cnf(SATISFIABLE)
    cli('reduce', '--in', path, '--out', str(tmp_path / "a"))
    cli('reduce', '--in', path, '--out', str(tmp_path / "b"))
    for name in ('instance.json', 'certificate.json', 'witness.json'):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_reduce_unsatisfiable(cli, cnf, tmp_path):
    code, out = cli('--json', 'reduce', '--in', cnf(UNSATISFIABLE), '--out', str(tmp_path))
    document = json.loads(out)
    assert code == 1
    assert document['vanishes'] is False
    assert not os.path.exists(tmp_path / 'witness.json')


def test_reduce_elliptic_route(cli, cnf, tmp_path):
    code, _ = cli('reduce', '--in', cnf("p cnf 1 1\n1 0\n"), '--route', 'ec', '--seed', '5', '--out', str(tmp_path))
    assert code == 0
    code, out = cli('verify', '--instance', str(tmp_path / 'instance.json'), '--witness', str(tmp_path / 'witness.json'),
                    '--certificate', str(tmp_path / 'certificate.json'))
    assert code == 0
    assert "assignment: 1" in out


@pytest.mark.parametrize("route", ['cusp', 'ec'])
def test_reduce_empty_formula(cli, cnf, tmp_path, route):
    code, out = cli('reduce', '--in', cnf("p cnf 0 0\n"), '--route', route, '--out', str(tmp_path))
    assert code == 0
    assert "vanishes (satisfiable)" in out
    code, out = cli('--json', 'verify', '--instance', str(tmp_path / 'instance.json'),
                    '--witness', str(tmp_path / 'witness.json'), '--certificate', str(tmp_path / 'certificate.json'))
    document = json.loads(out)
    assert code == 0
    assert document['assignment'] == []


def test_verify_rejects_tampered_witness(cli, cnf, tmp_path):
    cli('reduce', '--in', cnf(SATISFIABLE), '--out', str(tmp_path))
    witness_path = tmp_path / 'witness.json'
    data = json.loads(witness_path.read_text())
    data['relation']['signs'][0] *= -1
    witness_path.write_text(json.dumps(data))

    code, out = cli('--json', 'verify', '--instance', str(tmp_path / 'instance.json'), '--witness', str(witness_path))
    document = json.loads(out)
    assert code == 1
    assert document['valid'] is False
    assert document['stage'] == 'relation'


def test_verify_rejects_other_schema_version(cli, cnf, tmp_path):
    cli('reduce', '--in', cnf(SATISFIABLE), '--out', str(tmp_path))
    witness_path = tmp_path / 'witness.json'
    data = json.loads(witness_path.read_text())
    data['schema_version'] = '0'
    witness_path.write_text(json.dumps(data))

    code, _ = cli('verify', '--instance', str(tmp_path / 'instance.json'), '--witness', str(witness_path))
    assert code == 2


def test_reduce_reports_parse_location(cli, cnf, tmp_path, caplog):
    code, _ = cli('reduce', '--in', cnf("p cnf 3 1\n1 5 0\n"), '--out', str(tmp_path))
    assert code == 2
    assert "line 2, column 3" in caplog.text


def test_corpus_agrees(cli, tmp_path):
    code, out = cli('--json', 'corpus', '--count', '12', '--max-vars', '4', '--max-clauses', '3', '--seed', '5',
                    '--out', str(tmp_path))
    document = json.loads(out)
    assert code == 0
    assert document['agree'] == 12
    assert document['witnesses_verified'] == document['satisfiable']
    assert os.path.exists(tmp_path / 'corpus_seed5.csv')


def test_usage_error_exits_2(cli):
    with pytest.raises(SystemExit) as excinfo:
        cli('reduce', '--route', 'cusp')
    assert excinfo.value.code == 2


def test_build_run_config_precedence():
    parser = build_parser()
    config = {'gbprofiler': {'memory_budget_bytes': 100, 'dmax': 4}, 'experiments': {'output_dir': 'results'}}
    args = parser.parse_args(['ffd', 'run', '--n-list', '8', '--trials', '1', '--seed', '0'])

    run_config = build_run_config(args, config, environ={})
    assert (run_config.memory_budget, run_config.dmax, run_config.output_dir) == (100, 4, 'results')
    assert build_run_config(args, config, environ={MEM_BUDGET_ENV: '200'}).memory_budget == 200

    args = parser.parse_args(['ffd', 'run', '--n-list', '8', '--trials', '1', '--seed', '0', '--mem', '300', '--dmax', '3'])
    run_config = build_run_config(args, config, environ={MEM_BUDGET_ENV: '200'})
    assert (run_config.memory_budget, run_config.dmax) == (300, 3)

    with pytest.raises(SumpolyLabError):
        build_run_config(args, config, environ={MEM_BUDGET_ENV: 'lots'})


def test_load_config(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("sumpoly:\n  max_arity: 6\n")
    assert load_config(str(path)) == {'sumpoly': {'max_arity': 6}}
    assert load_config(str(tmp_path / "missing.yaml")) == {}
    path.write_text("sumpoly: [unclosed\n")
    assert load_config(str(path)) == {}


def test_apply_config_sets_caps():
    with patch.object(sumpoly, 'MAX_ARITY', 7):
        apply_config({'sumpoly': {'max_arity': 5}, 'descent': None})
        assert sumpoly.MAX_ARITY == 5
