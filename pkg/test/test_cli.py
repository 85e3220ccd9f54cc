import json

import pytest

from unittest.mock import patch

from assemblyline_setcover.cli import run
from assemblyline_setcover.cli.check import wilson_interval
from assemblyline_setcover.instances import (LinSatInstance, SimpleGraph, brute_force_set_partition, parse_set_system,
                                             serialize_graph, serialize_linsat)
from assemblyline_setcover.models import make_verdict

SINGLETONS = "p setsystem 8 8 8\n" + "".join(f"{e}\n" for e in range(8))
TRIANGLE = "p setsystem 3 4 3\n0 1 2\n0\n1\n2\n"


@pytest.fixture(scope='function')
def cli(capsys):
    """Run the command line and return (exit code, stdout lines, parsed report envelope)"""
    def invoke(*argv):
        code = run([str(arg) for arg in argv])
        lines = capsys.readouterr().out.strip().splitlines()
        envelope = json.loads(lines[-1]) if lines and lines[-1].startswith('{') else None
        return code, lines, envelope
    return invoke


@pytest.fixture(scope='function')
def singletons_file(tmp_path):
    path = tmp_path / 'singletons.txt'
    path.write_text(SINGLETONS)
    return path


def test_solve_cover(cli, singletons_file):
    code, lines, envelope = cli('solve-cover', '--input', singletons_file, '--size', 8, '--seed', 1)
    assert code == 0
    assert lines[0] == 'verdict: YES'
    report = envelope['report']
    assert report['verdict']['answer'] == 'YES'
    assert len(report['verdict']['certificate']) == 8
    assert report['seed'] == 1
    assert envelope['status_code'] == 0
    assert envelope['error_message'] == ""


def test_output_is_deterministic(cli, singletons_file):
    first = cli('solve-cover', '--input', singletons_file, '--size', 4, '--seed', 9)
    second = cli('solve-cover', '--input', singletons_file, '--size', 4, '--seed', 9)
    assert first == second
    assert first[2]['report']['verdict']['answer'] == 'NO'


def test_unreadable_input(cli, tmp_path):
    code, _, envelope = cli('solve-cover', '--input', tmp_path / 'missing.txt')
    assert code == 2
    assert envelope['status_code'] == 2
    assert envelope['error_message'].startswith('ParseError')
    assert envelope['report'] is None


def test_malformed_input(cli, tmp_path):
    path = tmp_path / 'bad.txt'
    path.write_text("p setsystem 2 1 1\n0 5\n")
    code, _, envelope = cli('few-sets', '--input', path, '--r', 2, '--mode', 'cover')
    assert code == 2
    assert 'element index 5' in envelope['error_message']


def test_usage_errors(cli, singletons_file):
    assert cli('solve-cover', '--bogus')[0] == 1
    assert cli()[0] == 1
    assert cli('few-sets', '--input', singletons_file, '--r', 2, '--mode', 'packing')[0] == 1
    assert cli('solve-partition', '--oracle', 'singleton', '--size', 8)[0] == 1
    assert cli('solve-cover', '--input', singletons_file, '--seed', -3)[0] == 1


def test_oracle_check(cli):
    code, lines, envelope = cli('oracle-check', '--solver', 'linsat', '--sweep', 'small', '--seed', 7)
    assert code == 0
    assert "0 false positives / 20 runs" in lines
    assert envelope['report']['runs'] == 20


@pytest.mark.parametrize("solver", ['cover', 'partition', 'few-sets', 'chromatic'])
def test_oracle_check_solvers(cli, solver):
    code, lines, _ = cli('oracle-check', '--solver', solver, '--runs', 6, '--seed', 3)
    assert code == 0
    assert "0 false positives / 6 runs" in lines


def test_oracle_check_reports_false_positives(cli):
    def liar(seed):
        return make_verdict(True), 'NO'

    with patch.dict('assemblyline_setcover.cli.check.SOLVERS', {'linsat': liar}):
        code, lines, envelope = cli('oracle-check', '--solver', 'linsat', '--runs', 4)
    assert code == 5
    assert "4 false positives / 4 runs" in lines
    assert envelope['status_code'] == 5


def test_params(cli):
    code, lines, envelope = cli('params', '--sigma', 0.2, '--n', 20)
    assert code == 0
    assert lines[0].startswith("zeta=0.2 beta=0.01 rate=2^-4")
    assert lines[1].startswith("linsat exponent ")
    assert float(lines[1].split()[2]) == pytest.approx(0.3399, abs=1e-3)
    assert envelope['report']['schedule']['repeats'] == 20
    assert sorted(envelope['report']['lambda_r']) == sorted(str(r) for r in range(2, 11))


def test_generate(cli, tmp_path):
    path = tmp_path / 'planted.txt'
    argv = ('generate', '--n', 6, '--m', 8, '--r', 2, '--size', 3, '--planted', '--seed', 4)
    code, _, envelope = cli(*argv, '--output', path)
    assert code == 0
    inst = parse_set_system(path.read_text())
    assert (inst.n, inst.m, inst.s) == (6, 8, 3)
    assert brute_force_set_partition(inst).answer == 'YES'
    assert envelope['report']['instance'] == path.read_text()

    again = cli(*argv)
    assert again[2]['report']['instance'] == path.read_text()


def test_few_sets(cli, tmp_path):
    path = tmp_path / 'triangle.txt'
    path.write_text(TRIANGLE)
    code, lines, _ = cli('few-sets', '--input', path, '--r', 2, '--mode', 'partition')
    assert code == 0
    assert lines[:2] == ['verdict: YES', 'certificate: 1 2 3']
    code, lines, _ = cli('few-sets', '--input', path, '--r', 2, '--mode', 'partition', '--size', 2)
    assert lines[0] == 'verdict: NO'


def test_solve_partition_explicit(cli, singletons_file):
    code, lines, envelope = cli('solve-partition', '--input', singletons_file, '--seed', 2)
    assert code == 0
    assert envelope['report']['verdict']['answer'] == 'YES'
    assert sorted(envelope['report']['verdict']['certificate']) == list(range(8))


def test_solve_partition_oracles(cli, tmp_path, singletons_file):
    code, _, envelope = cli('solve-partition', '--oracle', 'singleton', '--n', 8, '--size', 8, '--seed', 2)
    assert code == 0
    assert len(envelope['report']['verdict']['blocks']) == 8

    code, _, envelope = cli('solve-partition', '--oracle', 'family', '--input', singletons_file, '--size', 8,
                            '--seed', 2)
    assert code == 0
    assert envelope['report']['verdict']['certificate'] == list(range(8))

    graph = tmp_path / 'empty.col'
    graph.write_text(serialize_graph(SimpleGraph.from_edges(8, [])))
    code, _, envelope = cli('solve-partition', '--oracle', f'independent-set:{graph}', '--size', 8, '--seed', 2)
    assert code == 0
    assert envelope['report']['verdict']['answer'] == 'YES'

    triangle = tmp_path / 'triangle.txt'
    triangle.write_text(TRIANGLE)
    code, _, envelope = cli('solve-partition', '--oracle', 'family', '--input', triangle, '--size', 3)
    assert code == 4
    assert envelope['error_message'].startswith('HypothesisViolation')


def test_chromatic(cli, tmp_path):
    path = tmp_path / 'cycle.col'
    path.write_text(serialize_graph(SimpleGraph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)])))
    assert cli('chromatic', '--graph', path, '--colors', 2)[1][0] == 'verdict: NO'
    code, lines, _ = cli('chromatic', '--graph', path, '--colors', 3)
    assert code == 0
    assert lines[0] == 'verdict: YES'


def test_linsat_and_rate_estimate(cli, tmp_path):
    path = tmp_path / 'identity.lin'
    path.write_text(serialize_linsat(LinSatInstance(4, 4, (1, 2, 4, 8), 0b0110, (1, 1, 1, 1), 2)))
    code, lines, _ = cli('linsat', '--input', path, '--seed', 5)
    assert code == 0
    assert lines[:2] == ['verdict: YES', 'certificate: 0 1 1 0']

    code, lines, envelope = cli('rate-estimate', '--instance', path, '--runs', 5, '--solver', 'linsat', '--seed', 3)
    assert code == 0
    report = envelope['report']
    assert report['accepted'] == 5
    assert report['frequency'] == 1.0
    assert report['answers'] == ['YES'] * 5
    assert report['wilson_95'][1] == pytest.approx(1.0)


def test_rate_estimate_chromatic_needs_size(cli, tmp_path):
    path = tmp_path / 'edge.col'
    path.write_text(serialize_graph(SimpleGraph.from_edges(2, [(0, 1)])))
    assert cli('rate-estimate', '--instance', path, '--runs', 2, '--solver', 'chromatic')[0] == 1


def test_verify_round_trip(cli, tmp_path, singletons_file):
    report_path = tmp_path / 'report.json'
    code, _, _ = cli('solve-cover', '--input', singletons_file, '--size', 8, '--report', report_path)
    assert code == 0

    code, lines, envelope = cli('verify', '--input', singletons_file, '--from-report', report_path)
    assert code == 0
    assert "certificate verified" in lines
    assert envelope['report']['verified'] is True

    tampered = json.loads(report_path.read_text())
    tampered['report']['verdict']['certificate'] = [0]
    report_path.write_text(json.dumps(tampered))
    code, _, envelope = cli('verify', '--input', singletons_file, '--from-report', report_path)
    assert code == 5
    assert envelope['error_message'].startswith('SoundnessError')


def test_verify_oracle_blocks(cli, tmp_path):
    report_path = tmp_path / 'blocks.json'
    cli('solve-partition', '--oracle', 'singleton', '--n', 8, '--size', 8, '--seed', 2, '--report', report_path)
    code, lines, _ = cli('verify', '--from-report', report_path)
    assert code == 0
    assert "certificate verified" in lines

    graph = tmp_path / 'empty.col'
    graph.write_text(serialize_graph(SimpleGraph.from_edges(8, [])))
    cli('solve-partition', '--oracle', f'independent-set:{graph}', '--size', 8, '--seed', 2, '--report', report_path)
    assert json.loads(report_path.read_text())['report']['graph'] == str(graph)
    assert cli('verify', '--from-report', report_path)[0] == 0


def _blocks_report(path, blocks, n, target, oracle, **fields):
    report = {'command': 'solve-partition', 'problem': 'partition', 'n': n, 'target': target, 'oracle': oracle,
              'verdict': make_verdict(True, blocks=blocks).as_primitives()}
    report.update(fields)
    path.write_text(json.dumps(report))
    return path


def test_verify_blocks_checked_against_oracle(cli, tmp_path):
    edge = tmp_path / 'k2.col'
    edge.write_text(serialize_graph(SimpleGraph.from_edges(2, [(0, 1)])))

    # {0, 1} is a single block spanning the edge
    report = _blocks_report(tmp_path / 'edge.json', [[0, 1]], 2, 2, 'independent-set', graph=str(edge))
    code, _, envelope = cli('verify', '--from-report', report)
    assert code == 5
    assert envelope['error_message'].startswith('SoundnessError')

    report = _blocks_report(tmp_path / 'split.json', [[0], [1]], 2, 2, 'independent-set', graph=str(edge))
    assert cli('verify', '--from-report', report)[0] == 0
    assert cli('verify', '--input', edge, '--from-report', report)[0] == 0

    missing = _blocks_report(tmp_path / 'nograph.json', [[0], [1]], 2, 2, 'independent-set')
    assert cli('verify', '--from-report', missing)[0] == 1


def test_verify_blocks_count_must_match(cli, tmp_path):
    fewer = _blocks_report(tmp_path / 'fewer.json', [[0], [1], [2]], 3, 4, 'singleton')
    assert cli('verify', '--from-report', fewer)[0] == 5

    wide = _blocks_report(tmp_path / 'wide.json', [[0, 1], [2]], 3, 2, 'singleton')
    assert cli('verify', '--from-report', wide)[0] == 5

    exact = _blocks_report(tmp_path / 'exact.json', [[0], [1], [2]], 3, 3, 'singleton')
    assert cli('verify', '--from-report', exact)[0] == 0

    unknown = _blocks_report(tmp_path / 'unknown.json', [[0], [1], [2]], 3, 3, 'mystery')
    assert cli('verify', '--from-report', unknown)[0] == 1


def test_verify_no_answer(cli, tmp_path, singletons_file):
    report_path = tmp_path / 'no.json'
    cli('solve-cover', '--input', singletons_file, '--size', 4, '--report', report_path)
    code, lines, envelope = cli('verify', '--input', singletons_file, '--from-report', report_path)
    assert code == 0
    assert envelope['report']['verified'] is None


def test_wilson_interval():
    low, high = wilson_interval(5, 10)
    assert low == pytest.approx(0.2366, abs=1e-4)
    assert high == pytest.approx(0.7634, abs=1e-4)
    assert wilson_interval(0, 10)[0] == pytest.approx(0.0, abs=1e-12)
    assert wilson_interval(10, 10)[1] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        wilson_interval(0, 0)
