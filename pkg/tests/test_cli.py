import json
import xml.etree.ElementTree as ET

import pytest

import main as main_module
from main import load_points, main, parse_arguments, parse_height_value
from src.curve import make_curve
from src.errors import ParseError
from src.reports import SweepRow

C37 = '0,0,1,-1,0'
C11 = '0,-1,1,0,0'


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    monkeypatch.delenv('HDISC_SAVE_DIR', raising=False)
    monkeypatch.delenv('HDISC_OUTPUT_FORMAT', raising=False)
    monkeypatch.delenv('HDISC_SEED', raising=False)


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_common_flags_follow_the_subcommand():
    args = parse_arguments(['height', C37, '0,0', '--seed', '4', '--format', 'csv'])
    assert args.command == 'height'
    assert args.seed == 4
    assert args.output_format == 'csv'


def test_bounds_totally_real(capsys):
    assert main(['bounds', '--regime', 'tr', '--h-j', '0']) == 0
    report = _json(capsys)
    assert report['torsion_bound'] == 300
    assert report['exact']['liminf_bound'] == '1/240'


def test_bounds_padic_rejects_two(capsys):
    assert main(['bounds', '--regime', 'padic', '--h-j', '0', '--p', '2']) == 2
    assert capsys.readouterr().err.startswith('❌')


def test_bad_height_value():
    with pytest.raises(ParseError):
        parse_height_value('two')
    assert main(['bounds', '--regime', 'cyc', '--h-j', 'two']) == 2


def test_height_of_generator(capsys):
    assert main(['height', C37, '0,0']) == 0
    report = _json(capsys)
    assert report['hhat'] == pytest.approx(0.0255557041, abs=1e-8)
    assert report['torsion_order'] is None
    assert report['oracle']['agrees']
    assert {entry['place'] for entry in report['places']} == {'inf', '37'}


def test_height_of_identity(capsys):
    assert main(['height', C37, 'O']) == 0
    assert _json(capsys)['hhat'] == 0.0


def test_height_errors(capsys):
    assert main(['height', C37, '0;0']) == 2
    assert main(['height', C37, '1,1']) == 3
    assert main(['height', '0,0,0,0,0', '0,0']) == 3
    assert main(['height', '1,2,3', '0,0']) == 2


def test_local_height(capsys):
    assert main(['local-height', C37, '1/4,-5/8', '--place', '2']) == 0
    report = _json(capsys)
    assert report['places'][0]['exact']['prime'] == 2
    assert main(['local-height', C37, 'O']) == 2
    assert main(['local-height', C37, '0,0', '--place', 'x']) == 2


def test_discrepancy_of_points_file(tmp_path, capsys):
    points = tmp_path / 'points.txt'
    points.write_text("# torsion\nO\n0,0\n\n1,0\n1,-1  # last two\n0,-1\n")
    assert main(['discrepancy', C11, str(points)]) == 0
    report = _json(capsys)
    assert report['N'] == 5
    assert report['slack'] >= 0
    assert [place['place'] for place in report['places']] == ['inf', '11']


def test_discrepancy_csv_and_archive(tmp_path, capsys):
    points = tmp_path / 'points.txt'
    points.write_text("0,0\n1,0\n")
    save_dir = tmp_path / 'reports'
    assert main(['discrepancy', C37, str(points), '--format', 'csv',
                 '--save-dir', str(save_dir)]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == 'place,D,Lambda,error_bound'
    assert len(list(save_dir.glob('report_discrepancy_*.json'))) == 1


def test_discrepancy_errors(tmp_path):
    duplicates = tmp_path / 'dup.txt'
    duplicates.write_text("0,0\n0,0\n")
    assert main(['discrepancy', C37, str(duplicates)]) == 3
    assert main(['discrepancy', C37, str(tmp_path / 'absent.txt')]) == 2


def test_load_points_skips_comments(tmp_path):
    path = tmp_path / 'points.txt'
    path.write_text("# header\n\n0,0  # generator\nO\n")
    assert len(load_points(path, make_curve(0, 0, 1, -1, 0))) == 2


def test_torsion_sweep_without_levels(capsys):
    assert main(['torsion-sweep', C37, '--format', 'csv']) == 0
    assert capsys.readouterr().out == "m,N,D_arch,D_lower,rhs,slack\n\n"


def test_torsion_sweep(capsys):
    assert main(['torsion-sweep', C37, '2', '3']) == 0
    report = _json(capsys)
    assert [row['m'] for row in report['rows']] == [2, 3]
    assert [row['N'] for row in report['rows']] == [4, 9]
    assert report['statistics']['min_slack'] >= 0
    assert report['statistics']['decreasing'] == 1.0


def test_torsion_sweep_fails_when_discrepancy_grows(monkeypatch, capsys):
    def growing_row(m, report):
        return SweepRow(m=m, N=m * m, D_arch=float(m), D_lower=0.0, rhs=1.0, slack=1.0)

    monkeypatch.setattr(main_module, 'row_from_report', growing_row)
    assert main(['torsion-sweep', C37, '2', '3']) == 1
    assert 'does not decrease' in capsys.readouterr().err


def test_torsion_sweep_rejects_level_one():
    assert main(['torsion-sweep', C37, '1']) == 2


def test_unknown_suite_is_a_usage_error():
    with pytest.raises(SystemExit) as excinfo:
        main(['verify', 'everything'])
    assert excinfo.value.code == 2


def test_verify_identities_writes_junit(tmp_path, capsys):
    junit = tmp_path / 'out' / 'identities.xml'
    assert main(['verify', 'identities', '--junit', str(junit)]) == 0
    root = ET.parse(junit).getroot()
    assert root.get('failures') == '0'
    assert int(root.get('tests')) >= 50
    assert _json(capsys)['suite'] == 'identities'


@pytest.mark.slow
def test_verify_appendix(capsys):
    assert main(['verify', 'appendix']) == 0


def test_reports_lists_the_archive(tmp_path, capsys):
    save_dir = tmp_path / 'reports'
    assert main(['height', C37, 'O', '--save-dir', str(save_dir)]) == 0
    capsys.readouterr()
    assert main(['reports', '--save-dir', str(save_dir)]) == 0
    listing = _json(capsys)
    assert [entry['kind'] for entry in listing['reports']] == ['height']
    assert listing['reports'][0]['curve'] == make_curve(0, 0, 1, -1, 0).label
    assert main(['reports', '--save-dir', str(save_dir), '--kind', 'discrepancy']) == 0
    assert _json(capsys)['reports'] == []
