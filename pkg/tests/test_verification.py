import xml.etree.ElementTree as ET

import pytest

from src import verification
from src.config_manager import RunConfig
from src.errors import ParseError
from src.nonarch_local import reduction_type
from src.verification import (CheckOutcome, SuiteResult, _ball_check, _real_locus_check,
                              _retraction_fourier_check, _retraction_measure_check, identity_corpus,
                              reference_curves, run_suite, write_junit)


def test_reference_curves():
    names = [ref.name for ref in reference_curves()]
    assert len(names) == 3
    for ref in reference_curves():
        assert all(ref.curve.contains(P) for P in ref.pool)


def test_identity_corpus_is_seeded():
    corpus = identity_corpus(7)
    assert len(corpus) >= 50
    again = identity_corpus(7)
    assert [(ref.name, p, Z) for ref, p, Z in corpus] == [(ref.name, p, Z) for ref, p, Z in again]
    for ref, p, Z in corpus:
        assert 1 <= len(Z) <= len(ref.pool)
        assert len(set(Z)) == len(Z)


def test_identities_suite_passes():
    result = run_suite('identities', RunConfig(seed=11))
    assert result.passed
    assert result.failures == 0
    assert len(result.checks) >= 50


@pytest.mark.parametrize("tau", [1j, complex(0.5, 1)])
def test_real_locus_check(tau):
    passed, detail = _real_locus_check(tau, 10, RunConfig())
    assert passed, detail


@pytest.mark.slow
def test_inequality_suite_passes():
    result = run_suite('inequality', RunConfig())
    assert result.passed, [check.name for check in result.checks if not check.passed]


def test_unknown_suite():
    with pytest.raises(ParseError):
        run_suite('everything')


def test_write_junit_records_failures(tmp_path):
    result = SuiteResult(suite='demo', checks=[
        CheckOutcome(name='good', passed=True, seconds=0.5),
        CheckOutcome(name='bad', passed=False, detail='slack=-1', seconds=0.25),
    ])
    assert not result.passed
    path = write_junit(result, tmp_path / 'nested' / 'demo.xml')
    root = ET.parse(path).getroot()
    assert root.tag == 'testsuite'
    assert root.get('tests') == '2'
    assert root.get('failures') == '1'
    assert root.get('time') == '0.750'
    cases = root.findall('testcase')
    assert [case.get('name') for case in cases] == ['good', 'bad']
    assert cases[1].find('failure').get('message') == 'slack=-1'


def test_inequality_suite_covers_the_largest_sets(monkeypatch):
    for helper in ('_slack_check', '_torsion_check', '_real_locus_check'):
        monkeypatch.setattr(verification, helper, lambda *args: (True, ''))
    names = [check.name for check in run_suite('inequality', RunConfig()).checks]
    assert 'multiples N=25' in names
    assert 'torsion m=5' in names


@pytest.mark.parametrize("index", [0, 1, 2])
def test_retraction_measure_at_every_bad_prime(index):
    ref = reference_curves()[index]
    for bad in ref.curve.bad_primes:
        passed, detail = _retraction_measure_check(reduction_type(ref.curve, bad.p))
        assert passed, detail


def test_ball_and_fourier_checks_on_the_corpus():
    for ref, p, Z in identity_corpus(5)[:20]:
        place = reduction_type(ref.curve, p)
        assert _ball_check(ref.curve, place, Z)
        assert _retraction_fourier_check(ref.curve, place, Z)
