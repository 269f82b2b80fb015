import numpy as np
import pytest

from railsim.errors import ConfigError
from railsim.optics.linear_optics import named_unitary
from railsim.protocols.backends import AnalyticBackend
from railsim.protocols.trials import (PROTOCOLS, logical_input, make_trial_runner, random_qubit, run_trials,
                                      summarize_trials)
from railsim.tools.utils import dumps, trial_rng


@pytest.mark.parametrize('protocol', PROTOCOLS)
def test_every_protocol_runs(protocol):
    kwargs = {'alpha': 0.6, 'phi': 0.2} if protocol == 'prep' else {}
    if protocol == 'gate':
        kwargs = {'unitary': named_unitary('hadamard'), 'unitary_name': 'hadamard'}
    runner = make_trial_runner(protocol, AnalyticBackend(), **kwargs)
    records = run_trials(runner, 3, 20)
    assert [r['trial'] for r in records] == list(range(20))
    for r in records:
        assert r['protocol'] == protocol
        assert r['seed'] == 3
        if r['fidelity'] is not None:
            assert r['fidelity'] == pytest.approx(1.0, abs=1e-9)
        dumps(r)


def test_records_do_not_depend_on_thread_count():
    runner = make_trial_runner('teleport', AnalyticBackend(), input_name='random')
    one = [dumps(r) for r in run_trials(runner, 5, 64, num_threads=1)]
    many = [dumps(r) for r in run_trials(runner, 5, 64, num_threads=4)]
    assert one == many


def test_summary_of_teleport_trials():
    runner = make_trial_runner('teleport', AnalyticBackend(), input_name='plus')
    summary = summarize_trials(run_trials(runner, 0, 2000))
    assert summary['n'] == 2000
    assert summary['success_rate'] == pytest.approx(0.5, abs=0.04)
    assert summary['min_fidelity'] == pytest.approx(1.0, abs=1e-9)
    assert set(summary['outcome_counts']) <= {'BellPlus', 'BellMinus', 'FailZero', 'FailTwo'}
    assert sum(summary['outcome_counts'].values()) == 2000


def test_apm_outcomes_are_recorded():
    runner = make_trial_runner('dual_to_single', AnalyticBackend(), input_name='1')
    record = runner(0, 0)
    assert len(record['theta_values']) == 1
    assert 0.0 <= record['theta_values'][0] < 2 * np.pi


def test_logical_inputs():
    np.testing.assert_allclose(logical_input('minus', None), [1 / np.sqrt(2), -1 / np.sqrt(2)])
    c = random_qubit(trial_rng(0, 0))
    assert np.linalg.norm(c) == pytest.approx(1.0)
    with pytest.raises(ConfigError):
        logical_input('2', None)


def test_runner_validation():
    with pytest.raises(ConfigError):
        make_trial_runner('gate', AnalyticBackend())
    with pytest.raises(ConfigError):
        make_trial_runner('swap', AnalyticBackend())
    with pytest.raises(ConfigError):
        make_trial_runner('teleport', AnalyticBackend(), input_name='both')
    with pytest.raises(ConfigError):
        run_trials(make_trial_runner('plus', AnalyticBackend()), 0, 0)
