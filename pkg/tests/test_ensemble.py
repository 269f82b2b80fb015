import numpy as np
import pytest
from scipy import stats

from railsim.ensemble import (adaptive_oracle_check, integrated_quadrature_check, mean_current_profile,
                              pulse_invariance_check, run_ensemble)
from railsim.errors import ConfigError
from railsim.measurements.dyne import simulate_dyne
from railsim.measurements.feedback import Adaptive, Homodyne
from railsim.measurements.pulse import make_pulse
from railsim.states.fock_state import PureState
from railsim.states.named_states import named_state
from railsim.tools.utils import trial_rng


def _partially_coherent_state():
    # r = 1/3 on mode 0, entangled with mode 1
    return PureState(2, {(0, 0): 1.0, (1, 0): 1.0, (0, 1): 1.0}).normalize()


def test_results_do_not_depend_on_thread_count():
    s = named_state('plus-split')
    pulse = make_pulse('flat', 1e-2)
    one = run_ensemble(s, 0, pulse, Adaptive(), 17, 300, batch_size=64, num_threads=1)
    many = run_ensemble(s, 0, pulse, Adaptive(), 17, 300, batch_size=64, num_threads=3)
    np.testing.assert_array_equal(one.theta, many.theta)
    np.testing.assert_array_equal(one.x, many.x)
    np.testing.assert_array_equal(one.posteriors, many.posteriors)
    np.testing.assert_array_equal(one.current_mean, many.current_mean)


def test_ensemble_trial_matches_single_trajectory():
    s = _partially_coherent_state()
    pulse = make_pulse('flat', 1e-2)
    res = run_ensemble(s, 0, pulse, Adaptive(), 5, 40, batch_size=16)
    for i in (0, 17, 39):
        record, posterior = simulate_dyne(s, 0, pulse, Adaptive(), trial_rng(5, i))
        assert res.theta[i] == pytest.approx(record.theta, abs=1e-9)
        assert res.x[i] == pytest.approx(record.x, abs=1e-9)
        np.testing.assert_allclose([res.posterior(i).amplitude(k) for k in posterior.keys()],
                                   [posterior.amplitude(k) for k in posterior.keys()], atol=1e-9)


def test_records_are_in_trial_order():
    pulse = make_pulse('flat', 1e-2)
    res = run_ensemble(named_state('plus'), 0, pulse, Homodyne(), 2, 70, batch_size=32)
    records = list(res.records())
    assert len(records) == 70
    np.testing.assert_allclose([r.x for r in records], res.x)
    assert records[0].policy['name'] == 'homodyne'


def test_full_record_series_are_streamed_in_trial_order():
    pulse = make_pulse('flat', 1e-2)
    seen = []
    x_from_series = []

    def consume(first_trial, batch):
        assert batch.series['currents'].shape == (batch.batch_size, pulse.n_steps)
        seen.append((first_trial, batch.batch_size))
        x_from_series.extend(np.sum(batch.series['currents'], axis=1))

    res = run_ensemble(named_state('plus'), 0, pulse, Homodyne(), 2, 70, batch_size=16, num_threads=3,
                       full_record=True, consume=consume)
    assert seen == [(0, 16), (16, 16), (32, 16), (48, 16), (64, 6)]
    np.testing.assert_allclose(x_from_series, res.x)
    assert not any(r.has_series for r in res.records())


def test_invalid_ensemble_arguments():
    pulse = make_pulse('flat', 1e-2)
    with pytest.raises(ConfigError):
        run_ensemble(named_state('plus'), 0, pulse, Adaptive(), 0, 0)
    with pytest.raises(ConfigError):
        run_ensemble(named_state('plus'), 0, pulse, Adaptive(), 0, 10, batch_size=0)


def test_integrated_current_matches_homodyne_marginal():
    res = integrated_quadrature_check(named_state('babichev'), 0, make_pulse('flat', 2e-3), 0.0, 21, 2000)
    assert res['ks'] < 0.06
    assert res['var'] == pytest.approx(2.0, abs=0.25)


def test_integrated_current_with_emission_integrator():
    res = integrated_quadrature_check(named_state('plus'), 0, make_pulse('raisedcosine', 2e-3), 0.0, 22, 2000,
                                      integrator='emission')
    assert res['ks'] < 0.06
    assert res['mean'] == pytest.approx(1.0, abs=0.1)


def test_integrated_quadrature_does_not_depend_on_pulse_shape():
    pulses = (make_pulse('flat', 2e-3), make_pulse('expdecay:4', 2e-3))
    ks, _ = pulse_invariance_check(named_state('babichev'), 0, pulses, 0.0, 31, 2000)
    assert ks < 0.08


def test_mean_current_follows_envelope():
    pulse = make_pulse('raisedcosine', 1e-2)
    t, mean, sem, expected = mean_current_profile(named_state('plus'), 0, pulse, Homodyne(0.0), 8, 2000)
    assert len(t) == len(mean) == len(expected) == pulse.n_steps
    np.testing.assert_allclose(expected, pulse.u)
    within = np.abs(mean - expected) <= 4.0 * sem
    assert np.mean(within) >= 0.95
    assert np.sum(mean * pulse.dt) == pytest.approx(1.0, abs=0.1)


def test_adaptive_trajectories_match_analytic_phase_measurement():
    res = adaptive_oracle_check(_partially_coherent_state(), 0, make_pulse('flat', 2e-3), 41, 1000)
    assert res['ks_theta'] < 0.07
    assert res['mean_fidelity'] >= 0.96


def test_loop_delay_degrades_the_estimate():
    s = _partially_coherent_state()
    pulse = make_pulse('flat', 2e-3)
    prompt = adaptive_oracle_check(s, 0, pulse, 43, 500)
    with pytest.warns(UserWarning):
        late = adaptive_oracle_check(s, 0, pulse, 43, 500, loop_delay=0.3)
    assert late['mean_fidelity'] < prompt['mean_fidelity']


@pytest.mark.slow
def test_adaptive_oracle_at_full_resolution():
    res = adaptive_oracle_check(named_state('plus-split'), 0, make_pulse('flat', 1e-4), 7, 10000, num_threads=4)
    assert res['ks_theta'] < 0.02
    assert res['mean_fidelity'] >= 0.99


def _theta_across_pulses(s, dt, n, master_seed, **kwargs):
    return {shape: adaptive_oracle_check(s, 0, make_pulse(shape, dt), master_seed, n, **kwargs)
            for shape in ('flat', 'expdecay:4', 'raisedcosine')}


def test_phase_outcome_does_not_depend_on_pulse_shape():
    results = _theta_across_pulses(_partially_coherent_state(), 2e-3, 1000, 51)
    for shape, res in results.items():
        assert res['ks_theta'] < 0.08, shape
    shapes = sorted(results)
    for i, first in enumerate(shapes):
        for second in shapes[i + 1:]:
            assert stats.ks_2samp(results[first]['theta'], results[second]['theta']).pvalue > 1e-3


@pytest.mark.slow
def test_phase_outcome_does_not_depend_on_pulse_shape_at_full_resolution():
    results = _theta_across_pulses(named_state('plus-split'), 1e-4, 10000, 52, num_threads=4)
    for shape, res in results.items():
        assert res['ks_theta'] < 0.02, shape
        assert res['mean_fidelity'] >= 0.99, shape


@pytest.mark.slow
def test_phase_outcome_converges_as_the_step_shrinks():
    n = 20000
    tol = 1.36 / np.sqrt(n)
    ks = [adaptive_oracle_check(named_state('plus-split'), 0, make_pulse('flat', dt), 53, n, num_threads=4)['ks_theta']
          for dt in (1e-2, 1e-3, 1e-4)]
    assert ks[1] <= ks[0] + tol
    assert ks[2] <= ks[1] + tol
    assert ks[2] < 0.015
