import numpy as np
import pytest

from railsim.errors import ConfigError, IntegrationError
from railsim.measurements.dyne import draw_noise, integrate_batch, simulate_dyne
from railsim.measurements.feedback import Adaptive, Homodyne
from railsim.measurements.pulse import make_pulse
from railsim.states.fock_state import PureState, fidelity
from railsim.states.named_states import named_state
from railsim.tools.utils import trial_rng


def test_vacuum_current_is_pure_noise():
    pulse = make_pulse('raisedcosine', 1e-2)
    record, posterior = simulate_dyne(named_state('vacuum'), 0, pulse, Homodyne(), trial_rng(4, 0))
    noise = draw_noise(trial_rng(4, 0), pulse)
    expected = np.sqrt(pulse.dU) * noise / np.sqrt(pulse.dt)
    np.testing.assert_allclose(record.currents, expected, atol=1e-14)
    assert record.x == pytest.approx(np.sum(expected))
    assert posterior.n_modes == 0
    assert record.theta is None


@pytest.mark.parametrize('integrator', ['euler', 'emission'])
def test_trajectories_are_reproducible(integrator):
    s = named_state('plus-split')
    pulse = make_pulse('flat', 1e-2)
    first, post1 = simulate_dyne(s, 0, pulse, Adaptive(), trial_rng(9, 3), integrator=integrator)
    second, post2 = simulate_dyne(s, 0, pulse, Adaptive(), trial_rng(9, 3), integrator=integrator)
    assert first.theta == second.theta
    assert first.currents == second.currents
    assert post1.as_dict() == post2.as_dict()


def test_full_record_series():
    pulse = make_pulse('flat', 1e-2)
    record, _ = simulate_dyne(named_state('plus'), 0, pulse, Adaptive(), trial_rng(0, 0))
    rows = list(record.series_rows())
    assert len(rows) == pulse.n_steps
    assert sum(r[2] for r in rows) == pytest.approx(record.x)
    assert rows[0][1] == 0.0
    rec = record.to_json_dict(full_record=True, seed_path=[0, 0])
    assert len(rec['phases']) == pulse.n_steps
    assert rec['seed_path'] == [0, 0]
    assert 'phases' not in record.to_json_dict()


def test_posterior_is_normalized_and_photon_removed():
    s = named_state('plus-split')
    pulse = make_pulse('expdecay:4', 2e-3)
    _, posterior = simulate_dyne(s, 0, pulse, Homodyne(0.4), trial_rng(1, 1), integrator='emission')
    assert posterior.n_modes == 1
    assert posterior.is_normalized(1e-10)


def test_single_photon_leaves_vacuum_and_keeps_partner_coherent():
    s = named_state('plus-split')
    pulse = make_pulse('flat', 2e-3)
    record, posterior = simulate_dyne(s, 0, pulse, Adaptive(), trial_rng(2, 0), integrator='emission')
    # the partner mode ends in (|0> + e^{i theta}|1>)/sqrt(2)
    expected = PureState(1, {(0,): 1.0, (1,): np.exp(1j * record.theta)}).normalize()
    assert fidelity(posterior, expected) > 0.95


def test_noise_shape_must_match_pulse():
    pulse = make_pulse('flat', 1e-2)
    C, _ = named_state('plus').to_dense(0)
    with pytest.raises(ConfigError):
        integrate_batch(C, pulse, Homodyne(), np.zeros((2, 10)))
    with pytest.raises(ConfigError):
        integrate_batch(C, pulse, Homodyne(), np.zeros((2, pulse.n_steps)), integrator='milstein')
    with pytest.raises(ConfigError):
        simulate_dyne(named_state('plus'), 0, pulse, Homodyne(), trial_rng(0, 0), dt=1e-3)


def test_non_finite_state_reports_step():
    pulse = make_pulse('flat', 1e-2)
    C, _ = named_state('plus').to_dense(0)
    noise = np.zeros((1, pulse.n_steps))
    noise[0, 7] = np.nan
    with pytest.raises(IntegrationError) as info:
        integrate_batch(C / np.sqrt(np.sum(np.abs(C) ** 2)), pulse, Homodyne(), noise)
    assert info.value.step == 7


def test_policy_instance_is_not_mutated():
    policy = Adaptive()
    pulse = make_pulse('flat', 1e-2)
    simulate_dyne(named_state('plus'), 0, pulse, policy, trial_rng(0, 0))
    assert policy.running is None
