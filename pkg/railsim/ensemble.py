"""
Ensembles of dyne trajectories with a thread-count independent result.

Trial i always draws its Wiener increments from RandomState([i, master_seed]) and
trials are grouped into batches of a fixed size, so every per-trial number is
the same for any number of worker threads.
"""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import sys

import numpy as np
from scipy import stats
from tqdm import tqdm

from railsim.errors import ConfigError, FockError
from railsim.measurements.dyne import draw_noise, integrate_batch, posterior_state
from railsim.measurements.feedback import Adaptive, Homodyne
from railsim.measurements.povm import HomodyneSampler, apm_density, quadrature_expectation
from railsim.tools.parallel import run_indexed
from railsim.tools.utils import create_logger, ks_test, trial_rng

_logger = create_logger('railsim.ensemble')

DEFAULT_BATCH_SIZE = 256


class EnsembleResult(object):
    def __init__(self, state, mode, pulse, policy, master_seed, batches, rest_keys):
        self.state = state
        self.mode = mode
        self.pulse = pulse
        self.policy = policy
        self.master_seed = master_seed
        self._batches = batches
        self.rest_keys = rest_keys
        self.n_trials = sum(b.batch_size for b in batches)
        self.x = np.concatenate([b.x for b in batches])
        self.theta = None if batches[0].theta is None else np.concatenate([b.theta for b in batches])
        self.phi_end = None if batches[0].phi_end is None else np.concatenate([b.phi_end for b in batches])
        self.posteriors = np.concatenate([b.posterior for b in batches])
        # ordered reduction over batches
        current_sum = np.zeros(pulse.n_steps)
        current_sq_sum = np.zeros(pulse.n_steps)
        for b in batches:
            current_sum += b.current_sum
            current_sq_sum += b.current_sq_sum
        self.current_mean = current_sum / self.n_trials
        var = current_sq_sum / self.n_trials - self.current_mean ** 2
        self.current_sem = np.sqrt(np.maximum(var, 0.0) / self.n_trials)

    def records(self):
        """TrajectoryRecord of every trial, in trial order"""
        desc = self.policy.to_json_dict()
        for b in self._batches:
            for i in range(b.batch_size):
                yield b.record(i, self.pulse, desc)

    def posterior(self, i):
        return posterior_state(self.posteriors[i], self.rest_keys, self.state.n_modes - 1, self.state.config)


def run_ensemble(s, mode, pulse, policy, master_seed, n_trials, batch_size=DEFAULT_BATCH_SIZE,
                 integrator='euler', num_threads=1, full_record=False, progress=False, consume=None):
    """
    :param s: PureState, the measured mode is `mode`
    :param pulse: PulseShape
    :param policy: FeedbackPolicy
    :param master_seed: seed of the whole run
    :param n_trials: number of trajectories
    :param batch_size: trajectories integrated together; part of the result's identity,
                       unlike num_threads
    :param full_record: integrate the per-step series as well. They are only handed to
                        `consume` and never kept in the result.
    :param consume: optional callable (first_trial, BatchResult), called in trial order
                    while the ensemble runs
    :return: EnsembleResult
    """
    if n_trials < 1:
        raise ConfigError('n_trials={} must be at least 1'.format(n_trials))
    if batch_size < 1:
        raise ConfigError('batch_size={} must be at least 1'.format(batch_size))
    mode = s.check_mode(mode)
    nrm2 = s.norm_squared()
    if nrm2 == 0.0:
        raise FockError('cannot measure the zero vector')
    C, rest = s.to_dense(mode)
    C = C / np.sqrt(nrm2)
    n_batches = (n_trials + batch_size - 1) // batch_size

    def work(b):
        start = b * batch_size
        stop = min(start + batch_size, n_trials)
        noise = np.stack([draw_noise(trial_rng(master_seed, i), pulse) for i in range(start, stop)])
        return integrate_batch(C, pulse, policy, noise, integrator, full_record)

    _logger.info('running {} trajectories ({} batches, {} steps each, policy {})'
                 .format(n_trials, n_batches, pulse.n_steps, policy.name))
    # at most `window` batches are alive at once, series included
    window = 2 * max(1, int(num_threads))
    batches = []
    bar = tqdm(total=n_batches, desc='trajectories', disable=not progress, file=sys.stderr, leave=False)
    for first in range(0, n_batches, window):
        chunk = run_indexed(lambda j: work(first + j), min(window, n_batches - first), num_threads)
        for j, batch in enumerate(chunk):
            if consume is not None:
                consume((first + j) * batch_size, batch)
            batch.series = None
            batches.append(batch)
        bar.update(len(chunk))
    bar.close()
    return EnsembleResult(s, mode, pulse, policy, master_seed, batches, rest)


def integrated_quadrature_check(s, mode, pulse, phi, master_seed, n_trials, **kwargs):
    """
    Homodyne trajectories at fixed phase phi; compares the integrated currents X
    with the analytic quadrature marginal.
    :return: dict with ks, p_value, mean, var and the samples
    """
    res = run_ensemble(s, mode, pulse, Homodyne(phi0=phi), master_seed, n_trials, **kwargs)
    sampler = HomodyneSampler(s, mode, phi)
    ks, p_value = ks_test(res.x, sampler.cdf)
    return {'ks': ks, 'p_value': p_value, 'mean': float(np.mean(res.x)), 'var': float(np.var(res.x)),
            'samples': res.x}


def pulse_invariance_check(s, mode, pulses, phi, master_seed, n_trials, **kwargs):
    """Two-sample KS test between the X samples of two pulse shapes"""
    first, second = pulses
    x1 = run_ensemble(s, mode, first, Homodyne(phi0=phi), master_seed, n_trials, **kwargs).x
    x2 = run_ensemble(s, mode, second, Homodyne(phi0=phi), master_seed + 1, n_trials, **kwargs).x
    res = stats.ks_2samp(x1, x2)
    return float(res.statistic), float(res.pvalue)


def mean_current_profile(s, mode, pulse, policy, master_seed, n_trials, **kwargs):
    """
    :return: (t_k, ensemble mean of I_k, standard error of the mean, expected mean).
             The expected mean 2 c u_k holds for a fixed phase phi0 with
             c = <a e^{-i phi0}> real.
    """
    res = run_ensemble(s, mode, pulse, policy, master_seed, n_trials, **kwargs)
    phi0 = getattr(policy, 'phi0', 0.0)
    expected = quadrature_expectation(s, mode, phi0) * pulse.u
    return pulse.t, res.current_mean, res.current_sem, expected


def analytic_posterior_fidelities(s, mode, theta, posteriors):
    """
    |<analytic|trajectory>|^2 per trial, the analytic posterior being
    <theta|_mode s normalized, over the same rest-of-system basis as `posteriors`.
    """
    C, _ = s.to_dense(mode)
    C = C / s.norm()
    analytic = C[0][None, :] + np.exp(-1j * np.asarray(theta))[:, None] * C[1][None, :]
    analytic /= np.linalg.norm(analytic, axis=1)[:, None]
    return np.abs(np.sum(np.conj(analytic) * posteriors, axis=1)) ** 2


def adaptive_oracle_check(s, mode, pulse, master_seed, n_trials, loop_delay=0.0, **kwargs):
    """
    Adaptive trajectories checked against the analytic phase measurement:
    KS distance of the theta samples from the analytic density and fidelity of
    every trajectory posterior with the analytic posterior at the same theta.
    """
    res = run_ensemble(s, mode, pulse, Adaptive(loop_delay=loop_delay), master_seed, n_trials, **kwargs)
    density = apm_density(s, mode)
    ks, p_value = ks_test(res.theta, density.cdf)
    fidelities = analytic_posterior_fidelities(s, mode, res.theta, res.posteriors)
    return {'ks_theta': ks, 'p_value': p_value,
            'mean_fidelity': float(np.mean(fidelities)), 'min_fidelity': float(np.min(fidelities)),
            'theta': res.theta, 'fidelities': fidelities}
