"""
Stochastic dyne detection of one mode with a real-time feedback loop.

The measured mode is emptied by the pulse envelope over the time grid of a
PulseShape. Per step k, with emission probability p_k = gamma_k dt and the
local oscillator phase phi_k supplied by the feedback policy:

    xbar_k   = <a e^{-i phi_k} + a^dag e^{i phi_k}>      conditional mean
    J_k dt   = sqrt(gamma_k) xbar_k dt + dW_k            raw current, dW_k ~ N(0, dt)
    I_k dt   = sqrt(u_k) J_k dt                          current in quadrature units
    C        <- (1 - p_k a^dag a / 2 + sqrt(p_k) x_k e^{-i phi_k} a) C,  x_k = J_k sqrt(dt)

followed by renormalization. X = sum_k I_k dt is the integrated quadrature and the
adaptive policy turns the same current into the phase estimate theta.

Trajectories are integrated in batches: the state is a dense array
C[batch, n, rest] (occupation n of the measured mode times basis vectors of the
other modes), which keeps the step loop in numpy.
"""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import copy

import numpy as np
from scipy.special import comb, eval_hermitenorm, factorial

from railsim.errors import ConfigError, FockError, IntegrationError
from railsim.states.fock_state import from_amplitudes
from railsim.tools.utils import create_logger

_logger = create_logger('railsim.dyne')

INTEGRATORS = ('euler', 'emission')


class TrajectoryRecord(object):
    def __init__(self, theta, x, phi_end=None, times=None, phases=None, currents=None, raw_currents=None, noise=None,
                 policy=None):
        """
        :param theta: phase estimate in [0, 2pi), None for non-adaptive policies
        :param x: integrated current sum_k I_k dt
        :param phi_end: final value of the adaptive running phase
        :param times: t_k of every retained step
        :param phases: applied local oscillator phase phi_k
        :param currents: I_k dt
        :param raw_currents: J_k dt
        :param noise: dW_k
        :param policy: policy description dict
        """
        self.theta = None if theta is None else float(theta)
        self.x = float(x)
        self.phi_end = None if phi_end is None else float(phi_end)
        self.times = times
        self.phases = phases
        self.currents = currents
        self.raw_currents = raw_currents
        self.noise = noise
        self.policy = policy

    @property
    def has_series(self):
        return self.currents is not None

    def to_json_dict(self, full_record=False, seed_path=None):
        rec = {'theta': self.theta, 'x': self.x}
        if self.phi_end is not None:
            rec['phi_end'] = self.phi_end
        if seed_path is not None:
            rec['seed_path'] = list(seed_path)
        if full_record and self.has_series:
            rec['phases'] = self.phases
            rec['currents'] = self.currents
        return rec

    def series_rows(self):
        """Rows (t, phi, I dt, J dt, dW) for CSV plot data"""
        if not self.has_series:
            raise ValueError('record was produced without the full time series')
        return zip(self.times, self.phases, self.currents, self.raw_currents, self.noise)


class BatchResult(object):
    """Outcome of integrate_batch for B trajectories"""

    def __init__(self, theta, x, phi_end, posterior, current_sum, current_sq_sum, series=None):
        self.theta = theta
        self.x = x
        self.phi_end = phi_end
        self.posterior = posterior
        self.current_sum = current_sum
        self.current_sq_sum = current_sq_sum
        self.series = series

    @property
    def batch_size(self):
        return len(self.x)

    def record(self, i, pulse, policy_desc=None):
        theta = None if self.theta is None else self.theta[i]
        phi_end = None if self.phi_end is None else self.phi_end[i]
        if self.series is None:
            return TrajectoryRecord(theta, self.x[i], phi_end, policy=policy_desc)
        return TrajectoryRecord(theta, self.x[i], phi_end,
                                times=pulse.t.tolist(),
                                phases=self.series['phases'][i].tolist(),
                                currents=self.series['currents'][i].tolist(),
                                raw_currents=self.series['raw_currents'][i].tolist(),
                                noise=self.series['noise'][i].tolist(),
                                policy=policy_desc)


def _euler_step(C, p, x, phi, sqrt_n, n_col):
    out = C * (1.0 - 0.5 * p * n_col)
    jump = (np.sqrt(p) * x * np.exp(-1j * phi))[:, None, None]
    out[:, :-1, :] += jump * sqrt_n[None, 1:, None] * C[:, 1:, :]
    return out


def _emission_step(C, p, x, phi, D):
    """
    Exact action of one time bin: each photon leaves into the bin with probability p
    and the bin is read out in quadrature x. Photon number j in the bin contributes
    He_j(x)/sqrt(j!) e^{-i j phi} sqrt(C(m, j)) (1-p)^{(m-j)/2} p^{j/2}.
    """
    out = np.zeros_like(C)
    for j in range(D):
        bin_amp = (eval_hermitenorm(j, x) / np.sqrt(factorial(j)) * np.exp(-1j * j * phi) * p ** (j / 2.0))
        for n in range(D - j):
            m = n + j
            coef = np.sqrt(comb(m, j)) * (1.0 - p) ** (n / 2.0)
            out[:, n, :] += (bin_amp * coef)[:, None] * C[:, m, :]
    return out


def integrate_batch(C0, pulse, policy, noise, integrator='euler', full_record=False):
    """
    Integrates a batch of trajectories that share the initial state.
    :param C0: (D, R) complex array, normalized, from PureState.to_dense(mode)
    :param pulse: PulseShape
    :param policy: FeedbackPolicy, copied so the caller's instance is not touched
    :param noise: (B, K) array of Wiener increments dW_k ~ N(0, dt)
    :param integrator: 'euler' or 'emission'
    :param full_record: keep the per-step series of every trajectory
    :return: BatchResult. posterior is a (B, R) array, normalized, with the measured
             mode projected onto vacuum at the end of the pulse.
    """
    if integrator not in INTEGRATORS:
        raise ConfigError('integrator {} is not supported'.format(integrator))
    noise = np.atleast_2d(np.asarray(noise, dtype=np.float64))
    B, K = noise.shape
    if K != pulse.n_steps:
        raise ConfigError('noise has {} steps, the pulse grid {}'.format(K, pulse.n_steps))
    D, R = C0.shape
    dt = pulse.dt
    sqrt_dt = np.sqrt(dt)
    sqrt_n = np.sqrt(np.arange(D, dtype=np.float64))
    n_col = np.arange(D, dtype=np.float64)[None, :, None]

    C = np.repeat(np.asarray(C0, dtype=np.complex128)[None], B, axis=0)
    loop = copy.copy(policy)
    loop.on_trajectory_begin(pulse, B)

    X = np.zeros(B)
    current_sum = np.zeros(K)
    current_sq_sum = np.zeros(K)
    series = None
    if full_record:
        series = {key: np.zeros((B, K)) for key in ('phases', 'currents', 'raw_currents', 'noise')}

    for k in range(K):
        phi = loop.phase(k)
        p = pulse.p[k]
        # conditional mean of the measured quadrature
        overlap = np.sum(np.conj(C[:, :-1, :]) * C[:, 1:, :] * sqrt_n[None, 1:, None], axis=(1, 2))
        xbar = 2.0 * np.real(np.exp(-1j * phi) * overlap)
        x = np.sqrt(p) * xbar + noise[:, k] / sqrt_dt

        if integrator == 'euler':
            C = _euler_step(C, p, x, phi, sqrt_n, n_col)
        else:
            C = _emission_step(C, p, x, phi, D)
        norms = np.sqrt(np.sum(np.abs(C) ** 2, axis=(1, 2)))
        if not np.all(np.isfinite(norms)) or np.any(norms == 0.0):
            raise IntegrationError('trajectory state became non-finite at step {} (t={:.6g}); '
                                   'decrease dt (currently {:g})'.format(k, pulse.t[k], dt), step=k)
        C /= norms[:, None, None]

        current_dt = np.sqrt(pulse.dU[k]) * x
        loop.on_step_end(k, current_dt)
        X += current_dt
        current_sum[k] = np.sum(current_dt) / dt
        current_sq_sum[k] = np.sum((current_dt / dt) ** 2)
        if full_record:
            series['phases'][:, k] = phi
            series['currents'][:, k] = current_dt
            series['raw_currents'][:, k] = x * sqrt_dt
            series['noise'][:, k] = noise[:, k]

    posterior = C[:, 0, :]
    weights = np.sqrt(np.sum(np.abs(posterior) ** 2, axis=1))
    if np.any(weights == 0.0):
        raise IntegrationError('measured mode kept no vacuum component at the end of the pulse', step=K)
    posterior = posterior / weights[:, None]
    _logger.debug('integrated {} trajectories over {} steps, residual excitation {:.3g}'
                  .format(B, K, 1.0 - float(np.min(weights)) ** 2))
    return BatchResult(loop.estimate(), X, loop.phase_end(), posterior, current_sum, current_sq_sum, series)


def draw_noise(rng, pulse):
    return rng.normal(0.0, np.sqrt(pulse.dt), pulse.n_steps)


def posterior_state(vec, rest_keys, n_modes, config):
    return from_amplitudes(vec, rest_keys, n_modes, config)


def simulate_dyne(s, mode, pulse, policy, rng, dt=None, integrator='euler', full_record=True):
    """
    Runs one dyne trajectory on `mode` of `s`.
    :param s: PureState
    :param mode: measured mode
    :param pulse: PulseShape
    :param policy: FeedbackPolicy
    :param rng: numpy RandomState of this trajectory
    :param dt: optional, must agree with the pulse grid
    :return: (TrajectoryRecord, posterior PureState with `mode` removed)
    """
    mode = s.check_mode(mode)
    if dt is not None and abs(dt - pulse.dt) > 1e-12 * pulse.dt:
        raise ConfigError('dt={} does not match the pulse grid dt={}'.format(dt, pulse.dt))
    nrm2 = s.norm_squared()
    if nrm2 == 0.0:
        raise FockError('cannot measure the zero vector')
    C, rest = s.to_dense(mode)
    res = integrate_batch(C / np.sqrt(nrm2), pulse, policy, draw_noise(rng, pulse)[None], integrator, full_record)
    record = res.record(0, pulse, policy.to_json_dict())
    return record, posterior_state(res.posterior[0], rest, s.n_modes - 1, s.config)
