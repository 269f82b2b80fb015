from __future__ import division
from __future__ import absolute_import
from __future__ import print_function

import warnings

import numpy as np

from railsim.errors import ConfigError
from railsim.tools.utils import wrap_angle

DELAY_WARNING_FRACTION = 0.01
POLICY_NAMES = ('adaptive', 'homodyne:<phi0>', 'heterodyne:<ramp>')


class FeedbackPolicy(object):
    """Local oscillator phase controller of a dyne detector.
    The integrator drives it once per trajectory batch:
    ```python
    loop = copy.copy(policy)
    loop.on_trajectory_begin(pulse, batch_size)
    for k in range(pulse.n_steps):
        phi = loop.phase(k)
        ...
        loop.on_step_end(k, current_dt)
    theta = loop.estimate()
    ```
    Arguments:
        loop_delay: time by which phase updates lag the current. Rounded
            to a whole number of steps of the pulse grid.
    """

    name = 'base'

    def __init__(self, loop_delay=0.0):
        if loop_delay < 0:
            raise ConfigError('loop_delay={} must be non-negative'.format(loop_delay))
        self.loop_delay = float(loop_delay)
        self.delay_steps = 0
        self.batch_size = 0
        self.pulse = None

    def on_trajectory_begin(self, pulse, batch_size):
        self.pulse = pulse
        self.batch_size = batch_size
        self.delay_steps = int(round(self.loop_delay / pulse.dt))

    def phase(self, k):
        raise NotImplementedError

    def on_step_end(self, k, current_dt):
        pass

    def estimate(self):
        """Phase estimate per trajectory, None for non-adaptive detection"""
        return None

    def phase_end(self):
        return None

    def to_json_dict(self):
        return {'name': self.name, 'loop_delay': self.loop_delay}


class Homodyne(FeedbackPolicy):
    name = 'homodyne'

    def __init__(self, phi0=0.0, loop_delay=0.0):
        super(Homodyne, self).__init__(loop_delay)
        self.phi0 = float(phi0)

    def phase(self, k):
        return np.full(self.batch_size, self.phi0)

    def to_json_dict(self):
        rec = super(Homodyne, self).to_json_dict()
        rec['phi0'] = self.phi0
        return rec


class Heterodyne(FeedbackPolicy):
    """Open-loop linear ramp phi(t) = phi0 + ramp * t. The loop delay does not enter."""
    name = 'heterodyne'

    def __init__(self, ramp, phi0=0.0, loop_delay=0.0):
        super(Heterodyne, self).__init__(loop_delay)
        self.ramp = float(ramp)
        self.phi0 = float(phi0)

    def phase(self, k):
        return np.full(self.batch_size, self.phi0 + self.ramp * self.pulse.t[k])

    def to_json_dict(self):
        rec = super(Heterodyne, self).to_json_dict()
        rec.update({'phi0': self.phi0, 'ramp': self.ramp})
        return rec


class Adaptive(FeedbackPolicy):
    """Adaptive phase measurement.
    The phase follows the running integral of the current weighted by
    1/sqrt(U), dphi = I dt / sqrt(U), where U is taken at the end of each
    step. The estimate is theta = (phi_end - pi/2) mod 2pi computed from the
    same running sum.
    """
    name = 'adaptive'

    def __init__(self, loop_delay=0.0):
        super(Adaptive, self).__init__(loop_delay)
        self.running = None
        self.weights = None

    def on_trajectory_begin(self, pulse, batch_size):
        super(Adaptive, self).on_trajectory_begin(pulse, batch_size)
        if self.loop_delay >= DELAY_WARNING_FRACTION * pulse.T:
            warnings.warn('adaptive loop delay {} is not small compared to the pulse duration {}; '
                          'the phase estimate will be degraded'.format(self.loop_delay, pulse.T))
        self.running = np.zeros((pulse.n_steps + 1, batch_size))
        U_after = pulse.U[1:]
        self.weights = np.zeros_like(U_after)
        positive = U_after > 0.0
        self.weights[positive] = 1.0 / np.sqrt(U_after[positive])

    def phase(self, k):
        return self.running[max(k - self.delay_steps, 0)]

    def on_step_end(self, k, current_dt):
        self.running[k + 1] = self.running[k] + current_dt * self.weights[k]

    def phase_end(self):
        return self.running[-1]

    def estimate(self):
        return wrap_angle(self.running[-1] - np.pi / 2.0)


def parse_policy(spec, loop_delay=0.0):
    """
    :param spec: 'adaptive', 'homodyne:<phi0>' or 'heterodyne:<ramp>'
    :param loop_delay: feedback lag in time units
    :return: FeedbackPolicy
    """
    name, _, arg = spec.partition(':')
    try:
        value = float(arg) if arg else 0.0
    except ValueError:
        raise ConfigError('cannot parse parameter of policy {}'.format(spec))
    if name == 'adaptive':
        if arg:
            raise ConfigError('policy adaptive takes no parameter')
        return Adaptive(loop_delay=loop_delay)
    elif name == 'homodyne':
        return Homodyne(phi0=value, loop_delay=loop_delay)
    elif name == 'heterodyne':
        return Heterodyne(ramp=value, loop_delay=loop_delay)
    raise ConfigError('policy {} is not supported. Known policies: {}'.format(spec, ', '.join(POLICY_NAMES)))
