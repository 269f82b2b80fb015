"""
Measurement backends used by the protocols. Both expose the same two calls, so a
protocol runs unchanged on the analytic POVM or on simulated dyne trajectories.
"""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

from railsim.errors import ConfigError, OverOccupiedError
from railsim.measurements.dyne import INTEGRATORS, simulate_dyne
from railsim.measurements.feedback import Adaptive, Homodyne
from railsim.measurements.povm import (KIND_APM, KIND_HOMODYNE, HomodyneSampler, MeasurementOutcome, apm_density,
                                       apm_sample, homodyne_sample)


class AnalyticBackend(object):
    name = 'analytic'

    def __init__(self, grid=None):
        """
        :param grid: QuadratureGrid for homodyne sampling, the default grid if None
        """
        self.grid = grid

    def apm(self, s, mode, rng):
        return apm_sample(s, mode, rng)

    def homodyne(self, s, mode, phi, rng):
        return homodyne_sample(s, mode, phi, rng, self.grid)

    def to_json_dict(self):
        return {'name': self.name}


class TrajectoryBackend(object):
    name = 'trajectory'

    def __init__(self, pulse, integrator='euler', loop_delay=0.0):
        """
        :param pulse: PulseShape of the measured mode, fixes dt
        :param integrator: 'euler' or 'emission'
        :param loop_delay: lag of the adaptive feedback, time units
        """
        if pulse is None:
            raise ConfigError('trajectory backend needs a pulse shape')
        if integrator not in INTEGRATORS:
            raise ConfigError('integrator {} is not supported'.format(integrator))
        self.pulse = pulse
        self.integrator = integrator
        self.loop_delay = float(loop_delay)

    def apm(self, s, mode, rng):
        record, posterior = simulate_dyne(s, mode, self.pulse, Adaptive(loop_delay=self.loop_delay), rng,
                                          integrator=self.integrator, full_record=False)
        try:
            density = apm_density(s, mode)(record.theta)
        except OverOccupiedError:
            density = float('nan')
        return MeasurementOutcome(KIND_APM, record.theta, posterior, density, (mode,))

    def homodyne(self, s, mode, phi, rng):
        record, posterior = simulate_dyne(s, mode, self.pulse, Homodyne(phi0=phi), rng,
                                          integrator=self.integrator, full_record=False)
        density = float(HomodyneSampler(s, mode, phi).pdf(record.x))
        return MeasurementOutcome(KIND_HOMODYNE, record.x, posterior, density, (mode,), phase=phi)

    def to_json_dict(self):
        return {'name': self.name, 'pulse': self.pulse.label, 'dt': self.pulse.dt,
                'integrator': self.integrator, 'loop_delay': self.loop_delay}


def make_backend(name, pulse=None, integrator='euler', loop_delay=0.0):
    if name == 'analytic':
        return AnalyticBackend()
    elif name == 'trajectory':
        return TrajectoryBackend(pulse, integrator, loop_delay)
    raise ConfigError('backend {} is not supported'.format(name))
