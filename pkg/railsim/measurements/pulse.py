"""
Temporal mode shapes of the measured pulse.

The envelope is stored cell-averaged, u_k = (U(t_{k+1}) - U(t_k)) / dt, so the
discrete cumulative sum reproduces U on the grid exactly. The equivalent decay
rate gamma_k = u_k / (1 - U_k) diverges at the end of the pulse; steps that
start with less than eps_end of the excitation left are dropped and the rest is
projected onto vacuum by the integrator.
"""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import numpy as np

from railsim.errors import ConfigError
from railsim.tools.utils import TWO_PI

EPS_END = 1e-6
NORMALIZATION_TOL = 1e-9
PULSE_NAMES = ('flat', 'raisedcosine', 'expdecay:<gamma0>')


def parse_pulse(spec):
    """'expdecay:4' -> ('expdecay', 4.0); 'flat' -> ('flat', None)"""
    name, _, arg = spec.partition(':')
    if name in ('flat', 'raisedcosine'):
        if arg:
            raise ConfigError('pulse {} takes no parameter'.format(name))
        return name, None
    if name == 'expdecay':
        try:
            gamma0 = float(arg)
        except ValueError:
            raise ConfigError('pulse {} needs a decay rate, e.g. expdecay:4'.format(spec))
        return name, gamma0
    raise ConfigError('pulse {} is not supported. Known pulses: {}'.format(spec, ', '.join(PULSE_NAMES)))


def cumulative_envelope(name, t, T, param=None):
    """Analytic U(t) of the normalized shape on [0, T]"""
    t = np.clip(np.asarray(t, dtype=np.float64), 0.0, T)
    if name == 'flat':
        return t / T
    elif name == 'raisedcosine':
        return t / T - np.sin(TWO_PI * t / T) / TWO_PI
    elif name == 'expdecay':
        return -np.expm1(-param * t) / -np.expm1(-param * T)
    raise ConfigError('pulse {} is not supported'.format(name))


class PulseShape(object):
    def __init__(self, name, dt, T, U_grid, param=None, eps_end=EPS_END):
        """
        :param name: shape name
        :param dt: time step
        :param T: pulse duration
        :param U_grid: U(t_k) on the full grid t_k = k dt, k = 0..T/dt
        :param param: shape parameter (gamma0 for expdecay)
        :param eps_end: excitation left at the last retained step
        """
        self.name = name
        self.param = param
        self.dt = float(dt)
        self.T = float(T)
        self.eps_end = float(eps_end)

        dU = np.diff(U_grid)
        if np.any(dU < -1e-15):
            raise ConfigError('pulse {} has a negative envelope'.format(self.label))
        dU = np.maximum(dU, 0.0)
        if abs(U_grid[-1] - 1.0) > NORMALIZATION_TOL:
            raise ConfigError('pulse {} is not normalized: U(T)={!r}'.format(self.label, U_grid[-1]))

        n_keep = int(np.count_nonzero(U_grid[:-1] <= 1.0 - self.eps_end))
        self.n_steps = n_keep
        self.t = self.dt * np.arange(n_keep)
        self.U = np.asarray(U_grid[:n_keep + 1], dtype=np.float64)
        self.dU = dU[:n_keep]
        self.u = self.dU / self.dt
        remaining = 1.0 - self.U[:-1]
        self.gamma = self.u / remaining
        self.p = np.minimum(self.dU / remaining, 1.0)  # emission probability of each step
        for arr in (self.t, self.U, self.dU, self.u, self.gamma, self.p):
            arr.setflags(write=False)
        if not np.all(np.isfinite(self.gamma)):
            raise ConfigError('pulse {} has a non-finite decay rate'.format(self.label))

    @property
    def label(self):
        return self.name if self.param is None else '{}:{:g}'.format(self.name, self.param)

    @property
    def U_end(self):
        return float(self.U[-1])

    def __repr__(self):
        return 'PulseShape({}, dt={:g}, T={:g}, steps={})'.format(self.label, self.dt, self.T, self.n_steps)


def make_pulse(shape, dt, T=1.0, eps_end=EPS_END):
    """
    :param shape: 'flat', 'raisedcosine' or 'expdecay:<gamma0>' (or a parsed (name, param) tuple)
    :param dt: time step, T must be an integer multiple of it
    :param T: pulse duration
    :return: PulseShape
    """
    name, param = parse_pulse(shape) if isinstance(shape, str) else shape
    if not dt > 0 or not T > 0:
        raise ConfigError('dt={} and T={} must be positive'.format(dt, T))
    n = int(round(T / dt))
    if n < 1 or abs(n * dt - T) > 1e-9 * T:
        raise ConfigError('T={} is not an integer multiple of dt={}'.format(T, dt))
    if name == 'expdecay' and not param > 0:
        raise ConfigError('expdecay needs a positive decay rate, got {}'.format(param))
    U_grid = cumulative_envelope(name, dt * np.arange(n + 1), T, param)
    U_grid[-1] = cumulative_envelope(name, T, T, param)
    return PulseShape(name, dt, T, U_grid, param, eps_end)
