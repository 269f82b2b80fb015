"""
Analytic measurement backend: photon counting, homodyne quadrature sampling and
the adaptive phase measurement (APM) POVM |theta><theta|/(2 pi) with
|theta> = |0> + e^{i theta}|1>.

The measured quadrature is X = a e^{-i phi} + a^dag e^{i phi}, so vacuum has
<X^2> = 1 and <x|n> = psi_n(x) = (2 pi)^{-1/4} e^{-x^2/4} He_n(x) / sqrt(n!).
"""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import functools

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid
from scipy.special import eval_hermitenorm, factorial

from railsim.errors import FockError, GridRangeError, ImpossibleOutcomeError, OverOccupiedError
from railsim.states.fock_state import PureState, project_mode
from railsim.tools.utils import TWO_PI, wrap_angle

OVER_OCCUPIED_TOL = 1e-12
GRID_MASS_TOL = 1e-6
GRID_NORM_TOL = 1e-6

KIND_COUNT = 'count'
KIND_HOMODYNE = 'homodyne'
KIND_APM = 'apm'


class MeasurementOutcome(object):
    def __init__(self, kind, value, posterior, density, modes, phase=None):
        """
        :param kind: 'count', 'homodyne' or 'apm'
        :param value: tuple of photon counts (count), quadrature x (homodyne) or theta in [0, 2pi) (apm)
        :param posterior: normalized PureState with the measured modes removed
        :param density: probability (count) or probability density (homodyne, apm) of the outcome
        :param modes: measured mode indices, in the order of `value` for counts
        :param phase: local oscillator phase for homodyne outcomes
        """
        self.kind = kind
        self.value = value
        self.posterior = posterior
        self.density = float(density)
        self.modes = tuple(modes)
        self.phase = phase

    def to_json_dict(self, seed_path=None):
        rec = {'kind': self.kind,
               'value': list(self.value) if self.kind == KIND_COUNT else float(self.value),
               'density': self.density,
               'modes': list(self.modes)}
        if self.phase is not None:
            rec['phase'] = float(self.phase)
        if seed_path is not None:
            rec['seed_path'] = list(seed_path)
        return rec

    def __repr__(self):
        return 'MeasurementOutcome(kind={}, value={}, density={:.6g})'.format(self.kind, self.value, self.density)


def quad_psi(n, x, n_max=None):
    """Quadrature wavefunction <x|n> for X = a + a^dag"""
    if n < 0 or (n_max is not None and n > n_max):
        raise FockError('photon number {} is out of range'.format(n))
    x = np.asarray(x, dtype=np.float64)
    psi0 = (TWO_PI ** -0.25) * np.exp(-x ** 2 / 4.0)
    return psi0 * eval_hermitenorm(n, x) / np.sqrt(factorial(n))


class QuadratureGrid(object):
    """Uniform grid with the wavefunctions psi_0..psi_{n_max} tabulated on it. Immutable."""

    def __init__(self, x_min=-8.0, x_max=8.0, n_points=4001, n_max=2):
        if not x_max > x_min or n_points < 3:
            raise GridRangeError('invalid quadrature grid [{}, {}] with {} points'.format(x_min, x_max, n_points))
        self.x_min = float(x_min)
        self.x_max = float(x_max)
        self.n_points = int(n_points)
        self.n_max = int(n_max)
        self.x = np.linspace(self.x_min, self.x_max, self.n_points)
        self.psi = np.stack([quad_psi(n, self.x) for n in range(self.n_max + 1)])
        self.psi.setflags(write=False)
        norms = trapezoid(self.psi ** 2, self.x, axis=1)
        bad = np.nonzero(np.abs(norms - 1.0) > GRID_NORM_TOL)[0]
        if len(bad):
            raise GridRangeError('grid [{}, {}] misses the mass of psi_{} (norm {:.8f}); widen the grid'
                                 .format(self.x_min, self.x_max, bad[0], norms[bad[0]]))


@functools.lru_cache(maxsize=16)
def default_grid(n_max=2, x_min=-8.0, x_max=8.0, n_points=4001):
    return QuadratureGrid(x_min, x_max, n_points, n_max)


def _normalized_dense(s, mode):
    C, rest = s.to_dense(mode)
    nrm2 = s.norm_squared()
    if nrm2 == 0.0:
        raise FockError('cannot measure the zero vector')
    return C / np.sqrt(nrm2), rest


def photon_count(s, modes, rng):
    """
    Counts photons in `modes` (sorted ascending) and samples the joint outcome
    from the exact occupation distribution.
    """
    modes = sorted(set(int(m) for m in modes))
    for m in modes:
        s.check_mode(m)
    weights = {}
    for occ, amp in s.items():
        pattern = tuple(occ[m] for m in modes)
        weights[pattern] = weights.get(pattern, 0.0) + abs(amp) ** 2
    patterns = sorted(weights)
    probs = np.array([weights[p] for p in patterns])
    total = probs.sum()
    if total == 0.0:
        raise FockError('cannot measure the zero vector')
    cum = np.cumsum(probs) / total
    idx = min(int(np.searchsorted(cum, rng.random_sample(), side='right')), len(patterns) - 1)
    chosen = patterns[idx]
    return condition_on_counts(s, modes, chosen, probs[idx] / total)


def condition_on_counts(s, modes, counts, probability=None):
    """Projects `modes` onto the Fock pattern `counts` and returns the outcome"""
    modes = sorted(modes)
    keep = [i for i in range(s.n_modes) if i not in modes]
    amps = {}
    for occ, amp in s.items():
        if tuple(occ[m] for m in modes) == tuple(counts):
            amps[tuple(occ[i] for i in keep)] = amp
    residual = PureState(len(keep), amps, s.config)
    weight = residual.norm_squared()
    if weight == 0.0:
        raise ImpossibleOutcomeError('counts {} on modes {} have zero probability'.format(counts, modes))
    if probability is None:
        probability = weight / s.norm_squared()
    return MeasurementOutcome(KIND_COUNT, tuple(counts), residual.normalize(), probability, modes)


def quadrature_expectation(s, mode, phi):
    """<a e^{-i phi} + a^dag e^{i phi}> on one mode"""
    C, _ = _normalized_dense(s, mode)
    n = np.arange(1, C.shape[0])
    a_mean = np.sum(np.sqrt(n)[:, None] * np.conj(C[:-1]) * C[1:])
    return float(2.0 * np.real(np.exp(-1j * phi) * a_mean))


class HomodyneSampler(object):
    """
    Tabulated marginal of the phi-quadrature of one mode. Built once per input state
    and reused for every draw; sampling is by linear-interpolated inverse CDF.
    """

    def __init__(self, s, mode, phi, grid=None):
        self.state = s
        self.mode = s.check_mode(mode)
        self.phi = float(phi)
        self.grid = grid if grid is not None else default_grid(s.n_max)
        top = s.max_occupation(self.mode)
        if top > self.grid.n_max:
            raise GridRangeError('mode {} holds {} photons but the grid is tabulated up to {}'
                                 .format(self.mode, top, self.grid.n_max))
        C, _ = _normalized_dense(s, self.mode)
        depth = min(C.shape[0], self.grid.n_max + 1)
        phases = np.exp(-1j * np.arange(depth) * self.phi)
        amp = (self.grid.psi[:depth].T * phases).dot(C[:depth])
        self.pdf_values = np.sum(np.abs(amp) ** 2, axis=1)
        mass = trapezoid(self.pdf_values, self.grid.x)
        if abs(mass - 1.0) > GRID_MASS_TOL:
            raise GridRangeError('quadrature grid [{}, {}] holds only {:.8f} of the probability'
                                 .format(self.grid.x_min, self.grid.x_max, mass))
        cdf = cumulative_trapezoid(self.pdf_values, self.grid.x, initial=0.0)
        self.cdf_values = cdf / cdf[-1]

    def pdf(self, x):
        return np.interp(x, self.grid.x, self.pdf_values, left=0.0, right=0.0)

    def cdf(self, x):
        return np.interp(x, self.grid.x, self.cdf_values, left=0.0, right=1.0)

    def draw(self, rng):
        return float(np.interp(rng.random_sample(), self.cdf_values, self.grid.x))

    def condition(self, x):
        bra = quad_psi_vector(x, self.grid.n_max) * np.exp(-1j * np.arange(self.grid.n_max + 1) * self.phi)
        residual, weight = project_mode(self.state, self.mode, bra[:self.state.n_max + 1])
        if weight == 0.0:
            raise ImpossibleOutcomeError('quadrature value x={} has zero density'.format(x))
        density = weight / self.state.norm_squared()
        return MeasurementOutcome(KIND_HOMODYNE, x, residual.normalize(), density, (self.mode,), phase=self.phi)

    def sample(self, rng):
        return self.condition(self.draw(rng))


def quad_psi_vector(x, n_max):
    return np.array([quad_psi(n, x) for n in range(n_max + 1)], dtype=np.float64)


def homodyne_sample(s, mode, phi, rng, grid=None):
    return HomodyneSampler(s, mode, phi, grid).sample(rng)


class ApmDensity(object):
    """
    p(theta) = || <theta|_mode s ||^2 / (2 pi) = (1 + 2 r cos(theta - arg z)) / (2 pi)
    with z = <C_0|C_1> the overlap of the rest-of-system vectors conditioned on
    zero and one photon in the measured mode.
    """

    def __init__(self, s, mode):
        self.state = s
        self.mode = s.check_mode(mode)
        C, _ = _normalized_dense(s, self.mode)
        over = float(np.sum(np.abs(C[2:]) ** 2))
        if over > OVER_OCCUPIED_TOL:
            raise OverOccupiedError('mode {} carries weight {:.3g} on two or more photons'.format(self.mode, over))
        z = np.vdot(C[0], C[1])
        self.r = float(abs(z))
        self.arg = float(np.angle(z))
        self.envelope = (1.0 + 2.0 * self.r) / TWO_PI

    def __call__(self, theta):
        return (1.0 + 2.0 * self.r * np.cos(np.asarray(theta) - self.arg)) / TWO_PI

    def cdf(self, theta):
        theta = np.clip(np.asarray(theta, dtype=np.float64), 0.0, TWO_PI)
        return (theta + 2.0 * self.r * (np.sin(theta - self.arg) + np.sin(self.arg))) / TWO_PI

    def draw(self, rng):
        while True:
            theta = TWO_PI * rng.random_sample()
            if rng.random_sample() * self.envelope <= self(theta):
                return wrap_angle(theta)

    def condition(self, theta):
        theta = wrap_angle(theta)
        residual, weight = project_mode(self.state, self.mode, [1.0, np.exp(-1j * theta)])
        if weight == 0.0:
            raise ImpossibleOutcomeError('phase theta={} has zero density'.format(theta))
        return MeasurementOutcome(KIND_APM, theta, residual.normalize(), float(self(theta)), (self.mode,))

    def sample(self, rng):
        return self.condition(self.draw(rng))


def apm_density(s, mode):
    """Phase density of `mode`, callable on theta, with cdf and draw"""
    return ApmDensity(s, mode)


def apm_sample(s, mode, rng):
    return ApmDensity(s, mode).sample(rng)


def apm_povm_completeness(n_grid=4096):
    """
    :return: (matrix, max elementwise deviation from the 2x2 identity) of the
             quadrature sum of |theta><theta| / (2 pi) on span{|0>, |1>}
    """
    theta = TWO_PI * np.arange(n_grid) / n_grid
    ket = np.stack([np.ones(n_grid, dtype=np.complex128), np.exp(1j * theta)])
    total = ket.dot(ket.conj().T) / n_grid
    return total, float(np.max(np.abs(total - np.eye(2))))
