"""
Multimode truncated Fock-space pure states.

A PureState maps occupation tuples (one photon count per mode) to complex
amplitudes. States are values: every operation returns a new state and never
touches its inputs, so they can be handed to worker threads freely.
"""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import csv
import io
from collections import OrderedDict

import numpy as np

from railsim.errors import CapacityError, FockError, ShapeMismatchError, TruncationError

PRUNE_EPS = 1e-14  # on squared magnitude
NORM_TOL = 1e-12


class FockConfig(object):
    """Truncation of the simulated Fock space."""

    def __init__(self, n_max=2, n_total_max=4, max_modes=8):
        """
        :param n_max: maximum occupation of any single mode
        :param n_total_max: maximum total photon number of a basis vector
        :param max_modes: maximum number of modes of any state
        """
        if n_max < 1 or n_total_max < 1 or max_modes < 1:
            raise FockError('invalid truncation n_max={}, n_total_max={}, max_modes={}'
                            .format(n_max, n_total_max, max_modes))
        self.n_max = int(n_max)
        self.n_total_max = int(n_total_max)
        self.max_modes = int(max_modes)

    def merged(self, other):
        if other is self:
            return self
        return FockConfig(n_max=max(self.n_max, other.n_max),
                          n_total_max=max(self.n_total_max, other.n_total_max),
                          max_modes=max(self.max_modes, other.max_modes))

    def __eq__(self, other):
        return isinstance(other, FockConfig) and \
            (self.n_max, self.n_total_max, self.max_modes) == (other.n_max, other.n_total_max, other.max_modes)

    def __ne__(self, other):
        return not self.__eq__(other)

    def __repr__(self):
        return 'FockConfig(n_max={}, n_total_max={}, max_modes={})'.format(self.n_max, self.n_total_max, self.max_modes)


DEFAULT_CONFIG = FockConfig()


class PureState(object):
    def __init__(self, n_modes, amplitudes, config=None):
        """
        :param n_modes: number of modes. Zero is allowed for the scalar left over
                        once every mode has been measured.
        :param amplitudes: dict occupation tuple -> complex amplitude
        :param config: FockConfig, DEFAULT_CONFIG if None
        """
        self.config = config if config is not None else DEFAULT_CONFIG
        self.n_modes = int(n_modes)
        if self.n_modes < 0:
            raise FockError('n_modes must be non-negative, got {}'.format(n_modes))
        if self.n_modes > self.config.max_modes:
            raise CapacityError('{} modes exceed the configured maximum of {}'
                                .format(self.n_modes, self.config.max_modes))

        amps = {}
        for occ, amp in amplitudes.items():
            occ = tuple(int(n) for n in occ)
            if len(occ) != self.n_modes:
                raise ShapeMismatchError('occupation {} does not have {} modes'.format(occ, self.n_modes))
            amp = complex(amp)
            if abs(amp) ** 2 < PRUNE_EPS:
                continue
            if min(occ + (0,)) < 0:
                raise FockError('negative occupation in {}'.format(occ))
            if max(occ + (0,)) > self.config.n_max:
                raise TruncationError('occupation {} exceeds n_max={}'.format(occ, self.config.n_max))
            if sum(occ) > self.config.n_total_max:
                raise TruncationError('occupation {} exceeds n_total_max={}'.format(occ, self.config.n_total_max))
            amps[occ] = amps.get(occ, 0j) + amp
        # lexicographic order keeps every downstream loop reproducible
        self._amps = OrderedDict((k, amps[k]) for k in sorted(amps) if abs(amps[k]) ** 2 >= PRUNE_EPS)

    @property
    def n_max(self):
        return self.config.n_max

    def items(self):
        return list(self._amps.items())

    def keys(self):
        return list(self._amps.keys())

    def amplitude(self, occupation):
        return self._amps.get(tuple(occupation), 0j)

    def as_dict(self):
        return dict(self._amps)

    def __len__(self):
        return len(self._amps)

    def norm_squared(self):
        return float(sum(abs(a) ** 2 for a in self._amps.values()))

    def norm(self):
        return float(np.sqrt(self.norm_squared()))

    def normalize(self):
        nrm = self.norm()
        if nrm == 0.0:
            raise FockError('cannot normalize the zero vector')
        return PureState(self.n_modes, {k: a / nrm for k, a in self._amps.items()}, self.config)

    def is_normalized(self, tol=NORM_TOL):
        return abs(self.norm_squared() - 1.0) <= tol

    def check_mode(self, mode):
        if not 0 <= int(mode) < self.n_modes:
            raise FockError('mode {} out of range for a {}-mode state'.format(mode, self.n_modes))
        return int(mode)

    def occupation_weights(self, mode):
        """Unnormalized weight of each occupation number of one mode"""
        mode = self.check_mode(mode)
        weights = np.zeros(self.n_max + 1)
        for occ, amp in self._amps.items():
            weights[occ[mode]] += abs(amp) ** 2
        return weights

    def max_occupation(self, mode, tol=0.0):
        """Largest occupation of `mode` carrying squared magnitude above tol"""
        weights = self.occupation_weights(mode)
        support = np.nonzero(weights > tol)[0]
        return int(support[-1]) if len(support) else 0

    def expectation_photon_number(self, mode=None):
        nrm2 = self.norm_squared()
        if nrm2 == 0.0:
            return 0.0
        total = 0.0
        for occ, amp in self._amps.items():
            n = sum(occ) if mode is None else occ[mode]
            total += n * abs(amp) ** 2
        return total / nrm2

    def to_dense(self, mode):
        """
        Splits the state along one mode.
        :param mode: the mode kept as the row index
        :return: C, rest_keys. C has shape (n_max+1, len(rest_keys)) with
                 C[n, r] the amplitude of occupation n on `mode` and rest_keys[r]
                 on the other modes (mode removed), rest_keys sorted.
        """
        mode = self.check_mode(mode)
        rest = sorted(set(occ[:mode] + occ[mode + 1:] for occ in self._amps))
        if not rest:
            rest = [tuple(0 for _ in range(self.n_modes - 1))]
        index = {r: i for i, r in enumerate(rest)}
        C = np.zeros((self.n_max + 1, len(rest)), dtype=np.complex128)
        for occ, amp in self._amps.items():
            C[occ[mode], index[occ[:mode] + occ[mode + 1:]]] = amp
        return C, rest

    def to_csv(self):
        out = io.StringIO()
        writer = csv.writer(out, lineterminator='\n')
        for occ, amp in self._amps.items():
            writer.writerow([' '.join(str(n) for n in occ), repr(amp.real), repr(amp.imag)])
        return out.getvalue()

    def __repr__(self):
        terms = ', '.join('{}: {:.6g}'.format(occ, amp) for occ, amp in self._amps.items())
        return 'PureState(n_modes={}, {{{}}})'.format(self.n_modes, terms)


def from_csv(text, n_modes=None, config=None):
    """Inverse of PureState.to_csv. n_modes is required for an empty state."""
    amps = {}
    for row in csv.reader(io.StringIO(text)):
        if not row or row[0].startswith('#'):
            continue
        occ = tuple(int(n) for n in row[0].split())
        amps[occ] = complex(float(row[1]), float(row[2]))
    if n_modes is None:
        if not amps:
            raise FockError('n_modes is required to read an empty state')
        n_modes = len(next(iter(amps)))
    return PureState(n_modes, amps, config)


def from_amplitudes(vec, keys, n_modes, config=None):
    """Builds a state from an amplitude vector over the given basis keys"""
    return PureState(n_modes, dict(zip(keys, vec)), config)


def from_dense(C, rest_keys, mode, config=None):
    """Inverse of PureState.to_dense: reinserts `mode` as the row index of C."""
    C = np.asarray(C)
    if C.ndim != 2 or C.shape[1] != len(rest_keys):
        raise ShapeMismatchError('dense block of shape {} for {} basis keys'.format(C.shape, len(rest_keys)))
    amps = {}
    for n in range(C.shape[0]):
        for r, rest in enumerate(rest_keys):
            if C[n, r] != 0:
                amps[tuple(rest[:mode]) + (n,) + tuple(rest[mode:])] = C[n, r]
    return PureState(len(rest_keys[0]) + 1 if rest_keys else mode + 1, amps, config)


def vacuum(n_modes, config=None):
    if n_modes < 1:
        raise FockError('vacuum needs at least one mode')
    return PureState(n_modes, {tuple([0] * n_modes): 1.0}, config)


def fock(occupations, config=None):
    occupations = tuple(occupations)
    return PureState(len(occupations), {occupations: 1.0}, config)


def single_photon(n_modes, mode, config=None):
    if not 0 <= mode < n_modes:
        raise FockError('mode {} out of range for {} modes'.format(mode, n_modes))
    occ = [0] * n_modes
    occ[mode] = 1
    return PureState(n_modes, {tuple(occ): 1.0}, config)


def tensor(a, b):
    config = a.config.merged(b.config)
    if a.n_modes + b.n_modes > config.max_modes:
        raise CapacityError('tensor product of {} and {} modes exceeds max_modes={}'
                            .format(a.n_modes, b.n_modes, config.max_modes))
    amps = {}
    for occ_a, amp_a in a.items():
        for occ_b, amp_b in b.items():
            amps[occ_a + occ_b] = amp_a * amp_b
    return PureState(a.n_modes + b.n_modes, amps, config)


def inner(a, b):
    """<a|b>, conjugate-linear in a"""
    if a.n_modes != b.n_modes:
        raise ShapeMismatchError('inner product of {} and {} mode states'.format(a.n_modes, b.n_modes))
    if len(a) > len(b):
        return np.conj(inner(b, a))
    total = 0j
    for occ, amp in a.items():
        total += np.conj(amp) * b.amplitude(occ)
    return complex(total)


def fidelity(a, b):
    return float(min(1.0, abs(inner(a, b)) ** 2))


def project_mode(s, mode, bra_coeffs):
    """
    Partial inner product of `s` with a single-mode bra.
    :param s: PureState
    :param mode: the mode being projected out
    :param bra_coeffs: bra components <bra|n> indexed by occupation n (already
                       conjugated, i.e. <0| + e^{-i theta}<1| is (1, e^{-i theta}))
    :return: (residual, weight). residual has `mode` removed and is unnormalized;
             weight is its squared norm. weight == 0 means the outcome is impossible.
    """
    mode = s.check_mode(mode)
    bra_coeffs = list(bra_coeffs)
    if len(bra_coeffs) > s.n_max + 1:
        raise FockError('{} bra coefficients for n_max={}'.format(len(bra_coeffs), s.n_max))
    amps = {}
    for occ, amp in s.items():
        n = occ[mode]
        if n >= len(bra_coeffs):
            continue
        rest = occ[:mode] + occ[mode + 1:]
        amps[rest] = amps.get(rest, 0j) + bra_coeffs[n] * amp
    residual = PureState(s.n_modes - 1, amps, s.config)
    return residual, residual.norm_squared()


def apply_phase(s, mode, delta):
    """|n> -> e^{i n delta}|n> on one mode"""
    mode = s.check_mode(mode)
    return PureState(s.n_modes, {occ: amp * np.exp(1j * occ[mode] * delta) for occ, amp in s.items()}, s.config)


def remove_mode(s, mode):
    """Drops a mode known to be empty. Fails if it carries any excitation."""
    residual, weight = project_mode(s, mode, [1.0])
    if abs(weight - s.norm_squared()) > NORM_TOL:
        raise FockError('mode {} is not in vacuum'.format(mode))
    return residual
