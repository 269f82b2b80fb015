"""
Two-mode linear optics on PureState: beamsplitters, dual-rail qubit rotations
and the Bell resources used by the teleportation protocols.

Beamsplitter convention (creation operators, c = sqrt(eta), s = sqrt(1-eta)):

    a1^dag -> c a1^dag + s a2^dag
    a2^dag -> s a1^dag - c a2^dag

Dual-rail logical basis: |0>_L = |0>_rail0 |1>_rail1, |1>_L = |1>_rail0 |0>_rail1.
"""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import json
from collections import namedtuple

import numpy as np
from scipy.special import comb, factorial

from railsim.errors import ConfigError, FockError, TruncationError, UnitarityError
from railsim.states.fock_state import PRUNE_EPS, PureState, apply_phase
from railsim.tools.utils import create_logger

_logger = create_logger('railsim.optics')

UNITARITY_TOL = 1e-10
DECOMPOSITION_EPS = 1e-12


class BeamsplitterSpec(namedtuple('BeamsplitterSpec', ['m1', 'm2', 'eta'])):
    """Beamsplitter between modes m1 and m2 with intensity reflectivity eta"""
    __slots__ = ()

    def __new__(cls, m1, m2, eta):
        if int(m1) == int(m2):
            raise FockError('beamsplitter needs two distinct modes, got m1=m2={}'.format(m1))
        if int(m1) < 0 or int(m2) < 0:
            raise FockError('negative mode index in ({}, {})'.format(m1, m2))
        if not 0.0 <= float(eta) <= 1.0:
            raise ConfigError('eta={} is not in [0, 1]'.format(eta))
        return super(BeamsplitterSpec, cls).__new__(cls, int(m1), int(m2), float(eta))


class DualRailQubit(namedtuple('DualRailQubit', ['rail0', 'rail1'])):
    __slots__ = ()

    def __new__(cls, rail0, rail1):
        if int(rail0) == int(rail1):
            raise FockError('dual-rail qubit needs two distinct rails, got {}'.format(rail0))
        return super(DualRailQubit, cls).__new__(cls, int(rail0), int(rail1))

    def check(self, s):
        s.check_mode(self.rail0)
        s.check_mode(self.rail1)
        return self


class SingleRailQubit(namedtuple('SingleRailQubit', ['mode'])):
    __slots__ = ()

    def __new__(cls, mode):
        if int(mode) < 0:
            raise FockError('negative mode index {}'.format(mode))
        return super(SingleRailQubit, cls).__new__(cls, int(mode))

    def check(self, s):
        s.check_mode(self.mode)
        return self


def mode_map_matrix(eta):
    """M[i, j]: coefficient of a_j^dag in the image of a_i^dag"""
    c = np.sqrt(eta)
    s = np.sqrt(1.0 - eta)
    return np.array([[c, s], [s, -c]], dtype=np.complex128)


def _apply_mode_map(state, m1, m2, M):
    """
    Substitutes a_i^dag -> sum_j M[i, j] a_j^dag on the pair (m1, m2) of every basis vector.
    The photons of the pair may bunch into one mode, so n1 + n2 photons in the
    input need n_max >= n1 + n2 in the state's FockConfig unless the coupler is
    trivial (eta 0 or 1).
    """
    n_max = state.config.n_max
    m00, m01, m10, m11 = (complex(v) for v in np.asarray(M).ravel())
    amps = {}
    for occ, amp in state.items():
        n1, n2 = occ[m1], occ[m2]
        total = n1 + n2
        norm_in = np.sqrt(factorial(n1) * factorial(n2))
        # coefficient of (a1^dag)^p (a2^dag)^(total-p)
        poly = np.zeros(total + 1, dtype=np.complex128)
        for j in range(n1 + 1):
            cj = comb(n1, j) * m00 ** j * m01 ** (n1 - j)
            for k in range(n2 + 1):
                ck = comb(n2, k) * m10 ** k * m11 ** (n2 - k)
                poly[j + k] += cj * ck
        for p in range(total + 1):
            if poly[p] == 0:
                continue
            out = list(occ)
            out[m1] = p
            out[m2] = total - p
            out = tuple(out)
            coef = amp * poly[p] * np.sqrt(factorial(p) * factorial(total - p)) / norm_in
            if max(p, total - p) > n_max and abs(coef) ** 2 >= PRUNE_EPS:
                raise TruncationError('coupling modes ({}, {}) of {} sends {} photons into one mode, above n_max={}; '
                                      'raise n_max in the FockConfig'.format(m1, m2, occ, max(p, total - p), n_max))
            amps[out] = amps.get(out, 0j) + coef
    return PureState(state.n_modes, amps, state.config)


def beamsplitter(s, spec):
    """
    :param s: PureState
    :param spec: BeamsplitterSpec
    :return: the state after the coupler; norm and photon number are preserved
    :raises TruncationError: when photons bunch into one mode above n_max
    """
    s.check_mode(spec.m1)
    s.check_mode(spec.m2)
    return _apply_mode_map(s, spec.m1, spec.m2, mode_map_matrix(spec.eta))


def beamsplitter_inverse(s, spec):
    s.check_mode(spec.m1)
    s.check_mode(spec.m2)
    return _apply_mode_map(s, spec.m1, spec.m2, mode_map_matrix(spec.eta).conj().T)


def check_unitary(U):
    U = np.asarray(U, dtype=np.complex128)
    if U.shape != (2, 2):
        raise UnitarityError('expected a 2x2 matrix, got shape {}'.format(U.shape))
    if not np.all(np.isfinite(U)):
        raise UnitarityError('matrix has non-finite entries')
    err = np.max(np.abs(U.dot(U.conj().T) - np.eye(2)))
    if err > UNITARITY_TOL:
        raise UnitarityError('matrix is not unitary (max |UU^dag - I| = {:.3g})'.format(err))
    return U


def decompose_dual_rail_unitary(U):
    """
    Solves U = e^{i lam} diag(1, e^{i beta}) B(eta) diag(1, e^{i gamma}) where
    B(eta) = [[-c, s], [s, c]] is the beamsplitter restricted to the logical basis.
    :return: eta, beta, gamma, lam
    """
    U = check_unitary(U)
    c = min(1.0, abs(U[0, 0]))
    s = np.sqrt(max(0.0, 1.0 - c ** 2))
    if c < DECOMPOSITION_EPS:
        lam = 0.0
        gamma = np.angle(U[0, 1])
        beta = np.angle(U[1, 0])
    else:
        lam = np.angle(U[0, 0]) - np.pi
        if s < DECOMPOSITION_EPS:
            gamma = 0.0
            beta = np.angle(U[1, 1]) - lam
        else:
            gamma = np.angle(U[0, 1]) - lam
            beta = np.angle(U[1, 0]) - lam
    return c ** 2, float(beta), float(gamma), float(lam)


def dual_rail_unitary(s, q, U):
    """
    Rotates a dual-rail qubit by U (global phase dropped) using a phase shifter,
    a beamsplitter and a second phase shifter, all on the physical modes.
    """
    q.check(s)
    eta, beta, gamma, _ = decompose_dual_rail_unitary(U)
    _logger.debug('dual-rail rotation: eta={:.6f}, beta={:.6f}, gamma={:.6f}'.format(eta, beta, gamma))
    out = apply_phase(s, q.rail0, gamma)
    out = beamsplitter(out, BeamsplitterSpec(q.rail0, q.rail1, eta))
    return apply_phase(out, q.rail0, beta)


def dual_rail_bell(n_extra_modes=0, config=None):
    """(|01>|10> + |10>|01>)/sqrt(2) on modes 0..3, followed by vacuum padding"""
    pad = (0,) * int(n_extra_modes)
    amp = 1.0 / np.sqrt(2.0)
    return PureState(4 + len(pad), {(0, 1, 1, 0) + pad: amp, (1, 0, 0, 1) + pad: amp}, config)


def single_rail_bell(config=None):
    amp = 1.0 / np.sqrt(2.0)
    return PureState(2, {(0, 1): amp, (1, 0): amp}, config)


def _normalized_pair(c0, c1):
    vec = np.array([c0, c1], dtype=np.complex128)
    nrm = np.linalg.norm(vec)
    if nrm == 0.0:
        raise FockError('logical amplitudes are both zero')
    return vec / nrm


def encode_single_rail(c0, c1, config=None):
    c0, c1 = _normalized_pair(c0, c1)
    return PureState(1, {(0,): c0, (1,): c1}, config)


def encode_dual_rail(c0, c1, config=None):
    c0, c1 = _normalized_pair(c0, c1)
    return PureState(2, {(0, 1): c0, (1, 0): c1}, config)


def _dominant_column(vectors):
    """Picks the rest-of-system component carrying the qubit (assumes a product state)"""
    weights = np.sum(np.abs(vectors) ** 2, axis=0)
    if weights.size == 0 or weights.max() == 0.0:
        raise FockError('qubit modes carry no logical population')
    vec = vectors[:, int(np.argmax(weights))]
    return vec / np.linalg.norm(vec)


def single_rail_amplitudes(s, q):
    """
    Logical amplitudes (c0, c1) of a single-rail qubit that is not entangled with
    the other modes, normalized and with the phase of the rest removed.
    """
    q.check(s)
    C, _ = s.to_dense(q.mode)
    vec = _dominant_column(C[:2])
    return _strip_phase(vec)


def dual_rail_amplitudes(s, q):
    q.check(s)
    keys = {}
    cols = []
    for occ, amp in s.items():
        rest = tuple(n for i, n in enumerate(occ) if i not in (q.rail0, q.rail1))
        if rest not in keys:
            keys[rest] = len(cols)
            cols.append([0j, 0j])
        pair = (occ[q.rail0], occ[q.rail1])
        if pair == (0, 1):
            cols[keys[rest]][0] += amp
        elif pair == (1, 0):
            cols[keys[rest]][1] += amp
    if not cols:
        raise FockError('empty state')
    vec = _dominant_column(np.array(cols, dtype=np.complex128).T)
    return _strip_phase(vec)


def _strip_phase(vec):
    pivot = vec[0] if abs(vec[0]) > 1e-12 else vec[1]
    return vec * np.exp(-1j * np.angle(pivot))


def named_unitary(name):
    """
    :param name: identity, hadamard, x, y, z, phase:<delta> or file:<path to json>.
                 The json file holds a 2x2 nested list whose entries are numbers
                 or [re, im] pairs.
    :return: 2x2 complex unitary
    """
    if name == 'identity':
        U = np.eye(2)
    elif name == 'hadamard':
        U = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    elif name == 'x':
        U = np.array([[0.0, 1.0], [1.0, 0.0]])
    elif name == 'y':
        U = np.array([[0.0, -1j], [1j, 0.0]])
    elif name == 'z':
        U = np.array([[1.0, 0.0], [0.0, -1.0]])
    elif name.startswith('phase:'):
        try:
            delta = float(name.split(':', 1)[1])
        except ValueError:
            raise ConfigError('cannot parse phase in unitary {}'.format(name))
        U = np.array([[1.0, 0.0], [0.0, np.exp(1j * delta)]])
    elif name.startswith('file:'):
        U = load_unitary(name.split(':', 1)[1])
    else:
        raise ConfigError('unitary {} is not supported'.format(name))
    return check_unitary(U)


def load_unitary(path):
    try:
        with open(path) as handle:
            raw = json.load(handle)
    except (IOError, OSError, ValueError) as e:
        raise ConfigError('cannot read unitary from {}: {}'.format(path, e))
    try:
        U = np.array([[complex(v[0], v[1]) if isinstance(v, list) else complex(v) for v in row] for row in raw],
                     dtype=np.complex128)
    except (TypeError, IndexError, ValueError):
        raise ConfigError('unitary file {} must hold a 2x2 nested list'.format(path))
    return U
