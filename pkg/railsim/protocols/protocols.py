"""
State preparation, encoding conversion and teleported single-rail gates, composed
from the beamsplitter, photon counting and the adaptive phase measurement (APM).

Sign conventions (see linear_optics for the beamsplitter):
  - APM outcome theta leaves the partner of a split photon in
    sqrt(eta)|0> + e^{i theta} sqrt(1-eta)|1>, undone by a phase delay of theta.
  - After the 50:50 beamsplitter of the Bell measurement, counts (1, 0) identify
    (|01> + |10>)/sqrt(2) and counts (0, 1) identify (|01> - |10>)/sqrt(2). The
    latter needs a logical Z on the dual-rail output.
  - No photon detected collapses the output onto logical 1, two photons onto
    logical 0.
"""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

from collections import namedtuple

import numpy as np

from railsim.errors import ConfigError, OverOccupiedError
from railsim.measurements.povm import OVER_OCCUPIED_TOL, photon_count
from railsim.optics.linear_optics import (BeamsplitterSpec, DualRailQubit, SingleRailQubit, beamsplitter,
                                          check_unitary, dual_rail_bell, dual_rail_unitary)
from railsim.protocols.backends import AnalyticBackend
from railsim.states.fock_state import PureState, apply_phase, fock, tensor
from railsim.tools.utils import create_logger

_logger = create_logger('railsim.protocols')

BELL_PLUS = 'BellPlus'
BELL_MINUS = 'BellMinus'
FAIL_ZERO = 'FailZero'
FAIL_TWO = 'FailTwo'


class PrepSpec(namedtuple('PrepSpec', ['alpha', 'phi'])):
    """Target alpha|0> + e^{-i phi} sqrt(1 - alpha^2)|1>"""
    __slots__ = ()

    def __new__(cls, alpha, phi=0.0):
        alpha = float(alpha)
        if not 0.0 <= alpha <= 1.0:
            raise ConfigError('alpha={} is not in [0, 1]'.format(alpha))
        return super(PrepSpec, cls).__new__(cls, alpha, float(phi))

    def target(self, config=None):
        beta = np.sqrt(max(0.0, 1.0 - self.alpha ** 2))
        return PureState(1, {(0,): self.alpha, (1,): np.exp(-1j * self.phi) * beta}, config)


class BsmOutcome(object):
    def __init__(self, kind, counts, probability):
        self.kind = kind
        self.counts = tuple(counts)
        self.probability = float(probability)

    @property
    def success(self):
        return self.kind in (BELL_PLUS, BELL_MINUS)

    def to_json_dict(self):
        return {'kind': self.kind, 'counts': list(self.counts), 'probability': self.probability}

    def __repr__(self):
        return 'BsmOutcome({}, counts={})'.format(self.kind, self.counts)


class GateOutcome(object):
    """Result of a nondeterministic protocol.
    On success `state` holds the output and `qubit` where it lives. On failure the
    input qubit was measured: `collapsed_logical` is the logical value the output
    collapsed to and `state` the collapsed state.
    """

    def __init__(self, success, state, qubit=None, collapsed_logical=None, bsm=None):
        self.success = bool(success)
        self.state = state
        self.qubit = qubit
        self.collapsed_logical = collapsed_logical
        self.bsm = bsm

    @classmethod
    def Success(cls, state, qubit, bsm=None):
        return cls(True, state, qubit, bsm=bsm)

    @classmethod
    def Failure(cls, state, qubit, collapsed_logical, bsm=None):
        return cls(False, state, qubit, collapsed_logical, bsm)

    def to_json_dict(self):
        rec = {'success': self.success}
        if self.bsm is not None:
            rec['bsm'] = self.bsm.to_json_dict()
        if not self.success:
            rec['collapsed_logical'] = self.collapsed_logical
        return rec


def _log(outcomes, outcome):
    if outcomes is not None:
        outcomes.append(outcome)


def _index_after_removal(index, removed):
    return index - sum(1 for r in removed if r < index)


def prepare_arbitrary(spec, backend, rng, config=None, outcomes=None):
    """
    Splits a photon on a beamsplitter with eta = alpha^2, measures the reflected
    mode with the APM and removes the random phase from the transmitted mode.
    :param spec: PrepSpec
    :param backend: AnalyticBackend or TrajectoryBackend
    :param rng: numpy RandomState
    :param outcomes: optional list collecting the MeasurementOutcome
    :return: single-mode PureState alpha|0> + e^{-i phi} sqrt(1 - alpha^2)|1>
    """
    s = beamsplitter(fock((1, 0), config), BeamsplitterSpec(0, 1, spec.alpha ** 2))
    out = backend.apm(s, 0, rng)
    _log(outcomes, out)
    return apply_phase(out.posterior, 0, -(out.value + spec.phi))


def prepare_plus(backend, rng, config=None, outcomes=None):
    return prepare_arbitrary(PrepSpec(1.0 / np.sqrt(2.0), 0.0), backend, rng, config, outcomes)


def homodyne_prep_comparison(rng, backend=None, config=None, outcomes=None):
    """
    Homodyne instead of the APM on one half of a split photon: the phase is known
    but the amplitude is random.
    :return: (x, state) with state proportional to x|0> + |1>
    """
    backend = backend if backend is not None else AnalyticBackend()
    s = beamsplitter(fock((1, 0), config), BeamsplitterSpec(0, 1, 0.5))
    out = backend.homodyne(s, 0, 0.0, rng)
    _log(outcomes, out)
    return out.value, out.posterior


def _check_single_photon_rails(state, q):
    for occ, amp in state.items():
        if occ[q.rail0] + occ[q.rail1] > 1 and abs(amp) ** 2 > OVER_OCCUPIED_TOL:
            raise OverOccupiedError('rails ({}, {}) hold {} photons'.format(q.rail0, q.rail1,
                                                                            occ[q.rail0] + occ[q.rail1]))


def dual_to_single(state, q, backend, rng, outcomes=None):
    """
    APM on rail1, then a phase of -theta on rail0 which now carries the single-rail qubit.
    :return: (state with rail1 removed, SingleRailQubit)
    """
    q.check(state)
    _check_single_photon_rails(state, q)
    out = backend.apm(state, q.rail1, rng)
    _log(outcomes, out)
    mode = _index_after_removal(q.rail0, [q.rail1])
    return apply_phase(out.posterior, mode, -out.value), SingleRailQubit(mode)


def hybrid_bell(backend, rng, config=None, outcomes=None):
    """
    (|0>|10> + |1>|01>)/sqrt(2): single-rail mode 0 entangled with the dual-rail
    qubit on modes (1, 2), made from a dual-rail Bell pair by converting its first qubit.
    :return: (state, SingleRailQubit, DualRailQubit)
    """
    s, q = dual_to_single(dual_rail_bell(config=config), DualRailQubit(0, 1), backend, rng, outcomes)
    return s, q, DualRailQubit(1, 2)


def bell_measurement_single_rail(state, m1, m2, rng):
    """
    50:50 beamsplitter on (m1, m2) and photon counting on both.
    Outcomes are named after the Bell state they project onto: counts (1, 0)
    select (|01> + |10>)/sqrt(2) and are BellPlus, counts (0, 1) select
    (|01> - |10>)/sqrt(2) and are BellMinus. Labelling by detector pattern
    alone would swap the two names.
    :return: (BsmOutcome, posterior with m1 and m2 removed)
    """
    s = beamsplitter(state, BeamsplitterSpec(m1, m2, 0.5))
    out = photon_count(s, [m1, m2], rng)
    counts = out.value if m1 < m2 else out.value[::-1]
    total = sum(counts)
    if total == 0:
        kind = FAIL_ZERO
    elif total >= 2:
        kind = FAIL_TWO
    elif counts == (1, 0):
        kind = BELL_PLUS
    else:
        kind = BELL_MINUS
    _logger.debug('bell measurement on ({}, {}): counts {} -> {}'.format(m1, m2, counts, kind))
    return BsmOutcome(kind, counts, out.density), out.posterior


def teleport_single_to_dual(state, q, backend, rng, outcomes=None):
    """
    Teleports the single-rail qubit on q.mode onto the dual-rail half of a hybrid
    Bell state appended after the last mode of `state`.
    :return: GateOutcome. The output dual-rail qubit occupies the last two modes,
             the state has one mode more than the input.
    """
    q.check(state)
    n = state.n_modes
    resource, s_half, d_half = hybrid_bell(backend, rng, state.config, outcomes)
    full = tensor(state, resource)
    partner = n + s_half.mode
    bsm, post = bell_measurement_single_rail(full, q.mode, partner, rng)
    removed = [q.mode, partner]
    rails = DualRailQubit(_index_after_removal(n + d_half.rail0, removed),
                          _index_after_removal(n + d_half.rail1, removed))
    if bsm.kind == BELL_PLUS:
        return GateOutcome.Success(post, rails, bsm)
    elif bsm.kind == BELL_MINUS:
        return GateOutcome.Success(apply_phase(post, rails.rail0, np.pi), rails, bsm)
    elif bsm.kind == FAIL_ZERO:
        return GateOutcome.Failure(post, rails, 1, bsm)
    return GateOutcome.Failure(post, rails, 0, bsm)


def apply_single_rail_unitary(state, q, U, backend, rng, outcomes=None):
    """
    Teleport onto a dual-rail qubit, rotate it with linear optics and convert
    back. Succeeds exactly when the Bell measurement does.
    :return: GateOutcome with a SingleRailQubit on success
    """
    U = check_unitary(U)
    tele = teleport_single_to_dual(state, q, backend, rng, outcomes)
    if not tele.success:
        return tele
    s = dual_rail_unitary(tele.state, tele.qubit, U)
    s, out_q = dual_to_single(s, tele.qubit, backend, rng, outcomes)
    return GateOutcome.Success(s, out_q, tele.bsm)
