"""
Trial runners: one protocol execution per (master_seed, trial) pair, returned as
a JSON-ready record {protocol, params, outcome, fidelity, theta_values, seed, trial}.
"""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import numpy as np

from railsim.errors import ConfigError
from railsim.measurements.povm import KIND_APM
from railsim.optics.linear_optics import (DualRailQubit, SingleRailQubit, encode_dual_rail, encode_single_rail)
from railsim.protocols.protocols import (PrepSpec, apply_single_rail_unitary, dual_to_single, homodyne_prep_comparison,
                                         hybrid_bell, prepare_arbitrary, prepare_plus, teleport_single_to_dual)
from railsim.states.fock_state import PureState, fidelity
from railsim.states.named_states import named_state
from railsim.tools.parallel import run_indexed
from railsim.tools.utils import trial_rng

PROTOCOLS = ('plus', 'prep', 'homodyne_prep', 'dual_to_single', 'hybrid_bell', 'teleport', 'gate')
LOGICAL_INPUTS = ('0', '1', 'plus', 'minus', 'random')


def random_qubit(rng):
    """Haar-random logical amplitudes"""
    vec = rng.normal(size=2) + 1j * rng.normal(size=2)
    return vec / np.linalg.norm(vec)


def logical_input(name, rng):
    h = 1.0 / np.sqrt(2.0)
    if name == '0':
        vec = [1.0, 0.0]
    elif name == '1':
        vec = [0.0, 1.0]
    elif name == 'plus':
        vec = [h, h]
    elif name == 'minus':
        vec = [h, -h]
    elif name == 'random':
        return random_qubit(rng)
    else:
        raise ConfigError('input {} is not supported. Known inputs: {}'.format(name, ', '.join(LOGICAL_INPUTS)))
    return np.array(vec, dtype=np.complex128)


def _record(protocol, params, outcome, fid, outcomes, master_seed, trial):
    return {'protocol': protocol,
            'params': params,
            'outcome': outcome,
            'fidelity': fid,
            'theta_values': [o.value for o in outcomes if o.kind == KIND_APM],
            'seed': master_seed,
            'trial': trial}


def make_trial_runner(protocol, backend, alpha=None, phi=0.0, input_name='random', unitary=None, unitary_name=None):
    """
    :param protocol: one of PROTOCOLS
    :param backend: measurement backend of the APM/homodyne steps
    :param alpha, phi: PrepSpec parameters of 'prep'
    :param input_name: logical input of dual_to_single, teleport and gate
    :param unitary: 2x2 matrix applied by 'gate'
    :param unitary_name: its name for the records
    :return: callable (master_seed, trial) -> record
    """
    if protocol == 'prep':
        spec = PrepSpec(alpha, phi)
    elif protocol == 'gate' and unitary is None:
        raise ConfigError('protocol gate needs a unitary')
    elif protocol not in PROTOCOLS:
        raise ConfigError('protocol {} is not supported'.format(protocol))
    if input_name not in LOGICAL_INPUTS:
        raise ConfigError('input {} is not supported'.format(input_name))

    def run(master_seed, trial):
        rng = trial_rng(master_seed, trial)
        outcomes = []
        params = {'backend': backend.to_json_dict()}
        outcome = {'success': True}

        if protocol == 'plus':
            out = prepare_plus(backend, rng, outcomes=outcomes)
            fid = fidelity(out, PrepSpec(1.0 / np.sqrt(2.0)).target())
        elif protocol == 'prep':
            params.update({'alpha': spec.alpha, 'phi': spec.phi})
            out = prepare_arbitrary(spec, backend, rng, outcomes=outcomes)
            fid = fidelity(out, spec.target())
        elif protocol == 'homodyne_prep':
            x, out = homodyne_prep_comparison(rng, backend, outcomes=outcomes)
            target = PureState(1, {(0,): x, (1,): 1.0}).normalize()
            outcome['x'] = x
            fid = fidelity(out, target)
        elif protocol == 'hybrid_bell':
            out, _, _ = hybrid_bell(backend, rng, outcomes=outcomes)
            fid = fidelity(out, named_state('hybrid'))
        else:
            c = logical_input(input_name, rng)
            params['input'] = input_name
            outcome['input_amplitudes'] = c
            if protocol == 'dual_to_single':
                out, _ = dual_to_single(encode_dual_rail(c[0], c[1]), DualRailQubit(0, 1), backend, rng, outcomes)
                fid = fidelity(out, encode_single_rail(c[0], c[1]))
            else:
                s = encode_single_rail(c[0], c[1])
                if protocol == 'teleport':
                    res = teleport_single_to_dual(s, SingleRailQubit(0), backend, rng, outcomes)
                    target = encode_dual_rail(c[0], c[1])
                else:
                    params['u'] = unitary_name
                    res = apply_single_rail_unitary(s, SingleRailQubit(0), unitary, backend, rng, outcomes)
                    target_vec = np.asarray(unitary).dot(c)
                    target = encode_single_rail(target_vec[0], target_vec[1])
                outcome.update(res.to_json_dict())
                fid = fidelity(res.state, target) if res.success else None
        return _record(protocol, params, outcome, fid, outcomes, master_seed, trial)

    return run


def run_trials(runner, master_seed, n_trials, num_threads=1, progress=False):
    """Runs trials 0..n_trials-1; records come back in trial order for any thread count"""
    if n_trials < 1:
        raise ConfigError('n_trials={} must be at least 1'.format(n_trials))
    return run_indexed(lambda i: runner(master_seed, i), n_trials, num_threads, progress, desc='trials')


def summarize_trials(records):
    n = len(records)
    successes = [r for r in records if r['outcome'].get('success', True)]
    fids = np.array([r['fidelity'] for r in successes if r['fidelity'] is not None], dtype=np.float64)
    kinds = {}
    for r in records:
        bsm = r['outcome'].get('bsm')
        if bsm is not None:
            kinds[bsm['kind']] = kinds.get(bsm['kind'], 0) + 1
    summary = {'n': n,
               'successes': len(successes),
               'success_rate': len(successes) / float(n),
               'min_fidelity': float(fids.min()) if len(fids) else None,
               'mean_fidelity': float(fids.mean()) if len(fids) else None}
    if kinds:
        summary['outcome_counts'] = kinds
    return summary
