"""
Command-line front end.

    python -m railsim.cli sample apm --state plus-split --n 100000 --seed 7
    python -m railsim.cli sample homodyne --state babichev --n 100000 --seed 7
    python -m railsim.cli prep --alpha 0.6 --phi 0.785 --backend analytic --n 1000
    python -m railsim.cli gate --u hadamard --input 0 --n 10000 --seed 3
    python -m railsim.cli teleport --input random --n 10000
    python -m railsim.cli trajectory --pulse expdecay:4 --policy adaptive --n 10000 --dt 1e-4
    python -m railsim.cli protocol hybrid_bell --n 100

Every command writes <out_dir>/records.jsonl (one record per trial) and
<out_dir>/summary.json, validated against schemas/summary.json. Exit codes:
0 success, 2 invalid configuration, 3 runtime failure.
"""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import contextlib
import csv
import json
import os
import sys

import jsonschema
import numpy as np
from absl import flags

from railsim.ensemble import analytic_posterior_fidelities, run_ensemble
from railsim.errors import ConfigError, Error, OverOccupiedError, UnitarityError
from railsim.measurements.feedback import Adaptive, Homodyne, parse_policy
from railsim.measurements.povm import HomodyneSampler, apm_density, photon_count, quadrature_expectation
from railsim.measurements.pulse import make_pulse
from railsim.optics.linear_optics import named_unitary
from railsim.protocols.backends import make_backend
from railsim.protocols.trials import PROTOCOLS, make_trial_runner, run_trials, summarize_trials
from railsim.states.fock_state import FockConfig
from railsim.states.named_states import named_state
from railsim.tools.parallel import run_indexed
from railsim.tools.utils import (TWO_PI, chi2_test, create_logger, dumps, format_csv_row, histogram, ks_test,
                                 make_parent_dir, resolve_num_threads, set_log_level, to_jsonable, trial_rng,
                                 write_json, write_jsonl)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

COMMANDS = ('sample', 'prep', 'gate', 'teleport', 'trajectory', 'protocol')
SAMPLE_KINDS = ('apm', 'homodyne', 'count')
SAMPLE_CHUNK = 1000
SCHEMA_PATH = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'schemas', 'summary.json')
SERIES_HEADER = ('trial', 't', 'phi', 'current_dt', 'raw_current_dt', 'noise')

_logger = create_logger('railsim.cli')

FLAGS = flags.FLAGS

flags.DEFINE_string('config', None, 'JSON file of flag values; flags given on the command line win')
flags.DEFINE_string('state', 'plus-split', 'named input state: vacuum, one, plus, minus, plus-split, babichev, '
                                           'bell-dual, bell-single, hom, hybrid, phase:<phi0>')
flags.DEFINE_integer('mode', 0, 'measured mode of the input state')
flags.DEFINE_integer('n', 1000, 'number of trials')
flags.DEFINE_integer('seed', 0, 'master seed, trial i uses RandomState([i, seed])')
flags.DEFINE_enum('backend', 'analytic', ['analytic', 'trajectory'], 'measurement backend of the protocols')
flags.DEFINE_float('dt', 1e-4, 'trajectory time step, in units of the pulse duration')
flags.DEFINE_string('pulse', 'flat', 'pulse shape: flat, raisedcosine or expdecay:<gamma0>')
flags.DEFINE_string('policy', 'adaptive', 'dyne policy: adaptive, homodyne:<phi0> or heterodyne:<ramp>')
flags.DEFINE_float('delay', 0.0, 'feedback loop delay, in units of the pulse duration')
flags.DEFINE_enum('integrator', 'euler', ['euler', 'emission'], 'trajectory integrator')
flags.DEFINE_integer('batch_size', 256, 'trajectories integrated together (does not depend on num_threads)')
flags.DEFINE_bool('full_record', False, 'keep the phase and current series of every trajectory')
flags.DEFINE_float('alpha', 1.0 / np.sqrt(2.0), 'prep: amplitude of |0>')
flags.DEFINE_float('phi', 0.0, 'prep: relative phase, target alpha|0> + e^{-i phi} sqrt(1-alpha^2)|1>')
flags.DEFINE_float('phase', 0.0, 'sample homodyne: local oscillator phase')
flags.DEFINE_string('u', 'identity', 'gate: identity, hadamard, x, y, z, phase:<delta> or file:<path>')
flags.DEFINE_string('input', 'random', 'logical input of gate/teleport: 0, 1, plus, minus or random')
flags.DEFINE_integer('n_max', 2, 'maximum photons per mode')
flags.DEFINE_integer('n_total_max', 4, 'maximum total photons')
flags.DEFINE_string('out_dir', 'railsim_out', 'directory for records.jsonl, summary.json and series.csv')
flags.DEFINE_integer('num_threads', 1, 'number of threads, overridden by RAILSIM_THREADS')
flags.DEFINE_enum('log_level', 'INFO', ['DEBUG', 'INFO', 'WARNING', 'ERROR'], 'threshold of the railsim logger')
flags.DEFINE_bool('progress', False, 'show progress bars on stderr')


def apply_config_file():
    if not FLAGS.config:
        return
    try:
        with open(FLAGS.config) as handle:
            values = json.load(handle)
    except (IOError, OSError, ValueError) as e:
        raise ConfigError('cannot read config file {}: {}'.format(FLAGS.config, e))
    if not isinstance(values, dict):
        raise ConfigError('config file {} must hold a JSON object'.format(FLAGS.config))
    for name, value in sorted(values.items()):
        if name not in FLAGS or name == 'config':
            raise ConfigError('config key {} is not a flag'.format(name))
        if FLAGS[name].present:
            continue
        try:
            FLAGS[name].parse(value)
        except flags.Error as e:
            raise ConfigError('config key {}: {}'.format(name, e))
        # values from the file do not count as given on the command line
        FLAGS[name].present = 0


def validate_run_config():
    if FLAGS.n < 1:
        raise ConfigError('--n={} must be at least 1'.format(FLAGS.n))
    if FLAGS.seed < 0:
        raise ConfigError('--seed={} must be non-negative'.format(FLAGS.seed))
    if FLAGS.dt <= 0:
        raise ConfigError('--dt={} must be positive'.format(FLAGS.dt))
    if FLAGS.delay < 0:
        raise ConfigError('--delay={} must be non-negative'.format(FLAGS.delay))
    if FLAGS.batch_size < 1:
        raise ConfigError('--batch_size={} must be at least 1'.format(FLAGS.batch_size))


def fock_config():
    return FockConfig(n_max=FLAGS.n_max, n_total_max=FLAGS.n_total_max)


def num_threads():
    try:
        return resolve_num_threads(FLAGS.num_threads)
    except ValueError:
        raise ConfigError('RAILSIM_THREADS={} is not an integer'.format(os.environ.get('RAILSIM_THREADS')))


def backend_from_flags():
    pulse = make_pulse(FLAGS.pulse, FLAGS.dt) if FLAGS.backend == 'trajectory' else None
    return make_backend(FLAGS.backend, pulse, FLAGS.integrator, FLAGS.delay)


def out_path(name):
    return os.path.join(FLAGS.out_dir, name)


def load_schema():
    with open(SCHEMA_PATH) as handle:
        return json.load(handle)


def finish(records, summary):
    """
    Validates the summary and writes the artifacts.
    :param records: per-trial records, None when they were already streamed to records.jsonl
    """
    jsonschema.validate(instance=to_jsonable(summary), schema=load_schema())
    if records is not None:
        write_jsonl(out_path('records.jsonl'), records)
    write_json(out_path('summary.json'), summary)
    _logger.info('wrote {} records to {}'.format(summary['n'], FLAGS.out_dir))
    return EXIT_OK


def _sample_chunks(n, draw):
    """Runs draw(trial) for every trial in fixed-size chunks, results in trial order"""
    n_chunks = (n + SAMPLE_CHUNK - 1) // SAMPLE_CHUNK

    def work(c):
        return [draw(i) for i in range(c * SAMPLE_CHUNK, min((c + 1) * SAMPLE_CHUNK, n))]

    chunks = run_indexed(work, n_chunks, num_threads(), FLAGS.progress, desc='samples')
    return [item for chunk in chunks for item in chunk]


def cmd_sample(kind):
    if kind not in SAMPLE_KINDS:
        raise ConfigError('sample kind {} is not supported. Known kinds: {}'.format(kind, ', '.join(SAMPLE_KINDS)))
    state = named_state(FLAGS.state, fock_config())
    mode = state.check_mode(FLAGS.mode)
    seed = FLAGS.seed
    summary = {'command': 'sample', 'kind': kind, 'state': FLAGS.state, 'mode': mode, 'n': FLAGS.n, 'seed': seed}

    if kind == 'apm':
        density = apm_density(state, mode)
        outs = _sample_chunks(FLAGS.n, lambda i: density.sample(trial_rng(seed, i)))
        values = np.array([o.value for o in outs])
        ks, p_value = ks_test(values, density.cdf)
        summary.update({'ks_theta': ks, 'ks_p_value': p_value,
                        'histogram': histogram(values, 32, (0.0, TWO_PI)),
                        'moments': {'mean_cos': float(np.mean(np.cos(values))),
                                    'mean_sin': float(np.mean(np.sin(values)))},
                        'expected': {'mean_cos': density.r * np.cos(density.arg),
                                     'mean_sin': density.r * np.sin(density.arg)}})
    elif kind == 'homodyne':
        sampler = HomodyneSampler(state, mode, FLAGS.phase)
        outs = _sample_chunks(FLAGS.n, lambda i: sampler.sample(trial_rng(seed, i)))
        values = np.array([o.value for o in outs])
        ks, p_value = ks_test(values, sampler.cdf)
        chi2, chi2_p, bins = chi2_test(values, sampler.cdf, np.linspace(-5.0, 5.0, 41))
        summary.update({'phase': FLAGS.phase, 'ks_x': ks, 'ks_p_value': p_value,
                        'chi2': {'statistic': chi2, 'p_value': chi2_p, 'bins': bins},
                        'histogram': histogram(values, 40, (-5.0, 5.0)),
                        'moments': {'mean': float(np.mean(values)), 'var': float(np.var(values)),
                                    'second_moment': float(np.mean(values ** 2))},
                        'expected': {'mean': quadrature_expectation(state, mode, FLAGS.phase)}})
    else:
        outs = _sample_chunks(FLAGS.n, lambda i: photon_count(state, [mode], trial_rng(seed, i)))
        freq = {}
        for o in outs:
            key = ' '.join(str(c) for c in o.value)
            freq[key] = freq.get(key, 0) + 1
        weights = state.occupation_weights(mode) / state.norm_squared()
        summary.update({'frequencies': freq,
                        'expected': {str(k): float(w) for k, w in enumerate(weights) if w > 0}})

    records = []
    for i, o in enumerate(outs):
        rec = o.to_json_dict(seed_path=[seed, i])
        rec['trial'] = i
        records.append(rec)
    return finish(records, summary)


def _protocol_summary(command, records, extra):
    summary = {'command': command, 'n': FLAGS.n, 'seed': FLAGS.seed, 'backend': FLAGS.backend}
    if FLAGS.backend == 'trajectory':
        summary.update({'dt': FLAGS.dt, 'pulse': FLAGS.pulse, 'integrator': FLAGS.integrator})
    summary.update(extra)
    summary.update(summarize_trials(records))
    return summary


def _run_protocol(protocol, **kwargs):
    runner = make_trial_runner(protocol, backend_from_flags(), **kwargs)
    return run_trials(runner, FLAGS.seed, FLAGS.n, num_threads(), FLAGS.progress)


def cmd_prep():
    records = _run_protocol('prep', alpha=FLAGS.alpha, phi=FLAGS.phi)
    return finish(records, _protocol_summary('prep', records, {'alpha': FLAGS.alpha, 'phi': FLAGS.phi}))


def _unitary_from_flags():
    try:
        return named_unitary(FLAGS.u)
    except UnitarityError as e:
        raise ConfigError('--u {}: {}'.format(FLAGS.u, e))


def cmd_gate():
    U = _unitary_from_flags()
    records = _run_protocol('gate', input_name=FLAGS.input, unitary=U, unitary_name=FLAGS.u)
    return finish(records, _protocol_summary('gate', records, {'u': FLAGS.u, 'input': FLAGS.input}))


def cmd_teleport():
    records = _run_protocol('teleport', input_name=FLAGS.input)
    extra = {'input': FLAGS.input}
    fail_zero = sum(1 for r in records if r['outcome'].get('bsm', {}).get('kind') == 'FailZero')
    extra['fail_zero_rate'] = fail_zero / float(len(records))
    # |c0|^2 / 2 averaged over the inputs actually drawn
    extra['expected_fail_zero_rate'] = float(np.mean([abs(r['outcome']['input_amplitudes'][0]) ** 2 / 2.0
                                                      for r in records]))
    return finish(records, _protocol_summary('teleport', records, extra))


def cmd_protocol(name):
    if name not in PROTOCOLS:
        raise ConfigError('protocol {} is not supported. Known protocols: {}'.format(name, ', '.join(PROTOCOLS)))
    kwargs = {}
    if name == 'prep':
        kwargs = {'alpha': FLAGS.alpha, 'phi': FLAGS.phi}
    elif name in ('dual_to_single', 'teleport', 'gate'):
        kwargs = {'input_name': FLAGS.input}
        if name == 'gate':
            kwargs.update({'unitary': _unitary_from_flags(), 'unitary_name': FLAGS.u})
    records = _run_protocol(name, **kwargs)
    return finish(records, _protocol_summary('protocol', records, {'protocol': name}))


def cmd_trajectory():
    state = named_state(FLAGS.state, fock_config())
    mode = state.check_mode(FLAGS.mode)
    pulse = make_pulse(FLAGS.pulse, FLAGS.dt)
    policy = parse_policy(FLAGS.policy, FLAGS.delay)
    desc = policy.to_json_dict()

    # records and series go to disk batch by batch, in trial order
    make_parent_dir(out_path('records.jsonl'))
    with contextlib.ExitStack() as stack:
        records_file = stack.enter_context(open(out_path('records.jsonl'), 'w'))
        series = None
        if FLAGS.full_record:
            series = csv.writer(stack.enter_context(open(out_path('series.csv'), 'w')), lineterminator='\n')
            series.writerow(SERIES_HEADER)

        def consume(first_trial, batch):
            for j in range(batch.batch_size):
                i = first_trial + j
                record = batch.record(j, pulse, desc)
                rec = dict(record.to_json_dict(FLAGS.full_record, seed_path=[FLAGS.seed, i]), trial=i)
                records_file.write(dumps(rec))
                records_file.write('\n')
                if series is not None:
                    series.writerows(format_csv_row([i] + list(row)) for row in record.series_rows())

        res = run_ensemble(state, mode, pulse, policy, FLAGS.seed, FLAGS.n, batch_size=FLAGS.batch_size,
                           integrator=FLAGS.integrator, num_threads=num_threads(), full_record=FLAGS.full_record,
                           progress=FLAGS.progress, consume=consume)

    summary = {'command': 'trajectory', 'state': FLAGS.state, 'mode': mode, 'n': FLAGS.n, 'seed': FLAGS.seed,
               'dt': FLAGS.dt, 'pulse': pulse.label, 'policy': desc,
               'integrator': FLAGS.integrator, 'batch_size': FLAGS.batch_size,
               'x_mean': float(np.mean(res.x)), 'x_var': float(np.var(res.x)),
               'ks_theta': None, 'ks_x': None, 'mean_fidelity': None}
    if isinstance(policy, Homodyne):
        summary['ks_x'] = ks_test(res.x, HomodyneSampler(state, mode, policy.phi0).cdf)[0]
    if isinstance(policy, Adaptive):
        try:
            summary['ks_theta'] = ks_test(res.theta, apm_density(state, mode).cdf)[0]
            fids = analytic_posterior_fidelities(state, mode, res.theta, res.posteriors)
            summary['mean_fidelity'] = float(np.mean(fids))
        except OverOccupiedError:
            _logger.warning('measured mode holds two photons; no analytic phase density to compare against')
    return finish(None, summary)


def dispatch(args):
    if not args:
        raise ConfigError('missing command, one of: {}'.format(', '.join(COMMANDS)))
    command, rest = args[0], args[1:]
    if command == 'sample':
        if len(rest) != 1:
            raise ConfigError('usage: sample {apm|homodyne|count} [flags]')
        return cmd_sample(rest[0])
    elif command == 'protocol':
        if len(rest) != 1:
            raise ConfigError('usage: protocol <name> [flags]')
        return cmd_protocol(rest[0])
    if rest:
        raise ConfigError('unexpected arguments {}'.format(' '.join(rest)))
    if command == 'prep':
        return cmd_prep()
    elif command == 'gate':
        return cmd_gate()
    elif command == 'teleport':
        return cmd_teleport()
    elif command == 'trajectory':
        return cmd_trajectory()
    raise ConfigError('command {} is not supported. Known commands: {}'.format(command, ', '.join(COMMANDS)))


def run(argv):
    """
    :param argv: full argument vector, argv[0] being the program name
    :return: exit code
    """
    FLAGS.unparse_flags()
    try:
        args = FLAGS(argv)[1:]
    except flags.Error as e:
        print('railsim: {}'.format(e), file=sys.stderr)
        return EXIT_CONFIG
    try:
        apply_config_file()
        set_log_level(FLAGS.log_level)
        validate_run_config()
        return dispatch(args)
    except (ConfigError, UnitarityError) as e:
        print('railsim: invalid configuration: {}'.format(e), file=sys.stderr)
        return EXIT_CONFIG
    except Error as e:
        print('railsim: {}: {}'.format(type(e).__name__, e), file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as e:
        _logger.debug('unexpected failure', exc_info=True)
        print('railsim: unexpected {}: {}'.format(type(e).__name__, e), file=sys.stderr)
        return EXIT_RUNTIME


def main():
    sys.exit(run(sys.argv))


if __name__ == '__main__':
    main()
