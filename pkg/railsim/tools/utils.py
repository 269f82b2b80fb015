from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import csv
import json
import logging
import os

import numpy as np
from scipy import stats

TWO_PI = 2.0 * np.pi


def create_logger(name):
    """
    Create a logger object with the given name.

    If this is the first time that we call this method, then initialize the
    formatter.
    """
    base = logging.getLogger("railsim")
    if len(base.handlers) == 0:
        ch = logging.StreamHandler()
        formatter = logging.Formatter('[%(levelname)s %(asctime)s %(name)s] ' +
                                      '%(message)s')
        ch.setFormatter(formatter)
        base.addHandler(ch)
        base.setLevel(logging.INFO)

    return logging.getLogger(name)


def set_log_level(level, name="railsim"):
    """
    Sets the threshold for the railsim logger to level
    :param level: the logger threshold. You can find values here:
                  https://docs.python.org/3/library/logging.html#levels
    :param name: the name used for the logger
    """
    logging.getLogger(name).setLevel(level)


def trial_rng(master_seed, trial_index):
    """Random stream of a single trial, derived from (master_seed, trial_index) only.
    :param master_seed: non-negative integer seed of the whole run
    :param trial_index: index of the trial within the run
    :return: numpy RandomState
    """
    return np.random.RandomState([int(trial_index), int(master_seed)])


def resolve_num_threads(num_threads):
    """RAILSIM_THREADS overrides the flag value"""
    env = os.environ.get('RAILSIM_THREADS', '').strip()
    if env:
        num_threads = int(env)
    return max(1, int(num_threads))


def wrap_angle(theta):
    """Reduce angles to [0, 2pi). Values landing on 2pi map to 0."""
    theta = np.mod(theta, TWO_PI)
    theta = np.where(theta >= TWO_PI, 0.0, theta)
    if theta.ndim == 0:
        return float(theta)
    return theta


def ks_test(samples, cdf):
    """
    :param samples: 1D array of draws
    :param cdf: vectorized callable, the analytic cumulative distribution
    :return: (ks distance, p-value)
    """
    res = stats.kstest(np.asarray(samples, dtype=np.float64), cdf)
    return float(res.statistic), float(res.pvalue)


def chi2_test(samples, cdf, edges, min_expected=5.0):
    """Pearson chi-square goodness of fit on the bins given by edges.
    The two open tails are folded into the outermost bins and neighbouring bins
    are merged until every expected count reaches min_expected.
    :return: (chi2 statistic, p-value, number of bins used)
    """
    samples = np.asarray(samples, dtype=np.float64)
    n = len(samples)
    edges = np.asarray(edges, dtype=np.float64)
    probs = np.diff(cdf(edges))
    probs[0] += cdf(edges[:1])[0]
    probs[-1] += 1.0 - cdf(edges[-1:])[0]
    idx = np.clip(np.searchsorted(edges, samples, side='right') - 1, 0, len(edges) - 2)
    observed = np.bincount(idx, minlength=len(edges) - 1).astype(np.float64)
    expected = probs * n

    obs_merged, exp_merged = [], []
    acc_o, acc_e = 0.0, 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            obs_merged.append(acc_o)
            exp_merged.append(acc_e)
            acc_o, acc_e = 0.0, 0.0
    if acc_e > 0.0 or acc_o > 0.0:
        if obs_merged:
            obs_merged[-1] += acc_o
            exp_merged[-1] += acc_e
        else:
            obs_merged.append(acc_o)
            exp_merged.append(acc_e)

    obs_merged = np.asarray(obs_merged)
    exp_merged = np.asarray(exp_merged)
    exp_merged *= obs_merged.sum() / exp_merged.sum()
    if len(obs_merged) < 2:
        return 0.0, 1.0, len(obs_merged)
    res = stats.chisquare(obs_merged, exp_merged)
    return float(res.statistic), float(res.pvalue), len(obs_merged)


def histogram(samples, bins, value_range):
    counts, edges = np.histogram(np.asarray(samples, dtype=np.float64), bins=bins, range=value_range)
    return {'counts': [int(c) for c in counts], 'edges': [float(e) for e in edges]}


def to_jsonable(obj):
    """Converts numpy scalars/arrays and complex numbers into plain JSON types"""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        if np.isnan(obj) or np.isinf(obj):
            return None
        return obj
    return obj


def dumps(obj):
    return json.dumps(to_jsonable(obj), sort_keys=True, separators=(',', ':'))


def write_jsonl(path, records):
    make_parent_dir(path)
    with open(path, 'w') as handle:
        for rec in records:
            handle.write(dumps(rec))
            handle.write('\n')


def write_json(path, obj):
    make_parent_dir(path)
    with open(path, 'w') as handle:
        json.dump(to_jsonable(obj), handle, sort_keys=True, indent=2)
        handle.write('\n')


def write_csv(path, header, rows):
    make_parent_dir(path)
    with open(path, 'w') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow(format_csv_row(row))


def format_csv_row(row):
    """Floats are written with repr so they read back bit for bit"""
    return [repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row]


def make_parent_dir(path):
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.exists(parent):
        os.makedirs(parent)
