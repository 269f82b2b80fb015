"""Built-in input states, addressed by name from the command line"""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import numpy as np

from railsim.errors import ConfigError
from railsim.optics.linear_optics import BeamsplitterSpec, beamsplitter, dual_rail_bell, single_rail_bell
from railsim.states.fock_state import PureState, fock

STATE_NAMES = ('vacuum', 'one', 'plus', 'minus', 'plus-split', 'babichev', 'bell-dual', 'bell-single',
               'hom', 'hybrid', 'phase:<phi0>')


def named_state(name, config=None):
    """
    :param name: one of STATE_NAMES. 'phase:<phi0>' is (|0> + e^{i phi0}|1>)/sqrt(2).
                 'plus-split' and 'babichev' are both a photon split equally over two
                 modes, (|0,1> + |1,0>)/sqrt(2).
    :param config: FockConfig
    :return: PureState
    """
    h = 1.0 / np.sqrt(2.0)
    if name == 'vacuum':
        s = fock((0,), config)
    elif name == 'one':
        s = fock((1,), config)
    elif name == 'plus':
        s = PureState(1, {(0,): h, (1,): h}, config)
    elif name == 'minus':
        s = PureState(1, {(0,): h, (1,): -h}, config)
    elif name in ('plus-split', 'babichev'):
        s = beamsplitter(fock((1, 0), config), BeamsplitterSpec(0, 1, 0.5))
    elif name == 'bell-dual':
        s = dual_rail_bell(config=config)
    elif name == 'bell-single':
        s = single_rail_bell(config)
    elif name == 'hom':
        s = beamsplitter(fock((1, 1), config), BeamsplitterSpec(0, 1, 0.5))
    elif name == 'hybrid':
        s = PureState(3, {(0, 1, 0): h, (1, 0, 1): h}, config)
    elif name.startswith('phase:'):
        try:
            phi0 = float(name.split(':', 1)[1])
        except ValueError:
            raise ConfigError('cannot parse phase in state {}'.format(name))
        s = PureState(1, {(0,): h, (1,): h * np.exp(1j * phi0)}, config)
    else:
        raise ConfigError('state {} is not supported. Known states: {}'.format(name, ', '.join(STATE_NAMES)))
    return s
