import numpy as np
import pytest

from railsim.errors import CapacityError, FockError, ShapeMismatchError, TruncationError
from railsim.states.fock_state import (FockConfig, PureState, apply_phase, fidelity, fock, from_amplitudes, from_csv,
                                       from_dense, inner, project_mode, remove_mode, single_photon, tensor, vacuum)
from railsim.states.named_states import STATE_NAMES, named_state


def test_amplitudes_below_threshold_are_pruned():
    s = PureState(2, {(0, 1): 1.0, (1, 0): 1e-8})
    assert len(s) == 1
    assert s.amplitude((1, 0)) == 0j


def test_keys_are_sorted():
    s = PureState(2, {(1, 0): 1.0, (0, 1): 1.0, (0, 0): 1.0})
    assert s.keys() == [(0, 0), (0, 1), (1, 0)]


def test_truncation_limits():
    with pytest.raises(TruncationError):
        fock((3, 0))
    with pytest.raises(TruncationError):
        PureState(3, {(2, 2, 1): 1.0}, FockConfig(n_max=2, n_total_max=4))
    with pytest.raises(ShapeMismatchError):
        PureState(2, {(0, 1, 0): 1.0})


def test_capacity():
    with pytest.raises(CapacityError):
        vacuum(9)
    with pytest.raises(CapacityError):
        tensor(vacuum(5), vacuum(4))


def test_normalize():
    s = PureState(1, {(0,): 3.0, (1,): 4.0j}).normalize()
    assert s.is_normalized()
    assert s.amplitude((1,)) == pytest.approx(0.8j)
    with pytest.raises(FockError):
        PureState(1, {}).normalize()


def test_tensor_concatenates_modes():
    a = PureState(1, {(0,): 0.6, (1,): 0.8})
    b = single_photon(2, 1)
    t = tensor(a, b)
    assert t.n_modes == 3
    assert t.amplitude((0, 0, 1)) == pytest.approx(0.6)
    assert t.amplitude((1, 0, 1)) == pytest.approx(0.8)


def test_inner_is_conjugate_linear_in_first_argument():
    a = PureState(1, {(0,): 1j})
    b = PureState(1, {(0,): 1.0})
    assert inner(a, b) == pytest.approx(-1j)
    assert inner(b, a) == pytest.approx(1j)


def test_fidelity_ignores_global_phase():
    s = named_state('plus')
    rotated = PureState(1, {k: np.exp(0.7j) * s.amplitude(k) for k in s.keys()})
    assert fidelity(s, rotated) == pytest.approx(1.0)
    assert fidelity(named_state('plus'), named_state('minus')) == pytest.approx(0.0, abs=1e-15)


def test_project_mode():
    s = PureState(2, {(0, 1): 0.6, (1, 0): 0.8})
    residual, weight = project_mode(s, 0, [1.0, 0.0])
    assert residual.n_modes == 1
    assert residual.amplitude((1,)) == pytest.approx(0.6)
    assert weight == pytest.approx(0.36)


def test_apply_phase():
    s = apply_phase(named_state('plus'), 0, np.pi / 2)
    assert s.amplitude((1,)) == pytest.approx(1j / np.sqrt(2))
    assert s.amplitude((0,)) == pytest.approx(1 / np.sqrt(2))


def test_remove_mode():
    s = tensor(named_state('plus'), vacuum(1))
    assert remove_mode(s, 1).n_modes == 1
    with pytest.raises(FockError):
        remove_mode(s, 0)


def test_to_dense_layout():
    s = named_state('hybrid')
    C, rest = s.to_dense(0)
    assert C.shape == (3, 2)
    assert rest == [(0, 1), (1, 0)]
    np.testing.assert_allclose(np.abs(C[0]), [0.0, 1 / np.sqrt(2)])
    np.testing.assert_allclose(np.abs(C[1]), [1 / np.sqrt(2), 0.0])
    assert from_dense(C, rest, 0).as_dict() == s.as_dict()
    assert from_dense(*s.to_dense(2), mode=2).as_dict() == s.as_dict()


def test_csv_round_trip():
    s = PureState(2, {(0, 1): 0.6j, (1, 1): -0.8})
    t = from_csv(s.to_csv())
    assert t.as_dict() == s.as_dict()
    assert from_amplitudes([0.6j, -0.8], [(0, 1), (1, 1)], 2).as_dict() == s.as_dict()


def test_expectation_photon_number():
    s = named_state('hom')
    assert s.expectation_photon_number() == pytest.approx(2.0)
    assert s.expectation_photon_number(0) == pytest.approx(1.0)


@pytest.mark.parametrize('name', [n for n in STATE_NAMES if not n.startswith('phase')] + ['phase:0.3'])
def test_named_states_are_normalized(name):
    assert named_state(name).is_normalized()
