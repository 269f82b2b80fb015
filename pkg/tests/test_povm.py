import numpy as np
import pytest
from scipy.integrate import trapezoid

from railsim.errors import GridRangeError, ImpossibleOutcomeError, OverOccupiedError
from railsim.measurements.povm import (ApmDensity, HomodyneSampler, QuadratureGrid, apm_density,
                                       apm_povm_completeness, condition_on_counts, photon_count, quad_psi,
                                       quadrature_expectation)
from railsim.states.fock_state import PureState, fidelity
from railsim.states.named_states import named_state
from railsim.tools.utils import TWO_PI, ks_test, trial_rng


def test_apm_povm_is_complete():
    matrix, deviation = apm_povm_completeness()
    assert deviation < 1e-10
    np.testing.assert_allclose(matrix, np.eye(2), atol=1e-10)


def test_quadrature_wavefunctions_are_orthonormal():
    x = np.linspace(-10, 10, 20001)
    psi = np.stack([quad_psi(n, x) for n in range(4)])
    gram = trapezoid(psi[:, None, :] * psi[None, :, :], x, axis=2)
    np.testing.assert_allclose(gram, np.eye(4), atol=1e-8)


def test_vacuum_quadrature_variance_is_one():
    x = np.linspace(-10, 10, 20001)
    assert trapezoid(x ** 2 * quad_psi(0, x) ** 2, x) == pytest.approx(1.0)


def test_apm_density_of_plus_state():
    density = ApmDensity(named_state('plus'), 0)
    assert density.r == pytest.approx(0.5)
    assert density.arg == pytest.approx(0.0)
    assert density(0.0) == pytest.approx(2.0 / TWO_PI)
    assert density(np.pi) == pytest.approx(0.0, abs=1e-15)
    assert density.cdf(0.0) == pytest.approx(0.0)
    assert density.cdf(TWO_PI) == pytest.approx(1.0)


def test_apm_density_follows_prepared_phase():
    density = ApmDensity(named_state('phase:1.1'), 0)
    assert density.arg == pytest.approx(1.1)
    theta = np.linspace(0, TWO_PI, 1001)
    assert trapezoid(density(theta), theta) == pytest.approx(1.0)
    assert np.all(np.diff(density.cdf(theta)) >= 0)


def test_apm_density_closed_form():
    density = apm_density(named_state('phase:0.5'), 0)
    theta = np.linspace(0, TWO_PI, 257)
    np.testing.assert_allclose(density(theta), (1 + np.cos(theta - 0.5)) / TWO_PI, atol=1e-12)
    assert trapezoid(density(theta), theta) == pytest.approx(1.0, abs=1e-9)


def test_apm_density_is_flat_when_the_rest_tells_the_photon_apart():
    s = PureState(2, {(0, 1): 0.6, (1, 0): 0.8})
    density = apm_density(s, 0)
    assert density.r == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(density(np.linspace(0, TWO_PI, 9)), 1 / TWO_PI)


def test_apm_samples_follow_density():
    s = named_state('phase:2.0')
    density = ApmDensity(s, 0)
    samples = np.array([density.draw(trial_rng(5, i)) for i in range(20000)])
    assert np.all((samples >= 0) & (samples < TWO_PI))
    ks, _ = ks_test(samples, density.cdf)
    assert ks < 0.02


def test_apm_posterior_of_split_photon():
    out = ApmDensity(named_state('plus-split'), 0).condition(0.9)
    assert out.kind == 'apm'
    assert out.density == pytest.approx(1.0 / TWO_PI)
    assert out.posterior.n_modes == 1
    expected = PureState(1, {(0,): 1.0, (1,): np.exp(0.9j)}).normalize()
    assert fidelity(out.posterior, expected) == pytest.approx(1.0)


def test_apm_rejects_two_photons():
    with pytest.raises(OverOccupiedError):
        ApmDensity(named_state('hom'), 0)


def test_homodyne_density_of_split_photon():
    sampler = HomodyneSampler(named_state('babichev'), 0, 0.0)
    assert sampler.pdf(0.0) == pytest.approx(0.19947, abs=1e-5)
    x = sampler.grid.x
    assert trapezoid(x ** 2 * sampler.pdf_values, x) == pytest.approx(2.0, abs=1e-6)


def test_homodyne_samples_moments():
    sampler = HomodyneSampler(named_state('babichev'), 0, 0.0)
    samples = np.array([sampler.draw(trial_rng(1, i)) for i in range(20000)])
    assert np.mean(samples) == pytest.approx(0.0, abs=0.05)
    assert np.mean(samples ** 2) == pytest.approx(2.0, abs=0.08)
    ks, _ = ks_test(samples, sampler.cdf)
    assert ks < 0.02


def test_homodyne_posterior():
    sampler = HomodyneSampler(named_state('babichev'), 0, 0.0)
    out = sampler.condition(0.7)
    expected = PureState(1, {(0,): 0.7, (1,): 1.0}).normalize()
    assert fidelity(out.posterior, expected) == pytest.approx(1.0)
    assert out.phase == 0.0


def test_homodyne_phase_rotates_quadrature():
    s = named_state('plus')
    assert quadrature_expectation(s, 0, 0.0) == pytest.approx(1.0)
    assert quadrature_expectation(s, 0, np.pi / 2) == pytest.approx(0.0, abs=1e-15)
    sampler = HomodyneSampler(s, 0, np.pi / 2)
    x = sampler.grid.x
    assert trapezoid(x * sampler.pdf_values, x) == pytest.approx(0.0, abs=1e-8)


def test_narrow_grid_is_rejected():
    with pytest.raises(GridRangeError):
        QuadratureGrid(-1.0, 1.0, 201)
    with pytest.raises(GridRangeError):
        HomodyneSampler(named_state('hom'), 0, 0.0, grid=QuadratureGrid(n_max=1))


def test_photon_counting_statistics():
    s = named_state('hom')
    counts = {}
    for i in range(4000):
        out = photon_count(s, [1, 0], trial_rng(2, i))
        counts[out.value] = counts.get(out.value, 0) + 1
        assert out.posterior.n_modes == 0
    assert set(counts) == {(2, 0), (0, 2)}
    assert counts[(2, 0)] / 4000.0 == pytest.approx(0.5, abs=0.04)


def test_count_posterior_and_probability():
    s = PureState(2, {(0, 1): 0.6, (1, 0): 0.8})
    out = condition_on_counts(s, [0], (1,))
    assert out.density == pytest.approx(0.64)
    assert out.posterior.amplitude((0,)) == pytest.approx(1.0)
    with pytest.raises(ImpossibleOutcomeError):
        condition_on_counts(s, [0], (2,))
