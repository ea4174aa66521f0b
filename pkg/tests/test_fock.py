import numpy as np
import pytest

from lmechain.errors import DegenerateKernel, DimensionBudget, DomainError
from lmechain.fock import (
    LindbladModel,
    apply_liouvillian,
    build_model,
    embed,
    evolve,
    expectation,
    fock_moments,
    liouvillian,
    lowering,
    product_state,
    solve_model,
    steady_sector,
    steady_state,
    thermal_state,
    top_level_populations,
)
from lmechain.gaussian import build_drift_diffusion, mode_moments, steady_state as gaussian_steady
from lmechain.model import ChainSpec


def test_lowering_matrix_elements():
    a = lowering(4).toarray()
    assert np.allclose(a, np.diag(np.sqrt([1, 2, 3]), 1))
    comm = a @ a.conj().T - a.conj().T @ a
    # canonical commutator holds below the truncation edge
    assert np.allclose(np.diag(comm)[:-1], 1.0)
    assert np.diag(comm)[-1] == pytest.approx(-3.0)


def test_embedded_modes_commute():
    a1 = embed(lowering(3), 0, [3, 3])
    a2 = embed(lowering(3), 1, [3, 3])
    assert abs(a1 @ a2 - a2 @ a1).max() == 0
    assert abs(a1 @ a2.getH() - a2.getH() @ a1).max() == 0


def test_thermal_state_populations():
    rho = thermal_state(1.0, 1.0, 40)
    assert np.trace(rho).real == pytest.approx(1.0)
    n = np.sum(np.arange(40) * np.diag(rho).real)
    assert n == pytest.approx(1 / (np.e - 1), rel=1e-12)


def test_uncoupled_steady_state_is_product_thermal():
    spec = ChainSpec.two_site(0.5, 1.0, epsilon=0.0, gamma=0.7, t_cold=0.4, t_hot=0.9)
    d = 8
    rho = solve_model(build_model(spec, d))
    # truncated thermal states are exact fixed points of the truncated dissipator
    expected = product_state([thermal_state(0.5, 0.4, d), thermal_state(1.0, 0.9, d)])
    assert np.allclose(rho, expected, atol=1e-12)


def test_sparse_solve_matches_dense_null_vector(fridge_spec):
    model = build_model(fridge_spec, 6)  # 36 states: sparse path
    gen = liouvillian(model)
    vals, vecs = np.linalg.eig(gen.toarray())
    null = vecs[:, np.argmin(np.abs(vals))].reshape(36, 36, order="F")
    null = null / np.trace(null)
    assert np.allclose(solve_model(model), null, atol=1e-10)


def test_dense_path_is_hermitian_and_normalised(fridge_spec):
    rho = steady_state(liouvillian(build_model(fridge_spec, 4)))
    assert np.allclose(rho, rho.conj().T)
    assert np.trace(rho).real == pytest.approx(1.0)
    assert np.all(np.linalg.eigvalsh(rho) > -1e-12)


def test_symmetry_sector_matches_full_solve():
    spec = ChainSpec.two_site(0.8, 1.0, epsilon=0.15, eta=0.05, gamma=0.6, t_cold=0.3, t_hot=0.5)
    model = build_model(spec, 7)
    gen = liouvillian(model)
    full = steady_state(gen, np.arange(gen.shape[0]))
    restricted = steady_state(gen, steady_sector(model))
    assert np.allclose(full, restricted, atol=1e-11)


def test_fock_moments_match_gaussian_low_occupation(fridge_spec):
    spec = fridge_spec.with_(t_cold=0.2, t_hot=0.3)
    model = build_model(spec, 10)
    fm = fock_moments(solve_model(model), model)
    gm = mode_moments(gaussian_steady(spec), spec)
    assert not fm.low_confidence
    assert np.allclose(fm.number, gm.number, atol=1e-7)
    assert np.allclose(fm.anomalous, gm.anomalous, atol=1e-7)


def test_counter_rotating_moments_match_gaussian():
    spec = ChainSpec.two_site(0.8, 1.0, epsilon=0.15, eta=0.05, gamma=0.6, t_cold=0.2, t_hot=0.3)
    model = build_model(spec, 9)
    fm = fock_moments(solve_model(model), model)
    gm = mode_moments(gaussian_steady(spec), spec)
    assert np.abs(gm.anomalous).max() > 1e-3
    assert np.allclose(fm.number, gm.number, atol=1e-5)
    assert np.allclose(fm.anomalous, gm.anomalous, atol=1e-5)


def test_high_temperature_flags_truncation(fridge_spec):
    model = build_model(fridge_spec.with_(t_cold=3.0, t_hot=5.0), 5)
    fm = fock_moments(solve_model(model), model)
    assert fm.low_confidence
    assert np.all(fm.top_population > 1e-6)


def _quadrature_covariance(rho, omegas, modes):
    ys = []
    for w, a in zip(omegas, modes):
        ad = a.getH()
        ys.append((a + ad) / np.sqrt(2 * w))
        ys.append(-1j * np.sqrt(w / 2) * (a - ad))
    n = len(ys)
    v = np.empty((n, n))
    for k in range(n):
        for l in range(n):
            v[k, l] = 0.5 * expectation(rho, ys[k] @ ys[l] + ys[l] @ ys[k]).real
    return v


def test_three_site_generator_reproduces_drift_and_diffusion():
    spec = ChainSpec(n_sites=3, frequencies=(0.9, 1.2, 1.5), epsilon=0.2, eta=0.07, gamma=0.8,
                     t_cold=0.15, t_hot=0.2)
    d = 6
    model = build_model(spec, d)
    rho = product_state([thermal_state(w, 0.15, d) for w in spec.frequencies])
    drho = apply_liouvillian(liouvillian(model), rho)
    dv_fock = _quadrature_covariance(drho, spec.frequencies, model.modes)
    v = _quadrature_covariance(rho, spec.frequencies, model.modes)
    dd = build_drift_diffusion(spec)
    dv_gauss = dd.drift @ v + v @ dd.drift.T + dd.diffusion
    assert np.allclose(dv_fock, dv_gauss, atol=1e-8)


def test_evolution_conserves_trace_and_relaxes(fridge_spec):
    spec = fridge_spec.with_(t_cold=0.2, t_hot=0.3)
    model = build_model(spec, 5)
    gen = liouvillian(model)
    rho0 = product_state([thermal_state(0.4, 0.2, 5), thermal_state(1.0, 0.2, 5)])
    rho_t = evolve(gen, rho0, 2.0)
    assert np.trace(rho_t).real == pytest.approx(1.0, abs=1e-12)
    late = evolve(gen, rho0, 200.0)
    assert np.allclose(late, solve_model(model), atol=1e-9)


def test_budget_and_domain_errors(fridge_spec):
    with pytest.raises(DimensionBudget):
        build_model(fridge_spec, 65)
    with pytest.raises(DomainError):
        build_model(fridge_spec, 1)
    with pytest.raises(DomainError):
        expectation(np.eye(4), np.eye(3))


def test_closed_system_has_degenerate_kernel(fridge_spec):
    model = build_model(fridge_spec, 3)
    closed = LindbladModel(3, 2, model.hamiltonian, (), model.local_hamiltonians,
                           model.interaction, model.modes)
    with pytest.raises(DegenerateKernel):
        steady_state(liouvillian(closed))


def test_top_level_populations_of_product_state():
    rho = product_state([thermal_state(1.0, 1.0, 4), thermal_state(1.0, 100.0, 4)])
    top = top_level_populations(rho, 2, 4)
    assert top[0] == pytest.approx(np.exp(-3) / np.sum(np.exp(-np.arange(4))))
    assert top[1] > top[0]
