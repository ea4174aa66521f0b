import numpy as np
import pytest
from hypothesis import given, settings

from conftest import chain_specs, two_site_specs
from lmechain.errors import InconsistentSigns, WrongShape
from lmechain.fock import build_model, solve_model
from lmechain.gaussian import mode_moments, steady_state
from lmechain.model import ChainSpec
from lmechain.thermo import (
    FockExpectation,
    GaussianExpectation,
    LinearOp,
    QuadraticInteraction,
    Regime,
    classify,
    closed_form_rates,
    entropy_production_rate,
    gaussian_jumps,
    gaussian_rates,
    heat_rate_general,
    internal_current,
    large_gamma_rates,
    steady_report,
    work_rate_general,
)

# Refrigerator point (omega_1 = 0.4, omega_2 = 1, eps = 0.1, gamma = 0.5, T = 0.5, 1), 30-digit evaluation
Q1 = 0.0014399354710570323336
Q2 = -0.003599838677642580834
W = 0.0021599032065855485004


def test_refrigerator_point_rates_frozen(fridge_spec):
    report, _ = steady_report(fridge_spec)
    assert report.q_dot[0] == pytest.approx(Q1, rel=1e-12)
    assert report.q_dot[1] == pytest.approx(Q2, rel=1e-12)
    assert report.w_dot == pytest.approx(W, rel=1e-12)
    assert closed_form_rates(fridge_spec).as_tuple() == pytest.approx((Q1, Q2, W), rel=1e-13)


def test_refrigerator_point_is_otto_refrigerator(fridge_spec):
    report, _ = steady_report(fridge_spec)
    assert report.regime is Regime.REFRIGERATOR
    # Otto COP omega_1 / (omega_2 - omega_1)
    assert report.figure_of_merit == pytest.approx(0.4 / 0.6, rel=1e-12)


def test_engine_efficiency_is_otto(engine_spec):
    report, _ = steady_report(engine_spec)
    assert report.regime is Regime.ENGINE
    assert report.figure_of_merit == pytest.approx(1 - 0.6, rel=1e-12)


def test_accelerator_above_equal_frequency(fridge_spec):
    report, _ = steady_report(fridge_spec.with_(frequencies=(1.5, 1.0)))
    assert report.regime is Regime.ACCELERATOR
    assert report.figure_of_merit is None


def test_carnot_point_and_equal_frequency(fridge_spec):
    carnot, _ = steady_report(fridge_spec.with_(frequencies=(0.5, 1.0)))
    assert carnot.regime is Regime.CARNOT_POINT
    assert carnot.figure_of_merit == pytest.approx(0.5)
    equal, _ = steady_report(fridge_spec.with_(frequencies=(1.0, 1.0)))
    assert equal.regime is Regime.EQUAL_FREQUENCY
    assert equal.q_dot[0] < 0


def test_uncoupled_pair_is_degenerate(fridge_spec):
    report, _ = steady_report(fridge_spec.with_(epsilon=0.0))
    assert report.regime is Regime.DEGENERATE
    assert report.q_dot == (0.0, 0.0) and report.w_dot == 0.0


def test_counter_rotating_pair_alone_heats_both_baths():
    spec = ChainSpec.two_site(0.6, 1.0, epsilon=0.0, eta=0.1, gamma=1.0, t_cold=0.5, t_hot=1.0)
    report, _ = steady_report(spec)
    assert report.regime is Regime.HEATER
    assert report.q_dot[0] < 0 and report.q_dot[1] < 0 and report.w_dot > 0


def test_classify_rejects_impossible_signs(fridge_spec):
    with pytest.raises(InconsistentSigns):
        classify(1.0, 1.0, 1.0, fridge_spec)


@settings(max_examples=300)
@given(two_site_specs())
def test_gaussian_rates_match_closed_form(spec):
    got = gaussian_rates(spec, mode_moments(steady_state(spec), spec)).as_tuple()
    want = closed_form_rates(spec).as_tuple()
    scale = max(abs(x) for x in want)
    floor = 1e-14 * spec.gamma * max(spec.frequencies)
    assert np.allclose(got, want, rtol=1e-9, atol=1e-9 * scale + floor)


@settings(max_examples=300)
@given(chain_specs())
def test_first_and_second_law(spec):
    report, _ = steady_report(spec)
    assert abs(report.first_law_residual) < 1e-10 * spec.gamma * spec.frequencies[-1]
    assert report.entropy_rate >= -1e-12


def test_internal_current_balances_cold_bath(fridge_spec):
    m = mode_moments(steady_state(fridge_spec), fridge_spec)
    rates = gaussian_rates(fridge_spec, m)
    assert internal_current(fridge_spec, m) == pytest.approx(-rates.q_cold, rel=1e-10)
    with pytest.raises(WrongShape):
        internal_current(fridge_spec.with_(eta=0.01), m)


def test_large_gamma_asymptotics_with_pairing():
    spec = ChainSpec.two_site(0.6, 1.0, epsilon=0.3, eta=0.1, gamma=1000.0, t_cold=0.5, t_hot=1.0)
    full = gaussian_rates(spec, mode_moments(steady_state(spec), spec)).as_tuple()
    approx = large_gamma_rates(spec).as_tuple()
    assert np.allclose(full, approx, rtol=1e-4)


def test_entropy_production_formula(fridge_spec):
    assert entropy_production_rate(Q1, Q2, fridge_spec) == pytest.approx(-2 * Q1 - Q2)


def test_linear_operator_pair_rules():
    # thermal single mode with n = 0.3: <a a^dag> = 1.3, <a^dag a> = 0.3
    from lmechain.gaussian import ModeMoments
    m = ModeMoments(np.array([[0.3 + 0j]]), np.zeros((1, 1), complex))
    ex = GaussianExpectation(m)
    a = LinearOp.lowering(0, 1)
    assert ex.pair(a, a.dag()) == pytest.approx(1.3)
    assert ex.pair(a.dag(), a) == pytest.approx(0.3)
    assert ex.pair(a, a) == 0


def test_symbolic_commutator_matches_matrices():
    spec = ChainSpec(n_sites=3, frequencies=(0.7, 1.0, 1.3), epsilon=0.2, eta=0.05, gamma=1.0,
                     t_cold=0.5, t_hot=1.0)
    d = 5
    model = build_model(spec, d)
    h = QuadraticInteraction.chain(spec)
    # pair terms reach past the truncation edge; compare well below it
    levels = np.indices([d] * 3).reshape(3, -1)
    low = np.ix_(*[np.flatnonzero(levels.max(axis=0) <= d - 3)] * 2)
    for site in (0, 2):
        f = GaussianExpectation.commutator(h, LinearOp.lowering(site, 3))
        dense = sum(u * a + v * a.getH() for u, v, a in zip(f.u, f.v, model.modes)).toarray()
        direct = (model.interaction @ model.modes[site] - model.modes[site] @ model.interaction).toarray()
        assert np.abs(dense - direct)[low].max() < 1e-12


def test_fock_general_rates_match_gaussian():
    spec = ChainSpec.two_site(0.8, 1.0, epsilon=0.15, eta=0.05, gamma=0.6, t_cold=0.2, t_hot=0.3)
    model = build_model(spec, 9)
    ex = FockExpectation(solve_model(model))
    heats = heat_rate_general(model.jumps, ex)
    work = work_rate_general(model.jumps, model.interaction, ex)
    ref = gaussian_rates(spec, mode_moments(steady_state(spec), spec))
    assert np.allclose([*heats, work], ref.as_tuple(), rtol=1e-3)
    assert abs(sum(heats) + work) < 1e-12


def test_general_work_vanishes_without_coupling(fridge_spec):
    spec = fridge_spec.with_(epsilon=0.0)
    model = build_model(spec, 6)
    ex = FockExpectation(solve_model(model))
    assert abs(work_rate_general(model.jumps, model.interaction, ex)) < 1e-12
    gm = mode_moments(steady_state(spec), spec)
    w = work_rate_general(gaussian_jumps(spec), QuadraticInteraction.chain(spec), GaussianExpectation(gm))
    assert w == 0.0
