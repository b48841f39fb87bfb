"""Product-system dilations: towers, shifts, Markov chains, white noise.

Reference points computed independently of the module code:

* Dilating the identity map gives the trivial tower: every power has one
  generator and inner product table [[unit]] exactly, and every theta is
  the identity on the nose.
* For a stochastic matrix P acting on the diagonal algebra, the semigroup
  is matrix powers: <xi_n, f . xi_n> = diag(P^n f).  For the chain with
  P = [[0.5, 0.5], [0.3, 0.7]] at horizon 3 the eight classical paths
  enumerate every moment, so the module computation has an exhaustive
  classical oracle.
* For the uniform chain P = [[0.5, 0.5], [0.5, 0.5]], the state at any
  time >= 1 is independent of the start, so mixed moments split as
  mean(f) * g(start).
* The corner factorization of alternating increment words must use the
  left-multiplication embedding of the base for interior insertions;
  substituting the rank-one splitting of the corner expectation changes
  values by a visible amount (frozen control gap about 0.15 on M2).
"""

import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncprob.algebra_core import (
    MapKind,
    StructuralError,
    cp_from_kraus,
    cp_from_stochastic,
    full_matrix_algebra,
    identity_map,
    iterate_map,
    map_from_images,
    verify_positive_map,
)
from ncprob.dilation import (
    BudgetExceededError,
    DiscreteProductSystem,
    HorizonError,
    MarkovModel,
    central_unit_fiber,
    dilate_discrete,
    e0_apply,
    markov_scenario,
    random_unital_cp,
    random_window_operator,
    scalar_fiber,
    verify_dilation,
    verify_product_system,
    white_noise_increment_check,
    white_noise_scenario,
)
from ncprob.dilation import _corner_factorization, _sample_alternating_ops
from ncprob.hilbert_module import (
    apply_blocks,
    compose_blocks,
    left_action_operator,
    operator_distance,
    verify_module,
)
from ncprob.linalg import frob


@pytest.fixture(scope="module")
def m2():
    return full_matrix_algebra(2)


@pytest.fixture(scope="module")
def chain():
    return markov_scenario(np.array([[0.5, 0.5], [0.3, 0.7]]), horizon=3)


@pytest.fixture(scope="module")
def m2_noise(m2):
    base, fiber = central_unit_fiber(m2, 2)
    return white_noise_scenario(base, fiber, horizon=3)


# ---------------------------------------------------------------------------
# the trivial tower


def test_identity_dilation_is_exactly_trivial(m2):
    scenario = dilate_discrete(identity_map(m2), horizon=3)
    system = scenario.system
    assert [p.rank for p in system.powers] == [1, 1, 1, 1]
    for p in system.powers:
        assert np.array_equal(p.gram, m2.unit[None, None])
    report = verify_product_system(system)
    assert report.passed, report.failures
    report = verify_dilation(scenario)
    assert report.passed, report.failures


def test_budget_is_checked_before_building_a_level(m2):
    rng = np.random.default_rng(4)
    cp = random_unital_cp(2, rng)
    with pytest.raises(BudgetExceededError) as err:
        dilate_discrete(cp, horizon=3, budget=10)
    assert err.value.dimension > 10


def test_non_unital_maps_are_rejected(m2):
    v = np.array([[0.5, 0.0], [0.0, 0.5]])
    cp = cp_from_kraus(m2, [v])
    assert not cp.is_unital()
    with pytest.raises(StructuralError, match="unital"):
        dilate_discrete(cp, horizon=2)


# ---------------------------------------------------------------------------
# semigroup recovery


def test_stochastic_recovery_matches_matrix_powers():
    p = np.array([[0.5, 0.5], [0.3, 0.7]])
    model = markov_scenario(p, horizon=3)
    system = model.system
    for n in range(4):
        pn = np.linalg.matrix_power(p, n)
        for f in (np.array([1.0, 0.0]), np.array([0.2, 0.9])):
            want = np.diag(pn @ f)
            e = system.powers[n]
            xi = system.units[n]
            got = e.inner(xi, apply_blocks(e.left.blocks_of(np.diag(f)), xi))
            assert frob(got - want) < 1e-12


def test_random_unital_cp_recovery(m2):
    rng = np.random.default_rng(11)
    for _ in range(3):
        cp = random_unital_cp(2, rng)
        scenario = dilate_discrete(cp, horizon=3)
        system = scenario.system
        for n in range(4):
            tn = iterate_map(cp, n)
            e = system.powers[n]
            xi = system.units[n]
            for b in m2.basis:
                got = e.inner(xi, apply_blocks(e.left.blocks_of(b), xi))
                assert frob(got - tn.apply(b)) < 1e-9


def test_corner_expectation_splits_the_corner_embedding(chain):
    system = chain.system
    for b in system.base.basis:
        got = system.expectation(system.corner_embedding(b))
        assert frob(got - b) < 1e-12


# ---------------------------------------------------------------------------
# the shift endomorphisms


def test_theta_zero_is_the_identity(chain):
    system = chain.system
    rng = np.random.default_rng(0)
    op = random_window_operator(system, 2, rng)
    shifted = e0_apply(chain, 0, op)
    assert np.array_equal(shifted.blocks, op.blocks)


def test_theta_of_identity_is_exactly_identity(chain):
    system = chain.system
    for steps in (1, 2):
        level = system.horizon - steps
        ident = np.zeros_like(system.powers[level].gram)
        for i in range(system.powers[level].rank):
            ident[i, i] = system.base.unit
        lifted = system.theta_blocks(ident, level, steps)
        want = np.zeros_like(system.powers[system.horizon].gram)
        for i in range(system.powers[system.horizon].rank):
            want[i, i] = system.base.unit
        assert np.array_equal(lifted, want)


def test_theta_composes_on_generators(chain, m2_noise):
    for scenario in (chain, m2_noise):
        system = scenario.system
        rng = np.random.default_rng(2)
        op = random_window_operator(system, 1, rng)
        twice = e0_apply(scenario, 1, e0_apply(scenario, 1, op))
        direct = e0_apply(scenario, 2, op)
        assert operator_distance(twice, direct) < 1e-12


def test_theta_rejects_foreign_and_overflowing_operators(chain):
    system = chain.system
    rng = np.random.default_rng(3)
    op = random_window_operator(system, 2, rng)
    with pytest.raises(HorizonError):
        e0_apply(chain, 2, op)
    with pytest.raises(HorizonError):
        e0_apply(chain, -1, op)
    other = markov_scenario(np.array([[0.5, 0.5], [0.3, 0.7]]), horizon=2)
    foreign = random_window_operator(other.system, 2, rng)
    with pytest.raises(StructuralError, match="power"):
        e0_apply(chain, 1, foreign)


def test_product_system_invariants(chain, m2_noise):
    for scenario in (chain, m2_noise):
        report = verify_product_system(scenario.system)
        assert report.passed, report.failures
        names = [c.name for c in report.checks]
        assert "identification-preserves-grams" in names
        assert "units-compose" in names


# ---------------------------------------------------------------------------
# Markov chains against the classical oracle


def test_markov_moments_match_path_enumeration(chain):
    report = chain.verify(tol=1e-9, seed=1, trials=20)
    assert report.passed, report.failures


def test_markov_frozen_two_time_moment(chain):
    # E[chi_0(X_3) chi_0(X_1) | X_0 = x] = P[x, 0] * P^2[0, 0];
    # P^2[0,0] = 0.5*0.5 + 0.5*0.3 = 0.4
    chi0 = np.diag([1.0, 0.0]).astype(complex)
    obs = [(chi0, 3), (chi0, 1)]
    want = np.diag([0.5 * 0.4, 0.3 * 0.4])
    assert frob(chain.path_moment(obs) - want) < 1e-12
    assert frob(chain.module_moment(obs) - want) < 1e-9


def test_deterministic_chain_is_noiseless():
    model = markov_scenario(np.eye(2), horizon=3)
    f = np.diag([2.0, -1.0]).astype(complex)
    obs = [(f, 3), (f, 1)]
    want = np.diag([4.0, 1.0])
    assert frob(model.module_moment(obs) - want) < 1e-12
    report = model.verify(tol=1e-9, seed=4, trials=10)
    assert report.passed, report.failures


def test_uniform_chain_decorrelates_start_from_later_times():
    model = markov_scenario(np.full((2, 2), 0.5), horizon=3)
    f = np.diag([0.9, -0.4]).astype(complex)
    g = np.diag([1.0, 3.0]).astype(complex)
    for t in (1, 2, 3):
        got = model.module_moment([(f, t), (g, 0)])
        want = 0.5 * (0.9 - 0.4) * g
        assert frob(got - want) < 1e-10


def test_time_zero_observables_need_a_commutative_base(m2_noise):
    f = np.diag([1.0, 2.0]).astype(complex)
    model = MarkovModel(m2_noise, np.eye(2))
    with pytest.raises(StructuralError, match="commutative"):
        model.process_operator(f, 0)


# ---------------------------------------------------------------------------
# increment independence


def test_white_noise_scalar_fiber():
    base, fiber = scalar_fiber(2)
    scenario = white_noise_scenario(base, fiber, horizon=3)
    inc = white_noise_increment_check(scenario, 1, 2, 3, trials=60, seed=11)
    assert inc.mode == "white-noise"
    assert inc.invariance_residual == 0.0
    assert inc.max_residual < 1e-9
    assert inc.word_count == 60


def test_white_noise_central_unit_fiber(m2_noise):
    for r, s, t in [(0, 1, 3), (0, 2, 3), (1, 2, 3)]:
        inc = white_noise_increment_check(m2_noise, r, s, t, trials=40, seed=7)
        assert inc.mode == "white-noise", (r, s, t)
        assert inc.max_residual < 1e-9, (r, s, t, inc.max_residual)
    assert inc.generated_dimension > 0


def test_noninvariant_chain_reports_markov_property_mode(chain):
    inc = white_noise_increment_check(chain.scenario, 0, 1, 3, trials=30, seed=3)
    assert inc.mode == "markov-property"
    assert inc.invariance_residual > 1e-3
    assert inc.max_residual < 1e-9


def test_increment_windows_must_be_ordered(m2_noise):
    with pytest.raises(HorizonError):
        white_noise_increment_check(m2_noise, 1, 1, 3)
    with pytest.raises(HorizonError):
        white_noise_increment_check(m2_noise, 0, 2, 9)


def test_corner_factorization_needs_the_left_embedding(m2_noise):
    """Interior insertions via the rank-one splitting give wrong values."""
    system = m2_noise.system
    rng = np.random.default_rng(7)
    r, s, t = 0, 1, 3
    worst = 0.0
    for _ in range(60):
        letters = _sample_alternating_ops(system, r, s, t, rng, 6)
        embedded = [
            (leg, system.embed_window(op, s if leg == 1 else r)) for leg, op in letters
        ]
        word = None
        for _, op in embedded:
            word = op if word is None else word @ op
        lhs = system.expectation(word)
        assert frob(lhs - _corner_factorization(system, embedded)) < 1e-10
        lets = list(embedded)
        outer_l = outer_r = system.base.unit
        if lets and lets[0][0] == 1:
            outer_l = system.expectation(lets[0][1])
            lets = lets[1:]
        if lets and lets[-1][0] == 1:
            outer_r = system.expectation(lets[-1][1])
            lets = lets[:-1]
        if lets:
            bad_chain = None
            for leg, op in lets:
                factor = (
                    op
                    if leg == 2
                    else system.corner_embedding(system.expectation(op))
                )
                bad_chain = factor if bad_chain is None else bad_chain @ factor
            bad = outer_l @ system.expectation(bad_chain) @ outer_r
        else:
            bad = outer_l @ outer_r
        worst = max(worst, frob(lhs - bad))
    assert worst > 0.01


def test_increment_generators_report_dimension(m2_noise):
    gens = m2_noise.increment_generators(1, 2)
    assert len(gens) == m2_noise.system.powers[1].rank ** 2
    inc = white_noise_increment_check(m2_noise, 1, 2, 3, trials=5, seed=0)
    assert inc.generated_dimension >= 1
    assert inc.window_past == (1, 2)
    assert inc.window_future == (2, 3)


# ---------------------------------------------------------------------------
# fibers


def test_central_unit_fiber_induces_identity_map(m2):
    base, fiber = central_unit_fiber(m2, 3)
    assert verify_module(fiber).passed
    xi = fiber.distinguished["unit"]
    for b in base.basis:
        got = fiber.inner(xi, apply_blocks(fiber.left.blocks_of(b), xi))
        assert frob(got - b) < 1e-12


def test_white_noise_scenario_requires_a_unit(m2):
    base, fiber = central_unit_fiber(m2, 2)
    stripped = type(fiber)(fiber.base, fiber.gram, fiber.left, {})
    with pytest.raises(StructuralError, match="unit"):
        DiscreteProductSystem.build(base, stripped, horizon=2)


@settings(max_examples=15, deadline=None)
@given(
    rows=st.lists(
        st.lists(st.floats(0.05, 1.0), min_size=2, max_size=2),
        min_size=2,
        max_size=2,
    )
)
def test_any_strictly_positive_chain_recovers_its_powers(rows):
    p = np.array(rows)
    p = p / p.sum(axis=1, keepdims=True)
    model = markov_scenario(p, horizon=2)
    system = model.system
    f = np.array([0.3, -1.1])
    want = np.diag(np.linalg.matrix_power(p, 2) @ f)
    e = system.powers[2]
    xi = system.units[2]
    got = e.inner(xi, apply_blocks(e.left.blocks_of(np.diag(f)), xi))
    assert frob(got - want) < 1e-9
