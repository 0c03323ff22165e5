import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xorgames.classical import classical_bias_exact
from xorgames.errors import (
    ConstructionError,
    DegeneracyError,
    DegenerateNormalizationError,
    DomainError,
)
from xorgames.game import build_perturbed_and_game
from xorgames.quantum import closed_form_region1, closed_form_region2, quantum_bias
from xorgames.strategies import (
    I2,
    X,
    Y,
    Z,
    OperatorStrategy,
    build_region1_strategy,
    build_region2_strategy,
    chsh_strategy,
    expectation_direct,
    expectation_trace,
    from_classical,
    joint_outcome_distribution,
    operator_bias,
    region1_normalizations,
    simulate_rounds,
    spectral_sign,
    validate_observable,
)


# --- observables ----------------------------------------------------------------

@pytest.mark.parametrize("o", [I2, X, Y, Z, (X + Z) / math.sqrt(2)], ids=["I", "X", "Y", "Z", "H"])
def test_valid_observables(o):
    rep = validate_observable(o)
    assert rep.passed
    assert rep.hermitian_defect <= 1e-15 and rep.involution_defect <= 1e-15


def test_scaled_pauli_fails_involution():
    rep = validate_observable(0.5 * X)
    assert not rep.passed
    assert rep.involution_defect == pytest.approx(0.75)


def test_spectral_sign_repairs_scaling():
    np.testing.assert_allclose(spectral_sign(0.3 * X + 0.4 * Z), (3 * X + 4 * Z) / 5, atol=1e-14)
    np.testing.assert_allclose(spectral_sign(np.diag([2.0, -0.1])), Z, atol=1e-15)


def test_spectral_sign_degenerate():
    with pytest.raises(DegeneracyError):
        spectral_sign(np.diag([1.0, 0.0]))


def test_spectral_sign_requires_hermitian():
    with pytest.raises(DomainError):
        spectral_sign([[0, 1], [0, 0]])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 6))
def test_spectral_sign_is_an_observable(seed, d):
    rng = np.random.default_rng(seed)
    h = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    assert validate_observable(spectral_sign(h + h.conj().T)).passed


# --- expectations -----------------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 5))
def test_trace_identity_matches_direct_contraction(seed, d):
    rng = np.random.default_rng(seed)

    def herm():
        h = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        return spectral_sign(h + h.conj().T)

    a, b = herm(), herm()
    assert abs(expectation_trace(a, b) - expectation_direct(a, b)) <= 1e-12


def test_chsh_correlations():
    s = chsh_strategy()
    c = 1 / math.sqrt(2)
    np.testing.assert_allclose(np.abs(s.correlations()), c, atol=1e-12)
    assert operator_bias(build_perturbed_and_game(1, 1), s) == pytest.approx(c, abs=1e-12)


# --- region 2 ---------------------------------------------------------------------

def test_region2_at_chsh_point():
    s = build_region2_strategy(1, 1)
    h_plus, h_minus = (X + Z) / math.sqrt(2), (X - Z) / math.sqrt(2)
    found = [any(np.allclose(o, t, atol=1e-12) for o in s.alice_ops) for t in (h_plus, h_minus)]
    assert all(found)
    assert s.report.normalization_reading in {"printed", "alternative", "spectral-sign"}


@pytest.mark.parametrize("p,q", [(0.75, 0.75), (0.9, 0.7), (1.0, 0.6), (0.8, 0.8)])
def test_region2_attains_closed_form(p, q):
    g = build_perturbed_and_game(p, q)
    bias = operator_bias(g, build_region2_strategy(p, q))
    assert bias == pytest.approx(closed_form_region2(p, q), abs=1e-9)
    assert bias >= classical_bias_exact(g).bias


def test_region2_degenerate_normalization():
    with pytest.raises(DegenerateNormalizationError):
        build_region2_strategy(0.5, 0.9)


def test_region2_outside_region():
    with pytest.raises(DomainError, match="region 2"):
        build_region2_strategy(0.6, 0.6)


def test_classical_embedding_limit():
    # at p = q = 1/2 a classical-optimal strategy, embedded as diagonal
    # observables, wins with probability 3/4
    g = build_perturbed_and_game(0.5, 0.5)
    res = classical_bias_exact(g)
    s = from_classical(res.strategy.a_signs, res.strategy.b_signs, local_dim=2)
    assert (1 + operator_bias(g, s)) / 2 == pytest.approx(0.75, abs=1e-12)


# --- region 1 ---------------------------------------------------------------------

def test_region1_at_reference_point():
    s = build_region1_strategy(0.6, 0.8)
    g = build_perturbed_and_game(0.6, 0.8)
    assert s.local_dim == 4
    assert operator_bias(g, s) == pytest.approx(closed_form_region1(0.6, 0.8), abs=1e-8)
    for b in s.bob_ops:
        np.testing.assert_allclose(b @ b, np.eye(4), atol=1e-12)
    assert 0 < s.report.beta < math.pi


@pytest.mark.parametrize("p,q", [(0.6, 0.5), (0.75, 0.5), (0.9, 0.55), (0.55, 0.85)])
def test_normalization_ratio(p, q):
    n = region1_normalizations(p, q)
    assert n["01"] / n["00"] == pytest.approx((1 - q) / q, rel=1e-14)


def test_region1_outside_region():
    with pytest.raises(DomainError, match=r"1/\(2q\) > p"):
        build_region1_strategy(0.9, 0.9)


def test_construction_error_carries_best_bias():
    err = ConstructionError("no match", best_bias=0.51)
    assert err.best_bias == 0.51


def _consistency_points(region):
    from xorgames.acceptance import interior_points

    return interior_points(region, count=10)


@pytest.mark.parametrize("p,q", _consistency_points(1))
def test_region1_consistent_with_solver(p, q):
    g = build_perturbed_and_game(p, q)
    exact = operator_bias(g, build_region1_strategy(p, q))
    assert abs(exact - closed_form_region1(p, q)) <= 1e-8
    assert abs(exact - quantum_bias(g).lower) <= 1e-6


@pytest.mark.parametrize("p,q", _consistency_points(2))
def test_region2_consistent_with_solver(p, q):
    g = build_perturbed_and_game(p, q)
    exact = operator_bias(g, build_region2_strategy(p, q))
    assert abs(exact - closed_form_region2(p, q)) <= 1e-8
    assert abs(exact - quantum_bias(g).lower) <= 1e-6


# --- sampling ---------------------------------------------------------------------

@pytest.mark.parametrize("build,pq", [(build_region1_strategy, (0.7, 0.6)), (build_region2_strategy, (0.8, 0.9))])
def test_joint_distribution_is_a_distribution(build, pq):
    joint = joint_outcome_distribution(build(*pq))
    assert joint.min() >= -1e-12
    np.testing.assert_allclose(joint.sum(axis=(2, 3)), 1, atol=1e-12)


def test_joint_distribution_reproduces_correlations():
    s = build_region1_strategy(0.7, 0.6)
    joint = joint_outcome_distribution(s)
    corr = joint[:, :, 0, 0] + joint[:, :, 1, 1] - joint[:, :, 0, 1] - joint[:, :, 1, 0]
    np.testing.assert_allclose(corr, s.correlations(), atol=1e-12)


@pytest.mark.parametrize("rounds", [10_000, 100_000, pytest.param(1_000_000, marks=pytest.mark.slow)])
def test_empirical_win_rate(rounds):
    g = build_perturbed_and_game(1, 1)
    sim = simulate_rounds(g, chsh_strategy(), rounds, seed=1)
    assert abs(sim.win_rate - math.cos(math.pi / 8) ** 2) <= 4 / math.sqrt(rounds)


def test_simulation_is_reproducible():
    g = build_perturbed_and_game(0.8, 0.9)
    s = build_region2_strategy(0.8, 0.9)
    a = simulate_rounds(g, s, 20_000, seed=5, shards=3)
    b = simulate_rounds(g, s, 20_000, seed=5, shards=3)
    assert a == b
    assert simulate_rounds(g, s, 20_000, seed=6, shards=3).wins != a.wins


def test_preview_scores_rounds():
    g = build_perturbed_and_game(0.7, 0.6)
    sim = simulate_rounds(g, build_region1_strategy(0.7, 0.6), 1000, seed=2)
    assert sim.preview
    for r in sim.preview:
        assert g.pi[r.x, r.y] > 0
        assert r.win == ((r.a ^ r.b) == g.f[r.x, r.y])


def test_deterministic_strategy_simulation_is_exact_in_expectation():
    g = build_perturbed_and_game(0.5, 0.5)
    res = classical_bias_exact(g)
    s = from_classical(res.strategy.a_signs, res.strategy.b_signs)
    sim = simulate_rounds(g, s, 50_000, seed=3)
    assert abs(sim.win_rate - 0.75) <= 4 / math.sqrt(50_000)


def test_simulation_rejects_bad_arguments():
    g = build_perturbed_and_game(1, 1)
    with pytest.raises(DomainError):
        simulate_rounds(g, chsh_strategy(), 0)
    with pytest.raises(DomainError):
        simulate_rounds(g, chsh_strategy(), 10, shards=0)
    with pytest.raises(DomainError):
        simulate_rounds(g, from_classical((1,), (1,)), 10)


# --- structure ----------------------------------------------------------------------

def test_json_round_trip():
    s = build_region1_strategy(0.7, 0.6)
    t = OperatorStrategy.from_dict(json.loads(json.dumps(s.to_dict())))
    for a, b in zip(s.alice_ops + s.bob_ops, t.alice_ops + t.bob_ops):
        np.testing.assert_array_equal(a, b)


def test_rejects_non_observable():
    with pytest.raises(DomainError):
        OperatorStrategy((0.5 * X,), (X,))
    with pytest.raises(DomainError):
        OperatorStrategy((X,), (np.eye(3),))


def test_operator_bias_size_mismatch():
    with pytest.raises(DomainError):
        operator_bias(build_perturbed_and_game(1, 1), from_classical((1, 1), (1, 1)))
