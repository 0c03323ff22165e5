import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xorgames.errors import DomainError
from xorgames.game import (
    BitString,
    KnowledgeSpec,
    XorGame,
    and_sum_game,
    build_distributed_game,
    build_magic_square_game,
    build_perturbed_and_game,
    marginals,
    sum_games,
    sum_many,
    trivial_game,
)

from .oracles import and_game_by_sampling_rules, eq6_coefficients, magic_square_total

probs = st.floats(min_value=0.5, max_value=1.0)


def assert_valid(g, atol=1e-12):
    assert np.all(g.pi >= 0)
    assert abs(g.pi.sum() - 1) <= atol
    assert abs(np.abs(g.cost).sum() - 1) <= atol
    np.testing.assert_array_equal(np.abs(g.cost), g.pi)


def idx(bits):
    return int("".join(map(str, bits)), 2)


# --- BitString ----------------------------------------------------------------

def test_bitstring_big_endian():
    b = BitString.from_bits([1, 0, 1])
    assert b.value == 5 and b.width == 3
    assert b.bits == (1, 0, 1)
    assert b.bit(1) == 1 and b.bit(2) == 0
    assert str(b) == "101"
    assert (b ^ BitString(0b011, 3)).bits == (1, 1, 0)


def test_bitstring_rejects_overflow():
    with pytest.raises(DomainError):
        BitString(8, 3)


# --- perturbed AND ------------------------------------------------------------

@given(probs, probs)
def test_perturbed_and_matches_eq6_table(p, q):
    g = build_perturbed_and_game(p, q)
    np.testing.assert_allclose(g.cost, eq6_coefficients(p, q), atol=1e-15)
    assert_valid(g)


@given(probs, probs)
def test_perturbed_and_matches_sampling_rules(p, q):
    g = build_perturbed_and_game(p, q)
    expected = np.zeros((4, 4))
    for (x, y), w in and_game_by_sampling_rules(p, q).items():
        expected[idx(x), idx(y)] += w
    np.testing.assert_allclose(g.pi, expected, atol=1e-15)
    for x in range(4):
        for y in range(4):
            z1 = (x >> 1) ^ (y >> 1)
            z2 = (x & 1) ^ (y & 1)
            assert g.f[x, y] == z1 * z2


def test_unperturbed_and_is_uniform():
    g = build_perturbed_and_game(0.5, 0.5)
    np.testing.assert_allclose(np.abs(g.cost), 1 / 16, atol=0)


def test_full_knowledge_is_chsh_support():
    g = build_perturbed_and_game(1, 1)
    nz = np.argwhere(g.pi > 0)
    assert len(nz) == 4
    assert np.all(np.abs(g.cost[g.pi > 0]) == 0.25)
    for x, y in nz:
        assert (y >> 1) == 0  # y1 = 0
        assert (x & 1) == 0  # x2 = 0


def test_perturbed_and_first_coefficient():
    g = build_perturbed_and_game(0.75, 0.5)
    assert g.cost[0, 0] == pytest.approx(0.09375, abs=1e-15)


@pytest.mark.parametrize("p,q", [(0.49, 0.7), (0.7, 1.01), (-1, 0.5), (0.6, float("nan"))])
def test_perturbed_and_rejects_out_of_range(p, q):
    with pytest.raises(DomainError):
        build_perturbed_and_game(p, q)


# --- distributed family -------------------------------------------------------

def and_spec(p, q, dist=None):
    return KnowledgeSpec(2, ("A", "B"), (p, q), (0, 0, 0, 1), dist)


@given(probs, probs)
def test_distributed_and_equals_perturbed_builder(p, q):
    np.testing.assert_allclose(
        build_distributed_game(and_spec(p, q)).cost, build_perturbed_and_game(p, q).cost, atol=1e-15
    )


@settings(max_examples=30)
@given(st.integers(1, 3), st.data())
def test_no_knowledge_gives_uniform_pi(n_bits, data):
    g_table = data.draw(st.lists(st.integers(0, 1), min_size=2**n_bits, max_size=2**n_bits))
    sides = data.draw(st.lists(st.sampled_from("AB"), min_size=n_bits, max_size=n_bits))
    spec = KnowledgeSpec(n_bits, tuple(sides), (0.5,) * n_bits, tuple(g_table))
    assert spec.no_knowledge
    g = build_distributed_game(spec)
    np.testing.assert_allclose(g.pi, 4.0**-n_bits, atol=1e-15)
    assert_valid(g)


@settings(max_examples=30)
@given(st.integers(1, 3), st.data())
def test_no_knowledge_pi_depends_only_on_xor(n_bits, data):
    size = 2**n_bits
    weights = data.draw(st.lists(st.floats(0.01, 1), min_size=size, max_size=size))
    dist = tuple(np.array(weights) / sum(weights))
    g_table = tuple(data.draw(st.lists(st.integers(0, 1), min_size=size, max_size=size)))
    sides = tuple(data.draw(st.lists(st.sampled_from("AB"), min_size=n_bits, max_size=n_bits)))
    g = build_distributed_game(KnowledgeSpec(n_bits, sides, (0.5,) * n_bits, g_table, dist))
    a, b = marginals(g)
    np.testing.assert_allclose(a, 1 / size, atol=1e-12)
    np.testing.assert_allclose(b, 1 / size, atol=1e-12)
    for s in range(size):
        for x in range(size):
            for y in range(size):
                assert g.pi[x, y] == pytest.approx(g.pi[x ^ s, y ^ s], abs=1e-15)
                assert g.f[x, y] == g_table[x ^ y]


def test_distributed_single_bit_full_knowledge():
    g = build_distributed_game(KnowledgeSpec(1, ("A",), (1.0,), (0, 1)))
    assert np.all(g.pi[:, 1] == 0)
    assert g.f[0, 0] == 0 and g.f[1, 0] == 1


def test_knowledge_spec_validation():
    with pytest.raises(DomainError):
        KnowledgeSpec(2, ("A", "B"), (0.5, 0.5), (0, 1))
    with pytest.raises(DomainError):
        KnowledgeSpec(1, ("A",), (0.4,), (0, 1))
    with pytest.raises(DomainError):
        KnowledgeSpec(1, ("C",), (0.5,), (0, 1))
    with pytest.raises(DomainError):
        KnowledgeSpec(1, ("A",), (0.5,), (0, 1), (0.7, 0.7))
    assert not KnowledgeSpec(1, ("A",), (0.6,), (0, 1)).no_knowledge


def test_knowledge_spec_from_file(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps({"n_bits": 2, "partition": ["A", "B"], "probs": [0.7, 0.6], "g": [0, 0, 0, 1]}))
    g = build_distributed_game(KnowledgeSpec.load(path))
    np.testing.assert_allclose(g.cost, build_perturbed_and_game(0.7, 0.6).cost, atol=1e-15)


# --- sums ---------------------------------------------------------------------

def small_game(rng, m, n):
    pi = rng.dirichlet(np.ones(m * n)).reshape(m, n)
    return XorGame(pi, rng.integers(0, 2, (m, n)))


def test_sum_of_and_with_itself():
    g = build_perturbed_and_game(0.5, 0.5)
    s = sum_games(g, g)
    assert (s.m, s.n) == (16, 16)
    assert_valid(s)
    np.testing.assert_allclose(s.cost, np.kron(g.cost, g.cost), atol=0)


def test_trivial_game_is_sum_identity():
    g = build_perturbed_and_game(0.7, 0.6)
    np.testing.assert_array_equal(sum_games(g, trivial_game()).cost, g.cost)
    np.testing.assert_array_equal(sum_games(trivial_game(), g).cost, g.cost)


def test_sum_targets_xor():
    rng = np.random.default_rng(3)
    g1, g2 = small_game(rng, 2, 3), small_game(rng, 3, 2)
    s = sum_games(g1, g2)
    for x1 in range(2):
        for y1 in range(3):
            for x2 in range(3):
                for y2 in range(2):
                    x, y = x1 * 3 + x2, y1 * 2 + y2
                    assert s.f[x, y] == g1.f[x1, y1] ^ g2.f[x2, y2]
                    assert s.pi[x, y] == pytest.approx(g1.pi[x1, y1] * g2.pi[x2, y2], abs=1e-16)


@settings(max_examples=25)
@given(st.integers(0, 10_000))
def test_sum_is_associative(seed):
    rng = np.random.default_rng(seed)
    g1, g2, g3 = (small_game(rng, *rng.integers(1, 4, 2)) for _ in range(3))
    left = sum_games(sum_games(g1, g2), g3)
    right = sum_games(g1, sum_games(g2, g3))
    np.testing.assert_allclose(left.cost, right.cost, atol=1e-16)
    np.testing.assert_array_equal(left.f, right.f)


def test_and_sum_game_k2_is_double_sum():
    g = build_perturbed_and_game(0.5, 0.5)
    np.testing.assert_array_equal(and_sum_game(2).cost, sum_many([g, g]).cost)
    assert and_sum_game(2).m == 16


# --- magic square and marginals -----------------------------------------------

def test_magic_square_entries():
    g = build_magic_square_game()
    assert magic_square_total() == 136
    assert g.pi[0, 0] == pytest.approx(4 / 136, abs=1e-16)
    assert g.pi.sum() == pytest.approx(1, abs=1e-12)
    np.testing.assert_allclose(g.pi.sum(axis=0), 34 / 136, atol=1e-15)
    np.testing.assert_allclose(g.pi.sum(axis=1), 34 / 136, atol=1e-15)
    np.testing.assert_array_equal(g.f, build_perturbed_and_game(0.5, 0.5).f)
    assert_valid(g)


@pytest.mark.parametrize(
    "game",
    [build_magic_square_game(), build_perturbed_and_game(0.5, 0.5)],
    ids=["magic", "and-half"],
)
def test_uniform_marginals(game):
    a, b = marginals(game)
    np.testing.assert_allclose(a, 0.25, atol=1e-12)
    np.testing.assert_allclose(b, 0.25, atol=1e-12)


def test_chsh_marginals():
    # column sums of the sampling-rule oracle at p = q = 1
    bob = np.zeros(4)
    alice = np.zeros(4)
    for (x, y), w in and_game_by_sampling_rules(1.0, 1.0).items():
        alice[idx(x)] += w
        bob[idx(y)] += w
    a, b = marginals(build_perturbed_and_game(1, 1))
    np.testing.assert_allclose(a, alice, atol=1e-15)
    np.testing.assert_allclose(b, bob, atol=1e-15)
    # big-endian: Bob's forced y1 = 0 keeps indices 0, 1; Alice's forced x2 = 0 keeps 0, 2
    np.testing.assert_allclose(b, [0.5, 0.5, 0, 0], atol=1e-15)
    np.testing.assert_allclose(a, [0.5, 0, 0.5, 0], atol=1e-15)


# --- validation and serialization ----------------------------------------------

def test_game_validation():
    with pytest.raises(DomainError):
        XorGame(np.full((2, 2), 0.3), np.zeros((2, 2)))
    with pytest.raises(DomainError):
        XorGame(np.array([[1.5, -0.5]]), np.zeros((1, 2)))
    with pytest.raises(DomainError):
        XorGame(np.full((2, 2), 0.25), np.full((2, 2), 2))
    with pytest.raises(DomainError):
        XorGame(np.array([[np.nan, 1.0]]), np.zeros((1, 2)))


def test_game_is_immutable():
    g = build_perturbed_and_game(0.6, 0.6)
    with pytest.raises(ValueError):
        g.cost[0, 0] = 1.0


def test_json_round_trip_recomputes_cost():
    g = build_perturbed_and_game(0.8, 0.6)
    doc = json.loads(g.to_json())
    assert set(doc) == {"label", "m", "n", "pi", "f"}
    assert len(doc["pi"]) == 16
    back = XorGame.from_json(g.to_json())
    np.testing.assert_array_equal(back.cost, g.cost)
    assert back.label == g.label


def test_json_rejects_malformed():
    with pytest.raises(DomainError):
        XorGame.from_dict({"m": 2, "n": 2, "pi": [1.0], "f": [0]})


@settings(max_examples=25)
@given(st.permutations(range(4)), st.permutations(range(4)))
def test_permutation_relabels_rows_and_columns(rows, cols):
    g = build_perturbed_and_game(0.7, 0.6)
    h = g.permuted(rows, cols)
    np.testing.assert_array_equal(h.cost, g.cost[np.ix_(rows, cols)])
