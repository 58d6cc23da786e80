from fractions import Fraction

import numpy as np
import pytest

from kaddshap import (
    Coalition,
    Game,
    InteractionVector,
    UnsupportedRepresentationError,
    bernoulli_numbers,
    build_transform_matrix,
    enumerate_powerset,
    gamma_coefficient,
    game_to_interactions,
    interaction_general,
    interaction_pair,
    interactions_to_game,
    is_k_additive,
    shapley_exact,
)

# The 8x8 transform for three attributes, columns ordered
# I(empty), phi1..phi3, I12, I13, I23, I123; rows in cardinal-lex order.
T3_EXPECTED = [
    [1, "-1/2", "-1/2", "-1/2", "1/6", "1/6", "1/6", "0"],
    [1, "1/2", "-1/2", "-1/2", "-1/3", "-1/3", "1/6", "1/6"],
    [1, "-1/2", "1/2", "-1/2", "-1/3", "1/6", "-1/3", "1/6"],
    [1, "-1/2", "-1/2", "1/2", "1/6", "-1/3", "-1/3", "1/6"],
    [1, "1/2", "1/2", "-1/2", "1/6", "-1/3", "-1/3", "-1/6"],
    [1, "1/2", "-1/2", "1/2", "-1/3", "1/6", "-1/3", "-1/6"],
    [1, "-1/2", "1/2", "1/2", "-1/3", "-1/3", "1/6", "-1/6"],
    [1, "1/2", "1/2", "1/2", "1/6", "1/6", "1/6", "0"],
]


def random_game(m, rng):
    return Game.dense(m, rng.normal(size=2**m))


def test_bernoulli_numbers():
    eta = bernoulli_numbers(4)
    assert eta[0] == 1.0
    assert eta[1] == -0.5
    assert eta[2] == pytest.approx(1 / 6, abs=1e-15)
    assert eta[3] == 0.0


def test_gamma_coefficients():
    assert gamma_coefficient(0, 0) == 1.0
    assert gamma_coefficient(1, 1) == 0.5
    assert gamma_coefficient(2, 1) == pytest.approx(-1 / 3, abs=1e-15)
    assert gamma_coefficient(3, 3) == 0.0


def test_gamma_rejects_bad_orders():
    with pytest.raises(ValueError):
        gamma_coefficient(1, 2)


def test_transform_matrix_m3_exact():
    order = enumerate_powerset(3)
    t = build_transform_matrix(order.masks, 3, 3)
    expected = [[Fraction(v) for v in row] for row in T3_EXPECTED]
    assert t.as_fractions() == expected
    assert np.allclose(t.values, [[float(v) for v in row] for row in expected])


def test_transform_matrix_k2_drops_last_column():
    order = enumerate_powerset(3)
    full = build_transform_matrix(order.masks, 3, 3)
    truncated = build_transform_matrix(order.masks, 3, 2)
    assert truncated.values.shape == (8, 7)
    assert np.array_equal(truncated.values, full.values[:, :7])


def test_transform_matrix_m1():
    t = build_transform_matrix([0, 1], 1, 1)
    assert np.allclose(t.values, [[1.0, -0.5], [1.0, 0.5]])


def test_transform_first_column_is_ones():
    order = enumerate_powerset(4)
    t = build_transform_matrix(order.masks, 4, 3)
    assert np.all(t.values[:, 0] == 1.0)


def test_interactions_to_game_unit_vector():
    values = np.zeros(8)
    values[1] = 1.0  # phi_1
    game = interactions_to_game(InteractionVector(m=3, k=3, values=values))
    for coalition in enumerate_powerset(3):
        expected = 0.5 if coalition.contains(0) else -0.5
        assert game.value(coalition) == expected


def test_interactions_to_game_zero():
    game = interactions_to_game(InteractionVector(m=3, k=3, values=np.zeros(8)))
    assert np.all(game.payoffs == 0.0)


@pytest.mark.parametrize("m", range(1, 9))
def test_transform_roundtrip_identity(m):
    rng = np.random.default_rng(100 + m)
    game = random_game(m, rng)
    back = interactions_to_game(game_to_interactions(game, k=m))
    assert np.max(np.abs(back.payoffs - game.payoffs)) < 1e-10


def test_shapley_hand_example():
    phi = shapley_exact(Game.dense(2, [0.0, 1.0, 2.0, 4.0]))
    assert phi == pytest.approx([1.5, 2.5], abs=1e-12)


def test_shapley_additive_game():
    w = np.array([0.2, 0.3, 0.5])
    order = enumerate_powerset(3)
    payoffs = [sum(w[j] for j in c.members()) for c in order]
    assert shapley_exact(Game.dense(3, payoffs)) == pytest.approx(w, abs=1e-12)


def test_shapley_symmetric_game():
    order = enumerate_powerset(3)
    payoffs = [c.cardinality() ** 2 for c in order]
    assert shapley_exact(Game.dense(3, payoffs)) == pytest.approx([3, 3, 3], abs=1e-12)


def test_shapley_rejects_sparse():
    sparse = Game.sparse(3, {0: 0.0, 7: 1.0})
    with pytest.raises(UnsupportedRepresentationError):
        shapley_exact(sparse)


def test_interaction_pair_hand_example():
    assert interaction_pair(Game.dense(2, [0, 1, 2, 4]), 0, 1) == pytest.approx(1.0)


def test_interaction_pair_additive_is_zero():
    order = enumerate_powerset(3)
    payoffs = [0.4 * c.contains(0) + 0.6 * c.contains(2) for c in order]
    game = Game.dense(3, payoffs)
    for j, jp in [(0, 1), (0, 2), (1, 2)]:
        assert interaction_pair(game, j, jp) == pytest.approx(0.0, abs=1e-12)


def test_interaction_pair_max_game():
    # both singletons already achieve the full payoff: redundant pair
    assert interaction_pair(Game.dense(2, [0, 1, 1, 1]), 0, 1) == pytest.approx(-1.0)


def test_interaction_pair_rejects_equal_indices():
    with pytest.raises(ValueError):
        interaction_pair(Game.dense(2, [0, 1, 2, 4]), 1, 1)


def test_interaction_general_specializations():
    game = Game.dense(2, [0, 1, 2, 4])
    assert interaction_general(game, 0b01) == pytest.approx(1.5, abs=1e-12)
    assert interaction_general(game, 0b11) == pytest.approx(
        interaction_pair(game, 0, 1), abs=1e-12
    )


def test_interaction_general_zero_game():
    game = Game.dense(3, np.zeros(8))
    for coalition in enumerate_powerset(3):
        assert interaction_general(game, coalition) == 0.0


def test_interaction_general_empty_set_m1():
    assert interaction_general(Game.dense(1, [0.0, 1.0]), 0) == pytest.approx(0.5)


@pytest.mark.parametrize("m", [2, 3, 5])
def test_game_to_interactions_matches_general_coordinatewise(m):
    rng = np.random.default_rng(7 * m)
    game = random_game(m, rng)
    vector = game_to_interactions(game, k=m)
    for i, mask in enumerate(vector.masks()):
        assert vector.values[i] == pytest.approx(
            interaction_general(game, mask), abs=1e-12
        )


def test_interactions_to_game_respects_dense_cap():
    from kaddshap import SizeLimitError

    m = 27
    vector = InteractionVector(m=m, k=1, values=np.zeros(1 + m))
    with pytest.raises(SizeLimitError):
        interactions_to_game(vector)


def test_is_k_additive():
    order = enumerate_powerset(3)
    additive = Game.dense(3, [sum(0.3 for _ in c.members()) for c in order])
    assert is_k_additive(additive, 1)
    assert not is_k_additive(Game.dense(2, [0, 1, 2, 4]), 1)
    rng = np.random.default_rng(3)
    any_game = random_game(3, rng)
    assert is_k_additive(any_game, 3)


# --- properties ---------------------------------------------------------


@pytest.mark.parametrize("m", range(2, 11))
def test_efficiency(m):
    rng = np.random.default_rng(m)
    game = random_game(m, rng)
    phi = shapley_exact(game)
    gap = abs(phi.sum() - (game.value((1 << m) - 1) - game.value(0)))
    assert gap < 1e-9


def test_symmetry():
    # payoff depends only on whether {0,1} intersects and on member count
    order = enumerate_powerset(3)
    payoffs = [c.cardinality() + 2.0 * (c.contains(0) or c.contains(1)) for c in order]
    phi = shapley_exact(Game.dense(3, payoffs))
    assert abs(phi[0] - phi[1]) < 1e-12


def test_dummy_player():
    rng = np.random.default_rng(11)
    base = random_game(3, rng)
    order = enumerate_powerset(4)
    # attribute 3 never changes the payoff
    payoffs = [base.value(c.mask & 0b111) for c in order]
    phi = shapley_exact(Game.dense(4, payoffs))
    assert abs(phi[3]) < 1e-12


def test_linearity():
    rng = np.random.default_rng(12)
    g1, g2 = random_game(5, rng), random_game(5, rng)
    alpha, beta = 0.7, -1.3
    combined = Game.dense(5, alpha * g1.payoffs + beta * g2.payoffs)
    lhs = shapley_exact(combined)
    rhs = alpha * shapley_exact(g1) + beta * shapley_exact(g2)
    assert np.max(np.abs(lhs - rhs)) < 1e-10


@pytest.mark.parametrize("m", [2, 4, 6])
def test_singleton_interactions_equal_shapley(m):
    rng = np.random.default_rng(m + 40)
    game = random_game(m, rng)
    vector = game_to_interactions(game, k=1)
    assert np.max(np.abs(vector.shapley_values() - shapley_exact(game))) < 1e-12
