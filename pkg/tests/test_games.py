import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coreapprox.errors import CapacityError, ContractError, GameFormatError
from coreapprox.games import (MuseumMatrix, SavingsParams, TUGame, coalition_value,
                              load_game, make_additive_game, make_museum_game,
                              make_nonconvex_game, make_random_superadditive_game,
                              make_savings_game, make_unanimity_game, mask_of,
                              save_game, shapley_value)


def shapley_by_permutations(game):
    """Average marginal vector over all n! orderings."""
    n = game.n
    total = np.zeros(n)
    for perm in itertools.permutations(range(n)):
        mask = 0
        for i in perm:
            total[i] += game.values[mask | 1 << i] - game.values[mask]
            mask |= 1 << i
    return total / math.factorial(n)


def test_coalition_value_basics(g3):
    assert coalition_value(g3, 0) == 0.0
    assert coalition_value(g3, 7) == 1.0
    with pytest.raises(ContractError):
        coalition_value(g3, 8)
    with pytest.raises(ContractError):
        coalition_value(g3, -1)


def test_savings_two_players():
    game = make_savings_game(SavingsParams((3, 4), (1, 2), (1, 2)))
    assert game({1}) == 0
    assert game({2}) == 0
    assert game({1, 2}) == 2


def test_museum_micro_values(museum_micro):
    assert museum_micro({1}) == 1
    assert museum_micro({2}) == 0
    assert museum_micro({1, 2}) == 2


@pytest.mark.parametrize("coalition, expected", [
    ({1, 2}, 2 / 3), ({1, 3}, 1 / 2), ({2, 3}, 1 / 2), ({1, 2, 3}, 3 / 4), ({3}, 0.0),
])
def test_nonconvex_three_players(coalition, expected):
    assert make_nonconvex_game(3)(coalition) == pytest.approx(expected, abs=1e-15)


def test_nonconvex_ten_players():
    game = make_nonconvex_game(10)
    assert game.worth == pytest.approx(0.75, abs=1e-15)
    assert game(range(1, 10)) == pytest.approx(0.9, abs=1e-15)


@pytest.mark.parametrize("beta", [0.3, 0.75, 1.0])
def test_nonconvex_singleton_is_zero(beta):
    game = make_nonconvex_game(3, beta)
    assert game({3}) == 0.0 and game({1}) == 0.0


def test_nonconvex_rejects_bad_params():
    with pytest.raises(ContractError):
        make_nonconvex_game(1)
    with pytest.raises(ContractError):
        make_nonconvex_game(4, beta=0.0)


def test_generators_respect_invariants(savings6):
    games = [savings6, make_nonconvex_game(5), make_museum_game(MuseumMatrix.benchmark(8)),
             make_unanimity_game(4), make_additive_game([1, -2, 3.5])]
    for game in games:
        assert game.values[0] == 0.0
        assert len(game.values) == 2 ** game.n


def test_museum_monotone_exhaustive():
    game = make_museum_game(MuseumMatrix.benchmark(11))
    v = game.values
    masks = np.arange(2 ** 11)
    for i in range(11):
        without = masks[(masks >> i & 1) == 0]
        assert (v[without | 1 << i] >= v[without]).all()


def test_museum_truncation_drops_empty_visitors():
    # the fourth visitor only uses museums beyond the first two
    with pytest.warns(UserWarning, match="dropping 1"):
        mat = MuseumMatrix.benchmark(2)
    assert mat.m == 4


def test_museum_rejects_empty_visitor():
    with pytest.raises(ContractError):
        MuseumMatrix([[1, 0], [0, 0]])


def _blocks(positions):
    blocks, cur = [], [positions[0]]
    for p in positions[1:]:
        if p == cur[-1] + 1:
            cur.append(p)
        else:
            blocks.append(cur)
            cur = [p]
    return blocks + [cur]


@pytest.mark.parametrize("sigma0", [None, (3, 1, 4, 2, 6, 5, 8, 7)])
def test_savings_component_additivity(sigma0):
    params = SavingsParams((3, 4, 6, 1, 3, 4, 5, 4), (1, 2, 4, 2, 5, 2, 1, 4), sigma0)
    game = make_savings_game(params)
    order = list(params.sigma0)
    for mask in range(1, 2 ** 8):
        members = [i + 1 for i in range(8) if mask >> i & 1]
        positions = sorted(order.index(p) for p in members)
        blocks = _blocks(positions)
        if len(blocks) == 1:
            continue
        parts = sum(game(mask_of([order[p] for p in b])) for b in blocks)
        assert game(mask) == pytest.approx(parts, abs=1e-12)


def test_savings_connected_coalition_by_hand():
    # pairs in MP within {2,3,4}: alpha_j p_i - alpha_i p_j > 0
    p, a = (3, 4, 6, 1, 3, 4, 5, 4), (1, 2, 4, 2, 5, 2, 1, 4)
    game = make_savings_game(SavingsParams(p, a))
    expected = 0.0
    for i, j in itertools.permutations([1, 2, 3], 2):
        expected += max(0.0, a[j] * p[i] - a[i] * p[j])
    assert game({2, 3, 4}) == pytest.approx(expected)


def test_savings_sigma0_validation():
    with pytest.raises(ContractError):
        SavingsParams((1, 2), (1, 2), (1, 1))
    with pytest.raises(ContractError):
        SavingsParams((1, 2), (1,))


def test_shapley_symmetric(g3):
    phi = shapley_value(g3)
    np.testing.assert_allclose(phi, [1 / 3] * 3, atol=1e-12)


def test_shapley_additive(additive123):
    np.testing.assert_allclose(shapley_value(additive123), [1, 2, 3], atol=1e-12)


def test_shapley_museum_micro(museum_micro):
    np.testing.assert_allclose(shapley_value(museum_micro), [1.5, 0.5], atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_shapley_matches_permutation_average(n, seed):
    game = make_random_superadditive_game(n, np.random.default_rng(seed))
    phi = shapley_value(game)
    np.testing.assert_allclose(phi, shapley_by_permutations(game), atol=1e-10)
    assert phi.sum() == pytest.approx(game.worth, abs=1e-9)


def test_shapley_null_player(rng):
    base = make_random_superadditive_game(3, rng)
    # player 4 adds nothing to any coalition
    values = np.concatenate([base.values, base.values])
    game = TUGame(4, values)
    phi = shapley_value(game)
    assert phi[3] == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(phi[:3], shapley_value(base), atol=1e-12)


def test_shapley_capacity():
    game = TUGame(21, np.zeros(2 ** 21))
    with pytest.raises(CapacityError):
        shapley_value(game)


def test_tugame_validation():
    with pytest.raises(GameFormatError):
        TUGame(3, [0.5] + [0.0] * 7)
    with pytest.raises(GameFormatError):
        TUGame(3, [0.0] * 7)
    with pytest.raises(GameFormatError):
        TUGame(2, [0.0, 1.0, np.nan, 2.0])
    with pytest.raises(CapacityError):
        TUGame(25, [0.0])


def test_round_trip(tmp_path, g3, savings6):
    for game in (g3, savings6, make_random_superadditive_game(4, np.random.default_rng(3))):
        path = tmp_path / "g.json"
        save_game(game, path)
        back = load_game(path)
        assert back == game
        assert back.values.tobytes() == game.values.tobytes()


def test_load_rejects_nonzero_empty_coalition(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"n": 3, "label": "x", "values": [0.5, 0, 0, 0, 0, 0, 0, 1]}')
    with pytest.raises(GameFormatError, match=r"values\[0\]"):
        load_game(path)


def test_load_rejects_wrong_length(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"n": 3, "label": "x", "values": [0, 0, 0, 0, 0, 0, 1]}')
    with pytest.raises(GameFormatError, match="values"):
        load_game(path)


@pytest.mark.parametrize("text, key", [
    ('{"label": "x", "values": [0, 1]}', "n"),
    ('{"n": 1, "label": "x"}', "values"),
    ('{"n": "one", "values": [0, 1]}', "n"),
    ('{"n": 1, "values": [0, 1], "label": 3}', "label"),
    ("not json", "JSON"),
])
def test_load_names_offending_key(tmp_path, text, key):
    path = tmp_path / "bad.json"
    path.write_text(text)
    with pytest.raises(GameFormatError, match=key):
        load_game(path)


def test_saved_floats_use_17_digits(tmp_path):
    game = TUGame(1, [0.0, 0.1])
    path = tmp_path / "g.json"
    save_game(game, path)
    assert "0.10000000000000001" in path.read_text()
