import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvfloor import dea
from mvfloor.dea import (
    DeaParams,
    disturb_column,
    disturb_squares,
    exploit_column,
    exploration_counts,
    init_distribution,
    orth_exp_q,
    random_orthogonal,
    refine_q,
    rotate_pair,
    sample_column,
    sample_matrix,
    sample_p,
)

# chi-square critical value, 3 degrees of freedom, p = 0.001
CHI2_3_P001 = 16.266


def unit_columns(rng, shape):
    q = np.abs(rng.standard_normal(shape))
    return q / np.linalg.norm(q, axis=-2, keepdims=True)


def test_init_distribution_is_all_half():
    q = init_distribution(1, 1)
    assert q.shape == (1, 4, 1)
    assert np.all(q == 0.5)
    assert np.linalg.norm(q[0, :, 0]) == pytest.approx(1.0)
    assert np.all(q[0] ** 2 == 0.25)
    five = init_distribution(7, 5)
    assert five.shape == (5, 4, 7)
    assert all(np.array_equal(five[0], five[i]) for i in range(5))


def test_degenerate_columns_sample_deterministically(rng):
    assert {sample_column(np.array([1.0, 0, 0, 0]), rng) for _ in range(200)} == {0}
    assert {sample_column(np.array([0, 0, 0, 1.0]), rng) for _ in range(200)} == {3}
    q = np.zeros((4, 4))
    q[np.arange(4), np.arange(4)] = 1.0
    for _ in range(50):
        assert list(sample_matrix(q, rng)) == [0, 1, 2, 3]


@pytest.mark.parametrize("sampler", ["column", "matrix"])
def test_uniform_column_frequencies(sampler):
    rng = np.random.default_rng(99)
    draws = 100_000
    if sampler == "column":
        codes = np.array([sample_column(np.full(4, 0.5), rng) for _ in range(draws)])
    else:
        codes = sample_matrix(np.full((4, draws), 0.5), rng)
    counts = np.bincount(codes, minlength=4)
    expected = draws / 4
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    assert chi2 < CHI2_3_P001


def test_skewed_column_frequencies():
    rng = np.random.default_rng(5)
    col = np.sqrt(np.array([0.1, 0.2, 0.3, 0.4]))
    codes = sample_matrix(np.repeat(col[:, None], 100_000, axis=1), rng)
    counts = np.bincount(codes, minlength=4)
    expected = 100_000 * np.array([0.1, 0.2, 0.3, 0.4])
    assert float(np.sum((counts - expected) ** 2 / expected)) < CHI2_3_P001


def test_random_orthogonal_is_a_rotation(rng):
    for _ in range(100):
        m = random_orthogonal(rng)
        np.testing.assert_allclose(m @ m.T, np.eye(4), atol=1e-12)
        assert np.linalg.det(m) == pytest.approx(1.0)
        col = unit_columns(rng, (4, 1))[:, 0]
        assert np.linalg.norm(m @ col) == pytest.approx(1.0, abs=1e-12)


def test_identity_map_leaves_column_unchanged():
    col = np.array([0.5, 0.5, 0.5, 0.5])
    assert np.array_equal(np.eye(4) @ col, col)


@pytest.mark.parametrize("np_, n, expected", [(5, 10, (2, 1)), (5, 30, (2, 3)), (1, 5, (0, 1)), (6, 300, (3, 30))])
def test_exploration_ranges(np_, n, expected):
    assert exploration_counts(np_, n) == expected


def test_orth_exp_keeps_the_best_member_and_unit_norms(rng):
    Q = unit_columns(rng, (5, 4, 12))
    fitness = [3.0, 1.0, 9.0, 2.0, 7.0]
    for _ in range(50):
        out = orth_exp_q(Q, fitness, rng)
        assert np.array_equal(out[1], Q[1])
        assert np.all(out >= 0)
        np.testing.assert_allclose(np.linalg.norm(out, axis=1), 1.0, atol=1e-12)
        changed = [i for i in range(5) if not np.array_equal(out[i], Q[i])]
        # only the worst members change: at most np // 2 of them, never the best three
        assert set(changed) <= {2, 4}


def test_orth_exp_with_a_single_member_is_identity(rng):
    Q = unit_columns(rng, (1, 4, 6))
    assert np.array_equal(orth_exp_q(Q, [0.0], rng), Q)


def test_sample_p_boundary_rates():
    rng = np.random.default_rng(3)
    Q = np.zeros((2, 4, 6))
    Q[:, 2, :] = 1.0
    P = np.zeros((2, 6), dtype=np.int8)
    fresh = sample_p(Q, P, 1.0, [np.random.default_rng(i) for i in range(2)])
    assert np.all(fresh == 2)
    kept = sample_p(Q, P, 0.0, [np.random.default_rng(i) for i in range(2)])
    assert np.all(kept == 0)
    mixed = sample_p(Q, P, 0.5, [rng, rng])
    assert set(np.unique(mixed)) <= {0, 2}


def test_exploit_column_documented_values():
    out = exploit_column(np.full(4, 0.5), 2, 0.2)
    assert out[2] == pytest.approx(math.sqrt(0.4))
    assert out[2] == pytest.approx(0.63246, abs=5e-6)
    for k in (0, 1, 3):
        assert out[k] == pytest.approx(math.sqrt(0.2))
        assert out[k] == pytest.approx(0.44721, abs=5e-6)
    assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-15)


def test_zero_rotation_is_identity():
    col = np.array([0.1, 0.7, 0.1, math.sqrt(1 - 0.51)])
    assert np.allclose(rotate_pair(col, 1, 3, 0.0), col)
    assert np.array_equal(rotate_pair(col, 2, 2, 0.7), col)


def test_disturbance_documented_values():
    sq = disturb_squares(np.full(4, 0.5), 0, 0.5)
    assert sq[0] == pytest.approx(0.125 / 0.875)
    assert sq[0] == pytest.approx(0.142857, abs=5e-7)
    assert sq.sum() == pytest.approx(1.0, abs=1e-15)


@settings(max_examples=300)
@given(
    raw=st.lists(st.floats(0.0, 1.0), min_size=4, max_size=4).filter(lambda v: sum(v) > 1e-3),
    code=st.integers(0, 3),
    lam=st.floats(0.01, 0.99),
    alpha=st.floats(0.01, 0.99),
)
def test_column_updates_preserve_unit_norm(raw, code, lam, alpha):
    col = np.array(raw) / np.linalg.norm(raw)
    assert float(np.sum(disturb_squares(col, code, lam))) == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.norm(disturb_column(col, code, lam)) == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.norm(exploit_column(col, code, alpha)) == pytest.approx(1.0, abs=1e-12)


def test_long_random_update_sequences_keep_columns_unit():
    rng = np.random.default_rng(11)
    params = DeaParams()
    Q = unit_columns(rng, (5, 4, 10))
    for step in range(2000):
        if step % 2:
            Q = orth_exp_q(Q, rng.random(5), rng)
        else:
            P = rng.integers(0, 4, (5, 10))
            Pn = rng.integers(0, 4, (5, 10))
            Q = refine_q(Pn, P, Q, params, [rng] * 5)
    np.testing.assert_allclose(np.linalg.norm(Q, axis=1), 1.0, atol=1e-9)
    assert np.all((Q >= 0) & (Q <= 1 + 1e-12))


def test_refine_moves_mass_toward_the_retained_code():
    params = DeaParams(p0=1.0, dtheta_max=0.0)
    Q = init_distribution(4, 1)
    P = np.array([[0, 1, 2, 3]])
    out = refine_q(P, P, Q, params, [np.random.default_rng(0)])
    for j in range(4):
        assert int(np.argmax(out[0, :, j])) == j


def test_member_streams_are_reproducible_and_distinct():
    a = dea.member_rng(7, 3, 1).random(4)
    b = dea.member_rng(7, 3, 1).random(4)
    c = dea.member_rng(7, 3, 2).random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


@pytest.mark.parametrize(
    "kwargs",
    [dict(np=0), dict(alpha0=0), dict(alpha0=1), dict(lambda_d=1.5), dict(p0=-0.1), dict(r_inherit=0)],
)
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        DeaParams(**kwargs)
