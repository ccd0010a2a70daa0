import numpy as np
import pytest

from gsf.exactla import rank
from gsf.extremal import (
    RhoDecomposition,
    block_construction,
    construct_regular_rep_subspace,
    construct_symmetric_witness,
    exhaustive_search,
    gaussian_binomial,
    greedy_search,
    real_mu_interval,
    rho,
    rho_decompose,
    _iter_rref_bases,
)
from gsf.ffield import Gf
from gsf.formspace import BudgetExceededError


SPOT_RHO = {1: 1, 2: 2, 4: 4, 8: 8, 16: 9, 32: 10, 64: 12}


def test_rho_spot_values():
    for n, want in SPOT_RHO.items():
        assert rho(n) == want


def test_rho_odd_is_one():
    for n in range(1, 200, 2):
        assert rho(n) == 1


def test_rho_decomposition_reconstructs():
    for n in range(1, 3000):
        dec = rho_decompose(n)
        assert dec.odd_part * 2 ** (dec.c + 4 * dec.d) == n
        assert 0 <= dec.c <= 3 and dec.odd_part % 2 == 1


def test_rho_bounded_by_n_with_equality_set():
    equal = [n for n in range(1, 2**16 + 1) if rho(n) == n]
    assert equal == [1, 2, 4, 8]
    assert all(rho(n) <= n for n in range(1, 2**16 + 1))


def test_rho_decomposition_validation():
    with pytest.raises(ValueError):
        RhoDecomposition(12, 3, 4, 0)
    with pytest.raises(ValueError):
        rho_decompose(0)


def test_real_mu_interval_table():
    assert real_mu_interval(2) == (1, 2)
    assert real_mu_interval(4) == (2, 4)
    assert real_mu_interval(8) == (4, 8)
    assert real_mu_interval(16) == (8, 8)  # c = 0, d = 1
    assert real_mu_interval(32) == (9, 10)
    for n in (1, 3, 7, 15):
        assert real_mu_interval(n) == (1, 1)


def test_real_mu_interval_sits_below_rho():
    for n in range(1, 512):
        lo, hi = real_mu_interval(n)
        assert lo <= hi <= rho(n) or n % 2 == 1


def test_regular_rep_witness_gf9(tower):
    res = construct_regular_rep_subspace(tower(3, 1, 2))
    assert res.best_dim == 2 and res.verified and res.mode == {"mode": "exhaustive"}
    # the identity matrix is the image of 1, so it lies in the span
    flat = np.stack([np.asarray(m).reshape(-1) for m in res.witness_basis])
    with_id = np.vstack([flat, np.eye(2, dtype=np.int64).reshape(1, -1)])
    assert rank(Gf(3), with_id) == rank(Gf(3), flat)


def test_regular_rep_is_multiplicative(tower):
    t = tower(3, 1, 4)
    rng = np.random.default_rng(61)

    def mat_of(a):
        m = np.zeros((4, 4), dtype=np.int64)
        for k in range(4):
            m[:, k] = t.mul(a, t.basis_element(k))
        return m

    for _ in range(15):
        a, b = rng.integers(0, 3, size=4), rng.integers(0, 3, size=4)
        assert np.array_equal((mat_of(a) @ mat_of(b)) % 3, mat_of(t.mul(a, b)))


def test_symmetric_witness_gf9(tower):
    res = construct_symmetric_witness(tower(3, 1, 2))
    assert res.best_dim == 2 and res.verified
    for m in res.witness_basis:
        m = np.asarray(m)
        assert np.array_equal(m, m.T)


@pytest.mark.parametrize("p,s,n", [(3, 1, 3), (3, 1, 4), (5, 1, 2), (3, 2, 2)])
def test_witnesses_reach_the_column_bound(p, s, n, tower):
    t = tower(p, s, n)
    assert construct_regular_rep_subspace(t).best_dim == n
    assert construct_symmetric_witness(t).best_dim == n


def test_witness_sampled_fallback_over_budget(tower):
    t = tower(3, 1, 6)
    res = construct_regular_rep_subspace(t, budget=100, sample_count=200, seed=4)
    assert res.best_dim == 6 and not res.verified
    assert res.mode["mode"] == "sampled"


def test_block_construction_m1_swap():
    base = construct_regular_rep_subspace(_tower_trivial())
    lifted = block_construction(base)
    assert lifted.n == 2 and lifted.best_dim == 1 and lifted.verified
    assert [m.tolist() for m in lifted.witness_basis] == [[[0, 1], [1, 0]]]


def _tower_trivial():
    from gsf.ffield import FieldTower

    return FieldTower(3, 1, 1)


def test_block_construction_preserves_dimension(tower):
    base = construct_regular_rep_subspace(tower(3, 1, 2))
    lifted = block_construction(base)
    assert lifted.best_dim == base.best_dim == 2
    assert lifted.n == 4 and lifted.target == "mu"
    for m in lifted.witness_basis:
        m = np.asarray(m)
        assert np.array_equal(m, m.T)
        assert not m[:2, :2].any() and not m[2:, 2:].any()


def test_block_construction_rejects_unverified(tower):
    base = construct_regular_rep_subspace(tower(3, 1, 6), budget=100)
    assert not base.verified
    with pytest.raises(ValueError):
        block_construction(base)


def test_gaussian_binomial_values():
    assert gaussian_binomial(4, 2, 3) == 130
    assert gaussian_binomial(4, 3, 3) == 40
    assert gaussian_binomial(3, 2, 3) == 13
    assert gaussian_binomial(5, 0, 3) == 1
    assert gaussian_binomial(3, 4, 3) == 0


def test_rref_enumeration_count_matches_gaussian_binomial():
    count = sum(1 for _ in _iter_rref_bases(3, 4, 2))
    assert count == 130
    seen = set()
    for b in _iter_rref_bases(3, 3, 2):
        seen.add(b.tobytes())
    assert len(seen) == 13  # all distinct canonical bases


def test_exhaustive_search_tau_2_3():
    res = exhaustive_search("tau", 2, 3)
    assert res.best_dim == 2
    assert 3 in res.dims_exhausted  # no 3-dimensional invertible-closed subspace
    assert res.verified


def test_exhaustive_search_mu_2_3():
    res = exhaustive_search("mu", 2, 3)
    assert res.best_dim == 2 and res.dims_exhausted == [3]


def test_exhaustive_search_budget_refusal():
    with pytest.raises(BudgetExceededError):
        exhaustive_search("tau", 3, 3, budget=1000)


def test_exhaustive_search_rejects_bad_target():
    with pytest.raises(ValueError):
        exhaustive_search("nu", 2, 3)


def test_greedy_finds_full_dimension_mu_4_3():
    res = greedy_search("mu", 4, 3, seed=0, restarts=0)
    assert res.best_dim == 4 and res.verified
    for m in res.witness_basis:
        m = np.asarray(m)
        assert np.array_equal(m, m.T)


def test_greedy_deterministic_and_bounded():
    a = greedy_search("tau", 3, 3, seed=2, restarts=0)
    b = greedy_search("tau", 3, 3, seed=2, restarts=0)
    assert a.to_dict() == b.to_dict()
    assert a.best_dim <= 3
    c = greedy_search("tau", 3, 3, seed=2, restarts=2)
    assert c.best_dim >= a.best_dim


def test_greedy_matches_construction_on_small_grid():
    for n, q in [(2, 3), (3, 3), (2, 5)]:
        res = greedy_search("tau", n, q, seed=1, restarts=1)
        assert res.best_dim == n
