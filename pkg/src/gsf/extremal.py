"""Invertible-closed subspaces of M(n, K) and S(n, K): witnesses and searches.

A subspace is invertible-closed when every nonzero member has full rank.
Over a finite field the regular representation of the degree-n extension
gives an n-dimensional witness inside the full matrix space, and the
untwisted trace forms give one inside the symmetric matrices, both of the
maximal possible dimension n.  An exhaustive search over canonical echelon
representatives double-checks maximality on tiny instances, and a seeded
greedy search scouts larger ones.

Also includes the closed-form calculators for the real-field analogues:
the Radon-Hurwitz number and the interval it pins for symmetric spaces.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from gsf.exactla import rank_many, rref
from gsf.ffield import FieldTower, Gf, prime_power_decompose
from gsf.formspace import BudgetExceededError, DEFAULT_BUDGET, flatten_sym, gram_basis, unflatten_sym

__all__ = [
    "RhoDecomposition",
    "SearchResult",
    "rho",
    "rho_decompose",
    "real_mu_interval",
    "block_construction",
    "construct_regular_rep_subspace",
    "construct_symmetric_witness",
    "exhaustive_search",
    "greedy_search",
    "gaussian_binomial",
]


@dataclass(frozen=True)
class RhoDecomposition:
    """n = (2a+1) * 2**(c + 4d) with 0 <= c <= 3."""

    n: int
    odd_part: int
    c: int
    d: int

    def __post_init__(self):
        if self.odd_part * 2 ** (self.c + 4 * self.d) != self.n or not 0 <= self.c <= 3:
            raise ValueError("inconsistent decomposition")

    @property
    def rho(self) -> int:
        return 2**self.c + 8 * self.d


def rho_decompose(n: int) -> RhoDecomposition:
    if n < 1:
        raise ValueError("n must be >= 1")
    e = 0
    odd = n
    while odd % 2 == 0:
        odd //= 2
        e += 1
    return RhoDecomposition(n, odd, e % 4, e // 4)


def rho(n: int) -> int:
    """Radon-Hurwitz number 2**c + 8d."""
    return rho_decompose(n).rho


def real_mu_interval(n: int) -> tuple[int, int]:
    """The interval pinning the symmetric invariant over the reals.

    Odd n gives the single value 1; even n depends on the 2-adic shape:
    c = 0 gives exactly 8d, otherwise [2**(c-1) + 8d, 2**c + 8d].
    """
    if n % 2:
        return (1, 1)
    dec = rho_decompose(n)
    if dec.c == 0:
        return (8 * dec.d, 8 * dec.d)
    lo = 2 ** (dec.c - 1) + 8 * dec.d
    return (lo, dec.rho)


@dataclass
class SearchResult:
    """A witness subspace with the record of how it was verified.

    `verified` is True only when every one of the q**best_dim - 1 nonzero
    combinations of the witness basis was checked invertible.
    """

    target: str
    n: int
    q: int
    best_dim: int
    witness_basis: list[np.ndarray]
    mode: dict
    verified: bool
    dims_exhausted: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "n": self.n,
            "q": self.q,
            "best_dim": self.best_dim,
            "witness_basis": [[[int(v) for v in row] for row in m] for m in self.witness_basis],
            "mode": self.mode,
            "verified": self.verified,
            "dims_exhausted": self.dims_exhausted,
        }


def gaussian_binomial(nn: int, k: int, q: int) -> int:
    """Number of k-dimensional subspaces of GF(q)**nn (exact integer)."""
    if k < 0 or k > nn:
        return 0
    num = den = 1
    for i in range(k):
        num *= q ** (nn - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def _canonical_witness(gf: Gf, mats: list[np.ndarray], symmetric: bool) -> list[np.ndarray]:
    """Echelonize the flattened witness so equal subspaces print identically."""
    if not mats:
        return []
    n = mats[0].shape[0]
    if symmetric:
        flat = np.stack([flatten_sym(m, n) for m in mats])
    else:
        flat = np.stack([m.reshape(-1) for m in mats])
    r, pivots = rref(gf, flat)
    rows = r[: len(pivots)]
    if symmetric:
        return [unflatten_sym(row, n) for row in rows]
    return [row.reshape(n, n) for row in rows]


def _combo_codes(q: int, d: int, lo: int, hi: int) -> np.ndarray:
    vals = np.arange(lo, hi, dtype=np.int64)
    out = np.zeros((vals.size, d), dtype=np.int64)
    for t in range(d):
        out[:, t] = vals % q
        vals //= q
    return out


def _combine(gf: Gf, coeffs: np.ndarray, basis: np.ndarray) -> np.ndarray:
    if gf.s == 1:
        return np.einsum("bt,tjk->bjk", coeffs, basis) % gf.p
    out = np.zeros((coeffs.shape[0],) + basis.shape[1:], dtype=np.int64)
    for t in range(coeffs.shape[1]):
        out = gf.add(out, gf.mul(coeffs[:, t, None, None], basis[t][None]))
    return out


_CHUNK = 4096


def _all_combos_invertible(gf: Gf, mats: list[np.ndarray], budget: int) -> tuple[Optional[bool], int]:
    """Exhaustively check every nonzero combination; (None, total) if over budget.

    Returns (verdict, combos_checked); stops at the first singular member.
    """
    d = len(mats)
    n = mats[0].shape[0]
    total = gf.q**d - 1
    if total > budget:
        return None, total
    basis = np.stack(mats)
    checked = 0
    for lo in range(1, total + 1, _CHUNK):
        codes = _combo_codes(gf.q, d, lo, min(lo + _CHUNK, total + 1))
        ranks = rank_many(gf, _combine(gf, codes, basis))
        checked += codes.shape[0]
        if np.any(ranks < n):
            return False, checked
    return True, checked


def _sampled_combos_invertible(gf: Gf, mats: list[np.ndarray], count: int, seed: int) -> bool:
    d = len(mats)
    n = mats[0].shape[0]
    basis = np.stack(mats)
    rng = np.random.default_rng(seed)
    codes = rng.integers(0, gf.q, size=(count, d), dtype=np.int64)
    bad = ~codes.any(axis=1)
    while bad.any():
        codes[bad] = rng.integers(0, gf.q, size=(int(bad.sum()), d), dtype=np.int64)
        bad = ~codes.any(axis=1)
    for lo in range(0, count, _CHUNK):
        ranks = rank_many(gf, _combine(gf, codes[lo : lo + _CHUNK], basis))
        if np.any(ranks < n):
            return False
    return True


def _verify_witness(gf: Gf, mats: list[np.ndarray], budget: int, sample_count: int, seed: int):
    ok, _ = _all_combos_invertible(gf, mats, budget)
    if ok is None:
        sampled_ok = _sampled_combos_invertible(gf, mats, sample_count, seed)
        if not sampled_ok:
            raise AssertionError("sampled verification found a singular member of a field-derived witness")
        return {"mode": "sampled", "count": sample_count, "seed": seed}, False
    if not ok:
        raise AssertionError("exhaustive verification found a singular member of a field-derived witness")
    return {"mode": "exhaustive"}, True


def construct_regular_rep_subspace(tower: FieldTower, budget: int | None = None,
                                   sample_count: int = 10_000, seed: int = 0) -> SearchResult:
    """The multiplication matrices of L span an n-dimensional invertible-closed
    subspace of M(n, K): nonzero combinations are multiplication by nonzero
    field elements."""
    budget = DEFAULT_BUDGET if budget is None else budget
    n, kf = tower.n, tower.K
    mats = []
    for j in range(n):
        m = np.zeros((n, n), dtype=np.int64)
        for k in range(n):
            m[:, k] = tower.xpow[j + k]
        mats.append(m)
    mode, verified = _verify_witness(kf, mats, budget, sample_count, seed)
    return SearchResult("tau", n, kf.q, n, _canonical_witness(kf, mats, symmetric=False), mode, verified)


def construct_symmetric_witness(tower: FieldTower, budget: int | None = None,
                                sample_count: int = 10_000, seed: int = 0) -> SearchResult:
    """The untwisted trace-form Grams span an n-dimensional invertible-closed
    subspace of S(n, K): the trace pairing is non-degenerate."""
    budget = DEFAULT_BUDGET if budget is None else budget
    n, kf = tower.n, tower.K
    mats = [g.copy() for g in gram_basis(tower, 0)]
    mode, verified = _verify_witness(kf, mats, budget, sample_count, seed)
    return SearchResult("mu", n, kf.q, n, _canonical_witness(kf, mats, symmetric=True), mode, verified)


def block_construction(u: SearchResult, budget: int | None = None) -> SearchResult:
    """Lift an invertible-closed subspace of M(m, K) to S(2m, K) via
    off-diagonal blocks [[0, A], [A^T, 0]]; dimension is preserved."""
    if not u.verified:
        raise ValueError("block construction requires a fully verified input subspace")
    budget = DEFAULT_BUDGET if budget is None else budget
    p, s = prime_power_decompose(u.q)
    gf = Gf(p, s)
    m = u.n
    blocks = []
    for a in u.witness_basis:
        a = np.asarray(a, dtype=np.int64)
        b = np.zeros((2 * m, 2 * m), dtype=np.int64)
        b[:m, m:] = a
        b[m:, :m] = a.T
        blocks.append(b)
    ok, _ = _all_combos_invertible(gf, blocks, budget)
    if ok is None:
        raise BudgetExceededError(gf.q ** len(blocks) - 1, budget)
    if not ok:
        raise AssertionError("block lift of an invertible-closed subspace has a singular member")
    return SearchResult("mu", 2 * m, u.q, u.best_dim, _canonical_witness(gf, blocks, symmetric=True),
                        {"mode": "exhaustive"}, True)


def _ambient(target: str, n: int) -> int:
    if target == "tau":
        return n * n
    if target == "mu":
        return n * (n + 1) // 2
    raise ValueError(f"target must be 'tau' or 'mu', got {target!r}")


def _mat_from_flat(target: str, row: np.ndarray, n: int) -> np.ndarray:
    return row.reshape(n, n) if target == "tau" else unflatten_sym(row, n)


def _iter_rref_bases(q: int, ambient: int, k: int):
    """All k-dimensional subspaces of GF(q)**ambient, one canonical reduced
    echelon basis each, in (pivot columns, free cells) lexicographic order."""
    for pivots in itertools.combinations(range(ambient), k):
        free_cells = [
            (r, c)
            for r in range(k)
            for c in range(pivots[r] + 1, ambient)
            if c not in pivots
        ]
        base = np.zeros((k, ambient), dtype=np.int64)
        for r, pc in enumerate(pivots):
            base[r, pc] = 1
        nfree = len(free_cells)
        for m in range(q**nfree):
            b = base.copy()
            rem = m
            for r, c in free_cells:
                b[r, c] = rem % q
                rem //= q
            yield b


def exhaustive_search(target: str, n: int, q: int, budget: int | None = None,
                      dims: Optional[list[int]] = None) -> SearchResult:
    """Exact maximal invertible-closed dimension on a tiny instance.

    Scans dimensions downward from n + 1 (capped by the ambient dimension),
    enumerating canonical echelon bases; a candidate dies on its first
    singular nonzero member.  The first dimension with a surviving candidate
    is the exact maximum, and every larger dimension scanned without a
    witness is recorded in `dims_exhausted`.
    """
    budget = DEFAULT_BUDGET if budget is None else budget
    p, s = prime_power_decompose(q)
    gf = Gf(p, s)
    ambient = _ambient(target, n)
    if dims is None:
        dims = list(range(min(ambient, n + 1), 0, -1))
    exhausted = []
    for k in dims:
        count = gaussian_binomial(ambient, k, q)
        if count > budget:
            raise BudgetExceededError(count, budget)
        for flat in _iter_rref_bases(q, ambient, k):
            mats = [_mat_from_flat(target, row, n) for row in flat]
            ok, _ = _all_combos_invertible(gf, mats, budget)
            if ok is None:
                raise BudgetExceededError(q**k - 1, budget)
            if ok:
                return SearchResult(target, n, q, k, _canonical_witness(gf, mats, target == "mu"),
                                    {"mode": "exhaustive"}, True, dims_exhausted=exhausted)
        exhausted.append(k)
    return SearchResult(target, n, q, 0, [], {"mode": "exhaustive"}, True, dims_exhausted=exhausted)


def greedy_search(target: str, n: int, q: int, seed: int = 0, restarts: int = 0,
                  budget: int | None = None, max_tries: int = 512,
                  backtracks: int = 64) -> SearchResult:
    """Randomized greedy basis extension with exact verification of each step.

    Per restart: draw a bulk of random candidate matrices, filter out every
    one that breaks invertible-closure (vectorized, one batched rank pass
    per existing combination), and append the first survivor.  When no
    candidate survives the walk backtracks by dropping a random member, up
    to `backtracks` times, keeping the best basis seen.  Restart streams
    derive deterministically from (seed, restart index), so restarts = 0 is
    the deterministic first pass.  An extension past dimension n succeeding
    would contradict the column bound, so it raises.
    """
    budget = DEFAULT_BUDGET if budget is None else budget
    p, s = prime_power_decompose(q)
    gf = Gf(p, s)
    best: list[np.ndarray] = []
    best_restart = 0
    for restart in range(restarts + 1):
        rng = np.random.default_rng([seed, restart])
        basis: list[np.ndarray] = []
        back_left = backtracks
        while True:
            if q ** len(basis) > budget:
                break
            cand = _find_extension(gf, target, n, basis, rng, max_tries)
            if cand is not None:
                if len(basis) == n:
                    raise AssertionError("greedy extension exceeded the dimension bound n")
                basis.append(cand)
                if len(basis) > len(best):
                    best = list(basis)
                    best_restart = restart
                continue
            if len(basis) == n or not basis or back_left == 0:
                break
            back_left -= 1
            basis.pop(int(rng.integers(0, len(basis))))
    verified = False
    if best and q ** len(best) - 1 <= budget:
        ok, _ = _all_combos_invertible(gf, best, budget)
        verified = bool(ok)
    return SearchResult(
        target,
        n,
        q,
        len(best),
        _canonical_witness(gf, best, target == "mu"),
        {"mode": "greedy", "seed": seed, "restarts": restarts, "best_restart": best_restart},
        verified,
    )


def _find_extension(gf: Gf, target: str, n: int, basis: list[np.ndarray], rng,
                    max_tries: int) -> Optional[np.ndarray]:
    """First of `max_tries` random candidates that keeps the span closed.

    A candidate survives iff cand + B is invertible for every combination B
    of the current basis (coefficient 1 on the candidate is enough: scaling
    is free).  All candidates are screened together, one batched rank pass
    per combination, worst-to-first survivor order fixed by the rng stream.
    """
    cands = rng.integers(0, gf.q, size=(max_tries, n, n), dtype=np.int64)
    if target == "mu":
        upper = np.triu(cands)
        cands = upper + np.triu(cands, 1).transpose(0, 2, 1)
    alive = cands.any(axis=(1, 2))
    alive &= rank_many(gf, cands) == n
    if not alive.any():
        return None
    d = len(basis)
    if d:
        stack = np.stack(basis)
        for lo in range(1, gf.q**d, _CHUNK):
            codes = _combo_codes(gf.q, d, lo, min(lo + _CHUNK, gf.q**d))
            bases = _combine(gf, codes, stack)
            for b in bases:
                idx = np.nonzero(alive)[0]
                if idx.size == 0:
                    return None
                ok = rank_many(gf, gf.add(cands[idx], b[None])) == n
                alive[idx[~ok]] = False
    idx = np.nonzero(alive)[0]
    return cands[idx[0]].copy() if idx.size else None
