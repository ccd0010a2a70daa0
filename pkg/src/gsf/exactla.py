"""Exact dense linear algebra over GF(q).

Matrices are int64 arrays of K codes paired with the `Gf` that interprets
them.  Subspaces are kept in reduced row echelon form, which is unique per
subspace, so subspace equality and direct-sum audits are literal array
comparisons.  `rank_many` eliminates a whole batch of matrices in lockstep;
it is the hot kernel behind every rank census.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gsf.ffield import FieldTower, Gf

__all__ = [
    "rref",
    "rank",
    "rank_many",
    "kernel",
    "LSubspace",
    "is_direct_sum",
    "eigenspace_of_power",
]


def rref(gf: Gf, mat) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(q); returns (R, pivot_columns)."""
    a = np.array(mat, dtype=np.int64)
    if a.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        pr = r + int(nz[0])
        if pr != r:
            a[[r, pr]] = a[[pr, r]]
        a[r] = gf.mul(a[r], int(gf.inv(a[r, c])))
        fac = a[:, c].copy()
        fac[r] = 0
        a = gf.sub(a, gf.mul(fac[:, None], a[r][None, :]))
        pivots.append(c)
        r += 1
    return a, pivots


def rank(gf: Gf, mat) -> int:
    return len(rref(gf, mat)[1])


def rank_many(gf: Gf, mats) -> np.ndarray:
    """Ranks of a batch of matrices, shape (B, r, c) -> (B,).

    Column-synchronous Gaussian elimination: each iteration picks, swaps,
    normalizes and eliminates pivots for every matrix of the batch at once,
    so the cost is a handful of whole-batch array operations per column.
    """
    if gf.s == 1 and gf.p < 40_000:  # keep p**2 products inside int32
        return _rank_many_prime(gf.p, mats)
    m = np.array(mats, dtype=np.int64)
    if m.ndim == 2:
        m = m[None]
    nb, rows, cols = m.shape
    piv = np.zeros(nb, dtype=np.int64)
    ridx = np.arange(rows)
    for c in range(cols):
        elig = (m[:, :, c] != 0) & (ridx[None, :] >= piv[:, None])
        sel = np.nonzero(elig.any(axis=1))[0]
        if sel.size == 0:
            continue
        prow = np.argmax(elig[sel], axis=1)
        r0 = piv[sel]
        pivot_rows = m[sel, prow].copy()
        m[sel, prow] = m[sel, r0]
        pivot_rows = gf.mul(pivot_rows, gf.inv(pivot_rows[:, c])[:, None])
        m[sel, r0] = pivot_rows
        sub = m[sel]
        upd = gf.sub(sub, gf.mul(sub[:, :, c][:, :, None], pivot_rows[:, None, :]))
        below = ridx[None, :] > r0[:, None]
        m[sel] = np.where(below[:, :, None], upd, sub)
        piv[sel] += 1
    return piv


def _rank_many_prime(p: int, mats) -> np.ndarray:
    """Prime-field specialization of rank_many: in-place int32 arithmetic.

    Entry magnitudes stay below p**2 * rows, far inside int32 for desk-scale
    primes, so the hot elimination update runs without temporaries beyond a
    single product buffer per column.
    """
    m = np.array(mats, dtype=np.int32)
    if m.ndim == 2:
        m = m[None]
    nb, rows, cols = m.shape
    piv = np.zeros(nb, dtype=np.int64)
    ridx = np.arange(rows)
    inv = np.array([0] + [pow(a, p - 2, p) for a in range(1, p)], dtype=np.int32)
    prow_full = np.empty((nb, cols), dtype=np.int32)
    for c in range(cols):
        colv = m[:, :, c]
        elig = (colv != 0) & (ridx[None, :] >= piv[:, None])
        has = elig.any(axis=1)
        sel = np.nonzero(has)[0]
        if sel.size == 0:
            continue
        prow = np.argmax(elig[sel], axis=1)
        r0 = piv[sel]
        pivot_rows = m[sel, prow].copy()
        m[sel, prow] = m[sel, r0]
        pivot_rows *= inv[pivot_rows[:, c]][:, None]
        pivot_rows %= p
        m[sel, r0] = pivot_rows
        prow_full[:] = 0
        prow_full[sel] = pivot_rows
        fac = np.where(ridx[None, :] > np.where(has, piv, rows)[:, None], colv, 0)
        m -= fac[:, :, None] * prow_full[:, None, :]
        m %= p
        piv[sel] += 1
    return piv


def kernel(gf: Gf, mat) -> np.ndarray:
    """Canonical basis (rows) of the right kernel of `mat` over GF(q)."""
    a = np.asarray(mat, dtype=np.int64)
    rows, cols = a.shape
    r, pivots = rref(gf, a)
    free = [c for c in range(cols) if c not in pivots]
    if not free:
        return np.zeros((0, cols), dtype=np.int64)
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for row, pc in enumerate(pivots):
            basis[k, pc] = gf.neg(r[row, f])
    return rref(gf, basis)[0][: len(free)]


def _canonical_basis(gf: Gf, vectors, ambient_dim: int) -> np.ndarray:
    vecs = np.asarray(vectors, dtype=np.int64)
    if vecs.size == 0:
        return np.zeros((0, ambient_dim), dtype=np.int64)
    if vecs.ndim == 1:
        vecs = vecs[None, :]
    r, pivots = rref(gf, vecs)
    out = r[: len(pivots)].copy()
    out.setflags(write=False)
    return out


@dataclass
class LSubspace:
    """A subspace of K**ambient_dim with a unique reduced-echelon basis."""

    gf: Gf
    ambient_dim: int
    basis: np.ndarray

    @classmethod
    def from_vectors(cls, gf: Gf, vectors, ambient_dim: int | None = None) -> "LSubspace":
        vecs = np.asarray(vectors, dtype=np.int64)
        if ambient_dim is None:
            if vecs.size == 0:
                raise ValueError("ambient_dim required for an empty generating set")
            ambient_dim = vecs.shape[-1]
        return cls(gf, ambient_dim, _canonical_basis(gf, vecs, ambient_dim))

    @classmethod
    def zero(cls, gf: Gf, ambient_dim: int) -> "LSubspace":
        return cls(gf, ambient_dim, np.zeros((0, ambient_dim), dtype=np.int64))

    @classmethod
    def full(cls, gf: Gf, ambient_dim: int) -> "LSubspace":
        return cls.from_vectors(gf, np.eye(ambient_dim, dtype=np.int64))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def is_zero(self) -> bool:
        return self.dim == 0

    def sum(self, other: "LSubspace") -> "LSubspace":
        self._check_ambient(other)
        stacked = np.vstack([self.basis, other.basis])
        return LSubspace.from_vectors(self.gf, stacked, self.ambient_dim)

    def intersect(self, other: "LSubspace") -> "LSubspace":
        """Zassenhaus: echelonize [A|A; B|0], read the intersection off the
        rows whose left block vanished."""
        self._check_ambient(other)
        n = self.ambient_dim
        da, db = self.dim, other.dim
        if da == 0 or db == 0:
            return LSubspace.zero(self.gf, n)
        block = np.zeros((da + db, 2 * n), dtype=np.int64)
        block[:da, :n] = self.basis
        block[:da, n:] = self.basis
        block[da:, :n] = other.basis
        r, _ = rref(self.gf, block)
        zero_left = ~np.any(r[:, :n], axis=1)
        nonzero_right = np.any(r[:, n:], axis=1)
        inter = r[zero_left & nonzero_right, n:]
        return LSubspace.from_vectors(self.gf, inter, n) if inter.size else LSubspace.zero(self.gf, n)

    def contains(self, vector) -> bool:
        v = np.asarray(vector, dtype=np.int64).copy()
        if v.shape != (self.ambient_dim,):
            raise ValueError("ambient dimension mismatch")
        for row in self.basis:
            pc = int(np.nonzero(row)[0][0])
            if v[pc]:
                v = self.gf.sub(v, self.gf.mul(int(v[pc]), row))
        return not np.any(v)

    def _check_ambient(self, other: "LSubspace"):
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient dimension mismatch")

    def __eq__(self, other):
        return (
            isinstance(other, LSubspace)
            and self.ambient_dim == other.ambient_dim
            and np.array_equal(self.basis, other.basis)
        )

    def __repr__(self):
        return f"LSubspace(dim={self.dim}, ambient={self.ambient_dim})"


def is_direct_sum(parts) -> bool:
    """True iff the listed subspaces are independent: sum of dims equals the
    dimension of their joint span."""
    parts = list(parts)
    if not parts:
        return True
    gf = parts[0].gf
    amb = parts[0].ambient_dim
    if any(p.ambient_dim != amb for p in parts):
        raise ValueError("ambient dimension mismatch")
    stacked = np.vstack([p.basis for p in parts])
    if stacked.shape[0] == 0:
        return True
    return rank(gf, stacked) == sum(p.dim for p in parts)


def eigenspace_of_power(tower: FieldTower, t: int, sign: int) -> LSubspace:
    """Kernel of (sigma**t - sign) acting K-linearly on L, sign in {+1, -1}."""
    if not 1 <= t <= tower.n:
        raise ValueError(f"t = {t} out of range 1..{tower.n}")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    kf = tower.K
    ft = tower.frobenius_mats[t % tower.n]
    sgn = 1 if sign == 1 else int(kf.neg(1))
    m = kf.sub(ft, kf.mul(sgn, np.eye(tower.n, dtype=np.int64)))
    return LSubspace(kf, tower.n, _canonical_basis(kf, kernel(kf, m), tower.n))
