"""Exact arithmetic in odd-characteristic finite-field towers.

The tower is GF(p) <= K = GF(p**s) <= L = GF(q**n) with q = p**s.  Elements
of K are integer codes 0..q-1; the base-p digits of a code (little-endian)
are its coordinates in the power basis of K over GF(p).  Elements of L are
length-n int64 vectors of K codes, their coordinates in the power basis
1, x, ..., x**(n-1) of L over K.

Defining polynomials are always the first irreducible in the canonical scan
order (coefficient vectors read as base-q integers), so towers, Gram
matrices and certificates are reproducible bit for bit.  Every automorphism
power b -> b**(q**i) is precomputed as an n x n matrix over K when the tower
is built; trace, norm and all downstream Gram-matrix work then reduce to
exact linear algebra on integer arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PrimePower",
    "Gf",
    "FieldTower",
    "find_irreducible",
    "is_irreducible",
    "is_prime",
    "prime_power_decompose",
]


def is_prime(m: int) -> bool:
    if m < 2:
        return False
    if m < 4:
        return True
    if m % 2 == 0:
        return False
    f = 3
    while f * f <= m:
        if m % f == 0:
            return False
        f += 2
    return True


def prime_power_decompose(q: int) -> tuple[int, int]:
    """Split q into (p, s) with q = p**s, p prime.  Raises for non prime powers."""
    if q < 2:
        raise ValueError(f"{q} is not a prime power")
    p = 2
    while q % p != 0:
        p += 1
    s = 0
    m = q
    while m % p == 0:
        m //= p
        s += 1
    if m != 1:
        raise ValueError(f"{q} is not a prime power")
    return p, s


@dataclass(frozen=True)
class PrimePower:
    """An odd prime power q = p**s (characteristic two is rejected)."""

    p: int
    s: int = 1

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        if self.p == 2:
            raise ValueError("characteristic 2 is not supported")
        if self.s < 1:
            raise ValueError(f"s = {self.s} must be >= 1")

    @property
    def q(self) -> int:
        return self.p**self.s


class Gf:
    """GF(p**s) arithmetic on integer codes, vectorized over numpy arrays.

    For s = 1 the operations are plain mod-p integer arithmetic.  For s > 1
    the field is GF(p)[y]/(g) for the canonical irreducible g of degree s,
    and addition/multiplication/inversion are precomputed lookup tables, so
    array operations stay vectorized (fancy indexing instead of mod).
    """

    def __init__(self, p: int, s: int = 1, modulus=None):
        pp = PrimePower(p, s)
        self.p = p
        self.s = s
        self.q = pp.q
        if s == 1:
            self.modulus = np.array([0, 1], dtype=np.int64)
        else:
            if modulus is None:
                modulus = find_irreducible(Gf(p), s)
            modulus = np.asarray(modulus, dtype=np.int64) % p
            if len(modulus) != s + 1 or modulus[-1] != 1:
                raise ValueError("modulus must be monic of degree s")
            if not is_irreducible(Gf(p), modulus):
                raise ValueError("modulus is reducible over GF(p)")
            self.modulus = modulus
        self.modulus.setflags(write=False)
        self._inv_t = None
        if s == 1:
            inv = np.zeros(p, dtype=np.int64)
            for a in range(1, p):
                inv[a] = pow(a, p - 2, p)
            self._inv_t = inv
        else:
            self._build_tables()

    # -- table construction (s > 1 only) ------------------------------------

    def _build_tables(self):
        p, s, q = self.p, self.s, self.q
        modl = [int(c) for c in self.modulus]
        digs = [[(a // p**i) % p for i in range(s)] for a in range(q)]
        mul = np.zeros((q, q), dtype=np.int64)
        for a in range(q):
            da = digs[a]
            for b in range(a, q):
                db = digs[b]
                conv = [0] * (2 * s - 1)
                for i in range(s):
                    ai = da[i]
                    if ai:
                        for j in range(s):
                            conv[i + j] = (conv[i + j] + ai * db[j]) % p
                for m in range(2 * s - 2, s - 1, -1):
                    cm = conv[m]
                    if cm:
                        conv[m] = 0
                        for t in range(s):
                            conv[m - s + t] = (conv[m - s + t] - cm * modl[t]) % p
                code = sum(conv[i] * p**i for i in range(s))
                mul[a, b] = code
                mul[b, a] = code
        dg = np.array(digs, dtype=np.int64)
        pw = p ** np.arange(s, dtype=np.int64)
        add = ((dg[:, None, :] + dg[None, :, :]) % p) @ pw
        inv = np.zeros(q, dtype=np.int64)
        for a in range(1, q):
            inv[a] = int(np.nonzero(mul[a] == 1)[0][0])
        neg = np.argmax(add == 0, axis=1)
        for t in (mul, add, inv, neg):
            t.setflags(write=False)
        self._mul_t, self._add_t, self._inv_t, self._neg_t = mul, add, inv, neg

    # -- element operations (ints or int64 arrays of codes) -----------------

    def add(self, a, b):
        if self.s == 1:
            return (np.asarray(a, dtype=np.int64) + b) % self.p
        return self._add_t[np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)]

    def neg(self, a):
        if self.s == 1:
            return (-np.asarray(a, dtype=np.int64)) % self.p
        return self._neg_t[np.asarray(a, dtype=np.int64)]

    def sub(self, a, b):
        if self.s == 1:
            return (np.asarray(a, dtype=np.int64) - b) % self.p
        return self._add_t[np.asarray(a, dtype=np.int64), self._neg_t[np.asarray(b, dtype=np.int64)]]

    def mul(self, a, b):
        if self.s == 1:
            return (np.asarray(a, dtype=np.int64) * b) % self.p
        return self._mul_t[np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)]

    def inv(self, a):
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("inverse of 0 in GF(q)")
        return self._inv_t[a]

    def pow_scalar(self, a: int, e: int) -> int:
        if self.s == 1:
            return pow(int(a), e, self.p) if e >= 0 else int(self.inv(pow(int(a), -e, self.p)))
        if e < 0:
            a, e = int(self.inv(a)), -e
        r, base = 1, int(a)
        while e:
            if e & 1:
                r = int(self._mul_t[r, base])
            base = int(self._mul_t[base, base])
            e >>= 1
        return r

    def matmul(self, a, b):
        """Exact matrix product of code arrays (2-D @ 2-D or 2-D @ 1-D)."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.s == 1:
            return (a @ b) % self.p
        vec = b.ndim == 1
        if vec:
            b = b[:, None]
        out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
        for l in range(a.shape[1]):
            out = self.add(out, self.mul(a[:, l : l + 1], b[l : l + 1, :]))
        return out[:, 0] if vec else out

    def dot(self, u, v) -> int:
        if self.s == 1:
            return int(np.dot(np.asarray(u, dtype=np.int64), v) % self.p)
        acc = 0
        prods = self.mul(u, v)
        for x in np.atleast_1d(prods):
            acc = int(self._add_t[acc, x])
        return acc

    def elements(self) -> np.ndarray:
        return np.arange(self.q, dtype=np.int64)

    # -- base-p digit codecs --------------------------------------------------

    def to_digits(self, codes) -> np.ndarray:
        """Base-p digits (little-endian, width s) of an array of K codes."""
        codes = np.asarray(codes, dtype=np.int64)
        out = np.zeros(codes.shape + (self.s,), dtype=np.int64)
        rem = codes.copy()
        for i in range(self.s):
            out[..., i] = rem % self.p
            rem //= self.p
        return out

    def from_digits(self, digits) -> np.ndarray:
        digits = np.asarray(digits, dtype=np.int64) % self.p
        pw = self.p ** np.arange(digits.shape[-1], dtype=np.int64)
        return digits @ pw

    def __repr__(self):
        return f"Gf(p={self.p}, s={self.s})"


# -- polynomial arithmetic over a Gf (little-endian code arrays) --------------


def poly_trim(f) -> np.ndarray:
    f = np.asarray(f, dtype=np.int64)
    nz = np.nonzero(f)[0]
    return f[: nz[-1] + 1] if nz.size else f[:0]


def poly_deg(f) -> int:
    return len(poly_trim(f)) - 1


def poly_add(gf: Gf, a, b) -> np.ndarray:
    la, lb = len(a), len(b)
    n = max(la, lb)
    out = np.zeros(n, dtype=np.int64)
    out[:la] = a
    out[:lb] = gf.add(out[:lb], b)
    return poly_trim(out)


def poly_sub(gf: Gf, a, b) -> np.ndarray:
    return poly_add(gf, a, gf.neg(np.asarray(b, dtype=np.int64)))


def poly_mul(gf: Gf, a, b) -> np.ndarray:
    a, b = poly_trim(a), poly_trim(b)
    if len(a) == 0 or len(b) == 0:
        return a[:0]
    if gf.s == 1:
        return np.convolve(a, b) % gf.p
    out = np.zeros(len(a) + len(b) - 1, dtype=np.int64)
    for i in range(len(a)):
        if a[i]:
            out[i : i + len(b)] = gf.add(out[i : i + len(b)], gf.mul(int(a[i]), b))
    return out


def poly_divmod(gf: Gf, a, b) -> tuple[np.ndarray, np.ndarray]:
    a, b = poly_trim(a), poly_trim(b)
    if len(b) == 0:
        raise ZeroDivisionError("polynomial division by zero")
    if len(a) < len(b):
        return a[:0], a
    rem = a.copy()
    quo = np.zeros(len(a) - len(b) + 1, dtype=np.int64)
    binv = int(gf.inv(b[-1]))
    for k in range(len(a) - len(b), -1, -1):
        coef = int(gf.mul(rem[k + len(b) - 1], binv))
        quo[k] = coef
        if coef:
            rem[k : k + len(b)] = gf.sub(rem[k : k + len(b)], gf.mul(coef, b))
    return poly_trim(quo), poly_trim(rem)


def poly_mod(gf: Gf, a, b) -> np.ndarray:
    return poly_divmod(gf, a, b)[1]


def poly_gcd(gf: Gf, a, b) -> np.ndarray:
    """Monic gcd."""
    a, b = poly_trim(a), poly_trim(b)
    while len(b):
        a, b = b, poly_mod(gf, a, b)
    if len(a):
        a = gf.mul(a, int(gf.inv(a[-1])))
    return a


def poly_powmod(gf: Gf, base, e: int, mod) -> np.ndarray:
    """base**e reduced mod a polynomial; e may be a large python int."""
    result = np.array([1], dtype=np.int64)
    base = poly_mod(gf, base, mod)
    while e:
        if e & 1:
            result = poly_mod(gf, poly_mul(gf, result, base), mod)
        e >>= 1
        if e:
            base = poly_mod(gf, poly_mul(gf, base, base), mod)
    return result


def poly_invmod(gf: Gf, a, mod) -> np.ndarray:
    """Inverse of a modulo `mod` via the extended Euclidean algorithm."""
    a = poly_mod(gf, poly_trim(a), mod)
    if len(a) == 0:
        raise ZeroDivisionError("inverse of 0")
    r0, r1 = poly_trim(mod), a
    t0, t1 = np.zeros(0, dtype=np.int64), np.array([1], dtype=np.int64)
    while len(r1):
        quo, rem = poly_divmod(gf, r0, r1)
        r0, r1 = r1, rem
        t0, t1 = t1, poly_sub(gf, t0, poly_mul(gf, quo, t1))
    if poly_deg(r0) != 0:
        raise ZeroDivisionError("element is not invertible modulo the given polynomial")
    return poly_mod(gf, gf.mul(t0, int(gf.inv(r0[0]))), mod)


_X = np.array([0, 1], dtype=np.int64)


def is_irreducible(gf: Gf, f) -> bool:
    """Exact irreducibility test for a monic polynomial over GF(q).

    A monic f of degree d is irreducible iff gcd(x**(q**j) - x, f) = 1 for
    every j <= d/2, since x**(q**j) - x is the product of all irreducibles
    of degree dividing j.  The Frobenius powers x**(q**j) mod f are built
    iteratively, so most reducible candidates are rejected at small j.
    """
    f = poly_trim(f)
    d = len(f) - 1
    if d < 1 or f[-1] != 1:
        raise ValueError("expected a monic polynomial of degree >= 1")
    if d == 1:
        return True
    t = _X.copy()
    for _ in range(d // 2):
        t = poly_powmod(gf, t, gf.q, f)
        if poly_deg(poly_gcd(gf, poly_sub(gf, t, _X), f)) >= 1:
            return False
    return True


def find_irreducible(gf: Gf, degree: int) -> np.ndarray:
    """First monic irreducible of the given degree in canonical scan order.

    Monic candidates x**d + c_{d-1} x**(d-1) + ... + c_0 are scanned in
    increasing order of the base-q integer sum(c_i * q**i); the first
    irreducible wins, making every defining polynomial reproducible.
    """
    if degree < 1:
        raise ValueError("degree must be >= 1")
    q = gf.q
    coeffs = np.zeros(degree + 1, dtype=np.int64)
    coeffs[degree] = 1
    for m in range(q**degree):
        r = m
        for i in range(degree):
            coeffs[i] = r % q
            r //= q
        if is_irreducible(gf, coeffs):
            return coeffs.copy()
    raise AssertionError("unreachable: irreducibles exist in every degree")


class FieldTower:
    """The tower GF(p) <= K = GF(p**s) <= L = GF(q**n), Frobenius included.

    Immutable after construction; all methods are pure functions of their
    arguments, so a tower can be shared freely across threads.
    """

    def __init__(self, p: int, s: int = 1, n: int = 1, base_poly=None, ext_poly=None):
        self.base = PrimePower(p, s)
        if n < 1:
            raise ValueError(f"extension degree n = {n} must be >= 1")
        self.n = n
        self.K = Gf(p, s, modulus=base_poly)
        self.base_poly = self.K.modulus
        if ext_poly is None:
            ext_poly = find_irreducible(self.K, n)
        else:
            ext_poly = np.asarray(ext_poly, dtype=np.int64)
            if len(ext_poly) != n + 1 or ext_poly[-1] != 1 or np.any(ext_poly < 0) or np.any(ext_poly >= self.q):
                raise ValueError("ext_poly must be monic of degree n with K codes")
            if not is_irreducible(self.K, ext_poly):
                raise ValueError("ext_poly is reducible over K")
        self.ext_poly = ext_poly
        self.ext_poly.setflags(write=False)
        self._precompute()
        self._gram_cache: dict[int, np.ndarray] = {}

    @property
    def p(self) -> int:
        return self.base.p

    @property
    def s(self) -> int:
        return self.base.s

    @property
    def q(self) -> int:
        return self.base.q

    @property
    def size(self) -> int:
        return self.q**self.n

    def _precompute(self):
        K, n = self.K, self.n
        top = max(3 * n - 2, 1)
        xpow = np.zeros((top, n), dtype=np.int64)
        xpow[0, 0] = 1
        for m in range(1, top):
            xpow[m] = self._shift_reduce(xpow[m - 1])
        xpow.setflags(write=False)
        self.xpow = xpow

        frob = [np.eye(n, dtype=np.int64)]
        if n > 1:
            xq = poly_powmod(K, _X, K.q, self.ext_poly)
            xq_vec = np.zeros(n, dtype=np.int64)
            xq_vec[: len(xq)] = xq
            f1 = np.zeros((n, n), dtype=np.int64)
            col = np.zeros(n, dtype=np.int64)
            col[0] = 1
            f1[:, 0] = col
            for j in range(1, n):
                col = self.mul(col, xq_vec)
                f1[:, j] = col
            frob.append(f1)
            for _ in range(2, n):
                frob.append(K.matmul(f1, frob[-1]))
        for m in frob:
            m.setflags(write=False)
        self.frobenius_mats = frob

        total = frob[0].copy()
        for m in frob[1:]:
            total = K.add(total, m)
        # conjugate sums land in K, i.e. in the span of the basis element 1
        if np.any(total[1:]):
            raise AssertionError("trace of a basis element left the base field")
        self.trace_vec = total[0].copy()
        self.trace_vec.setflags(write=False)
        self.tau3 = np.array([K.dot(self.trace_vec, xpow[m]) for m in range(top)], dtype=np.int64)
        self.tau3.setflags(write=False)

    def _shift_reduce(self, v: np.ndarray) -> np.ndarray:
        """v * x mod ext_poly for a coefficient vector v."""
        K, n = self.K, self.n
        out = np.zeros(n, dtype=np.int64)
        out[1:] = v[: n - 1]
        lead = int(v[n - 1])
        if lead:
            out = K.sub(out, K.mul(lead, self.ext_poly[:n]))
        return out

    # -- elements --------------------------------------------------------------

    def element(self, coeffs) -> np.ndarray:
        """Validate and canonicalize a length-n vector of K codes."""
        a = np.asarray(coeffs, dtype=np.int64)
        if a.shape != (self.n,):
            raise ValueError(f"element must have {self.n} coefficients, got shape {a.shape}")
        if np.any(a < 0) or np.any(a >= self.q):
            raise ValueError(f"coefficients must be K codes in 0..{self.q - 1}")
        return a

    def zero(self) -> np.ndarray:
        return np.zeros(self.n, dtype=np.int64)

    def one(self) -> np.ndarray:
        e = np.zeros(self.n, dtype=np.int64)
        e[0] = 1
        return e

    def basis_element(self, j: int) -> np.ndarray:
        e = np.zeros(self.n, dtype=np.int64)
        e[j] = 1
        return e

    def scalar(self, c: int) -> np.ndarray:
        e = np.zeros(self.n, dtype=np.int64)
        e[0] = c % self.q if self.s == 1 else c
        return e

    def element_vectors(self, limit: int = 5_000_000) -> np.ndarray:
        """All q**n coefficient vectors as a (q**n, n) array (small towers only)."""
        if self.size > limit:
            raise ValueError(f"refusing to materialize {self.size} elements")
        vals = np.arange(self.size, dtype=np.int64)
        out = np.zeros((self.size, self.n), dtype=np.int64)
        for t in range(self.n):
            out[:, t] = vals % self.q
            vals //= self.q
        return out

    def add(self, a, b):
        return self.K.add(a, b)

    def sub(self, a, b):
        return self.K.sub(a, b)

    def neg(self, a):
        return self.K.neg(a)

    def mul(self, a, b) -> np.ndarray:
        K, n = self.K, self.n
        if K.s == 1:
            conv = np.convolve(a, b) % K.p
        else:
            conv = np.zeros(2 * n - 1, dtype=np.int64)
            for i in range(n):
                if a[i]:
                    conv[i : i + n] = K.add(conv[i : i + n], K.mul(int(a[i]), b))
        out = np.zeros(n, dtype=np.int64)
        for m in range(len(conv)):
            if conv[m]:
                out = K.add(out, K.mul(int(conv[m]), self.xpow[m]))
        return out

    def inv(self, a) -> np.ndarray:
        r = poly_invmod(self.K, a, self.ext_poly)
        out = np.zeros(self.n, dtype=np.int64)
        out[: len(r)] = r
        return out

    def div(self, a, b) -> np.ndarray:
        return self.mul(a, self.inv(b))

    def pow_elem(self, a, e: int) -> np.ndarray:
        r = poly_powmod(self.K, a, e, self.ext_poly)
        out = np.zeros(self.n, dtype=np.int64)
        out[: len(r)] = r
        return out

    # -- Galois structure --------------------------------------------------------

    def frobenius_apply(self, i: int, a) -> np.ndarray:
        """a**(q**i), realized as the precomputed matrix action."""
        if not 0 <= i < self.n:
            raise ValueError(f"automorphism power i = {i} out of range 0..{self.n - 1}")
        return self.K.matmul(self.frobenius_mats[i], np.asarray(a, dtype=np.int64))

    def sigma_order(self, i: int) -> int:
        """Multiplicative order of the i-th Frobenius power."""
        return self.n // math.gcd(self.n, i) if i % self.n else 1

    def trace_rel(self, t: int, a) -> np.ndarray:
        """Relative trace onto the fixed field of sigma**t; t must divide n."""
        if t < 1 or self.n % t:
            raise ValueError(f"t = {t} does not divide n = {self.n}")
        acc = np.asarray(a, dtype=np.int64).copy()
        for j in range(1, self.n // t):
            acc = self.K.add(acc, self.K.matmul(self.frobenius_mats[(t * j) % self.n], a))
        return acc

    def norm_rel(self, t: int, a) -> np.ndarray:
        """Relative norm onto the fixed field of sigma**t; t must divide n."""
        if t < 1 or self.n % t:
            raise ValueError(f"t = {t} does not divide n = {self.n}")
        acc = np.asarray(a, dtype=np.int64).copy()
        for j in range(1, self.n // t):
            acc = self.mul(acc, self.K.matmul(self.frobenius_mats[(t * j) % self.n], a))
        return acc

    def trace_to_base(self, a) -> int:
        """Absolute trace as a K scalar code."""
        return self.K.dot(self.trace_vec, np.asarray(a, dtype=np.int64))

    # -- serialization -------------------------------------------------------------

    def element_to_digits(self, a) -> list[int]:
        return [int(d) for d in self.K.to_digits(np.asarray(a, dtype=np.int64)).ravel()]

    def element_from_digits(self, digits) -> np.ndarray:
        digits = np.asarray(digits, dtype=np.int64)
        if digits.shape != (self.n * self.s,):
            raise ValueError(f"expected {self.n * self.s} base-{self.p} digits, got {digits.size}")
        if np.any(digits < 0) or np.any(digits >= self.p):
            raise ValueError(f"digits must lie in 0..{self.p - 1}")
        return self.K.from_digits(digits.reshape(self.n, self.s))

    def _poly_digits(self, f) -> list[int]:
        return [int(d) for d in self.K.to_digits(np.asarray(f, dtype=np.int64)).ravel()]

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "s": self.s,
            "n": self.n,
            "base_poly": [int(c) for c in self.base_poly],
            "ext_poly": self._poly_digits(self.ext_poly),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FieldTower":
        p, s, n = int(d["p"]), int(d["s"]), int(d["n"])
        kf = Gf(p, s, modulus=d.get("base_poly"))
        ext = d.get("ext_poly")
        if ext is not None:
            ext = kf.from_digits(np.asarray(ext, dtype=np.int64).reshape(n + 1, s))
        return cls(p, s, n, base_poly=d.get("base_poly"), ext_poly=ext)

    def __repr__(self):
        return f"FieldTower(GF({self.q}^{self.n})/GF({self.q}))"
