"""Sparse multivariate Laurent polynomials over a ``BaseRing``.

Small products use a term-pair loop.  Large products and powers switch to a
dense representation multiplied by Kronecker substitution: every coefficient
array is packed into one big integer, the integers are multiplied with GMP,
and the product is unpacked and reduced.  The parameter t (if any) is treated
as one more packed dimension.
"""

from __future__ import annotations

from itertools import product as iproduct
from typing import Iterable, Mapping, Sequence

import gmpy2
import numpy as np

from .errors import ConfigurationError
from .ring import BaseRing

Exponent = tuple[int, ...]

# Products with fewer term pairs than this stay on the sparse path.
_DENSE_THRESHOLD = 4000
_MAX_DENSE_MODULUS = 2**31


def _add_exp(a: Exponent, b: Exponent) -> Exponent:
    return tuple(x + y for x, y in zip(a, b))


class LaurentPoly:
    """A Laurent polynomial with coefficients in ``ring`` (raw ring elements)."""

    __slots__ = ("terms", "ring", "nvars")

    def __init__(self, terms: Mapping[Exponent, object], ring: BaseRing, nvars: int | None = None, *, clean: bool = False):
        if nvars is None:
            if not terms:
                raise ConfigurationError("cannot infer the number of variables of an empty polynomial")
            nvars = len(next(iter(terms)))
        if clean:
            self.terms = dict(terms)
        else:
            out = {}
            for e, c in terms.items():
                e = tuple(int(x) for x in e)
                if len(e) != nvars:
                    raise ConfigurationError("exponent of the wrong dimension", exponent=e, nvars=nvars)
                c = ring.normalize(c)
                if not ring.is_zero(c):
                    out[e] = c
            self.terms = out
        self.ring = ring
        self.nvars = nvars

    # ------------------------------------------------------------------ basics
    @classmethod
    def from_terms(cls, pairs: Iterable[tuple[Sequence[int], object]], ring: BaseRing, nvars: int | None = None) -> "LaurentPoly":
        acc: dict[Exponent, object] = {}
        for e, c in pairs:
            e = tuple(e)
            c = ring.convert(c)
            acc[e] = ring.add(acc[e], c) if e in acc else c
        return cls(acc, ring, nvars)

    @classmethod
    def constant(cls, c, ring: BaseRing, nvars: int) -> "LaurentPoly":
        return cls({(0,) * nvars: c}, ring, nvars)

    @classmethod
    def monomial(cls, e: Sequence[int], ring: BaseRing, c=1) -> "LaurentPoly":
        return cls({tuple(e): c}, ring, len(e))

    def support(self) -> set[Exponent]:
        return set(self.terms)

    def coefficient(self, e: Sequence[int]):
        return self.terms.get(tuple(e), self.ring.zero)

    def items(self):
        """Terms in lexicographic exponent order."""
        return sorted(self.terms.items())

    def __len__(self):
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, LaurentPoly) and self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def _check(self, other: "LaurentPoly"):
        if self.nvars != other.nvars:
            raise ConfigurationError("dimension mismatch", left=self.nvars, right=other.nvars)
        if self.ring != other.ring:
            raise ConfigurationError("coefficient ring mismatch", left=repr(self.ring), right=repr(other.ring))

    def _new(self, terms, clean=False) -> "LaurentPoly":
        return LaurentPoly(terms, self.ring, self.nvars, clean=clean)

    # ------------------------------------------------------------------ arithmetic
    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        self._check(other)
        R = self.ring
        out = dict(self.terms)
        for e, c in other.terms.items():
            if e in out:
                v = R.add(out[e], c)
                if R.is_zero(v):
                    del out[e]
                else:
                    out[e] = v
            else:
                out[e] = c
        return self._new(out, clean=True)

    def __neg__(self) -> "LaurentPoly":
        return self._new({e: self.ring.neg(c) for e, c in self.terms.items()}, clean=True)

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + (-other)

    def scale(self, c) -> "LaurentPoly":
        R = self.ring
        return self._new({e: R.mul(v, c) for e, v in self.terms.items()})

    def __mul__(self, other: "LaurentPoly") -> "LaurentPoly":
        return multiply(self, other)

    def __pow__(self, e: int) -> "LaurentPoly":
        return power(self, e)

    def shift(self, e: Sequence[int]) -> "LaurentPoly":
        """Multiply by the monomial x^e."""
        return self._new({_add_exp(k, e): c for k, c in self.terms.items()}, clean=True)

    def dilate(self, k: int) -> "LaurentPoly":
        """Substitute x -> x^k."""
        return self._new({tuple(k * x for x in e): c for e, c in self.terms.items()}, clean=True)

    def sigma(self) -> "LaurentPoly":
        """Apply the Frobenius lift to every coefficient."""
        R = self.ring
        return self._new({e: R.sigma(c) for e, c in self.terms.items()})

    def frobenius_image(self) -> "LaurentPoly":
        """f^sigma(x^p)."""
        return self.sigma().dilate(self.ring.prime)

    def cartier(self, p: int) -> "LaurentPoly":
        """Keep exponents divisible by p and divide them by p."""
        out = {}
        for e, c in self.terms.items():
            if all(x % p == 0 for x in e):
                out[tuple(x // p for x in e)] = c
        return self._new(out, clean=True)

    def restrict(self, keep) -> "LaurentPoly":
        """Terms whose exponent satisfies the predicate ``keep``."""
        return self._new({e: c for e, c in self.terms.items() if keep(e)}, clean=True)

    def change_ring(self, ring: BaseRing) -> "LaurentPoly":
        return LaurentPoly({e: ring.convert(c) for e, c in self.terms.items()}, ring, self.nvars)

    def specialize(self, t_value: int) -> "LaurentPoly":
        """Evaluate the parameter t at an integer, giving a scalar-coefficient polynomial."""
        R = self.ring
        if not R.param:
            return self
        target = BaseRing(R.prime, R.precision)
        return LaurentPoly({e: R.evaluate(c, t_value) for e, c in self.terms.items()}, target, self.nvars)

    def bounding_box(self) -> tuple[Exponent, Exponent]:
        es = list(self.terms)
        lo = tuple(min(e[i] for e in es) for i in range(self.nvars))
        hi = tuple(max(e[i] for e in es) for i in range(self.nvars))
        return lo, hi

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        zero = (0,) * self.nvars
        for e, c in self.items():
            txt = self.ring.format(c)
            if e == zero:
                piece = txt
            else:
                piece = f"{txt}*x^({','.join(map(str, e))})"
            pieces.append(piece)
        out = pieces[0]
        for piece in pieces[1:]:
            out += " - " + piece[1:] if piece.startswith("-") else " + " + piece
        return out

    def __repr__(self):
        return f"LaurentPoly({self.to_text()})"


def multiply(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    """Product of two Laurent polynomials over the same ring."""
    a._check(b)
    if not a.terms or not b.terms:
        return LaurentPoly({}, a.ring, a.nvars, clean=True)
    if len(a.terms) * len(b.terms) >= _DENSE_THRESHOLD and _dense_ok(a.ring):
        da, db = DenseBlock.from_poly(a), DenseBlock.from_poly(b)
        return da.mul(db).to_poly()
    return _sparse_mul(a, b)


def _sparse_mul(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    R = a.ring
    acc: dict[Exponent, object] = {}
    if R.param:
        for ea, ca in a.terms.items():
            for eb, cb in b.terms.items():
                e = _add_exp(ea, eb)
                prod = R.mul(ca, cb)
                acc[e] = R.add(acc[e], prod) if e in acc else prod
        return LaurentPoly(acc, R, a.nvars)
    for ea, ca in a.terms.items():
        for eb, cb in b.terms.items():
            e = _add_exp(ea, eb)
            acc[e] = acc.get(e, 0) + ca * cb
    return LaurentPoly(acc, R, a.nvars)


def power(f: LaurentPoly, e: int) -> LaurentPoly:
    """f^e by binary powering, reducing after every product."""
    if e < 0:
        raise ConfigurationError("negative exponent", exponent=e)
    if e == 0:
        return LaurentPoly.constant(f.ring.one, f.ring, f.nvars)
    if _dense_ok(f.ring) and len(f.terms) > 1 and e > 2:
        return PowerCache(f).power(e)
    result, base = None, f
    while e:
        if e & 1:
            result = base if result is None else multiply(result, base)
        e >>= 1
        if e:
            base = multiply(base, base)
    return result


def naive_power(f: LaurentPoly, e: int) -> LaurentPoly:
    """f^e by repeated sparse multiplication (reference implementation)."""
    result = LaurentPoly.constant(f.ring.one, f.ring, f.nvars)
    for _ in range(e):
        result = _sparse_mul(result, f)
    return result


def coefficient(f: LaurentPoly, e: Sequence[int]):
    return f.coefficient(e)


def logarithmic_derivative_numerators(f: LaurentPoly) -> list[LaurentPoly]:
    """[f, x_1 df/dx_1, ..., x_n df/dx_n]."""
    out = [f]
    for i in range(f.nvars):
        out.append(LaurentPoly({e: f.ring.scale(c, e[i]) for e, c in f.terms.items()}, f.ring, f.nvars))
    return out


# ---------------------------------------------------------------------------- dense kernel


def _dense_ok(ring: BaseRing) -> bool:
    return ring.modulus is not None and ring.modulus < _MAX_DENSE_MODULUS


class DenseBlock:
    """Coefficients on a box: ``data[i] = coefficient of x^(offset + i)``.

    For parameter rings the last axis is the t-degree (starting at t^0).
    """

    __slots__ = ("data", "offset", "ring", "nvars")

    def __init__(self, data: np.ndarray, offset: Exponent, ring: BaseRing, nvars: int):
        self.data = data
        self.offset = tuple(offset)
        self.ring = ring
        self.nvars = nvars

    @classmethod
    def from_poly(cls, f: LaurentPoly) -> "DenseBlock":
        R = f.ring
        lo, hi = f.bounding_box()
        shape = [h - l + 1 for l, h in zip(lo, hi)]
        if R.param:
            shape.append(max((len(c) for c in f.terms.values()), default=1) or 1)
        data = np.zeros(shape, dtype=np.int64)
        for e, c in f.terms.items():
            idx = tuple(x - l for x, l in zip(e, lo))
            if R.param:
                data[idx][: len(c)] = c
            else:
                data[idx] = c
        return cls(data, lo, R, f.nvars)

    @classmethod
    def one(cls, ring: BaseRing, nvars: int) -> "DenseBlock":
        shape = (1,) * nvars + ((1,) if ring.param else ())
        return cls(np.ones(shape, dtype=np.int64), (0,) * nvars, ring, nvars)

    def to_poly(self) -> LaurentPoly:
        R = self.ring
        out = {}
        n = self.nvars
        if R.param:
            mask = self.data.any(axis=-1)
            for idx in zip(*np.nonzero(mask)):
                vec = self.data[idx]
                last = len(vec)
                while last and vec[last - 1] == 0:
                    last -= 1
                out[tuple(int(i) + o for i, o in zip(idx, self.offset))] = tuple(int(v) for v in vec[:last])
        else:
            for idx in zip(*np.nonzero(self.data)):
                out[tuple(int(i) + o for i, o in zip(idx, self.offset))] = int(self.data[idx])
        return LaurentPoly(out, R, n, clean=True)

    def trim(self) -> "DenseBlock":
        """Drop all-zero margins along the x axes and trailing zero t-degrees."""
        data, offset = self.data, list(self.offset)
        if not data.any():
            shape = (1,) * self.nvars + ((1,) if self.ring.param else ())
            return DenseBlock(np.zeros(shape, dtype=np.int64), tuple(offset), self.ring, self.nvars)
        slices = []
        for ax in range(data.ndim):
            other = tuple(i for i in range(data.ndim) if i != ax)
            nz = np.nonzero(data.any(axis=other) if other else data)[0]
            if self.ring.param and ax == data.ndim - 1:
                slices.append(slice(0, int(nz[-1]) + 1))
            else:
                slices.append(slice(int(nz[0]), int(nz[-1]) + 1))
                offset[ax] += int(nz[0])
        return DenseBlock(data[tuple(slices)], tuple(offset), self.ring, self.nvars)

    def mul(self, other: "DenseBlock") -> "DenseBlock":
        R = self.ring
        data = kronecker_multiply(self.data, other.data, R.modulus)
        if R.param and R.tcap is not None and data.shape[-1] > R.tcap:
            data = data[..., : R.tcap]
        offset = _add_exp(self.offset, other.offset)
        return DenseBlock(data, offset, R, self.nvars).trim()

    def coefficient(self, e: Exponent):
        idx = tuple(x - o for x, o in zip(e, self.offset))
        if any(i < 0 or i >= s for i, s in zip(idx, self.data.shape)):
            return self.ring.zero
        v = self.data[idx]
        if self.ring.param:
            return self.ring.normalize(tuple(int(x) for x in v))
        return int(v)


def _pack(X: np.ndarray, target_shape: tuple[int, ...], width: int) -> gmpy2.mpz:
    padded_shape = (X.shape[0],) + target_shape[1:]
    if padded_shape != X.shape:
        padded = np.zeros(padded_shape, dtype=np.uint64)
        padded[tuple(slice(0, s) for s in X.shape)] = X
    else:
        padded = X.astype(np.uint64, copy=False)
    raw = np.ascontiguousarray(padded).reshape(-1).astype("<u8", copy=False).view(np.uint8).reshape(-1, 8)
    if width < 8:
        raw = raw[:, :width]
    elif width > 8:
        raw = np.concatenate([raw, np.zeros((raw.shape[0], width - 8), dtype=np.uint8)], axis=1)
    return gmpy2.mpz.from_bytes(np.ascontiguousarray(raw).tobytes(), "little")


def _unpack(value: gmpy2.mpz, shape: tuple[int, ...], width: int, modulus: int) -> np.ndarray:
    total = int(np.prod(shape))
    buf = np.frombuffer(value.to_bytes(total * width, "little"), dtype=np.uint8).reshape(total, width)
    limbs = -(-width // 8)
    if width != limbs * 8:
        full = np.zeros((total, limbs * 8), dtype=np.uint8)
        full[:, :width] = buf
        buf = full
    words = buf.view("<u8").reshape(total, limbs)
    q = np.uint64(modulus)
    res = words[:, 0] % q
    for k in range(1, limbs):
        factor = np.uint64(pow(2, 64 * k, modulus))
        res = (res + (words[:, k] % q) * factor) % q
    return res.astype(np.int64).reshape(shape)


def kronecker_multiply(A: np.ndarray, B: np.ndarray, modulus: int) -> np.ndarray:
    """Full multidimensional convolution of two nonnegative arrays, reduced mod ``modulus``."""
    shape = tuple(a + b - 1 for a, b in zip(A.shape, B.shape))
    nnz = min(int(np.count_nonzero(A)), int(np.count_nonzero(B)))
    if nnz == 0:
        return np.zeros(shape, dtype=np.int64)
    bound = (modulus - 1) ** 2 * nnz
    width = max(1, (bound.bit_length() + 7) // 8)
    pa = _pack(A, shape, width)
    pb = pa if B is A else _pack(B, shape, width)
    return _unpack(pa * pb, shape, width, modulus)


class PowerCache:
    """Powers of one polynomial, sharing repeated squarings between requests."""

    def __init__(self, f: LaurentPoly):
        if not _dense_ok(f.ring):
            raise ConfigurationError("dense powering needs a modulus below 2^31")
        self.f = f
        self.ring = f.ring
        self.squares = [DenseBlock.from_poly(f)]
        self.memo: dict[int, DenseBlock] = {}

    def _square(self, k: int) -> DenseBlock:
        while len(self.squares) <= k:
            last = self.squares[-1]
            self.squares.append(last.mul(last))
        return self.squares[k]

    def dense_power(self, e: int) -> DenseBlock:
        if e == 0:
            return DenseBlock.one(self.ring, self.f.nvars)
        if e in self.memo:
            return self.memo[e]
        result = None
        k = 0
        while e >> k:
            if (e >> k) & 1:
                sq = self._square(k)
                result = sq if result is None else result.mul(sq)
            k += 1
        if len(self.memo) > 8:
            self.memo.clear()
        self.memo[e] = result
        return result

    def power(self, e: int) -> LaurentPoly:
        return self.dense_power(e).to_poly()

    def coefficients(self, e: int, targets: Iterable[Sequence[int]]) -> dict[Exponent, object]:
        """Selected coefficients of f^e without forming f^e.

        f^e = f^a * f^b with a the largest power of two not exceeding e; each
        requested coefficient is a finite correlation of the two factors.
        """
        targets = [tuple(t) for t in targets]
        if e <= 2:
            block = self.dense_power(e)
            return {t: block.coefficient(t) for t in targets}
        k = e.bit_length() - 1
        A = self._square(k)
        B = self.dense_power(e - (1 << k))
        return {t: _correlate(A, B, t) for t in targets}


def _correlate(A: DenseBlock, B: DenseBlock, target: Exponent):
    """Coefficient of x^target in the product of two dense blocks."""
    R = A.ring
    n = A.nvars
    q = R.modulus
    D = [t - a - b for t, a, b in zip(target, A.offset, B.offset)]
    lo = [max(0, d - sb + 1) for d, sb in zip(D, B.data.shape[:n])]
    hi = [min(sa - 1, d) for d, sa in zip(D, A.data.shape[:n])]
    if any(l > h for l, h in zip(lo, hi)):
        return R.zero
    a_sl = tuple(slice(l, h + 1) for l, h in zip(lo, hi))
    b_sl = tuple(slice(d - h, d - l + 1) for d, l, h in zip(D, lo, hi))
    Aw = A.data[a_sl]
    Bw = B.data[b_sl][(slice(None, None, -1),) * n]
    if not R.param:
        return int(((Aw * Bw) % q).sum() % q)
    ta, tb = Aw.shape[-1], Bw.shape[-1]
    Af = Aw.reshape(-1, ta)
    Bf = Bw.reshape(-1, tb)
    K = Af.shape[0]
    if K * (q - 1) ** 2 < 2**53:
        M = np.rint(Af.T.astype(np.float64) @ Bf.astype(np.float64)).astype(np.int64) % q
    else:
        chunk = max(1, (2**62) // ((q - 1) ** 2 + 1))
        M = np.zeros((ta, tb), dtype=np.int64)
        for start in range(0, K, chunk):
            M = (M + (Af[start : start + chunk].T @ Bf[start : start + chunk]) % q) % q
    limit = ta + tb - 1
    if R.tcap is not None:
        limit = min(limit, R.tcap)
    flipped = M[:, ::-1]
    out = [int(flipped.diagonal(tb - 1 - k).sum() % q) for k in range(limit)]
    return R.normalize(out)


def multinomial_coefficient(f: LaurentPoly, e: int, target: Sequence[int]):
    """Coefficient of x^target in f^e by enumerating exponent distributions.

    Independent of every multiplication routine above; intended as a test oracle
    for small e.
    """
    R = f.ring
    items = list(f.terms.items())
    target = tuple(target)
    total = R.zero
    from math import factorial

    def rec(i: int, remaining: int, pos: Exponent, counts: list[int]):
        nonlocal total
        if i == len(items) - 1:
            final = _add_exp(pos, tuple(remaining * x for x in items[i][0]))
            if final != target:
                return
            counts = counts + [remaining]
            mult = factorial(e)
            for c in counts:
                mult //= factorial(c)
            term = R.normalize(mult) if not R.param else R.normalize((mult,))
            for (_, c), k in zip(items, counts):
                for _ in range(k):
                    term = R.mul(term, c)
            total = R.add(total, term)
            return
        for k in range(remaining + 1):
            rec(i + 1, remaining - k, _add_exp(pos, tuple(k * x for x in items[i][0])), counts + [k])

    if not items:
        return R.zero
    rec(0, e, (0,) * f.nvars, [])
    return total


def lattice_box(lo: Sequence[int], hi: Sequence[int]):
    return iproduct(*[range(l, h + 1) for l, h in zip(lo, hi)])
