"""Coefficient rings: residues mod p^s, truncated Laurent series in a parameter t,
and small-matrix linear algebra over them using unit pivots only.

Two layers live here.

* Value types ``PAdicScalar`` and ``ParamSeries`` used by matrices and reports.
* ``BaseRing``, a lightweight context that performs the same arithmetic on raw
  Python objects (``int`` or ``tuple`` of ints).  Polynomial code uses it to
  avoid allocating one object per coefficient.

Series precision is tracked absolutely: a ``ParamSeries`` is known modulo
``t^cap``.  Allowing negative exponents (a finite number of poles at t = 0)
lets us invert matrices whose entries have non-unit constant terms but a unit
coefficient further up, which happens for non-interior regions.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Iterable, Sequence

from .errors import ConfigurationError, NotAUnit, NotInvertibleModP


def p_valuation(n: int, p: int, cap: int | None = None) -> int | None:
    """Exponent of p in n; zero has valuation ``cap`` (``None`` meaning infinity)."""
    if n == 0:
        return cap
    v = 0
    while n % p == 0:
        n //= p
        v += 1
        if cap is not None and v >= cap:
            return cap
    return v


def factorial_valuation(r: int, p: int) -> int:
    """ord_p(r!) by Legendre's formula."""
    e, q = 0, p
    while q <= r:
        e += r // q
        q *= p
    return e


# --------------------------------------------------------------------------- scalars


@dataclass(frozen=True)
class PAdicScalar:
    """An element of Z/p^s, stored as its residue in [0, p^s)."""

    value: int
    precision: int
    prime: int

    def __post_init__(self):
        if self.precision < 1:
            raise ConfigurationError("precision must be positive", precision=self.precision)
        object.__setattr__(self, "value", self.value % self.prime**self.precision)

    @property
    def modulus(self) -> int:
        return self.prime**self.precision

    def _coerce(self, other) -> "PAdicScalar":
        if isinstance(other, PAdicScalar):
            if other.prime != self.prime or other.precision != self.precision:
                raise ConfigurationError(
                    "mismatched moduli",
                    left=(self.prime, self.precision),
                    right=(other.prime, other.precision),
                )
            return other
        if isinstance(other, int):
            return PAdicScalar(other, self.precision, self.prime)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return PAdicScalar(self.value + o.value, self.precision, self.prime)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return PAdicScalar(self.value - o.value, self.precision, self.prime)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return PAdicScalar(self.value * o.value, self.precision, self.prime)

    __rmul__ = __mul__

    def __neg__(self):
        return PAdicScalar(-self.value, self.precision, self.prime)

    def __int__(self):
        return self.value

    def valuation(self) -> int:
        return p_valuation(self.value, self.prime, self.precision)

    def is_unit(self) -> bool:
        return self.value % self.prime != 0

    def is_zero(self) -> bool:
        return self.value == 0

    def inverse(self) -> "PAdicScalar":
        return unit_inverse(self)

    def reduce(self, precision: int) -> "PAdicScalar":
        if precision > self.precision:
            raise ConfigurationError("cannot raise precision", have=self.precision, want=precision)
        return PAdicScalar(self.value, precision, self.prime)

    def signed(self) -> int:
        """Representative in (-p^s/2, p^s/2]."""
        q = self.modulus
        return self.value - q if self.value > q // 2 else self.value

    def zero_like(self) -> "PAdicScalar":
        return PAdicScalar(0, self.precision, self.prime)

    def one_like(self) -> "PAdicScalar":
        return PAdicScalar(1, self.precision, self.prime)

    def frobenius(self) -> "PAdicScalar":
        return self

    def derivative(self, kind: str = "theta") -> "PAdicScalar":
        return self.zero_like()

    def __repr__(self):
        return f"{self.value} (mod {self.prime}^{self.precision})"


def unit_inverse(a: PAdicScalar) -> PAdicScalar:
    """Inverse of a unit mod p^s.

    >>> unit_inverse(PAdicScalar(2, 3, 5)).value
    63
    """
    if not a.is_unit():
        raise NotAUnit(f"{a.value} is not a unit mod {a.prime}^{a.precision}", valuation=a.valuation())
    return PAdicScalar(pow(a.value, -1, a.modulus), a.precision, a.prime)


def padic_fraction(num: int, den: int, p: int, s: int) -> PAdicScalar:
    """The rational num/den as an element of Z/p^s; requires ord_p(num) >= ord_p(den)."""
    if den == 0:
        raise ZeroDivisionError("zero denominator")
    if num == 0:
        return PAdicScalar(0, s, p)
    vn, vd = p_valuation(num, p), p_valuation(den, p)
    if vn < vd:
        raise NotAUnit(f"{num}/{den} is not p-integral", valuation=vn - vd)
    q = p**s
    unit_num = num // p**vn
    unit_den = den // p**vd
    shift = vn - vd
    if shift >= s:
        return PAdicScalar(0, s, p)
    return PAdicScalar(unit_num * pow(unit_den, -1, q) * p**shift, s, p)


def p_power_over_factorial(r: int, p: int, s: int) -> PAdicScalar:
    """p^r / r! reduced mod p^s."""
    if p == 2:
        raise ConfigurationError("p = 2 is not supported here", prime=p)
    if r < 0:
        raise ConfigurationError("r must be nonnegative", r=r)
    e = factorial_valuation(r, p)
    if r - e >= s:
        return PAdicScalar(0, s, p)
    return padic_fraction(p**r, factorial(r), p, s)


# --------------------------------------------------------------------------- series


def _strip(shift: int, coeffs: list[int]) -> tuple[int, tuple[int, ...]]:
    lo = 0
    while lo < len(coeffs) and coeffs[lo] == 0:
        lo += 1
    hi = len(coeffs)
    while hi > lo and coeffs[hi - 1] == 0:
        hi -= 1
    if lo == hi:
        return 0, ()
    return shift + lo, tuple(coeffs[lo:hi])


def _min_cap(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class ParamSeries:
    """A truncated Laurent series in t over Z/p^s (or over Z when ``precision`` is None).

    The series equals ``sum(coeffs[i] * t**(shift + i))`` modulo ``t**cap``;
    ``cap=None`` means the value is exact.
    """

    __slots__ = ("prime", "precision", "shift", "coeffs", "cap")

    def __init__(
        self,
        coeffs: Sequence[int],
        prime: int,
        precision: int | None,
        cap: int | None = None,
        shift: int = 0,
    ):
        q = prime**precision if precision is not None else None
        vals = [int(c) % q if q is not None else int(c) for c in coeffs]
        if cap is not None:
            keep = max(0, cap - shift)
            vals = vals[:keep]
        self.prime = prime
        self.precision = precision
        self.cap = cap
        self.shift, self.coeffs = _strip(shift, vals)

    # construction helpers
    @classmethod
    def constant(cls, c: int, prime: int, precision: int | None, cap: int | None = None):
        return cls([c], prime, precision, cap)

    @classmethod
    def monomial(cls, c: int, k: int, prime: int, precision: int | None, cap: int | None = None):
        return cls([c], prime, precision, cap, shift=k)

    def _like(self, coeffs, cap, shift=0) -> "ParamSeries":
        return ParamSeries(coeffs, self.prime, self.precision, cap, shift)

    def zero_like(self) -> "ParamSeries":
        return self._like([], None)

    def one_like(self) -> "ParamSeries":
        return self._like([1], None)

    @property
    def modulus(self) -> int | None:
        return self.prime**self.precision if self.precision is not None else None

    # queries
    def t_valuation(self) -> float | int:
        if self.coeffs:
            return self.shift
        return self.cap if self.cap is not None else float("inf")

    def coefficient(self, k: int) -> int:
        i = k - self.shift
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        if self.cap is not None and k >= self.cap:
            raise ConfigurationError("coefficient beyond known precision", degree=k, cap=self.cap)
        return 0

    def terms(self) -> dict[int, int]:
        return {self.shift + i: c for i, c in enumerate(self.coeffs) if c}

    def is_zero(self) -> bool:
        return not self.coeffs

    def valuation(self) -> int | None:
        """p-adic valuation of the known part (capped at the precision)."""
        best = self.precision
        for c in self.coeffs:
            v = p_valuation(c, self.prime, self.precision)
            if v is not None and (best is None or v < best):
                best = v
        return best

    def unit_degree(self) -> int | None:
        """Lowest degree whose coefficient is a unit mod p (None if there is none)."""
        for i, c in enumerate(self.coeffs):
            if c % self.prime:
                return self.shift + i
        return None

    def is_unit(self) -> bool:
        return self.unit_degree() is not None

    def signed_terms(self) -> dict[int, int]:
        q = self.modulus
        if q is None:
            return self.terms()
        return {k: (c - q if c > q // 2 else c) for k, c in self.terms().items()}

    # arithmetic
    def _coerce(self, other) -> "ParamSeries":
        if isinstance(other, ParamSeries):
            if other.prime != self.prime or other.precision != self.precision:
                raise ConfigurationError(
                    "mismatched coefficient rings",
                    left=(self.prime, self.precision),
                    right=(other.prime, other.precision),
                )
            return other
        if isinstance(other, PAdicScalar):
            if other.prime != self.prime or other.precision != self.precision:
                raise ConfigurationError("mismatched coefficient rings")
            return self._like([other.value], None)
        if isinstance(other, int):
            return self._like([other], None)
        return NotImplemented

    def _add(self, o: "ParamSeries", sign: int) -> "ParamSeries":
        cap = _min_cap(self.cap, o.cap)
        if not self.coeffs and not o.coeffs:
            return self._like([], cap)
        lo = min(x.shift for x in (self, o) if x.coeffs)
        hi = max(x.shift + len(x.coeffs) for x in (self, o) if x.coeffs)
        out = [0] * (hi - lo)
        for i, c in enumerate(self.coeffs):
            out[self.shift - lo + i] += c
        for i, c in enumerate(o.coeffs):
            out[o.shift - lo + i] += sign * c
        return self._like(out, cap, lo)

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._add(o, 1)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._add(o, -1)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o._add(self, -1)

    def __neg__(self):
        return self._like([-c for c in self.coeffs], self.cap, self.shift)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        va, vb = self.t_valuation(), o.t_valuation()
        caps = []
        if self.cap is not None:
            caps.append(self.cap + vb)
        if o.cap is not None:
            caps.append(o.cap + va)
        cap = None
        if caps:
            c = min(caps)
            cap = None if c == float("inf") else int(c)
        if not self.coeffs or not o.coeffs:
            return self._like([], cap)
        shift = self.shift + o.shift
        limit = None if cap is None else cap - shift
        out = _convolve(self.coeffs, o.coeffs, limit, self.modulus)
        return self._like(out, cap, shift)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "ParamSeries":
        if e < 0:
            return self.inverse() ** (-e)
        result, base = self.one_like(), self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, ParamSeries):
            try:
                other = self._coerce(other)
            except ConfigurationError:
                return False
            if other is NotImplemented:
                return NotImplemented
        return (
            self.prime == other.prime
            and self.precision == other.precision
            and self.cap == other.cap
            and self.shift == other.shift
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.prime, self.precision, self.cap, self.shift, self.coeffs))

    def inverse(self) -> "ParamSeries":
        """Inverse in the t-adically completed Laurent ring.

        The lowest unit coefficient sits at degree d.  Terms below d are
        divisible by p, so they are absorbed by a geometric series that
        terminates modulo p^s.
        """
        d = self.unit_degree()
        if d is None:
            raise NotAUnit("series has no unit coefficient", valuation=self.valuation())
        if self.precision is None:
            if self.cap is None and len(self.coeffs) == 1 and self.coeffs[0] in (1, -1):
                return self._like([self.coeffs[0]], None, -self.shift)
            raise ConfigurationError("inverse of an exact integer series needs a finite cap")
        if self.cap is None:
            raise ConfigurationError("inverse of an exact series needs a finite cap")
        upper = {k - d: c for k, c in self.terms().items() if k >= d}
        rel = self.cap - d
        unit_part = [upper.get(i, 0) for i in range(rel)]
        inv = _power_series_inverse(unit_part, rel, self.modulus)
        x = self._like(inv, self.cap - 2 * d, -d)
        low = {k: c for k, c in self.terms().items() if k < d}
        if not low:
            return x
        low_part = self._like([low.get(k, 0) for k in range(self.shift, d)], None, self.shift)
        q = -(x * low_part)
        total, term = x, x
        for _ in range(self.precision):
            term = term * q
            total = total + term
        return total

    def frobenius(self) -> "ParamSeries":
        """t -> t^p, truncated at the same cap."""
        p = self.prime
        cap = self.cap
        new_cap = None if cap is None else min(cap, p * cap)
        if not self.coeffs:
            return self._like([], new_cap)
        out = [0] * ((len(self.coeffs) - 1) * p + 1)
        out[::p] = self.coeffs
        return self._like(out, new_cap, self.shift * p)

    def derivative(self, kind: str = "theta") -> "ParamSeries":
        """``theta`` is t d/dt (keeps the cap); ``d/dt`` lowers the cap by one."""
        scaled = [(self.shift + i) * c for i, c in enumerate(self.coeffs)]
        if kind in ("theta", "t*d/dt", "t·d/dt"):
            return self._like(scaled, self.cap, self.shift)
        if kind in ("d/dt", "ddt"):
            cap = None if self.cap is None else self.cap - 1
            return self._like(scaled, cap, self.shift - 1)
        if kind == "none":
            return self._like([], self.cap)
        raise ConfigurationError(f"unknown derivation {kind!r}")

    def reduce(self, precision: int) -> "ParamSeries":
        if self.precision is not None and precision > self.precision:
            raise ConfigurationError("cannot raise precision", have=self.precision, want=precision)
        return ParamSeries(self.coeffs, self.prime, precision, self.cap, self.shift)

    def truncate(self, cap: int) -> "ParamSeries":
        return self._like(self.coeffs, _min_cap(self.cap, cap), self.shift)

    def __repr__(self):
        parts = []
        for k, c in sorted(self.signed_terms().items()):
            if k == 0:
                parts.append(f"{c}")
            elif k == 1:
                parts.append(f"{c}*t")
            else:
                parts.append(f"{c}*t^{k}")
        body = " + ".join(parts) if parts else "0"
        body = body.replace("+ -", "- ")
        if self.cap is not None:
            body += f" + O(t^{self.cap})"
        return body


def _convolve(a: Sequence[int], b: Sequence[int], limit: int | None, modulus: int | None) -> list[int]:
    n = len(a) + len(b) - 1
    if limit is not None:
        n = min(n, max(limit, 0))
    out = [0] * n
    for i, x in enumerate(a):
        if not x or i >= n:
            continue
        for j in range(min(len(b), n - i)):
            y = b[j]
            if y:
                out[i + j] += x * y
    if modulus is not None:
        out = [c % modulus for c in out]
    return out


def _power_series_inverse(a: Sequence[int], n: int, modulus: int) -> list[int]:
    """First n coefficients of 1/a for a power series a with unit constant term."""
    if n <= 0:
        return []
    c0 = pow(a[0], -1, modulus)
    out = [0] * n
    out[0] = c0
    for k in range(1, n):
        acc = 0
        for j in range(1, min(k, len(a) - 1) + 1):
            acc += a[j] * out[k - j]
        out[k] = (-acc * c0) % modulus
    return out


def series_frobenius(g: ParamSeries) -> ParamSeries:
    """The Frobenius lift t -> t^p on a truncated series."""
    return g.frobenius()


def series_derivation(g: ParamSeries, kind: str = "theta") -> ParamSeries:
    """t d/dt (``theta``) or d/dt applied termwise."""
    return g.derivative(kind)


def congruent(a, b, precision: int) -> bool:
    """a == b mod p^precision (and modulo the smaller of the two t-caps)."""
    d = a - b
    if isinstance(d, int):
        return d % (_prime_of(a, b) ** precision) == 0
    if isinstance(d, PAdicScalar):
        return d.value % d.prime**precision == 0
    q = d.prime**precision
    return all(c % q == 0 for c in d.coeffs)


def _prime_of(a, b) -> int:
    for x in (a, b):
        if hasattr(x, "prime"):
            return x.prime
    raise ConfigurationError("cannot determine the prime for an integer comparison")


def difference_valuation(a, b, precision: int | None = None):
    d = a - b
    if isinstance(d, (PAdicScalar, ParamSeries)):
        v = d.valuation()
        if precision is not None and v is not None:
            v = min(v, precision)
        return v
    return None


def element_cap(x) -> int | None:
    return x.cap if isinstance(x, ParamSeries) else None


# --------------------------------------------------------------------------- raw rings


class BaseRing:
    """Arithmetic on raw coefficients.

    ``param`` rings hold tuples (coefficients of 1, t, t^2, ...), truncated at
    ``tcap`` when given.  Otherwise elements are ints.  ``precision=None``
    means no reduction (exact integers).
    """

    __slots__ = ("prime", "precision", "param", "tcap", "modulus")

    def __init__(self, prime: int | None = None, precision: int | None = None, param: bool = False, tcap: int | None = None):
        if precision is not None and prime is None:
            raise ConfigurationError("a precision needs a prime")
        if tcap is not None and not param:
            raise ConfigurationError("tcap only applies to parameter rings")
        self.prime = prime
        self.precision = precision
        self.param = param
        self.tcap = tcap
        self.modulus = prime**precision if precision is not None else None

    @classmethod
    def integers(cls, prime: int | None = None) -> "BaseRing":
        return cls(prime, None)

    @classmethod
    def residues(cls, prime: int, precision: int) -> "BaseRing":
        return cls(prime, precision)

    @classmethod
    def series(cls, prime: int | None, precision: int | None, tcap: int | None) -> "BaseRing":
        return cls(prime, precision, True, tcap)

    def key(self):
        return (self.prime, self.precision, self.param, self.tcap)

    def __eq__(self, other):
        return isinstance(other, BaseRing) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        base = "ZZ" if self.modulus is None else f"Z/{self.prime}^{self.precision}"
        if self.param:
            return f"{base}[t]" + (f"/t^{self.tcap}" if self.tcap is not None else "")
        return base

    def with_precision(self, precision: int | None) -> "BaseRing":
        return BaseRing(self.prime, precision, self.param, self.tcap)

    def with_tcap(self, tcap: int | None) -> "BaseRing":
        return BaseRing(self.prime, self.precision, self.param, tcap)

    # raw arithmetic
    def normalize(self, x):
        q = self.modulus
        if self.param:
            if isinstance(x, int):
                x = (x,)
            vals = list(x)
            if self.tcap is not None:
                vals = vals[: self.tcap]
            if q is not None:
                vals = [c % q for c in vals]
            while vals and vals[-1] == 0:
                vals.pop()
            return tuple(vals)
        if isinstance(x, tuple):
            raise ConfigurationError("parameter coefficient given to a scalar ring")
        return x % q if q is not None else x

    @property
    def zero(self):
        return () if self.param else 0

    @property
    def one(self):
        return self.normalize(1)

    def is_zero(self, x) -> bool:
        return not x if self.param else x == 0

    def add(self, a, b):
        if self.param:
            n = max(len(a), len(b))
            return self.normalize([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])
        return self.normalize(a + b)

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def neg(self, a):
        if self.param:
            return self.normalize([-c for c in a])
        return self.normalize(-a)

    def mul(self, a, b):
        if self.param:
            if not a or not b:
                return ()
            return self.normalize(_convolve(a, b, self.tcap, self.modulus))
        return self.normalize(a * b)

    def scale(self, a, k: int):
        if self.param:
            return self.normalize([k * c for c in a])
        return self.normalize(k * a)

    def sigma(self, a):
        """Frobenius lift: identity on scalars, t -> t^p on parameter coefficients."""
        if not self.param or not a:
            return a
        p = self.prime
        if p is None:
            raise ConfigurationError("Frobenius needs a prime")
        out = [0] * ((len(a) - 1) * p + 1)
        out[::p] = a
        return self.normalize(out)

    def exact_divide(self, a, d: int):
        """a / d for an element all of whose coefficients are divisible by d."""
        if self.param:
            if any(c % d for c in a):
                raise ArithmeticError("inexact division")
            return self.normalize([c // d for c in a])
        if a % d:
            raise ArithmeticError("inexact division")
        return self.normalize(a // d)

    def max_abs(self, a) -> int:
        if self.param:
            return max((abs(c) for c in a), default=0)
        return abs(a)

    def t_degree(self, a) -> int:
        return len(a) if self.param else 1

    def is_unit(self, a) -> bool:
        p = self.prime
        if self.modulus is None and (p is None or self.param):
            return a in (1, -1, (1,), (-1,))
        if self.param:
            return bool(a) and a[0] % p != 0
        return a % p != 0

    def inverse(self, a):
        if self.modulus is None:
            if a in (1, -1, (1,), (-1,)):
                return a
            raise NotAUnit("not invertible over the integers")
        if self.param:
            if not a or a[0] % self.prime == 0:
                raise NotAUnit("constant term is not a unit", valuation=None)
            if self.tcap is None:
                raise ConfigurationError("series inverse needs a finite t-cap")
            return self.normalize(_power_series_inverse(a, self.tcap, self.modulus))
        if a % self.prime == 0:
            raise NotAUnit(f"{a} is not a unit", valuation=p_valuation(a, self.prime, self.precision))
        return pow(a, -1, self.modulus)

    def convert(self, x, source: "BaseRing | None" = None):
        """Map a raw element from another ring (or a plain int / list) into this one."""
        if isinstance(x, (list, tuple)):
            if not self.param:
                if len(x) > 1 and any(x[1:]):
                    raise ConfigurationError("cannot map a parameter series to a scalar ring")
                return self.normalize(x[0] if x else 0)
            return self.normalize(tuple(x))
        return self.normalize(x)

    def evaluate(self, x, t_value: int):
        """Substitute an integer for t, landing in the scalar ring with the same modulus."""
        if not self.param:
            return x
        total = 0
        for c in reversed(x):
            total = total * t_value + c
        return total % self.modulus if self.modulus is not None else total

    def to_element(self, x):
        """Wrap a raw element as a value type."""
        if self.param:
            return ParamSeries(x, self.prime or 0, self.precision, self.tcap)
        if self.modulus is None:
            return x
        return PAdicScalar(x, self.precision, self.prime)

    def from_element(self, e):
        if isinstance(e, ParamSeries):
            if e.shift < 0:
                raise ConfigurationError("element has poles in t")
            return self.normalize([e.coefficient(k) if k < e.shift + len(e.coeffs) else 0 for k in range(0, e.shift + len(e.coeffs))])
        if isinstance(e, PAdicScalar):
            return self.normalize(e.value)
        return self.normalize(e)

    def signed(self, c: int) -> int:
        q = self.modulus
        if q is None:
            return c
        return c - q if c > q // 2 else c

    def format(self, x) -> str:
        if self.param:
            parts = []
            for k, c in enumerate(x):
                if not c:
                    continue
                c = self.signed(c)
                parts.append(str(c) if k == 0 else (f"{c}*t" if k == 1 else f"{c}*t^{k}"))
            return "(" + " + ".join(parts).replace("+ -", "- ") + ")" if parts else "0"
        return str(self.signed(x))


# --------------------------------------------------------------------------- matrices


class RingMatrix:
    """A square (or rectangular) matrix of ring elements with optional row/column labels."""

    __slots__ = ("rows", "labels")

    def __init__(self, rows: Iterable[Iterable], labels: Sequence | None = None):
        self.rows = tuple(tuple(r) for r in rows)
        self.labels = tuple(labels) if labels is not None else None
        widths = {len(r) for r in self.rows}
        if len(widths) > 1:
            raise ConfigurationError("ragged matrix")

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def entry(self, u, v):
        """Entry addressed by labels."""
        i, j = self.labels.index(tuple(u)), self.labels.index(tuple(v))
        return self.rows[i][j]

    def __iter__(self):
        return iter(self.rows)

    def map(self, fn) -> "RingMatrix":
        return RingMatrix([[fn(x) for x in r] for r in self.rows], self.labels)

    def transpose(self) -> "RingMatrix":
        return RingMatrix(list(zip(*self.rows)), self.labels)

    def _sample(self):
        return self.rows[0][0]

    def __add__(self, other: "RingMatrix") -> "RingMatrix":
        return RingMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.labels)

    def __sub__(self, other: "RingMatrix") -> "RingMatrix":
        return RingMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.labels)

    def __neg__(self):
        return self.map(lambda x: -x)

    def __matmul__(self, other: "RingMatrix") -> "RingMatrix":
        if self.ncols != other.nrows:
            raise ConfigurationError("shape mismatch", left=self.shape, right=other.shape)
        cols = list(zip(*other.rows))
        out = []
        for r in self.rows:
            row = []
            for c in cols:
                acc = r[0] * c[0]
                for a, b in zip(r[1:], c[1:]):
                    acc = acc + a * b
                row.append(acc)
            out.append(row)
        return RingMatrix(out, self.labels if self.labels is not None else other.labels)

    def scale(self, c) -> "RingMatrix":
        return self.map(lambda x: x * c)

    def frobenius(self) -> "RingMatrix":
        return self.map(lambda x: x.frobenius() if hasattr(x, "frobenius") else x)

    def derivative(self, kind: str) -> "RingMatrix":
        return self.map(lambda x: x.derivative(kind) if hasattr(x, "derivative") else 0 * x)

    def reduce(self, precision: int) -> "RingMatrix":
        return self.map(lambda x: x.reduce(precision))

    def truncate(self, cap: int) -> "RingMatrix":
        return self.map(lambda x: x.truncate(cap) if isinstance(x, ParamSeries) else x)

    def min_cap(self) -> int | None:
        caps = [x.cap for r in self.rows for x in r if isinstance(x, ParamSeries) and x.cap is not None]
        return min(caps) if caps else None

    @classmethod
    def identity(cls, n: int, like, labels: Sequence | None = None) -> "RingMatrix":
        zero, one = like.zero_like(), like.one_like()
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)], labels)

    def __eq__(self, other):
        return isinstance(other, RingMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def invert(self) -> "RingMatrix":
        return matrix_invert(self)

    def is_invertible_mod_p(self) -> bool:
        try:
            matrix_invert(self, check=False)
        except NotInvertibleModP:
            return False
        return True

    def __repr__(self):
        return "RingMatrix(" + repr([list(r) for r in self.rows]) + ")"


def _pivot_key(x):
    """Smaller is better; None means not usable as a pivot."""
    if isinstance(x, ParamSeries):
        d = x.unit_degree()
        return None if d is None else (d, -(x.cap or 0))
    if isinstance(x, PAdicScalar):
        return (0, 0) if x.is_unit() else None
    raise ConfigurationError("matrix inversion needs PAdicScalar or ParamSeries entries")


def rank_mod_p(A: RingMatrix) -> int:
    """Rank over F_p of the reduction of a scalar matrix (series: lowest-order reduction)."""
    p = A._sample().prime
    rows = []
    for r in A.rows:
        row = []
        for x in r:
            if isinstance(x, PAdicScalar):
                row.append(x.value % p)
            else:
                row.append(x.coefficient(0) % p if (x.cap is None or x.cap > 0) and x.shift >= 0 else 0)
        rows.append(row)
    rank, ncols = 0, len(rows[0]) if rows else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][col], -1, p)
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                f = rows[i][col] * inv % p
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def matrix_invert(A: RingMatrix, check: bool = True) -> RingMatrix:
    """Gauss-Jordan inversion with unit pivots only.

    For series entries the pivot is a Laurent unit of lowest possible degree,
    which keeps the loss of t-adic precision minimal.
    """
    n = A.nrows
    if n != A.ncols:
        raise ConfigurationError("matrix is not square", shape=A.shape)
    if n == 0:
        return A
    like = A._sample()
    work = [list(r) for r in A.rows]
    inv = [list(r) for r in RingMatrix.identity(n, like).rows]
    for col in range(n):
        best, best_key = None, None
        for i in range(col, n):
            key = _pivot_key(work[i][col])
            if key is not None and (best_key is None or key < best_key):
                best, best_key = i, key
        if best is None:
            raise NotInvertibleModP("matrix is singular modulo p", rank=rank_mod_p(A))
        work[col], work[best] = work[best], work[col]
        inv[col], inv[best] = inv[best], inv[col]
        pivot_inv = work[col][col].inverse()
        work[col] = [x * pivot_inv for x in work[col]]
        inv[col] = [x * pivot_inv for x in inv[col]]
        for i in range(n):
            if i == col:
                continue
            factor = work[i][col]
            if factor.is_zero():
                continue
            work[i] = [a - factor * b for a, b in zip(work[i], work[col])]
            inv[i] = [a - factor * b for a, b in zip(inv[i], inv[col])]
    result = RingMatrix(inv, A.labels)
    if check and __debug__:
        prod = A @ result
        for i in range(n):
            for j in range(n):
                target = 1 if i == j else 0
                if not congruent(prod[i, j], prod[i, j].one_like() * target, like.precision or 1):
                    raise AssertionError("inverse failed verification")
    return result


def identity_like(n: int, like, labels=None) -> RingMatrix:
    return RingMatrix.identity(n, like, labels)
