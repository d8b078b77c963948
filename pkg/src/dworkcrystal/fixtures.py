"""Standard test polynomials.

All are returned over exact integers (with an exact parameter t where one
appears); callers reduce to the ring they need.
"""

from __future__ import annotations

from .laurent import LaurentPoly
from .ring import BaseRing

EXACT = BaseRing.integers()
EXACT_SERIES = BaseRing.series(None, None, None)


def legendre(z0: int | None = None) -> LaurentPoly:
    """y^2 - x(x-1)(x-z); symbolic in t = z when ``z0`` is None."""
    if z0 is None:
        return LaurentPoly.from_terms([((0, 2), 1), ((3, 0), -1), ((2, 0), (1, 1)), ((1, 0), (0, -1))], EXACT_SERIES)
    return LaurentPoly.from_terms([((0, 2), 1), ((3, 0), -1), ((2, 0), 1 + z0), ((1, 0), -z0)], EXACT)


def example_family() -> LaurentPoly:
    """y^2 + t x^3 + xy + x, the five-point triangle with a t-dependent vertex."""
    return LaurentPoly.from_terms([((0, 2), 1), ((3, 0), (0, 1)), ((1, 1), 1), ((1, 0), 1)], EXACT_SERIES)


def square() -> LaurentPoly:
    """(1 + x)(1 + y): every lattice point of the unit square is a vertex."""
    return LaurentPoly.from_terms([((0, 0), 1), ((1, 0), 1), ((0, 1), 1), ((1, 1), 1)], EXACT)


def skew_square() -> LaurentPoly:
    """1 + 2x + 3y + xy."""
    return LaurentPoly.from_terms([((0, 0), 1), ((1, 0), 2), ((0, 1), 3), ((1, 1), 1)], EXACT)


def segment() -> LaurentPoly:
    """1 - x."""
    return LaurentPoly.from_terms([((0,), 1), ((1,), -1)], EXACT)


def simplex() -> LaurentPoly:
    """1 + x + y; the open star of the origin contains no other lattice point."""
    return LaurentPoly.from_terms([((0, 0), 1), ((1, 0), 1), ((0, 1), 1)], EXACT)
