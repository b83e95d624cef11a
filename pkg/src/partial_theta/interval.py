"""Outward-rounded real intervals and complex rectangles on top of MPFR.

Every operation rounds the lower endpoint toward -inf and the upper endpoint
toward +inf, so results always contain the exact set image. The working
precision is process-global (see :func:`set_precision`); values keep the
precision they were created with, results take the current one.
"""
from __future__ import annotations

import math
from contextlib import contextmanager
from decimal import ROUND_CEILING, ROUND_FLOOR, Context, Decimal
from fractions import Fraction
from numbers import Number

import gmpy2
from gmpy2 import mpfr, mpq, mpz

DEFAULT_PRECISION = 128

_INF = mpfr("inf")
_NINF = mpfr("-inf")


class IntervalError(ArithmeticError):
    """Raised for invalid interval construction."""


class IntervalDivisionError(ZeroDivisionError):
    """Division by an interval or rectangle that may contain zero."""


class _Rounding:
    def __init__(self):
        self.set(DEFAULT_PRECISION)

    def set(self, bits):
        bits = int(bits)
        if bits < 16:
            raise ValueError("precision must be at least 16 bits")
        self.bits = bits
        self.down = gmpy2.context(precision=bits, round=gmpy2.RoundDown)
        self.up = gmpy2.context(precision=bits, round=gmpy2.RoundUp)
        self.near = gmpy2.context(precision=bits)


_R = _Rounding()


def get_precision():
    return _R.bits


def set_precision(bits):
    """Set the working mantissa precision (bits) for subsequent operations."""
    _R.set(bits)


@contextmanager
def working_precision(bits):
    old = _R.bits
    _R.set(bits)
    try:
        yield
    finally:
        _R.set(old)


def _to_mpq(value):
    if isinstance(value, mpq):
        return value
    if isinstance(value, (int, mpz)):
        return mpq(value)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, float):
        if math.isnan(value):
            raise IntervalError("NaN endpoint")
        # floats are read as the decimal literal they print as
        f = Fraction(repr(value))
        return mpq(f.numerator, f.denominator)
    if isinstance(value, Decimal):
        f = Fraction(value)
        return mpq(f.numerator, f.denominator)
    if isinstance(value, str):
        f = Fraction(value.strip())
        return mpq(f.numerator, f.denominator)
    raise TypeError(f"cannot convert {type(value).__name__} to an interval endpoint")


def _down(value):
    """Largest working-precision float <= value."""
    if isinstance(value, type(_INF)):
        if gmpy2.is_nan(value):
            raise IntervalError("NaN endpoint")
        return _R.down.plus(value) if value.precision > _R.bits else value
    if isinstance(value, float) and math.isinf(value):
        return mpfr(value)
    if isinstance(value, str) and value.strip().lstrip("+-").lower() in ("inf", "infinity"):
        return mpfr(value)
    return mpfr(_to_mpq(value), _R.bits, _R.down)


def _up(value):
    if isinstance(value, type(_INF)):
        if gmpy2.is_nan(value):
            raise IntervalError("NaN endpoint")
        return _R.up.plus(value) if value.precision > _R.bits else value
    if isinstance(value, float) and math.isinf(value):
        return mpfr(value)
    if isinstance(value, str) and value.strip().lstrip("+-").lower() in ("inf", "infinity"):
        return mpfr(value)
    return mpfr(_to_mpq(value), _R.bits, _R.up)


def _nz(v):
    # 0 * inf inside interval products contributes 0
    return 0 if gmpy2.is_nan(v) else v


class RInt:
    """Closed real interval ``[lo, hi]`` with MPFR endpoints.

    Treated as immutable; operations always return new objects.
    """

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        if hi is None:
            hi = lo
        if isinstance(lo, RInt):
            lo = lo.lo
        if isinstance(hi, RInt):
            hi = hi.hi
        lo = _down(lo)
        hi = _up(hi)
        if gmpy2.is_nan(lo) or gmpy2.is_nan(hi):
            raise IntervalError("NaN endpoint")
        if lo > hi:
            raise IntervalError(f"empty interval: lo={lo} > hi={hi}")
        self.lo = lo
        self.hi = hi

    @classmethod
    def _raw(cls, lo, hi):
        obj = cls.__new__(cls)
        obj.lo = lo
        obj.hi = hi
        return obj

    def __reduce__(self):
        return (_rint_raw, (self.lo, self.hi))

    # -- inspection ---------------------------------------------------------
    def width(self):
        return _R.up.sub(self.hi, self.lo)

    def mid(self):
        return _R.near.div(_R.near.add(self.lo, self.hi), 2)

    def rad(self):
        m = self.mid()
        return max(_R.up.sub(self.hi, m), _R.up.sub(m, self.lo))

    def mag(self):
        U = _R.up
        return max(U.abs(self.lo), U.abs(self.hi))

    def mig(self):
        # unary minus/abs on mpfr would round to the global 53-bit context
        if self.lo > 0:
            return self.lo
        if self.hi < 0:
            return _R.down.minus(self.hi)
        return mpfr(0)

    def contains(self, value):
        if isinstance(value, RInt):
            return self.lo <= value.lo and value.hi <= self.hi
        v = _to_mpq(value) if not isinstance(value, type(_INF)) else value
        return self.lo <= v <= self.hi

    def __contains__(self, value):
        return self.contains(value)

    def intersects(self, other):
        other = as_rint(other)
        return not (self.hi < other.lo or other.hi < self.lo)

    def intersection(self, other):
        other = as_rint(other)
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            return None
        return RInt._raw(lo, hi)

    def hull(self, other):
        other = as_rint(other)
        return RInt._raw(min(self.lo, other.lo), max(self.hi, other.hi))

    def is_positive(self):
        return self.lo > 0

    def is_negative(self):
        return self.hi < 0

    def split(self):
        m = self.mid()
        return RInt._raw(self.lo, m), RInt._raw(m, self.hi)

    # -- arithmetic ----------------------------------------------------------
    def __neg__(self):
        return RInt._raw(_R.down.minus(self.hi), _R.up.minus(self.lo))

    def __pos__(self):
        return self

    def __add__(self, other):
        o = as_rint(other)
        return RInt._raw(_R.down.add(self.lo, o.lo), _R.up.add(self.hi, o.hi))

    __radd__ = __add__

    def __sub__(self, other):
        o = as_rint(other)
        return RInt._raw(_R.down.sub(self.lo, o.hi), _R.up.sub(self.hi, o.lo))

    def __rsub__(self, other):
        return as_rint(other) - self

    def __mul__(self, other):
        o = as_rint(other)
        a, b, c, d = self.lo, self.hi, o.lo, o.hi
        D, U = _R.down, _R.up
        if a >= 0 and c >= 0:
            return RInt._raw(D.mul(a, c), U.mul(b, d))
        if b <= 0 and d <= 0:
            return RInt._raw(D.mul(b, d), U.mul(a, c))
        if a >= 0 and d <= 0:
            return RInt._raw(D.mul(b, c), U.mul(a, d))
        if b <= 0 and c >= 0:
            return RInt._raw(D.mul(a, d), U.mul(b, c))
        lo = min(_nz(D.mul(a, c)), _nz(D.mul(a, d)), _nz(D.mul(b, c)), _nz(D.mul(b, d)))
        hi = max(_nz(U.mul(a, c)), _nz(U.mul(a, d)), _nz(U.mul(b, c)), _nz(U.mul(b, d)))
        return RInt._raw(lo, hi)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * as_rint(other).reciprocal()

    def __rtruediv__(self, other):
        return as_rint(other) * self.reciprocal()

    def reciprocal(self):
        if self.lo <= 0 <= self.hi:
            raise IntervalDivisionError(f"division by interval containing 0: {self!r}")
        return RInt._raw(_R.down.div(1, self.hi), _R.up.div(1, self.lo))

    def sqr(self):
        lo = self.mig()
        hi = self.mag()
        return RInt._raw(_R.down.mul(lo, lo), _R.up.mul(hi, hi))

    def __pow__(self, n):
        if not isinstance(n, int) or isinstance(n, bool):
            raise TypeError("only integer powers are supported")
        if n < 0:
            return (self ** (-n)).reciprocal()
        if n == 0:
            return RInt._raw(mpfr(1), mpfr(1))
        D, U = _R.down, _R.up
        if self.lo >= 0:
            return RInt._raw(D.pow(self.lo, n), U.pow(self.hi, n))
        if self.hi <= 0:
            if n % 2 == 0:
                return RInt._raw(D.pow(D.minus(self.hi), n), U.pow(U.minus(self.lo), n))
            return RInt._raw(D.minus(U.pow(U.minus(self.lo), n)), U.minus(D.pow(D.minus(self.hi), n)))
        if n % 2 == 0:
            return RInt._raw(mpfr(0), U.pow(self.mag(), n))
        return RInt._raw(D.minus(U.pow(U.minus(self.lo), n)), U.pow(self.hi, n))

    def __abs__(self):
        return RInt._raw(self.mig(), self.mag())

    def sqrt(self):
        if self.hi < 0:
            raise IntervalError("sqrt of a negative interval")
        lo = self.lo if self.lo > 0 else mpfr(0)
        return RInt._raw(_R.down.sqrt(lo), _R.up.sqrt(self.hi))

    def exp(self):
        return RInt._raw(_R.down.exp(self.lo), _R.up.exp(self.hi))

    def log(self):
        if self.lo <= 0:
            raise IntervalError("log of an interval reaching 0")
        return RInt._raw(_R.down.log(self.lo), _R.up.log(self.hi))

    def cos(self):
        return _trig(self, "cos")

    def sin(self):
        return _trig(self, "sin")

    # -- comparisons are deliberately not defined as operators -----------------
    def __eq__(self, other):
        if not isinstance(other, RInt):
            return NotImplemented
        return self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __repr__(self):
        return f"RInt([{self.lo}, {self.hi}])"

    def __str__(self):
        return format_rint(self)


def _rint_raw(lo, hi):
    return RInt._raw(lo, hi)


def _pi():
    return RInt._raw(_R.down.const_pi(), _R.up.const_pi())


def _trig(x, name):
    D, U = _R.down, _R.up
    f_lo = getattr(D, name)
    f_hi = getattr(U, name)
    va = RInt._raw(f_lo(x.lo), f_hi(x.lo))
    vb = RInt._raw(f_lo(x.hi), f_hi(x.hi))
    out = va.hull(vb)
    if x.lo == _NINF or x.hi == _INF:
        return RInt._raw(mpfr(-1), mpfr(1))
    pi = _pi()
    # extrema of cos at k*pi, of sin at pi/2 + k*pi
    shift = mpfr(0) if name == "cos" else mpfr(0.5)
    approx_pi = float(pi.mid())
    k0 = math.floor(float(x.lo) / approx_pi - float(shift)) - 1
    k1 = math.ceil(float(x.hi) / approx_pi - float(shift)) + 1
    for k in range(k0, k1 + 1):
        c = pi * (RInt(k) + RInt(shift))
        if c.hi >= x.lo and c.lo <= x.hi:
            v = mpfr(1) if k % 2 == 0 else mpfr(-1)
            out = out.hull(RInt._raw(v, v))
    lo = max(out.lo, mpfr(-1))
    hi = min(out.hi, mpfr(1))
    return RInt._raw(lo, hi)


def as_rint(value):
    if isinstance(value, RInt):
        return value
    return RInt(value, value)


def make(lo, hi=None):
    """Interval containing ``[lo, hi]`` (decimal inputs are enclosed exactly).

    Floats are read through their shortest decimal repr, so ``make(0.1)``
    encloses the decimal number 0.1, not the nearest double.
    """
    if hi is None:
        hi = lo
    for v in (lo, hi):
        if isinstance(v, float) and math.isnan(v):
            raise IntervalError("NaN endpoint")
    if not isinstance(lo, RInt) and not isinstance(hi, RInt):
        if _key(lo) > _key(hi):
            raise IntervalError(f"lo > hi: {lo!r} > {hi!r}")
    return RInt(lo, hi)


def _key(v):
    if isinstance(v, float) and math.isinf(v):
        return v
    if isinstance(v, str) and v.strip().lstrip("+-").lower() in ("inf", "infinity"):
        return float(v)
    if isinstance(v, type(_INF)):
        return v
    return _to_mpq(v)


def pi():
    return _pi()


def sqrt2():
    return RInt(2).sqrt()


class CRect:
    """Axis-aligned complex rectangle ``re + i*im``."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=0):
        self.re = as_rint(re)
        self.im = as_rint(im)

    @classmethod
    def _raw(cls, re, im):
        obj = cls.__new__(cls)
        obj.re = re
        obj.im = im
        return obj

    def __reduce__(self):
        return (CRect, (self.re, self.im))

    @classmethod
    def from_complex(cls, z):
        z = complex(z) if not isinstance(z, (str, tuple)) else z
        if isinstance(z, tuple):
            return cls(make(z[0]), make(z[1]))
        return cls(make(z.real), make(z.imag))

    @classmethod
    def polar(cls, r, angle_over_pi):
        """Rectangle containing ``r * exp(i*pi*angle_over_pi)``."""
        r = as_rint(r)
        a = _pi() * as_rint(angle_over_pi)
        return cls._raw(r * a.cos(), r * a.sin())

    # -- inspection ---------------------------------------------------------
    def mid(self):
        return complex(float(self.re.mid()), float(self.im.mid()))

    def contains(self, z):
        if isinstance(z, CRect):
            return self.re.contains(z.re) and self.im.contains(z.im)
        z = complex(z) if not isinstance(z, tuple) else z
        if isinstance(z, tuple):
            return self.re.contains(z[0]) and self.im.contains(z[1])
        return self.re.contains(z.real) and self.im.contains(z.imag)

    def __contains__(self, z):
        return self.contains(z)

    def intersects(self, other):
        other = as_crect(other)
        return self.re.intersects(other.re) and self.im.intersects(other.im)

    def intersection(self, other):
        other = as_crect(other)
        re = self.re.intersection(other.re)
        im = self.im.intersection(other.im)
        if re is None or im is None:
            return None
        return CRect._raw(re, im)

    def hull(self, other):
        other = as_crect(other)
        return CRect._raw(self.re.hull(other.re), self.im.hull(other.im))

    def contains_zero(self):
        return self.re.lo <= 0 <= self.re.hi and self.im.lo <= 0 <= self.im.hi

    def abs2(self):
        return self.re.sqr() + self.im.sqr()

    def abs_lo(self):
        a = self.re.mig()
        b = self.im.mig()
        D = _R.down
        return D.sqrt(D.add(D.mul(a, a), D.mul(b, b)))

    def abs_hi(self):
        a = self.re.mag()
        b = self.im.mag()
        U = _R.up
        return U.sqrt(U.add(U.mul(a, a), U.mul(b, b)))

    def conj(self):
        return CRect._raw(self.re, -self.im)

    # -- arithmetic ----------------------------------------------------------
    def __neg__(self):
        return CRect._raw(-self.re, -self.im)

    def __add__(self, other):
        if isinstance(other, CRect):
            return CRect._raw(self.re + other.re, self.im + other.im)
        if isinstance(other, (RInt, int, float, Fraction, str)) or _is_real_number(other):
            return CRect._raw(self.re + other, self.im)
        return self + as_crect(other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, CRect):
            return CRect._raw(self.re - other.re, self.im - other.im)
        if isinstance(other, (RInt, int, float, Fraction, str)) or _is_real_number(other):
            return CRect._raw(self.re - other, self.im)
        return self - as_crect(other)

    def __rsub__(self, other):
        return as_crect(other) - self

    def __mul__(self, other):
        if isinstance(other, CRect):
            a, b, c, d = self.re, self.im, other.re, other.im
            return CRect._raw(a * c - b * d, a * d + b * c)
        if isinstance(other, (RInt, int, float, Fraction, str)) or _is_real_number(other):
            o = as_rint(other)
            return CRect._raw(self.re * o, self.im * o)
        return self * as_crect(other)

    __rmul__ = __mul__

    def reciprocal(self):
        """``conj(z) / |z|^2``; raises if the rectangle may contain 0."""
        if self.contains_zero():
            raise IntervalDivisionError(f"division by rectangle containing 0: {self!r}")
        n = self.abs2()
        inv = n.reciprocal()
        return CRect._raw(self.re * inv, -(self.im * inv))

    def __truediv__(self, other):
        if isinstance(other, CRect):
            return self * other.reciprocal()
        if isinstance(other, (RInt, int, float, Fraction, str)) or _is_real_number(other):
            return self * as_rint(other).reciprocal()
        return self * as_crect(other).reciprocal()

    def __rtruediv__(self, other):
        return as_crect(other) * self.reciprocal()

    def sqr(self):
        a, b = self.re, self.im
        return CRect._raw(a.sqr() - b.sqr(), 2 * (a * b))

    def __pow__(self, n):
        if not isinstance(n, int) or isinstance(n, bool):
            raise TypeError("only integer powers are supported")
        if n < 0:
            return (self ** (-n)).reciprocal()
        result = CRect._raw(RInt._raw(mpfr(1), mpfr(1)), RInt._raw(mpfr(0), mpfr(0)))
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base.sqr()
        return result

    def __eq__(self, other):
        if not isinstance(other, CRect):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        return f"CRect(re={self.re!r}, im={self.im!r})"


def _is_real_number(v):
    return isinstance(v, Number) and not isinstance(v, complex)


def as_crect(value):
    if isinstance(value, CRect):
        return value
    if isinstance(value, RInt):
        return CRect._raw(value, RInt._raw(mpfr(0), mpfr(0)))
    if isinstance(value, complex):
        return CRect(make(value.real), make(value.imag))
    return CRect(as_rint(value), 0)


def cmul(a, b):
    return as_crect(a) * as_crect(b)


def abs_bounds(z):
    """Interval ``[min |z|, max |z|]`` over the rectangle ``z``."""
    z = as_crect(z)
    return RInt._raw(z.abs_lo(), z.abs_hi())


def point_box(z):
    """Smallest working-precision rectangle containing the exact point ``z``."""
    return as_crect(z)


# -- decimal I/O ---------------------------------------------------------------

def to_decimal(value, digits=25, rounding="floor"):
    """Exact MPFR value rounded to ``digits`` significant decimals."""
    if gmpy2.is_infinite(value):
        return "inf" if value > 0 else "-inf"
    if value == 0:
        return "0"
    num, den = value.as_integer_ratio()
    ctx = Context(prec=digits, rounding=ROUND_FLOOR if rounding == "floor" else ROUND_CEILING)
    d = ctx.divide(Decimal(int(num)), Decimal(int(den)))
    s = format(d, "g") if abs(d.adjusted()) > 6 else format(d, "f")
    if "e" not in s and "E" not in s and "." in s:
        s = s.rstrip("0").rstrip(".")
    return s


def rint_to_decimals(x, digits=25):
    return [to_decimal(x.lo, digits, "floor"), to_decimal(x.hi, digits, "ceiling")]


def rint_from_decimals(pair):
    lo, hi = pair
    return RInt(_down(lo), _up(hi))


def format_rint(x, digits=20):
    """``mid ± rad`` rendering used by the CLI."""
    if x.lo == x.hi:
        return f"{_fmt(x.lo, digits)} ± 0"
    rad = x.rad()
    return f"{_fmt(x.mid(), digits)} ± {float(rad):.3g}"


def _fmt(v, digits):
    if v == 0:
        return "0"
    if gmpy2.is_infinite(v):
        return str(v)
    num, den = v.as_integer_ratio()
    d = Context(prec=digits).divide(Decimal(int(num)), Decimal(int(den)))
    s = format(d, "g") if abs(d.adjusted()) > 12 else format(d, "f")
    if "e" not in s and "E" not in s and "." in s:
        s = s.rstrip("0").rstrip(".")
    return s
