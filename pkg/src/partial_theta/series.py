"""Certified evaluation of the partial theta series and its Laurent companion.

theta(q, x) = sum_{j>=0} q^{j(j+1)/2} x^j, and for |x| > 1 the negative-index
part G(q, x) = sum_{i>=1} q^{i(i-1)/2} x^{-i} of the bilateral sum.

All functions accept real intervals for ``q`` (plain numbers are enclosed
with :func:`~partial_theta.interval.make`) and complex rectangles for ``x``.
Truncation indices are picked so that a rigorous geometric tail bound falls
below an absolute target; the tail is then added to the enclosure as a
square of half-width ``tail_bound``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from gmpy2 import mpfr

from . import interval as iv
from .interval import CRect, RInt, as_crect, make

MAX_TERMS = 10**6


class NonConvergence(ArithmeticError):
    """The series does not converge for the given parameter box."""


class TailStall(ArithmeticError):
    """No admissible truncation index reaches the requested accuracy."""


class DomainError(ValueError):
    """Argument outside the domain of the requested quantity."""


@dataclass(frozen=True)
class EvalResult:
    enclosure: CRect
    terms_used: int
    tail_bound: RInt

    @property
    def value(self):
        return self.enclosure


def as_q(q):
    if isinstance(q, RInt):
        return q
    if isinstance(q, tuple):
        return make(*q)
    return make(q)


def as_x(x):
    if isinstance(x, CRect):
        return x
    if isinstance(x, tuple):
        return CRect(make(x[0]), make(x[1]))
    return as_crect(x)


def qmag(q):
    """Upper bound of |q| over the interval."""
    return q.mag()


def _default_target():
    return mpfr(2) ** (-iv.get_precision())


def _tail_hi(first, ratio):
    """Upper bound of first/(1-ratio); None when ratio >= 1."""
    U, D = iv._R.up, iv._R.down
    den = D.sub(1, ratio)
    if den <= 0:
        return None
    return U.div(first, den)


def _pow_hi(base, n):
    if n == 0:
        return mpfr(1)
    return iv._R.up.pow(base, n)


# -- series description --------------------------------------------------------
# Each series is sum_j m(j) q^{e(j)} x^{j-d} for j >= j0. The multiplier ratio
# m(j+1)/m(j) must be nonincreasing in j so a single ratio bound covers the tail.

class _Series:
    __slots__ = ("mult", "qexp", "shift", "start")

    def __init__(self, mult, qexp, shift, start):
        self.mult = mult
        self.qexp = qexp
        self.shift = shift
        self.start = start


def _tri(j):
    return j * (j + 1) // 2


THETA = _Series(lambda j: 1, _tri, 0, 0)
THETA_X = _Series(lambda j: j, _tri, 1, 1)
THETA_XX = _Series(lambda j: j * (j - 1), _tri, 2, 2)
THETA_Q = _Series(lambda j: _tri(j), lambda j: _tri(j) - 1, 0, 1)
THETA_XQ = _Series(lambda j: j * _tri(j), lambda j: _tri(j) - 1, 1, 1)


def _series_tail(spec, Q, r, k):
    """Upper bound on sum_{j>k} |m(j) q^{e(j)} x^{j-d}| for |q|<=Q, |x|<=r."""
    U = iv._R.up
    j = max(k + 1, spec.start)
    if Q == 0:
        # only j with e(j) == 0 survive; those are all below the truncation
        # index as soon as k >= 1
        if spec.qexp(j) > 0:
            return mpfr(0)
    if r == 0 and j - spec.shift > 0:
        return mpfr(0)
    m1 = spec.mult(j)
    m2 = spec.mult(j + 1)
    first = U.mul(U.mul(mpfr(m1), _pow_hi(Q, spec.qexp(j))), _pow_hi(r, j - spec.shift))
    if m1 == 0:
        return None
    ratio = U.mul(U.mul(U.div(mpfr(m2), mpfr(m1)), _pow_hi(Q, j + 1)), r)
    return _tail_hi(first, ratio)


def _log_term(spec, lq, lr, j):
    m = spec.mult(j)
    if m == 0:
        return -math.inf
    return math.log(m) + spec.qexp(j) * lq + (j - spec.shift) * lr


def choose_index(spec, Q, r, target, cap=MAX_TERMS):
    """Smallest k whose rigorous tail bound is <= target."""
    target = mpfr(target)
    Qf, rf = float(Q), float(r)
    if Qf >= 1.0:
        raise NonConvergence(f"|q| upper bound {Qf} >= 1")
    lq = math.log(Qf) if Qf > 0 else -math.inf
    lr = math.log(rf) if rf > 0 else -math.inf
    lt = math.log(float(target)) if target > 0 else -math.inf
    k = spec.start
    # float scan to an estimate, then certify upward
    while k < cap:
        j = k + 1
        if lq == -math.inf or lr == -math.inf:
            break
        lratio = math.log(spec.mult(j + 1) / max(spec.mult(j), 1)) + (j + 1) * lq + lr
        if lratio < math.log(0.5):
            lf = _log_term(spec, lq, lr, j)
            if lf - math.log1p(-math.exp(lratio)) < lt - 0.7:
                break
        k += 1
    while k <= cap:
        b = _series_tail(spec, Q, r, k)
        if b is not None and b <= target:
            return k, b
        k += 1
    raise TailStall(f"no truncation index below {cap} reaches tail {float(target):.3g}")


def theta_tail_bound(q_hi, r, k):
    """Rigorous bound on sum_{j>k} q^{j(j+1)/2} r^j valid for all |q| <= q_hi.

    Equals q_hi^{(k+1)(k+2)/2} r^{k+1} / (1 - q_hi^{k+2} r) rounded upward.
    """
    Q = q_hi.hi if isinstance(q_hi, RInt) else make(q_hi).hi
    R = r.hi if isinstance(r, RInt) else make(r).hi
    if Q < 0:
        raise DomainError("q_hi must be nonnegative")
    b = _series_tail(THETA, Q, R, k)
    if b is None:
        raise TailStall(f"q_hi^(k+2) * r >= 1 for k={k}")
    return RInt._raw(mpfr(0), b)


# -- Horner kernels on endpoint tuples -----------------------------------------

def _imul(a, b, c, d, D, U):
    if a >= 0 and c >= 0:
        return D.mul(a, c), U.mul(b, d)
    if b <= 0 and d <= 0:
        return D.mul(b, d), U.mul(a, c)
    if a >= 0 and d <= 0:
        return D.mul(b, c), U.mul(a, d)
    if b <= 0 and c >= 0:
        return D.mul(a, d), U.mul(b, c)
    return (min(D.mul(a, c), D.mul(a, d), D.mul(b, c), D.mul(b, d)),
            max(U.mul(a, c), U.mul(a, d), U.mul(b, c), U.mul(b, d)))


def horner(coeffs, x):
    """sum_i coeffs[i] * x^i for real-interval coefficients and rectangle x.

    On a non-degenerate rectangle the plain rectangular recursion suffers from
    the wrapping effect (each multiplication by x rotates and re-boxes), so it
    is intersected with a midpoint-radius bound p(c) + sum |a_i|((|c|+r)^i - |c|^i).
    """
    rect = _horner_rect(coeffs, x)
    if x.re.lo == x.re.hi and x.im.lo == x.im.hi:
        return rect
    disc = _horner_disc(coeffs, x)
    both = rect.intersection(disc)
    return rect if both is None else both


def _horner_disc(coeffs, x):
    D, U = iv._R.down, iv._R.up
    cr, ci = x.re.mid(), x.im.mid()
    centre = _horner_rect(coeffs, CRect._raw(RInt._raw(cr, cr), RInt._raw(ci, ci)))
    dr = max(U.sub(x.re.hi, cr), U.sub(cr, x.re.lo))
    di = max(U.sub(x.im.hi, ci), U.sub(ci, x.im.lo))
    r = U.sqrt(U.add(U.mul(dr, dr), U.mul(di, di)))
    a_lo = D.sqrt(D.add(D.mul(cr, cr), D.mul(ci, ci)))
    a_hi = U.sqrt(U.add(U.mul(cr, cr), U.mul(ci, ci)))
    s = U.add(a_hi, r)
    big = mpfr(0)
    small = mpfr(0)
    for c in reversed(coeffs):
        m = max(U.abs(c.lo), U.abs(c.hi))
        big = U.add(U.mul(big, s), m)
        small = D.add(D.mul(small, a_lo), m)
    R = U.sub(big, small)
    return CRect._raw(RInt._raw(D.sub(centre.re.lo, R), U.add(centre.re.hi, R)),
                      RInt._raw(D.sub(centre.im.lo, R), U.add(centre.im.hi, R)))


def _horner_rect(coeffs, x):
    D, U = iv._R.down, iv._R.up
    xr0, xr1, xi0, xi1 = x.re.lo, x.re.hi, x.im.lo, x.im.hi
    c = coeffs[-1]
    ar0, ar1, ai0, ai1 = c.lo, c.hi, mpfr(0), mpfr(0)
    for c in reversed(coeffs[:-1]):
        p0, p1 = _imul(ar0, ar1, xr0, xr1, D, U)
        s0, s1 = _imul(ai0, ai1, xi0, xi1, D, U)
        t0, t1 = _imul(ar0, ar1, xi0, xi1, D, U)
        u0, u1 = _imul(ai0, ai1, xr0, xr1, D, U)
        ar0 = D.add(D.sub(p0, s1), c.lo)
        ar1 = U.add(U.sub(p1, s0), c.hi)
        ai0 = D.add(t0, u0)
        ai1 = U.add(t1, u1)
    return CRect._raw(RInt._raw(ar0, ar1), RInt._raw(ai0, ai1))


def _qpow(q, n):
    if n == 0:
        return RInt._raw(mpfr(1), mpfr(1))
    return q ** n


def _coeffs(spec, q, k):
    out = []
    for j in range(spec.shift, k + 1):
        m = spec.mult(j) if j >= spec.start else 0
        if m == 0:
            out.append(RInt._raw(mpfr(0), mpfr(0)))
        else:
            out.append(_qpow(q, spec.qexp(j)) * m)
    return out


def _inflate(z, t):
    if t == 0:
        return z
    D, U = iv._R.down, iv._R.up
    return CRect._raw(RInt._raw(D.sub(z.re.lo, t), U.add(z.re.hi, t)),
                      RInt._raw(D.sub(z.im.lo, t), U.add(z.im.hi, t)))


def _eval_series(spec, q, x, target=None, terms=None):
    q = as_q(q)
    x = as_x(x)
    Q = qmag(q)
    if Q >= 1:
        raise NonConvergence(f"|q| reaches {float(Q)} >= 1")
    r = x.abs_hi()
    if terms is None:
        if target is None:
            target = _default_target()
        k, tail = choose_index(spec, Q, r, target)
    else:
        k = max(int(terms), spec.shift)
        tail = _series_tail(spec, Q, r, k)
        if tail is None:
            raise TailStall(f"term ratio not below 1 after index {k}")
    coeffs = _coeffs(spec, q, k)
    val = horner(coeffs, x)
    return EvalResult(_inflate(val, tail), k + 1, RInt._raw(mpfr(0), tail))


def theta(q, x, target=None, terms=None):
    """Enclosure of theta(q, x) over the boxes; ``terms`` fixes the degree."""
    return _eval_series(THETA, q, x, target, terms)


def theta_trunc(q, x, k):
    """Enclosure of the degree-k truncation sum_{j<=k} q^{j(j+1)/2} x^j (no tail)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    q = as_q(q)
    x = as_x(x)
    return horner([_qpow(q, _tri(j)) for j in range(k + 1)], x)


def theta_dx(q, x, target=None, terms=None):
    return _eval_series(THETA_X, q, x, target, terms)


def theta_dxx(q, x, target=None, terms=None):
    return _eval_series(THETA_XX, q, x, target, terms)


def theta_dq(q, x, target=None, terms=None):
    return _eval_series(THETA_Q, q, x, target, terms)


def theta_dxq(q, x, target=None, terms=None):
    return _eval_series(THETA_XQ, q, x, target, terms)


def theta_centered(q, x, q_mid=None, x_mid=None, target=1e-15, deriv_target=1e-6):
    """Mean-value enclosure theta(qc,xc) + theta_x(box)(x-xc) + theta_q(box)(q-qc).

    Much tighter than plain interval Horner on wide boxes because only the
    derivative enclosures see the box width.
    """
    q = as_q(q)
    x = as_x(x)
    qc = RInt(q.mid()) if q_mid is None else as_q(q_mid)
    xc = CRect(RInt(x.re.mid()), RInt(x.im.mid())) if x_mid is None else as_x(x_mid)
    centre = theta(qc, xc, target=target).enclosure
    dx = theta_dx(q, x, target=deriv_target).enclosure
    out = centre + dx * (x - xc)
    if q.lo != q.hi:
        dq = theta_dq(q, x, target=deriv_target).enclosure
        out = out + dq * (q - qc)
    return out


# -- Laurent part ---------------------------------------------------------------

def _inverse_and_radius(x):
    alo = x.abs_lo()
    if alo <= 1:
        raise DomainError(f"|x| lower bound {float(alo):.6g} must exceed 1")
    X = x.reciprocal()
    rho = min(X.abs_hi(), iv._R.up.div(1, alo))
    return X, rho


def _laurent(q, X, rho, first, k):
    """sum_{i=first}^{k} q^{i(i-1)/2} X^i as a rectangle."""
    coeffs = [RInt._raw(mpfr(0), mpfr(0))] * first
    coeffs += [_qpow(q, i * (i - 1) // 2) for i in range(first, k + 1)]
    return horner(coeffs, X)


def _laurent_tail(Q, rho, k):
    """Bound on sum_{i>k} Q^{i(i-1)/2} rho^i."""
    U = iv._R.up
    first = U.mul(_pow_hi(Q, k * (k + 1) // 2), _pow_hi(rho, k + 1))
    ratio = U.mul(_pow_hi(Q, k + 1), rho)
    return _tail_hi(first, ratio)


def _laurent_index(Q, rho, target, start=1):
    rf = float(rho)
    Qf = float(Q)
    lt = math.log(float(target))
    k = start
    if rf == 0:
        return k, mpfr(0)
    lr = math.log(rf)
    lq = math.log(Qf) if Qf > 0 else -math.inf
    while k < MAX_TERMS:
        lfirst = (k * (k + 1) // 2) * lq + (k + 1) * lr if lq != -math.inf else (k + 1) * lr
        if Qf == 0 and k >= 1:
            lfirst = -math.inf
        if lfirst - math.log1p(-rf) < lt - 0.7:
            break
        k += 1
    while k < MAX_TERMS:
        t = _laurent_tail(Q, rho, k)
        if t is not None and t <= mpfr(target):
            return k, t
        k += 1
    raise TailStall("Laurent tail does not reach the target")


def G(q, x, target=None):
    """Enclosure of G(q,x) = sum_{i>=1} q^{i(i-1)/2} x^{-i}; requires |x| > 1.

    The q-range may extend to [0, 1] since the geometric bound in 1/|x| alone
    controls the tail.
    """
    q = as_q(q)
    x = as_x(x)
    Q = qmag(q)
    if Q > 1:
        raise NonConvergence("|q| must not exceed 1")
    X, rho = _inverse_and_radius(x)
    if target is None:
        target = _default_target()
    k, tail = _laurent_index(Q, rho, target)
    val = _laurent(q, X, rho, 1, k)
    return EvalResult(_inflate(val, tail), k, RInt._raw(mpfr(0), tail))



def w_const():
    """3/sqrt(2) as an interval."""
    return RInt(3) / RInt(2).sqrt()


def G5_and_Gstar(q, x, target=None):
    """Split G = G5 + G*, G5 = X + qX^2 + q^3X^3 + q^6X^4 + q^10X^5 with X = 1/x.

    The G* enclosure is intersected with the disc bound sum_{i>=6} |q|^{..}|X|^i.
    """
    q = as_q(q)
    x = as_x(x)
    Q = qmag(q)
    if Q > 1:
        raise NonConvergence("|q| must not exceed 1")
    if x.abs_hi() < w_const().lo:
        raise DomainError("|x| must be at least 3/sqrt(2)")
    X, rho = _inverse_and_radius(x)
    g5 = _laurent(q, X, rho, 1, 5)
    if target is None:
        target = _default_target()
    k, tail = _laurent_index(Q, rho, target, start=6)
    gstar = _inflate(_laurent(q, X, rho, 6, k), tail)
    U = iv._R.up
    major = tail
    for i in range(6, k + 1):
        major = U.add(major, U.mul(_pow_hi(Q, i * (i - 1) // 2), _pow_hi(rho, i)))
    square = CRect._raw(RInt._raw(iv._R.down.minus(major), major),
                        RInt._raw(iv._R.down.minus(major), major))
    clipped = gstar.intersection(square)
    return g5, (clipped if clipped is not None else gstar)
