"""Triple-product evaluation of the bilateral theta function and related moduli.

Theta*(q, x) = prod_{m>=1} (1 - q^m)(1 + x q^m)(1 + q^{m-1}/x)
             = sum_{j in Z} q^{j(j+1)/2} x^j,

so that theta = Theta* - G for |x| > 1.
"""
from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpfr

from . import interval as iv
from .interval import CRect, RInt, make
from .series import DomainError, NonConvergence, TailStall, as_q, as_x, w_const

MAX_FACTORS = 10**4


@dataclass(frozen=True)
class ProductResult:
    enclosure: CRect
    factors_used: int
    tail_factor: RInt


def _one():
    return RInt._raw(mpfr(1), mpfr(1))


def _factor(q, x, X, m):
    """(1 - q^m)(1 + x q^m)(1 + q^{m-1} X) as a rectangle."""
    qm = q ** m
    qm1 = q ** (m - 1) if m > 1 else _one()
    a = 1 - qm
    b = x * qm + 1
    c = X * qm1 + 1
    return (b * c) * a


def _check_q(q):
    if q.lo < 0:
        raise DomainError("q must be nonnegative for the product form")
    if q.hi >= 1:
        raise NonConvergence("q upper bound must be < 1")


def _complex_tail(Q, r, rho, M):
    """Bound S on |log prod_{m>M} factor|; None if the precondition fails."""
    U, D = iv._R.up, iv._R.down
    QM = U.pow(Q, M)
    QM1 = U.mul(QM, Q)
    d = max(U.mul(QM1, max(r, mpfr(1))), U.mul(QM, rho))
    if d > 0.5:
        return None
    one_q = D.sub(1, Q)
    num = U.add(U.mul(QM1, U.add(1, r)), U.mul(QM, rho))
    return U.div(num, D.mul(one_q, D.sub(1, d)))


def theta_star(q, x, target=1e-30, max_factors=MAX_FACTORS):
    """Enclosure of Theta*(q, x) for 0 <= q < 1 and x bounded away from 0.

    The omitted factors are controlled through |log(1+u)| <= |u|/(1-d) for
    |u| <= d <= 1/2, giving prod_{m>M} = 1 + E with |E| <= exp(S) - 1.
    """
    q = as_q(q)
    x = as_x(x)
    _check_q(q)
    if x.contains_zero():
        raise DomainError("x must not contain 0")
    X = x.reciprocal()
    Q = q.hi
    r = x.abs_hi()
    rho = min(X.abs_hi(), iv._R.up.div(1, x.abs_lo()))
    half_target = mpfr(target) / 2
    M = 1
    while True:
        S = _complex_tail(Q, r, rho, M)
        if S is not None and S <= half_target:
            break
        M += 1
        if M > max_factors:
            raise TailStall(f"product tail does not reach {target} within {max_factors} factors")
    P = _factor(q, x, X, 1)
    for m in range(2, M + 1):
        P = P * _factor(q, x, X, m)
    U = iv._R.up
    eta = U.sub(iv._R.up.exp(S), 1)
    spread = U.mul(P.abs_hi(), eta)
    neg = iv._R.down.minus(spread)
    box = CRect._raw(RInt._raw(neg, spread), RInt._raw(neg, spread))
    tail = RInt._raw(iv._R.down.exp(iv._R.down.minus(S)), iv._R.up.exp(S))
    return ProductResult(P + box, M, tail)


def theta_star_abs_upper(q, x, threshold=None, max_factors=MAX_FACTORS, rel_stop=1e-12):
    """Upper bound of |Theta*| over the boxes, valid for any 0 <= q < 1.

    Uses log|1 - u| <= -u, log|1 + v| <= |v|, so the omitted factors are
    bounded by exp(max(|x|-1, 0) Q^{M+1}/(1-Q) + Q^M/(|x|(1-Q))). Stops early
    once the bound falls below ``threshold``.
    """
    q = as_q(q)
    x = as_x(x)
    _check_q(q)
    if x.contains_zero():
        raise DomainError("x must not contain 0")
    U, D = iv._R.up, iv._R.down
    X = x.reciprocal()
    Q = q.hi
    r = x.abs_hi()
    rho = min(X.abs_hi(), U.div(1, x.abs_lo()))
    excess = max(U.sub(r, 1), mpfr(0))
    inv1q = U.div(1, D.sub(1, Q))
    running = mpfr(1)
    best = mpfr("inf")
    QM = mpfr(1)
    for m in range(1, max_factors + 1):
        running = U.mul(running, _factor(q, x, X, m).abs_hi())
        QM = U.mul(QM, Q)
        S = U.mul(U.add(U.mul(excess, U.mul(QM, Q)), U.mul(QM, rho)), inv1q)
        bound = U.mul(running, U.exp(S))
        if bound < best:
            best = bound
        if threshold is not None and best < threshold:
            return best
        if S < rel_stop:
            return best
    return best


def R_abs(q, x, M, include_tail=True):
    """Enclosure of |R| = prod_{m>=1} |1 + q^{m-1}/x| from M explicit factors.

    With ``include_tail=False`` the modulus of the partial product over
    m = 1..M is returned instead.
    """
    q = as_q(q)
    x = as_x(x)
    if x.abs_lo() <= 1:
        raise DomainError("|x| must exceed 1")
    if M < 1:
        raise ValueError("M must be >= 1")
    U, D = iv._R.up, iv._R.down
    X = x.reciprocal()
    P = X + 1
    for m in range(2, M + 1):
        P = P * (X * (q ** (m - 1)) + 1)
    lo, hi = P.abs_lo(), P.abs_hi()
    if not include_tail:
        return RInt._raw(lo, hi)
    Q = q.mag()
    if Q >= 1:
        raise NonConvergence("|q| must be < 1")
    if Q == 0:
        return RInt._raw(lo, hi)
    rho = min(X.abs_hi(), U.div(1, x.abs_lo()))
    d = U.mul(U.pow(Q, M), rho)
    S_up = U.div(d, D.sub(1, Q))
    hi = U.mul(hi, U.exp(S_up))
    if d <= 0.5:
        S_lo = U.div(S_up, D.sub(1, d))
        lo = D.mul(lo, D.exp(D.minus(S_lo)))
    else:
        lo = mpfr(0)
    return RInt._raw(lo, hi)


def K(q):
    """(1 - 5q)(1 - q/5) written as (q - 13/5)^2 - 144/25 to avoid dependency loss."""
    q = as_q(q)
    return (q - make("2.6")).sqr() - make("5.76")


def M_mod(q, x):
    """|(1 + q x)(1 + q/x)| as an interval."""
    q = as_q(q)
    x = as_x(x)
    z = (x * q + 1) * (x.reciprocal() * q + 1)
    return RInt._raw(z.abs_lo(), z.abs_hi())


def M1(q, t):
    """(1-q)|(1+qx)(1+q/x)| at x = -t + w i via its closed form."""
    q = as_q(q)
    t = as_q(t)
    qq, tt = q.sqr(), t.sqr()
    qt = q * t
    a = qq * tt * 2 + qq * 9 - qt * 4 + 2
    b = qq * 2 - qt * 4 + tt * 2 + 9
    den = (tt * 2 + 9) * 2
    prod = a * b / den
    return (1 - q) * prod.sqrt()


def M1_point_t0(q):
    """M1(q, 0) = (1-q)(9q^2+2)^{1/2}(2q^2+9)^{1/2}/(3 sqrt 2)."""
    q = as_q(q)
    qq = q.sqr()
    return (1 - q) * ((qq * 9 + 2) * (qq * 2 + 9)).sqrt() / (RInt(3) * iv.sqrt2())


def M1_point_t1(q):
    """M1(q, 1) = (1-q)(11q^2-4q+2)^{1/2}(2q^2-4q+11)^{1/2}/sqrt 22."""
    q = as_q(q)
    qq = q.sqr()
    return (1 - q) * ((qq * 11 - q * 4 + 2) * (qq * 2 - q * 4 + 11)).sqrt() / RInt(22).sqrt()


def bilateral_sum(q, x, N):
    """sum_{j=-N}^{N} q^{j(j+1)/2} x^j without tail (for cross-checks)."""
    from .series import theta_trunc, _laurent, _inverse_and_radius
    q = as_q(q)
    x = as_x(x)
    X, rho = _inverse_and_radius(x)
    return theta_trunc(q, x, N) + _laurent(q, X, rho, 1, N)


def point_x_w(t):
    """The rectangle -t + w i for real t."""
    return CRect(-as_q(t), w_const())
