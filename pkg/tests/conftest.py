"""Independent mpmath oracle used to check the gmpy2/numpy implementation."""
import mpmath as mp
import pytest

ORACLE_BITS = 256
mp.mp.prec = 2 * ORACLE_BITS


def _mpf(v):
    return mp.mpf(repr(v)) if isinstance(v, float) else mp.mpf(v)


def _mpc(v):
    if isinstance(v, (int, float)):
        return mp.mpc(_mpf(v))
    if isinstance(v, complex):
        return mp.mpc(_mpf(v.real), _mpf(v.imag))
    return mp.mpc(v)


def _terms(q, x, weight, limit=10**5):
    total = mp.mpc(0)
    eps = mp.mpf(2) ** (-ORACLE_BITS - 20)
    small = 0
    for j in range(limit):
        t = weight(j) * mp.power(q, j * (j + 1) // 2) * mp.power(x, j)
        total += t
        if abs(t) < eps * (1 + abs(total)):
            small += 1
            if small > 3 and j > 5:
                return total
        else:
            small = 0
    raise RuntimeError("oracle did not converge")


def oracle_theta(q, x):
    with mp.workprec(ORACLE_BITS):
        return _terms(_mpf(q), _mpc(x), lambda j: 1)


def oracle_theta_x(q, x):
    with mp.workprec(ORACLE_BITS):
        return _terms(_mpf(q), _mpc(x), lambda j: j) / _mpc(x)


def oracle_theta_xx(q, x):
    with mp.workprec(ORACLE_BITS):
        return _terms(_mpf(q), _mpc(x), lambda j: j * (j - 1)) / _mpc(x) ** 2


def oracle_theta_q(q, x):
    with mp.workprec(ORACLE_BITS):
        return _terms(_mpf(q), _mpc(x), lambda j: j * (j + 1) // 2) / _mpf(q)


def oracle_G(q, x):
    """sum_{i>=1} q^{i(i-1)/2} x^{-i}."""
    with mp.workprec(ORACLE_BITS):
        X = 1 / _mpc(x)
        q = _mpf(q)
        return mp.nsum(lambda i: mp.power(q, int(i) * (int(i) - 1) // 2) * mp.power(X, int(i)), [1, mp.inf])


def oracle_theta_star(q, x, factors=4000):
    with mp.workprec(ORACLE_BITS):
        q = _mpf(q)
        x = _mpc(x)
        p = mp.mpc(1)
        for m in range(1, factors + 1):
            p *= (1 - q ** m) * (1 + x * q ** m) * (1 + q ** (m - 1) / x)
        return p


def contains(rect_or_rint, value, slack=0):
    """Does an implementation enclosure contain an mpmath value (with optional slack)?"""
    from partial_theta.interval import CRect
    with mp.workprec(2 * ORACLE_BITS):
        value = mp.mpc(value)
        if isinstance(rect_or_rint, CRect):
            parts = ((rect_or_rint.re, value.real), (rect_or_rint.im, value.imag))
        else:
            parts = ((rect_or_rint, value.real),)
        for enc, v in parts:
            if not (_exact(enc.lo) - slack <= v <= _exact(enc.hi) + slack):
                return False
    return True


@pytest.fixture(autouse=True)
def _default_precision():
    from partial_theta import interval as iv
    iv.set_precision(128)
    yield
    iv.set_precision(128)


def _exact(v):
    with mp.workprec(2 * ORACLE_BITS):
        n, d = v.as_integer_ratio()
        return mp.mpf(n) / d
