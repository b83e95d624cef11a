import cmath
import random

import mpmath as mp
import pytest

from partial_theta import interval as iv
from partial_theta.interval import CRect, abs_bounds, make
from partial_theta.series import (DomainError, G, G5_and_Gstar, NonConvergence, TailStall, theta,
                                  theta_centered, theta_dq, theta_dx, theta_dxq, theta_dxx,
                                  theta_tail_bound, theta_trunc, w_const)

from conftest import (_exact, contains, oracle_G, oracle_theta, oracle_theta_q, oracle_theta_x,
                      oracle_theta_xx)

RNG_SEED = 7321


def _rand_point(rng, qmax=0.95, rmax=3.0):
    q = round(rng.uniform(0.01, qmax), 6)
    r = rng.uniform(0.05, rmax)
    x = cmath.rect(r, rng.uniform(-cmath.pi, cmath.pi))
    return q, complex(round(x.real, 6), round(x.imag, 6))


def test_theta_at_x_zero_and_q_zero_is_one():
    for q in ("0.1", "0.5", "0.93"):
        assert theta(q, 0).enclosure.contains(1)
    for x in (5, -7 + 2j, 0.3j):
        enc = theta(0, x).enclosure
        assert enc.contains(1)
        assert enc.re.width() == 0


def test_theta_half_one_matches_oracle():
    enc = theta("0.5", 1).enclosure
    assert contains(enc, oracle_theta(0.5, 1))
    assert enc.re.width() < 1e-30


def test_small_modulus_point_on_radius_three_arc():
    on_arc = abs_bounds(theta("0.71", CRect.polar(3, "0.5188451144")).enclosure)
    on_unit = abs_bounds(theta("0.71", CRect.polar(1, "0.5188451144")).enclosure)
    assert make("0.0141") .lo <= on_arc.lo and on_arc.hi < make("0.0142").lo
    assert on_unit.lo > 0.5
    with mp.workprec(256):
        x = 3 * mp.expjpi(mp.mpf("0.5188451144"))
        assert contains(on_arc, abs(oracle_theta(0.71, x)), slack=mp.mpf(10) ** -30)


def test_truncations():
    t15 = theta_trunc(make("0.5"), CRect(-5), 15)
    assert t15.re.lo > 0.05
    assert theta_trunc(make("0.4"), CRect(2, 1), 0).contains(1)
    u = theta_trunc(make("0.5"), CRect(0, 3), 4)
    assert u.re.contains(make("0.0009765625") * 81 - make("0.125") * 9 + 1)
    assert u.re.contains(make("-0.0458984375"))


@pytest.mark.parametrize("q,r,k,bound", [("0.5", "4.25", 4, "0.046"), ("0.6", "3", 5, "0.018"),
                                         ("0.75", "2.346", 7, "0.036")])
def test_tail_bound_examples(q, r, k, bound):
    assert theta_tail_bound(q, r, k).hi < make(bound).lo


def test_tail_bound_zero_radius_and_stall():
    b = theta_tail_bound("0.9", 0, 3)
    assert b.hi == 0
    with pytest.raises(TailStall):
        theta_tail_bound("0.9", 100, 0)


def test_tail_bound_soundness_random():
    rng = random.Random(RNG_SEED)
    checked = 0
    while checked < 120:
        q = rng.uniform(0.05, 0.95)
        r = rng.uniform(0.1, 6)
        k = rng.randrange(0, 40)
        if q ** (k + 2) * r >= 1:
            continue
        b = theta_tail_bound(repr(q), repr(r), k)
        with mp.workprec(256):
            qq, rr = mp.mpf(repr(q)), mp.mpf(repr(r))
            tail = mp.nsum(lambda j: qq ** (int(j) * (int(j) + 1) // 2) * rr ** int(j), [k + 1, mp.inf])
            assert tail <= _exact(b.hi)
        checked += 1


def test_convergence_errors():
    with pytest.raises(NonConvergence):
        theta("1", 0.5)
    with pytest.raises(NonConvergence):
        theta(make("0.5", "1.01"), 0.5)


def test_theta_random_against_oracle():
    rng = random.Random(RNG_SEED + 1)
    for _ in range(40):
        q, x = _rand_point(rng)
        assert contains(theta(q, x).enclosure, oracle_theta(q, x))


def test_negative_q_against_oracle():
    for q, x in ((-0.7, -2.7), (-0.96, 0.82 + 1.23j), (-0.3, 4j)):
        assert contains(theta(q, x).enclosure, oracle_theta(q, x))


def test_derivatives_against_oracle():
    rng = random.Random(RNG_SEED + 2)
    for _ in range(25):
        q, x = _rand_point(rng, qmax=0.9)
        assert contains(theta_dx(q, x).enclosure, oracle_theta_x(q, x))
        assert contains(theta_dxx(q, x).enclosure, oracle_theta_xx(q, x))
        assert contains(theta_dq(q, x).enclosure, oracle_theta_q(q, x))
        with mp.workprec(256):
            h = mp.mpf(10) ** -40
            num = (oracle_theta_x(mp.mpf(repr(q)) + h, x) - oracle_theta_x(mp.mpf(repr(q)) - h, x)) / (2 * h)
        assert contains(theta_dxq(q, x).enclosure, num, slack=mp.mpf(10) ** -30)


def test_interval_boxes_enclose_interior_points():
    rng = random.Random(RNG_SEED + 3)
    for _ in range(20):
        q0, x0 = _rand_point(rng, qmax=0.9)
        qb = make(q0, q0 + 0.01)
        xb = CRect(make(x0.real, x0.real + 0.02), make(x0.imag, x0.imag + 0.02))
        enc = theta(qb, xb).enclosure
        cen = theta_centered(qb, xb)
        for _ in range(5):
            qp = q0 + 0.01 * rng.random()
            xp = complex(x0.real + 0.02 * rng.random(), x0.imag + 0.02 * rng.random())
            v = oracle_theta(qp, xp)
            assert contains(enc, v, slack=mp.mpf(10) ** -30)
            assert contains(cen, v, slack=mp.mpf(10) ** -30)


def test_functional_equation_random():
    """theta(q,x) = 1 + q x theta(q, q x)."""
    rng = random.Random(RNG_SEED + 4)
    with iv.working_precision(256):
        for _ in range(110):
            q, x = _rand_point(rng, qmax=0.95, rmax=3)
            qi, xi = make(q), CRect.from_complex(x)
            lhs = theta(qi, xi, target=1e-70).enclosure
            rhs = xi * qi * theta(qi, xi * qi, target=1e-70).enclosure + 1
            assert lhs.intersects(rhs)
            d = lhs.mid() - rhs.mid()
            assert abs(d) < 1e-30


def test_heat_type_equation_random():
    """2q theta_q - 2x theta_x - x^2 theta_xx = 0."""
    rng = random.Random(RNG_SEED + 5)
    with iv.working_precision(256):
        for _ in range(110):
            q, x = _rand_point(rng, qmax=0.9, rmax=3)
            qi, xi = make(q), CRect.from_complex(x)
            t = 1e-60
            res = (theta_dq(qi, xi, target=t).enclosure * (qi * 2)
                   - theta_dx(qi, xi, target=t).enclosure * (xi * 2)
                   - theta_dxx(qi, xi, target=t).enclosure * (xi * xi))
            assert res.contains_zero()
            assert res.abs_hi() < 1e-20


def test_imaginary_axis_identity_random():
    """theta(q, iy) = theta(q^4, -y^2/q) + i q y theta(q^4, -q y^2)."""
    rng = random.Random(RNG_SEED + 6)
    with iv.working_precision(256):
        for _ in range(110):
            q = make(round(rng.uniform(0.05, 0.9), 6))
            y = make(round(rng.uniform(-3, 3), 6))
            lhs = theta(q, CRect(make(0), y), target=1e-60).enclosure
            q4 = q ** 4
            a = theta(q4, CRect(-(y.sqr() / q)), target=1e-60).enclosure
            b = theta(q4, CRect(-(q * y.sqr())), target=1e-60).enclosure
            rhs = a + b * CRect(make(0), q * y)
            assert lhs.intersects(rhs)
            assert abs(lhs.mid() - rhs.mid()) < 1e-30


def test_G_examples():
    for s in ("0", "0.25", "0.5", "0.75", "1"):
        x = CRect.polar(3, s)
        for q in ("0", "0.3", "0.7", "1"):
            assert G(q, x, target=1e-20).enclosure.abs_lo() >= make(1).lo / 6
    x = CRect(make("-2.5"), make("1.5"))
    g0 = G(0, x).enclosure
    assert g0.intersects(x.reciprocal())
    gm = G("0.8", -5).enclosure
    assert gm.re.hi < -make("0.16").hi and gm.re.lo > -make("0.2").lo
    with pytest.raises(DomainError):
        G("0.5", CRect(make("0.9"), make(0)))


def test_G_against_oracle():
    rng = random.Random(RNG_SEED + 7)
    for _ in range(30):
        q = round(rng.uniform(0, 1), 6)
        x = cmath.rect(rng.uniform(1.2, 5), rng.uniform(-3.1, 3.1))
        x = complex(round(x.real, 6), round(x.imag, 6))
        assert contains(G(q, x, target=1e-40).enclosure, oracle_G(q, x))


def test_G5_split():
    w = w_const()
    g5, gs = G5_and_Gstar(make("0.6", "0.61"), CRect(make(0, "0.1") * -1, w), target=1e-20)
    assert gs.abs_hi() < make("0.0208").lo
    assert g5.im.hi < make("-0.147").lo
    X = CRect(make(-3), make(2)).reciprocal()
    g50, _ = G5_and_Gstar(0, CRect(make(-3), make(2)))
    assert g50.intersects(X)
    q, x = make("0.83"), CRect(make("-1.3"), w)
    g5, gs = G5_and_Gstar(q, x, target=1e-30)
    assert (g5 + gs).intersects(G(q, x, target=1e-30).enclosure)
    with pytest.raises(DomainError):
        G5_and_Gstar("0.7", CRect(make(0), make(2)))
