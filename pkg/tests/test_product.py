import cmath
import random

import mpmath as mp
import pytest

from partial_theta import interval as iv
from partial_theta.interval import CRect, abs_bounds, make
from partial_theta.product import (K, M1, M1_point_t0, M1_point_t1, M_mod, R_abs, bilateral_sum,
                                   point_x_w, theta_star, theta_star_abs_upper)
from partial_theta.series import DomainError, G, theta, w_const

from conftest import contains, oracle_G, oracle_theta, oracle_theta_star

LAMBDA = CRect.polar(3, "0.75")


def test_theta_star_at_q_zero():
    x = CRect(make("1.5"), make("-2"))
    assert theta_star(0, x).enclosure.intersects(x.reciprocal() + 1)


def test_theta_star_rejects_zero_box():
    with pytest.raises(DomainError):
        theta_star("0.5", CRect(make(-1, 1), make(-1, 1)))


def test_theta_star_small_at_minus_five():
    for qb in (make("0.8", "0.81"), make("0.9", "0.9005"), make("0.985", "0.99")):
        assert theta_star_abs_upper(qb, CRect(-5)) < make("1e-4").lo


def test_theta_star_against_product_oracle():
    for q, x in ((0.3, 2 + 1j), (0.7, -1.6 + 0.4j), (0.5, -5)):
        assert contains(theta_star(q, x).enclosure, oracle_theta_star(q, x))


def test_triple_product_equals_theta_plus_G_random():
    rng = random.Random(99)
    for _ in range(110):
        q = round(rng.uniform(0.01, 0.9), 6)
        x = cmath.rect(rng.uniform(1.5, 4), rng.uniform(-3.1, 3.1))
        x = complex(round(x.real, 6), round(x.imag, 6))
        star = theta_star(q, x, target=1e-30).enclosure
        split = theta(q, x, target=1e-30).enclosure + G(q, x, target=1e-30).enclosure
        assert star.intersects(split)
        assert abs(star.mid() - split.mid()) < 1e-25
    with mp.workprec(256):
        assert abs(oracle_theta_star(0.4, 2.5j) - oracle_theta(0.4, 2.5j) - oracle_G(0.4, 2.5j)) < mp.mpf(10) ** -60


def test_bilateral_sum_equivalence():
    rng = random.Random(5)
    for _ in range(20):
        q = round(rng.uniform(0.05, 0.5), 4)
        x = cmath.rect(rng.uniform(1.5, 4), rng.uniform(-3.1, 3.1))
        x = complex(round(x.real, 5), round(x.imag, 5))
        qi = make(q)
        xi = CRect.from_complex(x)
        direct = bilateral_sum(qi, xi, 40)
        assert abs(direct.mid() - theta_star(qi, xi, target=1e-25).enclosure.mid()) < 1e-20


def test_R_abs_examples():
    part = R_abs("0.5", LAMBDA, 11, include_tail=False)
    assert part.hi < make("0.633").lo
    assert part.intersects(make("0.6329437509", "0.6329437510"))
    x = CRect(make("2.5"), make("1"))
    assert R_abs(0, x, 3).intersects(abs_bounds(x.reciprocal() + 1))
    with mp.workprec(256):
        ref = abs(mp.fprod(1 + mp.mpf("0.5") ** (m - 1) / mp.mpf(-5) for m in range(1, 201)))
    assert contains(R_abs("0.5", CRect(-5), 30), ref)
    with pytest.raises(DomainError):
        R_abs("0.5", CRect(make("0.5")), 4)


def test_K_anchor_values():
    assert abs(K(0)).contains(1)
    assert abs(K(1)).contains(make("3.2"))
    u2 = make("2.6") - (make("5.76") - 1).sqrt()
    assert abs(K(u2)).contains(1)
    assert abs(u2.mid() - 0.4182575771) < 1e-10
    s = make("2.6") - (make("5.76") - 2).sqrt()
    assert abs(K(s)).contains(2)
    assert abs(s.mid() - 0.6609280570) < 1e-10
    for q in ("0.1", "0.37", "0.9"):
        qi = make(q)
        assert K(qi).intersects((1 - qi * 5) * (1 - qi / 5))


def test_M1_examples():
    h1 = iv.RInt(1)
    h3 = iv.RInt(1)
    for m in range(1, 41):
        h1 = h1 * M1(make("0.75") ** m, 0)
        h3 = h3 * M1(make("0.6") ** m, 1)
    assert abs(h1.mid() - 0.1103687051) < 2e-10
    assert abs(h3.mid() - 0.10480260772) < 1e-11
    for t in ("0", "0.5", "2.1"):
        assert M1(0, make(t)).contains(1)


def test_M1_closed_form_matches_definition():
    for q in ("0.1", "0.45", "0.8", "0.99"):
        for t in ("0", "0.3", "1", "2.12"):
            qi, ti = make(q), make(t)
            direct = (1 - qi) * M_mod(qi, point_x_w(ti))
            assert M1(qi, ti).intersects(direct)
        assert M1(make(q), 0).intersects(M1_point_t0(q))
        assert M1(make(q), 1).intersects(M1_point_t1(q))


def test_factor_monotonicity_in_argument():
    """|1 + q^m x| and |1 + q^{m-1}/x| decrease as arg x runs over [pi/2, pi] at |x| = 3."""
    for q in (0.2, 0.5, 0.8, 0.95):
        for m in (1, 2, 3, 7):
            prev_a = prev_b = None
            for k in range(101):
                x = 3 * cmath.exp(1j * cmath.pi * (0.5 + 0.5 * k / 100))
                a = abs(1 + q ** m * x)
                b = abs(1 + q ** (m - 1) / x)
                if prev_a is not None:
                    assert a <= prev_a + 1e-14 and b <= prev_b + 1e-14
                prev_a, prev_b = a, b


def test_factor_monotonicity_in_q_at_lambda():
    lam = 3 * cmath.exp(0.75j * cmath.pi)
    grid = [k / 1000 for k in range(1001)]
    for m in (2, 3, 5):
        vals = [abs(1 + q ** (m - 1) / lam) for q in grid]
        assert all(b <= a + 1e-14 for a, b in zip(vals, vals[1:]))
    vals = [abs(1 + q * lam) for q in grid if q >= 0.5]
    assert all(b >= a - 1e-14 for a, b in zip(vals, vals[1:]))


def test_M_maximal_at_t0_and_t1():
    w = float(w_const().mid())
    ts = [w * k / 400 for k in range(401)]
    for q in [0.6 + 0.4 * k / 20 for k in range(21)]:
        ms = [abs((1 + q * complex(-t, w)) * (1 + q / complex(-t, w))) for t in ts]
        assert max(ms) <= ms[0] + 1e-12
        if q <= 0.75:
            tail = [m for t, m in zip(ts, ms) if t >= 1]
            m1 = abs((1 + q * complex(-1, w)) * (1 + q / complex(-1, w)))
            assert max(tail) <= m1 + 1e-12


def test_M1_endpoint_curves_decrease():
    grid = [make(str(k / 1000)) for k in range(1001)]
    for f in (M1_point_t0, M1_point_t1):
        vals = [f(q).mid() for q in grid]
        assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_inverse_modulus_profile_on_segment():
    w = w_const()
    f = [abs_bounds(CRect(-make(str(k / 100)), w).reciprocal() + 1).mid() for k in range(0, 213)]
    assert all(b <= a for a, b in zip(f, f[1:]))
    f0 = abs_bounds(CRect(make(0), w).reciprocal() + 1)
    assert f0.intersects((iv.RInt(11) / 9).sqrt())
    assert abs(f0.mid() - 1.105541597) < 1e-9
