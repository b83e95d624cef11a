"""Zeros of theta(q, .): counting, refinement, continuation in q, spectral values.

Floating-point work runs on gmpy2 ``mpc`` numbers at a precision chosen from
the size of the largest series term, so cancellation in the alternating
regime (x < 0, moderate q) does not eat the answer. Zero counting
uses interval zero exclusion on the contour where it is affordable and
reports whether the count is certified.
"""
from __future__ import annotations

import cmath
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from . import interval as iv
from .interval import CRect, RInt, make
from .series import theta_centered


class NoConvergence(ArithmeticError):
    """Newton iteration did not converge."""


class BoundaryZero(ArithmeticError):
    """A zero could not be excluded from the contour of a counting box."""


class BracketingFailure(ArithmeticError):
    """No (or more than one) spectral collision in the search range."""


@dataclass
class ZeroTrajectory:
    branch: int
    samples: list = field(default_factory=list)  # (q, z, residual)
    direction: int = 1
    status: str = "complete"


@dataclass(frozen=True)
class SpectralValue:
    j: int
    q: float
    z: complex
    res_theta: float
    res_dtheta: float


@dataclass(frozen=True)
class TruncRoots:
    roots: list
    residuals: list
    degenerate: bool = False


# -- multiprecision evaluation ---------------------------------------------------

def _peak_log2(aq: float, ax: float) -> float:
    """log2 of the largest |q|^{j(j+1)/2} |x|^j over j >= 0."""
    if aq == 0 or ax == 0:
        return 0.0
    lq, lx = math.log2(aq), math.log2(ax)
    if lq >= 0:
        return math.inf
    js = max(0.0, -lx / lq - 0.5)
    best = 0.0
    for j in (math.floor(js), math.ceil(js)):
        best = max(best, j * (j + 1) / 2 * lq + j * lx)
    return best


def precision_for(q, x, extra: int = 96) -> int:
    return int(extra + max(0.0, _peak_log2(abs(complex(q)), abs(complex(x))))) + 8


def _ctx(prec):
    return gmpy2.context(gmpy2.get_context(), precision=prec)


def _num(v, prec):
    if isinstance(v, str):
        s = v.replace(" ", "").replace("j", "i")
        if "i" in s:
            z = complex(s.replace("i", "j"))
            return mpc(z.real, z.imag, precision=prec) if prec else mpc(z)
        return mpc(mpfr(s, prec))
    if isinstance(v, (mpfr, mpc)):
        return mpc(v)
    z = complex(v)
    return mpc(mpfr(z.real, prec), mpfr(z.imag, prec))


def theta_all(q, x, prec: int | None = None):
    """(theta, theta_x, theta_xx, theta_q, theta_xq) at a point, as Python complex."""
    if prec is None:
        prec = precision_for(q, x)
    with _ctx(prec):
        q = _num(q, prec)
        x = _num(x, prec)
        aq = abs(q)
        if aq >= 1:
            raise ValueError("|q| must be < 1")
        zero = mpc(0)
        s0 = s1 = s2 = sq = sxq = zero
        c = mpc(1)          # q^{T_j}
        cq = zero           # T_j q^{T_j - 1}
        xp = mpc(1)         # x^j
        xm1 = zero          # x^{j-1}
        xm2 = zero          # x^{j-2}
        qp = mpc(1)         # q^j
        eps = mpfr(2) ** (-prec)
        peak = mpfr(0)
        j = 0
        ax = abs(x)
        while True:
            t = c * xp
            s0 += t
            if j >= 1:
                s1 += j * c * xm1
                sq += cq * xp
                sxq += j * cq * xm1
            if j >= 2:
                s2 += j * (j - 1) * c * xm2
            at = abs(t)
            if at > peak:
                peak = at
            nxt = abs(qp * q) * ax
            if j > 2 and nxt < 0.5 and at * (j + 1) ** 3 < eps * (1 + peak):
                break
            if j > 10**6:
                raise ArithmeticError("series did not settle")
            # advance to j+1: q^{T_{j+1}} = q^{T_j} q^{j+1}
            qp = qp * q
            tj1 = (j + 1) * (j + 2) // 2
            # d/dq q^{T_{j+1}} = T_{j+1} q^{T_{j+1}-1} = T_{j+1} q^{T_j} q^j
            cq = tj1 * c * (qp / q) if q != 0 else (mpc(1) if j == 0 else zero)
            c = c * qp
            xm2, xm1, xp = xm1, xp, xp * x
            j += 1
        return tuple(complex(v) for v in (s0, s1, s2, sq, sxq))


def theta_value(q, x, prec: int | None = None) -> complex:
    return theta_all(q, x, prec)[0]


# -- Newton -----------------------------------------------------------------------

def find_zero(q, seed, tol: float = 1e-14, maxiter: int = 100):
    """Newton on theta(q, .) from ``seed``; returns (z, |theta(q, z)|)."""
    z = complex(seed)
    real = complex(q).imag == 0 and z.imag == 0
    for _ in range(maxiter):
        f, fx, *_ = theta_all(q, z)
        if fx == 0:
            raise NoConvergence(f"zero derivative at {z}")
        step = f / fx
        if real:
            step = complex(step.real, 0.0)
        z -= step
        if abs(step) < tol * (1 + abs(z)):
            return z, abs(theta_value(q, z))
    raise NoConvergence(f"Newton from {seed} did not converge in {maxiter} steps")


# -- zero counting ---------------------------------------------------------------

def _edge_value(q, z):
    return complex(theta_value(q, z))


class _Counter:
    """Winding accumulation state: interval-evaluation budget and certification flag."""

    def __init__(self, q, budget: int, cert_depth: int):
        self.qf = float(q.mid()) if isinstance(q, RInt) else q
        self.qi = make(q) if not isinstance(q, RInt) else q
        self.budget = budget
        self.cert_depth = cert_depth
        self.certified = True

    def excludes_zero(self, a: complex, b: complex) -> bool:
        if self.budget <= 0:
            return False
        self.budget -= 1
        lo_re, hi_re = sorted((a.real, b.real))
        lo_im, hi_im = sorted((a.imag, b.imag))
        box = CRect(make(lo_re, hi_re), make(lo_im, hi_im))
        return not theta_centered(self.qi, box, target=1e-25, deriv_target=1e-12).contains_zero()

    def edge(self, a: complex, b: complex, fa: complex, fb: complex, depth: int, rigorous: bool) -> float:
        """Arg increase of theta along [a, b].

        While ``rigorous`` the segment is accepted only once an interval
        enclosure of theta on it excludes 0. Past ``cert_depth`` (or when the
        budget is spent) the subtree falls back to sampling: refine until the
        phase step is below pi/2 and agrees with the two half steps.
        """
        d = cmath.phase(fb / fa)
        if rigorous:
            if abs(d) < math.pi / 2 and self.excludes_zero(a, b):
                return d
            if depth >= self.cert_depth or self.budget <= 0:
                self.certified = False
                rigorous = False
        if depth > 52:
            raise _EdgeHit()
        m = (a + b) / 2
        fm = _edge_value(self.qf, m)
        if fm == 0:
            raise _EdgeHit()
        if not rigorous:
            d1, d2 = cmath.phase(fm / fa), cmath.phase(fb / fm)
            if abs(d) < math.pi / 2 and abs(d1 + d2 - d) < 1e-9 and abs(d1) < math.pi / 4 and abs(d2) < math.pi / 4:
                return d
        return (self.edge(a, m, fa, fm, depth + 1, rigorous)
                + self.edge(m, b, fm, fb, depth + 1, rigorous))


class _EdgeHit(Exception):
    pass


def _parse_rect(rect):
    if isinstance(rect, str):
        rect = [float(v) for v in rect.split(":")]
    x0, x1, y0, y1 = (float(v) for v in rect)
    if not (x0 < x1 and y0 < y1):
        raise ValueError("rect needs x0 < x1 and y0 < y1")
    return x0, x1, y0, y1


@dataclass
class ZeroCount:
    count: int
    certified: bool
    rect: tuple


def count_zeros_detail(q, rect, pieces: int = 16, inflations: int = 5, budget: int = 4000,
                       cert_depth: int = 12) -> ZeroCount:
    """Winding number of theta(q, .) around rect = (x0, x1, y0, y1).

    Each edge is cut into ``pieces`` segments and refined adaptively. A
    segment whose interval enclosure excludes 0 and whose phase increment is
    below pi/2 contributes a proven increment; ``certified`` is True when
    every segment was settled that way. Segments that stay unresolved below
    ``cert_depth`` halvings, or after ``budget`` interval evaluations, are
    settled by phase sampling instead. If the contour seems to pass through a
    zero the box is inflated slightly (``rect`` in the result is the box
    actually used).
    """
    x0, x1, y0, y1 = _parse_rect(rect)
    for attempt in range(inflations + 1):
        st = _Counter(q, budget, cert_depth)
        corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
        try:
            total = 0.0
            for k in range(4):
                a, b = corners[k], corners[(k + 1) % 4]
                pts = [a + (b - a) * i / pieces for i in range(pieces + 1)]
                vals = [_edge_value(st.qf, p) for p in pts]
                if any(v == 0 for v in vals):
                    raise _EdgeHit()
                for i in range(pieces):
                    total += st.edge(pts[i], pts[i + 1], vals[i], vals[i + 1], 0, True)
            n = total / (2 * math.pi)
            k = round(n)
            if abs(n - k) > 1e-6:
                raise ArithmeticError(f"non-integer winding {n}")
            return ZeroCount(int(k), st.certified, (x0, x1, y0, y1))
        except _EdgeHit:
            dx, dy = (x1 - x0) * 1e-3, (y1 - y0) * 1e-3
            x0, x1, y0, y1 = x0 - dx, x1 + dx, y0 - dy, y1 + dy
    raise BoundaryZero(f"zero on or near the contour after {inflations} inflations")


def count_zeros(q, rect, pieces: int = 16, inflations: int = 5) -> int:
    """Number of zeros (with multiplicity) of theta(q, .) inside rect = (x0, x1, y0, y1)."""
    return count_zeros_detail(q, rect, pieces, inflations).count


# -- truncation roots --------------------------------------------------------------

def _log_coeffs(q: float, N: int):
    """Complex logs of q^{j(j+1)/2}, j = 0..N."""
    aq = abs(q)
    j = np.arange(N + 1)
    tri = j * (j + 1) // 2
    out = tri * math.log(aq) + 0j
    if q < 0:
        out = out + 1j * math.pi * (tri % 2)
    return out


def _aberth(logc: np.ndarray, iters: int = 600, tol: float = 1e-15):
    N = len(logc) - 1
    j = np.arange(N + 1)
    # Newton polygon radii: |c_{k-1}/c_k| for the concave coefficient profile
    lr = (logc[:-1] - logc[1:]).real
    rng = np.random.default_rng(12345)
    ang = np.pi / 2 + 2 * np.pi * np.arange(N) / max(N, 1) * 0.618 + rng.uniform(0, 0.1, N)
    lz = lr + 1j * ang
    z_log = lz.copy()  # work with log z
    for _ in range(iters):
        A = logc[None, :] + j[None, :] * z_log[:, None]
        mx = A.real.max(axis=1, keepdims=True)
        w = np.exp(A - mx)
        p = w.sum(axis=1)
        dp = (w[:, 1:] * j[None, 1:]).sum(axis=1)  # z * p'(z), scaled
        ratio = p / dp  # p/(z p') = (p/p')/z
        z = np.exp(z_log)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        s = (1.0 / diff).sum(axis=1)
        newton = ratio * z
        corr = newton / (1 - newton * s)
        rel = np.abs(corr) / np.abs(z)
        z_new = z - corr
        bad = ~np.isfinite(z_new) | (z_new == 0)
        z_new[bad] = z[bad] * 1.01
        z_log = np.log(z_new)
        if rel.max() < tol:
            break
    return np.exp(z_log)


def _poly_eval(coeffs, z):
    p = mpc(0)
    dp = mpc(0)
    for c in reversed(coeffs):
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _polish(q, N, z0: complex, resid_tol: float):
    aq = abs(q)
    prec = precision_for(q, z0, extra=64 + 40)
    for _ in range(6):
        with _ctx(prec):
            qq = mpfr(str(q)) if isinstance(q, str) else mpfr(q)
            coeffs = [qq ** (j * (j + 1) // 2) for j in range(N + 1)]
            z = mpc(z0)
            res = None
            for _ in range(80):
                p, dp = _poly_eval(coeffs, z)
                res = abs(p)
                if res < resid_tol:
                    break
                if dp == 0:
                    break
                step = p / dp
                z = z - step
                if abs(step) <= abs(z) * mpfr(2) ** (8 - prec):
                    p, dp = _poly_eval(coeffs, z)
                    res = abs(p)
                    break
            if res is not None and res < resid_tol:
                return complex(z), float(res)
        prec *= 2
    return complex(z), float(res)


def trunc_zeros(q, N: int, polish: bool = True) -> TruncRoots:
    """All N roots of sum_{j<=N} q^{j(j+1)/2} x^j (Aberth iteration, then Newton polish)."""
    if N < 0 or N > 500:
        raise ValueError("N must be in [0, 500]")
    qf = float(q)
    if qf == 0 or N == 0:
        return TruncRoots([], [], degenerate=True)
    if abs(qf) >= 1:
        raise ValueError("|q| must be < 1")
    roots = _aberth(_log_coeffs(qf, N))
    tol = 1e-10  # max |coefficient| is the constant term 1
    out, res = [], []
    for z in roots:
        if polish:
            z, r = _polish(qf, N, complex(z), tol)
        else:
            r = float("nan")
        out.append(complex(z))
        res.append(r)
    order = sorted(range(N), key=lambda i: (abs(out[i]), out[i].imag))
    return TruncRoots([out[i] for i in order], [res[i] for i in order])


def oracle_degree(q: float, r: float, tail: float = 1e-30) -> int:
    """Smallest N with |q|^{N(N+1)/2} r^N < tail."""
    aq = abs(q)
    if aq == 0:
        return 1
    lt = math.log(tail)
    N = 1
    while (N * (N + 1) / 2) * math.log(aq) + N * math.log(max(r, 1e-300)) >= lt:
        N += 1
        if N > 500:
            raise ValueError("degree above 500 needed")
    return N


def zeros_in_box(q, rect, rigorous: bool = False):
    """Zeros of theta(q, .) inside rect via truncation roots refined on the full series."""
    x0, x1, y0, y1 = _parse_rect(rect)
    r = max(abs(complex(a, b)) for a in (x0, x1) for b in (y0, y1))
    N = oracle_degree(float(q), r)
    tr = trunc_zeros(q, N, polish=False)
    found = []
    for z in tr.roots:
        if x0 - 1e-6 <= z.real <= x1 + 1e-6 and y0 - 1e-6 <= z.imag <= y1 + 1e-6:
            try:
                zz, res = find_zero(q, z)
            except NoConvergence:
                zz, res = z, abs(theta_value(q, z))
            if x0 <= zz.real <= x1 and y0 <= zz.imag <= y1:
                found.append((zz, res))
    if rigorous:
        checked = []
        for zz, res in found:
            h = 1e-8 * (1 + abs(zz))
            c = count_zeros_detail(q, (zz.real - h, zz.real + h, zz.imag - h, zz.imag + h))
            if not c.certified:
                raise BoundaryZero(f"could not certify the zero near {zz}")
            checked.append((zz, res, c.count))
        return checked
    return found


# -- continuation -----------------------------------------------------------------

def trace_branch(q_from: float, q_to: float, seed, step: float = 1e-3, min_step: float = 1e-6,
                 max_step: float | None = None, branch: int = 0, tol: float = 1e-14) -> ZeroTrajectory:
    """Follow a zero of theta(q, .) as q moves from q_from to q_to.

    Tangent predictor dz/dq = -theta_q/theta_x, Newton corrector. A step is
    rejected when Newton fails or the corrected zero lies more than three
    predicted steps from the previous one; rejected steps halve h, and the
    trace stops with status ``step_underflow`` once h < min_step.
    """
    direction = 1 if q_to >= q_from else -1
    max_step = max_step or 10 * step
    z, res = find_zero(q_from, seed, tol=tol)
    traj = ZeroTrajectory(branch=branch, samples=[(float(q_from), z, res)], direction=direction)
    q = float(q_from)
    h = step
    while direction * (q_to - q) > 1e-15:
        h = min(h, abs(q_to - q))
        f, fx, _, fq, _ = theta_all(q, z)
        slope = -fq / fx if fx != 0 else complex("inf")
        pred = z + direction * h * slope
        qn = q + direction * h
        accepted = False
        if cmath.isfinite(pred):
            try:
                zn, resn = find_zero(qn, pred, tol=tol, maxiter=30)
                span = abs(pred - z)
                accepted = abs(zn - z) <= 3 * span + 1e-12 * (1 + abs(z))
            except (NoConvergence, ValueError, ArithmeticError):
                accepted = False
        if accepted:
            q, z = qn, zn
            traj.samples.append((q, z, resn))
            h = min(h * 1.5, max_step)
        else:
            h /= 2
            if h < min_step:
                traj.status = "step_underflow"
                break
    return traj


# -- real zeros and spectral values ------------------------------------------------

def _fast_theta_negative(q: float, xs: np.ndarray) -> np.ndarray:
    """theta(q, x) = Theta*(q, x) - G(q, x) in double precision for real x < -1."""
    M = int(math.log(1e-20) / math.log(q)) + 5
    m = np.arange(1, M + 1)
    qm = q ** m
    qm1 = q ** (m - 1)
    f1 = 1 + np.outer(xs, qm)
    f2 = 1 + np.outer(1 / xs, qm1)
    logabs = np.log(np.abs(f1)).sum(axis=1) + np.log(np.abs(f2)).sum(axis=1) + np.log1p(-qm).sum()
    sign = np.prod(np.sign(f1), axis=1) * np.prod(np.sign(f2), axis=1)
    P = sign * np.exp(logabs)
    X = 1 / xs
    Gs = np.zeros_like(xs)
    for i in range(80, 0, -1):
        Gs = Gs * X + q ** (i * (i - 1) / 2)
    return P - Gs * X


def rightmost_real_zeros(q: float, count: int = 2, x_start: float = -5.0, x_limit: float = -1e7,
                         chunk: int = 400):
    """Approximate the ``count`` rightmost real zeros of theta(q, .) left of x_start."""
    out = []
    lo = math.log(-x_start)
    step = 0.0015
    prev_x = prev_v = None
    while len(out) < count:
        ls = lo + step * np.arange(chunk)
        xs = -np.exp(ls)
        vals = _fast_theta_negative(q, xs)
        if prev_v is not None:
            xs = np.concatenate(([prev_x], xs))
            vals = np.concatenate(([prev_v], vals))
        sc = np.nonzero(np.sign(vals[1:]) != np.sign(vals[:-1]))[0]
        for i in sc:
            out.append((float(xs[i]), float(xs[i + 1])))
            if len(out) >= count:
                break
        prev_x, prev_v = xs[-1], vals[-1]
        lo = lo + step * chunk
        if -math.exp(lo) < x_limit:
            break
    return out


def _rightmost(q):
    z = rightmost_real_zeros(q, 1)
    return z[0][0] if z else None


def spectral_brackets(count: int, q_start: float = 0.25, q_step: float = 1e-3, q_stop: float = 0.95):
    """q-grid brackets [q_k, q_{k+1}] across which the rightmost real zero jumps left.

    At a spectral value the two rightmost real zeros merge and leave the real
    axis, so the rightmost real zero jumps to the next (much more negative) one.
    """
    out = []
    n = int(round((q_stop - q_start) / q_step))
    prev = None
    for k in range(n + 1):
        q = round(q_start + k * q_step, 12)
        r = _rightmost(q)
        if prev is not None and r is not None and prev[1] is not None and r / prev[1] > 1.25:
            out.append((prev[0], q))
            if len(out) >= count:
                break
        prev = (q, r)
    return out


def _critical_between(q, a, b):
    """Zero of theta_x between real points a < b (bisection on sign of theta_x)."""
    fa = theta_all(q, a)[1].real
    fb = theta_all(q, b)[1].real
    if fa * fb > 0:
        return (a + b) / 2
    for _ in range(80):
        m = (a + b) / 2
        fm = theta_all(q, m)[1].real
        if fm * fa <= 0:
            b = m
        else:
            a, fa = m, fm
    return (a + b) / 2


def refine_double_zero(q0: float, x0: float, tol: float = 1e-13, maxiter: int = 60):
    """2-D Newton on (theta, theta_x) = 0 in the real unknowns (q, x)."""
    q, x = float(q0), float(x0)
    for _ in range(maxiter):
        f, fx, fxx, fq, fxq = (v.real for v in theta_all(q, x))
        det = fq * fxx - fx * fxq
        if det == 0:
            raise NoConvergence("singular Jacobian")
        dq = (f * fxx - fx * fx) / det
        dx = (fq * fx - fxq * f) / det
        q -= dq
        x -= dx
        if abs(dq) < tol and abs(dx) < tol * (1 + abs(x)):
            f, fx = theta_all(q, x)[:2]
            return q, x, abs(f), abs(fx)
    raise NoConvergence("double-zero Newton did not converge")


def _spectral_from_bracket(args):
    j, qa, qb = args
    pair = rightmost_real_zeros(qa, 2)
    if len(pair) < 2:
        raise BracketingFailure(f"fewer than two real zeros at q={qa}")
    za = find_zero(qa, pair[0][0])[0].real
    zb = find_zero(qa, pair[1][0])[0].real
    c = _critical_between(qa, min(za, zb), max(za, zb))
    q, x, r0, r1 = refine_double_zero(qa, c)
    if not (qa - 1e-9 <= q <= qb + 1e-9):
        raise BracketingFailure(f"Newton left the bracket [{qa}, {qb}]: q={q}")
    return SpectralValue(j, q, complex(x, 0.0), r0, r1)


def find_spectral(j: int, search_range=None) -> SpectralValue:
    """The j-th spectral value (1-based) or the single one inside search_range."""
    if search_range is None:
        br = spectral_brackets(j)
        if len(br) < j:
            raise BracketingFailure(f"only {len(br)} collisions found")
        qa, qb = br[j - 1]
    else:
        lo, hi = (float(search_range.lo), float(search_range.hi)) if isinstance(search_range, RInt) \
            else (float(search_range[0]), float(search_range[1]))
        br = spectral_brackets(10**6, q_start=lo, q_stop=hi)
        if len(br) != 1:
            raise BracketingFailure(f"{len(br)} collisions detected in [{lo}, {hi}]")
        qa, qb = br[0]
    sv = _spectral_from_bracket((j, qa, qb))
    if max(sv.res_theta, sv.res_dtheta) > 1e-12:
        raise NoConvergence("residuals above 1e-12")
    return sv


def spectral_values(count: int, threads: int = 1):
    """The first ``count`` spectral values, refined in parallel."""
    br = spectral_brackets(count)
    if len(br) < count:
        raise BracketingFailure(f"only {len(br)} collisions found below q=0.95")
    jobs = [(i + 1, a, b) for i, (a, b) in enumerate(br)]
    if threads == 1:
        return [_spectral_from_bracket(a) for a in jobs]
    with ProcessPoolExecutor(max_workers=threads if threads > 0 else None) as ex:
        return list(ex.map(_spectral_from_bracket, jobs))


# -- output formats -------------------------------------------------------------------

def trajectory_csv(trajs) -> str:
    lines = ["branch,q,re,im,residual"]
    for t in sorted(trajs, key=lambda t: t.branch):
        for q, z, r in t.samples:
            lines.append(f"{t.branch},{q:.17g},{z.real:.17g},{z.imag:.17g},{r:.17g}")
    return "\n".join(lines) + "\n"


def spectral_to_dict(sv: SpectralValue) -> dict:
    return {"j": sv.j, "q": f"{sv.q:.17g}", "re": f"{sv.z.real:.17g}", "im": f"{sv.z.imag:.17g}",
            "res_theta": f"{sv.res_theta:.17g}", "res_dtheta": f"{sv.res_dtheta:.17g}"}


def spectral_json(values) -> str:
    return json.dumps([spectral_to_dict(v) for v in values], indent=1)
