"""Branch-and-bound certification that theta(q, .) has no zeros on a path.

A path is a list of pieces, each a map s -> x(s) over a parameter interval.
Every piece is tiled, jointly with the q-range, by cells; a cell is accepted
once one of two sound lower bounds for |theta| on it is positive:

* ``direct``: modulus lower bound of a mean-value enclosure of theta;
* ``split``: |G| - |Theta*| (theta = Theta* - G), usable when |x| > 1.

Cells that fail both are bisected along the dimension of larger relative
width until a depth cap is hit.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpfr, mpq

from . import interval as iv
from .interval import CRect, RInt, make, to_decimal
from .product import theta_star_abs_upper
from .series import G, DomainError, TailStall, NonConvergence, theta, theta_centered, w_const

CERT_VERSION = 1


# -- paths ------------------------------------------------------------------

@dataclass(frozen=True)
class Piece:
    """x(s) = 3 e^{i pi s} for arcs, base + s*direction for lines."""
    name: str
    kind: str
    s_range: RInt
    base: complex = 0j
    direction: complex = 1 + 0j
    base_im_w: int = 0  # imaginary part of base is base_im_w * w exactly

    def x_box(self, s: RInt) -> CRect:
        if self.kind == "arc":
            phi = s * iv.pi()
            return CRect._raw(phi.cos() * 3, phi.sin() * 3)
        if self.base_im_w:
            base = CRect(make(self.base.real), w_const() * self.base_im_w)
        else:
            base = CRect(make(self.base.real), make(self.base.imag))
        d = self.direction
        return base + CRect._raw(s * make(d.real), s * make(d.imag))

    @property
    def is_real(self) -> bool:
        return (self.kind == "line" and self.base.imag == 0 and not self.base_im_w
                and self.direction.imag == 0)

    def endpoints(self):
        return self.x_box(RInt(self.s_range.lo)), self.x_box(RInt(self.s_range.hi))


@dataclass(frozen=True)
class BoundaryPath:
    name: str
    pieces: tuple
    closed: bool = True

    def piece(self, name: str) -> Piece:
        for p in self.pieces:
            if p.name == name:
                return p
        raise KeyError(name)


def boundary_D() -> BoundaryPath:
    """Boundary of the region cut from {|x| <= 3, Re x <= 0} by |Im x| <= w."""
    w = w_const()
    return BoundaryPath("D", (
        Piece("S+", "line", RInt._raw(mpfr(0), w.hi), base=0j, direction=-1 + 0j, base_im_w=1),
        Piece("C2", "arc", make("0.75", 1)),
        Piece("C3", "arc", make(1, "1.25")),
        Piece("S-", "line", RInt._raw(mpfr(0), w.hi), base=0j, direction=-1 + 0j, base_im_w=-1),
        Piece("Sv", "line", RInt._raw(iv._R.down.minus(w.hi), w.hi), base=0j, direction=1j),
    ))


def boundary_Delta() -> BoundaryPath:
    """Boundary of the rectangle [-3, 0] x [-3, 3]."""
    return BoundaryPath("Delta", (
        Piece("top", "line", make(-3, 0), base=3j, direction=1 + 0j),
        Piece("left", "line", make(-3, 3), base=-3 + 0j, direction=1j),
        Piece("bottom", "line", make(-3, 0), base=-3j, direction=1 + 0j),
        Piece("right", "line", make(-3, 3), base=0j, direction=1j),
    ))


def real_segment(a, b) -> BoundaryPath:
    a, b = float(a), float(b)
    if a > b:
        raise ValueError("segment needs a <= b")
    rng = make(a, b)
    if rng.lo == rng.hi:
        rng = RInt._raw(gmpy2.next_below(rng.lo), gmpy2.next_above(rng.hi))
    return BoundaryPath(f"segment:{_fmt_num(a)}:{_fmt_num(b)}",
                        (Piece("seg", "line", rng, base=0j, direction=1 + 0j),), closed=False)


def _fmt_num(v: float) -> str:
    return repr(v).rstrip("0").rstrip(".") if "." in repr(v) else repr(v)


def region_path(name: str) -> BoundaryPath:
    if name == "D":
        return boundary_D()
    if name == "Delta":
        return boundary_Delta()
    if name.startswith("segment:"):
        parts = name.split(":")
        if len(parts) != 3:
            raise ValueError(f"bad segment spec {name!r}")
        return real_segment(float(parts[1]), float(parts[2]))
    raise ValueError(f"unknown region {name!r}")


# -- configuration and records -------------------------------------------------

@dataclass
class CertConfig:
    precision: int = 128
    grid: int = 8
    depth_cap: int = 40
    max_cells: int = 2_000_000
    threads: int = 0
    value_target: float = 1e-20
    deriv_target: float = 1e-8
    direct_abs_limit: float = 1.2
    direct_q_limit: float = 0.6

    def snapshot(self) -> dict:
        return {"precision_bits": self.precision, "grid": self.grid, "depth_cap": self.depth_cap,
                "max_cells": self.max_cells}


@dataclass(frozen=True)
class Cell:
    piece: str
    q: RInt
    s: RInt
    lb: mpfr
    method: str


@dataclass(frozen=True)
class Failure:
    piece: str
    q: RInt
    s: RInt
    reason: str


@dataclass
class Certificate:
    region: str
    q_range: RInt
    cells: list
    failures: list
    config: dict
    mode: str = "nonzero"
    status: str = "certified"
    stats: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.status == "certified"


# -- bounds ------------------------------------------------------------------

def _direct(qb, xb, cfg, positive):
    e = theta_centered(qb, xb, target=cfg.value_target, deriv_target=cfg.deriv_target)
    if positive:
        return e.re.lo
    return e.abs_lo()


def _split(qb, xb, cfg, positive):
    if xb.abs_lo() <= 1 or qb.lo < 0:
        return None
    g = G(qb, xb, target=cfg.value_target).enclosure
    if positive:
        # theta = Theta* - G with G real on the real axis
        glo = iv._R.down.minus(g.re.hi)
        if glo <= 0:
            return None
        ts = theta_star_abs_upper(qb, xb, threshold=glo)
        return iv._R.down.sub(glo, ts)
    glo = g.abs_lo()
    if glo <= 0:
        return None
    ts = theta_star_abs_upper(qb, xb, threshold=glo)
    return iv._R.down.sub(glo, ts)


def cell_bound(piece: Piece, qb: RInt, sb: RInt, cfg: CertConfig, positive=False):
    """(lower_bound, method) for the cell, or (None, None)."""
    xb = piece.x_box(sb)
    direct_first = xb.abs_lo() <= cfg.direct_abs_limit or qb.hi <= cfg.direct_q_limit
    order = (("direct", _direct), ("split", _split))
    if not direct_first:
        order = order[::-1]
    for name, fn in order:
        try:
            lb = fn(qb, xb, cfg, positive)
        except (DomainError, TailStall, NonConvergence, ZeroDivisionError):
            lb = None
        if lb is not None and lb > 0:
            return lb, name
    return None, None


def _witness(piece: Piece, qb: RInt, sb: RInt, positive: bool):
    """A reason string when the cell provably contains a zero (or a negative value)."""
    if piece.kind != "line" or not piece.is_real:
        return None
    qc = qb.mid()
    d = piece.direction.real
    b = piece.base.real
    vals = []
    for sv in (sb.lo, sb.mid(), sb.hi):
        xs = make(b) + make(d) * RInt(sv)
        e = theta(RInt(qc), CRect(xs, RInt(0)), target=1e-30).enclosure
        vals.append(e.re)
    if positive:
        for v in vals:
            if v.hi < 0:
                return f"theta < 0 at q={float(qc):.17g}"
        return None
    signs = {(1 if v.lo > 0 else -1 if v.hi < 0 else 0) for v in vals}
    if 1 in signs and -1 in signs:
        return f"sign change of theta at q={float(qc):.17g}"
    return None


def _grid(r: RInt, n: int):
    pts = [r.lo]
    step = (r.hi - r.lo) / n
    for i in range(1, n):
        pts.append(r.lo + step * i)
    pts.append(r.hi)
    return [RInt._raw(pts[i], pts[i + 1]) for i in range(n)]


def _rel(a: RInt, full: RInt):
    fw = full.hi - full.lo
    return (a.hi - a.lo) / fw if fw > 0 else mpfr(0)


def _run_root(args):
    piece, qb0, sb0, qfull, sfull, cfg, positive, budget = args
    iv.set_precision(cfg.precision)
    cells, failures = [], []
    stack = [(qb0, sb0, 0, 0)]
    used = 0
    while stack:
        qb, sb, dq, ds = stack.pop()
        used += 1
        lb, method = cell_bound(piece, qb, sb, cfg, positive)
        if lb is not None:
            cells.append(Cell(piece.name, qb, sb, lb, method))
            continue
        reason = _witness(piece, qb, sb, positive)
        if reason is None and used >= budget:
            reason = "cell budget exhausted"
        split_q = _rel(qb, qfull) >= _rel(sb, sfull)
        if reason is None:
            if split_q and dq >= cfg.depth_cap:
                split_q = False
            if not split_q and (ds >= cfg.depth_cap or sb.lo == sb.hi):
                split_q = dq < cfg.depth_cap
                if not split_q:
                    reason = "depth cap reached"
        if reason is not None:
            failures.append(Failure(piece.name, qb, sb, reason))
            for qr, sr, _, _ in stack:
                failures.append(Failure(piece.name, qr, sr, "abandoned"))
            break
        if split_q:
            a, b = qb.split()
            stack.append((b, sb, dq + 1, ds))
            stack.append((a, sb, dq + 1, ds))
        else:
            a, b = sb.split()
            stack.append((qb, b, dq, ds + 1))
            stack.append((qb, a, dq, ds + 1))
    return cells, failures, used


def _canonical(path: BoundaryPath, items):
    order = {p.name: i for i, p in enumerate(path.pieces)}
    return sorted(items, key=lambda c: (order[c.piece], c.q.lo, c.s.lo, c.q.hi, c.s.hi))


def _executor_map(fn, jobs, threads):
    if threads == 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    workers = threads if threads > 0 else (os.cpu_count() or 1)
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as ex:
        return list(ex.map(fn, jobs, chunksize=1))


def _certify(path: BoundaryPath, q_range, cfg: CertConfig, positive: bool) -> Certificate:
    q_range = q_range if isinstance(q_range, RInt) else make(*q_range)
    if q_range.hi >= 1 or q_range.lo <= -1:
        raise ValueError("q_range must lie inside (-1, 1)")
    with iv.working_precision(cfg.precision):
        jobs = []
        n_roots = len(path.pieces) * cfg.grid * cfg.grid
        budget = max(1, cfg.max_cells // n_roots)
        for piece in path.pieces:
            sgrid = _grid(piece.s_range, cfg.grid) if piece.s_range.lo < piece.s_range.hi else [piece.s_range]
            for qb in _grid(q_range, cfg.grid):
                for sb in sgrid:
                    jobs.append((piece, qb, sb, q_range, piece.s_range, cfg, positive, budget))
        results = _executor_map(_run_root, jobs, cfg.threads)
    cells, failures, used = [], [], 0
    for c, f, u in results:
        cells.extend(c)
        failures.extend(f)
        used += u
    cert = Certificate(
        region=path.name, q_range=q_range, cells=_canonical(path, cells),
        failures=_canonical(path, failures), config=cfg.snapshot(),
        mode="positive" if positive else "nonzero",
        status="failed" if failures else "certified",
        stats={"cells_evaluated": used, "cells_accepted": len(cells)},
    )
    return cert


def certify_no_zeros(path, q_range, cfg: CertConfig | None = None) -> Certificate:
    """Certify theta(q, x) != 0 for all q in q_range and x on the path."""
    if isinstance(path, str):
        path = region_path(path)
    return _certify(path, q_range, cfg or CertConfig(), positive=False)


def certify_positive_on_segment(a, b, q_range, cfg: CertConfig | None = None) -> Certificate:
    """Certify theta(q, x) > 0 for x in [a, b] (a <= b <= 0) and q in q_range."""
    if not (a <= b <= 0):
        raise ValueError("need a <= b <= 0")
    return _certify(real_segment(a, b), q_range, cfg or CertConfig(), positive=True)


# -- audit ---------------------------------------------------------------------

def _covers(cells, qr: RInt, sr: RInt) -> bool:
    """True iff the union of the closed cells contains qr x sr.

    Slab sweep over q: between consecutive cell endpoints the active cells'
    s-ranges must cover sr without gaps.
    """
    cells = [c for c in cells if c.q.hi > qr.lo and c.q.lo < qr.hi]
    if not cells:
        return False
    cuts = sorted({qr.lo, qr.hi} | {c.q.lo for c in cells if qr.lo < c.q.lo < qr.hi}
                  | {c.q.hi for c in cells if qr.lo < c.q.hi < qr.hi})
    order = sorted(cells, key=lambda c: c.q.lo)
    k = 0
    active = []
    for a, b in zip(cuts, cuts[1:]):
        while k < len(order) and order[k].q.lo <= a:
            active.append(order[k])
            k += 1
        active = [c for c in active if c.q.hi > a]
        spans = sorted((c.s.lo, c.s.hi) for c in active if c.q.hi >= b)
        reach = sr.lo
        for lo, hi in spans:
            if lo > reach:
                return False
            if hi > reach:
                reach = hi
            if reach >= sr.hi:
                break
        if reach < sr.hi:
            return False
    return True


def _recheck(args):
    cells, region, positive, cfg = args
    iv.set_precision(cfg.precision)
    path = region_path(region)
    for c in cells:
        piece = path.piece(c.piece)
        lb, _ = cell_bound(piece, c.q, c.s, cfg, positive)
        if lb is None or lb <= 0:
            return False
    return True


def audit(cert: Certificate, recompute: bool = True, threads: int = 0) -> bool:
    """True iff the certificate is certified, tiles its domain and every bound re-verifies."""
    if cert.status != "certified" or cert.failures:
        return False
    try:
        path = region_path(cert.region)
    except ValueError:
        return False
    for c in cert.cells:
        if not (c.lb > 0):
            return False
    by_piece = {p.name: [] for p in path.pieces}
    for c in cert.cells:
        if c.piece not in by_piece:
            return False
        by_piece[c.piece].append(c)
    for p in path.pieces:
        if not _covers(by_piece[p.name], cert.q_range, p.s_range):
            return False
    if not recompute:
        return True
    cfg = CertConfig(precision=cert.config.get("precision_bits", 128), threads=threads)
    positive = cert.mode == "positive"
    chunks = [cert.cells[i:i + 200] for i in range(0, len(cert.cells), 200)]
    jobs = [(ch, cert.region, positive, cfg) for ch in chunks]
    with iv.working_precision(cfg.precision):
        return all(_executor_map(_recheck, jobs, threads))


# -- JSON ----------------------------------------------------------------------

def _pair(r: RInt):
    return [str(to_decimal(r.lo, 25, "floor")), str(to_decimal(r.hi, 25, "ceiling"))]


def cert_to_dict(cert: Certificate) -> dict:
    return {
        "version": CERT_VERSION,
        "region": cert.region,
        "q": _pair(cert.q_range),
        "precision_bits": cert.config.get("precision_bits", 128),
        "status": cert.status,
        "mode": cert.mode,
        "config": cert.config,
        "cells": [{"piece": c.piece, "q": _pair(c.q), "s": _pair(c.s),
                   "lb": str(to_decimal(c.lb, 25, "floor")), "method": c.method}
                  for c in cert.cells],
        "failures": [{"piece": f.piece, "q": _pair(f.q), "s": _pair(f.s), "reason": f.reason}
                     for f in cert.failures],
    }


def cert_to_json(cert: Certificate) -> str:
    return json.dumps(cert_to_dict(cert), indent=1)


def cert_from_dict(d: dict) -> Certificate:
    """Rebuild a certificate; decimal endpoints are widened outward on reading."""
    prec = int(d.get("precision_bits", 128))
    with iv.working_precision(prec):
        cells = [Cell(c["piece"], make(*c["q"]), make(*c["s"]), iv._down(c["lb"]), c["method"])
                 for c in d["cells"]]
        failures = [Failure(f["piece"], make(*f["q"]), make(*f["s"]), f["reason"])
                    for f in d.get("failures", [])]
        q = make(*d["q"])
    cfg = dict(d.get("config", {}))
    cfg["precision_bits"] = prec
    return Certificate(region=d["region"], q_range=q, cells=cells, failures=failures,
                       config=cfg, mode=d.get("mode", "nonzero"), status=d["status"])
