"""Topological conjugacy tables between equal-rotation-number maps.

The conjugacy h with h(f^i(0)) = g^i(0) is represented only at dynamical
partition endpoints (the orbit points of 0); per-interval ratios
|h(I)|/|I| act as derivative proxies, and the decay (or not) of their
log-oscillation across levels is the desk-scale smoothness diagnostic.
"""
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpfr

from .circlemap import rotation_number
from .errors import LevelMismatch, OutOfDomain, RotationNumberMismatch
from .numerics import FitResult, linear_fit, precision
from .partition import closest_returns, _proj


@dataclass(frozen=True)
class ConjugacyTable:
    level: int
    knots: tuple        # (x on the f-circle, y on the g-circle), x-sorted
    ratios: tuple       # |h(I)|/|I| per gap between consecutive knots (wraps)
    second_point_residual: object
    f_spec: object = field(repr=False, default=None)
    g_spec: object = field(repr=False, default=None)


def _check_same_rotation(f, g, depth):
    cf_f = rotation_number(f, depth)
    cf_g = rotation_number(g, depth)
    qf, qg = cf_f.quotients, cf_g.quotients
    for i in range(max(len(qf), len(qg))):
        af = qf[i] if i < len(qf) else None
        ag = qg[i] if i < len(qg) else None
        if af != ag:
            raise RotationNumberMismatch(
                "rotation numbers differ at quotient %d: %s vs %s" % (i, af, ag),
                index=i)


def build_conjugacy(f, g, n):
    """Conjugacy table at level n: f's orbit of 0 matched to g's orbit of 0.

    Both maps must share the rotation-number quotients through depth n+1 and
    carry their marked critical point at 0; the knots are the q_n + q_{n+1}
    partition endpoints, strictly increasing on both circles.
    """
    n = int(n)
    _check_same_rotation(f, g, n + 1)
    with precision(max(f.precision_bits, g.precision_bits)):
        rt_f = closest_returns(f, 0, n + 1)
        rt_g = closest_returns(g, 0, n + 1)
        if rt_f.q[: n + 2] != rt_g.q[: n + 2]:
            raise RotationNumberMismatch(
                "return times diverge: %s vs %s" % (rt_f.q, rt_g.q))
        count = rt_f.q[n] + rt_f.q[n + 1]
        orb_f = f.orbit_of_zero(count)
        orb_g = g.orbit_of_zero(count)
        pos = sorted(range(count), key=lambda i: _proj(orb_f[i]))
        knots = tuple((_proj(orb_f[i]), _proj(orb_g[i])) for i in pos)
        ys = [y for _x, y in knots]
        if any(ys[i] >= ys[i + 1] for i in range(len(ys) - 1)):
            raise OutOfDomain("conjugacy knots not monotone; combinatorics differ")
        ratios = []
        for k in range(count):
            x0, y0 = knots[k]
            x1, y1 = knots[(k + 1) % count]
            dx = _proj(x1 - x0) if k + 1 < count else (1 + x1 - x0)
            dy = _proj(y1 - y0) if k + 1 < count else (1 + y1 - y0)
            ratios.append(dy / dx)
        residual = _second_point_residual(f, g, knots)
        return ConjugacyTable(n, knots, tuple(ratios), residual, f, g)


def _second_point_residual(f, g, knots):
    """|h(c_f) - c_g| with h evaluated by linear interpolation between knots.

    The orbit matching pins h(0) = 0 only; equality of signatures should send
    the second critical point to the second critical point, which this
    measures instead of assuming.
    """
    pf = [p for p in f.critical_points() if p != 0]
    pg = [p for p in g.critical_points() if p != 0]
    if not pf or not pg:
        return mpfr(0)
    c_f, c_g = pf[0], pg[0]
    xs = [x for x, _y in knots]
    lo = 0
    for i, x in enumerate(xs):
        if x <= c_f:
            lo = i
    x0, y0 = knots[lo]
    x1, y1 = knots[(lo + 1) % len(knots)]
    dx = x1 - x0 if lo + 1 < len(knots) else 1 + x1 - x0
    dy = y1 - y0 if lo + 1 < len(knots) else 1 + y1 - y0
    h_cf = y0 + (c_f - x0) / dx * dy
    return abs(h_cf - c_g)


@dataclass(frozen=True)
class SmoothnessReport:
    levels: tuple
    oscillations: tuple
    trend: object        # FitResult of osc(n) vs n, None when degenerate
    smooth: bool         # negative fitted slope of the oscillation


def derivative_diagnostics(tables):
    """Adjacent-pair oscillation of log |h(I)|/|I| per level and its trend.

    osc(n) is the largest jump of log(|h(I)|/|I|) between NEIGHBOURING
    intervals of P_n.  When the conjugacy has a Holder-continuous derivative
    both neighbouring ratios approach h' at a shared point, so osc(n) decays
    like a power of the interval scale; for a merely topological conjugacy it
    does not.  (The global max-min over the whole circle is useless here: it
    tends to the oscillation of log h' itself, a positive constant for every
    non-rotation conjugacy.)  The identity conjugacy gives exactly zero.
    """
    if len(tables) < 2:
        raise LevelMismatch("need at least two consecutive tables")
    for a, b in zip(tables, tables[1:]):
        if b.level != a.level + 1 or a.f_spec is not b.f_spec or a.g_spec is not b.g_spec:
            raise LevelMismatch("tables must be consecutive levels of one pair")
    levels, oscs = [], []
    for t in tables:
        logs = [gmpy2.log(r) for r in t.ratios]
        count = len(logs)
        osc = max(abs(logs[k] - logs[(k + 1) % count]) for k in range(count))
        oscs.append(osc)
        levels.append(t.level)
    if all(o == 0 for o in oscs):
        return SmoothnessReport(tuple(levels), tuple(oscs), None, True)
    trend = linear_fit(levels, oscs)
    return SmoothnessReport(tuple(levels), tuple(oscs), trend, trend.slope < 0)
