"""Precision context and shared numeric routines.

All real scalars in the library are gmpy2.mpfr values ("Real"), complex ones
gmpy2.mpc ("Cx").  MPFR arithmetic is correctly rounded at the context
precision, so identical inputs at identical precision give bit-identical
results everywhere downstream.
"""
from contextlib import contextmanager
from dataclasses import dataclass

import gmpy2
from gmpy2 import mpfr, mpc

from .errors import DegenerateInput, DerivativeVanished, NoConvergence

MIN_PRECISION = 53


def set_precision(bits):
    """Set the working mantissa width in bits (>= 53) for this thread."""
    bits = int(bits)
    if bits < MIN_PRECISION:
        raise ValueError("precision_bits must be >= %d, got %d" % (MIN_PRECISION, bits))
    gmpy2.get_context().precision = bits
    return bits


def get_precision():
    return gmpy2.get_context().precision


@contextmanager
def precision(bits):
    """Temporarily switch the working precision."""
    ctx = gmpy2.get_context()
    old = ctx.precision
    set_precision(bits)
    try:
        yield
    finally:
        ctx.precision = old


def mpf(x):
    """Coerce to mpfr at the current precision (strings parsed in full)."""
    return mpfr(x) if not isinstance(x, mpfr) else +x


def two_pi():
    return 2 * gmpy2.const_pi()


def eps():
    """One ulp at 1.0 for the current precision."""
    return mpfr(2) ** (1 - get_precision())


def default_tol():
    """Default tolerance 2^(16 - b): sixteen guard bits over the mantissa."""
    return mpfr(2) ** (16 - get_precision())


def newton_root(g, dg, seed, tol, max_iter=60):
    """Damped Newton iteration for g(w) = 0 from the given seed.

    Returns w with |g(w)| <= tol.  The step is halved (up to 40 times) whenever
    the residual fails to decrease; cubic critical points flatten basins and
    plain Newton rattles there.  Raises DerivativeVanished when |g'| drops
    below 2^(8 - b), NoConvergence when the iteration budget runs out.
    """
    tol = mpf(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    dmin = mpfr(2) ** (8 - get_precision())
    w = seed
    fw = g(w)
    for _ in range(max_iter):
        if abs(fw) <= tol:
            return w
        d = dg(w)
        if abs(d) < dmin:
            raise DerivativeVanished("|g'| = %s below %s at iterate" % (abs(d), dmin))
        step = fw / d
        scale = mpfr(1)
        for _ in range(40):
            wn = w - scale * step
            fn = g(wn)
            if abs(fn) < abs(fw):
                break
            scale /= 2
        else:
            raise NoConvergence("residual stopped decreasing under 40 halvings")
        w, fw = wn, fn
    if abs(fw) <= tol:
        return w
    raise NoConvergence("no root within %d iterations (residual %s)" % (max_iter, abs(fw)))


@dataclass(frozen=True)
class FitResult:
    slope: object
    intercept: object
    r_squared: object


def linear_fit(xs, ys):
    """Ordinary least squares line through (xs, ys)."""
    if len(xs) != len(ys) or len(xs) < 2:
        raise DegenerateInput("need two or more paired samples")
    xs = [mpf(x) for x in xs]
    ys = [mpf(y) for y in ys]
    n = len(xs)
    xbar = sum(xs) / n
    ybar = sum(ys) / n
    sxx = sum((x - xbar) ** 2 for x in xs)
    if sxx == 0:
        raise DegenerateInput("all abscissas equal")
    sxy = sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = ybar - slope * xbar
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    ss_tot = sum((y - ybar) ** 2 for y in ys)
    if ss_tot == 0:
        r2 = mpfr(1)
    else:
        r2 = 1 - ss_res / ss_tot
        r2 = min(max(r2, mpfr(0)), mpfr(1))
    return FitResult(slope, intercept, r2)


def _upper_hull(points):
    """Upper convex hull of (x, y) points sorted by x; left-to-right vertices."""
    hull = []
    for p in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # keep only right turns: middle point strictly above the chord
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def upper_envelope_fit(xs, ys):
    """Smallest dominating line y <= B1*x + B2 with B1 an upper-hull edge slope.

    Among the upper convex hull's edges, picks the slope whose minimal valid
    intercept (max of y - B1*x over all samples) is smallest; that is the exact
    minimal dominating line family for a uniform bound.  r_squared is unused
    and set to 1.
    """
    if len(xs) != len(ys) or len(xs) < 2:
        raise DegenerateInput("need two or more paired samples")
    pts = sorted(zip([mpf(x) for x in xs], [mpf(y) for y in ys]))
    if pts[0][0] == pts[-1][0]:
        raise DegenerateInput("all abscissas equal")
    # collapse duplicate x to the max y; lower duplicates never bind the hull
    dedup = []
    for x, y in pts:
        if dedup and dedup[-1][0] == x:
            if y > dedup[-1][1]:
                dedup[-1] = (x, y)
        else:
            dedup.append((x, y))
    hull = _upper_hull(dedup)
    best = None
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        b1 = (y2 - y1) / (x2 - x1)
        b2 = max(y - b1 * x for x, y in pts)
        if best is None or b2 < best[1]:
            best = (b1, b2)
    b1, b2 = best
    return FitResult(b1, b2, mpfr(1))


def lower_envelope_fit(xs, ys):
    """Largest line y >= c*x + b below all samples (mirror of the upper fit)."""
    fit = upper_envelope_fit(xs, [-mpf(y) for y in ys])
    return FitResult(-fit.slope, -fit.intercept, mpfr(1))


def steepest_lower_support(xs, ys):
    """Steepest two-point support line y >= c*x + b under the samples.

    c is the slope of the rightmost lower-convex-hull edge (the asymptotic
    growth rate of the data); b the largest intercept valid for that slope.
    Positive c certifies genuine growth, unlike the max-intercept edge, which
    a single dip in the data (a zero of the sampled map) drags negative.
    """
    if len(xs) != len(ys) or len(xs) < 2:
        raise DegenerateInput("need two or more paired samples")
    pts = sorted(zip([mpf(x) for x in xs], [-mpf(y) for y in ys]))
    if pts[0][0] == pts[-1][0]:
        raise DegenerateInput("all abscissas equal")
    dedup = []
    for x, y in pts:
        if dedup and dedup[-1][0] == x:
            if y > dedup[-1][1]:
                dedup[-1] = (x, y)
        else:
            dedup.append((x, y))
    hull = _upper_hull(dedup)  # upper hull of -y = lower hull of y
    (x1, y1), (x2, y2) = hull[-2], hull[-1]
    c = -(y2 - y1) / (x2 - x1)
    b = min(y - c * x for x, y in zip(xs, ys))
    return FitResult(c, b, mpfr(1))
