"""Commuting pairs and the renormalization operator.

Pair maps are iterate programs x -> s*(F^k(s*x) - p) over the source map's
lift: composition inside a pair is integer bookkeeping on (k, p) and the
shared orientation sign s, while evaluation (real or complex, with the
closed-form derivative) walks the base lift k times.  The orientation
involution x -> -x is applied jointly to both maps whenever a construction
step would leave eta(0) > 0, and its application count mod 2 is the pair's
parity.
"""
import math
from dataclasses import dataclass

import gmpy2
from gmpy2 import mpfr, mpc

from . import kernel
from .errors import (DegenerateInterval, HeightExceedsCap, IncompatiblePairs,
                     InfiniteHeight, NotIrrational, PreconditionFailed,
                     PrecisionExhausted)
from .numerics import FitResult, linear_fit, mpf, precision
from .partition import closest_returns


class IterateProgram:
    """x -> s*(F^k(s*x) - p) over a circle-map spec's lift."""

    __slots__ = ("spec", "k", "p", "s")

    def __init__(self, spec, k, p, s):
        self.spec = spec
        self.k = int(k)
        self.p = int(p)
        self.s = 1 if s >= 0 else -1

    def __repr__(self):
        return "IterateProgram(k=%d, p=%d, s=%+d)" % (self.k, self.p, self.s)

    def value(self, x):
        with precision(self.spec.precision_bits):
            x = mpf(x)
            val = self.spec.iterate_real(-x if self.s < 0 else x, self.k)
            return -(val - self.p) if self.s < 0 else val - self.p

    def value_dlift(self, x):
        """(value, derivative); the sign conjugation cancels in the derivative."""
        with precision(self.spec.precision_bits):
            x = mpf(x)
            val, der = self.spec.iterate_dlift_real(-x if self.s < 0 else x, self.k)
            return (-(val - self.p) if self.s < 0 else val - self.p), der

    def value_cx(self, z, guard_im=None):
        """Complex value and derivative; None when the guarded orbit escapes."""
        with precision(self.spec.precision_bits):
            guard = mpf(guard_im) if guard_im is not None else mpfr(4)
            zre, zim = +mpc(z).real, +mpc(z).imag
            if self.s < 0:
                zre, zim = -zre, -zim
            re, im, dre, dim, ok = self.spec.iterate_cx(zre, zim, self.k, guard)
            if not ok:
                return None, None
            if self.s < 0:
                val = mpc(-(re - self.p), -im)
            else:
                val = mpc(re - self.p, im)
            return val, mpc(dre, dim)

    def compose_power_with(self, a, other):
        """Program of self^a o other (shared sign)."""
        if other.s != self.s or other.spec is not self.spec:
            raise ValueError("programs must share the lift and orientation")
        return IterateProgram(self.spec, a * self.k + other.k,
                              a * self.p + other.p, self.s)

    def flipped(self):
        return IterateProgram(self.spec, self.k, self.p, -self.s)


@dataclass
class CommutingPair:
    """(eta, xi) around the marked point, eta(0) < 0 < xi(0)."""
    eta: IterateProgram
    xi: IterateProgram
    eta0: object
    xi0: object
    parity: int
    origin: dict
    criticality: object  # odd int at the marked point, None for rotation pairs

    @property
    def spec(self):
        return self.eta.spec

    def commutation_residual(self):
        with precision(self.spec.precision_bits):
            return abs(self.eta.value(self.xi0) - self.xi.value(self.eta0))

    def commutation_tol(self):
        b = self.spec.precision_bits
        return self.eta.k * mpfr(2) ** (20 - b)

    def validate(self):
        """Check the commuting-pair conditions; raises PreconditionFailed."""
        with precision(self.spec.precision_bits):
            if not (self.eta0 < 0 < self.xi0):
                raise PreconditionFailed(
                    "interval orientation broken: eta0=%s xi0=%s"
                    % (self.eta0, self.xi0))
            res = self.commutation_residual()
            if res > self.commutation_tol():
                raise PreconditionFailed(
                    "commutation residual %s above %s" % (res, self.commutation_tol()))
            common = self.eta.value(self.xi0)
            if abs(common) <= mpfr(2) ** (16 - self.spec.precision_bits):
                raise PreconditionFailed("(eta o xi)(0) vanishes")
            if self.criticality is not None:
                dtol = mpfr(2) ** (20 - self.spec.precision_bits)
                deta = self.eta.value_dlift(mpfr(0))[1]
                dxi = self.xi.value_dlift(mpfr(0))[1]
                if abs(deta) > dtol or abs(dxi) > dtol:
                    raise PreconditionFailed(
                        "marked point not critical: D eta(0)=%s D xi(0)=%s"
                        % (deta, dxi))
        return True


def pair_at_level(spec, n):
    """Commuting pair (F^{q_{n+1}} - p_{n+1}, F^{q_n} - p_n) at the marked point.

    The orientation flip is applied when the raw pair has eta(0) > 0 (odd
    levels); parity records it.
    """
    n = int(n)
    if n < 0:
        raise ValueError("level must be >= 0")
    with precision(spec.precision_bits):
        try:
            rt = closest_returns(spec, 0, n + 1)
        except PrecisionExhausted as exc:
            raise NotIrrational(
                "return structure ended before level %d (%s)" % (n + 1, exc)) from exc
        raw_eta0 = rt.offsets[n + 1]
        raw_xi0 = rt.offsets[n]
        s = 1 if raw_eta0 < 0 else -1
        eta = IterateProgram(spec, rt.q[n + 1], rt.p[n + 1], s)
        xi = IterateProgram(spec, rt.q[n], rt.p[n], s)
        crit = spec.factors[0].d if spec.factors else None
        return CommutingPair(
            eta=eta, xi=xi,
            eta0=s * raw_eta0, xi0=s * raw_xi0,
            parity=0 if s > 0 else 1,
            origin={"kind": "pair_at_level", "level": n, "spec": spec},
            criticality=crit,
        )


def height(pair, a_max=10**6):
    """Height chi(pair): iterates of eta move xi(0) across 0.

    Returns math.inf when eta stalls (fixed point within 2^(20-b): rational
    case); raises HeightExceedsCap past a_max.
    """
    with precision(pair.spec.precision_bits):
        stall = mpfr(2) ** (20 - pair.spec.precision_bits)
        y = pair.xi0
        a = 0
        while True:
            y_next = pair.eta.value(y)
            if y_next >= y - stall:
                return math.inf
            if y_next < 0:
                return a
            y = y_next
            a += 1
            if a > a_max:
                raise HeightExceedsCap("height exceeded cap %d" % a_max)


def prerenormalize(pair):
    """First-return pair (eta^a o xi, eta), orientation-canonicalized.

    Checks the hypothesis (xi o eta)(0) in I_eta = [0, xi(0)] instead of
    assuming it.
    """
    with precision(pair.spec.precision_bits):
        a = height(pair)
        if a is math.inf:
            raise InfiniteHeight("eta has a fixed point; pair not renormalizable")
        v = pair.xi.value(pair.eta0)
        if not (0 <= v <= pair.xi0):
            raise PreconditionFailed(
                "(xi o eta)(0) = %s outside [0, %s]" % (v, pair.xi0))
        # walk eta^a(xi0) again to carry the exact endpoint value
        y = pair.xi0
        for _ in range(a):
            y = pair.eta.value(y)
        new_eta = pair.eta.compose_power_with(a, pair.xi).flipped()
        new_xi = pair.eta.flipped()
        return CommutingPair(
            eta=new_eta, xi=new_xi,
            eta0=-y, xi0=-pair.eta0,
            parity=(pair.parity + 1) % 2,
            origin={"kind": "prerenormalize", "parent": pair.origin,
                    "height": a, "spec": pair.spec},
            criticality=pair.criticality,
        )


class NormalizedPair:
    """Commuting pair rescaled by 1/|I_xi| so eta(0) = -1 exactly."""

    def __init__(self, pair, scale_len=None):
        self.pair = pair
        self.scale_len = scale_len if scale_len is not None else abs(pair.eta0)
        if self.scale_len == 0:
            raise DegenerateInterval("|I_xi| = 0, cannot rescale")
        with precision(pair.spec.precision_bits):
            self.eta0 = pair.eta0 / self.scale_len       # -1 exactly
            self.xi0 = pair.xi0 / self.scale_len
        self.parity = pair.parity
        self.criticality = pair.criticality

    @property
    def spec(self):
        return self.pair.spec

    def eta(self, x):
        with precision(self.spec.precision_bits):
            return self.pair.eta.value(mpf(x) * self.scale_len) / self.scale_len

    def xi(self, x):
        with precision(self.spec.precision_bits):
            return self.pair.xi.value(mpf(x) * self.scale_len) / self.scale_len

    def eta_dlift(self, x):
        with precision(self.spec.precision_bits):
            v, d = self.pair.eta.value_dlift(mpf(x) * self.scale_len)
            return v / self.scale_len, d

    def xi_dlift(self, x):
        with precision(self.spec.precision_bits):
            v, d = self.pair.xi.value_dlift(mpf(x) * self.scale_len)
            return v / self.scale_len, d

    def eta_cx(self, z, guard_im=None):
        with precision(self.spec.precision_bits):
            g = mpf(guard_im) * self.scale_len if guard_im is not None else None
            v, d = self.pair.eta.value_cx(mpc(z) * self.scale_len, g)
            if v is None:
                return None, None
            return v / self.scale_len, d

    def xi_cx(self, z, guard_im=None):
        with precision(self.spec.precision_bits):
            g = mpf(guard_im) * self.scale_len if guard_im is not None else None
            v, d = self.pair.xi.value_cx(mpc(z) * self.scale_len, g)
            if v is None:
                return None, None
            return v / self.scale_len, d


def normalize(pair):
    """Linear rescale by 1/|I_xi|; idempotent bit-for-bit on normalized pairs."""
    if isinstance(pair, NormalizedPair):
        inner = pair.pair
        return NormalizedPair(inner, scale_len=pair.scale_len)
    return NormalizedPair(pair)


def renorm_orbit(spec, depth):
    """Normalized pairs at levels n = 1..depth (returns [] for depth 0).

    On PrecisionExhausted the exception carries the pairs built so far in
    ``partial``.
    """
    out = []
    for n in range(1, int(depth) + 1):
        try:
            out.append(normalize(pair_at_level(spec, n)))
        except (PrecisionExhausted, NotIrrational) as exc:
            raise PrecisionExhausted(
                "renormalization orbit ended at level %d: %s" % (n, exc),
                partial=out) from exc
    return out


def heights_along_orbit(pairs, a_max=10**6):
    return [height(p.pair if isinstance(p, NormalizedPair) else p, a_max)
            for p in pairs]


def _chebyshev_nodes(a, b, count):
    with precision(max(a.precision, 53)):
        nodes = []
        pi = gmpy2.const_pi()
        mid = (a + b) / 2
        half = (b - a) / 2
        for i in range(count):
            nodes.append(mid + half * gmpy2.cos(pi * (2 * i + 1) / (2 * count)))
        return nodes


def pair_distance(p1, p2, grid=48):
    """(C0, C1) distances between two normalized pairs on the common domain.

    Mesh points are Chebyshev nodes of [-1, min(xi0)]: negative nodes compare
    the xi maps, positive ones the eta maps; |xi1(0) - xi2(0)| is added to the
    C0 part.  Derivatives are closed-form, never finite differences.
    """
    if grid < 16:
        raise ValueError("grid must be >= 16")
    bits = max(p1.spec.precision_bits, p2.spec.precision_bits)
    with precision(bits):
        m = min(p1.xi0, p2.xi0)
        if not (m > 0):
            raise IncompatiblePairs("normalized domains do not overlap")
        c0 = abs(p1.xi0 - p2.xi0)
        c1 = mpfr(0)
        for t in _chebyshev_nodes(mpfr(-1), m, grid):
            if t < 0:
                v1, d1 = p1.xi_dlift(t)
                v2, d2 = p2.xi_dlift(t)
            else:
                v1, d1 = p1.eta_dlift(t)
                v2, d2 = p2.eta_dlift(t)
            c0 = max(c0, abs(v1 - v2))
            c1 = max(c1, abs(d1 - d2))
        return c0, c1


@dataclass
class ConvergenceReport:
    levels: tuple
    c0_dist: tuple
    c1_dist: tuple
    lambda_hat: object       # FitResult of log c0 vs level, None when degenerate
    success: bool
    exact_equal: bool
    fit_window: tuple


def convergence_experiment(f, g, depth, grid=48, fit_from=3):
    """Per-level distances between the renormalization orbits of f and g.

    Success means the fitted slope of log C0-distance over levels
    fit_from..depth is negative with r^2 >= 0.9.  Equal specs short-circuit
    with exact zeros and no fit.
    """
    depth = int(depth)
    if f == g:
        levels = tuple(range(1, depth + 1))
        zeros = tuple(mpfr(0) for _ in levels)
        return ConvergenceReport(levels, zeros, zeros, None, True, True,
                                 (fit_from, depth))
    partial_exc = None
    try:
        orbit_f = renorm_orbit(f, depth)
    except PrecisionExhausted as exc:
        orbit_f, partial_exc = exc.partial, exc
    try:
        orbit_g = renorm_orbit(g, depth)
    except PrecisionExhausted as exc:
        orbit_g, partial_exc = exc.partial, exc
    count = min(len(orbit_f), len(orbit_g))
    levels, c0s, c1s = [], [], []
    for i in range(count):
        c0, c1 = pair_distance(orbit_f[i], orbit_g[i], grid)
        levels.append(i + 1)
        c0s.append(c0)
        c1s.append(c1)
    window = [(lv, c0) for lv, c0 in zip(levels, c0s) if lv >= fit_from and c0 > 0]
    lambda_hat = None
    success = False
    if len(window) >= 2:
        lambda_hat = linear_fit([lv for lv, _ in window],
                                [gmpy2.log(c0) for _, c0 in window])
        success = lambda_hat.slope < 0 and lambda_hat.r_squared >= mpfr("0.9")
    report = ConvergenceReport(tuple(levels), tuple(c0s), tuple(c1s),
                               lambda_hat, success, False, (fit_from, depth))
    if partial_exc is not None and count < depth:
        partial_exc.partial = report
        raise partial_exc
    return report
