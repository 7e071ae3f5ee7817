"""Analytic multicritical circle maps built from canonical critical factors.

A factor with critical point beta and odd criticality d is the circle
homeomorphism with derivative

    h'(x) = c_d * (1 - cos 2*pi*(x - beta))^((d-1)/2),   integral over [0,1] = 1,

integrated termwise into the trig polynomial

    h(x) = x + sum_{j=1}^{m} (w_j / (2*pi*j)) * sin(2*pi*j*(x - beta)),

with m = (d-1)/2 and rational weights w_j = 2*(-1)^j*C(2m, m-j)/C(2m, m).
h fixes beta, has h' >= 0 vanishing only at beta, and h - h(beta) has a zero
of order exactly d there.  A map spec composes factors with one rotation:

    F = h_{N-1} o ... o h_1 o R_omega o h_0        (F = R_omega with no factors)

so the innermost factor's critical point (at its beta, normally 0) is a
critical point of the full map that does not move with omega.
"""
import json
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import gmpy2
from gmpy2 import mpfr, mpc

from . import kernel
from .cfrac import ContinuedFraction, convergents
from .errors import (DegenerateSpec, DerivativeVanished, NoConvergence,
                     OutOfDomain, PrecisionExhausted, RationalRotationNumber,
                     TargetUnattainable)
from .numerics import get_precision, mpf, newton_root, precision, two_pi

HEIGHT_CAP = 10**6


def factor_weights(d):
    """Exact rational sine-coefficients w_j of a degree-d critical factor."""
    if d < 3 or d % 2 == 0:
        raise ValueError("criticality must be an odd integer >= 3")
    m = (d - 1) // 2
    c0 = comb(2 * m, m)
    return [Fraction(2 * (-1) ** j * comb(2 * m, m - j), c0) for j in range(1, m + 1)]


@dataclass(frozen=True)
class CriticalFactor:
    beta: object
    d: int

    def __post_init__(self):
        if self.d < 3 or self.d % 2 == 0:
            raise ValueError("criticality must be an odd integer >= 3")
        b = mpf(self.beta)
        if not (0 <= b < 1):
            raise ValueError("beta must lie in [0,1)")
        object.__setattr__(self, "beta", b)

    def coefficients(self):
        """(amps, cms, wms): sine amplitudes, angular frequencies, cosine weights."""
        tp = two_pi()
        amps, cms, wms = [], [], []
        for j, w in enumerate(factor_weights(self.d), start=1):
            wq = mpfr(w.numerator) / w.denominator
            c = tp * j
            amps.append(wq / c)
            cms.append(c)
            wms.append(wq)
        return tuple(amps), tuple(cms), tuple(wms)


class CircleMapSpec:
    """Immutable analytic circle map F = factors o rotation (see module doc).

    An optional analytic change of coordinates psi_a(x) = x + a sin(2 pi x)/(2 pi)
    (a circle diffeomorphism fixing 0, |a| < 1) may conjugate the whole
    composition: the resulting map psi_a o F o psi_a^{-1} has exactly the same
    rotation number, criticalities and invariant-measure gaps as its base, with
    the marked critical point still at 0, but is a different analytic map.
    Pairs of specs sharing (omega, factors) and differing in the conjugacy
    amplitude realize exactly matched signatures.
    """

    def __init__(self, omega, factors=(), precision_bits=None,
                 check_degenerate=True, conjugacy_amp=None):
        self.precision_bits = int(precision_bits or get_precision())
        with precision(self.precision_bits):
            self.omega = mpf(omega)
            self.factors = tuple(
                f if isinstance(f, CriticalFactor) else CriticalFactor(*f)
                for f in factors
            )
            packed = []
            for f in self.factors:
                amps, cms, wms = f.coefficients()
                packed.append((f.beta, amps, cms, wms))
            self._data = (self.omega, tuple(packed))
            self.conjugacy_amp = None
            self._psi_data = None
            if conjugacy_amp is not None:
                amp = mpf(conjugacy_amp)
                if not abs(amp) < mpfr("0.95"):
                    raise ValueError("conjugacy amplitude must satisfy |a| < 0.95")
                if amp != 0:
                    self.conjugacy_amp = amp
                    tp = two_pi()
                    self._psi_data = (mpfr(0), ((mpfr(0), (amp / tp,), (tp,), (amp,)),))
            self._orbit0 = [mpfr(0)]
            self._returns = None
            self._crit = None
            if check_degenerate and len(self.factors) >= 2:
                self._reject_critical_collisions()

    @property
    def lift_data(self):
        return self._data

    @property
    def is_plain(self):
        return self.conjugacy_amp is None

    def __eq__(self, other):
        if not isinstance(other, CircleMapSpec):
            return NotImplemented
        return (
            self.precision_bits == other.precision_bits
            and self.omega == other.omega
            and self.conjugacy_amp == other.conjugacy_amp
            and tuple((f.beta, f.d) for f in self.factors)
            == tuple((g.beta, g.d) for g in other.factors)
        )

    def __hash__(self):
        return hash((str(self.omega), str(self.conjugacy_amp),
                     tuple((str(f.beta), f.d) for f in self.factors)))

    def __repr__(self):
        facs = ", ".join("(%s, d=%d)" % (f.beta, f.d) for f in self.factors)
        conj = "" if self.is_plain else ", conj=%s" % self.conjugacy_amp
        return "CircleMapSpec(omega=%s, factors=[%s], bits=%d%s)" % (
            self.omega, facs, self.precision_bits, conj)

    # -- coordinate change -------------------------------------------------

    def _psi(self, x):
        return kernel.eval_lift_real(self._psi_data, x)

    def _psi_dlift(self, x):
        return kernel.eval_lift_dlift_real(self._psi_data, x)

    def _psi_cx(self, zre, zim):
        return kernel.eval_lift_dlift_cx(self._psi_data, zre, zim)

    def _psi_inv(self, y):
        # seeded Newton on the monotone trig lift; psi' >= 1 - |a| > 0
        x = y - self.conjugacy_amp * gmpy2.sin(two_pi() * y) / two_pi()
        for _ in range(self.precision_bits):
            val, der = kernel.eval_lift_dlift_real(self._psi_data, x)
            step = (val - y) / der
            x = x - step
            if abs(step) <= mpfr(2) ** (8 - self.precision_bits) * max(1, abs(x)):
                return x
        raise NoConvergence("psi inverse did not settle")

    def _psi_inv_cx(self, z):
        def g(w):
            re, im, _dr, _di = self._psi_cx(+w.real, +w.imag)
            return mpc(re, im) - z

        def dg(w):
            _r, _i, dr, di = self._psi_cx(+w.real, +w.imag)
            return mpc(dr, di)

        return newton_root(g, dg, z, mpfr(2) ** (24 - self.precision_bits), 80)

    # -- evaluation --------------------------------------------------------

    def iterate_real(self, x, k):
        """F^k(x) on the lift (conjugated map when a conjugacy is set)."""
        with precision(self.precision_bits):
            x = mpf(x)
            if self.is_plain:
                return kernel.iterate_real(self._data, x, k)
            u = self._psi_inv(x)
            v = kernel.iterate_real(self._data, u, k)
            return self._psi(v)

    def iterate_dlift_real(self, x, k):
        """(F^k(x), (F^k)'(x)) on the lift."""
        with precision(self.precision_bits):
            x = mpf(x)
            if self.is_plain:
                return kernel.iterate_dlift_real(self._data, x, k)
            u = self._psi_inv(x)
            _u_val, du = self._psi_dlift(u)
            v, dv = kernel.iterate_dlift_real(self._data, u, k)
            w, dw = self._psi_dlift(v)
            return w, dw * dv / du

    def iterate_cx(self, zre, zim, k, guard_im):
        """(re, im, dre, dim, ok): guarded complex iterate with derivative."""
        with precision(self.precision_bits):
            if self.is_plain:
                return kernel.iterate_cx(self._data, zre, zim, k, guard_im)
            try:
                u = self._psi_inv_cx(mpc(zre, zim))
            except (NoConvergence, DerivativeVanished):
                return zre, zim, mpfr(1), mpfr(0), 0
            _r, _i, dur, dui = self._psi_cx(+u.real, +u.imag)
            du = mpc(dur, dui)
            re, im, dre, dim, ok = kernel.iterate_cx(
                self._data, +u.real, +u.imag, k, guard_im)
            if not ok:
                return re, im, dre, dim, 0
            wre, wim, dwr, dwi = self._psi_cx(re, im)
            d = mpc(dwr, dwi) * mpc(dre, dim) / du
            return wre, wim, +d.real, +d.imag, 1

    def lift(self, z):
        if isinstance(z, mpc):
            re, im, _dr, _di, ok = self.iterate_cx(+z.real, +z.imag, 1, mpfr("inf"))
            return mpc(re, im)
        return self.iterate_real(z, 1)

    def dlift(self, z):
        if isinstance(z, mpc):
            _r, _i, dr, di, ok = self.iterate_cx(+z.real, +z.imag, 1, mpfr("inf"))
            return mpc(dr, di)
        return self.iterate_dlift_real(z, 1)[1]

    def orbit_of_zero(self, count):
        """Lift orbit [0, F(0), ..., F^count(0)], cached across calls."""
        with precision(self.precision_bits):
            have = len(self._orbit0) - 1
            if count > have:
                if self.is_plain:
                    ext = kernel.orbit_real(self._data, self._orbit0[-1], count - have)
                    self._orbit0.extend(ext[1:])
                else:
                    # psi(0) = 0: the conjugated orbit is psi of the base orbit
                    base = kernel.orbit_real(
                        self._data, self._psi_inv(self._orbit0[-1]), count - have)
                    self._orbit0.extend(self._psi(x) for x in base[1:])
            return self._orbit0[: count + 1]

    def visit_fraction(self, lo, hi, count):
        """Fraction of the first ``count`` orbit points of 0 in the arc [lo, hi).

        For conjugated specs the arc is pulled back through psi (an exact
        pushforward: psi maps base orbit points to conjugated ones).
        """
        with precision(self.precision_bits):
            if self.is_plain:
                hits = kernel.orbit_count_in(self._data, mpfr(0), count, mpf(lo), mpf(hi))
            else:
                hits = kernel.orbit_count_in(self._data, mpfr(0), count,
                                             self._psi_inv(mpf(lo)),
                                             self._psi_inv(mpf(hi)))
            return mpfr(hits) / count

    # -- critical points ---------------------------------------------------

    def critical_points(self):
        """Circle positions of all critical points, sorted."""
        if self._crit is not None:
            return self._crit
        with precision(self.precision_bits):
            pts = []
            for j, f in enumerate(self.factors):
                if j == 0:
                    pts.append(+f.beta)
                    continue
                prefix = (self.omega, self._data[1][:j])
                pts.append(_invert_prefix(prefix, f.beta, self.precision_bits))
            if not self.is_plain:
                pts = [self._psi(p) if p != 0 else p for p in pts]
            self._crit = sorted(pts)
            return self._crit

    def _reject_critical_collisions(self):
        pts = self.critical_points()
        gap_tol = mpfr(2) ** (-(self.precision_bits // 4))
        for i in range(len(pts)):
            a, b = pts[i], pts[(i + 1) % len(pts)]
            gap = (b - a) % 1 if i + 1 < len(pts) else (pts[0] + 1 - pts[-1]) % 1
            if gap < gap_tol:
                raise DegenerateSpec(
                    "critical points %s and %s collide within 2^-%d"
                    % (a, b, self.precision_bits // 4))


def _invert_prefix(prefix_data, target, bits):
    """x in [0,1) with prefix(x) = target (mod 1); prefix is a monotone lift."""
    with precision(bits):
        target = mpf(target)
        p0 = kernel.eval_lift_real(prefix_data, mpfr(0))
        k = gmpy2.ceil(p0 - target)
        t = target + k
        if t < p0:  # t == p0 boundary handled by bisection anyway
            t += 1
        lo, hi = mpfr(0), mpfr(1)
        for _ in range(bits + 4):
            mid = (lo + hi) / 2
            if kernel.eval_lift_real(prefix_data, mid) < t:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2


def make_bicubic(omega, beta, precision_bits=None):
    """Bi-cubic map h_{beta,3} o R_omega o h_{0,3}: marked cubic point at 0,
    second cubic point at the preimage of beta under the inner rotation+factor."""
    return CircleMapSpec(
        mpf(omega),
        factors=(CriticalFactor(mpfr(0), 3), CriticalFactor(mpf(beta), 3)),
        precision_bits=precision_bits,
    )


def eval_lift(spec, z):
    return spec.lift(z)


def eval_dlift(spec, z):
    return spec.dlift(z)


# -- rotation number via the height recursion ------------------------------

class _SymbolicPair:
    """State of the renormalization height recursion for one lift.

    Both maps are iterate programs x -> s*(F^k(s*x) - p) sharing one sign s;
    composing maps inside a pair is then pure integer bookkeeping on (k, p).
    Rigid rotations collapse to translation algebra: heights come from a
    division instead of an orbit, so expansions of rotations stay cheap at
    any depth.
    """

    def __init__(self, spec):
        self.spec = spec
        self.translation = not spec.factors
        b = spec.precision_bits
        self.stall_tol = mpfr(2) ** (20 - b)
        self.near_guard = mpfr(2) ** (-(b // 2))
        self.underflow = mpfr(2) ** (16 - b) if self.translation else mpfr(2) ** (-(b // 2))
        # seed: eta = F - k0 with the winding k0 putting F(0) - k0 in [0,1),
        # xi = x + 1, jointly flipped so that eta(0) < 0 < xi(0)
        f0 = spec.iterate_real(mpfr(0), 1)
        k0 = int(gmpy2.floor(f0))
        self.s = -1
        self.k_eta, self.p_eta = 1, k0
        self.k_xi, self.p_xi = 0, 1
        self.eta0 = -(f0 - k0)
        self.xi0 = mpfr(1)

    def _apply_eta(self, y):
        # y -> s*(F^k(s*y) - p)
        if self.s < 0:
            val = self.spec.iterate_real(-y, self.k_eta)
            return -(val - self.p_eta)
        val = self.spec.iterate_real(+y, self.k_eta)
        return val - self.p_eta

    def height_and_advance(self):
        """Return (height, is_final) at this level, pre-renormalizing in place.

        (None, True) means eta acquired a fixed point within precision without
        one more resolvable quotient; (a, True) ends the expansion with a final
        quotient (the level where the ratio of scales is an integer within the
        guard, i.e. the underlying number is rational at working precision).
        Raises PrecisionExhausted when scales underflow.
        """
        if abs(self.xi0) < self.underflow:
            raise PrecisionExhausted("pair scale underflow at |xi0|=%s" % self.xi0)
        if self.translation:
            c = self.eta0  # translation shift equals eta(0)
            if -c <= self.stall_tol:
                return None, True
            ratio = self.xi0 / (-c)
            near = gmpy2.rint(ratio)
            if abs(ratio - near) <= self.near_guard:
                a = int(near)
                if a < 1:
                    raise PrecisionExhausted("terminal quotient below 1")
                return a, True
            a = int(gmpy2.floor(ratio))
            r = self.xi0 + a * c
            if r < 0:  # rounding pushed the floor one too far
                a -= 1
                r = self.xi0 + a * c
            elif r + c >= 0:  # or one too short
                a += 1
                r = self.xi0 + a * c
        else:
            if abs(self.eta0) < self.underflow:
                raise PrecisionExhausted(
                    "pair scale underflow at |eta0|=%s" % self.eta0)
            y = self.xi0
            a = 0
            r = None
            while True:
                y_next = self._apply_eta(y)
                if y_next >= y - self.stall_tol:
                    return None, True
                if y_next < 0:
                    r = y
                    break
                y = y_next
                a += 1
                if a > HEIGHT_CAP:
                    raise PrecisionExhausted("height exceeded %d" % HEIGHT_CAP)
        if a < 1:
            raise PrecisionExhausted("height 0: scales no longer ordered")
        # pR: new eta = eta^a o xi, new xi = old eta, then flip orientation
        new_k_eta = a * self.k_eta + self.k_xi
        new_p_eta = a * self.p_eta + self.p_xi
        self.k_xi, self.p_xi = self.k_eta, self.p_eta
        self.k_eta, self.p_eta = new_k_eta, new_p_eta
        self.eta0, self.xi0 = -r, -self.eta0
        self.s = -self.s
        return a, False


def _quotient_stream(spec):
    """Yield partial quotients of rho(spec); ends on rational termination."""
    state = _SymbolicPair(spec)
    while True:
        a, final = state.height_and_advance()
        if a is not None:
            yield a
        if final:
            return


def rotation_number(spec, depth):
    """First ``depth`` partial quotients of the rotation number.

    Quotients are the heights of successive pre-renormalizations of the
    commuting pair at the marked point; a detected fixed point of eta ends the
    expansion with terminated=True (rational rotation number).
    """
    depth = int(depth)
    if depth < 1:
        raise ValueError("depth must be >= 1")
    with precision(spec.precision_bits):
        quots = []
        stream = _quotient_stream(spec)
        try:
            for a in stream:
                quots.append(a)
                if len(quots) == depth:
                    return ContinuedFraction(tuple(quots), terminated=False)
        except PrecisionExhausted as exc:
            raise PrecisionExhausted(str(exc),
                                     partial=ContinuedFraction(tuple(quots), False)) from exc
        if not quots:
            raise RationalRotationNumber("rotation number is 0 or 1 within precision")
        return ContinuedFraction(tuple(quots), terminated=True)


def rho_value(spec, depth=24):
    """Rotation number as a Real, from the depth-limited convergent."""
    cf = rotation_number(spec, depth)
    conv = convergents(cf, len(cf.quotients))
    with precision(spec.precision_bits):
        return mpfr(conv.p[-1]) / conv.q[-1]


def compare_rotation_to_target(spec, target, depth):
    """Sign of rho(spec) - value(target), decided on at most ``depth`` quotients.

    Returns -1, +1, or 0 when the first ``depth`` quotients coincide (the two
    numbers share the depth-``depth`` cylinder).  Quotient parity decides the
    direction: at even index a larger quotient means a smaller number.
    """
    tq = target.quotients[:depth]
    with precision(spec.precision_bits):
        stream = _quotient_stream(spec)
        for i, t in enumerate(tq):
            try:
                a = next(stream)
            except StopIteration:
                # measured value is exactly rational [a_0 .. a_{i-1}]: its
                # missing quotient compares as infinity
                return -1 if i % 2 == 0 else +1
            if a != t:
                if a > t:
                    return -1 if i % 2 == 0 else +1
                return +1 if i % 2 == 0 else -1
        return 0


def cylinder_width(target, depth):
    """Upper bound |x - y| for x, y sharing the first ``depth`` quotients."""
    conv = convergents(ContinuedFraction(target.quotients[:depth]), depth)
    return mpfr(1) / (conv.q[-1] * (conv.q[-1] + conv.q[-2] if depth >= 2 else conv.q[-1]))


def tune(family, target, depth, tol):
    """Bisect omega in [0,1) until rho(family(omega)) matches the target prefix.

    ``family`` maps omega to a CircleMapSpec; dF/domega = 1 pointwise for all
    specs here, so rho is non-decreasing in omega and bisection is justified.
    Returns the first spec whose quotients match ``target`` through ``depth``;
    the certified distance |rho - value(target)| <= cylinder_width(target,
    depth) is recorded on the returned spec as ``spec.tune_certificate``.
    Deeper targets tighten the certificate; ``tol`` is the accuracy goal the
    caller is after and is met whenever the certificate reaches it (always the
    case for rigid rotations, where the expansion is cheap at any depth).
    Raises TargetUnattainable when the bracket collapses below 2^(16-b)
    without a prefix match.
    """
    depth = int(depth)
    if len(target.quotients) < depth:
        raise ValueError("target provides %d quotients, need %d"
                         % (len(target.quotients), depth))
    if target.terminated:
        raise ValueError("tune targets must be irrational prefixes")
    tol = mpf(tol)
    lo = mpfr(0)          # rho = 0 below any target in (0,1)
    hi = 1 - mpfr(2) ** (8 - get_precision())
    floor_width = mpfr(2) ** (16 - get_precision())
    while True:
        mid = (lo + hi) / 2
        spec = None
        for nudge in range(8):
            try:
                spec = family(mid)
                break
            except DegenerateSpec:
                # family hit a critical-point collision at this parameter;
                # probe a nearby point without losing the bracket
                mid = mid + (hi - lo) / 64
        if spec is None:
            raise TargetUnattainable("family degenerate across the bracket midsection")
        side = compare_rotation_to_target(spec, target, depth)
        if side == 0:
            spec.tune_certificate = cylinder_width(target, depth)
            spec.tune_depth = depth
            return spec
        if side < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < floor_width:
            raise TargetUnattainable(
                "bracket width %s below %s without matching the target prefix"
                % (hi - lo, floor_width))


@dataclass
class Signature:
    rho: object
    N: int
    criticalities: tuple
    deltas: tuple
    delta_error: object
    rho_quotients: tuple


def signature(spec, orbit_len=10**4, depth=12):
    """Measured signature (rho; N; criticalities; invariant-measure gaps).

    delta_i is the Birkhoff frequency of visits of the orbit of 0 to
    [c_i, c_{i+1}); the reported error estimate 3*log(orbit_len)/orbit_len is
    a bounded-type discrepancy heuristic, not a certificate.
    """
    orbit_len = int(orbit_len)
    if orbit_len < 10**3:
        raise ValueError("orbit_len must be at least 1000")
    with precision(spec.precision_bits):
        cf = rotation_number(spec, depth)
        if cf.terminated:
            raise RationalRotationNumber("signature needs an irrational rotation number")
        conv = convergents(cf, len(cf.quotients))
        rho = mpfr(conv.p[-1]) / conv.q[-1]
        pts = spec.critical_points()
        if not pts:
            return Signature(rho, 0, (), (), mpfr(0), cf.quotients)
        if pts[0] != 0:
            raise OutOfDomain("marked critical point must sit at 0")
        crit = tuple(f.d for f in spec.factors)
        bounds = list(pts) + [mpfr(1)]
        deltas = tuple(spec.visit_fraction(lo, hi, orbit_len)
                       for lo, hi in zip(bounds, bounds[1:]))
        err = 3 * gmpy2.log(mpfr(orbit_len)) / orbit_len
        return Signature(rho, len(pts), crit, deltas, err, cf.quotients)


def match_signature(f_builder, g_builder, target_rho, target_delta0, tol,
                    depth=16, final_depth=None, beta_brackets=None):
    """Tune two bi-cubic builders to one signature (rho prefix, delta_0).

    Nested bisection: the outer loop moves beta to match delta_0, the inner
    tune pins omega to the rho target.  The delta_0 estimator is the Birkhoff
    frequency of [0, c_1) with the orbit length chosen so the discrepancy
    heuristic 3 log L / L stays under tol/2.  Builders take (omega, beta) and
    return a bi-cubic spec with the marked point at 0; beta_brackets may give
    each builder its own starting bracket (the "seed").
    """
    tol = mpf(tol)
    target_delta0 = mpf(target_delta0)
    final_depth = final_depth or depth
    if beta_brackets is None:
        beta_brackets = ((0.05, 0.95), (0.05, 0.95))

    L = 4096
    while 3 * gmpy2.log(mpfr(L)) / L > tol / 2 and L < 2**26:
        L *= 2

    def solve(builder, bracket):
        def delta0(beta):
            for nudge in range(8):
                try:
                    spec = tune(lambda w: builder(w, beta), target_rho, depth, tol)
                    break
                except DegenerateSpec:
                    beta = beta + mpfr(2) ** -12
            c1 = spec.critical_points()[1]
            return spec.visit_fraction(mpfr(0), c1, L), beta

        lo, hi = mpf(bracket[0]), mpf(bracket[1])
        d_lo, lo = delta0(lo)
        d_hi, hi = delta0(hi)
        if not (min(d_lo, d_hi) <= target_delta0 <= max(d_lo, d_hi)):
            raise TargetUnattainable(
                "delta0 target %s outside attainable range [%s, %s]"
                % (target_delta0, min(d_lo, d_hi), max(d_lo, d_hi)))
        increasing = d_hi >= d_lo
        while True:
            mid = (lo + hi) / 2
            d_mid, mid = delta0(mid)
            if abs(d_mid - target_delta0) <= tol / 2:
                return tune(lambda w: builder(w, mid), target_rho, final_depth, tol)
            if (d_mid < target_delta0) == increasing:
                lo = mid
            else:
                hi = mid
            if hi - lo < mpfr(2) ** (16 - get_precision()):
                raise TargetUnattainable("beta bracket collapsed before meeting tol")

    return solve(f_builder, beta_brackets[0]), solve(g_builder, beta_brackets[1])


# -- map-spec files ---------------------------------------------------------

def spec_to_dict(spec):
    doc = {
        "family": "composition",
        "omega": str(spec.omega),
        "factors": [{"beta": str(f.beta), "d": f.d} for f in spec.factors],
        "precision_bits": spec.precision_bits,
    }
    if not spec.is_plain:
        doc["conjugacy"] = {"amp": str(spec.conjugacy_amp)}
    return doc


def spec_from_dict(doc, precision_bits=None):
    if doc.get("family") != "composition":
        raise OutOfDomain("unknown map family %r" % doc.get("family"))
    bits = int(precision_bits or doc.get("precision_bits") or get_precision())
    with precision(bits):
        conj = doc.get("conjugacy")
        return CircleMapSpec(
            mpfr(doc["omega"]),
            factors=tuple((mpfr(f["beta"]), int(f["d"])) for f in doc["factors"]),
            precision_bits=bits,
            conjugacy_amp=mpfr(conj["amp"]) if conj else None,
        )


def save_mapspec(spec, path):
    with open(path, "w") as fh:
        json.dump(spec_to_dict(spec), fh, indent=2)
        fh.write("\n")


def load_mapspec(path, precision_bits=None):
    """Read a map-spec file; decimal strings are parsed at full precision."""
    with open(path) as fh:
        doc = json.load(fh)
    return spec_from_dict(doc, precision_bits=precision_bits)
