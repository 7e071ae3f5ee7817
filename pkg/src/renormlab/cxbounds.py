"""Poincare neighborhoods and the complex inverse-branch probe.

The probe pulls complex sample points back along the interval orbit
J_0 = f^{q_{n+1}}(I_n), J_{-1} = f^{q_{n+1}-1}(I_n), ..., J_{-(q_{n+1}-1)} = f(I_n)
by per-step Newton inversion of the lift, seeded from the real preimage and
confined to a guard disk around the target interval.  Everything is computed
in lift coordinates anchored at the marked point; winding integers keep the
J intervals exact images of one another under F.
"""
import random
from dataclasses import dataclass

import gmpy2
from gmpy2 import mpfr, mpc

from . import kernel
from .errors import (BranchLost, DegeneratePoint, NoConvergence,
                     NonCriticalPair, OutOfDomain, PrecisionExhausted,
                     TooFewValidSamples, TooManyBranchFailures)
from .numerics import mpf, precision, steepest_lower_support, upper_envelope_fit
from .partition import closest_returns, first_clean_level


@dataclass(frozen=True)
class PoincareDisk:
    """Two-cap neighborhood of a real interval J = (a, b) with external angle theta."""
    a: object
    b: object
    theta: object

    def __post_init__(self):
        a, b, theta = mpf(self.a), mpf(self.b), mpf(self.theta)
        if not a < b:
            raise OutOfDomain("need a < b")
        pi = gmpy2.const_pi()
        if not (0 < theta < pi):
            raise OutOfDomain("theta must lie in (0, pi)")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "theta", theta)

    @property
    def length(self):
        return self.b - self.a

    def cap_circles(self):
        """Centers (midpoint +- i*offset) and radius of the two boundary circles."""
        half = self.length / 2
        offset = half * gmpy2.cos(self.theta) / gmpy2.sin(self.theta)
        radius = half / gmpy2.sin(self.theta)
        mid = (self.a + self.b) / 2
        return mpc(mid, offset), mpc(mid, -offset), radius


def poincare_diameter(pd):
    """Euclidean diameter of the closed neighborhood.

    (1+cos theta)/sin theta * |J| = cot(theta/2) * |J| is the vertical extent
    of the two caps; past theta = pi/2 the caps are thinner than the chord and
    the chord length |J| is the diameter of the closed set.
    """
    with gmpy2.context(gmpy2.get_context()):
        caps = (1 + gmpy2.cos(pd.theta)) / gmpy2.sin(pd.theta) * pd.length
        return max(pd.length, caps)


def poincare_contains(pd, z):
    """Closed-region membership via the two cap circles.

    Below theta = pi/2 the region is the union of the two disks through a, b
    at external angle theta; above it is their lens-shaped intersection.
    """
    z = mpc(z)
    c1, c2, radius = pd.cap_circles()
    in1 = abs(z - c1) <= radius
    in2 = abs(z - c2) <= radius
    half_pi = gmpy2.const_pi() / 2
    if pd.theta <= half_pi:
        return in1 or in2
    return in1 and in2


def angle_to_interval(z, a, b):
    """Least angle between [a,z], [b,z] and the outward rays of J = [a,b].

    At a the ray points to -infinity, at b to +infinity; both angles are taken
    in [0, pi] and the smaller one is returned.
    """
    z = mpc(z)
    a, b = mpf(a), mpf(b)
    if z == mpc(a) or z == mpc(b):
        raise DegeneratePoint("angle undefined at an interval endpoint")
    pi = gmpy2.const_pi()
    ang_a = pi - abs(gmpy2.atan2(+z.imag, +z.real - a))
    ang_b = abs(gmpy2.atan2(+z.imag, +z.real - b))
    return min(ang_a, ang_b)


def _interval_dist(z, lo, hi):
    re, im = +z.real, +z.imag
    if lo <= re <= hi:
        return abs(im)
    return min(abs(z - lo), abs(z - hi))


@dataclass
class InverseOrbit:
    z_points: tuple      # z_0 .. z_{-(q_{n+1}-1)}
    j_intervals: tuple   # matching lift intervals (lo, hi)
    ratios: tuple        # dist(z_{-k}, J_{-k}) / |J_{-k}|
    angles: tuple
    status: str          # "ok" | "branch-lost" | "no-convergence" | "derivative"
    steps_done: int
    forward_error: object  # |F^(q_{n+1}-1)(z_final) - z_0| recomposition audit


def _j_hat(orbit, rt, n, k):
    """Lift interval of J_{-k} = f^{q_{n+1}-k}(I_n); F maps each onto the next."""
    j = rt.q[n + 1] - k
    u = orbit[j]
    v = orbit[j + rt.q[n]] - rt.p[n]
    return (u, v) if u <= v else (v, u)


def _real_preimage_seed(spec, lo, hi, target, bits=40):
    """Bisection seed: the point of [lo, hi] that F carries to target."""
    data = spec.lift_data
    a, b = lo, hi
    for _ in range(bits):
        midp = (a + b) / 2
        if kernel.eval_lift_real(data, midp) < target:
            a = midp
        else:
            b = midp
    return (a + b) / 2


def pull_back(spec, n, z, audit=True):
    """Inverse orbit of z along the level-n interval orbit.

    z is given in lift coordinates near the marked point (the natural
    representative of Omega_{n,M}); each step solves F(w) = z_{-k} by damped
    Newton from the real preimage seed, clamped 1% inside the target interval,
    and aborts with status "branch-lost" if the iterate leaves the guard disk
    around the target interval's midpoint.  The guard radius is 17 interval
    lengths: wide enough for legitimate orbits started anywhere in the anchor
    disk (whose size relative to the intervals is set by the real bounds),
    tight enough to catch Newton jumping onto another inverse-branch sheet.
    """
    if not spec.is_plain:
        raise OutOfDomain("the inverse-branch probe needs a plain composition map")
    with precision(spec.precision_bits):
        z = mpc(z)
        rt = closest_returns(spec, 0, n + 1)
        qn1 = rt.q[n + 1]
        orbit = spec.orbit_of_zero(rt.q[n] + qn1)
        tol = mpfr(2) ** (24 - spec.precision_bits)
        z0 = z + rt.p[n + 1]   # shift to the winding of J_0's lift interval
        pts = [z0]
        lo, hi = _j_hat(orbit, rt, n, 0)
        ivals = [(lo, hi)]
        ratios = [_interval_dist(z0, lo, hi) / (hi - lo)]
        angles = [angle_to_interval(z0, lo, hi) if +z0.imag != 0 else mpfr(0)]
        status = "ok"
        cur = z0
        for k in range(1, qn1):
            plo, phi = ivals[-1]
            lo, hi = _j_hat(orbit, rt, n, k)
            length = hi - lo
            margin = (phi - plo) / 100
            target_re = min(max(+cur.real, plo + margin), phi - margin)
            seed = _real_preimage_seed(spec, lo, hi, target_re)
            gc = (lo + hi) / 2
            wre, wim, st = kernel.pullback_newton(
                spec.lift_data, +cur.real, +cur.imag, seed, mpfr(0),
                tol, 80, gc, mpfr(0), mpfr(17) * length)
            if st == kernel.STATUS_GUARD_EXIT:
                status = "branch-lost"
                break
            if st == kernel.STATUS_NO_CONVERGENCE:
                status = "no-convergence"
                break
            if st == kernel.STATUS_DERIVATIVE_VANISHED:
                status = "derivative"
                break
            cur = mpc(wre, wim)
            pts.append(cur)
            ivals.append((lo, hi))
            ratios.append(_interval_dist(cur, lo, hi) / length)
            angles.append(angle_to_interval(cur, lo, hi) if wim != 0 else mpfr(0))
        fwd = None
        if status == "ok" and audit and qn1 > 1:
            fre, fim, _dr, _di, ok = kernel.iterate_cx(
                spec.lift_data, +cur.real, +cur.imag, qn1 - 1, mpfr(8))
            fwd = abs(mpc(fre, fim) - z0) if ok else mpfr("inf")
        return InverseOrbit(tuple(pts), tuple(ivals), tuple(ratios),
                            tuple(angles), status, len(pts) - 1, fwd)


@dataclass
class EnvelopeReport:
    B1: object
    B2: object
    per_sample: tuple    # (input ratio, output ratio) for completed samples
    violations: int
    n: int
    M: int
    n_samples: int
    failures: int
    rows: tuple          # per-sample CSV rows


def default_anchor_level(spec, plus=2):
    """M = first level with no second critical point in the fundamental pair, + 2."""
    return first_clean_level(spec) + plus


def probe_region(spec, n, M):
    """(entry interval J_0 near 0, disk interval H_{n-M}) in lift coordinates."""
    with precision(spec.precision_bits):
        m = n - M
        if m < 0:
            raise OutOfDomain("need n >= M")
        rt = closest_returns(spec, 0, max(m, n) + 1)
        orbit = spec.orbit_of_zero(rt.q[n] + rt.q[n + 1])
        j0 = _j_hat(orbit, rt, n, 0)
        j0 = (j0[0] - rt.p[n + 1], j0[1] - rt.p[n + 1])
        # H_m = [f^{q_{m+1}}(0), f^{q_m - q_{m+1}}(0)]: the right endpoint is
        # the image under f^{q_m} of the point y in I_m with f^{q_{m+1}}(y) = 0
        e_next = rt.offsets[m + 1]
        y = _solve_return_zero(spec, rt, m)
        other = kernel.iterate_real(spec.lift_data, y, rt.q[m]) - rt.p[m]
        lo, hi = (e_next, other) if e_next < other else (other, e_next)
        return j0, (lo, hi)


def _solve_return_zero(spec, rt, m):
    """y in I_m with F^{q_{m+1}}(y) = p_{m+1} (lift), by bisection."""
    with precision(spec.precision_bits):
        b = spec.precision_bits
        data = spec.lift_data
        q, p = rt.q[m + 1], rt.p[m + 1]
        e_m = rt.offsets[m]
        a, c = (mpfr(0), e_m) if e_m > 0 else (e_m, mpfr(0))
        for _ in range(b + 8):
            mid = (a + c) / 2
            if kernel.iterate_real(data, mid, q) - p < 0:
                a = mid
            else:
                c = mid
        return (a + c) / 2


def main_lemma_probe(spec, n, M, n_samples, seed=0, max_fail_frac=0.1):
    """Empirical envelope of the inverse-branch distortion over Omega_{n,M}.

    Samples are stratified over the upper half of the disk over H_{n-M}
    (8 angular x radial strata, conjugate symmetry makes the lower half
    redundant) plus real points inside the entry interval f^{q_{n+1}}(I_n).
    For each completed pullback the report pairs the entry ratio
    x = dist(z, J_0)/|J_0| with the exit ratio
    y = dist(z_{-(q_{n+1}-1)}, f(I_n))/|f(I_n)| and fits the minimal
    dominating line y <= B1*x + B2.  Both the entry-interval and the
    fundamental-interval input ratios are recorded per sample; the envelope
    uses the entry interval, which keeps translation maps exactly on y = x.
    """
    n_samples = int(n_samples)
    if n_samples < 8:
        raise ValueError("n_samples must be >= 8")
    with precision(spec.precision_bits):
        rng = random.Random(seed)
        j0, h = probe_region(spec, n, M)
        rt = closest_returns(spec, 0, n + 1)
        e_n = rt.offsets[n]
        in_lo, in_hi = (mpfr(0), e_n) if e_n > 0 else (e_n, mpfr(0))
        j0_len = j0[1] - j0[0]
        center = (h[0] + h[1]) / 2
        radius = (h[1] - h[0]) / 2
        pi = gmpy2.const_pi()

        samples = []
        n_real = max(2, n_samples // 8)
        for _ in range(n_real):
            t = mpfr(rng.uniform(0.05, 0.95))
            samples.append(mpc(j0[0] + t * j0_len, 0))
        k = 0
        while len(samples) < n_samples:
            ang_stratum = k % 8
            k += 1
            ang = pi * (ang_stratum + rng.random()) / 8
            rad = gmpy2.sqrt(mpfr(rng.random()))
            zz = mpc(center + radius * rad * gmpy2.cos(ang),
                     radius * rad * gmpy2.sin(ang))
            if +zz.imag > 0 or ang_stratum == 0:
                samples.append(zz)

        rows = []
        xs, ys = [], []
        failures = 0
        for idx, z in enumerate(samples):
            orbit = pull_back(spec, n, z)
            x_entry = orbit.ratios[0]
            x_fund = _interval_dist(z, in_lo, in_hi) / (in_hi - in_lo)
            if orbit.status != "ok":
                failures += 1
                rows.append((idx, z, x_entry, x_fund, None, None, None,
                             orbit.status))
                continue
            y = orbit.ratios[-1]
            min_angle = min(a for a in orbit.angles)
            rows.append((idx, z, x_entry, x_fund, y, min_angle,
                         orbit.forward_error, "ok"))
            xs.append(x_entry)
            ys.append(y)
        if failures > max_fail_frac * n_samples:
            raise TooManyBranchFailures(
                "%d of %d probe samples lost their branch" % (failures, n_samples))
        fit = upper_envelope_fit(xs, ys)
        violations = sum(1 for x, y in zip(xs, ys) if y > fit.slope * x + fit.intercept)
        return EnvelopeReport(fit.slope, fit.intercept,
                              tuple(zip(xs, ys)), violations,
                              n, M, n_samples, failures, tuple(rows))


def growth_check(pairs, radius, n_samples, seed=0):
    """Root-like growth of renormalized maps: largest (c, b) with
    |pair map(z)| >= c*|z|^d + b over guarded complex samples.

    Pools samples across the given normalized pairs (plus z = 0, which pins
    b <= 1 through |eta(0)| = 1) and fits the lower envelope against |z|^d.
    Pairs without a critical point at the marked point are rejected.
    """
    if not pairs:
        raise TooFewValidSamples("no pairs given")
    radius = mpf(radius)
    if radius < 1:
        raise ValueError("radius must be >= 1")
    rng = random.Random(seed)
    xs, ys = [], []
    d = None
    for pair in pairs:
        if pair.criticality is None:
            raise NonCriticalPair("growth check needs a critical marked point")
        d = pair.criticality
        with precision(pair.spec.precision_bits):
            pi = gmpy2.const_pi()
            xs.append(mpfr(0))
            ys.append(abs(pair.eta(mpfr(0))))  # |eta(0)| = 1
            got = 0
            attempts = 0
            while got < n_samples and attempts < 8 * n_samples:
                attempts += 1
                ang = pi * mpfr(rng.random())
                rad = radius * gmpy2.sqrt(mpfr(rng.random()))
                z = mpc(rad * gmpy2.cos(ang), rad * gmpy2.sin(ang))
                vals = []
                ve, _de = pair.eta_cx(z, guard_im=4 * radius)
                if ve is not None:
                    vals.append(ve)
                vx, _dx = pair.xi_cx(z, guard_im=4 * radius)
                if vx is not None:
                    vals.append(vx)
                if not vals:
                    continue
                got += 1
                for v in vals:
                    xs.append(abs(z) ** d)
                    ys.append(abs(v))
    if len(xs) < 8:
        raise TooFewValidSamples("only %d guarded evaluations survived" % len(xs))
    return lower_envelope_fit(xs, ys)
