"""Pure-python orbit kernels over gmpy2 scalars.

This module is the reference semantics for the compiled kernel in
_kernel.pyx: same formulas, same operation order, so both backends produce
bit-identical MPFR results.  Complex arithmetic is spelled out over real
pairs (never gmpy2.mpc) for exactly that reason.

Lift data layout, shared with the compiled kernel:

    data = (omega, ((beta, amps, cms, wms), ...))

where amps[m] = A_{m+1}, cms[m] = 2*pi*(m+1), wms[m] = w_{m+1} are the
factor's sine amplitudes, angular frequencies and derivative cosine weights,
all mpfr at the spec's precision.  A factor map is
h(x) = x + sum_m A_m sin(cm_m * (x - beta)), the full lift is
F = h_{N-1} o ... o h_1 o R_omega o h_0 (or plain R_omega with no factors).

All entry points run under a local gmpy2 context at the precision of the data
so results do not depend on the caller's ambient context.
"""
import gmpy2
from gmpy2 import mpfr

BACKEND = "python"

STATUS_OK = 0
STATUS_NO_CONVERGENCE = 1
STATUS_DERIVATIVE_VANISHED = 2
STATUS_GUARD_EXIT = 3


def data_precision(data):
    return data[0].precision


def _local_ctx(data):
    return gmpy2.context(gmpy2.get_context(), precision=data_precision(data))


def _lift_real(data, x):
    omega, factors = data
    if not factors:
        return x + omega
    t = x
    for i, (beta, amps, cms, _wms) in enumerate(factors):
        u = t - beta
        h = t
        for a, c in zip(amps, cms):
            h = h + a * gmpy2.sin(c * u)
        t = h
        if i == 0:
            t = t + omega
    return t


def _lift_dlift_real(data, x):
    omega, factors = data
    if not factors:
        return x + omega, mpfr(1)
    t = x
    d = mpfr(1)
    for i, (beta, amps, cms, wms) in enumerate(factors):
        u = t - beta
        h = t
        dh = mpfr(1)
        for a, c, w in zip(amps, cms, wms):
            s, cs = gmpy2.sin_cos(c * u)
            h = h + a * s
            dh = dh + w * cs
        t = h
        d = d * dh
        if i == 0:
            t = t + omega
    return t, d


def _lift_dlift_cx(data, zre, zim):
    omega, factors = data
    if not factors:
        return zre + omega, zim, mpfr(1), mpfr(0)
    tre, tim = zre, zim
    dre, dim = mpfr(1), mpfr(0)
    for i, (beta, amps, cms, wms) in enumerate(factors):
        ure = tre - beta
        uim = tim
        hre, him = tre, tim
        dhre, dhim = mpfr(1), mpfr(0)
        for a, c, w in zip(amps, cms, wms):
            ar = c * ure
            ai = c * uim
            sn, cs = gmpy2.sin_cos(ar)
            sh, ch = gmpy2.sinh_cosh(ai)
            # sin(ar + i ai), cos(ar + i ai)
            sinre = sn * ch
            sinim = cs * sh
            cosre = cs * ch
            cosim = -(sn * sh)
            hre = hre + a * sinre
            him = him + a * sinim
            dhre = dhre + w * cosre
            dhim = dhim + w * cosim
        # d *= dh
        dre, dim = dre * dhre - dim * dhim, dre * dhim + dim * dhre
        tre, tim = hre, him
        if i == 0:
            tre = tre + omega
    return tre, tim, dre, dim


def eval_lift_real(data, x):
    with _local_ctx(data):
        return _lift_real(data, x)


def eval_lift_dlift_real(data, x):
    with _local_ctx(data):
        return _lift_dlift_real(data, x)


def eval_lift_dlift_cx(data, zre, zim):
    with _local_ctx(data):
        return _lift_dlift_cx(data, zre, zim)


def orbit_real(data, x0, count):
    """[x0, F(x0), ..., F^count(x0)] on the lift."""
    with _local_ctx(data):
        out = [x0]
        t = x0
        for _ in range(count):
            t = _lift_real(data, t)
            out.append(t)
        return out


def orbit_final_real(data, x0, count):
    with _local_ctx(data):
        t = x0
        for _ in range(count):
            t = _lift_real(data, t)
        return t


def orbit_count_in(data, x0, count, lo, hi):
    """Number of k in [0, count) with frac(F^k(x0)) in [lo, hi)."""
    with _local_ctx(data):
        hits = 0
        t = x0
        for _ in range(count):
            pos = t - gmpy2.floor(t)
            if lo <= pos < hi:
                hits += 1
            t = _lift_real(data, t)
        return hits


def iterate_real(data, x, k):
    return orbit_final_real(data, x, k)


def iterate_dlift_real(data, x, k):
    """F^k(x) and (F^k)'(x) on the real line."""
    with _local_ctx(data):
        t = x
        d = mpfr(1)
        for _ in range(k):
            t, dt = _lift_dlift_real(data, t)
            d = d * dt
        return t, d


def iterate_cx(data, zre, zim, k, guard_im):
    """F^k(z) with the derivative product; aborts when |Im| exceeds guard_im.

    Returns (re, im, dre, dim, ok).
    """
    with _local_ctx(data):
        tre, tim = zre, zim
        dre, dim = mpfr(1), mpfr(0)
        for _ in range(k):
            tre, tim, sre, sim = _lift_dlift_cx(data, tre, tim)
            dre, dim = dre * sre - dim * sim, dre * sim + dim * sre
            if not (gmpy2.is_finite(tre) and gmpy2.is_finite(tim)) or abs(tim) > guard_im:
                return tre, tim, dre, dim, 0
        return tre, tim, dre, dim, 1


def pullback_newton(data, tre, tim, sre, sim, tol, max_iter, gcre, gcim, grad):
    """Damped Newton for F(w) = t from seed s, confined to a guard disk.

    The step is halved (up to 40 times) whenever |F(w) - t| fails to decrease.
    Returns (wre, wim, status).
    """
    with _local_ctx(data):
        dmin = mpfr(2) ** (8 - data_precision(data))
        wre, wim = sre, sim
        fre, fim, dre, dim = _lift_dlift_cx(data, wre, wim)
        res = gmpy2.hypot(fre - tre, fim - tim)
        for _ in range(max_iter):
            if res <= tol:
                return wre, wim, STATUS_OK
            if gmpy2.hypot(dre, dim) < dmin:
                return wre, wim, STATUS_DERIVATIVE_VANISHED
            rre = fre - tre
            rim = fim - tim
            # step = residual / derivative
            den = dre * dre + dim * dim
            stre = (rre * dre + rim * dim) / den
            stim = (rim * dre - rre * dim) / den
            scale = mpfr(1)
            accepted = False
            for _ in range(40):
                nre = wre - scale * stre
                nim = wim - scale * stim
                gre, gim, gdre, gdim = _lift_dlift_cx(data, nre, nim)
                nres = gmpy2.hypot(gre - tre, gim - tim)
                if nres < res:
                    accepted = True
                    break
                scale /= 2
            if not accepted:
                return wre, wim, STATUS_NO_CONVERGENCE
            wre, wim, res = nre, nim, nres
            fre, fim, dre, dim = gre, gim, gdre, gdim
            if gmpy2.hypot(wre - gcre, wim - gcim) > grad:
                return wre, wim, STATUS_GUARD_EXIT
        if res <= tol:
            return wre, wim, STATUS_OK
        return wre, wim, STATUS_NO_CONVERGENCE
