# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled orbit kernels over raw MPFR.

Mirror of _kernel_py.py: identical formulas in identical operation order with
round-to-nearest at every step, so results are bit-identical to the pure
backend.  The speedup comes from dropping per-operation Python dispatch and
temporary-object churn inside orbit loops, not from different arithmetic.
"""
from gmpy2 cimport (import_gmpy2, mpfr, MPFR, MPFR_Check, GMPy_MPFR_New,
                    mpfr_t, mpfr_ptr, mpfr_srcptr, mpfr_prec_t, mpfr_rnd_t,
                    MPFR_RNDN, mpfr_get_prec, mpfr_set)

cdef extern from "mpfr.h":
    void mpfr_init2(mpfr_t, mpfr_prec_t)
    void mpfr_clear(mpfr_t)
    int mpfr_set_si(mpfr_t, long, mpfr_rnd_t)
    int mpfr_set_si_2exp(mpfr_t, long, long, mpfr_rnd_t)
    int mpfr_add(mpfr_t, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t)
    int mpfr_sub(mpfr_t, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t)
    int mpfr_mul(mpfr_t, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t)
    int mpfr_div(mpfr_t, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t)
    int mpfr_div_ui(mpfr_t, mpfr_srcptr, unsigned long, mpfr_rnd_t)
    int mpfr_neg(mpfr_t, mpfr_srcptr, mpfr_rnd_t)
    int mpfr_abs(mpfr_t, mpfr_srcptr, mpfr_rnd_t)
    int mpfr_floor(mpfr_t, mpfr_srcptr)
    int mpfr_sin(mpfr_t, mpfr_srcptr, mpfr_rnd_t)
    int mpfr_sin_cos(mpfr_t, mpfr_t, mpfr_srcptr, mpfr_rnd_t)
    int mpfr_sinh_cosh(mpfr_t, mpfr_t, mpfr_srcptr, mpfr_rnd_t)
    int mpfr_hypot(mpfr_t, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t)
    int mpfr_cmp(mpfr_srcptr, mpfr_srcptr)
    int mpfr_cmpabs(mpfr_srcptr, mpfr_srcptr)
    int mpfr_number_p(mpfr_srcptr)
    int mpfr_less_p(mpfr_srcptr, mpfr_srcptr)
    int mpfr_lessequal_p(mpfr_srcptr, mpfr_srcptr)

import_gmpy2()

BACKEND = "c"

STATUS_OK = 0
STATUS_NO_CONVERGENCE = 1
STATUS_DERIVATIVE_VANISHED = 2
STATUS_GUARD_EXIT = 3

DEF MAX_FACTORS = 16
DEF MAX_TERMS = 16


cdef struct FactorView:
    mpfr_srcptr beta
    mpfr_srcptr amps[MAX_TERMS]
    mpfr_srcptr cms[MAX_TERMS]
    mpfr_srcptr wms[MAX_TERMS]
    int nterms


cdef struct LiftView:
    mpfr_srcptr omega
    FactorView factors[MAX_FACTORS]
    int nfactors
    mpfr_prec_t prec


cdef int _load_view(object data, LiftView *lv) except -1:
    cdef object omega = data[0]
    cdef object factors = data[1]
    cdef object fac, amps, cms, wms
    cdef int i, m
    if not MPFR_Check(omega):
        raise TypeError("omega must be mpfr")
    lv.omega = <mpfr_srcptr>MPFR(<mpfr>omega)
    lv.prec = mpfr_get_prec(<mpfr_srcptr>MPFR(<mpfr>omega))
    lv.nfactors = len(factors)
    if lv.nfactors > MAX_FACTORS:
        raise ValueError("too many factors for the compiled kernel")
    for i in range(lv.nfactors):
        fac = factors[i]
        lv.factors[i].beta = <mpfr_srcptr>MPFR(<mpfr>(fac[0]))
        amps = fac[1]; cms = fac[2]; wms = fac[3]
        lv.factors[i].nterms = len(amps)
        if lv.factors[i].nterms > MAX_TERMS:
            raise ValueError("too many trig terms for the compiled kernel")
        for m in range(lv.factors[i].nterms):
            lv.factors[i].amps[m] = <mpfr_srcptr>MPFR(<mpfr>(amps[m]))
            lv.factors[i].cms[m] = <mpfr_srcptr>MPFR(<mpfr>(cms[m]))
            lv.factors[i].wms[m] = <mpfr_srcptr>MPFR(<mpfr>(wms[m]))
    return 0


cdef struct Work:
    # shared scratch registers; u/arg/trig for factor evaluation,
    # t/h/d/... for composition state
    mpfr_t u_re, u_im, arg_re, arg_im
    mpfr_t sn, cs, sh, ch
    mpfr_t t1, t2, t3, t4
    mpfr_t h_re, h_im, dh_re, dh_im
    mpfr_t t_re, t_im, d_re, d_im


cdef void _work_init(Work *w, mpfr_prec_t prec):
    mpfr_init2(w.u_re, prec); mpfr_init2(w.u_im, prec)
    mpfr_init2(w.arg_re, prec); mpfr_init2(w.arg_im, prec)
    mpfr_init2(w.sn, prec); mpfr_init2(w.cs, prec)
    mpfr_init2(w.sh, prec); mpfr_init2(w.ch, prec)
    mpfr_init2(w.t1, prec); mpfr_init2(w.t2, prec)
    mpfr_init2(w.t3, prec); mpfr_init2(w.t4, prec)
    mpfr_init2(w.h_re, prec); mpfr_init2(w.h_im, prec)
    mpfr_init2(w.dh_re, prec); mpfr_init2(w.dh_im, prec)
    mpfr_init2(w.t_re, prec); mpfr_init2(w.t_im, prec)
    mpfr_init2(w.d_re, prec); mpfr_init2(w.d_im, prec)


cdef void _work_clear(Work *w):
    mpfr_clear(w.u_re); mpfr_clear(w.u_im)
    mpfr_clear(w.arg_re); mpfr_clear(w.arg_im)
    mpfr_clear(w.sn); mpfr_clear(w.cs)
    mpfr_clear(w.sh); mpfr_clear(w.ch)
    mpfr_clear(w.t1); mpfr_clear(w.t2)
    mpfr_clear(w.t3); mpfr_clear(w.t4)
    mpfr_clear(w.h_re); mpfr_clear(w.h_im)
    mpfr_clear(w.dh_re); mpfr_clear(w.dh_im)
    mpfr_clear(w.t_re); mpfr_clear(w.t_im)
    mpfr_clear(w.d_re); mpfr_clear(w.d_im)


cdef void _lift_real_c(LiftView *lv, Work *w, mpfr_ptr x_inout):
    # x_inout <- F(x_inout); matches _kernel_py._lift_real op for op
    cdef int i, m
    cdef FactorView *f
    if lv.nfactors == 0:
        mpfr_add(x_inout, x_inout, lv.omega, MPFR_RNDN)
        return
    for i in range(lv.nfactors):
        f = &lv.factors[i]
        mpfr_sub(w.u_re, x_inout, f.beta, MPFR_RNDN)
        for m in range(f.nterms):
            mpfr_mul(w.arg_re, f.cms[m], w.u_re, MPFR_RNDN)
            mpfr_sin(w.sn, w.arg_re, MPFR_RNDN)
            mpfr_mul(w.t1, f.amps[m], w.sn, MPFR_RNDN)
            mpfr_add(x_inout, x_inout, w.t1, MPFR_RNDN)
        if i == 0:
            mpfr_add(x_inout, x_inout, lv.omega, MPFR_RNDN)


cdef void _lift_dlift_real_c(LiftView *lv, Work *w, mpfr_ptr x_inout, mpfr_ptr d_out):
    # x_inout <- F(x), d_out <- F'(x); matches _lift_dlift_real
    cdef int i, m
    cdef FactorView *f
    mpfr_set_si(d_out, 1, MPFR_RNDN)
    if lv.nfactors == 0:
        mpfr_add(x_inout, x_inout, lv.omega, MPFR_RNDN)
        return
    for i in range(lv.nfactors):
        f = &lv.factors[i]
        mpfr_sub(w.u_re, x_inout, f.beta, MPFR_RNDN)
        mpfr_set_si(w.dh_re, 1, MPFR_RNDN)
        for m in range(f.nterms):
            mpfr_mul(w.arg_re, f.cms[m], w.u_re, MPFR_RNDN)
            mpfr_sin_cos(w.sn, w.cs, w.arg_re, MPFR_RNDN)
            mpfr_mul(w.t1, f.amps[m], w.sn, MPFR_RNDN)
            mpfr_add(x_inout, x_inout, w.t1, MPFR_RNDN)
            mpfr_mul(w.t1, f.wms[m], w.cs, MPFR_RNDN)
            mpfr_add(w.dh_re, w.dh_re, w.t1, MPFR_RNDN)
        mpfr_mul(d_out, d_out, w.dh_re, MPFR_RNDN)
        if i == 0:
            mpfr_add(x_inout, x_inout, lv.omega, MPFR_RNDN)


cdef void _lift_dlift_cx_c(LiftView *lv, Work *w):
    # (w.t_re, w.t_im) <- F(t), (w.h_re->d accumulation): on entry the point is
    # in (t_re, t_im); on exit value in (t_re, t_im), derivative of this single
    # application in (dh_re, dh_im) is folded by callers into their product.
    # To mirror _lift_dlift_cx exactly the one-step derivative is returned in
    # (w.d_re, w.d_im) by the caller-facing wrapper below.
    cdef int i, m
    cdef FactorView *f
    mpfr_set_si(w.d_re, 1, MPFR_RNDN)
    mpfr_set_si(w.d_im, 0, MPFR_RNDN)
    if lv.nfactors == 0:
        mpfr_add(w.t_re, w.t_re, lv.omega, MPFR_RNDN)
        return
    for i in range(lv.nfactors):
        f = &lv.factors[i]
        mpfr_sub(w.u_re, w.t_re, f.beta, MPFR_RNDN)
        mpfr_set(w.u_im, w.t_im, MPFR_RNDN)
        mpfr_set(w.h_re, w.t_re, MPFR_RNDN)
        mpfr_set(w.h_im, w.t_im, MPFR_RNDN)
        mpfr_set_si(w.dh_re, 1, MPFR_RNDN)
        mpfr_set_si(w.dh_im, 0, MPFR_RNDN)
        for m in range(f.nterms):
            mpfr_mul(w.arg_re, f.cms[m], w.u_re, MPFR_RNDN)
            mpfr_mul(w.arg_im, f.cms[m], w.u_im, MPFR_RNDN)
            mpfr_sin_cos(w.sn, w.cs, w.arg_re, MPFR_RNDN)
            mpfr_sinh_cosh(w.sh, w.ch, w.arg_im, MPFR_RNDN)
            # sinre = sn*ch ; sinim = cs*sh ; cosre = cs*ch ; cosim = -(sn*sh)
            mpfr_mul(w.t1, w.sn, w.ch, MPFR_RNDN)
            mpfr_mul(w.t2, w.cs, w.sh, MPFR_RNDN)
            mpfr_mul(w.t3, w.cs, w.ch, MPFR_RNDN)
            mpfr_mul(w.t4, w.sn, w.sh, MPFR_RNDN)
            mpfr_neg(w.t4, w.t4, MPFR_RNDN)
            # h += A * sin(...)
            mpfr_mul(w.t1, f.amps[m], w.t1, MPFR_RNDN)
            mpfr_add(w.h_re, w.h_re, w.t1, MPFR_RNDN)
            mpfr_mul(w.t2, f.amps[m], w.t2, MPFR_RNDN)
            mpfr_add(w.h_im, w.h_im, w.t2, MPFR_RNDN)
            # dh += w * cos(...)
            mpfr_mul(w.t3, f.wms[m], w.t3, MPFR_RNDN)
            mpfr_add(w.dh_re, w.dh_re, w.t3, MPFR_RNDN)
            mpfr_mul(w.t4, f.wms[m], w.t4, MPFR_RNDN)
            mpfr_add(w.dh_im, w.dh_im, w.t4, MPFR_RNDN)
        # d *= dh  (complex product, rounded term by term like the reference)
        mpfr_mul(w.t1, w.d_re, w.dh_re, MPFR_RNDN)
        mpfr_mul(w.t2, w.d_im, w.dh_im, MPFR_RNDN)
        mpfr_mul(w.t3, w.d_re, w.dh_im, MPFR_RNDN)
        mpfr_mul(w.t4, w.d_im, w.dh_re, MPFR_RNDN)
        mpfr_sub(w.d_re, w.t1, w.t2, MPFR_RNDN)
        mpfr_add(w.d_im, w.t3, w.t4, MPFR_RNDN)
        mpfr_set(w.t_re, w.h_re, MPFR_RNDN)
        mpfr_set(w.t_im, w.h_im, MPFR_RNDN)
        if i == 0:
            mpfr_add(w.t_re, w.t_re, lv.omega, MPFR_RNDN)


cdef mpfr _export(mpfr_srcptr x, mpfr_prec_t prec):
    cdef mpfr res = GMPy_MPFR_New(prec, NULL)
    mpfr_set(MPFR(res), x, MPFR_RNDN)
    return res


def data_precision(data):
    return int((<mpfr?>data[0]).f[0]._mpfr_prec)


def eval_lift_real(data, x):
    cdef LiftView lv
    _load_view(data, &lv)
    cdef Work w
    _work_init(&w, lv.prec)
    cdef mpfr_t acc
    mpfr_init2(acc, lv.prec)
    mpfr_set(acc, <mpfr_srcptr>MPFR(<mpfr?>x), MPFR_RNDN)
    _lift_real_c(&lv, &w, acc)
    out = _export(acc, lv.prec)
    mpfr_clear(acc)
    _work_clear(&w)
    return out


def eval_lift_dlift_real(data, x):
    cdef LiftView lv
    _load_view(data, &lv)
    cdef Work w
    _work_init(&w, lv.prec)
    cdef mpfr_t acc, der
    mpfr_init2(acc, lv.prec); mpfr_init2(der, lv.prec)
    mpfr_set(acc, <mpfr_srcptr>MPFR(<mpfr?>x), MPFR_RNDN)
    _lift_dlift_real_c(&lv, &w, acc, der)
    out = (_export(acc, lv.prec), _export(der, lv.prec))
    mpfr_clear(acc); mpfr_clear(der)
    _work_clear(&w)
    return out


def eval_lift_dlift_cx(data, zre, zim):
    cdef LiftView lv
    _load_view(data, &lv)
    cdef Work w
    _work_init(&w, lv.prec)
    mpfr_set(w.t_re, <mpfr_srcptr>MPFR(<mpfr?>zre), MPFR_RNDN)
    mpfr_set(w.t_im, <mpfr_srcptr>MPFR(<mpfr?>zim), MPFR_RNDN)
    _lift_dlift_cx_c(&lv, &w)
    out = (_export(w.t_re, lv.prec), _export(w.t_im, lv.prec),
           _export(w.d_re, lv.prec), _export(w.d_im, lv.prec))
    _work_clear(&w)
    return out


def orbit_real(data, x0, count):
    cdef LiftView lv
    _load_view(data, &lv)
    cdef Work w
    _work_init(&w, lv.prec)
    cdef long n = count, k
    cdef mpfr_t acc
    mpfr_init2(acc, lv.prec)
    mpfr_set(acc, <mpfr_srcptr>MPFR(<mpfr?>x0), MPFR_RNDN)
    out = [x0]
    for k in range(n):
        _lift_real_c(&lv, &w, acc)
        out.append(_export(acc, lv.prec))
    mpfr_clear(acc)
    _work_clear(&w)
    return out


def orbit_final_real(data, x0, count):
    cdef LiftView lv
    _load_view(data, &lv)
    cdef Work w
    _work_init(&w, lv.prec)
    cdef long n = count, k
    cdef mpfr_t acc
    mpfr_init2(acc, lv.prec)
    mpfr_set(acc, <mpfr_srcptr>MPFR(<mpfr?>x0), MPFR_RNDN)
    for k in range(n):
        _lift_real_c(&lv, &w, acc)
    out = _export(acc, lv.prec)
    mpfr_clear(acc)
    _work_clear(&w)
    return out


def orbit_count_in(data, x0, count, lo, hi):
    cdef LiftView lv
    _load_view(data, &lv)
    cdef Work w
    _work_init(&w, lv.prec)
    cdef long n = count, k, hits = 0
    cdef mpfr_srcptr lo_p = <mpfr_srcptr>MPFR(<mpfr?>lo)
    cdef mpfr_srcptr hi_p = <mpfr_srcptr>MPFR(<mpfr?>hi)
    cdef mpfr_t acc, pos, fl
    mpfr_init2(acc, lv.prec); mpfr_init2(pos, lv.prec); mpfr_init2(fl, lv.prec)
    mpfr_set(acc, <mpfr_srcptr>MPFR(<mpfr?>x0), MPFR_RNDN)
    for k in range(n):
        mpfr_floor(fl, acc)
        mpfr_sub(pos, acc, fl, MPFR_RNDN)
        if mpfr_lessequal_p(lo_p, pos) and mpfr_less_p(pos, hi_p):
            hits += 1
        _lift_real_c(&lv, &w, acc)
    mpfr_clear(acc); mpfr_clear(pos); mpfr_clear(fl)
    _work_clear(&w)
    return hits


def iterate_real(data, x, k):
    return orbit_final_real(data, x, k)


def iterate_dlift_real(data, x, k):
    cdef LiftView lv
    _load_view(data, &lv)
    cdef Work w
    _work_init(&w, lv.prec)
    cdef long n = k, i
    cdef mpfr_t acc, dacc, der
    mpfr_init2(acc, lv.prec); mpfr_init2(dacc, lv.prec); mpfr_init2(der, lv.prec)
    mpfr_set(acc, <mpfr_srcptr>MPFR(<mpfr?>x), MPFR_RNDN)
    mpfr_set_si(dacc, 1, MPFR_RNDN)
    for i in range(n):
        _lift_dlift_real_c(&lv, &w, acc, der)
        mpfr_mul(dacc, dacc, der, MPFR_RNDN)
    out = (_export(acc, lv.prec), _export(dacc, lv.prec))
    mpfr_clear(acc); mpfr_clear(dacc); mpfr_clear(der)
    _work_clear(&w)
    return out


def iterate_cx(data, zre, zim, k, guard_im):
    cdef LiftView lv
    _load_view(data, &lv)
    cdef Work w
    _work_init(&w, lv.prec)
    cdef long n = k, i
    cdef int ok = 1
    cdef mpfr_srcptr guard = <mpfr_srcptr>MPFR(<mpfr?>guard_im)
    cdef mpfr_t pd_re, pd_im, q1, q2
    mpfr_init2(pd_re, lv.prec); mpfr_init2(pd_im, lv.prec)
    mpfr_init2(q1, lv.prec); mpfr_init2(q2, lv.prec)
    mpfr_set(w.t_re, <mpfr_srcptr>MPFR(<mpfr?>zre), MPFR_RNDN)
    mpfr_set(w.t_im, <mpfr_srcptr>MPFR(<mpfr?>zim), MPFR_RNDN)
    mpfr_set_si(pd_re, 1, MPFR_RNDN)
    mpfr_set_si(pd_im, 0, MPFR_RNDN)
    for i in range(n):
        _lift_dlift_cx_c(&lv, &w)
        # product <- product * step derivative
        mpfr_mul(q1, pd_re, w.d_re, MPFR_RNDN)
        mpfr_mul(q2, pd_im, w.d_im, MPFR_RNDN)
        mpfr_mul(w.t1, pd_re, w.d_im, MPFR_RNDN)
        mpfr_mul(w.t2, pd_im, w.d_re, MPFR_RNDN)
        mpfr_sub(pd_re, q1, q2, MPFR_RNDN)
        mpfr_add(pd_im, w.t1, w.t2, MPFR_RNDN)
        if (not mpfr_number_p(w.t_re)) or (not mpfr_number_p(w.t_im)) \
                or mpfr_cmpabs(w.t_im, guard) > 0:
            ok = 0
            break
    out = (_export(w.t_re, lv.prec), _export(w.t_im, lv.prec),
           _export(pd_re, lv.prec), _export(pd_im, lv.prec), ok)
    mpfr_clear(pd_re); mpfr_clear(pd_im); mpfr_clear(q1); mpfr_clear(q2)
    _work_clear(&w)
    return out


def pullback_newton(data, tre, tim, sre, sim, tol, max_iter, gcre, gcim, grad):
    cdef LiftView lv
    _load_view(data, &lv)
    cdef Work w
    _work_init(&w, lv.prec)
    cdef mpfr_srcptr tol_p = <mpfr_srcptr>MPFR(<mpfr?>tol)
    cdef mpfr_srcptr grad_p = <mpfr_srcptr>MPFR(<mpfr?>grad)
    cdef mpfr_srcptr gcre_p = <mpfr_srcptr>MPFR(<mpfr?>gcre)
    cdef mpfr_srcptr gcim_p = <mpfr_srcptr>MPFR(<mpfr?>gcim)
    cdef mpfr_srcptr tre_p = <mpfr_srcptr>MPFR(<mpfr?>tre)
    cdef mpfr_srcptr tim_p = <mpfr_srcptr>MPFR(<mpfr?>tim)
    cdef long budget = max_iter, it, half
    cdef int status = STATUS_NO_CONVERGENCE, accepted
    cdef mpfr_t dmin, wre, wim, fre, fim, dre, dim, res
    cdef mpfr_t rre, rim, den, stre, stim, scale
    cdef mpfr_t nre, nim, gre, gim, gdre, gdim, nres
    mpfr_init2(dmin, lv.prec)
    mpfr_init2(wre, lv.prec); mpfr_init2(wim, lv.prec)
    mpfr_init2(fre, lv.prec); mpfr_init2(fim, lv.prec)
    mpfr_init2(dre, lv.prec); mpfr_init2(dim, lv.prec)
    mpfr_init2(res, lv.prec)
    mpfr_init2(rre, lv.prec); mpfr_init2(rim, lv.prec)
    mpfr_init2(den, lv.prec); mpfr_init2(stre, lv.prec); mpfr_init2(stim, lv.prec)
    mpfr_init2(scale, lv.prec)
    mpfr_init2(nre, lv.prec); mpfr_init2(nim, lv.prec)
    mpfr_init2(gre, lv.prec); mpfr_init2(gim, lv.prec)
    mpfr_init2(gdre, lv.prec); mpfr_init2(gdim, lv.prec)
    mpfr_init2(nres, lv.prec)

    mpfr_set_si_2exp(dmin, 1, 8 - lv.prec, MPFR_RNDN)
    mpfr_set(wre, <mpfr_srcptr>MPFR(<mpfr?>sre), MPFR_RNDN)
    mpfr_set(wim, <mpfr_srcptr>MPFR(<mpfr?>sim), MPFR_RNDN)
    mpfr_set(w.t_re, wre, MPFR_RNDN)
    mpfr_set(w.t_im, wim, MPFR_RNDN)
    _lift_dlift_cx_c(&lv, &w)
    mpfr_set(fre, w.t_re, MPFR_RNDN); mpfr_set(fim, w.t_im, MPFR_RNDN)
    mpfr_set(dre, w.d_re, MPFR_RNDN); mpfr_set(dim, w.d_im, MPFR_RNDN)
    mpfr_sub(w.t1, fre, tre_p, MPFR_RNDN)
    mpfr_sub(w.t2, fim, tim_p, MPFR_RNDN)
    mpfr_hypot(res, w.t1, w.t2, MPFR_RNDN)

    for it in range(budget):
        if mpfr_lessequal_p(res, tol_p):
            status = STATUS_OK
            break
        mpfr_hypot(w.t1, dre, dim, MPFR_RNDN)
        if mpfr_less_p(w.t1, dmin):
            status = STATUS_DERIVATIVE_VANISHED
            break
        mpfr_sub(rre, fre, tre_p, MPFR_RNDN)
        mpfr_sub(rim, fim, tim_p, MPFR_RNDN)
        mpfr_mul(w.t1, dre, dre, MPFR_RNDN)
        mpfr_mul(w.t2, dim, dim, MPFR_RNDN)
        mpfr_add(den, w.t1, w.t2, MPFR_RNDN)
        mpfr_mul(w.t1, rre, dre, MPFR_RNDN)
        mpfr_mul(w.t2, rim, dim, MPFR_RNDN)
        mpfr_add(w.t3, w.t1, w.t2, MPFR_RNDN)
        mpfr_div(stre, w.t3, den, MPFR_RNDN)
        mpfr_mul(w.t1, rim, dre, MPFR_RNDN)
        mpfr_mul(w.t2, rre, dim, MPFR_RNDN)
        mpfr_sub(w.t3, w.t1, w.t2, MPFR_RNDN)
        mpfr_div(stim, w.t3, den, MPFR_RNDN)
        mpfr_set_si(scale, 1, MPFR_RNDN)
        accepted = 0
        for half in range(40):
            mpfr_mul(w.t1, scale, stre, MPFR_RNDN)
            mpfr_sub(nre, wre, w.t1, MPFR_RNDN)
            mpfr_mul(w.t1, scale, stim, MPFR_RNDN)
            mpfr_sub(nim, wim, w.t1, MPFR_RNDN)
            mpfr_set(w.t_re, nre, MPFR_RNDN)
            mpfr_set(w.t_im, nim, MPFR_RNDN)
            _lift_dlift_cx_c(&lv, &w)
            mpfr_set(gre, w.t_re, MPFR_RNDN); mpfr_set(gim, w.t_im, MPFR_RNDN)
            mpfr_set(gdre, w.d_re, MPFR_RNDN); mpfr_set(gdim, w.d_im, MPFR_RNDN)
            mpfr_sub(w.t1, gre, tre_p, MPFR_RNDN)
            mpfr_sub(w.t2, gim, tim_p, MPFR_RNDN)
            mpfr_hypot(nres, w.t1, w.t2, MPFR_RNDN)
            if mpfr_less_p(nres, res):
                accepted = 1
                break
            mpfr_div_ui(scale, scale, 2, MPFR_RNDN)
        if not accepted:
            status = STATUS_NO_CONVERGENCE
            break
        mpfr_set(wre, nre, MPFR_RNDN); mpfr_set(wim, nim, MPFR_RNDN)
        mpfr_set(res, nres, MPFR_RNDN)
        mpfr_set(fre, gre, MPFR_RNDN); mpfr_set(fim, gim, MPFR_RNDN)
        mpfr_set(dre, gdre, MPFR_RNDN); mpfr_set(dim, gdim, MPFR_RNDN)
        mpfr_sub(w.t1, wre, gcre_p, MPFR_RNDN)
        mpfr_sub(w.t2, wim, gcim_p, MPFR_RNDN)
        mpfr_hypot(w.t3, w.t1, w.t2, MPFR_RNDN)
        if mpfr_cmp(w.t3, grad_p) > 0:
            status = STATUS_GUARD_EXIT
            break
    else:
        if mpfr_lessequal_p(res, tol_p):
            status = STATUS_OK
    out = (_export(wre, lv.prec), _export(wim, lv.prec), status)
    mpfr_clear(dmin)
    mpfr_clear(wre); mpfr_clear(wim)
    mpfr_clear(fre); mpfr_clear(fim)
    mpfr_clear(dre); mpfr_clear(dim)
    mpfr_clear(res)
    mpfr_clear(rre); mpfr_clear(rim)
    mpfr_clear(den); mpfr_clear(stre); mpfr_clear(stim)
    mpfr_clear(scale)
    mpfr_clear(nre); mpfr_clear(nim)
    mpfr_clear(gre); mpfr_clear(gim)
    mpfr_clear(gdre); mpfr_clear(gdim)
    mpfr_clear(nres)
    _work_clear(&w)
    return out
