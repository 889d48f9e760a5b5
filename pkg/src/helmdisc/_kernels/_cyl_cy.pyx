# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled cylinder-function kernels.

Same algorithm as _cyl_py (see its docstring for the regime map); scalar C
loops per evaluation point instead of vectorised numpy passes. The two
backends are cross-checked against each other in the test suite.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport atan2 as c_atan2
from libc.math cimport cos, exp, fabs, floor, frexp, ldexp, lgamma, log, log2, sin, sqrt

cnp.import_array()

from ..errors import RangeError

BACKEND = "cython"

cdef double Z_SWITCH = 18.0
cdef double DD_IM_MIN = 1.5
cdef int PAD_A = 22
cdef int SERIES_TERMS = 46
cdef int DD_TERMS = 58
cdef double RENORM = 2.0 ** 500
cdef double RENORM_INV = 2.0 ** -500
cdef long SHIFT = 512
cdef double SCALE_DOWN = 2.0 ** -512
cdef double SCALE_UP = 2.0 ** 512

cdef double LN2_HI = 0.6931471805599453
cdef double LN2_LO = 2.3190468138462996e-17
cdef double PI_HI = 3.141592653589793
cdef double PI_LO = 1.2246467991473532e-16
cdef double PI_2_HI = 1.5707963267948966
cdef double PI_2_LO = 6.123233995736766e-17
cdef double EULER_HI = 0.5772156649015329
cdef double EULER_LO = -4.942915152430645e-18
cdef double PI = 3.141592653589793
cdef double SPLITTER = 134217729.0


cdef inline double complex cldexp(double complex m, long e) noexcept nogil:
    if e > 2200:
        e = 2200
    elif e < -2200:
        e = -2200
    return ldexp(m.real, <int>e) + 1j * ldexp(m.imag, <int>e)


# ---------------------------------------------------------------- dd scalar

cdef struct DD:
    double hi
    double lo

cdef struct CDD:
    DD re
    DD im


cdef inline DD two_sum(double a, double b) noexcept nogil:
    cdef DD r
    cdef double s = a + b
    cdef double bb = s - a
    r.hi = s
    r.lo = (a - (s - bb)) + (b - bb)
    return r


cdef inline DD quick_two_sum(double a, double b) noexcept nogil:
    cdef DD r
    cdef double s = a + b
    r.hi = s
    r.lo = b - (s - a)
    return r


cdef inline DD two_prod(double a, double b) noexcept nogil:
    cdef DD r
    cdef double p = a * b
    cdef double t = SPLITTER * a
    cdef double ah = t - (t - a)
    cdef double al = a - ah
    t = SPLITTER * b
    cdef double bh = t - (t - b)
    cdef double bl = b - bh
    r.hi = p
    r.lo = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return r


cdef inline DD dd_add(DD a, DD b) noexcept nogil:
    cdef DD s = two_sum(a.hi, b.hi)
    cdef DD t = two_sum(a.lo, b.lo)
    cdef double c = s.lo + t.hi
    cdef DD v = quick_two_sum(s.hi, c)
    cdef double w = t.lo + v.lo
    return quick_two_sum(v.hi, w)


cdef inline DD dd_neg(DD a) noexcept nogil:
    cdef DD r
    r.hi = -a.hi
    r.lo = -a.lo
    return r


cdef inline DD dd_sub(DD a, DD b) noexcept nogil:
    return dd_add(a, dd_neg(b))


cdef inline DD dd_mul(DD a, DD b) noexcept nogil:
    cdef DD p = two_prod(a.hi, b.hi)
    p.lo = p.lo + (a.hi * b.lo + a.lo * b.hi)
    return quick_two_sum(p.hi, p.lo)


cdef inline DD dd_mul_d(DD a, double b) noexcept nogil:
    cdef DD p = two_prod(a.hi, b)
    p.lo = p.lo + a.lo * b
    return quick_two_sum(p.hi, p.lo)


cdef inline DD dd_div(DD a, DD b) noexcept nogil:
    cdef double q1 = a.hi / b.hi
    cdef DD r = dd_sub(a, dd_mul_d(b, q1))
    cdef double q2 = r.hi / b.hi
    r = dd_sub(r, dd_mul_d(b, q2))
    cdef double q3 = r.hi / b.hi
    cdef DD s = quick_two_sum(q1, q2)
    cdef DD t
    t.hi = q3
    t.lo = 0.0
    return dd_add(s, t)


cdef inline DD dd_from(double a) noexcept nogil:
    cdef DD r
    r.hi = a
    r.lo = 0.0
    return r


cdef inline DD dd_div_d(double a, double b) noexcept nogil:
    return dd_div(dd_from(a), dd_from(b))


cdef inline DD dd_sqrt(DD a) noexcept nogil:
    cdef double y = sqrt(a.hi)
    cdef DD q = dd_div(a, dd_from(y))
    cdef DD s = dd_add(q, dd_from(y))
    return dd_mul_d(s, 0.5)


cdef inline DD dd_ln(DD a) noexcept nogil:
    cdef int e
    cdef double m = frexp(a.hi, &e)
    if m < 0.70710678118654752:
        m = m * 2.0
        e -= 1
    cdef DD mm
    mm.hi = m
    mm.lo = ldexp(a.lo, -e)
    cdef DD n_ = dd_add(mm, dd_from(-1.0))
    cdef DD d_ = dd_add(mm, dd_from(1.0))
    cdef DD t = dd_div(n_, d_)
    cdef DD t2 = dd_mul(t, t)
    cdef DD terms[22]
    cdef DD p = t
    cdef int k
    for k in range(22):
        terms[k] = p
        p = dd_mul(p, t2)
    cdef DD s = dd_from(0.0)
    for k in range(21, -1, -1):
        s = dd_add(s, dd_div(terms[k], dd_from(2.0 * k + 1.0)))
    s = dd_mul_d(s, 2.0)
    cdef DD l2
    l2.hi = LN2_HI
    l2.lo = LN2_LO
    return dd_add(s, dd_mul_d(l2, <double>e))


cdef inline DD dd_atan(DD t) noexcept nogil:
    cdef int i, k
    cdef DD h2, r
    for i in range(2):
        h2 = dd_add(dd_mul(t, t), dd_from(1.0))
        r = dd_add(dd_sqrt(h2), dd_from(1.0))
        t = dd_div(t, r)
    cdef DD t2 = dd_mul(t, t)
    cdef DD terms[26]
    cdef DD p = t
    for k in range(26):
        terms[k] = p
        p = dd_mul(p, t2)
    cdef DD s = dd_from(0.0)
    cdef double den
    for k in range(25, -1, -1):
        den = (2.0 * k + 1.0) if k % 2 == 0 else -(2.0 * k + 1.0)
        s = dd_add(s, dd_div(terms[k], dd_from(den)))
    return dd_mul_d(s, 4.0)


cdef inline DD dd_atan2(DD y, DD x) noexcept nogil:
    cdef bint swap = fabs(y.hi) > fabs(x.hi)
    cdef DD n_ = x if swap else y
    cdef DD d_ = y if swap else x
    cdef DD t = dd_div(n_, d_)
    cdef DD a = dd_atan(t)
    cdef DD r, pih
    cdef double sgn
    if swap:
        sgn = 1.0 if t.hi >= 0 else -1.0
        pih.hi = sgn * PI_2_HI
        pih.lo = sgn * PI_2_LO
        r = dd_sub(pih, a)
    else:
        r = a
    if x.hi < 0:
        sgn = 1.0 if y.hi >= 0 else -1.0
        pih.hi = sgn * PI_HI
        pih.lo = sgn * PI_LO
        r = dd_add(r, pih)
    return r


cdef inline CDD cdd_from(double complex z) noexcept nogil:
    cdef CDD r
    r.re = dd_from(z.real)
    r.im = dd_from(z.imag)
    return r


cdef inline CDD cdd_add(CDD a, CDD b) noexcept nogil:
    cdef CDD r
    r.re = dd_add(a.re, b.re)
    r.im = dd_add(a.im, b.im)
    return r


cdef inline CDD cdd_mul(CDD a, CDD b) noexcept nogil:
    cdef CDD r
    r.re = dd_sub(dd_mul(a.re, b.re), dd_mul(a.im, b.im))
    r.im = dd_add(dd_mul(a.re, b.im), dd_mul(a.im, b.re))
    return r


cdef inline CDD cdd_mul_dd(CDD a, DD b) noexcept nogil:
    cdef CDD r
    r.re = dd_mul(a.re, b)
    r.im = dd_mul(a.im, b)
    return r


cdef inline CDD cdd_mul_d(CDD a, double b) noexcept nogil:
    cdef CDD r
    r.re = dd_mul_d(a.re, b)
    r.im = dd_mul_d(a.im, b)
    return r


cdef inline CDD cdd_div_d(CDD a, double b) noexcept nogil:
    cdef CDD r
    r.re = dd_div(a.re, dd_from(b))
    r.im = dd_div(a.im, dd_from(b))
    return r


cdef inline CDD cdd_recip(CDD a) noexcept nogil:
    cdef DD den = dd_add(dd_mul(a.re, a.re), dd_mul(a.im, a.im))
    cdef CDD r
    r.re = dd_div(a.re, den)
    r.im = dd_div(dd_neg(a.im), den)
    return r


cdef inline CDD cdd_mul_i(CDD a, double sgn) noexcept nogil:
    cdef CDD r
    r.re.hi = -sgn * a.im.hi
    r.re.lo = -sgn * a.im.lo
    r.im.hi = sgn * a.re.hi
    r.im.lo = sgn * a.re.lo
    return r


cdef inline CDD cdd_log(CDD a) noexcept nogil:
    cdef DD m2 = dd_add(dd_mul(a.re, a.re), dd_mul(a.im, a.im))
    cdef CDD r
    r.re = dd_mul_d(dd_ln(m2), 0.5)
    r.im = dd_atan2(a.im, a.re)
    return r


cdef inline double complex cdd_round(CDD a) noexcept nogil:
    return (a.re.hi + a.re.lo) + 1j * (a.im.hi + a.im.lo)


cdef void dd_h_seeds(double complex z, int kind, double complex * h0, double complex * h1) noexcept nogil:
    """H^(kind)_{0,1}(z) by double-double series; 2 < |z| <= 18."""
    cdef double sgn = 1.0 if kind == 1 else -1.0
    cdef CDD z4 = cdd_from(z)
    cdef CDD half = cdd_mul_d(z4, 0.5)
    cdef CDD nq4 = cdd_mul_d(cdd_mul(half, half), -1.0)
    cdef CDD t, u, j0, j1s, y0s, y1s, j1, lg4, t1, t2, t3, y0, y1
    cdef DD hk, hk1, two_over_pi, neg_inv_pi
    t = cdd_from(1.0)
    u = cdd_from(1.0)
    j0 = t
    j1s = u
    y0s = cdd_from(0.0)
    y1s = cdd_from(1.0)
    hk = dd_from(0.0)
    cdef int k
    for k in range(1, DD_TERMS):
        t = cdd_div_d(cdd_mul(t, nq4), <double>(k * k))
        u = cdd_div_d(cdd_mul(u, nq4), <double>(k * (k + 1)))
        j0 = cdd_add(j0, t)
        j1s = cdd_add(j1s, u)
        hk = dd_add(hk, dd_div_d(1.0, <double>k))
        y0s = cdd_add(y0s, cdd_mul_dd(t, dd_neg(hk)))
        hk1 = dd_add(hk, dd_div_d(1.0, <double>(k + 1)))
        y1s = cdd_add(y1s, cdd_mul_dd(u, dd_add(hk, hk1)))
    j1 = cdd_mul(half, j1s)
    lg4 = cdd_log(half)
    cdef DD eul
    eul.hi = EULER_HI
    eul.lo = EULER_LO
    lg4.re = dd_add(lg4.re, eul)
    cdef DD pi_dd
    pi_dd.hi = PI_HI
    pi_dd.lo = PI_LO
    two_over_pi = dd_div(dd_from(2.0), pi_dd)
    neg_inv_pi = dd_div(dd_from(-1.0), pi_dd)
    y0 = cdd_mul_dd(cdd_add(cdd_mul(lg4, j0), y0s), two_over_pi)
    t1 = cdd_mul_dd(cdd_mul(lg4, j1), two_over_pi)
    t2 = cdd_mul_dd(cdd_mul_d(cdd_recip(z4), 2.0), neg_inv_pi)
    t3 = cdd_mul_dd(cdd_mul(half, y1s), neg_inv_pi)
    y1 = cdd_add(cdd_add(t1, t2), t3)
    h0[0] = cdd_round(cdd_add(j0, cdd_mul_i(y0, sgn)))
    h1[0] = cdd_round(cdd_add(j1, cdd_mul_i(y1, sgn)))


# ------------------------------------------------------------ scalar pieces

cdef void series_jnu(double complex z, long nu, double complex * sm, long * se) noexcept nogil:
    """Cancellation-free Maclaurin J_nu(z), nu >= |z|^2/4 + 2, scaled."""
    # (z/2)^nu by squaring with exponent tracking
    cdef double complex rm = 1.0
    cdef long re_ = 0
    cdef double complex bm = z * 0.5
    cdef long be = 0
    cdef long nn = nu
    cdef int ex
    cdef double am
    while nn > 0:
        if nn & 1:
            rm = rm * bm
            re_ += be
            am = abs(rm)
            if am > RENORM or (am > 0 and am < RENORM_INV):
                frexp(am, &ex)
                rm = cldexp(rm, -ex)
                re_ += ex
        nn >>= 1
        if nn > 0:
            bm = bm * bm
            be += be
            am = abs(bm)
            if am > RENORM or (am > 0 and am < RENORM_INV):
                frexp(am, &ex)
                bm = cldexp(bm, -ex)
                be += ex
    cdef double lg = lgamma(nu + 1.0)
    cdef double efac = floor(lg / LN2_HI)
    cdef double mfac = exp(lg - efac * LN2_HI)
    cdef double complex t0m = rm / mfac
    cdef long t0e = re_ - <long>efac
    cdef double complex q = -(z * z) * 0.25
    cdef double complex s = 1.0
    cdef double complex t = 1.0
    cdef int m
    for m in range(1, SERIES_TERMS):
        t = t * q / <double>(m * (m + nu))
        s = s + t
    sm[0] = t0m * s
    se[0] = t0e


cdef void asym_h(double complex z, int nu, int kind, double complex * hm, long * he) noexcept nogil:
    """Scaled H^(kind)_nu(z) by the large-argument expansion (nu in {0,1})."""
    cdef double sgn = 1.0 if kind == 1 else -1.0
    cdef double tt = -sgn * z.imag / LN2_HI
    cdef double e = floor(tt)
    cdef double arg_ = sgn * z.real
    cdef double m_ = exp((tt - e) * LN2_HI)
    cdef double complex mant = m_ * (cos(arg_) + 1j * sin(arg_))
    cdef double complex pref = _csqrt(2.0 / (PI * z))
    cdef double ph = -sgn * (nu * PI / 2.0 + PI / 4.0)
    pref = pref * (cos(ph) + 1j * sin(ph))
    cdef double complex s = 1.0
    cdef double complex term = 1.0
    cdef bint frozen = False
    cdef double last = 1.0
    cdef double a
    cdef int k
    for k in range(1, 46):
        term = term * (sgn * 1j) * (4.0 * nu * nu - (2 * k - 1) * (2 * k - 1)) / (8.0 * z * k)
        a = abs(term)
        if a > last or a < 1e-18 * abs(s):
            frozen = True
        if not frozen:
            s = s + term
        last = a
    hm[0] = mant * pref * s
    he[0] = <long>e


cdef inline double complex _csqrt(double complex w) noexcept nogil:
    cdef double r = abs(w)
    cdef double a = c_atan2(w.imag, w.real) * 0.5
    cdef double sr = sqrt(r)
    return sr * (cos(a) + 1j * sin(a))


# ----------------------------------------------------------------- engine

cdef int point_all(double complex z, long nmax,
                   double complex * jm, long * je,
                   double complex * hm, long * he,
                   bint need_h) noexcept nogil:
    """Fill orders 0..nmax of J and (optionally) H1 at one argument."""
    cdef double az = abs(z)
    cdef bint regA = az <= Z_SWITCH
    cdef bint reflected = z.imag < -DD_IM_MIN
    cdef int kind = 2 if reflected else 1
    cdef double sgn = 1.0 if kind == 1 else -1.0
    cdef long nu0 = 0, Nstart, n, m, E
    cdef double complex fp, fc, fn, inv_z, sy, syp, fnorm_m, f0, f1
    cdef long fnorm_e = 0, e_at_1 = 0
    cdef double c
    if regA:
        nu0 = <long>(az * az / 4.0 + 0.999999999999) + 2
        Nstart = nmax
        if nu0 > Nstart:
            Nstart = nu0
        if <long>az + 36 > Nstart:
            Nstart = <long>az + 36
        Nstart += PAD_A
    else:
        Nstart = <long>(az + 10.0 * ((az / 2.0) ** (1.0 / 3.0)) + 12.0) + 1
        if nmax + 30 > Nstart:
            Nstart = nmax + 30
    inv_z = 1.0 / z
    fp = 0.0
    fc = 1.0
    E = 0
    sy = 0.0
    syp = 0.0
    fnorm_m = 0.0
    f0 = 0.0
    f1 = 0.0
    for n in range(Nstart, -1, -1):
        if n <= nmax:
            jm[n] = fc
            je[n] = E
        if regA and n == nu0:
            fnorm_m = fc
            fnorm_e = E
        if regA and need_h:
            if n >= 2 and n % 2 == 0:
                m = n / 2
                c = 1.0 / m if m % 2 == 0 else -1.0 / m
                sy = sy + c * fc
            elif n % 2 == 1:
                m = (n + 1) / 2
                c = (1.0 if m % 2 == 0 else -1.0) / (n + 1.0)
                if n >= 3:
                    m = (n - 1) / 2
                    c -= (1.0 if m % 2 == 0 else -1.0) / (n - 1.0)
                syp = syp + c * fc
        if n == 1:
            f1 = fc
            e_at_1 = E
        if n == 0:
            f0 = fc
            break
        fn = (2.0 * n) * inv_z * fc - fp
        fp = fc
        fc = fn
        if abs(fc) > RENORM:
            fc = fc * SCALE_DOWN
            fp = fp * SCALE_DOWN
            sy = sy * SCALE_DOWN
            syp = syp * SCALE_DOWN
            E += SHIFT
    f1 = cldexp(f1, e_at_1 - E if e_at_1 - E < 0 else 0)

    # normalisation
    cdef double complex lam_m, sm
    cdef long lam_e, se
    cdef double complex h10m, h11m, h20m, h21m, j0m, j1m, ref_m
    cdef long h10e, h11e, h20e, h21e, j0e, j1e, ref_e
    cdef double s0, s1
    cdef double complex h0, h1
    cdef long e_seed = 0
    if regA:
        series_jnu(z, nu0, &sm, &se)
        lam_m = sm / fnorm_m
        lam_e = se - fnorm_e
    else:
        asym_h(z, 0, 1, &h10m, &h10e)
        asym_h(z, 1, 1, &h11m, &h11e)
        asym_h(z, 0, 2, &h20m, &h20e)
        asym_h(z, 1, 2, &h21m, &h21e)
        _comb(h10m, h10e, h20m, h20e, &j0m, &j0e)
        j0m = j0m * 0.5
        _comb(h11m, h11e, h21m, h21e, &j1m, &j1e)
        j1m = j1m * 0.5
        s0 = log2(abs(j0m)) + j0e if abs(j0m) > 0 else -1e300
        s1 = log2(abs(j1m)) + j1e if abs(j1m) > 0 else -1e300
        if s0 >= s1:
            ref_m = j0m
            ref_e = j0e
            lam_m = ref_m / f0
        else:
            ref_m = j1m
            ref_e = j1e
            lam_m = ref_m / f1
        lam_e = ref_e - E
    for n in range(0, nmax + 1):
        jm[n] = jm[n] * lam_m
        je[n] = je[n] + lam_e
        if abs(jm[n]) > RENORM:
            jm[n] = jm[n] * SCALE_DOWN
            je[n] = je[n] + SHIFT

    if not need_h:
        return 0

    # H seeds
    cdef double complex lam_full, jj0, jj1, ln_term, y0, y0p
    cdef double lnr, th
    if regA:
        lam_full = cldexp(lam_m, lam_e + E)
        jj0 = f0 * lam_full
        jj1 = f1 * lam_full
        lnr = log(abs(z * 0.5))
        th = c_atan2(z.imag * 0.5, z.real * 0.5)
        ln_term = (lnr + EULER_HI) + 1j * th
        y0 = (2.0 / PI) * (ln_term * jj0 - 2.0 * sy * lam_full)
        y0p = (2.0 / PI) * (-ln_term * jj1 + jj0 / z - 2.0 * syp * lam_full)
        h0 = jj0 + sgn * 1j * y0
        h1 = jj1 - sgn * 1j * y0p
        if fabs(z.imag) > DD_IM_MIN and az > 2.0:
            dd_h_seeds(z, kind, &h0, &h1)
        e_seed = 0
    else:
        if kind == 1:
            h0 = h10m
            h1 = cldexp(h11m, h11e - h10e)
            e_seed = h10e
            if h11e > h10e:
                h0 = cldexp(h10m, h10e - h11e)
                h1 = h11m
                e_seed = h11e
        else:
            h0 = h20m
            h1 = cldexp(h21m, h21e - h20e)
            e_seed = h20e
            if h21e > h20e:
                h0 = cldexp(h20m, h20e - h21e)
                h1 = h21m
                e_seed = h21e

    # upward recurrence
    cdef double complex hp_ = h0, hc = h1, hn
    cdef double am
    E = e_seed
    hm[0] = hp_
    he[0] = E
    n = 1
    while True:
        if n <= nmax:
            hm[n] = hc
            he[n] = E
        if n >= nmax:
            break
        hn = (2.0 * n) * inv_z * hc - hp_
        hp_ = hc
        hc = hn
        am = abs(hc)
        if am > RENORM:
            hc = hc * SCALE_DOWN
            hp_ = hp_ * SCALE_DOWN
            E += SHIFT
        elif am > 0 and am < RENORM_INV:
            hc = hc * SCALE_UP
            hp_ = hp_ * SCALE_UP
            E -= SHIFT
        n += 1
    if nmax == 0:
        hm[0] = hp_
        he[0] = e_seed

    # reflected: H1 = 2J - H2
    if reflected:
        for n in range(0, nmax + 1):
            _comb(2.0 * jm[n], je[n], -hm[n], he[n], &hm[n], &he[n])
    return 0


cdef inline void _comb(double complex m1, long e1, double complex m2, long e2,
                       double complex * mo, long * eo) noexcept nogil:
    cdef long e = e1 if e1 > e2 else e2
    mo[0] = cldexp(m1, e1 - e) + cldexp(m2, e2 - e)
    eo[0] = e


# ------------------------------------------------------------- public API

def cyl_scaled(long nmax, z):
    """All orders 0..nmax at scalar z (scaled pairs); mirrors _cyl_py."""
    if nmax == 0:
        return tuple(a[:1] for a in cyl_scaled(1, z))
    cdef double complex zc = complex(z)
    jm_a = np.empty(nmax + 1, dtype=np.complex128)
    je_a = np.empty(nmax + 1, dtype=np.int64)
    hm_a = np.empty(nmax + 1, dtype=np.complex128)
    he_a = np.empty(nmax + 1, dtype=np.int64)
    cdef double complex[::1] jm = jm_a
    cdef long[::1] je = je_a
    cdef double complex[::1] hm = hm_a
    cdef long[::1] he = he_a
    point_all(zc, nmax, &jm[0], &je[0], &hm[0], &he[0], True)
    from ._cyl_py import _canon, _combine
    n_over_z = np.arange(nmax + 1) / zc
    jpm = np.empty_like(jm_a)
    jpe = np.empty_like(je_a)
    hpm = np.empty_like(hm_a)
    hpe = np.empty_like(he_a)
    jpm[1:], jpe[1:] = _combine(jm_a[:-1], je_a[:-1], -n_over_z[1:] * jm_a[1:], je_a[1:])
    hpm[1:], hpe[1:] = _combine(hm_a[:-1], he_a[:-1], -n_over_z[1:] * hm_a[1:], he_a[1:])
    jpm[0], jpe[0] = -jm_a[1], je_a[1]
    hpm[0], hpe[0] = -hm_a[1], he_a[1]
    jm_o, je_o = _canon(jm_a, je_a)
    jpm, jpe = _canon(jpm, jpe)
    hm_o, he_o = _canon(hm_a, he_a)
    hpm, hpe = _canon(hpm, hpe)
    return jm_o, je_o, jpm, jpe, hm_o, he_o, hpm, hpe


def cyl_pair_batch(long nu, z, bint need_h=True):
    """(J_nu, J'_nu, H1_nu, H1'_nu) over a batch of z, unscaled doubles.

    With need_h=False the Hankel family is skipped (None in its slots).
    """
    z_arr = np.ascontiguousarray(z, dtype=np.complex128)
    flat = z_arr.ravel()
    cdef long B = flat.shape[0]
    cdef long nmax = nu if nu > 1 else 1
    cdef long lo = nu - 1 if nu >= 1 else 0
    cdef long hi_ = nu if nu >= 1 else 1
    jn = np.empty(B, dtype=np.complex128)
    jp_ = np.empty(B, dtype=np.complex128)
    hn = np.empty(B, dtype=np.complex128)
    hp_ = np.empty(B, dtype=np.complex128)
    jn_m = np.empty(B, dtype=np.complex128)
    jn_e = np.empty(B, dtype=np.int64)
    jl_m = np.empty(B, dtype=np.complex128)
    jl_e = np.empty(B, dtype=np.int64)
    hn_m = np.empty(B, dtype=np.complex128)
    hn_e = np.empty(B, dtype=np.int64)
    hl_m = np.empty(B, dtype=np.complex128)
    hl_e = np.empty(B, dtype=np.int64)
    cdef double complex[::1] zv = flat
    cdef double complex[::1] jnm = jn_m, jlm = jl_m, hnm = hn_m, hlm = hl_m
    cdef long[::1] jne = jn_e, jle = jl_e, hne = hn_e, hle = hl_e
    scratch_jm = np.empty(nmax + 1, dtype=np.complex128)
    scratch_je = np.empty(nmax + 1, dtype=np.int64)
    scratch_hm = np.empty(nmax + 1, dtype=np.complex128)
    scratch_he = np.empty(nmax + 1, dtype=np.int64)
    cdef double complex[::1] sjm = scratch_jm
    cdef long[::1] sje = scratch_je
    cdef double complex[::1] shm = scratch_hm
    cdef long[::1] she = scratch_he
    cdef long i
    with nogil:
        for i in range(B):
            point_all(zv[i], nmax, &sjm[0], &sje[0], &shm[0], &she[0], need_h)
            jnm[i] = sjm[hi_]
            jne[i] = sje[hi_]
            jlm[i] = sjm[lo]
            jle[i] = sje[lo]
            if need_h:
                hnm[i] = shm[hi_]
                hne[i] = she[hi_]
                hlm[i] = shm[lo]
                hle[i] = she[lo]
    from ._cyl_py import _combine, _to_double
    h = hp = None
    if nu >= 1:
        j = _to_double(jn_m, jn_e, "J")
        dm, de = _combine(jl_m, jl_e, -(nu / flat) * jn_m, jn_e)
        jp = _to_double(dm, de, "J'")
        if need_h:
            h = _to_double(hn_m, hn_e, "H1")
            dm, de = _combine(hl_m, hl_e, -(nu / flat) * hn_m, hn_e)
            hp = _to_double(dm, de, "H1'")
    else:
        j = _to_double(jl_m, jl_e, "J")
        jp = -_to_double(jn_m, jn_e, "J'")
        if need_h:
            h = _to_double(hl_m, hl_e, "H1")
            hp = -_to_double(hn_m, hn_e, "H1'")
    return (j.reshape(z_arr.shape), jp.reshape(z_arr.shape),
            h.reshape(z_arr.shape) if need_h else None,
            hp.reshape(z_arr.shape) if need_h else None)


def cyl_phase_sum(bint use_hankel, long nmax, z, phase, cpos, cneg):
    """sum_{n<=nmax} Z_n(z_p) (cpos[n] phase_p^n + cneg[n] phase_p^-n), per point."""
    z_arr = np.ascontiguousarray(z, dtype=np.complex128)
    flat = z_arr.ravel()
    ph_arr = np.ascontiguousarray(phase, dtype=np.complex128).ravel()
    cp = np.ascontiguousarray(cpos, dtype=np.complex128)
    cn = np.ascontiguousarray(cneg, dtype=np.complex128)
    cdef long B = flat.shape[0]
    out = np.zeros(B, dtype=np.complex128)
    cdef double complex[::1] zv = flat
    cdef double complex[::1] pv = ph_arr
    cdef double complex[::1] cpv = cp
    cdef double complex[::1] cnv = cn
    cdef double complex[::1] ov = out
    scratch_jm = np.empty(nmax + 1, dtype=np.complex128)
    scratch_je = np.empty(nmax + 1, dtype=np.int64)
    scratch_hm = np.empty(nmax + 1, dtype=np.complex128)
    scratch_he = np.empty(nmax + 1, dtype=np.int64)
    cdef double complex[::1] sjm = scratch_jm
    cdef long[::1] sje = scratch_je
    cdef double complex[::1] shm = scratch_hm
    cdef long[::1] she = scratch_he
    cdef long i, n
    cdef double complex acc, pw, ipw, val
    with nogil:
        for i in range(B):
            point_all(zv[i], nmax, &sjm[0], &sje[0], &shm[0], &she[0], use_hankel)
            acc = 0.0
            pw = 1.0
            ipw = 1.0
            for n in range(0, nmax + 1):
                if use_hankel:
                    val = shm[n] if she[n] == 0 else cldexp(shm[n], she[n])
                else:
                    val = sjm[n] if sje[n] == 0 else cldexp(sjm[n], sje[n])
                if n == 0:
                    acc = acc + val * cpv[0]
                else:
                    acc = acc + val * (cpv[n] * pw + cnv[n] * ipw)
                pw = pw * pv[i]
                ipw = ipw * pv[i].conjugate()
            ov[i] = acc
    if not np.all(np.isfinite(out)):
        raise RangeError("phase sum overflowed double range")
    return out.reshape(z_arr.shape)
