"""Pure numpy cylinder-function kernels (fallback backend).

Algorithm (mirrored by the compiled backend):

  J-family   one downward Miller recurrence per argument, orders high -> 0,
             kept as (complex mantissa, int64 power-of-2 exponent) pairs so
             orders up to 1e4 never over/underflow. Normalisation:
               |z| <= 18   cancellation-free Maclaurin value at order
                           nu0 = ceil(|z|^2/4)+2 (above the turning point,
                           where J_nu0 has no zeros)
               |z| >  18   large-argument Hankel asymptotics at order 0 or 1
                           (whichever is larger), J = (H1+H2)/2
  H-family   seeded at orders 0,1 then one stable upward recurrence.
             For Im z >= -1.5 the recurrence carries H1 itself; for
             Im z < -1.5 it carries H2 (the recessive-at-0 branch there,
             so upward recurrence is stable) and returns H1 = 2J - H2.
             Seeds:
               |z| <= 18, |Im z| <= 1.5   H = J +/- iY with Y_0, Y_0' = -Y_1
                           from the Neumann-log series over the Miller J's
               |z| <= 18, |Im z| > 1.5    double-double Maclaurin/log series
                           (forming J +/- iY loses ~e^{2|Im z|} digits)
               |z| >  18                  Hankel asymptotics directly

Derivatives come from X'_n = X_{n-1} - (n/z) X_n, which keeps the
three-term-recurrence identities exact to rounding.
"""
import math

import numpy as np

from . import _dd as dd
from ..errors import RangeError

BACKEND = "python"

Z_SWITCH = 18.0
DD_IM_MIN = 1.5
PAD_A = 22
SERIES_TERMS = 46
DD_TERMS = 58
RENORM = 2.0 ** 500
RENORM_INV = 2.0 ** -500
SHIFT = 512
SCALE_DOWN = 2.0 ** -512
SCALE_UP = 2.0 ** 512

_LGAMMA = np.array([math.lgamma(i + 1) for i in range(140)])


def _renorm_pair(m, e):
    """Bring |mantissa| back into a sane window, exactly (power-of-2 shifts)."""
    am = np.abs(m)
    up = am > RENORM
    dn = (am > 0) & (am < RENORM_INV)
    if np.any(up):
        m = np.where(up, m * SCALE_DOWN, m)
        e = np.where(up, e + SHIFT, e)
    if np.any(dn):
        m = np.where(dn, m * SCALE_UP, m)
        e = np.where(dn, e - SHIFT, e)
    return m, e


def _ldexp_c(m, e):
    ec = np.clip(e, -2200, 2200).astype(np.int64)
    return np.ldexp(np.real(m), ec) + 1j * np.ldexp(np.imag(m), ec)


def _canon(m, e):
    """Canonicalise a scaled pair: push the wild part of |m| into e."""
    am = np.abs(m)
    nz = am > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        sh = np.where(nz, np.floor(np.log2(am, where=nz, out=np.zeros_like(am))), 0.0)
    sh = np.where(np.abs(sh) > 30, sh, 0.0).astype(np.int64)
    m = _ldexp_c(m, -sh)
    e = np.where(nz, e + sh, 0)
    return m, e


def _to_double(m, e, ctx="value"):
    """Scaled pair -> complex128; flushes underflow to 0, raises on overflow."""
    m = np.asarray(m, dtype=np.complex128)
    e = np.asarray(e, dtype=np.int64)
    am = np.abs(m)
    nz = am > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        score = np.where(nz, np.log2(am, where=nz, out=np.zeros_like(am)) + e, -np.inf)
    if np.any(score > 1020.0):
        raise RangeError(f"{ctx}: magnitude exceeds double range (use the scaled API)")
    return _ldexp_c(m, e)


def _combine(m1, e1, m2, e2):
    """(m1,e1) + (m2,e2) -> scaled pair at the larger exponent."""
    e = np.maximum(e1, e2)
    m = _ldexp_c(m1, np.minimum(e1 - e, 0)) + _ldexp_c(m2, np.minimum(e2 - e, 0))
    return m, e


def _powint_scaled(w, n):
    """w**n for int array n >= 0, as a scaled pair."""
    rm = np.ones_like(w)
    re_ = np.zeros(w.shape, dtype=np.int64)
    bm = w.copy()
    be = np.zeros(w.shape, dtype=np.int64)
    nn = n.astype(np.int64).copy()
    while np.any(nn > 0):
        odd = (nn & 1) == 1
        rm = np.where(odd, rm * bm, rm)
        re_ = np.where(odd, re_ + be, re_)
        rm, re_ = _renorm_pair(rm, re_)
        nn >>= 1
        if np.any(nn > 0):
            bm = bm * bm
            be = be + be
            bm, be = _renorm_pair(bm, be)
    return rm, re_


def _series_jnu(z, nu):
    """Cancellation-free Maclaurin J_nu(z) for nu >= |z|^2/4 + 2, scaled."""
    pm, pe = _powint_scaled(z * 0.5, nu)
    lg = _LGAMMA[nu]
    efac = np.floor(lg / dd.LN2_HI)
    mfac = np.exp(lg - efac * dd.LN2_HI)
    t0m = pm / mfac
    t0e = pe - efac.astype(np.int64)
    q = -(z * z) * 0.25
    s = np.ones_like(z)
    t = np.ones_like(z)
    for m in range(1, SERIES_TERMS):
        t = t * q / (m * (m + nu))
        s = s + t
    return _renorm_pair(t0m * s, t0e)


def _cdd_recip(z4):
    den = dd.dd_add(*dd.dd_mul(z4[0], z4[1], z4[0], z4[1]),
                    *dd.dd_mul(z4[2], z4[3], z4[2], z4[3]))
    rh, rl = dd.dd_div(z4[0], z4[1], *den)
    ih, il = dd.dd_div(-z4[2], -z4[3], *den)
    return rh, rl, ih, il


def _cdd_mul_i(a, sgn):
    # multiply by sgn*i
    return -sgn * a[2], -sgn * a[3], sgn * a[0], sgn * a[1]


def _dd_h_seeds(z, kind):
    """H^(kind) at orders 0,1 by double-double series; 2 < |z| <= 18."""
    sgn = 1.0 if kind == 1 else -1.0
    z4 = dd.cdd_from(z)
    half = dd.cdd_mul_d(z4, 0.5)
    q4 = dd.cdd_mul(half, half)
    nq4 = dd.cdd_mul_d(q4, -1.0)
    zero = np.zeros(z.shape)

    t = (np.ones(z.shape), zero.copy(), zero.copy(), zero.copy())   # (-q)^k/(k!)^2
    u = (np.ones(z.shape), zero.copy(), zero.copy(), zero.copy())   # (-q)^k/(k!(k+1)!)
    j0 = t
    j1s = u
    y0s = (zero.copy(), zero.copy(), zero.copy(), zero.copy())
    y1s = (np.ones(z.shape), zero.copy(), zero.copy(), zero.copy())  # k=0: H_0+H_1 = 1
    hk = (0.0, 0.0)
    for k in range(1, DD_TERMS):
        t = dd.cdd_div_d(dd.cdd_mul(t, nq4), float(k * k))
        u = dd.cdd_div_d(dd.cdd_mul(u, nq4), float(k * (k + 1)))
        j0 = dd.cdd_add(j0, t)
        j1s = dd.cdd_add(j1s, u)
        hk = dd.dd_add(*hk, *dd.dd_div_d(1.0, 0.0, float(k)))
        # Y0 series term: (-1)^{k+1} H_k q^k/(k!)^2 = -H_k t_k
        y0s = dd.cdd_add(y0s, dd.cdd_mul_dd(t, -hk[0], -hk[1]))
        hk1 = dd.dd_add(*hk, *dd.dd_div_d(1.0, 0.0, float(k + 1)))
        y1s = dd.cdd_add(y1s, dd.cdd_mul_dd(u, *dd.dd_add(*hk, *hk1)))
    j1 = dd.cdd_mul(half, j1s)
    lg4 = dd.cdd_log(half)
    lg4 = (*dd.dd_add(lg4[0], lg4[1], dd.EULER_HI, dd.EULER_LO), lg4[2], lg4[3])
    two_over_pi = dd.dd_div(2.0, 0.0, dd.PI_HI, dd.PI_LO)
    neg_inv_pi = dd.dd_div(-1.0, 0.0, dd.PI_HI, dd.PI_LO)
    y0 = dd.cdd_mul_dd(dd.cdd_add(dd.cdd_mul(lg4, j0), y0s), *two_over_pi)
    # Y1 = (2/pi)(L+g)J1 - 2/(pi z) - (1/pi)(z/2) y1s
    t1 = dd.cdd_mul_dd(dd.cdd_mul(lg4, j1), *two_over_pi)
    t2 = dd.cdd_mul_dd(dd.cdd_mul_d(_cdd_recip(z4), 2.0), *neg_inv_pi)
    t3 = dd.cdd_mul_dd(dd.cdd_mul(half, y1s), *neg_inv_pi)
    y1 = dd.cdd_add(dd.cdd_add(t1, t2), t3)
    h0 = dd.cdd_add(j0, _cdd_mul_i(y0, sgn))
    h1 = dd.cdd_add(j1, _cdd_mul_i(y1, sgn))
    return dd.cdd_to_complex(h0), dd.cdd_to_complex(h1)


def _asym_h_pair(z, nu, kind):
    """Scaled H^(kind)_nu(z) by the large-argument expansion (nu in {0,1})."""
    sgn = 1.0 if kind == 1 else -1.0
    t = -sgn * z.imag / dd.LN2_HI
    e = np.floor(t)
    mant = np.exp(1j * sgn * z.real + (t - e) * dd.LN2_HI)
    pref = np.sqrt(2.0 / (math.pi * z)) * np.exp(-1j * sgn * (nu * math.pi / 2.0 + math.pi / 4.0))
    s = np.ones_like(z)
    term = np.ones_like(z)
    frozen = np.zeros(z.shape, dtype=bool)
    last = np.abs(term)
    for k in range(1, 46):
        term = term * (sgn * 1j) * (4.0 * nu * nu - (2 * k - 1) ** 2) / (8.0 * z * k)
        a = np.abs(term)
        frozen = frozen | (a > last) | (a < 1e-18 * np.abs(s))
        s = np.where(frozen, s, s + term)
        last = a
    return mant * pref * s, e.astype(np.int64)


class _Pass:
    __slots__ = ("snaps", "all_m", "all_e", "acc", "f0", "f1", "E",
                 "fnorm_m", "fnorm_e", "sy", "syp")


def _down_pass(z, Nstart, nmax, orders, nu0, want_ysums, phase, cpos, cneg, want_sum):
    """Downward Miller pass. Returns unnormalised f snapshots/accumulators."""
    B = z.shape[0]
    fp = np.zeros(B, dtype=np.complex128)   # f_{n+1}
    fc = np.ones(B, dtype=np.complex128)    # f_n
    E = np.zeros(B, dtype=np.int64)
    out = _Pass()
    out.snaps = {}
    out.all_m = out.all_e = None
    store_all = orders == "all"
    if store_all:
        out.all_m = np.zeros((B, nmax + 1), dtype=np.complex128)
        out.all_e = np.zeros((B, nmax + 1), dtype=np.int64)
        order_set = ()
    else:
        order_set = tuple(sorted(set(orders or ())))
        for n in order_set:
            out.snaps[n] = (np.zeros(B, dtype=np.complex128), np.zeros(B, dtype=np.int64))
    if nu0 is not None:
        out.fnorm_m = np.zeros(B, dtype=np.complex128)
        out.fnorm_e = np.zeros(B, dtype=np.int64)
    sy = np.zeros(B, dtype=np.complex128)
    syp = np.zeros(B, dtype=np.complex128)
    acc = np.zeros(B, dtype=np.complex128) if want_sum else None
    if want_sum:
        pw = phase ** nmax
        ipw = np.conj(pw)  # |phase| = 1: conj inverts
    inv_z = 1.0 / z
    e_at_1 = E
    for n in range(Nstart, -1, -1):
        if store_all and n <= nmax:
            out.all_m[:, n] = fc
            out.all_e[:, n] = E
        elif n in order_set:
            sm, se = out.snaps[n]
            sm[:] = fc
            se[:] = E
        if nu0 is not None:
            hit = nu0 == n
            if np.any(hit):
                out.fnorm_m = np.where(hit, fc, out.fnorm_m)
                out.fnorm_e = np.where(hit, E, out.fnorm_e)
        if want_ysums:
            if n >= 2 and n % 2 == 0:
                m = n // 2
                sy = sy + ((-1.0) ** m / m) * fc
            elif n % 2 == 1:
                mp1 = (n + 1) // 2
                c = ((-1.0) ** mp1) / (n + 1.0)
                if n >= 3:
                    mm1 = (n - 1) // 2
                    c -= ((-1.0) ** mm1) / (n - 1.0)
                syp = syp + c * fc
        if want_sum and n <= nmax:
            w = cpos[n] * pw
            if n > 0:
                w = w + cneg[n] * ipw
            acc = acc + fc * w
            pw = pw * np.conj(phase)
            ipw = ipw * phase
        if n == 1:
            out.f1 = fc.copy()
            e_at_1 = E.copy()
        if n == 0:
            out.f0 = fc
            out.E = E
            break
        fn = (2.0 * n) * inv_z * fc - fp
        fp, fc = fc, fn
        big = np.abs(fc) > RENORM
        if np.any(big):
            sc = np.where(big, SCALE_DOWN, 1.0)
            fc = fc * sc
            fp = fp * sc
            sy = sy * sc
            syp = syp * sc
            if want_sum:
                acc = acc * sc
            E = np.where(big, E + SHIFT, E)
    # express f1 at the final exponent basis (captured one step before f0)
    out.f1 = _ldexp_c(out.f1, np.minimum(e_at_1 - out.E, 0))
    out.sy = sy
    out.syp = syp
    out.acc = acc
    return out


def _up_pass(z, h0, h1, e_seed, nmax, orders, phase, cpos, cneg, want_sum):
    """Stable upward recurrence from double seeds at orders 0, 1.

    True values are seed * 2^e_seed; snapshots/sums fold e_seed back in.
    """
    B = z.shape[0]
    hp = np.asarray(h0, dtype=np.complex128).copy()  # h_{n-1}
    hc = np.asarray(h1, dtype=np.complex128).copy()  # h_n
    E = e_seed.astype(np.int64).copy()
    out = _Pass()
    out.snaps = {}
    out.all_m = out.all_e = None
    store_all = orders == "all"
    if store_all:
        out.all_m = np.zeros((B, nmax + 1), dtype=np.complex128)
        out.all_e = np.zeros((B, nmax + 1), dtype=np.int64)
        out.all_m[:, 0] = hp
        out.all_e[:, 0] = E
        order_set = ()
    else:
        order_set = tuple(sorted(set(orders or ())))
        for n in order_set:
            out.snaps[n] = (np.zeros(B, dtype=np.complex128), np.zeros(B, dtype=np.int64))
        if 0 in order_set:
            out.snaps[0][0][:] = hp
            out.snaps[0][1][:] = E
    acc = None
    if want_sum:
        acc = cpos[0] * _ldexp_c(hp, E)
        pw = phase.copy()
        ipw = np.conj(phase)
    inv_z = 1.0 / z
    n = 1
    while True:
        if store_all and n <= nmax:
            out.all_m[:, n] = hc
            out.all_e[:, n] = E
        elif n in order_set:
            sm, se = out.snaps[n]
            sm[:] = hc
            se[:] = E
        if want_sum and n <= nmax:
            hval = _ldexp_c(hc, E)
            acc = acc + hval * (cpos[n] * pw + cneg[n] * ipw)
            pw = pw * phase
            ipw = ipw * np.conj(phase)
        if n >= nmax:
            break
        hn = (2.0 * n) * inv_z * hc - hp
        hp, hc = hc, hn
        am = np.abs(hc)
        big = am > RENORM
        sml = (am > 0) & (am < RENORM_INV)
        if np.any(big) or np.any(sml):
            sc = np.where(big, SCALE_DOWN, np.where(sml, SCALE_UP, 1.0))
            hc = hc * sc
            hp = hp * sc
            E = np.where(big, E + SHIFT, np.where(sml, E - SHIFT, E))
        n += 1
    out.acc = acc
    return out


def _drive_one(z, nmax, orders_j, orders_h, regime, reflected, phase, cpos, cneg, sum_kind):
    """Process one uniform subset. reflected=True: carry H2, return H1 = 2J - H2."""
    az = np.abs(z)
    need_h = orders_h is not None or sum_kind == "h"
    need_j_out = orders_j is not None or sum_kind == "j" or (need_h and reflected)
    kind = 2 if reflected else 1
    B = z.shape[0]
    # J orders needed for reflected-H assembly
    orders_j_eff = orders_j
    if need_h and reflected and orders_j != "all":
        extra = set(orders_j or ())
        if orders_h == "all":
            orders_j_eff = "all"
        else:
            extra |= set(orders_h or ())
            orders_j_eff = sorted(extra)
    want_jsum = sum_kind == "j" or (sum_kind == "h" and reflected)
    if regime == "A":
        nu0 = np.ceil(az * az / 4.0).astype(np.int64) + 2
        ny = az.astype(np.int64) + 36
        Nstart = int(max(nmax, int(nu0.max()), int(ny.max())) + PAD_A)
        down = _down_pass(z, Nstart, nmax, orders_j_eff, nu0, need_h,
                          phase, cpos, cneg, want_jsum)
        sm, se = _series_jnu(z, nu0)
        lam_m = sm / down.fnorm_m
        lam_e = se - down.fnorm_e
        if need_h:
            lam_full = _ldexp_c(lam_m, lam_e + down.E)
            j0 = down.f0 * lam_full
            j1 = down.f1 * lam_full
            ln_term = np.log(z * 0.5) + dd.EULER_HI
            y0 = (2.0 / math.pi) * (ln_term * j0 - 2.0 * down.sy * lam_full)
            y0p = (2.0 / math.pi) * (-ln_term * j1 + j0 / z - 2.0 * down.syp * lam_full)
            sgn = 1.0 if kind == 1 else -1.0
            h0 = j0 + sgn * 1j * y0
            h1 = j1 - sgn * 1j * y0p
            corner = (np.abs(z.imag) > DD_IM_MIN) & (az > 2.0)
            if np.any(corner):
                c0, c1 = _dd_h_seeds(z[corner], kind)
                h0[corner] = c0
                h1[corner] = c1
            e_seed = np.zeros(B, dtype=np.int64)
    else:
        pad = np.ceil(az + 10.0 * (az / 2.0) ** (1.0 / 3.0) + 12.0)
        Nstart = int(max(nmax + 30, int(pad.max())))
        down = _down_pass(z, Nstart, nmax, orders_j_eff, None, False,
                          phase, cpos, cneg, want_jsum)
        h10m, h10e = _asym_h_pair(z, 0, 1)
        h11m, h11e = _asym_h_pair(z, 1, 1)
        h20m, h20e = _asym_h_pair(z, 0, 2)
        h21m, h21e = _asym_h_pair(z, 1, 2)
        j0m, j0e = _combine(h10m, h10e, h20m, h20e)
        j0m = j0m * 0.5
        j1m, j1e = _combine(h11m, h11e, h21m, h21e)
        j1m = j1m * 0.5
        a0 = np.abs(j0m)
        a1 = np.abs(j1m)
        with np.errstate(divide="ignore", invalid="ignore"):
            s0 = np.where(a0 > 0, np.log2(a0, where=a0 > 0, out=np.zeros_like(a0)) + j0e, -np.inf)
            s1 = np.where(a1 > 0, np.log2(a1, where=a1 > 0, out=np.zeros_like(a1)) + j1e, -np.inf)
        use0 = s0 >= s1
        lam_m = np.where(use0, j0m, j1m) / np.where(use0, down.f0, down.f1)
        lam_e = np.where(use0, j0e, j1e) - down.E
        if need_h:
            if kind == 1:
                sm0, se0, sm1, se1 = h10m, h10e, h11m, h11e
            else:
                sm0, se0, sm1, se1 = h20m, h20e, h21m, h21e
            e_seed = np.maximum(se0, se1)
            h0 = _ldexp_c(sm0, se0 - e_seed)
            h1 = _ldexp_c(sm1, se1 - e_seed)

    part = {"z": z, "reflected": reflected}

    def j_pair(n):
        if orders_j_eff == "all":
            return _renorm_pair(down.all_m[:, n] * lam_m, down.all_e[:, n] + lam_e)
        sm_, se_ = down.snaps[n]
        return _renorm_pair(sm_ * lam_m, se_ + lam_e)

    part["j_pair"] = j_pair
    if orders_j == "all" or (orders_j_eff == "all" and orders_j is not None):
        jm = down.all_m * lam_m[:, None]
        je = down.all_e + lam_e[:, None]
        part["j_all"] = _renorm_pair(jm, je)
    if sum_kind == "j":
        part["j_acc"] = _to_double(*_renorm_pair(down.acc * lam_m, down.E + lam_e), "field sum")
    if need_h:
        up = _up_pass(z, h0, h1, e_seed, nmax, orders_h, phase, cpos, cneg, sum_kind == "h")
        if not reflected:
            if orders_h == "all":
                part["h_all"] = (up.all_m, up.all_e)
            part["h_snaps"] = up.snaps
            if sum_kind == "h":
                part["h_acc"] = up.acc
        else:
            # H1 = 2 J - H2 per order
            if orders_h == "all":
                jm, je = part["j_all"] if "j_all" in part else _renorm_pair(
                    down.all_m * lam_m[:, None], down.all_e + lam_e[:, None])
                hm, he = _combine(2.0 * jm, je, -up.all_m, up.all_e)
                part["h_all"] = _renorm_pair(hm, he)
            part["h_snaps"] = {}
            for n, (sm_, se_) in up.snaps.items():
                jm_n, je_n = j_pair(n)
                part["h_snaps"][n] = _renorm_pair(*_combine(2.0 * jm_n, je_n, -sm_, se_))
            if sum_kind == "h":
                jsum = _to_double(*_renorm_pair(down.acc * lam_m, down.E + lam_e), "field sum")
                part["h_acc"] = 2.0 * jsum - up.acc
    return part


def _drive(z, nmax, orders_j, orders_h, phase=None, cpos=None, cneg=None, sum_kind=None):
    z = np.ascontiguousarray(z, dtype=np.complex128)
    az = np.abs(z)
    small = az <= Z_SWITCH
    refl = z.imag < -DD_IM_MIN
    parts = []
    for mask, regime, reflected in (
        (small & ~refl, "A", False),
        (small & refl, "A", True),
        (~small & ~refl, "B", False),
        (~small & refl, "B", True),
    ):
        if not np.any(mask):
            continue
        ph = phase[mask] if phase is not None else None
        parts.append((mask, _drive_one(z[mask], nmax, orders_j, orders_h,
                                       regime, reflected, ph, cpos, cneg, sum_kind)))
    return parts


def cyl_scaled(nmax, z):
    """All orders 0..nmax at scalar z: (jm, je, jpm, jpe, hm, he, hpm, hpe)."""
    if nmax == 0:
        return tuple(a[:1] for a in cyl_scaled(1, z))
    zz = np.array([z], dtype=np.complex128)
    (_, part), = _drive(zz, nmax, "all", "all")
    jm, je = part["j_all"]
    hm, he = part["h_all"]
    jm, je, hm, he = jm[0].copy(), je[0].copy(), hm[0].copy(), he[0].copy()
    n_over_z = np.arange(nmax + 1) / complex(z)
    jpm = np.empty_like(jm)
    jpe = np.empty_like(je)
    hpm = np.empty_like(hm)
    hpe = np.empty_like(he)
    jpm[1:], jpe[1:] = _combine(jm[:-1], je[:-1], -n_over_z[1:] * jm[1:], je[1:])
    hpm[1:], hpe[1:] = _combine(hm[:-1], he[:-1], -n_over_z[1:] * hm[1:], he[1:])
    jpm[0], jpe[0] = -jm[1], je[1]
    hpm[0], hpe[0] = -hm[1], he[1]
    jm, je = _canon(jm, je)
    jpm, jpe = _canon(jpm, jpe)
    hm, he = _canon(hm, he)
    hpm, hpe = _canon(hpm, hpe)
    return jm, je, jpm, jpe, hm, he, hpm, hpe


def cyl_pair_batch(nu, z, need_h=True):
    """(J_nu, J'_nu, H1_nu, H1'_nu) over a batch of z, unscaled doubles.

    With need_h=False the Hankel family is skipped entirely (None in its
    slots); J-only callers avoid both the cost and the overflow of H at
    high order / small argument.
    """
    z = np.ascontiguousarray(z, dtype=np.complex128)
    flat = z.ravel()
    nmax = max(nu, 1)
    orders = [nu - 1, nu] if nu >= 1 else [0, 1]
    j = np.empty(flat.shape, dtype=np.complex128)
    jp = np.empty_like(j)
    h = np.empty_like(j) if need_h else None
    hp = np.empty_like(j) if need_h else None
    for mask, part in _drive(flat, nmax, orders, orders if need_h else None):
        zi = flat[mask]
        j_pair = part["j_pair"]
        hs = part.get("h_snaps")
        if nu >= 1:
            jm_n, je_n = j_pair(nu)
            jm_p, je_p = j_pair(nu - 1)
            j[mask] = _to_double(jm_n, je_n, "J")
            dm, de = _combine(jm_p, je_p, -(nu / zi) * jm_n, je_n)
            jp[mask] = _to_double(dm, de, "J'")
            if need_h:
                hm_n, he_n = hs[nu]
                hm_p, he_p = hs[nu - 1]
                h[mask] = _to_double(hm_n, he_n, "H1")
                dm, de = _combine(hm_p, he_p, -(nu / zi) * hm_n, he_n)
                hp[mask] = _to_double(dm, de, "H1'")
        else:
            j[mask] = _to_double(*j_pair(0), "J")
            jp[mask] = -_to_double(*j_pair(1), "J'")
            if need_h:
                h[mask] = _to_double(*hs[0], "H1")
                hp[mask] = -_to_double(*hs[1], "H1'")
    return (j.reshape(z.shape), jp.reshape(z.shape),
            h.reshape(z.shape) if need_h else None,
            hp.reshape(z.shape) if need_h else None)


def cyl_phase_sum(use_hankel, nmax, z, phase, cpos, cneg):
    """sum_{n<=nmax} Z_n(z_p) (cpos[n] phase_p^n + cneg[n] phase_p^-n), per point."""
    z = np.ascontiguousarray(z, dtype=np.complex128)
    phase = np.ascontiguousarray(phase, dtype=np.complex128)
    cpos = np.ascontiguousarray(cpos, dtype=np.complex128)
    cneg = np.ascontiguousarray(cneg, dtype=np.complex128)
    out = np.zeros(z.shape, dtype=np.complex128)
    kind = "h" if use_hankel else "j"
    for mask, part in _drive(z, nmax, None, None,
                             phase=phase, cpos=cpos, cneg=cneg, sum_kind=kind):
        out[mask] = part["h_acc"] if use_hankel else part["j_acc"]
    if not np.all(np.isfinite(out)):
        raise RangeError("phase sum overflowed double range")
    return out
