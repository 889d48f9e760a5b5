"""Double-double (~31 decimal digit) compensated arithmetic, numpy-elementwise.

Used only to seed Hankel values in the wedge corner (moderate |z| with
sizeable Im z) where forming J + iY in plain doubles loses ~e^{2 Im z}
relative accuracy, and for the Airy Maclaurin series near its cancellation
limit. Every value is an unevaluated sum hi + lo with |lo| <= ulp(hi)/2.

All routines accept numpy arrays or python floats and are branch-free, so
the same code serves scalar and batched callers.
"""
import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1

LN2_HI, LN2_LO = 0.6931471805599453, 2.3190468138462996e-17
PI_HI, PI_LO = 3.141592653589793, 1.2246467991473532e-16
PI_2_HI, PI_2_LO = 1.5707963267948966, 6.123233995736766e-17
EULER_HI, EULER_LO = 0.5772156649015329, -4.942915152430645e-18


def two_sum(a, b):
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def quick_two_sum(a, b):
    # requires |a| >= |b|
    s = a + b
    e = b - (s - a)
    return s, e


def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def dd_add(ah, al, bh, bl):
    # accurate (ieee-style) dd + dd; robust under cancellation
    sh, se = two_sum(ah, bh)
    th, te = two_sum(al, bl)
    c = se + th
    vh, vl = quick_two_sum(sh, c)
    w = te + vl
    return quick_two_sum(vh, w)


def dd_neg(ah, al):
    return -ah, -al


def dd_sub(ah, al, bh, bl):
    return dd_add(ah, al, -bh, -bl)


def dd_mul(ah, al, bh, bl):
    p, e = two_prod(ah, bh)
    e = e + (ah * bl + al * bh)
    return quick_two_sum(p, e)


def dd_mul_d(ah, al, b):
    p, e = two_prod(ah, b)
    e = e + al * b
    return quick_two_sum(p, e)


def dd_div(ah, al, bh, bl):
    q1 = ah / bh
    rh, rl = dd_sub(ah, al, *dd_mul_d(bh, bl, q1))
    q2 = rh / bh
    rh, rl = dd_sub(rh, rl, *dd_mul_d(bh, bl, q2))
    q3 = rh / bh
    s, e = quick_two_sum(q1, q2)
    return dd_add(s, e, q3, np.zeros_like(q3) if isinstance(q3, np.ndarray) else 0.0)


def dd_div_d(ah, al, b):
    return dd_div(ah, al, b, np.zeros_like(ah) if isinstance(ah, np.ndarray) else 0.0)


def dd_sqrt(ah, al):
    y = np.sqrt(ah)
    qh, ql = dd_div(ah, al, y, np.zeros_like(y) if isinstance(y, np.ndarray) else 0.0)
    sh, sl = dd_add(qh, ql, y, np.zeros_like(y) if isinstance(y, np.ndarray) else 0.0)
    return dd_mul_d(sh, sl, 0.5)


def dd_ln(ah, al):
    """ln of a positive real dd value."""
    m, e = np.frexp(ah)
    big = m < 0.70710678118654752
    m = np.where(big, m * 2.0, m)
    e = np.where(big, e - 1, e)
    # rescale the low word consistently with the high word
    ml = np.ldexp(al, -e.astype(np.int64) if isinstance(e, np.ndarray) else -int(e))
    # t = (m - 1)/(m + 1); ln m = 2 atanh t
    nh, nl = dd_add(m, ml, -1.0, 0.0)
    dh, dl = dd_add(m, ml, 1.0, 0.0)
    th, tl = dd_div(nh, nl, dh, dl)
    t2h, t2l = dd_mul(th, tl, th, tl)
    sh = np.zeros_like(ah) if isinstance(ah, np.ndarray) else 0.0
    sl = sh
    # sum_{k>=0} t^{2k+1}/(2k+1), evaluated from the tail in
    ph, pl = th, tl
    terms = []
    for k in range(22):
        terms.append((ph, pl, 2 * k + 1))
        ph, pl = dd_mul(ph, pl, t2h, t2l)
    for ph_k, pl_k, den in reversed(terms):
        ch, cl = dd_div_d(ph_k, pl_k, float(den))
        sh, sl = dd_add(sh, sl, ch, cl)
    sh, sl = dd_mul_d(sh, sl, 2.0)
    eh, el = dd_mul_d(LN2_HI, LN2_LO, e * 1.0)
    return dd_add(sh, sl, eh, el)


def dd_atan(th, tl):
    """atan of a real dd with |t| <= 1 (callers reduce)."""
    # two half-angle reductions: atan t = 4 atan(t / (1 + sqrt(1 + t^2))) twice
    for _ in range(2):
        h2h, h2l = dd_mul(th, tl, th, tl)
        h2h, h2l = dd_add(h2h, h2l, 1.0, 0.0)
        rh, rl = dd_sqrt(h2h, h2l)
        rh, rl = dd_add(rh, rl, 1.0, 0.0)
        th, tl = dd_div(th, tl, rh, rl)
    t2h, t2l = dd_mul(th, tl, th, tl)
    sh = np.zeros_like(th) if isinstance(th, np.ndarray) else 0.0
    sl = sh
    ph, pl = th, tl
    terms = []
    for k in range(26):
        terms.append((ph, pl, 2 * k + 1, 1 if k % 2 == 0 else -1))
        ph, pl = dd_mul(ph, pl, t2h, t2l)
    for ph_k, pl_k, den, sgn in reversed(terms):
        ch, cl = dd_div_d(ph_k, pl_k, float(sgn * den))
        sh, sl = dd_add(sh, sl, ch, cl)
    return dd_mul_d(sh, sl, 4.0)


def dd_atan2(yh, yl, xh, xl):
    """atan2 for dd (x > 0 or y != 0; matches math.atan2 quadrants)."""
    swap = np.abs(yh) > np.abs(xh)
    nh = np.where(swap, xh, yh)
    nl = np.where(swap, xl, yl)
    dh = np.where(swap, yh, xh)
    dl = np.where(swap, yl, xl)
    th, tl = dd_div(nh, nl, dh, dl)
    ah, al = dd_atan(th, tl)
    # |y| > |x|: atan2 = sign(t)*pi/2 - atan(t) with t = x/y
    sgn = np.where(th >= 0, 1.0, -1.0)
    bh, bl = dd_add(sgn * PI_2_HI, sgn * PI_2_LO, -ah, -al)
    rh = np.where(swap, bh, ah)
    rl = np.where(swap, bl, al)
    # left half plane: add +/- pi
    neg = xh < 0
    sgn_y = np.where(yh >= 0, 1.0, -1.0)
    sh, sl = dd_add(rh, rl, sgn_y * PI_HI, sgn_y * PI_LO)
    rh = np.where(neg, sh, rh)
    rl = np.where(neg, sl, rl)
    return rh, rl


# ----- complex dd: tuples (re_hi, re_lo, im_hi, im_lo) -----

def cdd_from(z):
    re = np.real(z)
    im = np.imag(z)
    zero = np.zeros_like(re)
    return re + 0.0, zero + 0.0, im + 0.0, zero + 0.0


def cdd_add(a, b):
    rh, rl = dd_add(a[0], a[1], b[0], b[1])
    ih, il = dd_add(a[2], a[3], b[2], b[3])
    return rh, rl, ih, il


def cdd_mul(a, b):
    reh, rel = dd_sub(*dd_mul(a[0], a[1], b[0], b[1]), *dd_mul(a[2], a[3], b[2], b[3]))
    imh, iml = dd_add(*dd_mul(a[0], a[1], b[2], b[3]), *dd_mul(a[2], a[3], b[0], b[1]))
    return reh, rel, imh, iml


def cdd_mul_dd(a, bh, bl):
    rh, rl = dd_mul(a[0], a[1], bh, bl)
    ih, il = dd_mul(a[2], a[3], bh, bl)
    return rh, rl, ih, il


def cdd_mul_d(a, b):
    rh, rl = dd_mul_d(a[0], a[1], b)
    ih, il = dd_mul_d(a[2], a[3], b)
    return rh, rl, ih, il


def cdd_div_d(a, b):
    rh, rl = dd_div_d(a[0], a[1], b)
    ih, il = dd_div_d(a[2], a[3], b)
    return rh, rl, ih, il


def cdd_log(z4):
    """Principal log of a complex dd."""
    m2h, m2l = dd_add(*dd_mul(z4[0], z4[1], z4[0], z4[1]), *dd_mul(z4[2], z4[3], z4[2], z4[3]))
    lh, ll = dd_mul_d(*dd_ln(m2h, m2l), 0.5)
    th, tl = dd_atan2(z4[2], z4[3], z4[0], z4[1])
    return lh, ll, th, tl


def cdd_to_complex(z4):
    return (z4[0] + z4[1]) + 1j * (z4[2] + z4[3])
