"""Independent extended-precision oracles (50+ digit series summation).

These deliberately avoid the library's algorithms: plain Maclaurin /
log-series summation in mpmath arbitrary-precision arithmetic, with the
digamma-form Y series. Used to freeze expected values and to bound the
production evaluators' error.
"""
import mpmath as mp


def besselj_series(n, z, dps=50):
    with mp.workdps(dps):
        n = int(n)
        sgn = 1
        if n < 0:
            n = -n
            sgn = -1 if n % 2 else 1
        z = mp.mpc(z)
        term = (z / 2) ** n / mp.factorial(n)
        total = mp.mpc(0)
        for m in range(500):
            total += term
            term *= -(z / 2) ** 2 / ((m + 1) * (m + 1 + n))
            if abs(term) < abs(total) * mp.mpf(10) ** (-dps - 10) and m > 4:
                break
        return sgn * total


def bessely_series(n, z, dps=50):
    with mp.workdps(dps):
        n = int(n)
        sgn = 1
        if n < 0:
            n = -n
            sgn = -1 if n % 2 else 1
        z = mp.mpc(z)
        g = mp.euler

        def psi(m):
            return -g + mp.fsum([mp.mpf(1) / j for j in range(1, m)])

        s1 = mp.mpc(0)
        for m in range(n):
            s1 += mp.factorial(n - m - 1) / mp.factorial(m) * (z * z / 4) ** m
        s1 *= -((z / 2) ** (-n)) / mp.pi
        s2 = (2 / mp.pi) * mp.log(z / 2) * besselj_series(n, z, dps)
        s3 = mp.mpc(0)
        pref = (z / 2) ** n
        for m in range(500):
            t = (psi(m + 1) + psi(n + m + 1)) * (-(z * z / 4)) ** m \
                / (mp.factorial(m) * mp.factorial(n + m))
            s3 += t
            if m > 4 and abs(t * pref) < mp.mpf(10) ** (-dps - 10):
                break
        s3 *= -pref / mp.pi
        return sgn * (s1 + s2 + s3)


def hankel1_series(n, z, dps=50):
    with mp.workdps(dps):
        return besselj_series(n, z, dps) + mp.mpc(0, 1) * bessely_series(n, z, dps)


def besselj_deriv(n, z, dps=50):
    with mp.workdps(dps):
        return (besselj_series(n - 1, z, dps) - besselj_series(n + 1, z, dps)) / 2


def hankel1_deriv(n, z, dps=50):
    with mp.workdps(dps):
        return (hankel1_series(n - 1, z, dps) - hankel1_series(n + 1, z, dps)) / 2


def airy_ai_series(x, dps=None):
    """Ai(x) by the Maclaurin series at adaptive precision (any real x)."""
    xf = float(x)
    if dps is None:
        dps = 60 + int(0.3 * abs(xf) ** 1.5)
    with mp.workdps(dps):
        x = mp.mpf(x)
        c1 = mp.mpf(3) ** mp.mpf("-2/3") / mp.gamma(mp.mpf(2) / 3)
        c2 = mp.mpf(3) ** mp.mpf("-1/3") / mp.gamma(mp.mpf(1) / 3)
        f = mp.mpf(1)
        tf = mp.mpf(1)
        g = x
        tg = x
        for kk in range(1, 2000):
            tf = tf * x ** 3 / ((3 * kk) * (3 * kk - 1))
            tg = tg * x ** 3 / ((3 * kk + 1) * (3 * kk))
            f += tf
            g += tg
            if abs(tf) < mp.mpf(10) ** (-dps - 10) and abs(tg) < mp.mpf(10) ** (-dps - 10):
                break
        return c1 * f - c2 * g


def airy_zero(m):
    """m-th zero of Ai(-x) by bisection on the Maclaurin oracle."""
    t = 3 * mp.pi * (4 * m - 1) / 8
    seed = float(t ** mp.mpf("2/3"))
    half = 0.2 if m <= 3 else 0.02  # the bare t^{2/3} seed is this accurate
    lo, hi = seed - half, seed + half
    flo = airy_ai_series(-lo)
    fhi = airy_ai_series(-hi)
    assert flo * fhi < 0, f"oracle bracket failed for m={m}"
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        fm = airy_ai_series(-mid)
        if flo * fm <= 0:
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
        if hi - lo < 1e-13 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def besselj_sq_integral(nu, k, dps=50):
    """int_0^1 J_nu(k r)^2 r dr = (1/2)(J_nu(k)^2 - J_{nu-1}(k) J_{nu+1}(k))."""
    with mp.workdps(dps):
        jn = besselj_series(nu, k, dps)
        return (jn * jn - besselj_series(nu - 1, k, dps) * besselj_series(nu + 1, k, dps)) / 2
