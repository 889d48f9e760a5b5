"""Complex-argument cylinder functions and Airy zeros.

Self-contained evaluation of J_nu, H^(1)_nu and their derivatives for
integer orders |nu| <= 1e4 and complex argument, plus the zeros of
Ai(-x). Accuracy is validated for |z| <= 1e3 within the wedge
|Im z| <= |Re z|; see the kernel backends for the algorithm regimes.
"""
import functools
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._kernels import _dd as dd
from .errors import AccuracyLossError, DomainError, SingularityError

NU_MAX = 10_000
Z_VALIDATED = 1.0e3

BACKEND = _kernels.BACKEND


@dataclass(frozen=True)
class CylinderEval:
    """J, J', H^(1), H^(1)' at one (order, argument) pair."""
    order: int
    argument: complex
    j: complex
    jp: complex
    h1: complex
    h1p: complex


@dataclass(frozen=True)
class AiryZeroTable:
    """First zeros alpha_m of Ai(-x), strictly increasing."""
    zeros: tuple

    def __len__(self):
        return len(self.zeros)

    def __getitem__(self, i):
        return self.zeros[i]


def _check_z(z, allow_zero):
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"non-finite argument {z!r}")
    if z == 0 and not allow_zero:
        raise SingularityError("Hankel functions are singular at z = 0")
    if abs(z) > Z_VALIDATED:
        raise AccuracyLossError(
            f"|z| = {abs(z):.3g} outside the validated region |z| <= {Z_VALIDATED:g}",
            estimate=1e-16 * abs(z),
        )
    return z


def _check_nu(nu):
    nu = int(nu)
    if abs(nu) > NU_MAX:
        raise DomainError(f"|nu| = {abs(nu)} exceeds the supported {NU_MAX}")
    return nu


def cyl_orders_scaled(nmax, z):
    """Scaled (mantissa, 2**exponent) arrays of J, J', H1, H1' for orders 0..nmax."""
    z = _check_z(z, allow_zero=False)
    if nmax < 0:
        raise DomainError("nmax must be >= 0")
    if nmax > NU_MAX:
        raise DomainError(f"nmax exceeds the supported {NU_MAX}")
    return _kernels.cyl_scaled(nmax, z)


def cyl_orders(nmax, z):
    """Unscaled (j, jp, h1, h1p) arrays for orders 0..nmax (flush/raise on range)."""
    from ._kernels._cyl_py import _to_double
    jm, je, jpm, jpe, hm, he, hpm, hpe = cyl_orders_scaled(nmax, z)
    return (_to_double(jm, je, "J"), _to_double(jpm, jpe, "J'"),
            _to_double(hm, he, "H1"), _to_double(hpm, hpe, "H1'"))


def cylinder_eval(nu, z) -> CylinderEval:
    """Bundled J, J', H^(1), H^(1)' at integer order nu (any sign)."""
    nu = _check_nu(nu)
    z = _check_z(z, allow_zero=False)
    n = abs(nu)
    j, jp, h1, h1p = (a[n] for a in cyl_orders(n, z))
    if nu < 0 and n % 2 == 1:
        j, jp, h1, h1p = -j, -jp, -h1, -h1p
    return CylinderEval(order=nu, argument=z, j=complex(j), jp=complex(jp),
                        h1=complex(h1), h1p=complex(h1p))


def bessel_j(nu, z) -> complex:
    """J_nu(z) for integer nu."""
    nu = _check_nu(nu)
    z = _check_z(z, allow_zero=True)
    if z == 0:
        return 1.0 + 0.0j if nu == 0 else 0.0 + 0.0j
    return cylinder_eval(nu, z).j


def hankel1(nu, z) -> complex:
    """H^(1)_nu(z) = J_nu(z) + i Y_nu(z) for integer nu."""
    nu = _check_nu(nu)
    z = _check_z(z, allow_zero=False)
    return cylinder_eval(nu, z).h1


def pair_batch(nu, z_array, need_h=True):
    """(J_nu, J'_nu, H1_nu, H1'_nu) over an array of arguments.

    need_h=False skips the Hankel family (its slots return None).
    """
    nu = _check_nu(nu)
    z_array = np.asarray(z_array, dtype=np.complex128)
    if not np.all(np.isfinite(z_array)):
        raise DomainError("non-finite argument in batch")
    if np.any(z_array == 0):
        raise SingularityError("batch contains z = 0")
    if np.any(np.abs(z_array) > Z_VALIDATED):
        raise AccuracyLossError("batch argument outside validated |z| <= 1e3",
                                estimate=1e-16 * float(np.max(np.abs(z_array))))
    j, jp, h, hp = _kernels.cyl_pair_batch(abs(nu), z_array, need_h)
    if nu < 0 and nu % 2 != 0:
        return -j, -jp, (-h if need_h else None), (-hp if need_h else None)
    return j, jp, h, hp


def phase_sum(use_hankel, nmax, z_array, phase, cpos, cneg):
    """Accumulated modal sum over points; see kernel docstring."""
    return _kernels.cyl_phase_sum(use_hankel, nmax, z_array, phase, cpos, cneg)


# ----------------------------------------------------------------------
# Airy Ai on the negative real axis and its zeros
# ----------------------------------------------------------------------

_AI_SWITCH = 9.0


def _ai_neg_series(x):
    """(Ai(-x), Ai'(-x)) by the double-double Maclaurin series, 0 <= x <= 9."""
    z = -x
    z3 = dd.dd_mul(*dd.dd_mul(z, 0.0, z, 0.0), z, 0.0)
    f = (1.0, 0.0)
    tf = (1.0, 0.0)
    g = (z, 0.0)
    tg = (z, 0.0)
    fp = (0.0, 0.0)   # f'(z) = sum t_k 3k / z
    gp = (1.0, 0.0)   # g'(z) = sum u_k (3k+1) / z
    for k in range(1, 70):
        tf = dd.dd_mul(*dd.dd_mul(*tf, *z3), *dd.dd_div_d(1.0, 0.0, float((3 * k) * (3 * k - 1))))
        f = dd.dd_add(*f, *tf)
        tg = dd.dd_mul(*dd.dd_mul(*tg, *z3), *dd.dd_div_d(1.0, 0.0, float((3 * k + 1) * (3 * k))))
        g = dd.dd_add(*g, *tg)
        if z != 0.0:
            fp = dd.dd_add(*fp, *dd.dd_mul_d(*dd.dd_div_d(*tf, z), 3.0 * k))
            gp = dd.dd_add(*gp, *dd.dd_mul_d(*dd.dd_div_d(*tg, z), 3.0 * k + 1.0))
        if abs(tf[0]) < 1e-40 and abs(tg[0]) < 1e-40:
            break
    c1h, c1l = 0.3550280538878172, 2.05233632436212e-17
    c2h, c2l = 0.2588194037928068, -2.522243111610832e-17
    ai = dd.dd_sub(*dd.dd_mul(c1h, c1l, *f), *dd.dd_mul(c2h, c2l, *g))
    aip = dd.dd_sub(*dd.dd_mul(c1h, c1l, *fp), *dd.dd_mul(c2h, c2l, *gp))
    return float(ai[0] + ai[1]), float(aip[0] + aip[1])


def _ai_neg_asym(x):
    """(Ai(-x), Ai'(-x)) by the oscillatory asymptotic expansion, x > 9."""
    zeta = (2.0 / 3.0) * x ** 1.5
    cs = [1.0]
    for k in range(1, 26):
        cs.append(cs[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k))
    ds = [1.0] + [-cs[k] * (6 * k + 1) / (6 * k - 1) for k in range(1, 26)]

    def alt_sum(coefs, start):
        s = 0.0
        term_prev = math.inf
        for i, k in enumerate(range(start, 52, 2)):
            if k >= len(coefs):
                break
            t = (-1.0) ** i * coefs[k] / zeta ** k
            if abs(t) > term_prev:
                break
            s += t
            term_prev = abs(t)
        return s

    se, so = alt_sum(cs, 0), alt_sum(cs, 1)
    de, do = alt_sum(ds, 0), alt_sum(ds, 1)
    sn = math.sin(zeta + math.pi / 4)
    cn = math.cos(zeta + math.pi / 4)
    ai = (sn * se - cn * so) / (math.sqrt(math.pi) * x ** 0.25)
    aip = -(cn * de + sn * do) * x ** 0.25 / math.sqrt(math.pi)
    return ai, aip


def airy_ai_neg(x):
    """(Ai(-x), d/dz Ai(z)|_{z=-x}) for real x >= 0."""
    x = float(x)
    if not math.isfinite(x) or x < 0:
        raise DomainError("airy_ai_neg requires finite x >= 0")
    if x <= _AI_SWITCH:
        return _ai_neg_series(x)
    return _ai_neg_asym(x)


@functools.lru_cache(maxsize=None)
def _airy_zero_cached(m):
    """m-th zero of Ai(-x) (m >= 1) by seeded bisection + Newton."""
    t = 3.0 * math.pi * (4 * m - 1) / 8.0
    seed = t ** (2.0 / 3.0) * (1.0 + 5.0 / 48.0 / t ** 2 - 5.0 / 36.0 / t ** 4)
    lo, hi = seed - 0.05, seed + 0.05
    flo = airy_ai_neg(lo)[0]
    fhi = airy_ai_neg(hi)[0]
    widen = 0
    while flo * fhi > 0:
        lo -= 0.05
        hi += 0.05
        flo = airy_ai_neg(lo)[0]
        fhi = airy_ai_neg(hi)[0]
        widen += 1
        if widen > 8:
            raise AccuracyLossError(f"failed to bracket Airy zero m={m}")
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        fm = airy_ai_neg(mid)[0]
        if flo * fm <= 0:
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
        if hi - lo < 1e-3:
            break
    x = 0.5 * (lo + hi)
    for _ in range(60):
        a, ap = airy_ai_neg(x)
        step = a / (-ap)  # d/dx Ai(-x) = -Ai'(-x)
        x -= step
        if abs(step) < 1e-14 * max(1.0, abs(x)):
            break
    return x


def airy_zeros(count) -> AiryZeroTable:
    """First `count` zeros of Ai(-x), each correct to well below 1e-10."""
    count = int(count)
    if count < 1 or count > 100:
        raise DomainError("count must be in 1..100")
    return AiryZeroTable(zeros=tuple(_airy_zero_cached(m) for m in range(1, count + 1)))
