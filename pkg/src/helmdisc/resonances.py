"""Complex zeros k_{nu,m} of F_nu(k) and resonance-family scans.

F_nu(k) = A_N sqrt(n_i) J'_nu(sqrt(n_i) k) H^(1)_nu(k) - H^(1)'_nu(k) J_nu(sqrt(n_i) k)

(the setting fixes a_i = a_o = n_o = A_D = 1). Zeros are found by a
real-axis |F| dip scan (n_i > 1: resonances hug the axis) or an
argument-principle rectangle subdivision (n_i <= 1: they sit O(1) deep),
refined by Newton with analytic derivative, and verified via the winding
number around an isolating box. The m index orders zeros by Re k.
"""
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from . import specfun
from .disc_solver import Params
from .errors import (AccuracyLossError, ConvergenceError, DomainError,
                     IsolationError, RangeError, ValidationError)

NEWTON_TOL = 1e-13
NEWTON_MAX = 100
WIND_NODES = 512
WIND_NODE_CAP = 16384
IM_NOISE = 1e-12  # |Im k| below this fraction of |k| straddles machine zero


@dataclass(frozen=True)
class Resonance:
    nu: int
    m: int
    k: complex
    residual: float
    newton_iters: int
    verified: bool


@dataclass(frozen=True)
class StripScan:
    resonances: List[Resonance]
    errors: List[Tuple[int, int, str]]
    max_im: float
    delta: float  # max_im = -delta; positive delta certifies a resonance-free strip


def _check_params(params: Params):
    for name, want in (("a_i", 1.0), ("a_o", 1.0), ("n_o", 1.0), ("A_D", 1.0)):
        if getattr(params, name) != want:
            raise ValidationError(
                f"resonance setting fixes a_i = a_o = n_o = A_D = 1; got {name}="
                f"{getattr(params, name)!r}")
    return params.n_i, params.A_N


def f_nu_scaled(nu: int, k: complex, n_i: float, A_N: float):
    """(F mantissa, exp2, F' mantissa, exp2); true F = m * 2**e."""
    if k == 0:
        raise DomainError("F_nu is singular at k = 0")
    s = math.sqrt(n_i)
    n = abs(int(nu))
    z1 = s * complex(k)
    z0 = complex(k)
    jm, je, jpm, jpe, _, _, _, _ = specfun.cyl_orders_scaled(n, z1)
    _, _, _, _, hm, he, hpm, hpe = specfun.cyl_orders_scaled(n, z0)
    j1, j1e = jm[n], int(je[n])
    jp1, jp1e = jpm[n], int(jpe[n])
    h0, h0e = hm[n], int(he[n])
    hp0, hp0e = hpm[n], int(hpe[n])
    # F = A_N s J'(z1) H(z0) - H'(z0) J(z1)
    e1 = jp1e + h0e
    e2 = hp0e + j1e
    E = max(e1, e2)
    fm = (A_N * s * jp1 * h0) * 2.0 ** (e1 - E) - (hp0 * j1) * 2.0 ** (e2 - E)
    # F' = A_N s [s J''(z1) H + J'(z1) H'] - [H''(z0) J(z1) + H'(z0) s J'(z1)]
    # X''(w) = (nu^2/w^2 - 1) X(w) - X'(w)/w
    jpp1 = (n * n / (z1 * z1) - 1.0) * j1 - jp1 / z1 * 2.0 ** (jp1e - j1e)
    jpp1e = j1e
    hpp0 = (n * n / (z0 * z0) - 1.0) * h0 - hp0 / z0 * 2.0 ** (hp0e - h0e)
    hpp0e = h0e
    t1, t1e = A_N * s * s * jpp1 * h0, jpp1e + h0e
    t2, t2e = A_N * s * jp1 * hp0, jp1e + hp0e
    t3, t3e = hpp0 * j1, hpp0e + j1e
    t4, t4e = hp0 * s * jp1, hp0e + jp1e
    Ep = max(t1e, t2e, t3e, t4e)
    fpm = (t1 * 2.0 ** (t1e - Ep) + t2 * 2.0 ** (t2e - Ep)
           - t3 * 2.0 ** (t3e - Ep) - t4 * 2.0 ** (t4e - Ep))
    return fm, E, fpm, Ep


def F_nu(params: Params, nu: int, k: complex) -> complex:
    """Value of F_nu(k) (unscaled; raises RangeError if outside double range)."""
    n_i, A_N = _check_params(params)
    fm, e, _, _ = f_nu_scaled(nu, k, n_i, A_N)
    am = abs(fm)
    if am > 0 and math.log2(am) + e > 1020:
        raise RangeError("F_nu exceeds double range; use f_nu_scaled")
    if e < -2000:
        return 0.0 + 0.0j
    return complex(fm) * 2.0 ** e


def _f_batch(nu: int, karr, n_i: float, A_N: float):
    """Vectorised (F, F') over a complex array of k; unscaled doubles."""
    s = math.sqrt(n_i)
    karr = np.asarray(karr, dtype=np.complex128)
    j1, jp1, _, _ = specfun.pair_batch(nu, s * karr)
    _, _, h0, hp0 = specfun.pair_batch(nu, karr)
    F = A_N * s * jp1 * h0 - hp0 * j1
    z1 = s * karr
    z0 = karr
    n = abs(int(nu))
    jpp1 = (n * n / (z1 * z1) - 1.0) * j1 - jp1 / z1
    hpp0 = (n * n / (z0 * z0) - 1.0) * h0 - hp0 / z0
    Fp = A_N * s * (s * jpp1 * h0 + jp1 * hp0) - (hpp0 * j1 + hp0 * s * jp1)
    return F, Fp


def seed_resonance(nu: int, m: int, n_i: float) -> complex:
    """Airy-asymptotic seed for k_{nu,m}: (nu + 2^{-1/3} alpha_m nu^{1/3})/sqrt(n_i)."""
    nu = int(nu)
    if nu < 1:
        raise DomainError("the Airy asymptotics require nu >= 1")
    alpha = specfun.airy_zeros(m)[m - 1]
    re = (nu + 2.0 ** (-1.0 / 3.0) * alpha * nu ** (1.0 / 3.0)) / math.sqrt(n_i)
    return complex(re, -1e-3)


def refine_resonance(nu: int, seed: complex, params: Params,
                     m: int = 0, max_iter: int = NEWTON_MAX) -> Resonance:
    """Newton on F_nu from `seed`, then argument-principle verification."""
    n_i, A_N = _check_params(params)
    k = complex(seed)
    trace = [k]
    step = math.inf
    iters = 0
    for iters in range(1, max_iter + 1):
        try:
            fm, e, fpm, ep = f_nu_scaled(nu, k, n_i, A_N)
            if fpm == 0:
                raise ConvergenceError(f"F' vanished at {k}", trace)
            dk = (fm / fpm) * 2.0 ** (e - ep)
        except AccuracyLossError:
            # numerical-derivative fallback
            d = 1e-7 * abs(k)
            f0 = F_nu(params, nu, k)
            fp = (F_nu(params, nu, k + d) - F_nu(params, nu, k - d)) / (2 * d)
            if fp == 0:
                raise ConvergenceError(f"numeric F' vanished at {k}", trace)
            dk = f0 / fp
        k = k - dk
        trace.append(k)
        step = abs(dk)
        if step < NEWTON_TOL * abs(k):
            break
    else:
        raise ConvergenceError(
            f"Newton did not converge for nu={nu} from seed {seed}", trace)
    fm, e, fpm, ep = f_nu_scaled(nu, k, n_i, A_N)
    am = abs(fm)
    residual = am * 2.0 ** e if (am == 0 or math.log2(max(am, 1e-300)) + e < 1000) else math.inf
    half = max(10.0 * step, IM_NOISE * abs(k))
    verified = False
    try:
        w = _winding_rect(nu, params, k.real - half, k.real + half,
                          k.imag - half, k.imag + half)
        verified = w == 1
    except (AccuracyLossError, IsolationError):
        verified = False
    return Resonance(nu=int(nu), m=int(m), k=k, residual=float(residual),
                     newton_iters=iters, verified=verified)


def _winding_rect(nu: int, params: Params, re_lo, re_hi, im_lo, im_hi,
                  nodes: int = WIND_NODES) -> int:
    """Winding number of F_nu around a rectangle, trapezoid rule on F'/F."""
    n_i, A_N = _check_params(params)
    while True:
        per = max(nodes // 4, 8)
        corners = [complex(re_lo, im_lo), complex(re_hi, im_lo),
                   complex(re_hi, im_hi), complex(re_lo, im_hi)]
        total = 0.0 + 0.0j
        for a, b in zip(corners, corners[1:] + corners[:1]):
            t = (np.arange(per) + 0.5) / per
            ks = a + (b - a) * t
            try:
                F, Fp = _f_batch(nu, ks, n_i, A_N)
                with np.errstate(divide="ignore", invalid="ignore"):
                    vals = Fp / F
                if not np.all(np.isfinite(vals)):
                    raise RangeError("winding integrand overflow")
            except (RangeError, AccuracyLossError):
                vals = np.empty(per, dtype=np.complex128)
                for i, kk in enumerate(ks):
                    fm, e, fpm, ep = f_nu_scaled(nu, kk, n_i, A_N)
                    vals[i] = (fpm / fm) * 2.0 ** (ep - e)
            total += np.sum(vals) * (b - a) / per
        w = total / (2j * math.pi)
        west = w.real
        if abs(west - round(west)) <= 0.01 and abs(w.imag) <= 0.01:
            return int(round(west))
        nodes *= 2
        if nodes > WIND_NODE_CAP:
            raise IsolationError(
                f"winding integral not settling (last {w:.4f}) for nu={nu}")


def _window(nu: int, m_max: int, n_i: float):
    sqn = math.sqrt(n_i)
    alpha = specfun.airy_zeros(max(m_max, 1))
    if nu >= 1:
        cub = nu ** (1.0 / 3.0)
        klo = max(0.05, (nu - 3.0 * cub - 2.0) / sqn)
        khi = (nu + 2.0 ** (-1.0 / 3.0) * alpha[m_max - 1] * cub
               + 0.2 * cub + 4.0 + math.pi) / sqn
    else:
        klo = 0.05
        khi = ((m_max + 0.75) * math.pi + 4.0) / sqn
    return klo, khi


def find_resonances(params: Params, nu: int, m_max: int,
                    family_depth: Optional[float] = None) -> List[Resonance]:
    """First m_max resonances of mode nu, ordered by Re k (m = 1..m_max).

    For n_i > 1 the enumeration follows the interior (whispering-gallery)
    family tracked by the Airy asymptotics: its members stay well above
    Im k = -1 at every order, while a second, strongly damped exterior
    family sits below Im k ~ -1.4 and is excluded (family_depth, default
    1.0 for n_i > 1, overridable). For n_i <= 1 there is a single family
    and no cut is applied.
    """
    n_i, A_N = _check_params(params)
    nu = abs(int(nu))
    if family_depth is None:
        family_depth = 1.0 if n_i > 1.0 else math.inf
    klo, khi = _window(nu, m_max, n_i)
    res = []
    for attempt in range(4):
        found = _find_by_rect(params, nu, m_max, klo, khi,
                              depth_cap=family_depth if math.isfinite(family_depth) else None)
        res = [r for r in found if r.k.imag >= -family_depth]
        if len(res) >= m_max:
            out = []
            for m, r in enumerate(res[:m_max], start=1):
                out.append(Resonance(nu=r.nu, m=m, k=r.k, residual=r.residual,
                                     newton_iters=r.newton_iters, verified=r.verified))
            return out
        khi += (khi - klo) * 0.6 + 2.0 / math.sqrt(n_i)
    raise ConvergenceError(
        f"found only {len(res)} of {m_max} resonances for nu={nu} in [{klo}, {khi}]")


def _find_by_rect(params: Params, nu: int, m_max: int, klo: float, khi: float,
                  depth0: Optional[float] = None, depth_cap: Optional[float] = None):
    """Argument-principle subdivision over a rectangle straddling the axis.

    The top edge sits slightly above the real axis: zeros only exist in the
    open lower half plane (uniqueness for Im k >= 0), so near-axis whisper
    zeros are enclosed, deep low-Q zeros as well. With depth_cap set the
    search stops a margin below the cap (family enumeration); otherwise the
    depth is doubled until the count stabilises at >= m_max.
    """
    n_i, A_N = _check_params(params)
    im_hi = 0.05
    count = prev = -1
    if depth_cap is not None:
        depth = 1.3 * depth_cap + 0.3
        used_depth = depth
        for _ in range(6):
            try:
                count = _winding_rect(nu, params, klo, khi, -depth, im_hi)
            except IsolationError:
                depth *= 0.97
                continue
            used_depth = depth
            break
    else:
        depth = depth0 if depth0 is not None else max(0.8, 4.0 / math.sqrt(n_i))
        used_depth = depth
        for _ in range(6):
            try:
                count = _winding_rect(nu, params, klo, khi, -depth, im_hi)
            except IsolationError:
                depth *= 0.97  # nudge the contour off a zero
                continue
            used_depth = depth
            if count == prev and count >= m_max:
                break  # stable under depth doubling
            prev = count
            depth *= 2.0
    boxes = [(klo, khi, -used_depth, im_hi, count)]
    found = []
    guard = 0
    while boxes and guard < 600:
        guard += 1
        a, b, c, d, cnt = boxes.pop()
        if cnt == 0:
            continue
        if cnt == 1:
            center = complex(0.5 * (a + b), 0.5 * (c + d))
            try:
                r = refine_resonance(nu, center, params)
                if a - 1e-9 <= r.k.real <= b + 1e-9 and c - 1e-9 <= r.k.imag <= d + 1e-9:
                    found.append(r)
                    continue
            except (ConvergenceError, AccuracyLossError):
                pass
            # Newton escaped: keep splitting
        if (b - a) < 1e-8 and (d - c) < 1e-8:
            continue
        if (b - a) >= (d - c):
            mid = a + (b - a) * 0.503
            kids = [(a, mid, c, d), (mid, b, c, d)]
        else:
            mid = c + (d - c) * 0.503
            kids = [(a, b, c, mid), (a, b, mid, d)]
        for (aa, bb, cc, dd) in kids:
            try:
                w = _winding_rect(nu, params, aa, bb, cc, dd)
            except IsolationError:
                w = cnt  # contour hit a zero: force further splitting
            if w > 0:
                boxes.append((aa, bb, cc, dd, w))
    uniq = {}
    for r in found:
        key = round(r.k.real, 7), round(r.k.imag, 7)
        uniq[key] = r
    out = sorted(uniq.values(), key=lambda r: r.k.real)
    return out


def scan_strip(params: Params, nu_range, m_range) -> StripScan:
    """Resonance family scan; reports the strip statistic delta = -max Im k."""
    n_i, A_N = _check_params(params)
    m_list = sorted(set(int(m) for m in m_range))
    if not m_list or m_list[0] < 1:
        raise ValidationError("m_range must contain integers >= 1")
    m_max = m_list[-1]
    rows: List[Resonance] = []
    errors: List[Tuple[int, int, str]] = []
    for nu in sorted(set(int(n) for n in nu_range)):
        try:
            found = find_resonances(params, nu, m_max)
        except Exception as exc:  # per-resonance errors recorded, scan continues
            errors.append((nu, -1, str(exc)))
            continue
        for m in m_list:
            rows.append(found[m - 1])
    rows.sort(key=lambda r: (r.nu, r.m))
    if rows:
        max_im = max(r.k.imag for r in rows)
    else:
        max_im = math.nan
    return StripScan(resonances=rows, errors=errors, max_im=max_im, delta=-max_im)
