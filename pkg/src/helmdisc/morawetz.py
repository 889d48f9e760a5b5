"""Numerical verification of the multiplier identities on exact test fields.

Test fields are finite sums p(x) e^{i w.x} with polynomial p, so value,
gradient, Hessian and Laplacian are exact up to roundoff and identity
residuals measure only floating-point cancellation, not discretisation.

Both sides of each identity are evaluated by independent code paths: the
left side as the direct product, the right side with the divergence
expanded term by term into first/second derivatives.
"""
import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from . import specfun
from .errors import (DomainError, InvariantViolationError, QuadratureError,
                     ValidationError)
from .util import gauss_legendre_panels

Poly = Dict[Tuple[int, ...], complex]


def _poly_diff(p: Poly, j: int) -> Poly:
    out: Poly = {}
    for exps, c in p.items():
        if exps[j] > 0:
            e = list(exps)
            e[j] -= 1
            key = tuple(e)
            out[key] = out.get(key, 0.0) + c * exps[j]
    return out


def _poly_scale_add(p: Poly, q: Poly, fac) -> Poly:
    out = dict(p)
    for exps, c in q.items():
        out[exps] = out.get(exps, 0.0) + fac * c
    return {k: v for k, v in out.items() if v != 0} or {}


def _poly_eval(p: Poly, pts) -> np.ndarray:
    vals = np.zeros(pts.shape[0], dtype=np.complex128)
    for exps, c in p.items():
        mono = np.ones(pts.shape[0])
        for j, e in enumerate(exps):
            if e:
                mono = mono * pts[:, j] ** e
        vals += c * mono
    return vals


class TestField:
    """Finite sum of polynomial-times-plane-wave terms, closed under d/dx."""

    def __init__(self, d: int, terms):
        if d not in (2, 3):
            raise ValidationError("test fields support d in {2, 3}")
        self.d = d
        self.terms = []
        for poly, w in terms:
            w = tuple(float(x) for x in w)
            if len(w) != d:
                raise ValidationError("frequency vector dimension mismatch")
            poly = {tuple(int(e) for e in k): complex(v) for k, v in poly.items()}
            for exps in poly:
                if len(exps) != d or sum(exps) > 6:
                    raise ValidationError("polynomial degree is capped at 6")
            grads = [_poly_scale_add(_poly_diff(poly, j), poly, 1j * w[j])
                     for j in range(d)]
            hess = [[_poly_scale_add(_poly_diff(grads[j], l), grads[j], 1j * w[l])
                     for l in range(d)] for j in range(d)]
            lap: Poly = {}
            for j in range(d):
                lap = _poly_scale_add(lap, hess[j][j], 1.0)
            self.terms.append((poly, w, grads, hess, lap))

    @staticmethod
    def random(rng, d=2, n_terms=2, deg=3, freq_scale=2.0):
        terms = []
        for _ in range(n_terms):
            poly = {}
            for _ in range(3):
                exps = tuple(int(rng.integers(0, deg + 1)) for _ in range(d))
                while sum(exps) > 6:
                    exps = tuple(int(rng.integers(0, deg + 1)) for _ in range(d))
                poly[exps] = complex(rng.normal(), rng.normal())
            w = tuple(freq_scale * rng.normal() for _ in range(d))
            terms.append((poly, w))
        return TestField(d, terms)

    def _phases(self, pts):
        return [np.exp(1j * (pts @ np.asarray(w))) for (_, w, _, _, _) in self.terms]

    def value(self, pts):
        pts = np.atleast_2d(pts)
        out = np.zeros(pts.shape[0], dtype=np.complex128)
        for (poly, w, _, _, _), ph in zip(self.terms, self._phases(pts)):
            out += _poly_eval(poly, pts) * ph
        return out

    def gradient(self, pts):
        pts = np.atleast_2d(pts)
        out = np.zeros((pts.shape[0], self.d), dtype=np.complex128)
        for (_, w, grads, _, _), ph in zip(self.terms, self._phases(pts)):
            for j in range(self.d):
                out[:, j] += _poly_eval(grads[j], pts) * ph
        return out

    def hessian(self, pts):
        pts = np.atleast_2d(pts)
        out = np.zeros((pts.shape[0], self.d, self.d), dtype=np.complex128)
        for (_, w, _, hess, _), ph in zip(self.terms, self._phases(pts)):
            for j in range(self.d):
                for l in range(self.d):
                    out[:, j, l] += _poly_eval(hess[j][l], pts) * ph
        return out

    def laplacian(self, pts):
        pts = np.atleast_2d(pts)
        out = np.zeros(pts.shape[0], dtype=np.complex128)
        for (_, w, _, _, lap), ph in zip(self.terms, self._phases(pts)):
            out += _poly_eval(lap, pts) * ph
        return out


class RadialBesselField:
    """v = J_0(kappa r) in d dimensions (d=2 exact; derivative oracle via the ODE)."""

    def __init__(self, kappa: float, d: int = 2):
        self.kappa = float(kappa)
        self.d = d
        if d != 2:
            raise ValidationError("RadialBesselField is 2-d")

    def _jj(self, r):
        z = self.kappa * r
        j, jp, _, _ = specfun.pair_batch(0, z.astype(np.complex128), need_h=False)
        return j, jp

    def value(self, pts):
        pts = np.atleast_2d(pts)
        r = np.hypot(pts[:, 0], pts[:, 1])
        return self._jj(r)[0]

    def gradient(self, pts):
        pts = np.atleast_2d(pts)
        r = np.hypot(pts[:, 0], pts[:, 1])
        _, jp = self._jj(r)
        fac = self.kappa * jp / r
        return pts * fac[:, None]

    def hessian(self, pts):
        pts = np.atleast_2d(pts)
        r = np.hypot(pts[:, 0], pts[:, 1])
        j, jp = self._jj(r)
        k = self.kappa
        fpp = -k * k * j - k * jp / r  # J_0'' (kr) * k^2 via the Bessel ODE
        fp_over_r = k * jp / r
    # f(r) = J_0(kr): hess_ij = (f'' - f'/r) x_i x_j / r^2 + (f'/r) delta_ij
        out = np.empty((pts.shape[0], 2, 2), dtype=np.complex128)
        for i in range(2):
            for l in range(2):
                out[:, i, l] = (fpp - fp_over_r) * pts[:, i] * pts[:, l] / (r * r)
                if i == l:
                    out[:, i, l] += fp_over_r
        return out

    def laplacian(self, pts):
        pts = np.atleast_2d(pts)
        r = np.hypot(pts[:, 0], pts[:, 1])
        j, _ = self._jj(r)
        return -(self.kappa ** 2) * j


@dataclass(frozen=True)
class IdentityResidual:
    lhs: float
    rhs: float
    abs_residual: float
    rel_residual: float
    discretization: str


def _both_sides_pointwise(v, pts, a, n, k, alpha, beta, ludwig, kappa=None):
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    d = v.d
    val = v.value(pts)
    g = v.gradient(pts)
    H = v.hessian(pts)
    lap = v.laplacian(pts)
    x_dot_g = np.einsum("pj,pj->p", pts, g)
    Hx = np.einsum("pjl,pl->pj", H, pts)
    g2 = np.einsum("pj,pj->p", np.conj(g), g).real
    if not ludwig:
        Mv = x_dot_g - 1j * k * beta * val + alpha * val
        L = a * lap + (k * k) * n * val
        lhs = 2.0 * (np.conj(Mv) * L).real
        dM = g + Hx + (alpha - 1j * k * beta) * g[:, :]
        div1 = 2.0 * a * (np.einsum("pj,pj->p", np.conj(dM), g) + np.conj(Mv) * lap).real
        div2 = (d * ((k * k) * n * np.abs(val) ** 2 - a * g2)
                + (k * k) * n * 2.0 * (np.conj(val) * x_dot_g).real
                - a * 2.0 * np.einsum("pj,pj->p", np.conj(g), Hx).real)
        bulk = -(2 * alpha - d + 2) * a * g2 - (d - 2 * alpha) * n * (k * k) * np.abs(val) ** 2
        rhs = div1 + div2 + bulk
        scale = np.abs(lhs) + np.abs(div1) + np.abs(div2) + np.abs(bulk)
    else:
        r = np.sqrt(np.einsum("pj,pj->p", pts, pts))
        if np.any(r == 0):
            raise DomainError("Morawetz-Ludwig samples must exclude the origin")
        Mv = x_dot_g - 1j * kappa * r * val + alpha * val
        L = lap + kappa * kappa * val
        lhs = 2.0 * (np.conj(Mv) * L).real
        dM = g + Hx + (-1j * kappa) * (pts / r[:, None]) * val[:, None] \
            + (-1j * kappa) * r[:, None] * g + alpha * g
        div1 = 2.0 * (np.einsum("pj,pj->p", np.conj(dM), g) + np.conj(Mv) * lap).real
        div2 = (d * (kappa * kappa * np.abs(val) ** 2 - g2)
                + kappa * kappa * 2.0 * (np.conj(val) * x_dot_g).real
                - 2.0 * np.einsum("pj,pj->p", np.conj(g), Hx).real)
        vr = x_dot_g / r
        bulk = ((2 * alpha - (d - 1)) * (kappa * kappa * np.abs(val) ** 2 - g2)
                - (g2 - np.abs(vr) ** 2)
                - np.abs(vr - 1j * kappa * val) ** 2)
        rhs = div1 + div2 + bulk
        scale = np.abs(lhs) + np.abs(div1) + np.abs(div2) + np.abs(bulk)
    diff = np.abs(lhs - rhs)
    rel = float(np.max(diff / np.maximum(scale, 1e-14)))
    return IdentityResidual(
        lhs=float(np.max(np.abs(lhs))), rhs=float(np.max(np.abs(rhs))),
        abs_residual=float(np.max(diff)), rel_residual=rel,
        discretization=f"pointwise, {pts.shape[0]} samples")


def check_morawetz_pointwise(v, a, n, k, alpha, beta, points) -> IdentityResidual:
    """Both sides of the multiplier identity with Mv = x.grad v - ik beta v + alpha v."""
    return _both_sides_pointwise(v, points, a, n, k, alpha, beta, ludwig=False)


def check_morawetz_ludwig(v, kappa, alpha, points) -> IdentityResidual:
    """Both sides of the radial-multiplier identity, M_a v = r(v_r - ik v + (a/r)v)."""
    return _both_sides_pointwise(v, points, 1.0, 1.0, kappa, alpha, 0.0,
                                 ludwig=True, kappa=kappa)


def _disc_quadrature(rho1, rho2, n_r, n_th):
    r, wr = gauss_legendre_panels(rho1, rho2, max(2, int(math.ceil((rho2 - rho1) * 2))), n_r)
    th = 2.0 * math.pi * np.arange(n_th) / n_th
    wth = 2.0 * math.pi / n_th
    rr, tt = np.meshgrid(r, th, indexing="ij")
    pts = np.stack([(rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel()], axis=1)
    w = (wr[:, None] * rr * wth).ravel()
    return pts, w


def _sphere_quadrature(rho1, rho2, n_r, n_pol, n_az):
    r, wr = gauss_legendre_panels(rho1, rho2, max(2, int(math.ceil((rho2 - rho1) * 2))), n_r)
    mu, wmu = np.polynomial.legendre.leggauss(n_pol)
    ph = 2.0 * math.pi * np.arange(n_az) / n_az
    wph = 2.0 * math.pi / n_az
    R, MU, PH = np.meshgrid(r, mu, ph, indexing="ij")
    S = np.sqrt(1.0 - MU * MU)
    pts = np.stack([(R * S * np.cos(PH)).ravel(), (R * S * np.sin(PH)).ravel(),
                    (R * MU).ravel()], axis=1)
    WR, WMU, _ = np.meshgrid(wr, wmu, np.full(n_az, wph), indexing="ij")
    w = (WR * (R * R) * WMU * wph / wph * np.full_like(R, 1.0)).ravel()
    w = (WR * R * R * WMU * wph).ravel()
    return pts, w


def _circle_quadrature(rho, n_th, d, n_pol=None):
    if d == 2:
        th = 2.0 * math.pi * np.arange(n_th) / n_th
        pts = rho * np.stack([np.cos(th), np.sin(th)], axis=1)
        w = np.full(n_th, 2.0 * math.pi * rho / n_th)
        return pts, w
    mu, wmu = np.polynomial.legendre.leggauss(n_pol or n_th)
    ph = 2.0 * math.pi * np.arange(n_th) / n_th
    wph = 2.0 * math.pi / n_th
    MU, PH = np.meshgrid(mu, ph, indexing="ij")
    S = np.sqrt(1.0 - MU * MU)
    pts = rho * np.stack([(S * np.cos(PH)).ravel(), (S * np.sin(PH)).ravel(),
                          MU.ravel()], axis=1)
    WMU, _ = np.meshgrid(wmu, np.full(n_th, wph), indexing="ij")
    w = (rho * rho * WMU * wph).ravel()
    return pts, w


def _integrated_sides(v, domain, a, n, k, alpha, beta, n_r, n_th):
    d = v.d
    if domain[0] == "disc":
        rho1, rho2 = 0.0, float(domain[1])
        shells = [(rho2, +1.0)]
    elif domain[0] == "annulus":
        rho1, rho2 = float(domain[1]), float(domain[2])
        if not 0 < rho1 < rho2:
            raise ValidationError("annulus radii must satisfy 0 < rho1 < rho2")
        shells = [(rho2, +1.0), (rho1, -1.0)]
    else:
        raise ValidationError("domain must be ('disc', rho) or ('annulus', r1, r2)")
    if d == 2:
        pts, w = _disc_quadrature(rho1, rho2, n_r, n_th)
    else:
        pts, w = _sphere_quadrature(rho1, rho2, n_r, n_th // 2, n_th)
    val = v.value(pts)
    g = v.gradient(pts)
    lap = v.laplacian(pts)
    x_dot_g = np.einsum("pj,pj->p", pts, g)
    g2 = np.einsum("pj,pj->p", np.conj(g), g).real
    Mv = x_dot_g - 1j * k * beta * val + alpha * val
    L = a * lap + (k * k) * n * val
    vol_int = (2.0 * (np.conj(Mv) * L).real
               + (2 * alpha - d + 2) * a * g2
               + (d - 2 * alpha) * n * (k * k) * np.abs(val) ** 2)
    vol = float(np.dot(w, vol_int))
    bnd = 0.0
    for rho, orient in shells:
        if d == 2:
            bpts, bw = _circle_quadrature(rho, n_th, 2)
        else:
            bpts, bw = _circle_quadrature(rho, n_th, 3, n_pol=n_th // 2)
        bval = v.value(bpts)
        bg = v.gradient(bpts)
        nhat = orient * bpts / rho
        dn = np.einsum("pj,pj->p", nhat, bg)
        gT = bg - nhat * dn[:, None]
        x_dot_nu = orient * rho
        x_dot_gT = np.einsum("pj,pj->p", bpts, np.conj(gT))
        integrand = (x_dot_nu * (a * np.abs(dn) ** 2 - a * np.einsum("pj,pj->p", np.conj(gT), gT).real
                                 + (k * k) * n * np.abs(bval) ** 2)
                     + 2.0 * ((x_dot_gT + 1j * k * beta * np.conj(bval)
                               + alpha * np.conj(bval)) * a * dn).real)
        bnd += float(np.dot(bw, integrand))
    scale = float(np.dot(w, np.abs(vol_int))) + abs(bnd)
    return vol, bnd, scale


def check_morawetz_integrated(v, domain, a, n, k, alpha, beta,
                              n_r=24, n_th=64) -> IdentityResidual:
    """Integrated multiplier identity on a disc or annulus, with node doubling."""
    vol1, bnd1, _ = _integrated_sides(v, domain, a, n, k, alpha, beta, n_r, n_th)
    vol2, bnd2, scale = _integrated_sides(v, domain, a, n, k, alpha, beta,
                                          2 * n_r, 2 * n_th)
    conv = max(abs(vol1 - vol2), abs(bnd1 - bnd2)) / max(abs(vol2), abs(bnd2), 1e-14)
    if conv > 1e-8:
        raise QuadratureError("integrated-identity quadrature not converged",
                              estimate=conv)
    diff = abs(vol2 - bnd2)
    return IdentityResidual(
        lhs=vol2, rhs=bnd2, abs_residual=diff,
        rel_residual=diff / max(abs(vol2), abs(bnd2), scale * 1e-2, 1e-14),
        discretization=f"quadrature {2*n_r}x{2*n_th} (doubled, certified)")


def check_radiating_inequality(coeffs, kappa, R, R0=0.5):
    """Boundary functional of an outgoing Hankel sum on r = R; must be <= 0.

    I = int_{G_R} R(|u_r|^2 - |grad_T u|^2 + kappa^2 |u|^2)
        - 2 kappa R Im int u_bar u_r + (d-1) Re int u_bar u_r,  d = 2.
    """
    if not (R > R0 > 0):
        raise ValidationError("need R > R0 > 0")
    if kappa <= 0:
        raise ValidationError("kappa must be positive")
    tot_r = tot_t = tot_u = 0.0
    cross = 0.0 + 0.0j
    for nu, c in coeffs.items():
        if c == 0:
            continue
        ce = specfun.cylinder_eval(int(nu), complex(kappa * R))
        h, hp = ce.h1, ce.h1p
        a2 = abs(c) ** 2
        tot_r += a2 * (kappa ** 2) * abs(hp) ** 2
        tot_t += a2 * (nu * nu / (R * R)) * abs(h) ** 2
        tot_u += a2 * abs(h) ** 2
        cross += a2 * kappa * np.conj(h) * hp
    two_pi_r = 2.0 * math.pi * R
    val = (two_pi_r * R * (tot_r - tot_t + kappa * kappa * tot_u)
           - 2.0 * kappa * R * two_pi_r * cross.imag
           + 1.0 * two_pi_r * cross.real)
    scale = two_pi_r * (R * (tot_r + tot_t + kappa * kappa * tot_u) + abs(cross) * (2 * kappa * R + 1))
    if val > 1e-12 * max(1.0, scale):
        raise InvariantViolationError(
            f"radiating boundary functional positive: {val:.3e} (scale {scale:.3e})")
    return val


def check_trace_inequality(w, eps, n_r=32, n_th=128):
    """Weighted trace inequality on the unit disc; returns RHS - LHS >= -slack."""
    if eps <= 0:
        raise ValidationError("eps must be positive")
    d = w.d
    if d != 2:
        raise ValidationError("trace check runs on the unit disc (d = 2)")
    pts, wq = _disc_quadrature(0.0, 1.0, n_r, n_th)
    val = w.value(pts)
    g = w.gradient(pts)
    l2 = float(np.dot(wq, np.abs(val) ** 2))
    h1 = float(np.dot(wq, np.einsum("pj,pj->p", np.conj(g), g).real))
    bpts, bw = _circle_quadrature(1.0, 4 * n_th, 2)
    lhs = float(np.dot(bw, np.abs(w.value(bpts)) ** 2))  # x.n = 1 on the unit circle
    rhs = (d + eps) * l2 + (1.0 / eps) * (2.0 ** 2) * h1
    margin = rhs - lhs
    if margin < -1e-10 * max(1.0, rhs):
        raise InvariantViolationError(f"trace inequality violated: margin {margin:.3e}")
    return margin
