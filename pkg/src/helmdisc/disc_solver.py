"""Exact per-mode series solutions of the disc transmission problem.

The penetrable obstacle is the unit disc. Interior/exterior fields per
angular mode nu:

    u_i(r, th) = [A J_nu(k_i r) + A_p J_nu(beta r)] e^{i nu th}
    u_o(r, th) =  B H^(1)_nu(k_o r) e^{i nu th}

with k_i = k sqrt(n_i/a_i), k_o = k sqrt(n_o/a_o), coupled at r = 1 by
    u_o = A_D u_i + g_D,    a_o du_o/dr = A_N a_i du_i/dr + g_N.

Volume sources are interior Fourier-Bessel modes f_i = c J_nu(beta r)
e^{i nu th} (f_o = 0 throughout), giving the particular amplitude
A_p = c / (n_i k^2 - a_i beta^2).
"""
import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import specfun
from .errors import (DomainError, NearResonanceError, QuadratureError,
                     TruncationWarning, ValidationError)
from .util import gauss_legendre_panels, pairwise_sum

DISC_RADIUS = 1.0
DIAM = 2.0  # diameter of the unit disc
GAMMA_STAR = 0.5  # star-shape parameter: x.n = 1 = gamma*diam on the circle


@dataclass(frozen=True)
class Params:
    """Coefficients of the transmission problem plus wavenumber and report radius."""
    n_i: float
    n_o: float
    a_i: float
    a_o: float
    A_D: float
    A_N: float
    k: complex
    R: float = 2.0
    disc_radius: float = DISC_RADIUS

    def __post_init__(self):
        for name in ("n_i", "n_o", "a_i", "a_o", "A_D", "A_N"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be a positive real, got {v!r}")
        k = complex(self.k)
        if k == 0 or not (math.isfinite(k.real) and math.isfinite(k.imag)):
            raise ValidationError(f"k must be finite and nonzero, got {k!r}")
        if self.disc_radius != DISC_RADIUS:
            raise ValidationError("geometry is fixed to the unit disc; rescale k instead")
        if not (math.isfinite(self.R) and self.R > self.disc_radius):
            raise ValidationError(f"report radius R must exceed the disc radius, got {self.R!r}")

    @property
    def k_i(self) -> complex:
        return complex(self.k) * math.sqrt(self.n_i / self.a_i)

    @property
    def k_o(self) -> complex:
        return complex(self.k) * math.sqrt(self.n_o / self.a_o)

    def require_real_k(self, what):
        k = complex(self.k)
        if k.imag != 0.0 or k.real <= 0:
            raise ValidationError(f"{what} requires real positive k, got {k!r}")
        return k.real


@dataclass(frozen=True)
class ModalSource:
    """Angular-mode sources: interior J-mode volume term and boundary coefficients."""
    nu: int
    interior_volume: Optional[Tuple[complex, float]] = None  # (c, beta)
    g_D_coeff: complex = 0.0
    g_N_coeff: complex = 0.0

    def __post_init__(self):
        if self.interior_volume is not None:
            c, beta = self.interior_volume
            if not (math.isfinite(beta) and beta > 0):
                raise ValidationError(f"radial wavenumber beta must be positive, got {beta!r}")


@dataclass(frozen=True)
class ModalSolution:
    """Series coefficients of one solved mode."""
    nu: int
    A_int: complex
    B_ext: complex
    particular: Optional[Tuple[complex, float]]  # (c', beta): c' = c/(n_i k^2 - a_i beta^2)
    cond_2x2: float
    source: ModalSource


@dataclass(frozen=True)
class NormReport:
    """Norms of a solution on B_1 and D_R plus the weighted energy of the bound's LHS."""
    l2_int: float
    h1semi_int: float
    l2_ext: float
    h1semi_ext: float
    weighted_energy: float
    quadrature_nodes: int
    doubling_delta: float = 0.0


def _interface_values(params: Params, nu: int):
    ci = specfun.cylinder_eval(nu, params.k_i)
    co = specfun.cylinder_eval(nu, params.k_o)
    return ci, co


def solve_modal(params: Params, source: ModalSource, residual_tol=1e-8) -> ModalSolution:
    """Match interior/exterior series coefficients across r = 1 for one mode."""
    nu = int(source.nu)
    k = complex(params.k)
    if k.imag < 0:
        raise ValidationError("solves require Im k >= 0 (resonance search uses F_nu directly)")
    particular = None
    rhs_D = complex(source.g_D_coeff)
    rhs_N = complex(source.g_N_coeff)
    if source.interior_volume is not None:
        c, beta = source.interior_volume
        denom = params.n_i * k * k - params.a_i * beta * beta
        scale = max(abs(params.n_i * k * k), abs(params.a_i * beta * beta))
        if abs(denom) <= 1e-12 * scale:
            raise ValidationError(
                "beta^2 = n_i k^2 / a_i: resonant interior source has no J-mode particular solution")
        if c != 0:
            a_p = complex(c) / denom
            particular = (a_p, float(beta))
            cb = specfun.cylinder_eval(nu, beta * complex(1.0))
            rhs_D += params.A_D * a_p * cb.j
            rhs_N += params.A_N * params.a_i * a_p * beta * cb.jp
    ci, co = _interface_values(params, nu)
    m11 = -params.A_D * ci.j
    m12 = co.h1
    m21 = -params.A_N * params.a_i * params.k_i * ci.jp
    m22 = params.a_o * params.k_o * co.h1p
    det = m11 * m22 - m12 * m21
    col1 = math.hypot(abs(m11), abs(m21))
    col2 = math.hypot(abs(m12), abs(m22))
    if det == 0 or abs(det) < 1e-300 * col1 * col2:
        raise NearResonanceError(f"interface system singular at nu={nu}, k={k}",
                                 f_abs=abs(det) / max(col1 * col2, 1e-300))
    a_hom = (rhs_D * m22 - m12 * rhs_N) / det
    b_ext = (m11 * rhs_N - rhs_D * m21) / det
    fro2 = col1 * col1 + col2 * col2
    cond = fro2 / abs(det)
    # residuals of both transmission conditions relative to their largest term;
    # deeply evanescent modes can have true coefficients below the double
    # underflow limit (flushed to 0), so grant the corresponding allowance
    denorm = 5e-324
    t1 = (b_ext * co.h1, params.A_D * a_hom * ci.j, rhs_D)
    s1 = max(max(abs(v) for v in t1), 1e-300)
    allow1 = (denorm * abs(co.h1) + denorm * abs(params.A_D * ci.j)) / s1
    res1 = abs(t1[0] - t1[1] - t1[2]) / s1
    t2 = (b_ext * params.a_o * params.k_o * co.h1p,
          params.A_N * params.a_i * params.k_i * a_hom * ci.jp, rhs_N)
    s2 = max(max(abs(v) for v in t2), 1e-300)
    allow2 = (denorm * abs(params.a_o * params.k_o * co.h1p)
              + denorm * abs(params.A_N * params.a_i * params.k_i * ci.jp)) / s2
    res2 = abs(t2[0] - t2[1] - t2[2]) / s2
    if res1 > residual_tol + 4.0 * allow1 or res2 > residual_tol + 4.0 * allow2:
        raise NearResonanceError(
            f"transmission residual {max(res1, res2):.2e} at nu={nu}, k={k}",
            f_abs=abs(det) / max(col1 * col2, 1e-300))
    return ModalSolution(nu=nu, A_int=a_hom, B_ext=b_ext, particular=particular,
                         cond_2x2=cond, source=source)


def c_nu(nu: int, k: float) -> float:
    """Normalisation making || J_nu(k r) e^{i nu th} ||_{L2(B_1)} = 1.

    c_nu = (pi (J_nu(k)^2 - J_{nu+1}(k) J_{nu-1}(k)))^{-1/2}.
    """
    if not (math.isfinite(k) and k > 0):
        raise DomainError(f"c_nu requires k > 0, got {k!r}")
    nu = int(nu)
    n = abs(nu)
    j, _, _, _ = (a for a in specfun.cyl_orders(n + 1, complex(k)))
    jn = j[n].real
    jp1 = j[n + 1].real
    if n >= 1:
        jm1 = j[n - 1].real
    else:
        jm1 = -jp1  # J_{-1} = -J_1
    radicand = jn * jn - jp1 * jm1
    if radicand <= 0:
        raise DomainError(f"nonpositive normalisation radicand at nu={nu}, k={k}")
    return 1.0 / math.sqrt(math.pi * radicand)


def recommended_nu_max(params: Params, r_eval: float) -> int:
    """Mie-series truncation with super-exponential tail margin."""
    x = math.sqrt(params.n_i / params.a_i) * abs(complex(params.k)) * max(r_eval, 1.0)
    return int(math.ceil(x + 8.0 * x ** (1.0 / 3.0) + 20.0))


def solve_plane_wave(params: Params, amplitude: complex, angle: float, nu_max: int,
                     r_eval: Optional[float] = None) -> list:
    """Scattered-field modal solve for an incident plane wave.

    The incident wave amplitude * e^{i k_o (x cos(angle) + y sin(angle))}
    enters through the equivalent sources f_i = k^2((a_i/a_o) n_o - n_i) u^I,
    g_D = (A_D - 1) u^I, g_N = (A_N - 1) a_i d_n u^I, expanded over modes by
    the Jacobi-Anger identity. Returns ModalSolutions of the scattered field.
    """
    k = params.require_real_k("plane-wave solve")
    if r_eval is None:
        r_eval = params.R
    rec = recommended_nu_max(params, r_eval)
    nu_max = int(nu_max)
    k_o = params.k_o.real
    k_i = params.k_i.real
    xtail = max(k_i * 1.0, k_o * r_eval)
    tail = abs(specfun.bessel_j(nu_max + 1, complex(xtail))) + \
        abs(specfun.bessel_j(nu_max + 2, complex(xtail)))
    if nu_max < rec or tail > 1e-10:
        warnings.warn(
            f"nu_max={nu_max} below recommended {rec}; tail estimate {tail:.2e}",
            TruncationWarning)
    contrast = k * k * ((params.a_i / params.a_o) * params.n_o - params.n_i)
    amplitude = complex(amplitude)
    sols = []
    if amplitude == 0:
        zero = ModalSource(nu=0)
        return [ModalSolution(nu=nu, A_int=0.0, B_ext=0.0, particular=None,
                              cond_2x2=0.0, source=zero)
                for nu in range(-nu_max, nu_max + 1)]
    co_all_j, co_all_jp, _, _ = specfun.cyl_orders(nu_max + 1, complex(k_o))
    for nu in range(-nu_max, nu_max + 1):
        a_nu = amplitude * (1j ** (nu % 4)) * cmath.exp(-1j * nu * angle)
        n = abs(nu)
        sgn = -1.0 if (nu < 0 and n % 2 == 1) else 1.0
        j_ko = sgn * co_all_j[n]
        jp_ko = sgn * co_all_jp[n]
        iv = None
        if contrast != 0.0:
            iv = (contrast * a_nu, k_o)
        src = ModalSource(
            nu=nu,
            interior_volume=iv,
            g_D_coeff=(params.A_D - 1.0) * a_nu * j_ko,
            g_N_coeff=(params.A_N - 1.0) * params.a_i * a_nu * k_o * jp_ko,
        )
        sols.append(solve_modal(params, src))
    return sols


def _interior_terms(sol: ModalSolution, params: Params):
    terms = [(sol.A_int, params.k_i)]
    if sol.particular is not None:
        terms.append((sol.particular[0], complex(sol.particular[1])))
    return terms


def _norms_at(params: Params, solutions, nodes_per_panel: int):
    k = params.require_real_k("norm evaluation")
    lam = 2.0 * math.pi / (k * math.sqrt(max(params.n_i / params.a_i,
                                             params.n_o / params.a_o)))
    panel = min(1.0, lam)
    n_pan_i = max(1, int(math.ceil(1.0 / panel)))
    n_pan_o = max(1, int(math.ceil((params.R - 1.0) / panel)))
    r_i, w_i = gauss_legendre_panels(0.0, 1.0, n_pan_i, nodes_per_panel)
    r_o, w_o = gauss_legendre_panels(1.0, params.R, n_pan_o, nodes_per_panel)
    l2i, h1i, l2o, h1o = [], [], [], []
    for sol in solutions:
        nu = sol.nu
        ui = np.zeros(r_i.shape, dtype=np.complex128)
        dui = np.zeros(r_i.shape, dtype=np.complex128)
        for coef, w in _interior_terms(sol, params):
            if coef == 0:
                continue
            j, jp, _, _ = specfun.pair_batch(nu, w * r_i, need_h=False)
            ui += coef * j
            dui += coef * w * jp
        if sol.B_ext != 0:
            _, _, h, hp = specfun.pair_batch(nu, params.k_o * r_o)
            uo = sol.B_ext * h
            duo = sol.B_ext * params.k_o * hp
        else:
            uo = np.zeros(r_o.shape, dtype=np.complex128)
            duo = uo
        l2i.append(np.dot(w_i, (np.abs(ui) ** 2) * r_i))
        h1i.append(np.dot(w_i, (np.abs(dui) ** 2) * r_i
                          + (nu * nu) * (np.abs(ui) ** 2) / r_i))
        l2o.append(np.dot(w_o, (np.abs(uo) ** 2) * r_o))
        h1o.append(np.dot(w_o, (np.abs(duo) ** 2) * r_o
                          + (nu * nu) * (np.abs(uo) ** 2) / r_o))
    tp = 2.0 * math.pi
    vals = [tp * pairwise_sum(x) for x in (l2i, h1i, l2o, h1o)]
    ntot = (r_i.size + r_o.size)
    return vals, ntot


def norms(params: Params, solutions, nodes_per_panel: int = 64,
          certify: bool = True) -> NormReport:
    """L2 norms / H1 seminorms on B_1 and D_R with a node-doubling certificate."""
    if isinstance(solutions, ModalSolution):
        solutions = [solutions]
    k = params.require_real_k("norm evaluation")
    (v1, n1) = _norms_at(params, solutions, nodes_per_panel)
    delta = 0.0
    if certify:
        (v2, n2) = _norms_at(params, solutions, 2 * nodes_per_panel)
        for a, b in zip(v1, v2):
            scale = max(abs(a), abs(b))
            if scale > 0:
                delta = max(delta, abs(a - b) / scale)
        if delta > 1e-8:
            raise QuadratureError("norm quadrature not converged under node doubling",
                                  estimate=delta)
        v1, n1 = v2, n2
    l2i, h1i, l2o, h1o = v1
    energy = (params.a_i * h1i + k * k * params.n_i * l2i
              + (params.a_o * h1o + k * k * params.n_o * l2o) / (params.A_D * params.A_N))
    return NormReport(
        l2_int=math.sqrt(max(l2i, 0.0)), h1semi_int=math.sqrt(max(h1i, 0.0)),
        l2_ext=math.sqrt(max(l2o, 0.0)), h1semi_ext=math.sqrt(max(h1o, 0.0)),
        weighted_energy=energy, quadrature_nodes=n1, doubling_delta=delta)


def field_grid(params: Params, solutions, extent=(-2.0, 2.0, -2.0, 2.0),
               nx: int = 200, ny: int = 200, chunk: int = 8192):
    """Sample the modal series on a Cartesian grid; returns (x, y, u[ny, nx])."""
    if isinstance(solutions, ModalSolution):
        solutions = [solutions]
    x = np.linspace(extent[0], extent[1], nx)
    y = np.linspace(extent[2], extent[3], ny)
    xx, yy = np.meshgrid(x, y)
    rr = np.hypot(xx, yy).ravel()
    th = np.arctan2(yy, xx).ravel()
    u = np.zeros(rr.shape, dtype=np.complex128)
    nu_max = max((abs(s.nu) for s in solutions), default=0)

    # interior: group coefficient tables by radial wavenumber
    groups = {}
    for sol in solutions:
        for coef, w in _interior_terms(sol, params):
            if coef == 0:
                continue
            key = complex(w)
            cpos, cneg = groups.setdefault(key, (np.zeros(nu_max + 1, np.complex128),
                                                 np.zeros(nu_max + 1, np.complex128)))
            n = abs(sol.nu)
            sgn = -1.0 if (sol.nu < 0 and n % 2 == 1) else 1.0
            if sol.nu >= 0:
                cpos[n] += coef
            else:
                cneg[n] += coef * sgn
    hpos = np.zeros(nu_max + 1, np.complex128)
    hneg = np.zeros(nu_max + 1, np.complex128)
    for sol in solutions:
        if sol.B_ext == 0:
            continue
        n = abs(sol.nu)
        sgn = -1.0 if (sol.nu < 0 and n % 2 == 1) else 1.0
        if sol.nu >= 0:
            hpos[n] += sol.B_ext
        else:
            hneg[n] += sol.B_ext * sgn

    inner = rr < params.disc_radius
    origin = rr == 0.0
    for mask, use_h, wavenumbers in ((inner, False, None), (~inner, True, None)):
        idx = np.nonzero(mask)[0]
        for lo in range(0, idx.size, chunk):
            sel = idx[lo:lo + chunk]
            pts_r = rr[sel]
            phase = np.exp(1j * th[sel])
            if use_h:
                zs = params.k_o * pts_r
                u[sel] = specfun.phase_sum(True, nu_max, zs, phase, hpos, hneg)
            else:
                tot = np.zeros(pts_r.shape, dtype=np.complex128)
                for w, (cpos, cneg) in groups.items():
                    zs = w * pts_r
                    zok = zs != 0
                    part = np.zeros(pts_r.shape, dtype=np.complex128)
                    if np.any(zok):
                        part[zok] = specfun.phase_sum(False, nu_max, zs[zok],
                                                      phase[zok], cpos, cneg)
                    if np.any(~zok):
                        part[~zok] = cpos[0]  # J_0(0) = 1, higher orders vanish
                    tot += part
                u[sel] = tot
    return x, y, u.reshape(ny, nx)
