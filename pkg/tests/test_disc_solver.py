"""Modal solver, norms and field-grid tests."""
import cmath
import math

import numpy as np
import pytest

from helmdisc import disc_solver as ds
from helmdisc import specfun
from helmdisc.errors import QuadratureError, TruncationWarning, ValidationError

import oracles


def base_params(**kw):
    args = dict(n_i=1.0, n_o=1.0, a_i=1.0, a_o=1.0, A_D=1.0, A_N=1.0, k=1.0, R=2.0)
    args.update(kw)
    return ds.Params(**args)


def modal_field(sol, params, r, th):
    """Direct modal evaluation used as an independent check of field_grid."""
    nu = sol.nu
    if r < 1.0:
        u = sol.A_int * specfun.bessel_j(nu, params.k_i * r)
        if sol.particular:
            cp, beta = sol.particular
            u += cp * specfun.bessel_j(nu, beta * r)
    else:
        u = sol.B_ext * specfun.hankel1(nu, params.k_o * r)
    return u * cmath.exp(1j * nu * th)


class TestParams:
    def test_validation(self):
        with pytest.raises(ValidationError):
            base_params(n_i=-1.0)
        with pytest.raises(ValidationError):
            base_params(k=0.0)
        with pytest.raises(ValidationError):
            base_params(R=0.9)
        with pytest.raises(ValidationError):
            ds.Params(n_i=1, n_o=1, a_i=1, a_o=1, A_D=1, A_N=1, k=1.0, R=2.0,
                      disc_radius=2.0)

    def test_wavenumbers(self):
        p = base_params(n_i=4.0, a_i=1.0, k=2.0)
        assert p.k_i == pytest.approx(4.0)
        assert p.k_o == pytest.approx(2.0)


class TestSolveModal:
    def test_zero_data_zero_field(self):
        sol = ds.solve_modal(base_params(), ds.ModalSource(nu=4))
        assert sol.A_int == 0 and sol.B_ext == 0

    def test_resonant_beta_precondition(self):
        # beta^2 = n_i k^2 / a_i has no J-mode particular solution
        with pytest.raises(ValidationError):
            ds.solve_modal(base_params(k=1.0), ds.ModalSource(nu=0, interior_volume=(1.0, 1.0)))
        # valid with n_i = 3 and the homogeneous coefficient matches the
        # paper-displayed factor 1/(k^2(n_i - 1)) structure
        p = base_params(n_i=3.0)
        sol = ds.solve_modal(p, ds.ModalSource(nu=0, interior_volume=(1.0, 1.0)))
        assert sol.particular[0] == pytest.approx(1.0 / (1.0 ** 2 * (3.0 - 1.0)))

    @pytest.mark.parametrize("nu", [0, 1, 5, -3])
    def test_transmission_residuals(self, nu):
        p = base_params(n_i=3.0, n_o=1.2, a_i=0.7, a_o=1.1, A_D=1.3, A_N=0.8, k=2.7)
        c = 0.8 - 0.3j
        sol = ds.solve_modal(p, ds.ModalSource(nu=nu, interior_volume=(c, 1.9),
                                               g_D_coeff=0.2 + 0.1j, g_N_coeff=-0.4j))
        ci = specfun.cylinder_eval(nu, p.k_i)
        co = specfun.cylinder_eval(nu, p.k_o)
        cb = specfun.cylinder_eval(nu, 1.9 + 0j)
        cp, beta = sol.particular
        ui = sol.A_int * ci.j + cp * cb.j
        dui = sol.A_int * p.k_i * ci.jp + cp * beta * cb.jp
        uo = sol.B_ext * co.h1
        duo = sol.B_ext * p.k_o * co.h1p
        r1 = abs(uo - p.A_D * ui - (0.2 + 0.1j))
        r2 = abs(p.a_o * duo - p.A_N * p.a_i * dui - (-0.4j))
        assert r1 <= 1e-10 * max(abs(uo), abs(p.A_D * ui), 1.0)
        assert r2 <= 1e-10 * max(abs(p.a_o * duo), abs(p.A_N * p.a_i * dui), 1.0)

    def test_closed_form_mode0(self):
        # nu=0, n_i=3, k=1, f_i = c_0 J_0(r): direct evaluation of the
        # displayed u_i, u_o at r=1 agrees with the solved coefficients
        p = base_params(n_i=3.0)
        c0 = ds.c_nu(0, 1.0)
        sol = ds.solve_modal(p, ds.ModalSource(nu=0, interior_volume=(c0, 1.0)))
        s = math.sqrt(3.0)
        ce1 = specfun.cylinder_eval(0, 1.0)
        ce2 = specfun.cylinder_eval(0, s)
        q = (ce1.jp * ce1.h1 - ce1.h1p * ce1.j) / (s * ce2.jp * ce1.h1 - ce2.j * ce1.h1p)
        for r in (0.25, 0.6, 1.0):
            want_i = c0 / (1.0 * (3 - 1)) * (specfun.bessel_j(0, r)
                                             - specfun.bessel_j(0, s * r) * q)
            got_i = (sol.A_int * specfun.bessel_j(0, p.k_i * r)
                     + sol.particular[0] * specfun.bessel_j(0, r))
            assert abs(want_i - got_i) <= 1e-12 * abs(want_i)
        for r in (1.0, 1.7):
            want_o = c0 / 2.0 * specfun.hankel1(0, r) / ce1.h1 \
                * (ce1.j - specfun.bessel_j(0, s) * q)
            got_o = sol.B_ext * specfun.hankel1(0, r)
            assert abs(want_o - got_o) <= 1e-12 * abs(want_o)

    def test_linearity_scaling(self):
        p = base_params(n_i=2.0, k=3.1)
        lam = 2.5 - 1.5j
        s1 = ds.solve_modal(p, ds.ModalSource(nu=2, interior_volume=(0.7j, 2.0),
                                              g_D_coeff=0.3, g_N_coeff=0.1 - 0.2j))
        s2 = ds.solve_modal(p, ds.ModalSource(nu=2, interior_volume=(lam * 0.7j, 2.0),
                                              g_D_coeff=lam * 0.3, g_N_coeff=lam * (0.1 - 0.2j)))
        assert abs(s2.A_int - lam * s1.A_int) <= 1e-13 * abs(lam * s1.A_int)
        assert abs(s2.B_ext - lam * s1.B_ext) <= 1e-13 * abs(lam * s1.B_ext)

    def test_pde_residual_finite_difference(self):
        # a_i Lap(u_i) + k^2 n_i u_i = f_i, spot-checked at O(h^2)
        p = base_params(n_i=3.0, a_i=1.3, k=2.0)
        c = 1.1 - 0.4j
        beta = 1.7
        sol = ds.solve_modal(p, ds.ModalSource(nu=3, interior_volume=(c, beta)))

        def u(x, y):
            r = math.hypot(x, y)
            t = math.atan2(y, x)
            return modal_field(sol, p, r, t)

        def f(x, y):
            r = math.hypot(x, y)
            t = math.atan2(y, x)
            return c * specfun.bessel_j(3, beta * r) * cmath.exp(3j * t)

        rng = np.random.default_rng(3)
        for _ in range(4):
            x, y = rng.uniform(0.25, 0.6, 2)
            res = {}
            for h in (1e-3, 5e-4):
                lap = (u(x + h, y) + u(x - h, y) + u(x, y + h) + u(x, y - h)
                       - 4 * u(x, y)) / (h * h)
                res[h] = abs(p.a_i * lap + p.k.real ** 2 * p.n_i * u(x, y) - f(x, y))
            # O(h^2): quartering h^2 shrinks the residual ~4x
            assert res[5e-4] < 0.5 * res[1e-3] + 1e-9


class TestCnu:
    def test_small_k_limit(self):
        # nu = 0, k -> 0+: c_0 -> pi^{-1/2}
        assert ds.c_nu(0, 1e-6) == pytest.approx(1.0 / math.sqrt(math.pi), rel=1e-9)

    @pytest.mark.parametrize("nu,k", [(0, 1.0), (3, 2.5), (14, 1.77945199481921),
                                      (8, 17.3)])
    def test_normalises_unit_l2(self, nu, k):
        c = ds.c_nu(nu, k)
        val = 2 * math.pi * float(oracles.besselj_sq_integral(nu, k).real)
        assert c * c * val == pytest.approx(1.0, abs=1e-10)

    def test_fig2_value_finite(self):
        assert ds.c_nu(14, 1.77945199481921) > 0


class TestPlaneWave:
    def test_zero_amplitude(self):
        p = base_params(n_i=2.0)
        sols = ds.solve_plane_wave(p, 0.0, 0.3, ds.recommended_nu_max(p, p.R))
        assert all(s.A_int == 0 and s.B_ext == 0 for s in sols)

    def test_invisible_obstacle(self):
        p = base_params()
        sols = ds.solve_plane_wave(p, 1.0, 0.7, ds.recommended_nu_max(p, p.R))
        assert all(abs(s.B_ext) == 0 for s in sols)

    def test_truncation_warning(self):
        p = base_params(n_i=100.0, k=1.8)
        with pytest.warns(TruncationWarning):
            ds.solve_plane_wave(p, 1.0, 0.0, 5)

    def test_transmission_residual_per_mode(self):
        p = base_params(n_i=4.0, A_D=1.2, A_N=0.9, k=2.0)
        sols = ds.solve_plane_wave(p, 1.0, math.pi / 5, ds.recommended_nu_max(p, p.R))
        for s in sols[::7]:
            nu = s.nu
            a_nu = (1j ** (nu % 4)) * cmath.exp(-1j * nu * math.pi / 5)
            ui = s.A_int * specfun.bessel_j(nu, p.k_i)
            if s.particular:
                ui += s.particular[0] * specfun.bessel_j(nu, s.particular[1])
            uo = s.B_ext * specfun.hankel1(nu, p.k_o)
            gd = (p.A_D - 1) * a_nu * specfun.bessel_j(nu, p.k_o)
            r = abs(uo - p.A_D * ui - gd)
            assert r <= 1e-10 * max(abs(uo), abs(ui), abs(gd), 1e-12)


class TestNorms:
    def test_zero_solution(self):
        rep = ds.norms(base_params(), ds.solve_modal(base_params(), ds.ModalSource(nu=0)))
        assert rep.weighted_energy == 0

    def test_closed_form_single_mode(self):
        # ||J_0(k r)||^2_{L2(B_1)} with k=1 against (r^2/2)(J_0'^2 + J_0^2)|_1
        p = base_params()
        sol = ds.ModalSolution(nu=0, A_int=1.0, B_ext=0.0, particular=None,
                               cond_2x2=0.0, source=ds.ModalSource(nu=0))
        rep = ds.norms(p, sol)
        ce = specfun.cylinder_eval(0, 1.0)
        want = 2 * math.pi * 0.5 * (abs(ce.jp) ** 2 + abs(ce.j) ** 2)
        assert rep.l2_int ** 2 == pytest.approx(want, rel=1e-12)

    def test_mode_orthogonality(self):
        p = base_params(n_i=2.5, k=3.0)
        sols = [ds.solve_modal(p, ds.ModalSource(nu=n, interior_volume=(1.0 + 0.5j * n, 2.0)))
                for n in (0, 1, 4)]
        total = ds.norms(p, sols)
        parts = [ds.norms(p, s) for s in sols]
        assert total.l2_int ** 2 == pytest.approx(sum(r.l2_int ** 2 for r in parts), rel=1e-12)
        assert total.h1semi_ext ** 2 == pytest.approx(
            sum(r.h1semi_ext ** 2 for r in parts), rel=1e-12)

    def test_doubling_certificate(self):
        p = base_params(n_i=3.0, k=6.0)
        sol = ds.solve_modal(p, ds.ModalSource(nu=2, interior_volume=(1.0, 3.3)))
        r1 = ds.norms(p, sol, nodes_per_panel=48)
        r2 = ds.norms(p, sol, nodes_per_panel=96)
        assert abs(r1.weighted_energy - r2.weighted_energy) < 1e-9 * r2.weighted_energy
        assert r1.doubling_delta < 1e-9

    def test_nonconverged_quadrature_raises(self):
        p = base_params(n_i=3.0, k=40.0)
        sol = ds.solve_modal(p, ds.ModalSource(nu=2, interior_volume=(1.0, 3.3)))
        with pytest.raises(QuadratureError):
            ds.norms(p, sol, nodes_per_panel=2)


class TestFieldGrid:
    def test_zero_solution_zero_grid(self):
        p = base_params()
        sol = ds.solve_modal(p, ds.ModalSource(nu=0))
        _, _, u = ds.field_grid(p, sol, nx=21, ny=21)
        assert np.all(u == 0)

    def test_matches_direct_modal_evaluation(self):
        p = base_params(n_i=3.0, k=2.0)
        sols = [ds.solve_modal(p, ds.ModalSource(nu=n, interior_volume=(0.5 + 0.1j * n, 1.3)))
                for n in (-2, 0, 3)]
        x, y, u = ds.field_grid(p, sols, extent=(-1.8, 1.8, -1.8, 1.8), nx=15, ny=13)
        rng = np.random.default_rng(1)
        for _ in range(12):
            ix = int(rng.integers(0, x.size))
            iy = int(rng.integers(0, y.size))
            r = math.hypot(x[ix], y[iy])
            th = math.atan2(y[iy], x[ix])
            want = sum(modal_field(s, p, r, th) for s in sols)
            assert abs(u[iy, ix] - want) <= 1e-10 * max(abs(want), 1e-8)

    def test_grid_contains_origin(self):
        p = base_params(n_i=2.0, k=1.5)
        sol = ds.solve_modal(p, ds.ModalSource(nu=0, interior_volume=(1.0, 1.1)))
        x, y, u = ds.field_grid(p, sol, extent=(-1.0, 1.0, -1.0, 1.0), nx=11, ny=11)
        want = sol.A_int + sol.particular[0]  # J_0(0) = 1 twice
        assert abs(u[5, 5] - want) < 1e-12 * abs(want)

    def test_whispering_mode_hugs_interface(self):
        # resonantly excited field concentrates in an annulus at r ~ 1,
        # decaying quickly away from the interface
        k = 1.77945199481921
        p = base_params(n_i=100.0, k=k)
        numax = ds.recommended_nu_max(p, 2.2)
        sols = ds.solve_plane_wave(p, 1.0, math.pi / 6, numax, r_eval=2.2)
        x, y, u = ds.field_grid(p, sols, extent=(-2.2, 2.2, -2.2, 2.2), nx=221, ny=221)
        xx, yy = np.meshgrid(x, y)
        rr = np.hypot(xx, yy)
        near = np.abs(u)[(rr > 0.8) & (rr < 1.2)].max()
        far = np.abs(u)[rr > 1.5].max()
        assert near > 10.0 * far
