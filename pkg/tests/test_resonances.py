"""Resonance location, verification, and scan tests."""
import json
import math

import pytest

from helmdisc import resonances as rs
from helmdisc import specfun
from helmdisc.disc_solver import Params
from helmdisc.errors import DomainError, ValidationError


def res_params(n_i, A_N=1.0):
    return Params(n_i=n_i, n_o=1.0, a_i=1.0, a_o=1.0, A_D=1.0, A_N=A_N, k=1.0)


class TestFNu:
    def test_scope_validation(self):
        p = Params(n_i=2.0, n_o=1.0, a_i=2.0, a_o=1.0, A_D=1.0, A_N=1.0, k=1.0)
        with pytest.raises(ValidationError):
            rs.F_nu(p, 0, 1.0)

    @pytest.mark.parametrize("nu,k", [(0, 1.3), (3, 2.0 + 0.2j), (9, 0.7 - 0.1j)])
    def test_no_contrast_wronskian(self, nu, k):
        # n_i = 1, A_N = 1: F reduces to -(J H' - J' H) = -2i/(pi k), never zero
        got = rs.F_nu(res_params(1.0), nu, k)
        want = -2j / (math.pi * k)
        assert abs(got - want) <= 1e-13 * abs(want)

    def test_zero_argument(self):
        with pytest.raises(DomainError):
            rs.F_nu(res_params(2.0), 0, 0.0)

    @pytest.mark.parametrize("nu", [0, 1, 4, 9])
    def test_conjugate_reflection_identity(self, nu):
        # branch-safe reflection: H1(conj z) = conj(2 J(z) - H1(z)) gives
        # F_nu(conj k) = conj(2 W~ - F) with W~ the J-only combination
        n_i, A_N = 2.7, 1.3
        s = math.sqrt(n_i)
        k = 1.4 - 0.35j
        lhs = rs.F_nu(res_params(n_i, A_N), nu, k.conjugate())
        c1 = specfun.cylinder_eval(nu, s * k)
        c0 = specfun.cylinder_eval(nu, k)
        wt = A_N * s * c1.jp * c0.j - c0.jp * c1.j
        rhs = (2 * wt - rs.F_nu(res_params(n_i, A_N), nu, k)).conjugate()
        assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), abs(rhs))


class TestSeeds:
    def test_arithmetic_14_1(self):
        alpha1 = specfun.airy_zeros(1)[0]
        want = (14 + 2.0 ** (-1.0 / 3.0) * alpha1 * 14 ** (1.0 / 3.0)) / 10.0
        got = rs.seed_resonance(14, 1, 100.0)
        assert got.real == pytest.approx(want, rel=1e-14)
        assert got.imag == -1e-3
        assert got.real == pytest.approx(1.847, abs=5e-4)  # paper's true 1.7795: O(1) gap

    def test_monotone_in_m(self):
        seeds = [rs.seed_resonance(7, m, 3.0).real for m in range(1, 6)]
        assert all(b > a for a, b in zip(seeds, seeds[1:]))

    def test_large_nu_limit(self):
        for n_i in (2.0, 100.0):
            r = rs.seed_resonance(4000, 1, n_i).real / 4000
            assert r == pytest.approx(1.0 / math.sqrt(n_i), rel=2e-2)

    def test_requires_positive_nu(self):
        with pytest.raises(DomainError):
            rs.seed_resonance(0, 1, 3.0)


class TestRefine:
    def test_paper_value_14_1(self):
        p = res_params(100.0)
        r = rs.find_resonances(p, 14, 1)[0]
        assert abs(r.k.real - 1.77945199481921) < 1e-10
        assert r.verified

    def test_paper_value_10_5(self):
        p = res_params(100.0)
        r = rs.find_resonances(p, 10, 5)[4]
        assert r.m == 5
        assert abs(r.k.real - 2.75679178324354) < 1e-10
        assert r.verified

    def test_im_negative_where_resolvable(self):
        p = res_params(3.0)
        for nu in (8, 12, 16):
            r = rs.find_resonances(p, nu, 1)[0]
            assert r.k.imag < 0
            assert abs(r.k.imag) > rs.IM_NOISE * abs(r.k)

    def test_residual_scale_invariant(self):
        p = res_params(3.0)
        r = rs.find_resonances(p, 9, 1)[0]
        fm, e, fpm, ep = rs.f_nu_scaled(9, r.k, 3.0, 1.0)
        fp_abs = abs(fpm) * 2.0 ** ep
        assert r.residual < 1e-10 * fp_abs * abs(r.k)

    def test_serialization_roundtrip(self):
        p = res_params(3.0)
        r = rs.find_resonances(p, 9, 1)[0]
        blob = json.dumps({"nu": r.nu, "m": r.m, "re": r.k.real, "im": r.k.imag})
        d = json.loads(blob)
        k2 = complex(d["re"], d["im"])
        fm, e, fpm, ep = rs.f_nu_scaled(d["nu"], k2, 3.0, 1.0)
        step = abs(fm / fpm) * 2.0 ** (e - ep)
        assert step < 1e-10 * abs(k2)


class TestWinding:
    def test_counts_multiple_zeros(self):
        p = res_params(0.5)
        found = rs.find_resonances(p, 2, 3)
        ks = [r.k for r in found]
        re_lo = min(k.real for k in ks) - 0.3
        re_hi = max(k.real for k in ks) + 0.3
        im_lo = min(k.imag for k in ks) - 0.3
        im_hi = max(k.imag for k in ks) + 0.1
        w = rs._winding_rect(2, p, re_lo, re_hi, im_lo, min(im_hi, -1e-4))
        assert w == len(ks)


class TestScan:
    def test_empty_range(self):
        scan = rs.scan_strip(res_params(0.5), [], [1])
        assert scan.resonances == []

    def test_strip_below_axis_ni_half(self):
        scan = rs.scan_strip(res_params(0.5), range(1, 5), range(1, 3))
        assert not scan.errors
        assert all(r.verified for r in scan.resonances)
        assert scan.delta > 0.5

    def test_whisper_trend_ni_3(self):
        p = res_params(3.0)
        ims = []
        res = []
        for nu in range(10, 16):
            r = rs.find_resonances(p, nu, 1)[0]
            ims.append(abs(r.k.imag))
            res.append(r.k.real)
        assert all(b < a for a, b in zip(ims, ims[1:]))
        assert all(b > a for a, b in zip(res, res[1:]))
