import math

import numpy as np
import pytest

from mzvohno.errors import ConvergenceError, DomainError, QuadratureError
from mzvohno.genfun import F_chain, eval_F, eval_f, f_chain
from mzvohno.indices import enumerate_compositions, enumerate_pair_compositions
from mzvohno.mellin import (PowerSeriesFunction, QuadratureConfig, coefficient_stream, eval_Psi,
                            forward_mellin, inverse_mellin, inverse_mellin_series,
                            psi_landen_terms, vartheta_inverse)
from mzvohno.series_eval import EvalConfig, eval_mpl, pole_coefficients

from oracles import LI2_HALF, LN2, ZETA2, residue_limit


class TestInverse:
    def test_log(self, cfg):
        assert inverse_mellin(f_chain("((1,1))"), 0.5, cfg) == pytest.approx(LN2, abs=1e-14)

    def test_dilog(self, cfg):
        assert inverse_mellin(F_chain((2,)), 0.5, cfg) == pytest.approx(LI2_HALF, abs=1e-14)

    def test_pair_composition_argument(self, cfg):
        assert inverse_mellin("((1,1))", 0.25, cfg) == pytest.approx(-math.log(0.75), abs=1e-14)

    def test_vanishes_at_zero(self, cfg):
        # no constant term: phi(z) ~ c_1 z
        c1 = pole_coefficients(f_chain("((2,1))"), 1, cfg)[0]
        assert inverse_mellin(f_chain("((2,1))"), 1e-8, cfg) == pytest.approx(c1 * 1e-8, rel=1e-6)

    @pytest.mark.parametrize("z", [0.0, 1.0, -0.2])
    def test_domain(self, cfg, z):
        with pytest.raises(DomainError):
            inverse_mellin(f_chain("((1,1))"), z, cfg)

    def test_too_close_to_one(self, cfg):
        with pytest.raises(ConvergenceError):
            inverse_mellin(f_chain("((1,1))"), 0.9999, cfg)

    @pytest.mark.parametrize("w", [1, 2, 3, 4])
    @pytest.mark.parametrize("z", [0.3, 0.6])
    def test_Phi_is_polylog(self, cfg, w, z):
        for k in enumerate_compositions(w):
            assert inverse_mellin(F_chain(k), z, cfg) == pytest.approx(eval_mpl(k, z, cfg), abs=1e-9)


class TestStreams:
    def test_theta_multiplies_by_p(self, cfg):
        phi = coefficient_stream(f_chain("((2,1))"), 50, cfg)
        p = np.arange(1, 51)
        assert np.array_equal(phi.theta(2).coefficients, phi.coefficients * p ** 2)
        assert np.array_equal(phi.shift_z().coefficients[1:], phi.coefficients)

    @pytest.mark.parametrize("p", [1, 2, 5])
    def test_theta_matches_lambda_multiplier(self, cfg, p):
        # the stream of lam * f(lam) is p * c_p
        near = EvalConfig(truncation_N=20_000, lambda_guard=1e-6)
        cs = f_chain("((1,2))")
        c = pole_coefficients(cs, p, cfg)[p - 1]
        ref = residue_limit(lambda lam: lam * eval_f("((1,2))", lam, near), p)
        assert p * c == pytest.approx(ref, rel=1e-6)

    @pytest.mark.parametrize("m", [0, 1])
    def test_z_shift(self, m):
        # stream of (lam-1)^m f(lam-1) evaluated at z equals z theta^m phi(z)
        near = EvalConfig(truncation_N=20_000, lambda_guard=1e-6)
        z, q_max = 0.5, 45
        h = lambda lam: (lam - 1) ** m * eval_f("((2,1))", lam - 1, near)
        coeffs = [residue_limit(h, q) for q in range(1, q_max + 1)]
        lhs = math.fsum(c * z ** q for q, c in zip(range(1, q_max + 1), coeffs))
        phi = coefficient_stream(f_chain("((2,1))"), q_max, near)
        rhs = z * phi.theta(m)(z)
        assert lhs == pytest.approx(rhs, abs=1e-7)

    def test_sum_and_scale(self):
        a = PowerSeriesFunction([1.0, 2.0], exact=True)
        b = PowerSeriesFunction([0.5], exact=True)
        assert (a + b)(0.5) == pytest.approx(1.5 * 0.5 + 2.0 * 0.25)
        assert a.scale(2)(0.5) == pytest.approx(2.0)
        assert (a + b).truncation_bound(0.9) == 0.0


class TestForward:
    def test_log_gives_zeta_two(self):
        v = forward_mellin(lambda z: -math.log1p(-z), 0.0)
        assert v == pytest.approx(ZETA2, abs=1e-9)

    def test_dilog_stream(self, cfg):
        phi = inverse_mellin_series(F_chain((2,)), 2000, cfg)
        assert forward_mellin(phi, 0.5) == pytest.approx(eval_F((2,), 0.5, cfg), abs=1e-8)

    def test_monomial(self):
        phi = PowerSeriesFunction([1.0], exact=True)
        assert forward_mellin(phi, -1.0) == pytest.approx(0.5, abs=1e-14)

    def test_cut_mode_agrees(self):
        qc = QuadratureConfig(endpoint_mode="cut")
        v = forward_mellin(lambda z: -math.log1p(-z), -0.5, qc)
        assert v == pytest.approx(forward_mellin(lambda z: -math.log1p(-z), -0.5), abs=1e-9)

    def test_with_error(self):
        est = forward_mellin(PowerSeriesFunction([1.0], exact=True), 0.0, with_error=True)
        assert est.value == pytest.approx(1.0) and est.error <= 1e-9

    def test_domain(self):
        with pytest.raises(DomainError):
            forward_mellin(lambda z: z, 1.0)

    @pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
    def test_quadrature_error(self):
        qc = QuadratureConfig(node_count=16, abs_tol=1e-300)
        with pytest.raises(QuadratureError):
            forward_mellin(lambda z: math.sqrt(z) * math.sin(1 / (1.001 - z)), 0.2, qc)

    @pytest.mark.parametrize("kw", [dict(node_count=8), dict(abs_tol=0), dict(endpoint_mode="x")])
    def test_config_validation(self, kw):
        with pytest.raises(ValueError):
            QuadratureConfig(**kw)

    @pytest.mark.parametrize("w", [2, 3])
    @pytest.mark.parametrize("lam", [0.0, 0.5])
    def test_round_trip(self, cfg, w, lam):
        for pc in enumerate_pair_compositions(w):
            phi = inverse_mellin_series(pc, 2000, cfg)
            assert forward_mellin(phi, lam) == pytest.approx(eval_f(pc, lam, cfg), abs=1e-6)


class TestVarthetaInverse:
    def test_abel_limit(self, cfg):
        phi = inverse_mellin_series("((1,1))", 2000, cfg)
        assert vartheta_inverse(phi, ZETA2, 1.0) == pytest.approx(0.0, abs=1e-10)

    def test_monomial(self):
        assert vartheta_inverse(PowerSeriesFunction([1.0], exact=True), 0.0, 0.5) == pytest.approx(0.5)

    def test_dilog(self, cfg):
        phi = coefficient_stream(f_chain("((1,1))"), 200, cfg)
        assert vartheta_inverse(phi, ZETA2, 0.5) == pytest.approx(LI2_HALF - ZETA2, abs=1e-13)

    def test_needs_tail_at_one(self, cfg):
        phi = coefficient_stream(f_chain("((1,1))"), 200, cfg)
        with pytest.raises(ConvergenceError):
            vartheta_inverse(phi, ZETA2, 1.0)


class TestPsi:
    def test_k1(self, cfg):
        assert eval_Psi((1,), 0.4, cfg) == pytest.approx(math.log(5 / 3), abs=1e-13)

    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    @pytest.mark.parametrize("z", [0.2, 0.4])
    def test_scalar_routes(self, cfg, k, z):
        a = eval_Psi((k,), z, cfg, route="a", with_error=True)
        b = eval_Psi((k,), z, cfg, route="b", with_error=True)
        assert abs(a.value - b.value) <= a.error + b.error + 1e-13

    @pytest.mark.parametrize("k", [(2, 1), (1, 2), (1, 1, 1), (2, 2)])
    def test_composite_routes(self, cfg, k):
        a = eval_Psi(k, 0.3, cfg, route="a")
        b = eval_Psi(k, 0.3, cfg, route="b")
        assert a == pytest.approx(b, abs=1e-11)

    def test_landen_terms(self):
        assert len(psi_landen_terms(4)) == 8

    def test_route_b_domain(self, cfg):
        with pytest.raises(DomainError):
            eval_Psi((2,), 0.6, cfg, route="b")
        assert eval_Psi((2,), 0.6, cfg, route="a") > 0
