import math

import numpy as np
import pytest

from dtslab.bounds import (
    BoundKind,
    ThetaPoint,
    WeightMatrix,
    c_r_closed_2param,
    c_r_closed_3param,
    c_r_general,
    load_weight,
    optimal_gaussian_tradeoff,
    rld_inverse_2param,
    rld_inverse_3param,
)
from dtslab.errors import DomainError


def random_psd_2(rng):
    a = rng.normal(size=(2, 2))
    return WeightMatrix(a @ a.T)


def random_block_3(rng):
    g1 = rng.uniform(0.1, 2.0)
    mag = rng.uniform(0.0, 0.95) * g1
    ang = rng.uniform(0.0, 2.0 * math.pi)
    g0 = rng.uniform(0.0, 2.0)
    return g0, g1, mag * math.cos(ang), mag * math.sin(ang)


class TestThetaPoint:
    def test_zeta_accessor_exact(self):
        theta = ThetaPoint(0.3, -1.2, 1.0)
        assert theta.zeta == complex(0.3, -1.2) / math.sqrt(2.0)

    def test_from_zeta_roundtrip(self):
        theta = ThetaPoint.from_zeta(0.3 + 0.4j, 0.5)
        assert theta.zeta == pytest.approx(0.3 + 0.4j, abs=1e-15)
        assert theta.n_mean == 0.5

    @pytest.mark.parametrize("bad", [0.0, -1.0])
    def test_rejects_nonpositive_n(self, bad):
        with pytest.raises(DomainError):
            ThetaPoint(0.0, 0.0, bad)


class TestWeightMatrix:
    def test_two_param_decomposition_roundtrip(self):
        w = WeightMatrix.from_two_param_gs(1.2, 0.3, -0.4)
        assert w.two_param_gs() == pytest.approx((1.2, 0.3, -0.4), abs=1e-15)
        assert np.allclose(w.entries, [[1.5, -0.4], [-0.4, 0.9]])
        # the matrix round-trip is exact
        again = WeightMatrix.from_two_param_gs(*w.two_param_gs())
        assert np.array_equal(again.entries, w.entries)

    def test_three_param_block_roundtrip(self):
        w = WeightMatrix.from_three_param_gs(0.7, 1.0, 0.2, 0.1)
        assert w.three_param_gs() == pytest.approx((0.7, 1.0, 0.2, 0.1), abs=1e-15)

    def test_rejects_off_block(self):
        m = np.eye(3)
        m[0, 2] = m[2, 0] = 0.5
        w = WeightMatrix(m)
        assert not w.is_block_form()
        with pytest.raises(DomainError):
            w.three_param_gs()

    def test_rejects_asymmetric(self):
        with pytest.raises(DomainError):
            WeightMatrix(np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_rejects_indefinite(self):
        with pytest.raises(DomainError):
            WeightMatrix(np.diag([1.0, -0.1]))

    def test_rejects_wrong_dim(self):
        with pytest.raises(DomainError):
            WeightMatrix(np.eye(4))

    def test_symmetrizes_roundoff(self):
        m = np.array([[1.0, 0.25 + 1e-14], [0.25, 1.0]])
        w = WeightMatrix(m)
        assert np.allclose(w.entries, w.entries.T)


class TestRldInverse:
    def test_2param_at_n1(self):
        expected = np.array([[1.5, 0.5j], [-0.5j, 1.5]])
        assert np.allclose(rld_inverse_2param(1.0), expected, atol=1e-15)

    def test_2param_at_half(self):
        expected = np.array([[1.0, 0.5j], [-0.5j, 1.0]])
        assert np.allclose(rld_inverse_2param(0.5), expected, atol=1e-15)

    @pytest.mark.parametrize("bad", [0.0, -0.5])
    def test_rejects_nonpositive_n(self, bad):
        with pytest.raises(DomainError):
            rld_inverse_2param(bad)
        with pytest.raises(DomainError):
            rld_inverse_3param(bad)

    def test_3param_block(self):
        m = rld_inverse_3param(1.0)
        assert np.allclose(m[:2, :2], rld_inverse_2param(1.0))
        assert m[2, 2] == pytest.approx(2.0)
        assert np.allclose(m[2, :2], 0) and np.allclose(m[:2, 2], 0)

    def test_3param_n2_entry(self):
        assert rld_inverse_3param(2.0)[2, 2] == pytest.approx(6.0)

    @pytest.mark.parametrize("n_mean", [0.3, 0.5, 1.0, 2.0, 7.5])
    def test_hermitian_with_psd_real_part(self, n_mean):
        for m in (rld_inverse_2param(n_mean), rld_inverse_3param(n_mean)):
            assert np.allclose(m, m.conj().T)
            assert m[-1, -1].imag == 0.0
            assert np.linalg.eigvalsh(m.real).min() > 0


class TestCrGeneral:
    def test_identity2(self):
        assert c_r_general(WeightMatrix.identity(2), rld_inverse_2param(1.0)).value == pytest.approx(
            4.0, abs=1e-12
        )

    def test_identity3(self):
        assert c_r_general(WeightMatrix.identity(3), rld_inverse_3param(1.0)).value == pytest.approx(
            6.0, abs=1e-12
        )

    def test_zero_weight(self):
        assert c_r_general(WeightMatrix(np.zeros((2, 2))), rld_inverse_2param(1.0)).value == 0.0

    def test_dim_mismatch(self):
        with pytest.raises(DomainError):
            c_r_general(WeightMatrix.identity(3), rld_inverse_2param(1.0))

    def test_nonhermitian_rejected(self):
        with pytest.raises(DomainError):
            c_r_general(WeightMatrix.identity(2), np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_value_nonnegative_on_random_psd(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            w = random_psd_2(rng)
            assert c_r_general(w, rld_inverse_2param(0.7)).value >= 0.0


class TestClosedForms:
    def test_identity_values(self):
        assert c_r_closed_2param(1.0, 0.0, 0.0, 1.0).value == pytest.approx(4.0, abs=1e-14)
        assert c_r_closed_3param(1.0, 1.0, 0.0, 0.0, 1.0).value == pytest.approx(6.0, abs=1e-14)

    def test_degenerate_weight(self):
        # G = diag(2, 0): radical vanishes
        assert c_r_closed_2param(1.0, 1.0, 0.0, 1.0).value == pytest.approx(3.0, abs=1e-14)

    def test_g0_zero_reduces_to_2param(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            _, g1, g2, g3 = random_block_3(rng)
            n = rng.uniform(0.2, 3.0)
            v3 = c_r_closed_3param(0.0, g1, g2, g3, n).value
            v2 = c_r_closed_2param(g1, g2, g3, n).value
            assert v3 == pytest.approx(v2, abs=1e-14)

    def test_psd_violation_rejected(self):
        with pytest.raises(DomainError):
            c_r_closed_2param(1.0, 1.5, 0.0, 1.0)
        with pytest.raises(DomainError):
            c_r_closed_3param(-0.5, 1.0, 0.0, 0.0, 1.0)

    def test_kinds(self):
        assert c_r_closed_2param(1.0, 0.0, 0.0, 1.0).kind is BoundKind.CLOSED_2PARAM
        assert c_r_closed_3param(0.0, 1.0, 0.0, 0.0, 1.0).kind is BoundKind.CLOSED_3PARAM

    @pytest.mark.parametrize("n_mean", [0.5, 1.0, 2.0])
    def test_matches_general_2param(self, n_mean):
        rng = np.random.default_rng(17)
        j_inv = rld_inverse_2param(n_mean)
        for _ in range(100):
            w = random_psd_2(rng)
            g1, g2, g3 = w.two_param_gs()
            closed = c_r_closed_2param(g1, g2, g3, n_mean).value
            general = c_r_general(w, j_inv).value
            assert abs(closed - general) < 1e-10

    @pytest.mark.parametrize("n_mean", [0.5, 1.0, 2.0])
    def test_matches_general_3param_block(self, n_mean):
        rng = np.random.default_rng(19)
        j_inv = rld_inverse_3param(n_mean)
        for _ in range(100):
            g0, g1, g2, g3 = random_block_3(rng)
            w = WeightMatrix.from_three_param_gs(g0, g1, g2, g3)
            closed = c_r_closed_3param(g0, g1, g2, g3, n_mean).value
            general = c_r_general(w, j_inv).value
            assert abs(closed - general) < 1e-10


class TestBoundProperties:
    def test_homogeneity(self):
        rng = np.random.default_rng(23)
        j_inv = rld_inverse_2param(0.8)
        for _ in range(20):
            w = random_psd_2(rng)
            c = rng.uniform(0.0, 3.0)
            scaled = WeightMatrix(c * w.entries)
            assert c_r_general(scaled, j_inv).value == pytest.approx(
                c * c_r_general(w, j_inv).value, rel=1e-10, abs=1e-12
            )

    def test_superadditivity(self):
        # from the variational form inf{Tr G V : V >= Jinv}: the infimum of a
        # sum dominates the sum of infima, so C_R(G1 + G2) >= C_R(G1) + C_R(G2)
        rng = np.random.default_rng(29)
        j_inv = rld_inverse_2param(1.3)
        for _ in range(50):
            w1 = random_psd_2(rng)
            w2 = random_psd_2(rng)
            total = WeightMatrix(w1.entries + w2.entries)
            lhs = c_r_general(total, j_inv).value
            rhs = c_r_general(w1, j_inv).value + c_r_general(w2, j_inv).value
            assert lhs >= rhs - 1e-10


class TestGaussianTradeoff:
    def test_isotropic_needs_no_squeezing(self):
        for n_mean in (0.5, 1.0, 2.0):
            t = optimal_gaussian_tradeoff(1.0, 0.0, 0.0, n_mean)
            assert abs(t.squeeze_r) < 1e-6
            assert t.achieved == pytest.approx(2.0 * (n_mean + 0.5) + 1.0, abs=1e-9)

    def test_anisotropic_squeeze_against_calculus_oracle(self):
        # minimizing A e^{2r} + B e^{-2r} gives e^{2 r*} = sqrt(B / A), i.e.
        # e^{2 r*} = sqrt((g1 - g2) / (g1 + g2)) for g3 = 0, and the value
        # 2 (N + 1/2) g1 + sqrt(g1^2 - g2^2)
        g1, g2, n_mean = 1.0, 0.6, 1.0
        t = optimal_gaussian_tradeoff(g1, g2, 0.0, n_mean)
        assert math.exp(2.0 * t.squeeze_r) == pytest.approx(
            math.sqrt((g1 - g2) / (g1 + g2)), abs=1e-6
        )
        assert t.achieved == pytest.approx(
            2.0 * (n_mean + 0.5) * g1 + math.sqrt(g1 * g1 - g2 * g2), abs=1e-9
        )

    def test_grid_scan_never_beats_optimum(self):
        g1, g2, g3, n_mean = 1.1, 0.4, -0.3, 0.7
        closed = c_r_closed_2param(g1, g2, g3, n_mean).value
        t = optimal_gaussian_tradeoff(g1, g2, g3, n_mean)
        assert t.achieved == pytest.approx(closed, abs=1e-6)
        g = WeightMatrix.from_two_param_gs(g1, g2, g3).entries
        sigma_rho = (n_mean + 0.5) * np.eye(2)
        for r in np.linspace(-2.0, 2.0, 41):
            for phi in np.linspace(0.0, math.pi, 37):
                c, s = math.cos(phi), math.sin(phi)
                rot = np.array([[c, -s], [s, c]])
                sigma_m = 0.5 * rot @ np.diag([math.exp(2 * r), math.exp(-2 * r)]) @ rot.T
                probe = float(np.trace(g @ (sigma_rho + sigma_m)))
                assert probe >= closed - 1e-9

    def test_rejects_bad_inputs(self):
        with pytest.raises(DomainError):
            optimal_gaussian_tradeoff(0.0, 0.0, 0.0, 1.0)
        with pytest.raises(DomainError):
            optimal_gaussian_tradeoff(1.0, 0.0, 0.0, -1.0)
        with pytest.raises(DomainError):
            optimal_gaussian_tradeoff(1.0, 2.0, 0.0, 1.0)


class TestLoadWeight:
    def test_presets(self):
        assert np.array_equal(load_weight("identity2").entries, np.eye(2))
        assert np.array_equal(load_weight("identity3").entries, np.eye(3))

    def test_file_roundtrip(self, tmp_path):
        path = tmp_path / "w.txt"
        path.write_text("2\n1.5 -0.4\n-0.4 0.9\n")
        w = load_weight(str(path))
        assert np.allclose(w.entries, [[1.5, -0.4], [-0.4, 0.9]])

    def test_missing_file(self):
        with pytest.raises(ValueError):
            load_weight("no/such/file.txt")

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("2\n1 2 3\n")
        with pytest.raises(ValueError):
            load_weight(str(path))

    def test_non_psd_file_is_domain_error(self, tmp_path):
        path = tmp_path / "indef.txt"
        path.write_text("2\n1 0 0 -1\n")
        with pytest.raises(DomainError):
            load_weight(str(path))
