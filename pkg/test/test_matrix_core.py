"""
Tests for companion matrices, eigenstructure, exponentials and norms.
"""

import numpy as np
import pytest
from scipy.linalg import expm

from app.matrix_core.linalg import (
    SUPPORTED_NORMS,
    companion,
    eigen,
    exp_diagonal,
    lr_norm,
    mat_exp,
    natural_norm,
    norm_label,
    polynomial_roots,
    real_part,
)
from app.shared.errors import DistinctnessError, NumericalError, ParameterError

SEASONAL_BETAS = (2.1, 6.0, 0.6)


def taylor_expm(A: np.ndarray, ntaylor: int = 18) -> np.ndarray:
    """Scaling and squaring with a truncated Taylor series"""
    n = A.shape[0]
    norm = np.linalg.norm(A, ord=1)
    nsquare = max(0, int(np.ceil(np.log2(norm / 0.5)))) if norm > 0.5 else 0
    coefficients = np.ones(ntaylor + 1)
    for i in range(ntaylor):
        coefficients[i + 1] = coefficients[i] / (i + 1)
    scaled = A / 2.0 ** nsquare
    result = np.identity(n) * coefficients[ntaylor]
    for i in range(ntaylor - 1, -1, -1):
        result = scaled @ result + np.identity(n) * coefficients[i]
    for _ in range(nsquare):
        result = result @ result
    return result


def _relative(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


class TestCompanion:
    def test_layout(self):
        B = companion(SEASONAL_BETAS).matrix
        expected = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-0.6, -6.0, -2.1]])
        np.testing.assert_array_equal(B, expected)

    def test_order_one(self):
        np.testing.assert_array_equal(companion((0.5,)).matrix, [[-0.5]])

    def test_characteristic_polynomial(self, rng):
        C = companion(SEASONAL_BETAS)
        for x in rng.uniform(-3.0, 3.0, size=5):
            det = np.linalg.det(x * np.eye(3) - C.matrix)
            assert det == pytest.approx(np.polyval(C.char_poly, x), rel=1e-10, abs=1e-12)

    @pytest.mark.parametrize("betas", [(1.0, 0.0), (), (1.0, float("nan"))])
    def test_invalid(self, betas):
        with pytest.raises(ParameterError):
            companion(betas)


class TestEigen:
    def test_seasonal_roots(self):
        eig = eigen(companion(SEASONAL_BETAS))
        real_roots = eig.eigenvalues[np.abs(eig.eigenvalues.imag) == 0.0]
        pair = eig.eigenvalues[eig.eigenvalues.imag != 0.0]
        assert real_roots.shape == (1,) and pair.shape == (2,)
        assert real_roots[0].real == pytest.approx(-0.1036, abs=1e-3)
        assert pair.real == pytest.approx([-0.998, -0.998], abs=1e-3)
        assert eig.eta_max == pytest.approx(real_roots[0].real)
        residual = np.abs(np.polyval(companion(SEASONAL_BETAS).char_poly, eig.eigenvalues))
        assert residual.max() < 1e-12

    def test_matches_independent_root_finder(self):
        def key(z):
            return (round(z.real, 8), z.imag)

        ours = np.array(sorted(eigen(companion(SEASONAL_BETAS)).eigenvalues, key=key))
        reference = np.array(sorted(np.roots([1.0, *SEASONAL_BETAS]), key=key))
        np.testing.assert_allclose(ours, reference, rtol=1e-10)

    def test_quadratic(self):
        eig = eigen(companion((3.0, 2.0)))
        np.testing.assert_allclose(np.sort(eig.eigenvalues.real), [-2.0, -1.0], atol=1e-13)
        assert eig.eta_max == pytest.approx(-1.0, abs=1e-13)

    def test_scalar(self):
        eig = eigen(companion((0.5,)))
        assert eig.eigenvalues[0] == pytest.approx(-0.5)
        np.testing.assert_array_equal(eig.P, [[1.0]])

    def test_diagonalises(self):
        C = companion(SEASONAL_BETAS)
        eig = eigen(C)
        assert _relative(C.matrix @ eig.P, eig.P @ np.diag(eig.eigenvalues)) < 1e-10
        assert _relative(eig.P @ eig.P_inv, np.eye(3)) < 1e-10
        rebuilt = real_part(eig.P @ np.diag(eig.eigenvalues) @ eig.P_inv)
        assert _relative(rebuilt, C.matrix) < 1e-10

    def test_repeated_root(self):
        with pytest.raises(DistinctnessError):
            eigen(companion((2.0, 1.0)))

    def test_polynomial_roots_conjugate_pairs(self):
        roots = polynomial_roots([1.0, 0.0, 1.0])
        np.testing.assert_allclose(np.sort(roots.imag), [-1.0, 1.0], atol=1e-14)
        np.testing.assert_allclose(roots.real, [0.0, 0.0], atol=1e-14)

    def test_structure_is_read_only(self):
        eig = eigen(companion(SEASONAL_BETAS))
        with pytest.raises(ValueError):
            eig.P[0, 0] = 2.0


class TestMatExp:
    @pytest.mark.parametrize("t", [0.1, 1.0, 5.0, 6.5, 10.0])
    def test_series_oracle(self, t):
        C = companion(SEASONAL_BETAS)
        assert _relative(mat_exp(C, t), taylor_expm(C.matrix * t)) < 1e-10
        assert _relative(mat_exp(C, t), expm(C.matrix * t)) < 1e-10

    def test_identity_at_zero(self):
        np.testing.assert_allclose(mat_exp(companion(SEASONAL_BETAS), 0.0), np.eye(3), atol=1e-14)

    def test_semigroup(self, rng):
        C = companion(SEASONAL_BETAS)
        for s, t in rng.uniform(0.0, 5.0, size=(10, 2)):
            assert _relative(mat_exp(C, s) @ mat_exp(C, t), mat_exp(C, s + t)) < 1e-10

    def test_derivative(self):
        C = companion(SEASONAL_BETAS)
        t, h = 1.3, 1e-6
        finite = (mat_exp(C, t + h) - mat_exp(C, t)) / h
        assert _relative(finite, C.matrix @ mat_exp(C, t)) < 1e-4

    def test_result_is_real(self):
        assert not np.iscomplexobj(mat_exp(companion(SEASONAL_BETAS), 2.0))

    def test_exp_diagonal(self):
        eig = eigen(companion((3.0, 2.0)))
        np.testing.assert_allclose(np.sort(exp_diagonal(eig, 1.0).real), np.exp([-2.0, -1.0]), rtol=1e-12)


class TestNorms:
    def test_identity(self):
        for r in SUPPORTED_NORMS:
            assert lr_norm(np.eye(4), r) == pytest.approx(1.0)

    def test_column_and_row_sums(self):
        C = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert lr_norm(C, 1) == pytest.approx(6.0)
        assert lr_norm(C, np.inf) == pytest.approx(7.0)
        assert lr_norm(C, "inf") == pytest.approx(7.0)

    def test_spectral(self):
        assert lr_norm(np.diag([3.0, -5.0]), 2) == pytest.approx(5.0)
        C = np.array([[1.0, -2.0], [3.0, 4.0]])
        assert lr_norm(C, 2) == pytest.approx(np.linalg.svd(C, compute_uv=False)[0])

    @pytest.mark.parametrize("r", [3, 0.5, "two"])
    def test_unsupported(self, r):
        with pytest.raises(ParameterError):
            lr_norm(np.eye(2), r)

    def test_labels(self):
        assert [norm_label(r) for r in SUPPORTED_NORMS] == ["r1", "r2", "rinf"]
        assert norm_label("inf") == "rinf"

    def test_natural_norm_of_B(self):
        C = companion(SEASONAL_BETAS)
        eig = eigen(C)
        largest = float(np.max(np.abs(eig.eigenvalues)))
        for r in SUPPORTED_NORMS:
            assert natural_norm(C.matrix, eig, r) == pytest.approx(largest, rel=1e-10)
            assert natural_norm(np.eye(3), eig, r) == pytest.approx(1.0, rel=1e-10)

    def test_natural_norm_of_vector(self):
        eig = eigen(companion(SEASONAL_BETAS))
        c = np.array([0.0, 0.0, 1.0])
        assert natural_norm(c, eig, 2) == pytest.approx(np.linalg.norm(eig.P_inv @ c))

    def test_exponential_bound(self, rng):
        C = companion(SEASONAL_BETAS)
        eig = eigen(C)
        for t in rng.uniform(0.0, 10.0, size=100):
            bound = np.exp(eig.eta_max * t) * (1.0 + 1e-9)
            for r in SUPPORTED_NORMS:
                assert natural_norm(mat_exp(C, t), eig, r) <= bound


def test_real_part_rejects_residue():
    with pytest.raises(NumericalError):
        real_part(np.array([[1.0 + 1e-3j]]))
    np.testing.assert_array_equal(real_part(np.array([[2.0 + 1e-14j]])), [[2.0]])
