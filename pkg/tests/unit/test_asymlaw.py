"""Unit tests for the closed-form limit laws."""

# ================================== Imports ================================== #
# Standard Library
import math

# Third-party
import numpy as np
import pytest

# Local Application
from src.models.law import LawPoint
from src.services.asymlaw import (
    ExpansionKind,
    asym_log_qpoch,
    covariance_spec,
    d_beta,
    drift_identity_residual,
    drift_terms,
    drift_terms_closed,
    expansion_error,
    h_beta,
    h_composition_residual,
    h_partial_x,
    h_partial_y,
    law_values,
    lclt_prediction,
    min_matrix_inverse,
    mu_beta,
    proof_residuals,
    rate_a,
    rate_a_derivatives,
    rate_derivative_residuals,
    rate_mantel_arguments,
    sigma_beta,
    sigma_N_beta,
    starr_density,
    starr_mixed_difference_residual,
)
from src.services.qnum import mantel_residual
from src.utils.errors import DomainError
from src.utils.numdiff import central_first

GRID = [
    LawPoint(beta=beta, x=x, y=y)
    for beta in (0.5, 1.0, 4.0)
    for x in (0.1, 0.5, 0.9)
    for y in (0.3, 0.7)
]
MIDPOINT = LawPoint(beta=1.0, x=0.5, y=0.5)


# ================================== Test Classes ============================= #
class TestLimitShape:
    """Test cases for the limit height density."""

    def test_reference_value(self):
        """Test h_1(1/2, 1/2)."""
        assert h_beta(MIDPOINT) == pytest.approx(0.280926, abs=1e-5)

    @pytest.mark.parametrize("p", GRID)
    def test_inside_support_and_symmetric(self, p):
        """Test max(x+y-1, 0) < h < min(x, y) and h(x, y) = h(y, x)."""
        lo, hi = p.support
        h = h_beta(p)
        assert lo < h < hi
        assert h_beta(p.swapped()) == pytest.approx(h, abs=1e-15)

    def test_small_beta_limit(self):
        """Test that h tends to xy as beta goes to 0."""
        assert h_beta(LawPoint(beta=0.001, x=0.3, y=0.6)) == pytest.approx(
            0.18, abs=1e-4
        )

    @pytest.mark.parametrize("p", GRID[::3])
    def test_partial_derivatives(self, p):
        """Test the closed-form partials against central differences."""
        dx = central_first(lambda x: h_beta(p.model_copy(update={"x": x})), p.x, 1e-5)
        dy = central_first(lambda y: h_beta(p.model_copy(update={"y": y})), p.y, 1e-5)
        assert h_partial_x(p) == pytest.approx(dx, abs=1e-8)
        assert h_partial_y(p) == pytest.approx(dy, abs=1e-8)

    @pytest.mark.parametrize("p", GRID[::4])
    def test_permuton_density(self, p):
        """Test the density against the mixed difference of h."""
        assert starr_density(p) > 0.0
        assert starr_mixed_difference_residual(p) < 1e-4


class TestGaussianScale:
    """Test cases for d_beta and sigma_beta."""

    @pytest.mark.parametrize("p", GRID[::5])
    def test_sigma_from_d(self, p):
        """Test sigma = sqrt(beta) e^d and sigma_N = sqrt(N)/sigma."""
        assert sigma_beta(p) == pytest.approx(math.sqrt(p.beta) * math.exp(d_beta(p)))
        assert sigma_N_beta(p, 400) == pytest.approx(20.0 / sigma_beta(p))

    def test_sigma_N_requires_positive_N(self):
        """Test that N = 0 is rejected."""
        with pytest.raises(DomainError):
            sigma_N_beta(MIDPOINT, 0)

    def test_lclt_peak(self):
        """Test the Gaussian prediction at the center of the window."""
        N = 400
        k = h_beta(MIDPOINT) * N
        expected = sigma_beta(MIDPOINT) / math.sqrt(2.0 * math.pi * N)
        assert lclt_prediction(MIDPOINT, N, k) == pytest.approx(expected)


class TestRateFunction:
    """Test cases for the large-deviation rate."""

    def test_reference_value(self):
        """Test a_1(1/2, 1/2; 0.4)."""
        assert rate_a(MIDPOINT, 0.4) == pytest.approx(0.126433, abs=1e-5)

    @pytest.mark.parametrize("p", GRID[::2])
    def test_vanishes_at_the_mode(self, p):
        """Test a(h) = 0 and a'(h) = 0."""
        h = h_beta(p)
        assert abs(rate_a(p, h)) < 1e-10
        assert abs(rate_a_derivatives(p, h)[0]) < 1e-10

    def test_nonnegative(self):
        """Test a >= 0 across the support."""
        lo, hi = MIDPOINT.support
        for delta in np.linspace(lo, hi, 21):
            assert rate_a(MIDPOINT, float(delta)) >= -1e-12

    @pytest.mark.parametrize("p", GRID[::2])
    def test_curvature_is_sigma_squared(self, p):
        """Test a''(h) = sigma^2."""
        second = rate_a_derivatives(p, h_beta(p))[1]
        assert second == pytest.approx(sigma_beta(p) ** 2, rel=1e-10)

    def test_derivatives_against_differences(self):
        """Test the closed forms against central differences at delta = 0.4."""
        first, second = rate_derivative_residuals(MIDPOINT, 0.4)
        assert first < 1e-6
        assert second < 1e-5

    @pytest.mark.parametrize("delta", [-0.1, 0.6])
    def test_outside_support(self, delta):
        """Test that delta outside the support is rejected."""
        with pytest.raises(DomainError):
            rate_a(MIDPOINT, delta)

    def test_derivatives_need_interior(self):
        """Test that derivatives are refused on the boundary."""
        with pytest.raises(DomainError):
            rate_a_derivatives(MIDPOINT, 0.0)

    @pytest.mark.parametrize("p", GRID)
    def test_proof_residuals(self, p):
        """Test the identities reducing the exact law to a Gaussian."""
        assert max(proof_residuals(p)) < 1e-10

    @pytest.mark.parametrize("p", GRID[::3])
    def test_mantel_substitution(self, p):
        """Test the nine-term identity at the rate-function arguments."""
        assert abs(mantel_residual(*rate_mantel_arguments(p))) < 1e-10


class TestDrift:
    """Test cases for the shifted-threshold drift."""

    @pytest.mark.parametrize("p", GRID)
    def test_drift_identity(self, p):
        """Test beta u^2 = v sigma^2 and mu(1) = dh/dy."""
        assert drift_identity_residual(p) < 1e-10

    @pytest.mark.parametrize("p", GRID[::2])
    def test_closed_forms(self, p):
        """Test the odds sums against the closed ratios."""
        np.testing.assert_allclose(drift_terms(p), drift_terms_closed(p), rtol=1e-10)

    def test_mu_is_linear_in_gamma(self):
        """Test mu(0) = 0 and mu(2) = 2 mu(1)."""
        assert mu_beta(MIDPOINT, 0.0) == 0.0
        assert mu_beta(MIDPOINT, 2.0) == pytest.approx(2.0 * mu_beta(MIDPOINT, 1.0))


class TestCovariance:
    """Test cases for the multi-point covariance."""

    @pytest.mark.parametrize("y_list", [(0.3, 0.7), (0.2, 0.5, 0.8), (0.4,)])
    def test_closed_forms(self, y_list):
        """Test diagonal, symmetry, determinant and inverse."""
        spec = covariance_spec(1.0, 0.5, y_list)
        C = np.asarray(spec.C)
        np.testing.assert_allclose(C, C.T, rtol=1e-14)
        for i, y in enumerate(y_list):
            point = LawPoint(beta=1.0, x=0.5, y=y)
            assert C[i, i] == pytest.approx(1.0 / sigma_beta(point) ** 2)
        assert spec.det == pytest.approx(np.linalg.det(C), rel=1e-10)
        identity = C @ np.asarray(spec.inv)
        np.testing.assert_allclose(identity, np.eye(len(y_list)), atol=1e-10)

    def test_positive_correlations(self):
        """Test that heights at two positions are positively correlated."""
        C = np.asarray(covariance_spec(2.0, 0.4, (0.3, 0.6)).C)
        assert C[0, 1] > 0.0

    @pytest.mark.parametrize("y_list", [(0.7, 0.3), (0.3, 0.3), (0.0, 0.5), ()])
    def test_rejects_bad_positions(self, y_list):
        """Test that y_list must increase strictly inside (0, 1)."""
        with pytest.raises(DomainError):
            covariance_spec(1.0, 0.5, y_list)

    def test_min_matrix_inverse(self):
        """Test the tridiagonal inverse against numpy."""
        z = [0.2, 0.5, 0.6, 1.3]
        M = np.minimum.outer(z, z)
        np.testing.assert_allclose(min_matrix_inverse(z), np.linalg.inv(M), atol=1e-12)

    @pytest.mark.parametrize("beta, x", [(0.5, 0.3), (1.0, 0.5), (4.0, 0.8)])
    def test_h_composition(self, beta, x):
        """Test that h restarts on the block after y_prev."""
        assert h_composition_residual(beta, x, 0.3, 0.7) < 1e-10

    def test_h_composition_order(self):
        """Test that y_prev must precede y_next."""
        with pytest.raises(DomainError):
            h_composition_residual(1.0, 0.5, 0.7, 0.3)


class TestExpansions:
    """Test cases for the q-Pochhammer expansions."""

    @pytest.mark.parametrize("kind", [ExpansionKind.FULL, ExpansionKind.LINEAR])
    def test_errors_shrink_like_one_over_N(self, kind):
        """Test error ratios near 4 when N grows fourfold."""
        e1 = expansion_error(1.0, 100, kind, 0.5, 0.5)
        e2 = expansion_error(1.0, 400, kind, 0.5, 0.5)
        assert 2.0 < e1 / e2 < 8.0

    def test_sqrt_errors_shrink_like_one_over_sqrt_N(self):
        """Test an error ratio near 2 when N grows fourfold."""
        e1 = expansion_error(1.0, 100, ExpansionKind.SQRT, 0.5, 0.5)
        e2 = expansion_error(1.0, 400, ExpansionKind.SQRT, 0.5, 0.5)
        assert 1.0 < e1 / e2 < 4.0

    def test_kind_from_string(self):
        """Test that kinds parse from their names."""
        assert asym_log_qpoch(1.0, 100, "qq") == asym_log_qpoch(
            1.0, 100, ExpansionKind.FULL
        )
        with pytest.raises(ValueError):
            asym_log_qpoch(1.0, 100, "bogus")

    def test_bad_arguments(self):
        """Test that nonpositive delta is rejected."""
        with pytest.raises(DomainError):
            asym_log_qpoch(1.0, 100, ExpansionKind.LINEAR, delta=0.0)


class TestLawValues:
    """Test cases for the assembled law values."""

    def test_optional_fields(self):
        """Test that N-, delta- and gamma-dependent fields are filled on request."""
        bare = law_values(MIDPOINT)
        assert bare.sigma_N is None and bare.a is None and bare.mu is None
        full = law_values(MIDPOINT, N=400, delta=0.4, gamma=1.0)
        assert full.h == pytest.approx(0.280926, abs=1e-5)
        assert full.a == pytest.approx(0.126433, abs=1e-5)
        assert full.sigma_N == pytest.approx(20.0 / full.sigma)
        assert full.mu == pytest.approx(h_partial_y(MIDPOINT))
