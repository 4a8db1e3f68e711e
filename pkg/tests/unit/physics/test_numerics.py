"""Tests for grids, quadrature and the eigensolver (physics.numerics)."""

import math

import numpy as np
import pytest

from composite_entropy.physics.errors import (
    InvalidParams,
    NoConvergence,
    NotSymmetric,
    QuadratureNotConverged,
)
from composite_entropy.physics.numerics import (
    Grid1D,
    QuadratureSpec,
    check_symmetric,
    gauss_hermite_rule,
    gauss_legendre_panels,
    integrate_1d,
    refine_until_converged,
    subdivide,
    symmetric_eigs,
    symmetric_eigvals,
    trapezoid_rule,
)


class TestGrid:
    """Grid1D."""

    def test_closed_grid(self):
        grid = Grid1D(-1.0, 1.0, 5)

        assert grid.spacing == 0.5
        assert grid.points.tolist() == [-1.0, -0.5, 0.0, 0.5, 1.0]
        assert grid.weights.tolist() == [0.25, 0.5, 0.5, 0.5, 0.25]

    def test_periodic_grid(self):
        grid = Grid1D.symmetric(2.0, 4, periodic=True)

        assert grid.spacing == 1.0
        assert grid.points.tolist() == [-2.0, -1.0, 0.0, 1.0]
        assert grid.weights.sum() == pytest.approx(4.0)

    @pytest.mark.parametrize(
        ("grid", "n"),
        [(Grid1D(0.0, 1.0, 5), 9), (Grid1D(0.0, 1.0, 4, periodic=True), 8)],
    )
    def test_refined_halves_the_spacing(self, grid, n):
        finer = grid.refined()

        assert finer.n == n
        assert finer.spacing == pytest.approx(grid.spacing / 2)
        assert (finer.lo, finer.hi) == (grid.lo, grid.hi)

    @pytest.mark.parametrize(("lo", "hi", "n"), [(0.0, 1.0, 1), (1.0, 1.0, 5)])
    def test_rejects(self, lo, hi, n):
        with pytest.raises(InvalidParams):
            Grid1D(lo, hi, n)


class TestRules:
    """Quadrature nodes and weights."""

    def test_trapezoid_integrates_gaussian(self):
        x, w = trapezoid_rule(-10, 10, 101)

        assert np.sum(w * np.exp(-(x**2))) == pytest.approx(math.sqrt(math.pi))

    def test_gauss_legendre_panels_integrate_polynomials(self):
        x, w = gauss_legendre_panels([0.0, 1.0, 3.0])

        assert x.size == 16
        assert np.sum(w * x**5) == pytest.approx(3**6 / 6)

    def test_subdivide(self):
        assert subdivide([0.0, 1.0, 3.0], 2).tolist() == [0.0, 0.5, 1.0, 2.0, 3.0]

    def test_gauss_hermite_integrates_shifted_gaussian(self):
        x, w = gauss_hermite_rule(32, center=1.5, scale=math.sqrt(8))

        assert np.sum(w * np.exp(-((x - 1.5) ** 2) / 8)) == pytest.approx(
            math.sqrt(8 * math.pi)
        )


class TestIntegrate:
    """Adaptive integration."""

    @pytest.mark.parametrize("scheme", ["trapezoid", "gauss-legendre"])
    def test_converges(self, scheme):
        result = integrate_1d(
            lambda x: np.exp(-(x**2)), -8, 8, QuadratureSpec(scheme=scheme)
        )

        assert result.value == pytest.approx(math.sqrt(math.pi), rel=1e-10)
        assert 0 <= result.error < 1e-8
        assert result.points > 0

    def test_gauss_hermite_needs_no_limits(self):
        result = integrate_1d(
            lambda x: np.exp(-(x**2)),
            spec=QuadratureSpec(scheme="gauss-hermite"),
            scale=1.0,
        )

        assert result.value == pytest.approx(math.sqrt(math.pi))

    def test_gauss_hermite_too_narrow_for_the_integrand(self):
        """A Gaussian 12x wider than `scale` exhausts the node cap instead of converging."""
        with pytest.raises(QuadratureNotConverged, match="256 points"):
            integrate_1d(
                lambda x: np.exp(-(x**2) / 144),
                spec=QuadratureSpec(scheme="gauss-hermite"),
                scale=1.0,
            )

    def test_gauss_hermite_matched_scale_converges(self):
        result = integrate_1d(
            lambda x: np.exp(-(x**2) / 144),
            spec=QuadratureSpec(scheme="gauss-hermite"),
            scale=12.0,
        )

        assert result.value == pytest.approx(12 * math.sqrt(math.pi), rel=1e-10)
        assert result.error < 1e-8

    def test_box_edge_with_gauss_legendre(self):
        spec = QuadratureSpec(scheme="gauss-legendre")

        result = integrate_1d(lambda x: np.where(x < 1.0, 1.0, 0.0), 0.0, 2.0, spec)

        assert result.value == pytest.approx(1.0)

    def test_complex_integrand(self):
        result = integrate_1d(lambda x: np.exp(1j * x - x**2), -10, 10)

        assert result.value == pytest.approx(math.sqrt(math.pi) * math.exp(-0.25))

    def test_not_converged(self):
        spec = QuadratureSpec(max_refinements=2)

        with pytest.raises(QuadratureNotConverged):
            integrate_1d(lambda x: np.sin(200 * x) ** 2, 0, 1, spec)

    def test_needs_limits(self):
        with pytest.raises(InvalidParams):
            integrate_1d(np.exp, 1.0, 0.0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"scheme": "simpson"},
            {"abs_tol": 0.0},
            {"max_refinements": 0},
            {"max_refinements": 21},
            {"initial_points": 2},
        ],
    )
    def test_spec_rejects(self, kwargs):
        with pytest.raises(InvalidParams):
            QuadratureSpec(**kwargs)

    def test_refine_until_converged(self):
        values, level = refine_until_converged(
            lambda level: np.array([1.0, 2.0]) + 0.5**level,
            QuadratureSpec(rel_tol=1e-3),
        )

        assert level > 1
        assert values == pytest.approx([1.0, 2.0], abs=1e-2)

    def test_refine_until_converged_gives_up(self):
        with pytest.raises(QuadratureNotConverged, match="sampled"):
            refine_until_converged(
                lambda level: np.array([float(level)]),
                QuadratureSpec(max_refinements=3),
                label="sampled",
            )


class TestEigensolver:
    """Symmetric eigendecomposition."""

    def test_sorted_descending_with_orthonormal_vectors(self):
        matrix = np.array([[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 0.5]])

        eig = symmetric_eigs(matrix)

        assert eig.values == pytest.approx([3.0, 1.0, 0.5])
        assert eig.vectors.T @ eig.vectors == pytest.approx(np.eye(3))
        assert matrix @ eig.vectors[:, 0] == pytest.approx(3.0 * eig.vectors[:, 0])
        assert symmetric_eigvals(matrix) == pytest.approx(eig.values)

    def test_hermitian(self):
        matrix = np.array([[1.0, 1j], [-1j, 1.0]])

        assert symmetric_eigvals(matrix) == pytest.approx([2.0, 0.0], abs=1e-12)

    @pytest.mark.parametrize(
        "matrix", [np.array([[1.0, 2.0], [0.0, 1.0]]), np.ones((2, 3))]
    )
    def test_rejects_nonsymmetric(self, matrix):
        with pytest.raises(NotSymmetric):
            symmetric_eigvals(matrix)

    def test_tolerates_rounding_asymmetry(self):
        matrix = np.array([[1.0, 0.5], [0.5 + 1e-14, 1.0]])

        assert check_symmetric(matrix) is matrix

    def test_lapack_failure(self, monkeypatch):
        def fail(matrix):
            raise np.linalg.LinAlgError("did not converge")

        monkeypatch.setattr("scipy.linalg.eigh", fail)

        with pytest.raises(NoConvergence):
            symmetric_eigs(np.eye(2))
