"""Tests for the closed forms (physics.analytic)."""

import math

import numpy as np
import pytest

from composite_entropy.physics import analytic
from composite_entropy.physics.errors import InvalidParams, OutOfValidity
from composite_entropy.physics.model import CompositeParams, Gaussian
from composite_entropy.physics.phase_space import wigner_cl, wigner_one_body

U1 = CompositeParams(u=1.0)
POINTS = (np.array([0.0, 0.7, -2.0]), np.array([0.0, -0.4, 1.1]))


class TestGamma:
    """The mixing factor of the Gaussian weight."""

    def test_reference_point(self):
        assert analytic.gamma(1.0, 2.0) == pytest.approx(1.8)

    @pytest.mark.parametrize(("u", "v"), [(0.0, 3.0), (1.0, 0.0), (8.0, 8.0)])
    def test_at_least_one(self, u, v):
        assert analytic.gamma(u, v) >= 1.0

    def test_rejects_negative_arguments(self):
        with pytest.raises(InvalidParams):
            analytic.gamma(-1.0, 2.0)


class TestGaussianSpectrumEntropy:
    def test_pure_state(self):
        assert analytic.gaussian_spectrum_entropy(1.0) == 0.0

    def test_reference_purity(self):
        assert analytic.gaussian_spectrum_entropy(0.6) == pytest.approx(
            0.74978, abs=1e-5
        )

    @pytest.mark.parametrize("purity", [0.0, -0.1, 1.5])
    def test_rejects(self, purity):
        with pytest.raises(InvalidParams):
            analytic.gaussian_spectrum_entropy(purity)


def test_large_v_offset():
    assert analytic.large_v_offset(1.0) == pytest.approx(-0.5 * math.log(2))

    with pytest.raises(InvalidParams) as exc:
        analytic.large_v_offset(0.0)

    assert exc.value.invariant == "u-positive"


class TestConstantWeight:
    """The box weight with its boundary ignored."""

    def test_values(self):
        report = analytic.closed_form_constant(U1, 100 * math.sqrt(2))

        assert report.v_eff == pytest.approx(100.0)
        assert report.S_R2 == pytest.approx(3.68623, abs=1e-5)
        assert report.S_WSh == pytest.approx(3.83966, abs=1e-5)
        assert report.S_vN == report.S_WSh
        assert report.S_R2_cl == report.S_R2

    def test_wehrl_only_at_equal_masses(self):
        light = analytic.closed_form_constant(U1, 30.0)
        heavy = analytic.closed_form_constant(CompositeParams(u=2.0), 30.0)

        assert light.S_Wehrl_half == pytest.approx(light.S_WSh + math.log(2))
        assert heavy.S_Wehrl_half is None

    def test_wigner_is_flat_in_q(self):
        report = analytic.closed_form_constant(U1, 30.0)

        values = report.wigner(np.array([-5.0, 0.0, 5.0]), 0.3)

        assert values == pytest.approx([values[0]] * 3)
        assert report.wigner(0.0, 0.0) == pytest.approx(
            2 * math.sqrt(2) * math.sqrt(math.pi) / 30.0
        )

    def test_small_box_is_outside_validity(self):
        with pytest.raises(OutOfValidity) as exc:
            analytic.closed_form_constant(U1, 9.0 * math.sqrt(2))

        assert exc.value.exit_code == 2

    def test_needs_a_second_particle(self):
        with pytest.raises(InvalidParams):
            analytic.closed_form_constant(CompositeParams(u=0.0), 30.0)


class TestGaussianWeight:
    """Closed forms of the Gaussian weight."""

    def test_reference_point(self):
        report = analytic.closed_form_gaussian(U1, 2.0)

        assert report.gamma == pytest.approx(1.8)
        assert report.S_R2 == pytest.approx(math.log(5 / 3))
        assert report.S_WSh - report.S_R2 == pytest.approx(1 - math.log(2))
        assert report.S_vN_oracle == pytest.approx(0.74978, abs=1e-5)
        assert report.v_c_eff == pytest.approx(math.sqrt(2))
        assert report.S_R2_cl == pytest.approx(0.5 * math.log(3))
        assert report.S_R2Wehrl_half == pytest.approx(report.S_R2 + math.log(2))

    @pytest.mark.parametrize("u", [1.0, 4.0])
    def test_wigner_matches_the_numerical_route(self, u):
        params = CompositeParams(u=u)
        report = analytic.closed_form_gaussian(params, 2.0)

        assert report.wigner(*POINTS) == pytest.approx(
            wigner_one_body(params, Gaussian(2.0), *POINTS, method="quadrature"),
            rel=1e-6,
        )
        assert report.wigner_cl(*POINTS) == pytest.approx(
            wigner_cl(params, Gaussian(2.0), *POINTS, method="quadrature"), rel=1e-6
        )

    def test_without_second_particle_is_pure(self):
        report = analytic.closed_form_gaussian(CompositeParams(u=0.0), 3.0)

        assert report.S_R2 == pytest.approx(0.0, abs=1e-12)
        assert report.S_vN_oracle == pytest.approx(0.0, abs=1e-12)
        assert report.S_R2_cl is None
        assert report.wigner_cl is None

    def test_rejects_bad_width(self):
        with pytest.raises(InvalidParams):
            analytic.closed_form_gaussian(U1, -1.0)


def test_large_u_limit():
    assert analytic.closed_form_gaussian_large_u(2.0) == pytest.approx(
        0.5 * math.log(5)
    )

    with pytest.raises(InvalidParams):
        analytic.closed_form_gaussian_large_u(math.inf)
