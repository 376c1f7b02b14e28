# test_geometry.py

import numpy as np
import pytest
from pydantic import ValidationError

from mixedbm.core.errors import DomainError
from mixedbm.core.geometry import Circle, Star, circle, sample, star


class TestCircle:
    """Closed-form nodal data of the circle"""

    @pytest.fixture
    def disc(self):
        return sample(circle(2.0), 64)

    def test_points_on_circle(self, disc):
        """Every node is at distance a from the origin"""
        np.testing.assert_allclose(np.linalg.norm(disc.points, axis=1), 2.0)

    def test_outward_normals(self, disc):
        """The outward normal of a circle is the position over the radius"""
        np.testing.assert_allclose(disc.normals, disc.points / 2.0, atol=1e-15)

    def test_speed_and_curvature(self, disc):
        """|x'| = a and kappa = 1/a"""
        np.testing.assert_allclose(disc.speeds, 2.0)
        np.testing.assert_allclose(disc.curvatures, 0.5)

    def test_perimeter(self, disc):
        """2 pi a"""
        assert disc.perimeter() == pytest.approx(4.0 * np.pi, rel=1e-14)

    def test_integrate_constant(self, disc):
        """Integrating 1 gives the perimeter"""
        assert disc.integrate(np.ones(64)) == pytest.approx(disc.perimeter())

    def test_mesh_spacing(self, disc):
        """Largest arc length between neighbouring nodes"""
        assert disc.mesh_spacing() == pytest.approx(2.0 * 2.0 * np.pi / 64)

    def test_contains(self):
        """Boundary and outside points are not inside"""
        c = circle(1.0)
        inside = c.contains(np.array([[0.0, 0.0], [0.5, 0.5], [1.5, 0.0], [0.0, -1.01]]))
        assert inside.tolist() == [True, True, False, False]

    def test_diameter(self):
        """Twice the radius"""
        assert circle(1.5).diameter() == 3.0


class TestStar:
    """Star-shaped curve r(t) = a (1 + delta cos(m t))"""

    @pytest.fixture
    def curve(self):
        return star(1.0, 0.3, 5)

    def test_normals_are_unit_and_orthogonal(self, curve):
        """Unit normals, orthogonal to the tangent"""
        disc = sample(curve, 128)
        np.testing.assert_allclose(np.linalg.norm(disc.normals, axis=1), 1.0)
        tangents = curve.tangent(disc.t)
        np.testing.assert_allclose(np.sum(tangents * disc.normals, axis=1), 0.0, atol=1e-14)

    def test_normals_point_outward(self, curve):
        """For a star-shaped curve x.n = r^2 / |x'| > 0"""
        disc = sample(curve, 128)
        assert np.all(np.sum(disc.points * disc.normals, axis=1) > 0)

    def test_radius_profile(self, curve):
        """|x(t)| follows the polar profile"""
        t = np.linspace(0.0, 2.0 * np.pi, 17)
        np.testing.assert_allclose(
            np.linalg.norm(curve.position(t), axis=1), 1.0 + 0.3 * np.cos(5 * t)
        )

    def test_derivative_matches_finite_difference(self, curve):
        """Analytic x' and x'' against central differences"""
        t = np.array([0.1, 1.3, 4.0])
        h = 1e-6
        fd = (curve.position(t + h) - curve.position(t - h)) / (2 * h)
        np.testing.assert_allclose(curve.derivative(t), fd, atol=1e-8)
        fd2 = (curve.derivative(t + h) - curve.derivative(t - h)) / (2 * h)
        np.testing.assert_allclose(curve.second_derivative(t), fd2, atol=1e-7)

    def test_perimeter_converges(self, curve):
        """Trapezoid arc length at N = 64 already matches N = 4096"""
        assert sample(curve, 64).perimeter() == pytest.approx(
            sample(curve, 4096).perimeter(), rel=1e-12
        )

    def test_circle_limit(self):
        """delta = 0 reproduces the circle"""
        flat = sample(star(1.0, 0.0, 5), 32)
        round_ = sample(circle(1.0), 32)
        np.testing.assert_allclose(flat.points, round_.points, atol=1e-15)
        np.testing.assert_allclose(flat.curvatures, 1.0)

    def test_contains(self, curve):
        """Inside test along the lobe at t = 0"""
        pts = np.array([[1.25, 0.0], [1.35, 0.0], [0.0, 0.0]])
        assert curve.contains(pts).tolist() == [True, False, True]

    def test_diameter_bounds_points(self, curve):
        """No chord between nodes exceeds the diameter bound"""
        disc = sample(curve, 256)
        spread = np.max(
            np.linalg.norm(disc.points[:, None] - disc.points[None, :], axis=-1)
        )
        assert spread <= curve.diameter()


class TestInvariants:
    """Identities every closed counterclockwise curve satisfies"""

    CURVES = [circle(1.5), star(1.0, 0.3, 5), star(0.8, 0.1, 3)]

    @pytest.mark.parametrize("curve", CURVES)
    def test_normals_integrate_to_zero(self, curve):
        """oint n ds = 0"""
        disc = sample(curve, 256)
        total = np.sum(disc.normals * disc.weights()[:, None], axis=0)
        np.testing.assert_allclose(total, 0.0, atol=1e-13)

    @pytest.mark.parametrize("curve", CURVES)
    def test_total_curvature(self, curve):
        """oint kappa ds = 2 pi for a simple closed curve"""
        disc = sample(curve, 256)
        assert disc.integrate(disc.curvatures).real == pytest.approx(2.0 * np.pi, abs=1e-10)

    @pytest.mark.parametrize("curve", CURVES)
    def test_refined_grid_contains_coarse_nodes(self, curve):
        """Every other node of the 2N sample is bitwise a node of the N sample"""
        coarse, fine = sample(curve, 64), sample(curve, 128)
        np.testing.assert_array_equal(coarse.t, fine.t[::2])
        np.testing.assert_array_equal(coarse.points, fine.points[::2])
        np.testing.assert_array_equal(coarse.normals, fine.normals[::2])


class TestValidation:
    """Preconditions of the curve constructors and the sampler"""

    @pytest.mark.parametrize("n_nodes", [7, 9, 33])
    def test_odd_node_count(self, n_nodes):
        """The log-split quadrature needs an even N"""
        with pytest.raises(DomainError, match="even"):
            sample(circle(1.0), n_nodes)

    def test_too_few_nodes(self):
        """Fewer than 8 nodes are refused"""
        with pytest.raises(DomainError, match=">= 8"):
            sample(circle(1.0), 6)

    def test_radius_must_be_positive(self):
        """A zero radius is refused"""
        with pytest.raises(DomainError):
            circle(0.0)

    @pytest.mark.parametrize("delta", [1.0, 1.2, -0.1])
    def test_star_amplitude(self, delta):
        """delta outside [0, 1) is refused"""
        with pytest.raises(DomainError, match="amplitude"):
            star(1.0, delta, 5)

    def test_star_lobes(self):
        """m must be at least 3"""
        with pytest.raises(DomainError, match="lobe"):
            star(1.0, 0.3, 2)

    def test_model_validation(self):
        """Direct construction is validated as well"""
        with pytest.raises(ValidationError):
            Star(radius=1.0, amplitude=1.0, lobes=5)
        with pytest.raises(ValidationError):
            Circle(radius=-1.0)

    def test_curves_are_frozen(self):
        """Curves are immutable"""
        c = circle(1.0)
        with pytest.raises(ValidationError):
            c.radius = 2.0
