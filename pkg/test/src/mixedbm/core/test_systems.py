"""
Unit tests for the block systems and the forward solves.
"""

import numpy as np
import pytest

from mixedbm.core import circle_oracle, systems
from mixedbm.core.circle_oracle import mie_transmission
from mixedbm.core.errors import DomainError, SolverError
from mixedbm.core.geometry import circle, sample, star
from mixedbm.core.models import (
    Classification,
    FieldRegion,
    Formulation,
    Rectangle,
    TransmissionConfig,
)


class TestAssembly:
    """Block layout of the Burton-Miller and mixed systems"""

    @pytest.fixture
    def config(self):
        return TransmissionConfig(eps0=1.0, eps1=3.0, curve=star(1.0, 0.1, 3))

    @pytest.fixture
    def disc(self, config):
        return sample(config.curve, 32)

    def test_bm_shape(self, config, disc):
        """2N x 2N in (u, q), alpha = i / k0 by default"""
        operator = systems.assemble_bm(config, disc, 1.2)
        assert operator.matrix.shape == (64, 64)
        assert operator.layout.unknowns == ("u", "q")
        assert operator.alpha == pytest.approx(1j / 1.2)

    def test_mixed_identity_and_zero_blocks(self, config, disc):
        """The coupling rows of the mixed system are exact"""
        operator = systems.assemble_mixed(config, disc, 1.2 - 0.3j)
        eye = np.eye(32)
        assert operator.matrix.shape == (96, 96)
        np.testing.assert_array_equal(operator.block(1, 0), -eye)
        np.testing.assert_array_equal(operator.block(2, 1), -eye)
        np.testing.assert_array_equal(operator.block(0, 2), 0.0)
        np.testing.assert_array_equal(operator.block(1, 1), 0.0)
        np.testing.assert_array_equal(operator.block(2, 0), 0.0)

    def test_shared_first_row(self, config, disc):
        """Both formulations use the same exterior Burton-Miller row"""
        bm = systems.assemble_bm(config, disc, 0.9)
        mixed = systems.assemble_mixed(config, disc, 0.9)
        np.testing.assert_array_equal(bm.block(0, 0), mixed.block(0, 0))
        np.testing.assert_array_equal(bm.block(0, 1), mixed.block(0, 1))

    def test_dispatch(self, config, disc):
        """assemble picks the system for the formulation"""
        for formulation in Formulation:
            operator = systems.assemble(formulation, config, disc, 1.0)
            assert operator.formulation is formulation

    def test_operator_family(self, config, disc):
        """The eigensolver sees the assembled matrix"""
        family = systems.operator_family(Formulation.MIXED, config, disc)
        np.testing.assert_array_equal(
            family(1.1 - 0.2j), systems.assemble_mixed(config, disc, 1.1 - 0.2j).matrix
        )

    def test_zero_frequency(self, config, disc):
        """omega = 0 is refused"""
        with pytest.raises(DomainError, match="nonzero"):
            systems.assemble_bm(config, disc, 0.0)

    def test_foreign_discretization(self, config):
        """The nodes must belong to the configured curve"""
        disc = sample(circle(1.0), 32)
        with pytest.raises(DomainError, match="curve"):
            systems.assemble_mixed(config, disc, 1.0)


class TestPlaneWave:
    """Incident field and its boundary traces"""

    def test_trace(self):
        """u^I and du^I/dn at the nodes"""
        disc = sample(circle(1.0), 16)
        wave = systems.incident_plane_wave(2.0, (0.0, 1.0))
        value, normal = wave.trace(disc)
        np.testing.assert_allclose(value, np.exp(2j * disc.points[:, 1]))
        np.testing.assert_allclose(normal, 2j * disc.normals[:, 1] * value)

    def test_gradient(self):
        """grad u^I = i k0 d u^I"""
        wave = systems.incident_plane_wave(1.5, (0.6, 0.8), amplitude=2.0)
        point = np.array([[0.3, -0.4]])
        grad = wave.gradient(point)[0]
        np.testing.assert_allclose(grad, 1.5j * np.array([0.6, 0.8]) * wave.value(point)[0])

    def test_direction_must_be_unit(self):
        """Non-unit directions are refused"""
        with pytest.raises(DomainError, match="unit"):
            systems.incident_plane_wave(1.0, (1.0, 1.0))

    def test_overflowing_trace(self):
        """A strongly growing wave is refused before it overflows"""
        disc = sample(circle(1.0), 16)
        wave = systems.incident_plane_wave(1.0 + 150j)
        with pytest.raises(DomainError, match="overflows"):
            wave.trace(disc)


class TestCircleScattering:
    """Forward solves against the series solution"""

    omega = 2.0

    @pytest.fixture
    def config(self):
        return TransmissionConfig(eps0=1.0, eps1=4.0, curve=circle(1.0))

    @pytest.fixture
    def disc(self, config):
        return sample(config.curve, 64)

    @pytest.fixture
    def mie(self, config):
        return mie_transmission(config, self.omega)

    @pytest.fixture(params=list(Formulation))
    def solution(self, request, config, disc):
        k0, _ = config.wavenumbers(self.omega)
        wave = systems.incident_plane_wave(k0)
        return systems.solve_scattering(config, disc, self.omega, wave, request.param)

    def test_traces(self, solution, mie, disc):
        """u and q match the series"""
        u, q = mie.traces(disc)
        np.testing.assert_allclose(solution.u, u, atol=1e-8)
        np.testing.assert_allclose(solution.q, q, atol=1e-8)

    def test_solution_metadata(self, solution):
        """Residual, condition estimate and phi only for the mixed system"""
        assert solution.residual < 1e-12
        assert 1.0 <= solution.condition_estimate < 1e8
        assert (solution.phi is not None) == (solution.formulation is Formulation.MIXED)

    def test_exterior_field(self, solution, mie, config, disc):
        """Total field outside the disk"""
        points = np.array([[2.0, 0.5], [-1.5, -1.5], [0.0, 3.0]])
        values = systems.eval_field(config, disc, solution, points, FieldRegion.EXTERIOR)
        np.testing.assert_allclose(values, mie.field(points), atol=1e-8)

    def test_interior_field(self, solution, mie, config, disc):
        """Transmitted field inside the disk"""
        points = np.array([[0.0, 0.0], [0.3, -0.2], [-0.4, 0.1]])
        values = systems.eval_field(config, disc, solution, points, FieldRegion.INTERIOR)
        np.testing.assert_allclose(values, mie.field(points), atol=1e-8)

    def test_scattered_field(self, solution, mie, config, disc):
        """Scattered part alone"""
        points = np.array([[2.5, 0.0]])
        np.testing.assert_allclose(
            systems.scattered_field(config, disc, solution, points),
            mie.scattered_field(points),
            atol=1e-8,
        )

    def test_power_balance(self, solution, mie, config, disc):
        """Lossless disk: scattered and extinguished power agree with the series"""
        balance = systems.power_balance(config, disc, solution, radius=2.0)
        assert balance.scattered == pytest.approx(mie.scattered_power(), rel=1e-7)
        assert balance.extinguished == pytest.approx(mie.extinguished_power(), rel=1e-7)
        assert abs(balance.absorbed) < 1e-7

    def test_region_checks(self, solution, config, disc):
        """Targets on the wrong side of the curve are refused"""
        with pytest.raises(DomainError, match="inside"):
            systems.eval_field(
                config, disc, solution, np.array([[0.0, 0.0]]), FieldRegion.EXTERIOR
            )
        with pytest.raises(DomainError, match="outside"):
            systems.eval_field(
                config, disc, solution, np.array([[3.0, 0.0]]), FieldRegion.INTERIOR
            )

    def test_flux_circle_must_enclose(self, solution, config, disc):
        """The flux circle must enclose the scatterer"""
        with pytest.raises(DomainError, match="enclose"):
            systems.power_balance(config, disc, solution, radius=0.8)


class TestStarScattering:
    """Both formulations on the five-lobed star, where no series solution exists"""

    OMEGA = 2.0

    @pytest.fixture(scope="class")
    def config(self):
        return TransmissionConfig(eps0=1.0, eps1=4.0, curve=star(1.0, 0.3, 5))

    @pytest.fixture(scope="class")
    def disc(self, config):
        return sample(config.curve, 256)

    @pytest.fixture(scope="class")
    def solutions(self, config, disc):
        k0, _ = config.wavenumbers(self.OMEGA)
        wave = systems.incident_plane_wave(k0, (np.cos(0.5), np.sin(0.5)))
        return {
            formulation: systems.solve_scattering(config, disc, self.OMEGA, wave, formulation)
            for formulation in Formulation
        }

    def test_traces_agree(self, solutions):
        """u and q do not depend on how the interior field is represented"""
        bm, mixed = solutions[Formulation.BM], solutions[Formulation.MIXED]
        np.testing.assert_allclose(bm.u, mixed.u, atol=1e-8)
        np.testing.assert_allclose(bm.q, mixed.q, atol=1e-8)
        assert bm.residual < 1e-12 and mixed.residual < 1e-12

    def test_interior_fields_agree(self, solutions, config, disc):
        """eps1 S q - D u and S phi give the same field at 50 random interior points"""
        rng = np.random.default_rng(0)
        radius = 0.4 * np.sqrt(rng.uniform(size=50))
        angle = rng.uniform(0.0, 2.0 * np.pi, size=50)
        points = np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=-1)
        values = [
            systems.eval_field(config, disc, solutions[f], points, FieldRegion.INTERIOR)
            for f in Formulation
        ]
        np.testing.assert_allclose(values[0], values[1], atol=1e-8)

    def test_exterior_fields_agree(self, solutions, config, disc):
        """Outside, both use the same Green representation of the same traces"""
        points = np.array([[2.0, 0.5], [-1.8, -1.5], [0.0, 3.0]])
        values = [
            systems.eval_field(config, disc, solutions[f], points, FieldRegion.EXTERIOR)
            for f in Formulation
        ]
        np.testing.assert_allclose(values[0], values[1], atol=1e-8)

    @pytest.mark.parametrize("formulation", list(Formulation))
    def test_power_balance(self, solutions, config, disc, formulation):
        """A lossless star absorbs nothing"""
        balance = systems.power_balance(config, disc, solutions[formulation], radius=2.0)
        assert balance.scattered > 0
        assert abs(balance.absorbed) < 1e-7

    def test_same_scattered_power(self, solutions, config, disc):
        """Both formulations scatter the same power"""
        bm, mixed = (
            systems.power_balance(config, disc, solutions[f], radius=2.0) for f in Formulation
        )
        assert bm.scattered == pytest.approx(mixed.scattered, rel=1e-8)


class TestPerturbationClassification:
    """Labels from perturbing alpha and eps0 against the circle oracle"""

    @pytest.fixture(scope="class")
    def config(self):
        return TransmissionConfig(eps0=1.0, eps1=4.0, curve=circle(1.0))

    @pytest.fixture(scope="class")
    def roots(self, config):
        window = Rectangle(re_min=0.5, re_max=2.0, im_min=-0.6, im_max=-0.02)
        found = circle_oracle.find_eigen(window, config, n_max=3, grid=(16, 8))
        return [r for r in found if r.converged]

    @pytest.mark.parametrize("formulation", list(Formulation))
    def test_matches_oracle_labels(self, config, roots, formulation):
        """The label is that of the vanishing mode factor"""
        disc = sample(config.curve, 128)
        assert any(r.classification is Classification.TRUE for r in roots)
        for root in roots:
            label, coupled, material = systems.classify_by_perturbation(
                formulation, config, disc, root.value
            )
            assert label is root.classification, (root.value, coupled, material)

    def test_regular_point_is_not_true(self, config):
        """On the real axis neither perturbed system is singular"""
        disc = sample(config.curve, 64)
        label, coupled, material = systems.classify_by_perturbation(
            Formulation.MIXED, config, disc, 1.0
        )
        assert label is Classification.FICTITIOUS
        assert coupled > systems.SINGULAR_RATIO
        assert material > systems.SINGULAR_RATIO


class TestTransparentInclusion:
    """Equal materials leave the incident wave untouched"""

    @pytest.mark.parametrize("formulation", list(Formulation))
    def test_no_scattering(self, formulation):
        """Traces equal the incident traces, no scattered field"""
        config = TransmissionConfig(eps0=2.0, eps1=2.0, curve=star(1.0, 0.1, 3))
        assert config.is_transparent
        disc = sample(config.curve, 64)
        k0, _ = config.wavenumbers(1.5)
        wave = systems.incident_plane_wave(k0, (0.6, -0.8))
        solution = systems.solve_scattering(config, disc, 1.5, wave, formulation)
        u_inc, du_inc = wave.trace(disc)
        np.testing.assert_allclose(solution.u, u_inc, atol=1e-8)
        np.testing.assert_allclose(solution.q, du_inc / config.eps0, atol=1e-8)
        far = systems.scattered_field(config, disc, solution, np.array([[4.0, 1.0]]))
        assert abs(far[0]) < 1e-8


class TestSolveErrors:
    """Forward-solve preconditions and singular systems"""

    @pytest.fixture
    def setup(self):
        config = TransmissionConfig(curve=circle(1.0))
        disc = sample(config.curve, 16)
        return config, disc, systems.incident_plane_wave(1.0)

    def test_complex_frequency(self, setup):
        """Forward solves need a real omega"""
        config, disc, wave = setup
        with pytest.raises(DomainError, match="real positive"):
            systems.solve_scattering(config, disc, 1.0 - 0.1j, wave, Formulation.BM)

    def test_negative_frequency(self, setup):
        """and a positive one"""
        config, disc, wave = setup
        with pytest.raises(DomainError):
            systems.solve_scattering(config, disc, -1.0, wave, Formulation.MIXED)

    def test_singular_system(self, setup, monkeypatch):
        """A tiny reciprocal condition raises SolverError with the estimate"""
        config, disc, wave = setup
        monkeypatch.setattr(systems, "_condition_estimate", lambda matrix, lu: 1e20)
        with pytest.raises(SolverError) as exc_info:
            systems.solve_scattering(config, disc, 1.0, wave, Formulation.BM)
        assert exc_info.value.condition_estimate == 1e20
