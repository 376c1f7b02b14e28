# test_models.py

import numpy as np
import pytest
from pydantic import ValidationError

from mixedbm.core.geometry import Circle, Star
from mixedbm.core.models import (
    BlockLayout,
    Classification,
    EigenResult,
    Formulation,
    OperatorKind,
    Rectangle,
    TransmissionConfig,
)


class TestEnums:
    def test_values(self):
        """Wire strings of the enums used in configs and CSV files"""
        assert {f.value for f in Formulation} == {"bm", "mixed"}
        assert {k.value for k in OperatorKind} == {"S", "D", "Dstar", "N"}
        assert {c.value for c in Classification} == {"True", "Fictitious", "Unclassified"}


class TestTransmissionConfig:
    def test_defaults(self):
        """Vacuum outside, eps1 = 4 inside, unit circle"""
        config = TransmissionConfig()
        assert (config.eps0, config.eps1, config.mu0, config.mu1) == (1.0, 4.0, 1.0, 1.0)
        assert isinstance(config.curve, Circle)
        assert config.radius == 1.0

    def test_wavenumbers(self):
        """kj = omega sqrt(epsj muj)"""
        config = TransmissionConfig(eps0=1.0, eps1=4.0, mu1=2.25)
        k0, k1 = config.wavenumbers(2.0 - 0.5j)
        assert k0 == 2.0 - 0.5j
        assert k1 == pytest.approx(3.0 * (2.0 - 0.5j))

    def test_transparent(self):
        """Equal materials on both sides"""
        assert TransmissionConfig(eps1=1.0).is_transparent
        assert not TransmissionConfig().is_transparent

    @pytest.mark.parametrize("field", ["eps0", "eps1", "mu0", "mu1"])
    def test_materials_positive(self, field):
        """Material constants must be positive"""
        with pytest.raises(ValidationError):
            TransmissionConfig(**{field: 0.0})

    def test_curve_from_mapping(self):
        """The curve is a tagged union keyed on kind"""
        config = TransmissionConfig.model_validate(
            {"curve": {"kind": "star", "radius": 1.0, "amplitude": 0.2, "lobes": 4}}
        )
        assert isinstance(config.curve, Star)
        assert config.curve.lobes == 4

    def test_unknown_curve_kind(self):
        """Only circles and stars are known"""
        with pytest.raises(ValidationError):
            TransmissionConfig.model_validate({"curve": {"kind": "ellipse"}})


class TestRectangle:
    @pytest.fixture
    def rect(self):
        return Rectangle(re_min=0.0, re_max=4.0, im_min=-2.0, im_max=0.0)

    def test_center_and_half_sizes(self, rect):
        """Geometry of the rectangle"""
        assert rect.center == 2.0 - 1.0j
        assert rect.half_width == 2.0
        assert rect.half_height == 1.0

    def test_ordering_enforced(self):
        """Empty rectangles are rejected"""
        with pytest.raises(ValidationError, match="re_min < re_max"):
            Rectangle(re_min=1.0, re_max=1.0, im_min=0.0, im_max=1.0)

    def test_finite_bounds(self):
        """Infinite bounds are rejected"""
        with pytest.raises(ValidationError, match="finite"):
            Rectangle(re_min=0.0, re_max=np.inf, im_min=0.0, im_max=1.0)

    def test_contains(self, rect):
        """Strict, closed and margin-widened membership"""
        assert rect.contains(1.0 - 1.0j)
        assert not rect.contains(4.0 - 1.0j)
        assert rect.contains(4.0 - 1.0j, strict=False)
        assert rect.contains(4.0 + 1e-10 - 1.0j, strict=False, margin=1e-9)
        assert not rect.contains(5.0 - 1.0j, strict=False)

    def test_tiles_row_major(self, rect):
        """Index j * nx + i, real part fastest"""
        tiles = rect.tiles(4, 2)
        assert len(tiles) == 8
        assert (tiles[0].re_min, tiles[0].im_min) == (0.0, -2.0)
        assert (tiles[1].re_min, tiles[1].im_min) == (1.0, -2.0)
        assert (tiles[4].re_min, tiles[4].im_min) == (0.0, -1.0)
        assert tiles[7].re_max == 4.0 and tiles[7].im_max == 0.0

    def test_tiles_cover(self, rect):
        """Tiles add up to the area of the rectangle"""
        area = sum(4 * t.half_width * t.half_height for t in rect.tiles(3, 5))
        assert area == pytest.approx(8.0)

    def test_bad_tile_counts(self, rect):
        """At least one tile per direction"""
        with pytest.raises(ValueError):
            rect.tiles(0, 1)

    def test_inflate(self, rect):
        """Each side moves out by the given amount"""
        bigger = rect.inflate(0.5)
        assert (bigger.re_min, bigger.re_max) == (-1.0, 5.0)
        assert (bigger.im_min, bigger.im_max) == (-2.5, 0.5)


class TestEigenResult:
    def test_parts(self):
        """Real and imaginary parts, default fields"""
        result = EigenResult(value=1.5 - 0.25j, residual=1e-12)
        assert (result.re, result.im) == (1.5, -0.25)
        assert result.classification is Classification.UNCLASSIFIED
        assert result.multiplicity == 1 and result.converged


class TestBlockLayout:
    def test_offsets(self):
        """Block offsets in unknown order"""
        layout = BlockLayout(n_nodes=10, unknowns=("u", "q", "phi"))
        assert layout.size == 30
        assert layout.offset("phi") == 20
        assert layout.slice(1) == slice(10, 20)
