"""
TOML loading, command-line overrides and validation of run configurations.
"""

from pathlib import Path

import pytest

import mixedbm.examples
from mixedbm.core.errors import ConfigError
from mixedbm.core.geometry import Circle, Star
from mixedbm.core.models import Formulation, Rectangle
from mixedbm.parser.run_config import (
    RunConfig,
    build_config,
    load_config,
    merge_overrides,
)

DEFAULT_TOML = Path(mixedbm.examples.__file__).parent / "default.toml"


class TestRunConfig:
    def test_defaults(self):
        """Built-in values of every section"""
        config = RunConfig()
        assert config.discretization.n == 400
        assert config.solver.formulations() == [Formulation.BM, Formulation.MIXED]
        assert (config.tiles.nx, config.tiles.ny) == (8, 4)
        assert config.output.directory == Path("out")

    def test_default_file_matches_defaults(self):
        """The shipped example documents the built-in values"""
        assert load_config(DEFAULT_TOML) == RunConfig()

    def test_no_file(self):
        """No config file means the built-in values"""
        assert load_config(None) == RunConfig()

    def test_transmission(self):
        """Shape and materials sections build the transmission config"""
        config = build_config(
            {"shape": {"kind": "star", "amplitude": 0.2, "lobes": 4}, "materials": {"eps1": 2.0}}
        )
        transmission = config.transmission()
        assert isinstance(transmission.curve, Star)
        assert transmission.curve.lobes == 4
        assert transmission.eps1 == 2.0
        assert isinstance(RunConfig().transmission().curve, Circle)

    def test_region_and_params(self):
        """Partial sections are filled with defaults"""
        config = build_config({"region": {"re_min": 1.0}, "ssm": {"seed": 5, "workers": 2}})
        assert config.region.to_rectangle() == Rectangle(
            re_min=1.0, re_max=3.0, im_min=-1.0, im_max=0.0
        )
        params = config.ssm.params()
        assert params.rng_seed == 5
        assert params.workers == 2

    def test_single_formulation(self):
        """One formulation selected"""
        config = build_config({"solver": {"formulation": "mixed"}})
        assert config.solver.formulations() == [Formulation.MIXED]


class TestOverrides:
    def test_overrides_win(self, tmp_path):
        """Command-line values replace values from the file"""
        path = tmp_path / "run.toml"
        path.write_text('[discretization]\nn = 128\n[shape]\nkind = "star"\n')
        config = load_config(path, {"discretization": {"n": 64}})
        assert config.discretization.n == 64
        assert config.shape.kind == "star"

    def test_merge_leaves_input_alone(self):
        """Merging copies instead of mutating"""
        data = {"tiles": {"nx": 2}}
        merged = merge_overrides(data, {"tiles": {"ny": 3}})
        assert merged == {"tiles": {"nx": 2, "ny": 3}}
        assert data == {"tiles": {"nx": 2}}

    def test_section_must_be_table(self):
        """A scalar where a table is expected is an error"""
        with pytest.raises(ConfigError, match="table"):
            merge_overrides({"tiles": 3}, {"tiles": {"nx": 1}})


class TestInvalid:
    @pytest.mark.parametrize(
        "data, match",
        [
            ({"shape": {"knd": "circle"}}, "shape.knd"),
            ({"discretization": {"n": 33}}, "even"),
            ({"discretization": {"n": 4}}, "discretization.n"),
            ({"shape": {"amplitude": 1.0}}, "amplitude"),
            ({"materials": {"eps1": -1.0}}, "eps1"),
            ({"region": {"re_min": 4.0}}, "re_min < re_max"),
            ({"solver": {"formulation": "fem"}}, "formulation"),
            ({"surprise": {}}, "surprise"),
        ],
    )
    def test_rejected(self, data, match):
        """The message names the offending key"""
        with pytest.raises(ConfigError, match=match):
            build_config(data)

    def test_bad_toml(self, tmp_path):
        """A TOML syntax error names the file"""
        path = tmp_path / "broken.toml"
        path.write_text("[shape\nkind = \n")
        with pytest.raises(ConfigError, match="broken.toml"):
            load_config(path)

    def test_missing_file(self, tmp_path):
        """A missing file is an I/O error, not a config error"""
        with pytest.raises(FileNotFoundError):
            load_config(tmp_path / "nowhere.toml")
