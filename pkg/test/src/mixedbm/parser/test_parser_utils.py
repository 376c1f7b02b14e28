# test_parser_utils.py

import pytest

from mixedbm.core.errors import ConfigError
from mixedbm.parser.utils import parse_region, parse_tiles, split_numbers


class TestSplitNumbers:
    def test_split(self):
        """Whitespace and exponents are accepted"""
        assert split_numbers(" 1, -2.5,3e-1 ", 3, "--x") == [1.0, -2.5, 0.3]

    @pytest.mark.parametrize("text", ["1,2", "1,2,3,4", "1,,3", "1,a,3"])
    def test_rejected(self, text):
        """Wrong counts and non-numbers name the flag"""
        with pytest.raises(ConfigError, match="--x"):
            split_numbers(text, 3, "--x")


class TestParseRegion:
    def test_region(self):
        """Four numbers in re_min, re_max, im_min, im_max order"""
        assert parse_region("0.5,3,-1,0") == {
            "re_min": 0.5,
            "re_max": 3.0,
            "im_min": -1.0,
            "im_max": 0.0,
        }

    def test_wrong_count(self):
        """The region needs exactly four numbers"""
        with pytest.raises(ConfigError, match="--region expects 4"):
            parse_region("0.5,3,-1")


class TestParseTiles:
    def test_tiles(self):
        """Two integers nx, ny"""
        assert parse_tiles("8,4") == {"nx": 8, "ny": 4}

    def test_integers_only(self):
        """Fractional tile counts are rejected"""
        with pytest.raises(ConfigError, match="integers"):
            parse_tiles("1.5,2")
