"""Parsing of the comma-separated command-line overrides"""

from mixedbm.core.errors import ConfigError


def split_numbers(text: str, count: int, name: str) -> list[float]:
    """Split ``text`` on commas into exactly ``count`` floats"""
    parts = [part.strip() for part in text.split(",")]
    if len(parts) != count or any(part == "" for part in parts):
        raise ConfigError(f"{name} expects {count} comma-separated numbers, got '{text}'")
    try:
        return [float(part) for part in parts]
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def parse_region(text: str) -> dict[str, float]:
    """'re_min,re_max,im_min,im_max' -> region table"""
    re_min, re_max, im_min, im_max = split_numbers(text, 4, "--region")
    return {"re_min": re_min, "re_max": re_max, "im_min": im_min, "im_max": im_max}


def parse_tiles(text: str) -> dict[str, int]:
    """'nx,ny' -> tiles table"""
    nx, ny = split_numbers(text, 2, "--tiles")
    if nx != int(nx) or ny != int(ny):
        raise ConfigError(f"--tiles expects integers, got '{text}'")
    return {"nx": int(nx), "ny": int(ny)}
