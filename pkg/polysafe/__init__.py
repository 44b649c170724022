from importlib.resources import files
from pathlib import Path

__version__ = "0.1.0"


def asset_path(name: str) -> Path:
    """Path of a bundled environment asset such as ``corridor3.json``."""
    return Path(str(files("polysafe").joinpath("assets", name)))
