"""Bundled benchmark inputs: device fabrics, the radio design, sweep configs."""

from importlib import resources
from pathlib import Path

__all__ = ["fixture_path"]


def fixture_path(name: str) -> Path:
    """Filesystem path of a bundled fixture file."""
    path = Path(str(resources.files(__package__).joinpath(name)))
    if not path.is_file():
        raise FileNotFoundError(f"no bundled fixture named {name!r}")
    return path
