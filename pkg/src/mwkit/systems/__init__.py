"""Bundled example systems (``.cfg`` files)."""

from importlib import resources
from pathlib import Path


def path(name: str) -> Path:
    """Filesystem path of a bundled config, e.g. ``path("cantor")``."""
    if not name.endswith(".cfg"):
        name += ".cfg"
    return Path(str(resources.files(__name__).joinpath(name)))


def names() -> list:
    return sorted(p.name[:-4] for p in resources.files(__name__).iterdir()
                  if p.name.endswith(".cfg"))
