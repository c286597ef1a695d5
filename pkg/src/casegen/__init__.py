"""Case-study learning games: authoring, play engine, and session service."""

from importlib import resources
from pathlib import Path

__version__ = "0.1.0"

FIXTURE_NAMES = (
    "medical_emergency",
    "general_practitioner",
    "law",
    "mechanics",
)


def fixture_path(name: str) -> Path:
    """Filesystem path of one of the shipped fixture workbooks."""
    if name not in FIXTURE_NAMES:
        raise KeyError(f"unknown fixture '{name}' (have: {', '.join(FIXTURE_NAMES)})")
    return Path(str(resources.files("casegen") / "fixtures" / name))
