"""Word and conjugacy problems in graphs of groups with an orientation character."""

from pathlib import Path

from . import backends, gog, words
from .gog import GraphOfGroups, Path as XPath
from .gogfile import emit, load, parse

DATA = Path(__file__).parent / "data"


def corpus(name):
    """Load a bundled graph by stem (``klein``, ``flat``, ``p2``, ``sol``, ...)."""
    return load(DATA / f"{name}.gog")


__all__ = ["GraphOfGroups", "XPath", "backends", "corpus", "emit", "gog", "load", "parse", "words"]
