"""Metric graph bundles: hyperbolicity, sections, ladders and flaring."""

from ._mgb import *  # noqa: F401,F403
from ._mgb import __version__, Error
