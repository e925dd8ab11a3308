"""Shortcuts to adiabaticity for non-Hermitian two-level systems."""

from ._nhsta import *  # noqa: F401,F403
from ._nhsta import __version__
