"""Discrete power-grid swing dynamics and its 2+1D continuum reduction."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
