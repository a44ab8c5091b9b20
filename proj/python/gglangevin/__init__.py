"""Geometry-guided Langevin sampling for 2D shape reconstruction."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc

__all__ = [name for name in dir() if not name.startswith("_")]
