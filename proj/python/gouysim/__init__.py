"""Python interface to the gouysim C++ core. All lengths are in metres."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
