"""P-curve restriction tests: thin python surface over the compiled core."""

try:
    from ._pcurve import *  # noqa: F401,F403
    from ._pcurve import __version__  # noqa: F401
except ImportError:  # development layout: extension next to the build tree
    from _pcurve import *  # noqa: F401,F403
    from _pcurve import __version__  # noqa: F401
