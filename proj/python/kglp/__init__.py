"""Extreme multi-label knowledge-graph link prediction toolkit."""

try:
    from ._kglp import *  # noqa: F401,F403  (installed wheel layout)
    from ._kglp import __version__  # noqa: F401
except ImportError:  # build-tree layout: the extension sits on sys.path
    from _kglp import *  # noqa: F401,F403
    from _kglp import __version__  # noqa: F401
