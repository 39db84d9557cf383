"""Ranking-vector optimization over link graphs.

The heavy lifting lives in the compiled extension; this package re-exports it.
"""

try:
    from ._linkopt import *  # noqa: F401,F403
    from ._linkopt import __version__  # noqa: F401
except ImportError:  # running against a build tree with a top-level module
    from _linkopt import *  # noqa: F401,F403
    from _linkopt import __version__  # noqa: F401
