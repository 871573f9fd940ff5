"""Edge-cell simulator: offloading game, value-network caching agent, baselines.

The compiled extension lives inside the package when installed and next to it
on the interpreter path when used straight from a build tree.
"""

try:
    from ._mecsim import *  # noqa: F401,F403  (installed layout)
    from ._mecsim import __doc__ as _doc
except ImportError:
    from _mecsim import *  # noqa: F401,F403  (build-tree layout)
    from _mecsim import __doc__ as _doc

__doc__ = _doc
__version__ = "0.1.0"
