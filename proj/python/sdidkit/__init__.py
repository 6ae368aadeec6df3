"""Panel treatment-effect estimators: TWFE DiD, event studies, synthetic DiD."""

try:
    from ._sdidkit import *  # noqa: F401,F403  (installed package layout)
except ImportError:
    from _sdidkit import *  # noqa: F401,F403  (in-tree cmake build)
