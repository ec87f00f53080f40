"""Online PV array identification and maximum-power-point tracking."""

try:
    from ._pvdrem import *  # noqa: F401,F403  (wheel layout)
except ImportError:
    from _pvdrem import *  # noqa: F401,F403  (build-tree layout)
