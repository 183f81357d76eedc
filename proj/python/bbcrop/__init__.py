"""Relaxation-optimized broadband polarization transfer for two-spin systems."""

from ._bbcrop import *  # noqa: F401,F403
from ._bbcrop import (
    AssemblyError,
    DomainError,
    ParameterError,
    ParseError,
    SpinSystem,
)

__version__ = "0.1.0"


def reference_system():
    """J = 193.6 Hz, k_a = J, k_c = 0.75 k_a."""
    return SpinSystem.from_aggregates(193.6, 193.6, 0.75 * 193.6)


def design(sys, periods=12, mode="ideal", nu1=13000.0, refine=True, stop_fraction=0.999):
    """CROP trajectory -> DANTE sequence -> broadband sequence."""
    from . import _bbcrop as _b

    traj = _b.generate_crop(sys, stop_fraction=stop_fraction)
    dante = _b.dante_discretize(traj, periods)
    if refine:
        dante = _b.refine_dante(dante, sys)
    return _b.build_bbcrop(dante, sys, mode=mode, nu1_I=nu1, nu1_S=nu1)
