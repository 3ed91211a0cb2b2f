"""Reversible two-tissue compartment kinetics toolkit.

Thin python layer over the C++ core: closed-form tissue curves under a
polyexponential arterial input, an RK4 reference integrator, identifiability
checkers, joint multi-region fitting without a measured plasma input, and
scale resolution from whole-blood samples.
"""

from revkin._core import *  # noqa: F401,F403
from revkin._core import __version__  # noqa: F401
