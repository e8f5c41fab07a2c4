"""Threshold solver for discounted optimal stopping of a jump mean-reverting
process: Fourier computation of the Green kernel, root solving for the
optimal threshold, and Monte Carlo cross-checks."""

from ._greenstop import *  # noqa: F401,F403
from ._greenstop import __version__  # noqa: F401
