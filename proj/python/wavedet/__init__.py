"""Wavelet-domain linear detection of a known pulse in white Gaussian noise."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
