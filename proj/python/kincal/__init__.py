"""Geometry-aware Bayesian experimental design for kinematic calibration."""

from kincal._kincal import *  # noqa: F401,F403
from kincal._kincal import __doc__  # noqa: F401

__version__ = "0.1.0"
