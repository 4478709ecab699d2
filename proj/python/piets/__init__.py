# Copyright (c) 2026 The PIETS Authors
# SPDX-License-Identifier: Apache-2.0
"""Multi-source time-series forecasting with pre-trained per-source encoders."""

from ._piets import *  # noqa: F401,F403
from ._piets import __doc__  # noqa: F401

__version__ = "0.1.0"
