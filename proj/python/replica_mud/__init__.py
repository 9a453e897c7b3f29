"""Replica analysis and Monte Carlo checks of CDMA multiuser detection with
channel-estimation error."""

from ._replica_mud import *  # noqa: F401,F403
from ._replica_mud import __doc__  # noqa: F401
