"""Quality-diversity generation of safety-critical driving scenarios."""

from ._cadre import *  # noqa: F401,F403
from ._cadre import __doc__  # noqa: F401
