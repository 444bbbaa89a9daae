"""utils.py -- helper functions for AtC study output

- 06/15/26 (ams): Created.
- 08/03/26 (ams): Add Stopwatch.
"""

import math
import time


################################################################
# strings for descriptors/filenames
################################################################

def ladder_string(ladder):
    """Convert ladder (6, 8, 12) to "6-8-12" string."""
    return "-".join("{:d}".format(R) for R in ladder)


def float_string(value):
    """Round-trip scientific notation; "nan" for missing values.

    >>> float_string(0.5)
        "5.00000000000000000e-01"
    """
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "nan"
    return "{:.17e}".format(float(value))


def field_string(value):
    """CSV field for an int, float, enum or string value."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return "{:d}".format(value)
    if isinstance(value, float) or value is None:
        return float_string(value)
    return str(getattr(value, "value", value))


################################################################
# timing
################################################################

class Stopwatch:
    """Wall-clock timer used as a context manager.

    >>> with Stopwatch() as timer:
    ...     run()
    >>> timer.elapsed
    """

    def __init__(self):
        self.start = None
        self.elapsed = float("nan")

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc_info):
        self.elapsed = time.perf_counter()-self.start
        return False
