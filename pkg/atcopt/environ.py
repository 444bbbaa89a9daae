"""environ.py -- environment configuration for AtC coupling runs

- 06/11/26 (ams): Created, split from cli.py.
- 08/03/26 (ams): Add ATC_OUTPUT_DIR.
"""

import os

################################################################
# environment configuration
################################################################

log_level = os.environ.get("ATC_LOG_LEVEL", "")
# Log level name for the CLI ("ATC_LOG_LEVEL"), e.g. "DEBUG".  Empty string
# means use the per-command default.

num_workers = int(os.environ.get("ATC_NUM_WORKERS", "0") or 0)
# Worker-pool size used when the study config requests workers = 0
# ("ATC_NUM_WORKERS").  Zero means one worker per available CPU.

output_dir = os.environ.get("ATC_OUTPUT_DIR", "")
# Default output directory for study results ("ATC_OUTPUT_DIR").


def worker_count(requested):
    """Resolve worker-pool size.

    Arguments:
        requested (int): workers requested by configuration (0 for default)

    Returns:
        (int): number of workers, at least 1
    """
    if requested > 0:
        return requested
    if num_workers > 0:
        return num_workers
    return max(1, os.cpu_count() or 1)


def resolve_output_dir(path=None):
    """Resolve output directory, falling back to ATC_OUTPUT_DIR.

    Arguments:
        path (str, optional): explicitly requested directory

    Returns:
        (str or None): directory name
    """
    if path:
        return path
    if output_dir:
        return output_dir
    return None
