"""Pick compiled kernels when available, pure Python otherwise.

Set ``RLAF_PURE_PYTHON=1`` to force the fallback.
"""

import logging
import os

from . import _cdcl_py, _lookahead_py

log = logging.getLogger(__name__)

FORCE_PURE = os.environ.get("RLAF_PURE_PYTHON", "") not in ("", "0")

cdcl_py = _cdcl_py.cdcl_solve
lookahead_py = _lookahead_py.lookahead_solve

cdcl_ext = lookahead_ext = None
if not FORCE_PURE:
    try:
        from . import _cdcl_ext

        cdcl_ext = _cdcl_ext.cdcl_solve
    except ImportError:
        log.debug("compiled CDCL kernel unavailable, using pure Python")
    try:
        from . import _lookahead_ext

        lookahead_ext = _lookahead_ext.lookahead_solve
    except ImportError:
        log.debug("compiled look-ahead kernel unavailable, using pure Python")

HAVE_EXT = cdcl_ext is not None


def cdcl_kernel(backend: str = "auto"):
    if backend == "python" or (backend == "auto" and cdcl_ext is None):
        return cdcl_py, "python"
    if cdcl_ext is None:
        raise RuntimeError("compiled CDCL kernel requested but not built")
    return cdcl_ext, "cython"


def lookahead_kernel(backend: str = "auto"):
    if backend == "python" or (backend == "auto" and lookahead_ext is None):
        return lookahead_py, "python"
    if lookahead_ext is None:
        raise RuntimeError("compiled look-ahead kernel requested but not built")
    return lookahead_ext, "cython"
