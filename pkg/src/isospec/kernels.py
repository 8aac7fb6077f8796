"""Backend selection for the recurrence kernels.

The compiled extension is used when it imports; otherwise the numpy fallback.
Set ``ISOSPEC_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

try:
    if os.environ.get("ISOSPEC_PURE_PYTHON"):
        raise ImportError("pure-python backend forced")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

backend = _compiled if _compiled is not None else _kernels_py
BACKEND_NAME = "compiled" if _compiled is not None else "python"

three_term = backend.three_term
bessel_j_seq = backend.bessel_j_seq

__all__ = ["BACKEND_NAME", "bessel_j_seq", "three_term"]
