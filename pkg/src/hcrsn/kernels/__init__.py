"""Hot numerical kernels with a compiled core and a NumPy fallback.

The compiled Cython extension is preferred when it imported cleanly; set
``HCRSN_PURE_PY=1`` to force the NumPy implementation. Both backends follow
the same arithmetic (same reduction order, same comparisons), so results
agree to the last few ulps and all integer outputs agree exactly.
"""

import os

from . import _pure

if os.environ.get("HCRSN_PURE_PY"):
    _impl = _pure
else:
    try:
        from . import _fast as _impl
    except ImportError:
        _impl = _pure

BACKEND = _impl.BACKEND_NAME
score_assignments = _impl.score_assignments
count_collisions = _impl.count_collisions

__all__ = ["BACKEND", "score_assignments", "count_collisions"]
