"""Hot-kernel backend selection.

The compiled extension is used when it was built; otherwise the pure
numpy backend takes over. SCESAME_PURE=1 forces the pure backend. Both
expose the same three functions with bit-identical results:

    pairwise_intersections, nms_suppress, match_pixels
"""

from __future__ import annotations

import os

from . import _numpy

if os.environ.get("SCESAME_PURE", "0") not in ("", "0"):
    _impl = _numpy
else:
    try:
        from . import _ext as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _numpy

pairwise_intersections = _impl.pairwise_intersections
nms_suppress = _impl.nms_suppress
match_pixels = _impl.match_pixels


def backend_name() -> str:
    """Name of the active backend: "ext" or "numpy"."""
    return _impl.BACKEND_NAME
