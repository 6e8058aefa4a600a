"""Backend selection for the hot loops.

The Cython extension ``_ckernels`` is used when it was built; otherwise the
numpy fallback in ``_pykernels`` is used. Setting ``HOLOSYNTH_PURE_PYTHON=1``
forces the fallback. ``BACKEND`` names the active choice.
"""

from __future__ import annotations

import os

from . import _pykernels

python_backend = _pykernels
compiled_backend = None

if os.environ.get("HOLOSYNTH_PURE_PYTHON", "") not in ("", "0"):
    _active = _pykernels
else:
    try:
        from . import _ckernels as compiled_backend
    except ImportError:
        compiled_backend = None
    _active = compiled_backend or _pykernels

BACKEND = "cython" if _active is compiled_backend else "python"

median2d_argmedian = _active.median2d_argmedian
pointsource_field = _active.pointsource_field
