"""Hot loops, compiled when the extension is built, pure Python otherwise.

Set ``COREF_METER_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels as python

if os.environ.get("COREF_METER_PURE_PYTHON", "") not in ("", "0"):
    compiled = None
else:
    try:
        from . import _ckernels as compiled
    except ImportError:
        compiled = None

impl = compiled if compiled is not None else python
BACKEND = "cython" if compiled is not None else "python"

window_stats = impl.window_stats
auc_halves = impl.auc_halves
flip_mean_stats = impl.flip_mean_stats
flip_f1_stats = impl.flip_f1_stats

__all__ = ["BACKEND", "auc_halves", "compiled", "flip_f1_stats", "flip_mean_stats", "python", "window_stats"]
