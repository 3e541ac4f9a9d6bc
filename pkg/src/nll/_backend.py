"""Select the compiled core when available, else the numpy fallback.

Set ``NLL_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _core_py

BACKEND = "python"
core = _core_py

if os.environ.get("NLL_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core as core  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        pass

BUMP = _core_py.BUMP
BUMP_SQ = _core_py.BUMP_SQ
POWER = _core_py.POWER
BUBBLE = _core_py.BUBBLE
CONST = _core_py.CONST
