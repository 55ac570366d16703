"""Kernel selection: compiled extension when built, pure Python otherwise.

Set ODDM_THP_PURE_PYTHON=1 to force the fallback (used by the benchmark and
the parity tests).
"""

import os

from . import _precode_py

if os.environ.get("ODDM_THP_PURE_PYTHON") == "1":
    _impl = _precode_py
else:
    try:
        from . import _precode_c as _impl
    except ImportError:
        _impl = _precode_py

precode_kernel = _impl.precode_kernel
BACKEND = "compiled" if _impl.__name__.endswith("_precode_c") else "python"
