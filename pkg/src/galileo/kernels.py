"""Backend selection for the EM hot loop.

The compiled ``_kernels`` extension is used when it was built; otherwise the
NumPy/SciPy implementation in ``_kernels_py`` takes over.  Setting
``GALILEO_PURE_PYTHON=1`` forces the fallback.
"""
import os
from types import ModuleType

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def available() -> dict:
    """Mapping of backend name to kernel module for every importable backend."""
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["cython"] = _compiled
    return out


def get(name: str) -> ModuleType:
    try:
        return available()[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} is not available") from None


if _compiled is not None and os.environ.get("GALILEO_PURE_PYTHON", "") in ("", "0"):
    BACKEND = "cython"
else:
    BACKEND = "python"

_active = get(BACKEND)
em_pass = _active.em_pass
posterior_pass = _active.posterior_pass
