"""Backend selection for the block kernels.

The compiled extension ``cfp._ckernels`` is used when it was built; otherwise
the numpy implementation in ``cfp._pykernels`` is. Set ``CFP_KERNELS`` to
``python`` to force the fallback, or to ``cython`` to make a missing
extension an import error instead of a silent fallback.
"""

import contextlib
import os

from . import _pykernels

_choice = os.environ.get("CFP_KERNELS", "auto").lower()
if _choice not in {"auto", "python", "cython"}:
    raise ImportError(f"CFP_KERNELS must be auto, python or cython, not {_choice!r}")

compiled = None
if _choice != "python":
    try:
        from . import _ckernels as compiled
    except ImportError:
        if _choice == "cython":
            raise

backend = compiled if compiled is not None else _pykernels
BACKEND = backend.NAME

cut_blocks = backend.cut_blocks
project_blocks = backend.project_blocks


def available():
    """Names mapped to kernel modules that can be imported in this build."""
    out = {"python": _pykernels}
    if compiled is not None:
        out["cython"] = compiled
    return out


@contextlib.contextmanager
def use(name):
    """Temporarily route the block kernels through backend `name` (not thread-safe)."""
    global cut_blocks, project_blocks
    mods = available()
    if name not in mods:
        raise ValueError(f"kernel backend {name!r} is not available; have {sorted(mods)}")
    saved = cut_blocks, project_blocks
    cut_blocks, project_blocks = mods[name].cut_blocks, mods[name].project_blocks
    try:
        yield mods[name]
    finally:
        cut_blocks, project_blocks = saved
