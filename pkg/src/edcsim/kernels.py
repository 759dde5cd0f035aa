"""Sampling-kernel dispatch.

Selects the compiled Cython kernel when it was built, otherwise the pure
NumPy implementation.  The environment variable ``EDCSIM_KERNEL`` forces a
backend: ``auto`` (default), ``cython`` or ``python``.  Both backends are
bit-identical by contract, so the choice never changes results, only
speed.
"""

from __future__ import annotations

import os

from . import _sampler_py

try:
    from . import _sampler as _compiled
except ImportError:
    _compiled = None


def available_backends() -> dict:
    """Importable kernel modules keyed by backend name."""
    backends = {"python": _sampler_py}
    if _compiled is not None:
        backends["cython"] = _compiled
    return backends


_requested = os.environ.get("EDCSIM_KERNEL", "auto").strip().lower()
if _requested not in ("auto", "cython", "python"):
    raise RuntimeError(f"EDCSIM_KERNEL must be auto, cython or python, got {_requested!r}")
if _requested == "cython" and _compiled is None:
    raise RuntimeError("EDCSIM_KERNEL=cython but the compiled sampler is not built")

if _requested == "python" or _compiled is None:
    BACKEND = "python"
    sample_counts = _sampler_py.sample_counts
else:
    BACKEND = "cython"
    sample_counts = _compiled.sample_counts
