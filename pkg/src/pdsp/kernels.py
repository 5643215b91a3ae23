"""Kernel dispatch: compiled ``_speedups`` when importable, else the Python twin.

Set ``PDSP_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

IMPLEMENTATION = "python"
_impl = _kernels_py
if os.environ.get("PDSP_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]

        IMPLEMENTATION = "cython"
    except ImportError:
        _impl = _kernels_py

reduce_word = _impl.reduce_word
disjoint_paths = _impl.disjoint_paths
bracket_matchings = _impl.bracket_matchings


def implementations() -> dict[str, object]:
    """Every importable kernel module keyed by name, for benchmarks and parity tests."""
    out: dict[str, object] = {"python": _kernels_py}
    try:
        from . import _speedups

        out["cython"] = _speedups
    except ImportError:
        pass
    return out


# catches the limit error of whichever implementation raised it
KernelLimit = tuple({m.KernelLimit for m in implementations().values()})  # type: ignore[attr-defined]
