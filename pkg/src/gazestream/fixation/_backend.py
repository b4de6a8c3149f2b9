"""Backend selection for the fixation scan kernel.

Prefers the compiled Cython extension; falls back to the pure NumPy/Python
implementation when the extension is not built. Both return bit-equal
results; the compiled kernel is just much faster on long trajectories.
"""

from __future__ import annotations

try:
    from ._scan import scan_intervals

    BACKEND = "compiled"
except ImportError:
    from ._scan_py import scan_intervals

    BACKEND = "python"

__all__ = ["scan_intervals", "BACKEND"]
