"""Backend selection for the energy/gradient kernel.

Prefers the compiled Cython extension; falls back to the NumPy
implementation when the extension is unavailable.  Setting the
environment variable POLARON_PURE_PYTHON=1 forces the fallback,
which is how the benchmark and the cross-check tests compare the two.
"""

import os

from . import _kernels_py

if os.environ.get("POLARON_PURE_PYTHON") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels_cy as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND_NAME

energy_norm_gradient = _impl.energy_norm_gradient
