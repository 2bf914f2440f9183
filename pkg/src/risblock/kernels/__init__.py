"""Steering-sum accumulation kernels.

The multipath channel builders reduce to one dense operation: accumulate,
over every path k, a complex coefficient times the outer product of two
phase ramps (the receive- and transmit-side array responses),

    out[r, c] = sum_k coeffs[k] * exp(1j*row_rates[k]*r) * exp(1j*col_rates[k]*c).

That loop runs three times per generated sample, across every sample of a
dataset, so a compiled implementation is provided next to a numpy fallback.
The compiled module is preferred when it imported cleanly; set
``RISBLOCK_KERNELS=python`` or ``RISBLOCK_KERNELS=cython`` to force one side
(forcing ``cython`` when the extension is missing raises at import).

Both implementations accumulate path-by-path in the same order, so they
agree to floating-point roundoff (tested at 1e-12 relative); each is exactly
reproducible with itself.
"""

import os

from risblock.kernels._reference import accumulate_steering_outer as _py_accumulate

try:  # compiled extension is optional
    from risblock.kernels._accel import accumulate_steering_outer as _cy_accumulate
except ImportError:  # pragma: no cover - depends on build environment
    _cy_accumulate = None

_FORCED = os.environ.get("RISBLOCK_KERNELS", "").strip().lower()
if _FORCED == "python":
    _active = _py_accumulate
    _BACKEND = "python"
elif _FORCED == "cython":
    if _cy_accumulate is None:
        raise ImportError(
            "RISBLOCK_KERNELS=cython but the compiled kernels are not built"
        )
    _active = _cy_accumulate
    _BACKEND = "cython"
elif _cy_accumulate is not None:
    _active = _cy_accumulate
    _BACKEND = "cython"
else:
    _active = _py_accumulate
    _BACKEND = "python"


def accumulate_steering_outer(coeffs, row_rates, col_rates, n_rows, n_cols):
    """Dispatch to the active backend (see module docstring for the math)."""
    return _active(coeffs, row_rates, col_rates, n_rows, n_cols)


def active_backend():
    """Name of the backend the dispatcher is using: 'cython' or 'python'."""
    return _BACKEND


def available_backends():
    """Mapping of backend name -> callable, for tests and benchmarks."""
    out = {"python": _py_accumulate}
    if _cy_accumulate is not None:
        out["cython"] = _cy_accumulate
    return out
