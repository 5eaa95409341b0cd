"""Global floating-point precision for autodiff tensors.

f64 is the default (tests and label generation run at f64); f32 can be
selected for faster training. Complex MRI arrays always use the matching
complex dtype.
"""

import numpy as np

from .errors import ValidationError

_DTYPES = {"f32": np.float32, "f64": np.float64}
_COMPLEX = {"f32": np.complex64, "f64": np.complex128}

_current = "f64"


def set_precision(name):
    """Select the global precision, "f32" or "f64"."""
    global _current
    if name not in _DTYPES:
        raise ValidationError(f"unknown precision {name!r}; expected 'f32' or 'f64'")
    _current = name


def precision():
    return _current


def float_dtype():
    return _DTYPES[_current]


def complex_dtype():
    return _COMPLEX[_current]
