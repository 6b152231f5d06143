"""Kernel backend selection.

The hot kernels (Hermitian eigensolver, fused ensemble evaluation) exist
twice: a Cython extension (``fecap._kernels``) and a numpy fallback
(``fecap._pykernels``).  The compiled one is used when importable; set
``FECAP_BACKEND=python`` or ``FECAP_BACKEND=compiled`` to force a choice.
``python -m fecap.benchmark`` compares the two.
"""

import os

from . import _pykernels
from .errors import NoConvergence

_requested = os.environ.get("FECAP_BACKEND", "auto")

if _requested == "python":
    _impl = _pykernels
elif _requested == "compiled":
    from . import _kernels as _impl
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = _impl.NAME

# convergence contract of the iterative diagonalization
OFF_THRESHOLD = 1e-12


def _rotation_cap(d):
    return 100 * d * d


def eigh(a):
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    The iteration runs on a scale-normalized copy so the off-diagonal
    threshold is relative to the matrix norm.
    """
    import numpy as np

    d = a.shape[0]
    scale = max(1.0, float(np.linalg.norm(a)))
    try:
        w, v, _ = _impl.jacobi_eigh(a / scale, OFF_THRESHOLD, _rotation_cap(d))
    except RuntimeError as exc:
        raise NoConvergence(f"eigendecomposition did not converge: {exc}") from exc
    return w * scale, v


def mix_eval(p, sigmas, s_bits):
    """chi and relative entropies D_x of the mixture sum_x p_x sigmas_x."""
    d = sigmas.shape[1]
    try:
        return _impl.mix_eval(p, sigmas, s_bits, OFF_THRESHOLD, _rotation_cap(d))
    except RuntimeError as exc:
        raise NoConvergence(f"mixture eigendecomposition failed: {exc}") from exc


def available_backends():
    """Names of importable backends (for the benchmark and tests)."""
    found = [_pykernels]
    try:
        from . import _kernels

        found.append(_kernels)
    except ImportError:
        pass
    return {mod.NAME: mod for mod in found}
