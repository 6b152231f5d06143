"""Pure-numpy fallback for the compiled kernels (same call signatures)."""

import numpy as np

NAME = "python"


def jacobi_eigh(a, off_threshold, max_rotations):
    """LAPACK-backed stand-in for the compiled Jacobi routine."""
    try:
        w, v = np.linalg.eigh(np.asarray(a, dtype=np.complex128))
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(str(exc)) from exc
    res = v @ np.diag(w).astype(np.complex128) @ v.conj().T
    off = res - np.diag(np.diagonal(res))
    return w, v, float(np.linalg.norm(off))


def mix_eval(p, sigmas, s_bits, off_threshold, max_rotations):
    p = np.asarray(p, dtype=np.float64)
    sigmas = np.asarray(sigmas, dtype=np.complex128)
    s_bits = np.asarray(s_bits, dtype=np.float64)
    m = np.einsum("x,xij->ij", p, sigmas)
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(str(exc)) from exc
    lw = np.log2(np.clip(w, 1e-300, None))
    log_m = (v * lw) @ v.conj().T
    D = -s_bits - np.einsum("xij,ji->x", sigmas, log_m).real
    return float(p @ D), D, w, v
