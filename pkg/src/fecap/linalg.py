"""Self-contained complex linear algebra: Hermitian eigendecomposition,
spectral matrix functions, seeded random sampling."""

from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import DomainError, NotHermitian

# eigenvalues in [CLIP_FLOOR, 0) are treated as floating-point zeros when a
# spectral function is applied; anything below is a genuine domain violation
CLIP_FLOOR = -1e-10

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_FNV_OFFSET = np.uint64(0xCBF29CE484222325)
_FNV_PRIME = np.uint64(0x100000001B3)


def _splitmix(x):
    """SplitMix64 output function on a uint64 array (wrapping arithmetic)."""
    z = x.astype(np.uint64)
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


class SeededRng:
    """Counter-based generator: the n-th output is a bit-mix of
    seed + n * golden_gamma (SplitMix64), so identical seeds reproduce the
    stream exactly and bulk draws vectorize."""

    def __init__(self, seed):
        self._seed = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
        self._counter = np.uint64(0)

    @property
    def seed(self):
        return int(self._seed)

    def _next_block(self, n):
        idx = self._counter + np.arange(1, n + 1, dtype=np.uint64)
        self._counter += np.uint64(n)
        return _splitmix(self._seed + idx * _GAMMA)

    def random(self, n=None):
        """Uniform float64 in [0, 1)."""
        u = (self._next_block(n or 1) >> np.uint64(11)).astype(np.float64) * 2.0**-53
        return float(u[0]) if n is None else u

    def standard_normal(self, n=None):
        """Standard normals via Box-Muller on the uniform stream."""
        m = n or 1
        pairs = (m + 1) // 2
        bits = self._next_block(2 * pairs)
        # shift into (0, 1] so the log is finite
        u1 = ((bits[:pairs] >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53
        u2 = (bits[pairs:] >> np.uint64(11)).astype(np.float64) * 2.0**-53
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])[:m]
        return float(z[0]) if n is None else z

    def integers(self, low, high, n=None):
        """Uniform integers in [low, high) (module-internal convenience)."""
        u = self._next_block(n or 1) % np.uint64(high - low)
        out = (u.astype(np.int64) + low)
        return int(out[0]) if n is None else out

    def spawn(self, name, index=0):
        """Independent child generator keyed by (seed, name, index)."""
        return SeededRng(derive_seed(self.seed, name, index))


def derive_seed(seed, name, index=0):
    """Stable sub-seed from (seed, component name, trial index)."""
    h = _FNV_OFFSET
    for b in name.encode("utf-8"):
        h = (h ^ np.uint64(b)) * _FNV_PRIME
    mixed = _splitmix(np.array([np.uint64(seed) + _GAMMA * (h + np.uint64(index))]))
    return int(mixed[0])


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues ascending; eigenvector k is ``eigenvectors[:, k]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_complex_matrix(a, name="matrix"):
    """Coerce to a square complex128 array with finite entries."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m.view(np.float64))):
        raise ValueError(f"{name} has non-finite entries")
    return m


def frobenius(a):
    return float(np.linalg.norm(a))


def is_hermitian(a, tol):
    return frobenius(a - a.conj().T) <= tol


def hermitian_eig(a, tol=None):
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Raises NotHermitian when ``a`` is farther than ``tol`` (Frobenius) from
    its conjugate transpose, NoConvergence if the iteration stalls.
    """
    m = as_complex_matrix(a)
    d = m.shape[0]
    if tol is None:
        tol = 1e-10 * d
    if not is_hermitian(m, tol):
        raise NotHermitian(f"matrix is {frobenius(m - m.conj().T):.3e} from Hermitian")
    # symmetrize away the sub-tolerance part so the kernel sees an exactly
    # Hermitian input
    m = 0.5 * (m + m.conj().T)
    w, v = backend.eigh(m)
    return EigenDecomposition(np.asarray(w, dtype=np.float64), np.asarray(v))


def spectral_apply(a, f, tol=None):
    """V f(Lambda) V^H with eigenvalue clipping for tiny negatives."""
    dec = hermitian_eig(a, tol)
    w = dec.eigenvalues
    if np.any(w < CLIP_FLOOR):
        raise DomainError(f"eigenvalue {w.min():.3e} below the clipping floor")
    w = np.clip(w, 0.0, None)
    try:
        fw = np.array([float(f(x)) for x in w])
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise DomainError(f"spectral function undefined on the spectrum: {exc}") from exc
    if not np.all(np.isfinite(fw)):
        raise DomainError("spectral function returned a non-finite value")
    v = dec.eigenvectors
    out = (v * fw) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def haar_random_unitary(d, rng):
    """Haar-distributed unitary: QR of a complex Ginibre matrix with the
    R-diagonal phases absorbed."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    g = rng.standard_normal(2 * d * d)
    z = (g[: d * d] + 1j * g[d * d :]).reshape(d, d) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    phases = diag / np.abs(np.where(diag == 0, 1.0, diag))
    return q * phases


def random_density_matrix(d, rng):
    """G G^H / Tr(G G^H) with complex Gaussian G (Hilbert-Schmidt measure)."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    g = rng.standard_normal(2 * d * d)
    z = (g[: d * d] + 1j * g[d * d :]).reshape(d, d) / np.sqrt(2.0)
    m = z @ z.conj().T
    m = 0.5 * (m + m.conj().T)
    return m / np.trace(m).real
