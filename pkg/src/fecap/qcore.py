"""States, channels, measurements, and the entropic functionals built on them."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateHamiltonian, DimMismatch, InvalidDistribution
from .linalg import as_complex_matrix, frobenius, hermitian_eig, is_hermitian

# support thresholds for declaring a relative entropy infinite: a sigma
# eigenvalue below SUPPORT_EIG carrying rho-weight above SUPPORT_WEIGHT
SUPPORT_EIG = 1e-12
SUPPORT_WEIGHT = 1e-10


def _check_dims(a, b):
    if a != b:
        raise DimMismatch(f"dimension mismatch: {a} vs {b}")


@dataclass(frozen=True)
class DensityMatrix:
    mat: np.ndarray

    def __post_init__(self):
        m = as_complex_matrix(self.mat, "density matrix")
        object.__setattr__(self, "mat", m)
        d = m.shape[0]
        if not is_hermitian(m, 1e-10 * d):
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-10 or abs(np.trace(m).imag) > 1e-10:
            raise ValueError(f"density matrix trace {np.trace(m)} != 1")
        w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
        if w.min() < -1e-10:
            raise ValueError(f"density matrix has eigenvalue {w.min():.3e} < 0")

    @property
    def dim(self):
        return self.mat.shape[0]


def pure_state(vec):
    v = np.asarray(vec, dtype=np.complex128).ravel()
    v = v / np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj()))


def basis_state(d, k):
    v = np.zeros(d, dtype=np.complex128)
    v[k] = 1.0
    return DensityMatrix(np.outer(v, v.conj()))


def maximally_mixed(d):
    return DensityMatrix(np.eye(d, dtype=np.complex128) / d)


@dataclass(frozen=True)
class KrausChannel:
    kraus: tuple

    def __post_init__(self):
        if len(self.kraus) == 0:
            raise ValueError("channel needs at least one Kraus operator")
        ks = tuple(as_complex_matrix(k, "Kraus operator") for k in self.kraus)
        object.__setattr__(self, "kraus", ks)
        d = ks[0].shape[0]
        for k in ks:
            _check_dims(k.shape[0], d)
        total = sum(k.conj().T @ k for k in ks)
        if frobenius(total - np.eye(d)) > 1e-9 * d:
            raise ValueError(
                f"Kraus completeness violated by {frobenius(total - np.eye(d)):.3e}")

    @property
    def dim(self):
        return self.kraus[0].shape[0]


def identity_channel(d):
    return KrausChannel((np.eye(d, dtype=np.complex128),))


def unitary_channel(u):
    return KrausChannel((as_complex_matrix(u, "unitary"),))


def pinning_channel(sigma):
    """Replacement map sending every input to ``sigma``."""
    target = sigma.mat if isinstance(sigma, DensityMatrix) else as_complex_matrix(sigma)
    d = target.shape[0]
    dec = hermitian_eig(target)
    ks = []
    for i, f in enumerate(dec.eigenvalues):
        if f <= 1e-14:
            continue
        col = dec.eigenvectors[:, i]
        for j in range(d):
            k = np.zeros((d, d), dtype=np.complex128)
            k[:, j] = math.sqrt(f) * col
            ks.append(k)
    return KrausChannel(tuple(ks))


def apply_channel(n, rho):
    _check_dims(n.dim, rho.dim)
    out = sum(k @ rho.mat @ k.conj().T for k in n.kraus)
    out = 0.5 * (out + out.conj().T)
    return DensityMatrix(out / np.trace(out).real)


def compose(outer, inner):
    """Channel first applying ``inner``, then ``outer``."""
    _check_dims(outer.dim, inner.dim)
    return KrausChannel(tuple(a @ b for a in outer.kraus for b in inner.kraus))


def is_unital(n, tol=1e-9):
    d = n.dim
    total = sum(k @ k.conj().T for k in n.kraus)
    return frobenius(total - np.eye(d)) <= tol


@dataclass(frozen=True)
class Povm:
    effects: tuple

    def __post_init__(self):
        if len(self.effects) == 0:
            raise ValueError("POVM needs at least one effect")
        es = tuple(as_complex_matrix(e, "POVM effect") for e in self.effects)
        object.__setattr__(self, "effects", es)
        d = es[0].shape[0]
        for e in es:
            _check_dims(e.shape[0], d)
            if not is_hermitian(e, 1e-9 * d):
                raise ValueError("POVM effect is not Hermitian")
            if np.linalg.eigvalsh(0.5 * (e + e.conj().T)).min() < -1e-10:
                raise ValueError("POVM effect is not positive semidefinite")
        total = sum(es)
        if frobenius(total - np.eye(d)) > 1e-9 * d:
            raise ValueError("POVM effects do not sum to the identity")

    @property
    def dim(self):
        return self.effects[0].shape[0]


def _check_probs(probs, count, tol=1e-12):
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1 or len(p) != count:
        raise ValueError("probability vector length mismatch")
    if p.min() < -tol:
        raise ValueError(f"negative probability {p.min():.3e}")
    if abs(p.sum() - 1.0) > tol:
        raise ValueError(f"probabilities sum to {p.sum()}, not 1")
    return np.clip(p, 0.0, None)


@dataclass(frozen=True)
class EncodingEnsemble:
    """The object {p_x, N_x}: a prior over encoding channels."""

    probs: np.ndarray
    channels: tuple

    def __post_init__(self):
        chans = tuple(self.channels)
        object.__setattr__(self, "channels", chans)
        if len(chans) == 0:
            raise ValueError("ensemble needs at least one channel")
        d = chans[0].dim
        for c in chans:
            _check_dims(c.dim, d)
        object.__setattr__(self, "probs", _check_probs(self.probs, len(chans)))

    @property
    def dim(self):
        return self.channels[0].dim


@dataclass(frozen=True)
class CqEnsemble:
    probs: np.ndarray
    states: tuple

    def __post_init__(self):
        states = tuple(self.states)
        object.__setattr__(self, "states", states)
        if len(states) == 0:
            raise ValueError("ensemble needs at least one state")
        d = states[0].dim
        for s in states:
            _check_dims(s.dim, d)
        object.__setattr__(self, "probs", _check_probs(self.probs, len(states)))

    @property
    def dim(self):
        return self.states[0].dim


@dataclass(frozen=True)
class Hamiltonian:
    """Nondegenerate d-level Hamiltonian; ``basis`` columns are its
    eigenvectors (computational basis by default)."""

    energies: np.ndarray
    basis: np.ndarray = field(default=None)

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=np.float64)
        object.__setattr__(self, "energies", e)
        if np.any(np.diff(e) <= 0):
            raise DegenerateHamiltonian(
                "energies must be strictly ascending (passivity is undefined "
                "for degenerate spectra)")
        d = len(e)
        b = np.eye(d, dtype=np.complex128) if self.basis is None else as_complex_matrix(self.basis)
        if frobenius(b.conj().T @ b - np.eye(d)) > 1e-10 * d:
            raise ValueError("Hamiltonian basis is not orthonormal")
        object.__setattr__(self, "basis", b)

    @property
    def dim(self):
        return len(self.energies)

    def matrix(self):
        return (self.basis * self.energies) @ self.basis.conj().T


def _clipped_spectrum(mat):
    w = hermitian_eig(mat).eigenvalues
    return np.clip(w, 0.0, None)


def entropy_from_probs(w):
    w = np.asarray(w, dtype=np.float64)
    w = w[w > 0.0]
    return float(-(w * np.log2(w)).sum()) if len(w) else 0.0


def von_neumann_entropy(rho):
    """S(rho) in bits."""
    return entropy_from_probs(_clipped_spectrum(rho.mat))


def shannon_entropy(probs):
    p = np.asarray(probs, dtype=np.float64)
    if p.min() < -1e-12 or abs(p.sum() - 1.0) > 1e-9:
        raise InvalidDistribution(f"not a probability vector (sum {p.sum()})")
    return entropy_from_probs(np.clip(p, 0.0, None))


def binary_entropy(p):
    if p < -1e-12 or p > 1.0 + 1e-12:
        raise InvalidDistribution(f"binary entropy argument {p} outside [0, 1]")
    p = min(max(p, 0.0), 1.0)
    return entropy_from_probs([p, 1.0 - p])


def relative_entropy(rho, sigma):
    """D(rho || sigma) in bits; math.inf when rho's support escapes sigma's."""
    _check_dims(rho.dim, sigma.dim)
    dec = hermitian_eig(sigma.mat)
    overlaps = np.einsum("ij,jk,ki->i", dec.eigenvectors.conj().T, rho.mat,
                         dec.eigenvectors).real
    null = dec.eigenvalues < SUPPORT_EIG
    if overlaps[null].sum() > SUPPORT_WEIGHT:
        return math.inf
    keep = ~null
    cross = float((overlaps[keep] * np.log2(dec.eigenvalues[keep])).sum())
    d_val = -von_neumann_entropy(rho) - cross
    return max(0.0, d_val) if d_val > -1e-9 else d_val


def holevo_chi(ensemble):
    """chi = S(mean state) - mean entropy, in bits."""
    mean = sum(p * s.mat for p, s in zip(ensemble.probs, ensemble.states))
    avg_entropy = sum(p * von_neumann_entropy(s)
                      for p, s in zip(ensemble.probs, ensemble.states) if p > 0)
    return entropy_from_probs(_clipped_spectrum(mean)) - avg_entropy


def average_output(rho, ensemble):
    _check_dims(rho.dim, ensemble.dim)
    mean = sum(p * apply_channel(n, rho).mat
               for p, n in zip(ensemble.probs, ensemble.channels))
    return DensityMatrix(0.5 * (mean + mean.conj().T))


def output_ensemble(rho, ensemble):
    """The classical-quantum ensemble {p_x, N_x(rho)}."""
    return CqEnsemble(ensemble.probs,
                      tuple(apply_channel(n, rho) for n in ensemble.channels))


def ergotropy(rho, h):
    """Maximal unitarily extractable work Tr(rho H) - Tr(rho_P H)."""
    _check_dims(rho.dim, h.dim)
    energy = float(np.trace(rho.mat @ h.matrix()).real)
    pops = np.sort(_clipped_spectrum(rho.mat))[::-1]
    passive_energy = float((pops * h.energies).sum())
    return energy - passive_energy


def passify(rho, h):
    """The passive state with rho's spectrum: descending populations on
    ascending energy levels."""
    _check_dims(rho.dim, h.dim)
    pops = np.sort(_clipped_spectrum(rho.mat))[::-1]
    pops = pops / pops.sum()
    mat = (h.basis * pops) @ h.basis.conj().T
    return DensityMatrix(mat)


def trace_distance(a, b):
    w = np.linalg.eigvalsh(0.5 * (a.mat + a.mat.conj().T) - 0.5 * (b.mat + b.mat.conj().T))
    return 0.5 * float(np.abs(w).sum())
