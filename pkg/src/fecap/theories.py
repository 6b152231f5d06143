"""Resource-theory descriptors: free states, free channels, stochastic-free
instruments, and the default extreme-channel pools."""

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, UnsupportedDim
from .linalg import as_complex_matrix, frobenius, hermitian_eig
from .qcore import (
    DensityMatrix,
    KrausChannel,
    apply_channel,
    basis_state,
    identity_channel,
    maximally_mixed,
    pinning_channel,
    unitary_channel,
)


class ResourceTheory:
    """Base descriptor; concrete theories implement the free-state test and
    the extreme points of the free set."""

    dim: int

    def is_free_state(self, rho, tol=1e-9):
        raise NotImplementedError

    def free_extreme_states(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Purity(ResourceTheory):
    """Single free state I/d; free channels are the unital ones."""

    dim: int

    def is_free_state(self, rho, tol=1e-9):
        return frobenius(rho.mat - np.eye(self.dim) / self.dim) <= tol

    def free_extreme_states(self):
        return [maximally_mixed(self.dim)]


@dataclass(frozen=True)
class Pointed(ResourceTheory):
    """A single arbitrary free state."""

    free_state: DensityMatrix

    @property
    def dim(self):
        return self.free_state.dim

    def is_free_state(self, rho, tol=1e-9):
        return frobenius(rho.mat - self.free_state.mat) <= tol

    def free_extreme_states(self):
        return [self.free_state]


@dataclass(frozen=True)
class Activity(ResourceTheory):
    """Free states are the passive states of a nondegenerate Hamiltonian."""

    hamiltonian: object

    @property
    def dim(self):
        return self.hamiltonian.dim

    def is_free_state(self, rho, tol=1e-9):
        b = self.hamiltonian.basis
        in_energy_basis = b.conj().T @ rho.mat @ b
        off = in_energy_basis - np.diag(np.diagonal(in_energy_basis))
        if np.abs(off).max() > tol:
            return False
        pops = np.diagonal(in_energy_basis).real
        return bool(np.all(np.diff(pops) <= tol))

    def free_extreme_states(self):
        """Uniform mixtures of the k lowest levels, k = 1..d."""
        b = self.hamiltonian.basis
        out = []
        for k in range(1, self.dim + 1):
            pops = np.zeros(self.dim)
            pops[:k] = 1.0 / k
            out.append(DensityMatrix((b * pops) @ b.conj().T))
        return out


@dataclass(frozen=True)
class BasisContaining(ResourceTheory):
    """Free set = convex hull of a complete orthonormal basis (the minimal
    set making the theory non-faithful)."""

    basis: np.ndarray  # columns are the basis vectors

    def __post_init__(self):
        b = as_complex_matrix(self.basis, "basis")
        if frobenius(b.conj().T @ b - np.eye(b.shape[0])) > 1e-10 * b.shape[0]:
            raise ValueError("basis columns are not orthonormal")
        object.__setattr__(self, "basis", b)

    @property
    def dim(self):
        return self.basis.shape[0]

    def is_free_state(self, rho, tol=1e-9):
        in_basis = self.basis.conj().T @ rho.mat @ self.basis
        off = in_basis - np.diag(np.diagonal(in_basis))
        return bool(np.abs(off).max() <= tol)

    def free_extreme_states(self):
        return [DensityMatrix(np.outer(self.basis[:, k], self.basis[:, k].conj()))
                for k in range(self.dim)]


@dataclass(frozen=True)
class StochasticFreeInstrument:
    """Kraus decomposition whose branches are individually free."""

    kraus: tuple

    def __post_init__(self):
        ks = tuple(as_complex_matrix(k, "instrument Kraus") for k in self.kraus)
        object.__setattr__(self, "kraus", ks)
        d = ks[0].shape[0]
        total = sum(k.conj().T @ k for k in ks)
        if frobenius(total - np.eye(d)) > 1e-9 * d:
            raise ValueError("instrument is not trace preserving overall")

    @property
    def dim(self):
        return self.kraus[0].shape[0]

    def total_channel(self):
        return KrausChannel(self.kraus)


def is_free_state(theory, rho, tol=1e-9):
    if theory.dim != rho.dim:
        raise DimMismatch(f"theory dim {theory.dim} vs state dim {rho.dim}")
    return theory.is_free_state(rho, tol)


def free_extreme_states(theory):
    return theory.free_extreme_states()


def is_free_channel(theory, channel, tol=1e-8):
    """Free iff every extreme free state stays free; extends to the whole
    (convex) free set by linearity."""
    if theory.dim != channel.dim:
        raise DimMismatch(f"theory dim {theory.dim} vs channel dim {channel.dim}")
    return all(theory.is_free_state(apply_channel(channel, sigma), tol)
               for sigma in theory.free_extreme_states())


def is_stochastically_free(theory, instrument, tol=1e-8):
    if theory.dim != instrument.dim:
        raise DimMismatch("instrument dimension mismatch")
    for k in instrument.kraus:
        for sigma in theory.free_extreme_states():
            out = k @ sigma.mat @ k.conj().T
            weight = np.trace(out).real
            if weight <= tol:
                continue
            branch = DensityMatrix(0.5 * (out + out.conj().T) / weight)
            if not theory.is_free_state(branch, tol):
                return False
    return True


def cyclic_shift_unitary(vectors, power):
    """Unitary mapping eigenvector i to eigenvector (i + power) mod d."""
    d = vectors.shape[0]
    u = np.zeros((d, d), dtype=np.complex128)
    for i in range(d):
        u += np.outer(vectors[:, (i + power) % d], vectors[:, i].conj())
    return u


def cyclic_twirl_unitaries(rho):
    """d unitary channels (powers of the cyclic shift of rho's eigenbasis)
    whose uniform mixture maps rho to I/d."""
    dec = hermitian_eig(rho.mat)
    return [unitary_channel(cyclic_shift_unitary(dec.eigenvectors, k))
            for k in range(rho.dim)]


def _pauli_x():
    return np.array([[0, 1], [1, 0]], dtype=np.complex128)


def activity_qubit_pool(theory):
    """The appendix dictionary for qubits: identity, the phase unitary,
    the two pinning maps, and the bit flip."""
    b = theory.hamiltonian.basis
    z = (b * np.array([1.0, -1.0])) @ b.conj().T
    x = b @ _pauli_x() @ b.conj().T
    ground = DensityMatrix(np.outer(b[:, 0], b[:, 0].conj()))
    return [
        identity_channel(2),
        unitary_channel(z),
        pinning_channel(ground),
        pinning_channel(maximally_mixed(2)),
        KrausChannel((np.eye(2, dtype=np.complex128) / np.sqrt(2), x / np.sqrt(2))),
    ]


def default_channel_pool(theory, n_random=0, rng=None):
    """Free channels used as the default encoding pool; every member passes
    ``is_free_channel``."""
    d = theory.dim
    if isinstance(theory, Purity):
        eye = np.eye(d, dtype=np.complex128)
        pool = [unitary_channel(cyclic_shift_unitary(eye, k)) for k in range(d)]
        for _ in range(n_random):
            from .linalg import haar_random_unitary

            pool.append(unitary_channel(haar_random_unitary(d, rng)))
        return pool
    if isinstance(theory, Pointed):
        pool = [identity_channel(d), pinning_channel(theory.free_state)]
        dec = hermitian_eig(theory.free_state.mat)
        for j in range(n_random):
            if j % 2 == 0:
                phases = np.exp(2j * np.pi * rng.random(d))
                u = (dec.eigenvectors * phases) @ dec.eigenvectors.conj().T
                cand = unitary_channel(u)
            else:
                lam = rng.random()
                ks = [np.sqrt(lam) * np.eye(d, dtype=np.complex128)]
                ks += [np.sqrt(1.0 - lam) * k for k in pool[1].kraus]
                cand = KrausChannel(tuple(ks))
            if is_free_channel(theory, cand):
                pool.append(cand)
        return pool
    if isinstance(theory, Activity):
        if d != 2:
            raise UnsupportedDim(
                "activity pools ship for qubits only; supply and verify your "
                "own pool for larger dimensions")
        return activity_qubit_pool(theory)
    if isinstance(theory, BasisContaining):
        return [pinning_channel(s) for s in theory.free_extreme_states()]
    raise TypeError(f"unknown theory {theory!r}")
