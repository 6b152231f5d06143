"""Operational encode-transmit-decode simulation: exact joint distributions,
mutual information, the pretty good measurement, and sampled shots."""

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, EmptyDecoderList, InvalidDistribution
from .linalg import hermitian_eig
from .qcore import Povm, apply_channel, entropy_from_probs

PGM_SUPPORT_EIG = 1e-12


@dataclass(frozen=True)
class JointDistribution:
    """p(x, y) for message x and measurement outcome y."""

    p_xy: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p_xy, dtype=np.float64)
        if p.ndim != 2:
            raise InvalidDistribution("joint distribution must be a matrix")
        if p.min() < -1e-12:
            raise InvalidDistribution(f"negative joint probability {p.min():.3e}")
        p = np.clip(p, 0.0, None)
        if abs(p.sum() - 1.0) > 1e-9:
            raise InvalidDistribution(f"joint probabilities sum to {p.sum()}")
        object.__setattr__(self, "p_xy", p)

    @property
    def message_count(self):
        return self.p_xy.shape[0]

    @property
    def outcome_count(self):
        return self.p_xy.shape[1]


@dataclass(frozen=True)
class ShotRecord:
    counts: np.ndarray
    shots: int
    seed: int

    def empirical_joint(self):
        return JointDistribution(self.counts / self.shots)


def joint_distribution(rho, ensemble, povm):
    """Born-rule joint p(x, y) = p_x Tr(M_y N_x(rho))."""
    if rho.dim != ensemble.dim or rho.dim != povm.dim:
        raise DimMismatch("state, ensemble, and POVM dimensions differ")
    rows = []
    for p_x, channel in zip(ensemble.probs, ensemble.channels):
        out = apply_channel(channel, rho).mat
        row = [p_x * max(0.0, float(np.trace(effect @ out).real))
               for effect in povm.effects]
        rows.append(row)
    return JointDistribution(np.array(rows))


def mutual_information(joint):
    """I(X:Y) = H(X) + H(Y) - H(XY) in bits."""
    p = joint.p_xy
    hx = entropy_from_probs(p.sum(axis=1))
    hy = entropy_from_probs(p.sum(axis=0))
    hxy = entropy_from_probs(p.ravel())
    return max(0.0, hx + hy - hxy)


def mutual_information_stderr(joint, shots):
    """Asymptotic standard error of the plug-in estimator from ``shots``
    samples of the exact joint."""
    p = joint.p_xy
    px = p.sum(axis=1, keepdims=True)
    py = p.sum(axis=0, keepdims=True)
    mask = p > 0
    g = np.zeros_like(p)
    g[mask] = np.log2(p[mask] / (px @ py)[mask])
    mean = float((p * g).sum())
    var = float((p * g * g).sum()) - mean * mean
    return float(np.sqrt(max(var, 0.0) / shots))


def pretty_good_measurement(ensemble):
    """Effects mean^(-1/2) p_x rho_x mean^(-1/2) on the mean's support, plus
    one slack effect covering the null space."""
    mean = sum(p * s.mat for p, s in zip(ensemble.probs, ensemble.states))
    dec = hermitian_eig(mean)
    support = dec.eigenvalues > PGM_SUPPORT_EIG
    inv_half = np.zeros_like(dec.eigenvalues)
    inv_half[support] = 1.0 / np.sqrt(dec.eigenvalues[support])
    root = (dec.eigenvectors * inv_half) @ dec.eigenvectors.conj().T
    effects = [root @ (p * s.mat) @ root
               for p, s in zip(ensemble.probs, ensemble.states)]
    slack = np.eye(ensemble.dim, dtype=np.complex128) - sum(effects)
    effects.append(0.5 * (slack + slack.conj().T))
    return Povm(tuple(0.5 * (e + e.conj().T) for e in effects))


def simulate_shots(rho, ensemble, povm, shots, rng):
    """Sample the protocol: draw x from the prior, send N_x(rho), measure.

    Returns integer counts over (message, outcome) cells; deterministic for a
    fixed generator state.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    exact = joint_distribution(rho, ensemble, povm)
    n, m = exact.p_xy.shape
    prior = exact.p_xy.sum(axis=1)
    prior = prior / prior.sum()
    conditional = np.where(prior[:, None] > 0, exact.p_xy / np.where(
        prior[:, None] == 0, 1.0, prior[:, None]), 1.0 / m)
    conditional = conditional / conditional.sum(axis=1, keepdims=True)

    seed = rng.seed
    u_msg = rng.random(shots)
    u_out = rng.random(shots)
    xs = np.searchsorted(np.cumsum(prior), u_msg, side="right")
    xs = np.clip(xs, 0, n - 1)
    cum_rows = np.cumsum(conditional, axis=1)
    ys = (u_out[:, None] >= cum_rows[xs]).sum(axis=1)
    ys = np.clip(ys, 0, m - 1)
    counts = np.bincount(xs * m + ys, minlength=n * m).reshape(n, m)
    return ShotRecord(counts=counts, shots=shots, seed=seed)


def single_shot_lower_bound(rho, ensemble, decoders):
    """Best mutual information over a finite decoder menu: a lower bound on
    the single-copy restricted capacity, never above chi."""
    if len(decoders) == 0:
        raise EmptyDecoderList("no decoders supplied")
    return max(mutual_information(joint_distribution(rho, ensemble, povm))
               for povm in decoders)
