"""Channel generation and decomposition.

Holds the four complex channel matrices of a two-hop two-way relay network,
their SVD caches, the eigen-gains of the relay-to-node links, and the
waterfilling-shaped relay covariance construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, InvalidSpecError

RANK_TOL = 1e-10

_MIX_GAMMA = 0x9E3779B97F4A7C15
_MASK64 = 0xFFFFFFFFFFFFFFFF


def mix64(master_seed: int, trial: int = 0) -> int:
    """Derive a 64-bit per-trial key from a master seed (splitmix64 finalizer).

    Trials keyed by ``mix64(seed, t)`` draw independent streams, so sweeps can
    run trials in any order or in parallel without changing the result.
    """
    z = (master_seed + (trial + 1) * _MIX_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass
class ChannelSet:
    """The four channel matrices plus noise powers.

    ``H_1r``/``H_2r`` are uplink (node -> relay, shape n_r x n_i) and
    ``H_r1``/``H_r2`` are downlink (relay -> node, shape n_i x n_r).
    """

    H_1r: np.ndarray
    H_2r: np.ndarray
    H_r1: np.ndarray
    H_r2: np.ndarray
    sigma2_r: float = 1.0
    sigma2_1: float = 1.0
    sigma2_2: float = 1.0

    @property
    def n1(self) -> int:
        return self.H_1r.shape[1]

    @property
    def n2(self) -> int:
        return self.H_2r.shape[1]

    @property
    def nr(self) -> int:
        return self.H_1r.shape[0]

    def uplink(self, i: int) -> np.ndarray:
        return self.H_1r if i == 1 else self.H_2r

    def downlink(self, i: int) -> np.ndarray:
        return self.H_r1 if i == 1 else self.H_r2

    def noise(self, i: int) -> float:
        return self.sigma2_1 if i == 1 else self.sigma2_2

    def validate(self) -> None:
        nr = self.nr
        if self.H_2r.shape[0] != nr or self.H_r1.shape[1] != nr or self.H_r2.shape[1] != nr:
            raise InvalidSpecError("channel matrices disagree on the relay dimension")
        if self.H_r1.shape[0] != self.n1 or self.H_r2.shape[0] != self.n2:
            raise InvalidSpecError("downlink shapes disagree with uplink node dimensions")
        for s in (self.sigma2_r, self.sigma2_1, self.sigma2_2):
            if not (s > 0):
                raise InvalidSpecError(f"noise powers must be strictly positive, got {s}")


@dataclass
class GainVector:
    """Descending positive eigen-gains of one downlink channel."""

    gains: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        self.gains = np.asarray(self.gains, dtype=float)

    def __len__(self) -> int:
        return self.gains.size

    @property
    def rank(self) -> int:
        return self.gains.size


@dataclass
class SVDCache:
    """SVD of one downlink channel H = U diag(s) V^H, V spanning the relay side."""

    U: np.ndarray
    s: np.ndarray
    V: np.ndarray

    def reconstruct(self) -> np.ndarray:
        k = self.s.size
        return (self.U[:, :k] * self.s) @ self.V[:, :k].conj().T


def _standard_normal(bits: np.random.Generator, size: int) -> np.ndarray:
    """Box-Muller normals driven by a counter-based bit generator."""
    pairs = (size + 1) // 2
    u1 = 1.0 - bits.random(pairs)  # in (0, 1]
    u2 = bits.random(pairs)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)])
    return z[:size]


def _complex_matrix(bits: np.random.Generator, rows: int, cols: int, var: float) -> np.ndarray:
    n = rows * cols
    re = _standard_normal(bits, n).reshape(rows, cols)
    im = _standard_normal(bits, n).reshape(rows, cols)
    return np.sqrt(var) * (re + 1j * im)


def generate_channels(
    n1: int,
    n2: int,
    nr: int,
    v1: float = 1.0,
    v2: float = 1.0,
    reciprocal: bool = False,
    seed: int = 0,
    trial: int = 0,
    sigma2_r: float = 1.0,
    sigma2_1: float = 1.0,
    sigma2_2: float = 1.0,
) -> ChannelSet:
    """Draw one channel realization.

    Real and imaginary parts of H_ir entries are i.i.d. Gaussian with zero
    mean and per-part variance ``v_i``; downlinks are unit-variance draws, or
    the exact transposes of the uplinks when ``reciprocal`` is set.  The same
    ``(seed, trial)`` pair always yields a bit-identical ChannelSet.
    """
    for name, d in (("n1", n1), ("n2", n2), ("nr", nr)):
        if int(d) != d or d < 1:
            raise InvalidSpecError(f"{name} must be a positive integer, got {d}")
    for name, v in (("v1", v1), ("v2", v2)):
        if not (v > 0):
            raise InvalidSpecError(f"{name} must be positive, got {v}")
    bits = np.random.Generator(np.random.Philox(key=mix64(seed, trial)))
    H_1r = _complex_matrix(bits, nr, n1, v1)
    H_2r = _complex_matrix(bits, nr, n2, v2)
    if reciprocal:
        H_r1, H_r2 = H_1r.T.copy(), H_2r.T.copy()
    else:
        H_r1 = _complex_matrix(bits, n1, nr, 1.0)
        H_r2 = _complex_matrix(bits, n2, nr, 1.0)
    ch = ChannelSet(H_1r, H_2r, H_r1, H_r2, sigma2_r, sigma2_1, sigma2_2)
    ch.validate()
    return ch


def bc_gains(ch: ChannelSet, i: int) -> tuple[GainVector, SVDCache]:
    """Eigen-gains alpha_i(k) = s_k^2 / sigma_i^2 of the downlink to node i.

    Singular values below ``RANK_TOL`` times the largest are dropped; an
    all-zero channel yields an empty GainVector rather than an error.
    """
    H = np.asarray(ch.downlink(i), dtype=complex)
    U, s, Vh = np.linalg.svd(H, full_matrices=True)
    smax = s[0] if s.size else 0.0
    r = int(np.sum(s > RANK_TOL * smax)) if smax > 0 else 0
    gains = GainVector((s[:r] ** 2) / ch.noise(i))
    return gains, SVDCache(U=U, s=s[:r], V=Vh.conj().T)


def relay_covariance(svd: SVDCache, gains: GainVector, inv_level: float) -> np.ndarray:
    """Relay covariance B = V diag((1/lambda - 1/alpha(k))+) V^H at a water-level."""
    if inv_level < 0:
        raise InvalidInputError(f"inv_level must be nonnegative, got {inv_level}")
    nr = svd.V.shape[0]
    p = np.zeros(nr)
    r = gains.rank
    if r:
        p[:r] = np.maximum(inv_level - 1.0 / gains.gains, 0.0)
    B = (svd.V * p) @ svd.V.conj().T
    return 0.5 * (B + B.conj().T)


def recover_precoder(C: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Eigendecomposition square root W of a PSD matrix, W W^H = C."""
    C = np.asarray(C, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(C)))
    if np.linalg.norm(C - C.conj().T) > tol * scale:
        raise InvalidInputError("matrix is not Hermitian within tolerance")
    w, V = np.linalg.eigh(0.5 * (C + C.conj().T))
    if w.size and w.min() < -tol * scale:
        raise InvalidInputError(f"matrix is indefinite: min eigenvalue {w.min():.3e}")
    return (V * np.sqrt(np.maximum(w, 0.0))) @ V.conj().T
