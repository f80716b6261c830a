"""Scalar waterfilling primitives and relative water-levels.

All rates are in bits per channel use (base-2 logs).  A water-level is
always handled through its reciprocal ``1/lambda`` ("inv_level"), the
quantity that per-mode powers are measured against:

    p(k) = (1/lambda - 1/alpha(k))+
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import ChannelSet, GainVector, bc_gains
from .errors import InvalidInputError, UnachievableRateError

LN2 = np.log(2.0)


@dataclass
class LevelAlloc:
    """A waterfilling allocation: level, per-gain powers, achieved rate."""

    inv_level: float
    powers: np.ndarray
    rate: float
    unallocatable: bool = False


@dataclass
class WaterLevels:
    """Reciprocal relative water-levels (1/mu_1, 1/mu_2, 1/mu_ma)."""

    inv_mu1: float
    inv_mu2: float
    inv_mu_ma: float


def _as_gains(gains) -> np.ndarray:
    g = gains.gains if isinstance(gains, GainVector) else np.asarray(gains, dtype=float)
    if g.size and g.min() <= 0:
        raise InvalidInputError("gains must be strictly positive")
    return np.sort(g)[::-1]


def concat_gains(*gain_sets) -> np.ndarray:
    """Merge gain sets into one descending vector (the relay's combined view)."""
    parts = [_as_gains(g) for g in gain_sets]
    return np.sort(np.concatenate(parts))[::-1] if parts else np.empty(0)


def rate_at_level(gains, inv_level: float) -> float:
    """Sum-rate of waterfilling truncated at a given level: sum log2(1 + (x*a(k) - 1)+)."""
    if inv_level < 0:
        raise InvalidInputError(f"inv_level must be nonnegative, got {inv_level}")
    g = _as_gains(gains)
    active = g * inv_level > 1.0
    if not active.any():
        return 0.0
    return float(np.sum(np.log2(g[active] * inv_level)))


def power_at_level(gains, inv_level: float) -> float:
    """Total power poured up to a level: sum (x - 1/a(k))+."""
    if inv_level < 0:
        raise InvalidInputError(f"inv_level must be nonnegative, got {inv_level}")
    g = _as_gains(gains)
    if not g.size:
        return 0.0
    return float(np.sum(np.maximum(inv_level - 1.0 / g, 0.0)))


def waterfill(gains, P: float) -> LevelAlloc:
    """Rate-maximal allocation of budget P over the gains (exact active-set form).

    With empty gains and P > 0 there is nowhere to put power: the result is a
    zero-rate allocation flagged ``unallocatable``.  With P = 0 the level sits
    at 1/a(1), the largest level carrying zero power.
    """
    if P < 0:
        raise InvalidInputError(f"power budget must be nonnegative, got {P}")
    raw = gains.gains if isinstance(gains, GainVector) else np.asarray(gains, dtype=float)
    g = _as_gains(raw)
    if not g.size:
        return LevelAlloc(0.0, np.empty(0), 0.0, unallocatable=P > 0)
    inv_a = 1.0 / g  # ascending
    if P == 0:
        return LevelAlloc(float(inv_a[0]), np.zeros(raw.size), 0.0)
    csum = np.cumsum(inv_a)
    ks = np.arange(1, g.size + 1)
    levels = (P + csum) / ks
    valid = levels > inv_a  # level must clear the floor of its last active mode
    k = int(np.nonzero(valid)[0].max()) + 1
    x = float((P + csum[k - 1]) / k)
    powers = np.maximum(x - 1.0 / raw, 0.0)
    rate = float(np.sum(np.log2(g[:k] * x)))
    return LevelAlloc(x, powers, rate)


def level_for_rate(gains, R: float) -> float:
    """Inverse of rate_at_level: the level achieving rate R on the gains.

    For R = 0 returns 1/a(1), making this the right-continuous inverse.
    """
    if R < 0:
        raise InvalidInputError(f"rate must be nonnegative, got {R}")
    g = _as_gains(gains)
    if not g.size:
        if R > 0:
            raise UnachievableRateError("positive rate requested on an empty gain set")
        return 0.0
    if R == 0:
        return float(1.0 / g[0])
    log2g = np.log2(g)
    csum = np.cumsum(log2g)
    inv_a = 1.0 / g
    r = g.size
    for k in range(1, r + 1):
        x = 2.0 ** ((R - csum[k - 1]) / k)
        lo = inv_a[k - 1]
        hi = inv_a[k] if k < r else np.inf
        if lo * (1 - 1e-12) <= x <= hi * (1 + 1e-12):
            return float(x)
    # Closed form should always land in a window; bisect as a safety net.
    return _bisect_level(g, R)


def _bisect_level(g: np.ndarray, R: float) -> float:
    lo, hi = 1.0 / g[0], 2.0 / g[0]
    while rate_at_level(g, hi) < R:
        hi *= 2.0
        if hi > 1e300:
            raise UnachievableRateError("rate inversion diverged")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if rate_at_level(g, mid) < R:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            break
    return float(0.5 * (lo + hi))


def _unpack_pair(D):
    if hasattr(D, "D1"):
        return D.D1, D.D2
    D1, D2 = D
    return D1, D2


def _check_psd(D: np.ndarray, name: str = "D") -> np.ndarray:
    D = np.asarray(D, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(D)))
    if np.linalg.norm(D - D.conj().T) > 1e-10 * scale:
        raise InvalidInputError(f"{name} is not Hermitian within tolerance")
    w = np.linalg.eigvalsh(0.5 * (D + D.conj().T))
    if w.size and w.min() < -1e-9 * scale:
        raise InvalidInputError(f"{name} is not PSD: min eigenvalue {w.min():.3e}")
    return D


def _logdet2(M: np.ndarray) -> float:
    sign, ld = np.linalg.slogdet(0.5 * (M + M.conj().T))
    if sign.real <= 0:
        raise InvalidInputError("rate matrix is not positive definite")
    return float(ld / LN2)


def uplink_rate(ch: ChannelSet, D_i: np.ndarray, i: int) -> float:
    """Single-link uplink rate log2 det(I + H_ir D_i H_ir^H / sigma_r^2)."""
    H = ch.uplink(i)
    D = _check_psd(D_i, f"D{i}")
    M = np.eye(ch.nr) + (H @ D @ H.conj().T) / ch.sigma2_r
    return max(0.0, _logdet2(M))


def mac_rate(ch: ChannelSet, D) -> float:
    """Multiple-access sum-rate log2 det(I + (H_1r D1 H_1r^H + H_2r D2 H_2r^H) / sigma_r^2)."""
    D1, D2 = _unpack_pair(D)
    D1 = _check_psd(D1, "D1")
    D2 = _check_psd(D2, "D2")
    M = (
        np.eye(ch.nr)
        + (ch.H_1r @ D1 @ ch.H_1r.conj().T + ch.H_2r @ D2 @ ch.H_2r.conj().T) / ch.sigma2_r
    )
    return max(0.0, _logdet2(M))


def relative_levels(ch: ChannelSet, D) -> WaterLevels:
    """Relative water-levels of a source covariance pair.

    1/mu_1 reproduces node 1's uplink rate on node 2's downlink gains,
    1/mu_2 the mirror image, and 1/mu_ma reproduces the MA sum-rate on the
    union of both downlink gain sets.
    """
    D1, D2 = _unpack_pair(D)
    a1, _ = bc_gains(ch, 1)
    a2, _ = bc_gains(ch, 2)
    both = concat_gains(a1, a2)
    return WaterLevels(
        inv_mu1=level_for_rate(a2, uplink_rate(ch, D1, 1)),
        inv_mu2=level_for_rate(a1, uplink_rate(ch, D2, 2)),
        inv_mu_ma=level_for_rate(both, mac_rate(ch, (D1, D2))),
    )
