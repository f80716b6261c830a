"""Independent checkers: necessary-condition audits and a scalar grid oracle.

Everything here recomputes rates and levels from the raw channel matrices
and the covariances stored in a solution; nothing trusts solver-side caches.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import ChannelSet, bc_gains, relay_covariance
from .cvx import CovPair
from .errors import InvalidInputError
from .netopt import InitialAlloc, Limits, NetSolution, Workspace, initial_allocation
from .waterfill import concat_gains, level_for_rate, power_at_level, rate_at_level

LEVEL_TOL = 1e-6


@dataclass
class Check:
    name: str
    passed: bool
    residual: float

    def __bool__(self) -> bool:
        return self.passed


@dataclass
class AuditReport:
    checks: dict = field(default_factory=dict)

    def add(self, name: str, passed: bool, residual: float) -> None:
        self.checks[name] = Check(name, bool(passed), float(residual))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def failures(self) -> list[str]:
        return [n for n, c in self.checks.items() if not c.passed]

    def __getitem__(self, name: str) -> Check:
        return self.checks[name]


def _recomputed_rates(ch: ChannelSet, sol: NetSolution) -> dict:
    """All six rates from the stored covariances and raw matrices only."""

    def logdet2(M):
        sign, ld = np.linalg.slogdet(0.5 * (M + M.conj().T))
        return max(0.0, float(ld / np.log(2.0)))

    out = {}
    D1, D2 = sol.D.D1, sol.D.D2
    G1, G2 = ch.H_1r, ch.H_2r
    I = np.eye(ch.nr)
    out["R_ma"] = logdet2(
        I + (G1 @ D1 @ G1.conj().T + G2 @ D2 @ G2.conj().T) / ch.sigma2_r
    )
    out["Rbar_1r"] = logdet2(I + (G1 @ D1 @ G1.conj().T) / ch.sigma2_r)
    out["Rbar_2r"] = logdet2(I + (G2 @ D2 @ G2.conj().T) / ch.sigma2_r)
    for i, B in ((1, sol.relay.B1), (2, sol.relay.B2)):
        H = ch.downlink(i)
        n = H.shape[0]
        out[f"Rhat_r{i}"] = logdet2(np.eye(n) + (H @ B @ H.conj().T) / ch.noise(i))
    out["R_bd"] = min(out["Rhat_r1"], out["Rbar_2r"]) + min(out["Rhat_r2"], out["Rbar_1r"])
    out["R_tw"] = 0.5 * min(out["R_ma"], out["R_bd"])
    return out


def check_necessary(
    ch: ChannelSet,
    sol: NetSolution,
    tol: float = 1e-6,
    limits: Limits | None = None,
    init: InitialAlloc | None = None,
) -> AuditReport:
    """Audit a solution against the water-level necessary conditions and the
    per-subcase theorem predicates.

    ``limits`` enables the budget and full-relay-power checks; ``init`` (or
    ``limits``, from which it is recomputed) enables the predicates that
    reference the initial allocation.
    """
    report = AuditReport()
    g1, svd1 = bc_gains(ch, 1)
    g2, svd2 = bc_gains(ch, 2)
    both = concat_gains(g1, g2)
    rates = _recomputed_rates(ch, sol)

    inv_mu1 = level_for_rate(g2, rates["Rbar_1r"])
    inv_mu2 = level_for_rate(g1, rates["Rbar_2r"])
    inv_mu_ma = level_for_rate(both, rates["R_ma"])
    inv_mu = {1: inv_mu1, 2: inv_mu2}
    inv_l = {1: sol.relay.inv_lambda1, 2: sol.relay.inv_lambda2}

    # stored relay covariances must realize the stored levels
    for i, (g, svd, B) in ((1, (g1, svd1, sol.relay.B1)), (2, (g2, svd2, sol.relay.B2))):
        ref = relay_covariance(svd, g, inv_l[i])
        err = float(np.linalg.norm(ref - B)) / max(1.0, float(np.linalg.norm(ref)))
        report.add(f"relay_cov_{i}", err <= 1e-8, err)

    # (13a): the BC level toward i may not exceed the other side's relative level
    slack1 = inv_mu2 - inv_l[1]
    slack2 = inv_mu1 - inv_l[2]
    report.add("cond_13a_pair1", slack1 >= -LEVEL_TOL, slack1)
    report.add("cond_13a_pair2", slack2 >= -LEVEL_TOL, slack2)

    # (13b): rate balance between the phases
    resid_13b = abs(rates["R_ma"] - rates["R_bd"])
    report.add("cond_13b", resid_13b <= tol, resid_13b)

    # Lemma 2: the lower BC level must sit exactly at the other side's mu
    if abs(inv_l[1] - inv_l[2]) > LEVEL_TOL:
        low = 1 if inv_l[1] < inv_l[2] else 2
        other = 3 - low
        resid = abs(inv_l[low] - inv_mu[other])
        report.add("lemma2", resid <= max(tol, LEVEL_TOL), resid)

    label = sol.subcase.label
    if limits is not None:
        limits.validate()
        for name, tr, cap in (
            ("budget_P1", sol.D.trace(1), limits.P1max),
            ("budget_P2", sol.D.trace(2), limits.P2max),
            ("budget_Pr", sol.relay.relay_power, limits.Prmax),
        ):
            report.add(name, tr <= cap + 1e-9, tr - cap)
        if init is None:
            init = initial_allocation(ch, limits, Workspace(ch))

    if init is not None:
        if label == "I-1":
            # Theorem 1: the optimal pair's MA relative level equals the
            # relay's initial full-power level.
            if inv_mu_ma > 0 and init.inv_lambda0 > 0:
                resid = abs(1.0 / inv_mu_ma - 1.0 / init.inv_lambda0)
            else:
                resid = abs(inv_mu_ma - init.inv_lambda0)
            report.add("theorem1", resid <= 1e-5, resid)
        if label in ("I-2", "II-4") and limits is not None:
            j = sol.subcase.j
            i = sol.subcase.i
            resid_pr = abs(sol.relay.relay_power - limits.Prmax)
            report.add("full_relay_power", resid_pr <= 1e-6, resid_pr)
            margin = inv_mu[i] - inv_mu[j]  # property 4: weak side stays weak
            report.add("mu_ordering", margin > -1e-9, margin)
            upper = init.inv_lambda0 if label == "I-2" else init.levels0.inv_mu_ma
            r_hi = upper - inv_mu_ma
            r_lo = inv_mu_ma - min(inv_mu1, inv_mu2)
            report.add("mu_ma_below_initial", r_hi > -1e-9, r_hi)
            report.add("mu_ma_above_min_mu", r_lo > -1e-9, r_lo)
    return report


@dataclass
class OracleResult:
    p1: float
    p2: float
    q1: float
    q2: float
    R_tw: float
    total_power: float
    steps: int
    grid_modulus: float


def _scalar_gains(ch: ChannelSet) -> tuple[float, float, float, float]:
    if ch.n1 != 1 or ch.n2 != 1 or ch.nr != 1:
        raise InvalidInputError("oracle requires a scalar (1,1,1) channel set")
    g1 = abs(ch.H_1r[0, 0]) ** 2 / ch.sigma2_r
    g2 = abs(ch.H_2r[0, 0]) ** 2 / ch.sigma2_r
    a1 = abs(ch.H_r1[0, 0]) ** 2 / ch.sigma2_1
    a2 = abs(ch.H_r2[0, 0]) ** 2 / ch.sigma2_2
    return g1, g2, a1, a2


def scalar_oracle(ch: ChannelSet, limits: Limits, steps: int = 200) -> OracleResult:
    """Exhaustive grid search over scalar allocations (p1, p2, q1, q2).

    Maximizes the two-way rate, then minimizes total power among grid points
    whose rate ties the maximum within one grid modulus.  For fixed source
    powers the relay side is scanned over q1 with q2 taking the exact budget
    remainder or cap point, which dominates any interior grid choice.
    """
    if steps < 100:
        raise InvalidInputError(f"oracle needs steps >= 100, got {steps}")
    g1, g2, a1, a2 = _scalar_gains(ch)
    limits.validate()
    P1, P2, Pr = limits.P1max, limits.P2max, limits.Prmax

    def axis(P: float) -> np.ndarray:
        return np.linspace(0.0, P, steps) if P > 0 else np.zeros(1)

    p1s, p2s, q1s = axis(P1), axis(P2), axis(Pr)
    PP1, PP2 = np.meshgrid(p1s, p2s, indexing="ij")
    C = np.log2(1.0 + g1 * PP1 + g2 * PP2)
    order = np.argsort(C.ravel())[::-1]

    # constant BC upper bound: full relay power, no caps
    bc_full = _bc_best(a1, a2, Pr, np.inf, np.inf)

    def bc_rates(p1: float, p2: float, q1: np.ndarray):
        K1 = np.log2(1.0 + g2 * p2)  # cap for the relay-to-1 link
        K2 = np.log2(1.0 + g1 * p1)
        r1 = np.minimum(np.log2(1.0 + a1 * q1), K1)
        cap2 = (2.0**K2 - 1.0) / a2 if a2 > 0 else 0.0
        q2 = np.minimum(Pr - q1, cap2)
        q2 = np.maximum(q2, 0.0)
        r2 = np.minimum(np.log2(1.0 + a2 * q2), K2)
        return r1 + r2, q2

    best_rtw = 0.0
    best = (0.0, 0.0, 0.0, 0.0)
    flatC = C.ravel()
    n2 = p2s.size
    for idx in order:
        c = flatC[idx]
        if 0.5 * min(c, bc_full) <= best_rtw - 1e-15:
            break
        p1 = p1s[idx // n2]
        p2 = p2s[idx % n2]
        bc, q2v = bc_rates(p1, p2, q1s)
        rtw = 0.5 * np.minimum(c, bc)
        k = int(np.argmax(rtw))
        if rtw[k] > best_rtw:
            best_rtw = float(rtw[k])
            best = (float(p1), float(p2), float(q1s[k]), float(q2v[k]))

    # local Lipschitz bound over one grid cell at the incumbent optimum
    p1o, p2o, q1o, q2o = best
    S = 1.0 + g1 * p1o + g2 * p2o
    slopes = [
        g1 / S,
        g2 / S,
        a1 / (1.0 + a1 * q1o),
        a2 / (1.0 + a2 * q2o),
    ]
    step_sizes = [
        P1 / (steps - 1) if P1 > 0 else 0.0,
        P2 / (steps - 1) if P2 > 0 else 0.0,
        Pr / (steps - 1) if Pr > 0 else 0.0,
        Pr / (steps - 1) if Pr > 0 else 0.0,
    ]
    modulus = 0.5 / np.log(2.0) * max(
        s * h for s, h in zip(slopes, step_sizes)
    ) if max(step_sizes) > 0 else 0.0

    # second pass: minimum total power among grid maximizers
    target = best_rtw - 1e-12
    target2 = 2.0 * max(target, 0.0)
    best_power = np.inf
    best_alloc = best
    for idx in order:
        c = flatC[idx]
        if 0.5 * min(c, bc_full) < target - 1e-15:
            break
        if c < target2 - 1e-15:
            continue
        p1 = p1s[idx // n2]
        p2 = p2s[idx % n2]
        K1 = np.log2(1.0 + g2 * p2)
        K2 = np.log2(1.0 + g1 * p1)
        if K1 + K2 < target2 - 1e-15:
            continue
        r1 = np.minimum(np.log2(1.0 + a1 * q1s), K1)
        need2 = target2 - r1
        ok = need2 <= K2 + 1e-15
        with np.errstate(over="ignore"):
            q2n = np.where(need2 > 0, (np.exp2(np.minimum(need2, 1000.0)) - 1.0) / a2 if a2 > 0 else np.inf, 0.0)
        ok &= q2n <= Pr - q1s + 1e-15
        if not ok.any():
            continue
        power = np.where(ok, p1 + p2 + q1s + q2n, np.inf)
        k = int(np.argmin(power))
        if power[k] < best_power:
            best_power = float(power[k])
            best_alloc = (float(p1), float(p2), float(q1s[k]), float(q2n[k]))

    p1o, p2o, q1o, q2o = best_alloc
    return OracleResult(
        p1=p1o,
        p2=p2o,
        q1=q1o,
        q2=q2o,
        R_tw=best_rtw,
        total_power=best_power if np.isfinite(best_power) else sum(best),
        steps=steps,
        grid_modulus=float(modulus),
    )


def _bc_best(a1: float, a2: float, Pr: float, K1: float, K2: float) -> float:
    """Best capped BC sum over q1 + q2 <= Pr (fine closed scan, bound only)."""
    if Pr <= 0:
        return 0.0
    q1 = np.linspace(0.0, Pr, 2049)
    r1 = np.log2(1.0 + a1 * q1) if a1 > 0 else np.zeros_like(q1)
    r2 = np.log2(1.0 + a2 * (Pr - q1)) if a2 > 0 else np.zeros_like(q1)
    return float(np.max(np.minimum(r1, K1) + np.minimum(r2, K2)))


@dataclass
class OracleComparison:
    passed: bool
    rate_delta: float
    power_delta: float
    tied: bool


def compare_to_oracle(
    sol: NetSolution,
    oracle: OracleResult,
    rate_tol: float = 1e-2,
    power_tol: float = 0.02,
) -> OracleComparison:
    """Solver-vs-oracle deltas; power is compared only when rates tie."""
    d_rate = sol.rates.R_tw - oracle.R_tw
    total = sol.powers["P1"] + sol.powers["P2"] + sol.powers["Pr"]
    d_power = total - oracle.total_power
    tied = abs(d_rate) <= max(oracle.grid_modulus, 1e-9)
    ok = abs(d_rate) <= rate_tol and (
        not tied or abs(d_power) <= power_tol * max(1.0, oracle.total_power)
    )
    return OracleComparison(passed=bool(ok), rate_delta=float(d_rate), power_delta=float(d_power), tied=tied)
