"""Joint source/relay power allocation for DF two-way relaying.

The decision procedure: an initial allocation (MA capacity for the sources,
full-power waterfilling for the relay) classifies the instance into Case I
(MA phase can outrun the BC phase) or Case II (it cannot), then into one of
six subcases.  Four subcases have closed-form or single-convex-program
solutions; the remaining two (I-2 and II-4) run a bisection on the target
rate, solving one convex program per iteration and finishing with a power
minimization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import cvx
from .channels import ChannelSet, bc_gains, relay_covariance
from .cvx import CovPair, Geometry, LogDetProgram, RateConstraint
from .errors import InvalidInputError
from .waterfill import (
    WaterLevels,
    concat_gains,
    level_for_rate,
    mac_rate,
    power_at_level,
    rate_at_level,
    uplink_rate,
    waterfill,
)

CASE_I = "I"
CASE_II = "II"

SUBCASES = ("I-1", "I-2", "II-1", "II-2", "II-3", "II-4")


@dataclass
class Limits:
    P1max: float
    P2max: float
    Prmax: float

    def source(self, i: int) -> float:
        return self.P1max if i == 1 else self.P2max

    def validate(self) -> None:
        for name, p in (("P1max", self.P1max), ("P2max", self.P2max), ("Prmax", self.Prmax)):
            if not (p >= 0):
                raise InvalidInputError(f"{name} must be nonnegative, got {p}")


@dataclass
class Subcase:
    label: str  # one of SUBCASES
    i: int | None = None  # strong-side index for I-2 / II-2 / II-3 / II-4
    j: int | None = None  # weak-side index


@dataclass
class RelayAlloc:
    inv_lambda1: float
    inv_lambda2: float
    B1: np.ndarray
    B2: np.ndarray

    @property
    def relay_power(self) -> float:
        return float(np.trace(self.B1).real + np.trace(self.B2).real)

    def inv_lambda(self, i: int) -> float:
        return self.inv_lambda1 if i == 1 else self.inv_lambda2


@dataclass
class Rates:
    R_ma: float
    Rhat_r1: float
    Rhat_r2: float
    Rbar_1r: float
    Rbar_2r: float
    R_tw: float


@dataclass
class TraceRow:
    iteration: int
    R_obj: float
    R_ma: float
    R_bc_sum: float
    R_tw: float
    P1: float
    P2: float
    Pr: float


@dataclass
class NetSolution:
    D: CovPair
    relay: RelayAlloc
    levels: WaterLevels
    rates: Rates
    powers: dict
    subcase: Subcase
    trace: list[TraceRow] = field(default_factory=list)
    status: str = cvx.OPTIMAL
    iterations: int = 0


@dataclass
class InitialAlloc:
    D0: CovPair
    inv_lambda0: float
    R_ma0: float
    Rhat_sum0: float
    levels0: WaterLevels
    Rhat_r1_0: float
    Rhat_r2_0: float
    Rbar_1r_0: float
    Rbar_2r_0: float


class Workspace:
    """Cached per-instance geometry: gains, SVDs, solver precomputation."""

    def __init__(self, ch: ChannelSet):
        self.ch = ch
        self.geometry = Geometry(ch)
        g1, svd1 = bc_gains(ch, 1)
        g2, svd2 = bc_gains(ch, 2)
        self.gains = {1: g1, 2: g2}
        self.svd = {1: svd1, 2: svd2}
        self.both = concat_gains(g1, g2)

    def bc_rate(self, i: int, inv_level: float) -> float:
        return rate_at_level(self.gains[i], inv_level)

    def bc_power(self, i: int, inv_level: float) -> float:
        return power_at_level(self.gains[i], inv_level)

    def levels_of(self, D: CovPair) -> WaterLevels:
        return WaterLevels(
            inv_mu1=level_for_rate(self.gains[2], uplink_rate(self.ch, D.D1, 1)),
            inv_mu2=level_for_rate(self.gains[1], uplink_rate(self.ch, D.D2, 2)),
            inv_mu_ma=level_for_rate(self.both, mac_rate(self.ch, D)),
        )

    def relay_split(self, i: int, inv_lambda_i: float, Prmax: float):
        """Cap side i at a level, waterfill the relay's remaining power on side j.

        The cap is trimmed when it alone would exceed the relay budget.
        """
        j = 3 - i
        full = waterfill(self.gains[i], Prmax).inv_level
        lev_i = min(inv_lambda_i, full)
        rem = max(Prmax - self.bc_power(i, lev_i), 0.0)
        lev_j = waterfill(self.gains[j], rem).inv_level
        return lev_i, lev_j


def _bc_rate_from_cov(ch: ChannelSet, B: np.ndarray, i: int) -> float:
    H = ch.downlink(i)
    M = np.eye(ch.n1 if i == 1 else ch.n2) + (H @ B @ H.conj().T) / ch.noise(i)
    sign, ld = np.linalg.slogdet(0.5 * (M + M.conj().T))
    return max(0.0, float(ld / np.log(2.0)))


def assemble_solution(
    ws: Workspace,
    D: CovPair,
    inv_lambda: dict,
    subcase: Subcase,
    trace: list[TraceRow],
    status: str = cvx.OPTIMAL,
    iterations: int = 0,
) -> NetSolution:
    """Build the full record; every rate is recomputed from the covariances."""
    ch = ws.ch
    B1 = relay_covariance(ws.svd[1], ws.gains[1], inv_lambda[1])
    B2 = relay_covariance(ws.svd[2], ws.gains[2], inv_lambda[2])
    relay = RelayAlloc(inv_lambda[1], inv_lambda[2], B1, B2)
    R_ma = mac_rate(ch, D)
    rhat1 = _bc_rate_from_cov(ch, B1, 1)
    rhat2 = _bc_rate_from_cov(ch, B2, 2)
    rbar1 = uplink_rate(ch, D.D1, 1)
    rbar2 = uplink_rate(ch, D.D2, 2)
    r_bd = min(rhat1, rbar2) + min(rhat2, rbar1)
    rates = Rates(
        R_ma=R_ma,
        Rhat_r1=rhat1,
        Rhat_r2=rhat2,
        Rbar_1r=rbar1,
        Rbar_2r=rbar2,
        R_tw=0.5 * min(R_ma, r_bd),
    )
    powers = {"P1": D.trace(1), "P2": D.trace(2), "Pr": relay.relay_power}
    return NetSolution(
        D=D,
        relay=relay,
        levels=ws.levels_of(D),
        rates=rates,
        powers=powers,
        subcase=subcase,
        trace=trace,
        status=status,
        iterations=iterations,
    )


def _trace_row(ws: Workspace, iteration, R_obj, D, lev: dict) -> TraceRow:
    R_ma = mac_rate(ws.ch, D)
    bc = ws.bc_rate(1, lev[1]) + ws.bc_rate(2, lev[2])
    rbar1 = uplink_rate(ws.ch, D.D1, 1)
    rbar2 = uplink_rate(ws.ch, D.D2, 2)
    r_bd = min(ws.bc_rate(1, lev[1]), rbar2) + min(ws.bc_rate(2, lev[2]), rbar1)
    return TraceRow(
        iteration=iteration,
        R_obj=R_obj,
        R_ma=R_ma,
        R_bc_sum=bc,
        R_tw=0.5 * min(R_ma, r_bd),
        P1=D.trace(1),
        P2=D.trace(2),
        Pr=ws.bc_power(1, lev[1]) + ws.bc_power(2, lev[2]),
    )


def initial_allocation(ch: ChannelSet, limits: Limits, ws: Workspace | None = None) -> InitialAlloc:
    """MA-capacity source covariances plus the relay's full-power water-level."""
    limits.validate()
    ws = ws or Workspace(ch)
    mac = cvx.mac_capacity(ch, limits.P1max, limits.P2max, geometry=ws.geometry)
    D0 = mac.D
    alloc = waterfill(ws.both, limits.Prmax)
    inv_l0 = alloc.inv_level
    return InitialAlloc(
        D0=D0,
        inv_lambda0=inv_l0,
        R_ma0=mac.objective_value,
        Rhat_sum0=rate_at_level(ws.both, inv_l0),
        levels0=ws.levels_of(D0),
        Rhat_r1_0=ws.bc_rate(1, inv_l0),
        Rhat_r2_0=ws.bc_rate(2, inv_l0),
        Rbar_1r_0=uplink_rate(ch, D0.D1, 1),
        Rbar_2r_0=uplink_rate(ch, D0.D2, 2),
    )


def classify(init: InitialAlloc, tol: float = 1e-9) -> str:
    """Case I when the MA phase can match the BC phase's best sum-rate."""
    return CASE_I if init.R_ma0 >= init.Rhat_sum0 - tol else CASE_II


def _uplink_kind(i: int) -> str:
    return f"UPLINK_{i}"


def _gate_case_I(ws: Workspace, limits: Limits, init: InitialAlloc):
    """Feasibility gate between Subcases I-1 and I-2.

    Tests, for both orderings, whether the weak side's uplink can reach the
    BC rate the relay would deliver at the common full-power level.  Returns
    ("I-1", witness) or ("I-2", j, shortfall info).
    """
    rhat0 = {1: init.Rhat_r1_0, 2: init.Rhat_r2_0}
    budgets = (limits.P1max, limits.P2max)
    shortfalls = {}
    witnesses = {}
    for i, j in ((1, 2), (2, 1)):
        cons = [
            RateConstraint(_uplink_kind(j), rhat0[i]),
            RateConstraint(_uplink_kind(i), rhat0[j]),
            RateConstraint("MAC_SUM", init.Rhat_sum0),
        ]
        res = cvx.feasible(
            ws.ch, cons, budgets, binding=_uplink_kind(j), geometry=ws.geometry
        )
        if res.feasible:
            return "I-1", res.witness, None
        if res.witness is not None:
            shortfalls[j] = res.shortfall
            witnesses[j] = res.witness
    if not shortfalls:
        # both orderings lack even the relaxed set; numerically pathological
        raise InvalidInputError("Case I gate failed for both orderings")
    j = min(shortfalls, key=shortfalls.get)
    return "I-2", witnesses.get(j), j


def solve_case_I(
    ch: ChannelSet,
    limits: Limits,
    init: InitialAlloc,
    eps: float = 1e-6,
    ws: Workspace | None = None,
) -> NetSolution:
    ws = ws or Workspace(ch)
    outcome, witness, j = _gate_case_I(ws, limits, init)
    if outcome == "I-1":
        prog = LogDetProgram(
            "MIN_TOTAL_TRACE",
            [
                RateConstraint("MAC_SUM", init.Rhat_sum0),
                RateConstraint("UPLINK_1", init.Rhat_r2_0),
                RateConstraint("UPLINK_2", init.Rhat_r1_0),
            ],
            budgets=(limits.P1max, limits.P2max),
        )
        sol = cvx.solve(ch, prog, tol=1e-9, warm=witness, geometry=ws.geometry)
        lev = {1: init.inv_lambda0, 2: init.inv_lambda0}
        trace = [_trace_row(ws, 0, init.Rhat_sum0, sol.D, lev)]
        return assemble_solution(
            ws, sol.D, lev, Subcase("I-1"), trace, status=sol.status, iterations=0
        )
    return subcase_I2_pipeline(
        ch, limits, init, j=j, R_max_start=init.Rhat_sum0, eps=eps, ws=ws, label="I-2"
    )


def _solve_minwl(
    ws: Workspace, limits: Limits, j: int, R_obj: float, warm, tol=1e-8, t0=1.0
):
    """Maximize the weak side's uplink rate subject to MA sum-rate >= R_obj."""
    prog = LogDetProgram(
        "MAX_UPLINK_%d" % j,
        [RateConstraint("MAC_SUM", R_obj)] if R_obj > 0 else [],
        budgets=(limits.P1max, limits.P2max),
    )
    return cvx.solve(ws.ch, prog, tol=tol, warm=warm, geometry=ws.geometry, t0=t0)


def _solve_Djl(ws: Workspace, limits: Limits, init: InitialAlloc, j: int, tol=1e-7):
    """The weak side's best uplink rate over pairs whose own relative level
    does not exceed the MA relative level.

    Root-finds on the target rate x: feasibility of {1/mu_j >= nu, 1/mu_ma >= nu}
    at the level nu tied to x reduces to one rate-constrained maximization, and
    the excess (achievable minus requested x) is decreasing in x.  A guarded
    regula-falsi needs only a handful of solves.
    """
    i = 3 - j
    g_i = ws.gains[i]
    ch = ws.ch
    limit_c = init.R_ma0 - max(1e-9, 1e-12 * init.R_ma0)

    def mac_needed(x: float) -> float:
        return rate_at_level(ws.both, level_for_rate(g_i, x))

    su = cvx.mac_capacity(
        ch,
        limits.P1max if j == 1 else 0.0,
        limits.P2max if j == 2 else 0.0,
        geometry=ws.geometry,
    )
    x_hi = min(su.objective_value, rate_at_level(g_i, init.levels0.inv_mu_ma))
    if mac_needed(x_hi) > limit_c:
        lo, hi = 0.0, x_hi
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if mac_needed(mid) > limit_c:
                hi = mid
            else:
                lo = mid
        x_hi = lo

    warm = init.D0

    def excess(x: float, t0: float):
        nonlocal warm
        c = mac_needed(x)
        use = warm if mac_rate(ch, warm) > c + 1e-9 else init.D0
        sol = _solve_minwl(ws, limits, j, c, use, t0=t0)
        if sol.status == cvx.OPTIMAL:
            warm = sol.D
        return sol.objective_value - x, sol

    h_hi, sol_hi = excess(x_hi, 1.0)
    if h_hi >= 0:
        x_l = sol_hi.objective_value
        return sol_hi.D, x_l, level_for_rate(g_i, x_l)
    h_lo, sol_lo = excess(0.0, 1.0)
    if h_lo <= 0:
        # weak side cannot clear the coupling level at any positive rate
        return init.D0, 0.0, level_for_rate(g_i, 0.0)
    a, fa, best = 0.0, h_lo, sol_lo
    b, fb = x_hi, h_hi
    last_side = 0
    for _ in range(40):
        x = (a * fb - b * fa) / (fb - fa)
        span = b - a
        x = min(max(x, a + 0.05 * span), b - 0.05 * span)
        fx, sol = excess(x, 300.0)
        if fx > 0:
            a, fa, best = x, fx, sol
            if last_side == +1:
                fb *= 0.5
            last_side = +1
        else:
            b, fb = x, fx
            if last_side == -1:
                fa *= 0.5
            last_side = -1
        if b - a <= tol * max(1.0, b) or abs(fx) <= 1e-9:
            if fx > 0:
                best = sol
            break
    x_l = best.objective_value
    return best.D, x_l, level_for_rate(g_i, x_l)


def subcase_I2_pipeline(
    ch: ChannelSet,
    limits: Limits,
    init: InitialAlloc,
    j: int,
    R_max_start: float,
    eps: float = 1e-6,
    ws: Workspace | None = None,
    label: str = "I-2",
) -> NetSolution:
    """Shared solver for Subcases I-2 and II-4 (one-shot gate, then bisection).

    The relay always ends at full power: side i is capped at the weak side's
    relative level and the remainder is waterfilled on side j.
    """
    ws = ws or Workspace(ch)
    i = 3 - j
    budgets = (limits.P1max, limits.P2max)
    subcase = Subcase(label, i=i, j=j)
    trace: list[TraceRow] = []

    # One-shot attempt at the highest legal cap.
    D_l, x_l, mu_l_inv = _solve_Djl(ws, limits, init, j)
    lev_i_bar, lev_j_bar = ws.relay_split(i, mu_l_inv, limits.Prmax)
    rhat_bar = {i: ws.bc_rate(i, lev_i_bar), j: ws.bc_rate(j, lev_j_bar)}
    bar_sum = rhat_bar[i] + rhat_bar[j]
    prog19 = LogDetProgram(
        "MAX_MAC_SUM",
        [RateConstraint(_uplink_kind(j), x_l)] if x_l > 0 else [],
        budgets=budgets,
    )
    sol19 = cvx.solve(ch, prog19, tol=1e-9, warm=D_l, geometry=ws.geometry)
    if bar_sum <= sol19.objective_value + 1e-12:
        prog20 = LogDetProgram(
            "MIN_TOTAL_TRACE",
            [
                RateConstraint("MAC_SUM", bar_sum),
                RateConstraint(_uplink_kind(i), rhat_bar[j]),
                RateConstraint(_uplink_kind(j), rhat_bar[i]),
            ],
            budgets=budgets,
        )
        sol20 = cvx.solve(ch, prog20, tol=1e-9, warm=sol19.D, geometry=ws.geometry)
        lev = {i: lev_i_bar, j: lev_j_bar}
        trace.append(_trace_row(ws, 0, bar_sum, sol20.D, lev))
        return assemble_solution(
            ws, sol20.D, lev, subcase, trace, status=sol20.status, iterations=0
        )

    # Bisection on the target rate R_obj.
    R_max = R_max_start
    R_min = 0.0
    R_obj = R_max
    bound = math.ceil(math.log2(max(R_max_start, eps) / eps)) + 2
    warm = init.D0
    D_cur = init.D0
    lev = {i: 0.0, j: 0.0}
    bc_sum = 0.0
    r_ma = init.R_ma0
    status = cvx.MAX_ITERS
    iterations = 0
    first = True
    endpoints = {}  # gap sign -> (R_obj, gap) at the tightest bracket ends

    def evaluate(R_target, use_warm, t0):
        if R_target >= init.R_ma0 - max(1e-9, 1e-9 * init.R_ma0):
            D_at = init.D0
            mu_at = init.levels0.inv_mu1 if j == 1 else init.levels0.inv_mu2
        else:
            sol = _solve_minwl(ws, limits, j, R_target, use_warm, t0=t0)
            D_at = sol.D
            mu_at = level_for_rate(ws.gains[i], sol.objective_value)
        li, lj = ws.relay_split(i, mu_at, limits.Prmax)
        bc = ws.bc_rate(i, li) + ws.bc_rate(j, lj)
        return D_at, mu_at, {i: li, j: lj}, bc, mac_rate(ch, D_at)

    for it in range(1, bound + 1):
        iterations = it
        use = warm if mac_rate(ch, warm) > R_obj + 1e-9 else init.D0
        D_cur, mu_j_inv, lev, bc_sum, r_ma = evaluate(R_obj, use, 1.0 if first else 300.0)
        warm = D_cur
        first = False
        trace.append(_trace_row(ws, it, R_obj, D_cur, lev))
        gap = bc_sum - r_ma
        endpoints[gap >= 0] = (R_obj, gap)
        if abs(gap) < eps:
            status = cvx.OPTIMAL
            break
        if -gap > eps:
            R_max = R_obj
        else:
            R_min = R_obj
        if R_max - R_min < eps:
            # the target is resolved to eps; the balance closes below
            status = cvx.OPTIMAL
            break
        R_obj = 0.5 * (R_max + R_min)

    # One secant refinement across the bracket takes out the slope the
    # halving cannot resolve, then a bounded nudge of the capped relay level
    # closes the balance to machine precision.
    if abs(bc_sum - r_ma) > 1e-11 and True in endpoints and False in endpoints:
        r_lo, g_lo = endpoints[True]
        r_hi, g_hi = endpoints[False]
        if g_lo > g_hi:
            R_sec = r_lo + g_lo * (r_hi - r_lo) / (g_lo - g_hi)
            R_sec = min(max(R_sec, min(r_lo, r_hi)), max(r_lo, r_hi))
            use = warm if mac_rate(ch, warm) > R_sec + 1e-9 else init.D0
            D_cur, mu_j_inv, lev, bc_sum, r_ma = evaluate(R_sec, use, 300.0)
            R_obj = R_sec
    lev, bc_sum = _balance_levels(ws, limits, i, j, lev[i], r_ma)

    # Final power minimization at the converged rates.  The sum-rate bound is
    # pinned to the achieved operating point so the output satisfies the rate
    # balance at the audit tolerance.
    bound23 = max(min(bc_sum, r_ma), 0.0)
    prog23 = LogDetProgram(
        "MIN_TOTAL_TRACE",
        [
            RateConstraint("MAC_SUM", bound23),
            RateConstraint(_uplink_kind(i), ws.bc_rate(j, lev[j])),
            RateConstraint(_uplink_kind(j), ws.bc_rate(i, lev[i])),
        ],
        budgets=budgets,
    )
    sol23 = cvx.solve(ch, prog23, tol=1e-9, warm=D_cur, geometry=ws.geometry)
    D_final = sol23.D if sol23.status == cvx.OPTIMAL else D_cur
    return assemble_solution(
        ws, D_final, lev, subcase, trace, status=status, iterations=iterations
    )


def _balance_levels(ws: Workspace, limits: Limits, i: int, j: int, nu: float, target: float):
    """Adjust the side-i cap so the BC sum meets ``target`` exactly.

    The cap may rise above the weak side's relative level only as far as a
    half-tolerance rate overshoot on that side, keeping both water-level and
    rate-balance audits comfortably inside their bounds.
    """

    def bc_at(v: float):
        li, lj = ws.relay_split(i, v, limits.Prmax)
        return li, lj, ws.bc_rate(i, li) + ws.bc_rate(j, lj)

    if ws.gains[i].rank:
        allowance = max(nu, level_for_rate(ws.gains[i], ws.bc_rate(i, nu) + 5e-7))
    else:
        allowance = nu
    li, lj, bc = bc_at(nu)
    if abs(bc - target) <= 1e-12:
        return {i: li, j: lj}, bc
    if bc < target:
        lo, hi = nu, allowance
        _, _, bc_hi = bc_at(hi)
        if bc_hi <= target:  # cannot close within the allowance; best effort
            li, lj, bc = bc_at(hi)
            return {i: li, j: lj}, bc
    else:
        lo, hi = 0.0, nu
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        _, _, bc_mid = bc_at(mid)
        if bc_mid < target:
            lo = mid
        else:
            hi = mid
    li, lj, bc = bc_at(0.5 * (lo + hi))
    return {i: li, j: lj}, bc


def classify_subcase_II(
    init: InitialAlloc, ws: Workspace, limits: Limits, tol: float = 1e-12
) -> Subcase:
    """Label a Case II instance from the initial relative water-levels."""
    a = init.levels0.inv_mu_ma
    b = {1: init.levels0.inv_mu1, 2: init.levels0.inv_mu2}
    c = init.inv_lambda0
    scale = max(a, b[1], b[2], 1e-30)
    if a <= min(b[1], b[2]) + tol * scale:
        return Subcase("II-1")
    j = 1 if b[1] <= b[2] else 2
    i = 3 - j
    if b[i] <= c + tol * scale:
        return Subcase("II-2", i=i, j=j)
    # II-3 existence test: two closed-form waterfill evaluations
    rho = init.R_ma0 - (init.Rbar_1r_0 if j == 1 else init.Rbar_2r_0)
    rho = max(rho, 0.0)
    lev_j = level_for_rate(ws.gains[j], rho)
    need = power_at_level(ws.gains[j], lev_j)
    remainder = limits.Prmax - power_at_level(ws.gains[i], b[j])
    if need <= remainder + 1e-12:
        return Subcase("II-3", i=i, j=j)
    return Subcase("II-4", i=i, j=j)


def solve_case_II(
    ch: ChannelSet,
    limits: Limits,
    init: InitialAlloc,
    eps: float = 1e-6,
    ws: Workspace | None = None,
) -> NetSolution:
    ws = ws or Workspace(ch)
    sub = classify_subcase_II(init, ws, limits)
    if sub.label == "II-1":
        a = init.levels0.inv_mu_ma
        lev = {1: a, 2: a}
        trace = [_trace_row(ws, 0, init.R_ma0, init.D0, lev)]
        return assemble_solution(ws, init.D0, lev, sub, trace)
    if sub.label in ("II-2", "II-3"):
        i, j = sub.i, sub.j
        b_j = init.levels0.inv_mu1 if j == 1 else init.levels0.inv_mu2
        rho = max(init.R_ma0 - (init.Rbar_1r_0 if j == 1 else init.Rbar_2r_0), 0.0)
        lev = {i: b_j, j: level_for_rate(ws.gains[j], rho)}
        trace = [_trace_row(ws, 0, init.R_ma0, init.D0, lev)]
        return assemble_solution(ws, init.D0, lev, sub, trace)
    return subcase_I2_pipeline(
        ch, limits, init, j=sub.j, R_max_start=init.R_ma0, eps=eps, ws=ws, label="II-4"
    )


def network_optimize(
    ch: ChannelSet,
    limits: Limits,
    eps: float = 1e-6,
    ws: Workspace | None = None,
) -> NetSolution:
    """Full pipeline: initial allocation, case split, subcase solve."""
    if not (eps > 0):
        raise InvalidInputError(f"eps must be positive, got {eps}")
    ws = ws or Workspace(ch)
    init = initial_allocation(ch, limits, ws)
    if classify(init) == CASE_I:
        return solve_case_I(ch, limits, init, eps=eps, ws=ws)
    return solve_case_II(ch, limits, init, eps=eps, ws=ws)
