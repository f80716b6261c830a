"""Convex programs over the source covariance pair (D1, D2).

One program family covers everything the network optimizer needs: minimize
total transmit power or maximize a rate, subject to lower bounds on the MA
sum-rate and/or the per-node uplink rates, plus per-node trace budgets and
positive semidefiniteness.

The solver is a primal log-barrier Newton method over a real orthonormal
basis of the Hermitian blocks.  Every term in the barrier objective is a
log-det (rates, PSD cones) or a scalar log (traces, rate slacks), so
gradients and Hessians are exact and cheap at these sizes.  A max-slack
phase-1 run certifies infeasibility and supplies strictly interior starting
points.  Rates are handled in nats internally and converted to bits at the
interface.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .channels import ChannelSet
from .errors import InvalidProgramError
from .waterfill import LN2, waterfill

OBJECTIVES = ("MIN_TOTAL_TRACE", "MAX_MAC_SUM", "MAX_UPLINK_1", "MAX_UPLINK_2")
KINDS = ("MAC_SUM", "UPLINK_1", "UPLINK_2")

OPTIMAL = "OPTIMAL"
INFEASIBLE = "INFEASIBLE"
MAX_ITERS = "MAX_ITERS"

_FEAS_TOL = 1e-6  # phase-1 slack below -_FEAS_TOL certifies infeasibility
_EQ_BAND = 1e-7  # half-width of the band replacing an equality constraint


@dataclass
class CovPair:
    """Source covariance pair, Hermitian PSD with trace budgets."""

    D1: np.ndarray
    D2: np.ndarray

    def trace(self, i: int) -> float:
        D = self.D1 if i == 1 else self.D2
        return float(np.trace(D).real)

    @property
    def total_power(self) -> float:
        return self.trace(1) + self.trace(2)

    def scaled(self, t1: float, t2: float) -> "CovPair":
        return CovPair(t1 * self.D1, t2 * self.D2)


@dataclass
class RateConstraint:
    kind: str  # MAC_SUM | UPLINK_1 | UPLINK_2
    bound: float  # bits
    sense: str = ">="  # ">=" or "=="


@dataclass
class LogDetProgram:
    objective: str
    constraints: list[RateConstraint] = field(default_factory=list)
    budgets: tuple[float, float] = (1.0, 1.0)

    def validate(self) -> None:
        if self.objective not in OBJECTIVES:
            raise InvalidProgramError(f"unknown objective {self.objective!r}")
        seen = set()
        for c in self.constraints:
            if c.kind not in KINDS:
                raise InvalidProgramError(f"unknown constraint kind {c.kind!r}")
            if c.sense not in (">=", "=="):
                raise InvalidProgramError(f"unknown sense {c.sense!r}")
            if not np.isfinite(c.bound) or c.bound < 0:
                raise InvalidProgramError(f"constraint bound must be finite and >= 0, got {c.bound}")
            if c.kind in seen:
                raise InvalidProgramError(f"duplicate constraint kind {c.kind}")
            seen.add(c.kind)
            if c.sense == "==" and self.objective == f"MAX_{c.kind}":
                raise InvalidProgramError("objective kind pinned by an equality constraint")
        for p in self.budgets:
            if not (p >= 0):
                raise InvalidProgramError(f"budgets must be nonnegative, got {self.budgets}")


@dataclass
class CvxSolution:
    D: CovPair
    status: str
    objective_value: float
    kkt_residual: float
    constraint_slacks: dict
    multipliers: dict = field(default_factory=dict)
    iterations: int = 0
    certificate: float | None = None  # phase-1 max slack when INFEASIBLE


def hermitian_basis(n: int) -> np.ndarray:
    """Orthonormal real basis of n x n Hermitian matrices under Re tr(A^H B)."""
    out = np.zeros((n * n, n, n), dtype=complex)
    idx = 0
    for k in range(n):
        out[idx, k, k] = 1.0
        idx += 1
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for k in range(n):
        for l in range(k + 1, n):
            out[idx, k, l] = inv_sqrt2
            out[idx, l, k] = inv_sqrt2
            idx += 1
            out[idx, k, l] = 1j * inv_sqrt2
            out[idx, l, k] = -1j * inv_sqrt2
            idx += 1
    return out


class Geometry:
    """Per-channel precomputation shared by every solve on the same instance."""

    def __init__(self, ch: ChannelSet):
        self.ch = ch
        self.nr = ch.nr
        s = np.sqrt(ch.sigma2_r)
        self.G = (ch.H_1r / s, ch.H_2r / s)
        self.dims = (ch.n1, ch.n2)
        self.basis = tuple(hermitian_basis(n) for n in self.dims)
        # lifted[l][p] = G_l E_p G_l^H, the image of each basis element at the relay
        self.lifted = tuple(
            np.einsum("ij,pjk,lk->pil", self.G[l], self.basis[l], self.G[l].conj())
            for l in range(2)
        )
        self.tracevec = tuple(
            np.array([np.trace(E).real for E in self.basis[l]]) for l in range(2)
        )
        self._svd = tuple(np.linalg.svd(self.G[l], full_matrices=False) for l in range(2))
        self._mac_cache: dict = {}

    def su_waterfill(self, l: int, P: float):
        """Single-user optimum of block l: (covariance, achieved rate in bits)."""
        U, s, Vh = self._svd[l]
        keep = s > 1e-14 * (s[0] if s.size else 1.0)
        alloc = waterfill(s[keep] ** 2, P)
        p = np.zeros(s.size)
        p[keep] = alloc.powers
        V = Vh.conj().T
        return (V * p) @ V.conj().T, alloc.rate

    def su_max_rate(self, l: int, P: float) -> float:
        U, s, Vh = self._svd[l]
        keep = s > 1e-14 * (s[0] if s.size else 1.0)
        return waterfill(s[keep] ** 2, P).rate

    def mac_solution(self, budgets: tuple[float, float]):
        """Cached MA capacity point for these budgets: (CovPair, rate bits)."""
        key = (float(budgets[0]), float(budgets[1]))
        if key not in self._mac_cache:
            sol = mac_capacity(self.ch, key[0], key[1], geometry=self)
            self._mac_cache[key] = (sol.D, sol.objective_value)
        return self._mac_cache[key]


def _mat_from_vec(geom: Geometry, blocks, x: np.ndarray) -> list[np.ndarray]:
    Ds, off = [], 0
    for l in blocks:
        m = geom.dims[l] ** 2
        Ds.append(np.einsum("p,pij->ij", x[off : off + m], geom.basis[l]))
        off += m
    return Ds


def _vec_from_mat(geom: Geometry, blocks, Ds) -> np.ndarray:
    parts = []
    for l, D in zip(blocks, Ds):
        parts.append(np.einsum("pij,ji->p", geom.basis[l], D).real)
    return np.concatenate(parts) if parts else np.empty(0)


class _Objective:
    """Internal minimize-form program over the active blocks.

    ``fixed`` pins a block to a constant covariance: it leaves the variable
    set and contributes a constant offset to every rate matrix in whose scope
    it appears.
    """

    def __init__(self, geom: Geometry, prog: LogDetProgram, fixed: dict | None = None):
        self.geom = geom
        self.prog = prog
        self.fixed = dict(fixed or {})
        self.blocks = [
            l for l in range(2) if prog.budgets[l] > 0 and l not in self.fixed
        ]
        self.n = sum(geom.dims[l] ** 2 for l in self.blocks)
        self.offsets = {}
        off = 0
        for l in self.blocks:
            self.offsets[l] = off
            off += geom.dims[l] ** 2
        # (kind, lower_bound_nats) rows; equalities become a two-sided band
        self.rows: list[tuple[str, float, float]] = []  # (kind, sign, bound_nats)
        for c in prog.constraints:
            if c.bound <= 1e-15 and c.sense == ">=":
                continue  # vacuous: rates are nonnegative
            b = c.bound * LN2
            self.rows.append((c.kind, +1.0, b - (_EQ_BAND if c.sense == "==" else 0.0)))
            if c.sense == "==":
                self.rows.append((c.kind, -1.0, b + _EQ_BAND))
        self.base = {}
        for kind in KINDS:
            M = np.eye(geom.nr, dtype=complex)
            for l, Dl in self.fixed.items():
                if self._in_scope(kind, l):
                    G = geom.G[l]
                    M = M + G @ Dl @ G.conj().T
            self.base[kind] = 0.5 * (M + M.conj().T)

    @staticmethod
    def _in_scope(kind: str, l: int) -> bool:
        return kind == "MAC_SUM" or kind == f"UPLINK_{l + 1}"

    def scope(self, kind: str):
        return [l for l in self.blocks if self._in_scope(kind, l)]

    def rate_nats(self, kind: str, Ds: dict) -> float:
        M = self._rate_matrix(kind, Ds)
        L = np.linalg.cholesky(M)
        return 2.0 * float(np.sum(np.log(np.diag(L).real)))

    def _rate_matrix(self, kind: str, Ds: dict) -> np.ndarray:
        geom = self.geom
        M = self.base[kind].copy()
        for l in self.scope(kind):
            G = geom.G[l]
            M = M + G @ Ds[l] @ G.conj().T
        return 0.5 * (M + M.conj().T)

    def objective_nats(self, Ds: dict) -> float:
        if self.prog.objective == "MIN_TOTAL_TRACE":
            return sum(float(np.trace(D).real) for D in Ds.values())
        kind = self.prog.objective[4:]
        return -self.rate_nats(kind, Ds)


def _logdet_inv(M: np.ndarray):
    """(ln det M, M^-1) through one Cholesky factorization."""
    L = np.linalg.cholesky(M)
    val = 2.0 * float(np.sum(np.log(np.abs(np.diagonal(L)))))
    Linv = solve_triangular(L, np.eye(L.shape[0], dtype=complex), lower=True)
    return val, Linv.conj().T @ Linv


def _trace_gram(B: np.ndarray) -> np.ndarray:
    """gram[p, q] = Re tr(B_p B_q) for a stack of matrices."""
    m = B.shape[0]
    Bf = B.reshape(m, -1)
    Bt = B.transpose(0, 2, 1).reshape(m, -1)
    return (Bf @ Bt.T).real


def _rate_grad_hess(obj: _Objective, kind: str, M: np.ndarray):
    """Value, gradient and Hessian of the rate term ln det M over the basis."""
    geom = obj.geom
    val, Minv = _logdet_inv(M)
    grad = np.zeros(obj.n)
    stacks = []
    minv_flat = Minv.reshape(-1)
    for l in obj.scope(kind):
        lifted = geom.lifted[l]
        # Re tr(M^-1 L_p) with L_p Hermitian
        g = (lifted.reshape(lifted.shape[0], -1).conj() @ minv_flat).real
        o = obj.offsets[l]
        grad[o : o + g.size] = g
        stacks.append((l, Minv @ lifted))
    hess = np.zeros((obj.n, obj.n))
    if stacks:
        gram = _trace_gram(np.concatenate([c for _, c in stacks]))
        spans, pos = [], 0
        for l, c in stacks:
            spans.append((obj.offsets[l], c.shape[0], pos))
            pos += c.shape[0]
        for o1, m1, p1 in spans:
            for o2, m2, p2 in spans:
                hess[o1 : o1 + m1, o2 : o2 + m2] = -gram[p1 : p1 + m1, p2 : p2 + m2]
    return val, grad, hess


def _psd_grad_hess(obj: _Objective, l: int, D: np.ndarray):
    """Value, gradient, Hessian of -ln det D_l (the PSD cone barrier)."""
    geom = obj.geom
    val, Dinv = _logdet_inv(D)
    basis = geom.basis[l]
    grad = -(basis.reshape(basis.shape[0], -1).conj() @ Dinv.reshape(-1)).real
    hess = _trace_gram(Dinv @ basis)
    return -val, grad, hess


class _BarrierState:
    """Evaluates the barrier objective phi_t and its derivatives at x.

    Every matrix is an affine image of x through the precomputed lifted
    basis, so a point (and a whole line-search ray) costs a handful of BLAS
    calls: M_kind(x) = I + sum_p x_p L_p over the kind's scope.
    """

    def __init__(self, obj: _Objective, slack_var: bool):
        self.obj = obj
        self.slack_var = slack_var  # phase-1 appends a scalar slack variable
        self.dim = obj.n + (1 if slack_var else 0)
        # barrier parameter: rate rows + trace cuts + PSD cones
        self.m = len(obj.rows) + len(obj.blocks) + sum(
            obj.geom.dims[l] for l in obj.blocks
        )
        geom = obj.geom
        self.kinds = sorted({kind for kind, _, _ in obj.rows})
        if not slack_var and obj.prog.objective != "MIN_TOTAL_TRACE":
            kobj = obj.prog.objective[4:]
            if kobj not in self.kinds:
                self.kinds.append(kobj)
        # flattened lifted operator per rate kind: (n, nr*nr)
        self.ops = {}
        nr = geom.nr
        for kind in self.kinds:
            op = np.zeros((obj.n, nr * nr), dtype=complex)
            for l in obj.scope(kind):
                o = obj.offsets[l]
                m = geom.dims[l] ** 2
                op[o : o + m] = geom.lifted[l].reshape(m, -1)
            self.ops[kind] = op
        # flattened Hermitian basis per block: (n_l^2, n_l*n_l)
        self.bops = {l: geom.basis[l].reshape(geom.dims[l] ** 2, -1) for l in obj.blocks}
        self.tvec = np.zeros(obj.n)
        for l in obj.blocks:
            o = obj.offsets[l]
            tv = geom.tracevec[l]
            self.tvec[o : o + tv.size] = tv
        self.eye = {kind: obj.base[kind].reshape(-1).copy() for kind in self.kinds}

    def split(self, x: np.ndarray):
        if self.slack_var:
            return x[:-1], float(x[-1])
        return x, 0.0

    def mats(self, x: np.ndarray):
        """All rate matrices and block covariances at x (flattened forms)."""
        xv, s = self.split(x)
        geom = self.obj.geom
        nr = geom.nr
        M = {k: (self.eye[k] + xv @ self.ops[k]).reshape(nr, nr) for k in self.kinds}
        D = {}
        for l in self.obj.blocks:
            o = self.obj.offsets[l]
            nl = geom.dims[l]
            D[l] = (xv[o : o + nl * nl] @ self.bops[l]).reshape(nl, nl)
        return M, D, s

    def dmap(self, x: np.ndarray) -> dict:
        _, D, _ = self.mats(x)
        return D

    def in_domain(self, x: np.ndarray) -> bool:
        return np.isfinite(self.value(x, 1.0))

    @staticmethod
    def _chol_logdet(M: np.ndarray) -> float:
        L = np.linalg.cholesky(M)
        return 2.0 * float(np.sum(np.log(np.abs(np.diagonal(L)))))

    def _phi(self, t: float, M: dict, D: dict, s: float, xv: np.ndarray) -> float:
        obj = self.obj
        try:
            rates = {k: self._chol_logdet(M[k]) for k in self.kinds}
            if self.slack_var:
                total = -t * s
            elif obj.prog.objective == "MIN_TOTAL_TRACE":
                total = t * float(xv @ self.tvec)
            else:
                total = -t * rates[obj.prog.objective[4:]]
            for l, Dl in D.items():
                total -= self._chol_logdet(Dl)
                sl = obj.prog.budgets[l] - float(np.trace(Dl).real)
                if sl <= 0:
                    return np.inf
                total -= np.log(sl)
            for kind, sign, b in obj.rows:
                sl = sign * rates[kind] - sign * b - s
                if sl <= 0:
                    return np.inf
                total -= np.log(sl)
        except np.linalg.LinAlgError:
            return np.inf
        return float(total)

    def value(self, x: np.ndarray, t: float) -> float:
        """Barrier objective phi_t(x); +inf outside the domain."""
        M, D, s = self.mats(x)
        xv, _ = self.split(x)
        return self._phi(t, M, D, s, xv)

    def ray_value(self, x: np.ndarray, d: np.ndarray, t: float):
        """Returns phi(alpha) = value(x + alpha d, t) with cached affine deltas."""
        M0, D0, s0 = self.mats(x)
        Md, Dd, sd = self.mats(d)
        geom = self.obj.geom
        nr = geom.nr
        dM = {k: Md[k] - self.eye[k].reshape(nr, nr) for k in self.kinds}
        xv, _ = self.split(x)
        dv, _ = self.split(d)

        def phi(alpha: float) -> float:
            M = {k: M0[k] + alpha * dM[k] for k in self.kinds}
            D = {l: D0[l] + alpha * Dd[l] for l in D0}
            return self._phi(t, M, D, s0 + alpha * sd, xv + alpha * dv)

        return phi

    def grad_hess(self, x: np.ndarray, t: float):
        obj = self.obj
        M, Ds, s = self.mats(x)
        n = self.dim
        grad = np.zeros(n)
        hess = np.zeros((n, n))
        cache = {kind: _rate_grad_hess(obj, kind, M[kind]) for kind in self.kinds}

        if self.slack_var:
            grad[-1] = -t
        elif obj.prog.objective == "MIN_TOTAL_TRACE":
            grad[: obj.n] += t * self.tvec
        else:
            val, g, h = cache[obj.prog.objective[4:]]
            grad[: obj.n] -= t * g
            hess[: obj.n, : obj.n] -= t * h

        for l, D in Ds.items():
            val, g, h = _psd_grad_hess(obj, l, D)
            o = obj.offsets[l]
            grad[o : o + g.size] += g
            hess[o : o + g.size, o : o + g.size] += h
            sl = obj.prog.budgets[l] - float(np.trace(D).real)
            tv = obj.geom.tracevec[l]
            grad[o : o + tv.size] += tv / sl
            hess[o : o + tv.size, o : o + tv.size] += np.outer(tv, tv) / sl**2

        for kind, sign, b in obj.rows:
            val, g, h = cache[kind]
            sl = sign * val - sign * b - s
            gs = np.zeros(n)
            gs[: obj.n] = sign * g
            if self.slack_var:
                gs[-1] = -1.0
            grad -= gs / sl
            hess += np.outer(gs, gs) / sl**2
            hess[: obj.n, : obj.n] -= sign * h / sl
        return grad, hess


def _newton_minimize(state: _BarrierState, x: np.ndarray, t: float, max_steps: int, tol: float):
    """Damped Newton centering; returns (x, steps, converged, decrement^2)."""
    eye = np.eye(state.dim)
    dec2 = np.inf
    for step in range(max_steps):
        grad, hess = state.grad_hess(x, t)
        jitter = 1e-12 * max(1.0, float(np.trace(hess)) / state.dim)
        for _ in range(8):
            try:
                np.linalg.cholesky(hess + jitter * eye)
                break
            except np.linalg.LinAlgError:
                jitter *= 100.0
        else:
            return x, step, False, dec2
        d = -np.linalg.solve(hess + jitter * eye, grad)
        dec2 = float(-grad @ d)
        if dec2 / 2.0 <= tol:
            return x, step, True, dec2
        phi = state.ray_value(x, d, t)
        f0 = phi(0.0)
        gd = float(grad @ d)
        # Armijo with an absolute noise floor: at large t the barrier value is
        # huge and float cancellation swamps tiny true decrements.
        noise = 1e-13 * (abs(f0) + 1.0)
        alpha = 1.0
        accepted = False
        for _ in range(60):
            if phi(alpha) <= f0 + 0.25 * alpha * gd + noise:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            # take a damped Newton step inside the domain regardless of the
            # (noise-limited) value test
            alpha = 1.0 / (1.0 + np.sqrt(dec2))
            for _ in range(60):
                if np.isfinite(phi(alpha)):
                    accepted = True
                    break
                alpha *= 0.5
            if not accepted:
                return x, step + 1, dec2 / 2.0 <= 100 * tol, dec2
        x = x + alpha * d
    return x, max_steps, False, dec2


def _barrier_solve(state: _BarrierState, x0: np.ndarray, gap_nats: float,
                   t0: float = 1.0, mu: float = 30.0, max_newton: int = 600,
                   early=None):
    t = t0
    x = x0.copy()
    total = 0
    ok = True
    dec2 = np.inf
    while True:
        final_stage = state.m / t <= gap_nats
        tol = 1e-9 if final_stage else 1e-7
        x, steps, conv, dec2 = _newton_minimize(state, x, t, max_steps=60, tol=tol)
        if not conv and dec2 / 2.0 <= 1e-4:
            conv = True  # inside the quadratic zone: centered for our purposes
        total += steps
        if not conv or total > max_newton:
            ok = conv and total <= max_newton
            break
        if early is not None and early(x):
            break
        if final_stage:
            break
        t *= mu
    return x, t, total, ok, dec2


def _enter_bands(obj: _Objective, state: _BarrierState, x: np.ndarray, eqs) -> np.ndarray | None:
    """Scale equality-constrained blocks down until each rate sits mid-band.

    The phase-1 point satisfies the lower sides, so the rate only needs to
    come down; scaling a block is monotone in the rate, which makes this a
    plain bisection.  Returns None when a band cannot be reached.
    """
    x = x.copy()
    for c in eqs:
        b = c.bound * LN2
        scope = obj.scope(c.kind)
        spans = []
        for l in scope:
            o = obj.offsets[l]
            spans.append(slice(o, o + obj.geom.dims[l] ** 2))

        def f_at(tau: float) -> float:
            xt = x.copy()
            for sl in spans:
                xt[sl] *= tau
            M, _, _ = state.mats(xt)
            return _BarrierState._chol_logdet(M[c.kind])

        if not spans:
            base = _BarrierState._chol_logdet(obj.base[c.kind])
            if abs(base - b) > _EQ_BAND:
                return None
            continue
        if f_at(1.0) <= b + 0.5 * _EQ_BAND:
            if f_at(1.0) >= b - 0.5 * _EQ_BAND:
                continue
            return None  # below the band and scaling cannot raise it safely
        lo, hi = 0.0, 1.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if f_at(mid) > b:
                hi = mid
            else:
                lo = mid
        tau = 0.5 * (lo + hi)
        if abs(f_at(tau) - b) > 0.5 * _EQ_BAND:
            return None
        for sl in spans:
            x[sl] *= tau
    return x


def _initial_interior(obj: _Objective) -> np.ndarray:
    Ds = []
    for l in obj.blocks:
        n = obj.geom.dims[l]
        Ds.append((0.5 * obj.prog.budgets[l] / n) * np.eye(n, dtype=complex))
    return _vec_from_mat(obj.geom, obj.blocks, Ds)


def _phase1(obj: _Objective, gap_nats: float, stop_at: float = 5e-3):
    """Max-slack feasibility program; returns (x_interior, slack_nats, iters, ok).

    Stops early once the slack is comfortably positive, which is all a
    strictly interior phase-2 start requires.
    """
    x0 = _initial_interior(obj)
    state = _BarrierState(obj, slack_var=True)
    Ds = dict(zip(obj.blocks, _mat_from_vec(obj.geom, obj.blocks, x0)))
    slacks = [sign * obj.rate_nats(kind, Ds) - sign * b for kind, sign, b in obj.rows]
    s0 = min(slacks) - 1.0
    x = np.concatenate([x0, [s0]])
    x, t, iters, ok, _ = _barrier_solve(
        state, x, gap_nats=gap_nats, t0=1.0, early=lambda xc: xc[-1] > stop_at
    )
    s_star = float(x[-1])
    return x[:-1], s_star, iters, ok


def _clean(D: np.ndarray) -> np.ndarray:
    D = 0.5 * (D + D.conj().T)
    w, Q = np.linalg.eigh(D)
    w = np.where(w > 1e-11 * max(1.0, w.max(initial=0.0)), w, 0.0)
    return (Q * w) @ Q.conj().T


def _kind_rate_bits(geom: Geometry, kind: str, D1: np.ndarray, D2: np.ndarray) -> float:
    """Rate of one constraint kind at a covariance pair, in bits."""
    M = np.eye(geom.nr, dtype=complex)
    for l, D in ((0, D1), (1, D2)):
        if kind == "MAC_SUM" or kind == f"UPLINK_{l + 1}":
            G = geom.G[l]
            M = M + G @ D @ G.conj().T
    sign, ld = np.linalg.slogdet(0.5 * (M + M.conj().T))
    return max(0.0, float(ld / LN2))


def solve(
    ch: ChannelSet,
    prog: LogDetProgram,
    tol: float = 1e-8,
    warm: CovPair | None = None,
    geometry: Geometry | None = None,
    t0: float = 1.0,
    early_objective_above: float | None = None,
) -> CvxSolution:
    """Solve one log-det program to a target duality gap of ``tol`` bits.

    ``warm`` supplies a starting pair (used when strictly feasible, else
    phase-1 runs); ``t0`` is the initial barrier parameter, worth raising
    when the warm start is known to be near-optimal.  With
    ``early_objective_above`` the solve stops as soon as a rate objective
    exceeds that value (bits), for feasibility-style queries.
    """
    if not (tol > 0):
        raise InvalidProgramError(f"tol must be positive, got {tol}")
    prog.validate()
    geom = geometry if geometry is not None else Geometry(ch)

    # Bounds at a block's single-user maximum leave no interior; pin such a
    # block to its closed-form waterfilling optimum instead.
    fixed: dict[int, np.ndarray] = {}
    kept: list[RateConstraint] = []
    mac_pin = None
    for c in prog.constraints:
        if c.sense == ">=" and c.kind.startswith("UPLINK") and c.bound > 1e-15:
            l = 0 if c.kind.endswith("1") else 1
            if prog.budgets[l] > 0:
                mx = geom.su_max_rate(l, prog.budgets[l])
                if mx - 1e-9 <= c.bound <= mx + 1e-7:
                    fixed[l], _ = geom.su_waterfill(l, prog.budgets[l])
                    continue
        if c.sense == ">=" and c.kind == "MAC_SUM" and c.bound > 1e-15:
            D_mac, mac_mx = geom.mac_solution(prog.budgets)
            if c.bound >= mac_mx - 1e-9:
                mac_pin = (c, D_mac, mac_mx)
                continue
        kept.append(c)
    if mac_pin is not None:
        # the MA constraint saturates its achievable maximum: the capacity
        # point is the only candidate, so just evaluate everything there
        c_mac, D_mac, mac_mx = mac_pin
        if c_mac.bound > mac_mx + 1e-7:
            return CvxSolution(
                D=D_mac,
                status=INFEASIBLE,
                objective_value=np.nan,
                kkt_residual=np.inf,
                constraint_slacks={"MAC_SUM": mac_mx - c_mac.bound},
                certificate=(mac_mx - c_mac.bound),
            )
        slacks = {}
        for c in prog.constraints:
            slacks[c.kind] = _kind_rate_bits(geom, c.kind, D_mac.D1, D_mac.D2) - c.bound
        worst = min(slacks.values())
        feasible_here = worst >= -1e-6 and all(
            abs(slacks[c.kind]) <= 1e-6 for c in prog.constraints if c.sense == "=="
        )
        if prog.objective == "MIN_TOTAL_TRACE":
            value = D_mac.total_power
        else:
            kobj = prog.objective[4:]
            value = _kind_rate_bits(geom, kobj, D_mac.D1, D_mac.D2)
        return CvxSolution(
            D=D_mac,
            status=OPTIMAL if feasible_here else INFEASIBLE,
            objective_value=value,
            kkt_residual=0.0 if feasible_here else np.inf,
            constraint_slacks=slacks,
            certificate=None if feasible_here else worst,
        )

    eff = LogDetProgram(prog.objective, kept, prog.budgets)
    obj = _Objective(geom, eff, fixed=fixed)
    gap_nats = tol * LN2

    def finish(Ds_active: dict, status: str, iters: int, t: float, x: np.ndarray | None,
               certificate: float | None = None, dec2: float = 0.0) -> CvxSolution:
        full = {}
        for l in range(2):
            n = geom.dims[l]
            if l in Ds_active:
                full[l] = _clean(Ds_active[l])
            elif l in obj.fixed:
                full[l] = obj.fixed[l]
            else:
                full[l] = np.zeros((n, n), dtype=complex)
        D = CovPair(full[0], full[1])
        slacks, mults = {}, {}
        for c in prog.constraints:
            rate_bits = _kind_rate_bits(geom, c.kind, full[0], full[1])
            slacks[c.kind] = rate_bits - c.bound
        if status == INFEASIBLE:
            resid = np.inf
        elif not obj.blocks:
            resid = 0.0
        else:
            m_bar = _BarrierState(obj, slack_var=False).m
            resid = float(m_bar / t + np.sqrt(max(dec2, 0.0)) / t)
        if x is not None and status == OPTIMAL:
            Ds_x = dict(zip(obj.blocks, _mat_from_vec(geom, obj.blocks, x)))
            for kind, sign, b in obj.rows:
                sl = sign * obj.rate_nats(kind, Ds_x) - sign * b
                mults[(kind, sign)] = 1.0 / max(t * sl, 1e-300)
            for l in obj.blocks:
                sl = prog.budgets[l] - float(np.trace(Ds_x[l]).real)
                mults[("TRACE", l + 1)] = 1.0 / max(t * sl, 1e-300)
            mults["t"] = t
        if prog.objective == "MIN_TOTAL_TRACE":
            value = D.total_power
        else:
            value = _kind_rate_bits(geom, prog.objective[4:], full[0], full[1])
        return CvxSolution(
            D=D,
            status=status,
            objective_value=value,
            kkt_residual=resid,
            constraint_slacks=slacks,
            multipliers=mults,
            iterations=iters,
            certificate=certificate,
        )

    if not obj.blocks:
        Ds0: dict = {}
        feasible = all(
            sign * 0.0 - sign * b >= -_FEAS_TOL * LN2 for kind, sign, b in obj.rows
        )
        status = OPTIMAL if feasible else INFEASIBLE
        return finish({}, status, 0, 1.0, None, certificate=None if feasible else -1.0)

    total_iters = 0
    x0 = None
    state_full = _BarrierState(obj, slack_var=False)
    if warm is not None:
        Dw = [warm.D1, warm.D2][: 2]
        mats = []
        for l in obj.blocks:
            n = geom.dims[l]
            W = 0.5 * (Dw[l] + Dw[l].conj().T)
            # pull strictly inside the cone and the trace cut
            W = 0.995 * W + (0.004 * prog.budgets[l] / n) * np.eye(n)
            mats.append(W)
        cand = _vec_from_mat(geom, obj.blocks, mats)
        if state_full.in_domain(cand):
            x0 = cand
    eqs = [c for c in kept if c.sense == "=="]
    if x0 is None and obj.rows:
        if eqs:
            relaxed = LogDetProgram(
                prog.objective,
                [RateConstraint(c.kind, c.bound) for c in kept],
                prog.budgets,
            )
            obj_rel = _Objective(geom, relaxed, fixed=fixed)
        else:
            obj_rel = obj
        x_feas, s_star, it1, ok1 = _phase1(obj_rel, gap_nats=max(gap_nats, 1e-10))
        total_iters += it1
        if s_star < -_FEAS_TOL * LN2:
            Ds = dict(zip(obj.blocks, _mat_from_vec(geom, obj.blocks, x_feas)))
            return finish(Ds, INFEASIBLE, total_iters, 1.0, None, certificate=s_star / LN2)
        x0 = _enter_bands(obj, state_full, x_feas, eqs) if eqs else x_feas
        if x0 is None or not state_full.in_domain(x0):
            # feasible set has (numerically) empty interior
            Ds = dict(zip(obj.blocks, _mat_from_vec(geom, obj.blocks, x_feas)))
            return finish(Ds, MAX_ITERS, total_iters, 1.0, None, certificate=s_star / LN2)
    elif x0 is None:
        x0 = _initial_interior(obj)

    state = _BarrierState(obj, slack_var=False)
    early = None
    if early_objective_above is not None and prog.objective != "MIN_TOTAL_TRACE":
        kobj = prog.objective[4:]
        lim = early_objective_above * LN2

        def early(xc):
            M, _, _ = state.mats(xc)
            return _BarrierState._chol_logdet(M[kobj]) > lim

    x, t, iters, ok, dec2 = _barrier_solve(state, x0, gap_nats=gap_nats, t0=t0, early=early)
    total_iters += iters
    Ds = dict(zip(obj.blocks, _mat_from_vec(geom, obj.blocks, x)))
    return finish(
        Ds, OPTIMAL if ok else MAX_ITERS, total_iters, t, x if ok else None, dec2=dec2
    )


def mac_capacity(
    ch: ChannelSet,
    P1max: float,
    P2max: float,
    tol: float = 1e-12,
    max_sweeps: int = 500,
    geometry: Geometry | None = None,
) -> CvxSolution:
    """MA sum-rate maximization by alternating per-user waterfilling.

    Each sweep waterfills one user's power over its channel whitened by the
    other user's current contribution; the sweep rate is monotone and
    converges for the two-user case.
    """
    if P1max < 0 or P2max < 0:
        raise InvalidProgramError("budgets must be nonnegative")
    geom = geometry if geometry is not None else Geometry(ch)
    G = geom.G
    budgets = (P1max, P2max)
    dims = geom.dims
    Ds = [np.zeros((dims[l], dims[l]), dtype=complex) for l in range(2)]
    nr = geom.nr

    def sum_rate() -> float:
        M = np.eye(nr, dtype=complex)
        for l in range(2):
            M += G[l] @ Ds[l] @ G[l].conj().T
        sign, ld = np.linalg.slogdet(0.5 * (M + M.conj().T))
        return float(ld / LN2)

    prev = 0.0
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        for l in range(2):
            if budgets[l] <= 0:
                continue
            other = 1 - l
            M = np.eye(nr, dtype=complex) + G[other] @ Ds[other] @ G[other].conj().T
            w, Q = np.linalg.eigh(0.5 * (M + M.conj().T))
            Mih = (Q / np.sqrt(w)) @ Q.conj().T
            W = Mih @ G[l]
            U, s, Vh = np.linalg.svd(W, full_matrices=False)
            keep = s > 1e-14 * (s[0] if s.size else 1.0)
            alloc = waterfill(s[keep] ** 2, budgets[l])
            p = np.zeros(s.size)
            p[keep] = alloc.powers
            V = Vh.conj().T
            Ds[l] = (V * p) @ V.conj().T
        cur = sum_rate()
        if cur - prev < tol:
            prev = cur
            break
        prev = cur
    D = CovPair(_clean(Ds[0]), _clean(Ds[1]))
    return CvxSolution(
        D=D,
        status=OPTIMAL,
        objective_value=prev,
        kkt_residual=0.0,
        constraint_slacks={},
        iterations=sweeps,
    )


@dataclass
class FeasibilityResult:
    feasible: bool
    witness: CovPair | None
    value: float  # achieved binding rate, or the phase-1 max slack if unreachable
    shortfall: float  # bound minus achieved (negative when feasible)


def feasible(
    ch: ChannelSet,
    constraints: list[RateConstraint],
    budgets: tuple[float, float],
    binding: str | None = None,
    tol: float = 1e-8,
    geometry: Geometry | None = None,
) -> FeasibilityResult:
    """Feasibility of a rate-constraint set via the binding-rate test.

    The first constraint (or ``binding``) is treated as the binding one: its
    rate is maximized subject to the remaining constraints and compared with
    its bound.  If the remaining set itself is infeasible, the phase-1 slack
    certificate is reported instead.
    """
    if not constraints:
        n1, n2 = ch.n1, ch.n2
        witness = CovPair(np.zeros((n1, n1), dtype=complex), np.zeros((n2, n2), dtype=complex))
        return FeasibilityResult(True, witness, 0.0, 0.0)
    bind_kind = binding if binding is not None else constraints[0].kind
    bind = next(c for c in constraints if c.kind == bind_kind)
    rest = [c for c in constraints if c.kind != bind_kind]
    prog = LogDetProgram(objective=f"MAX_{bind_kind}", constraints=rest, budgets=budgets)
    sol = solve(
        ch, prog, tol=tol, geometry=geometry, early_objective_above=bind.bound + 1e-7
    )
    if sol.status == INFEASIBLE:
        return FeasibilityResult(False, None, sol.certificate or -np.inf, np.inf)
    achieved = sol.objective_value
    short = bind.bound - achieved
    return FeasibilityResult(short <= 1e-9 * max(1.0, bind.bound), sol.D, achieved, short)
