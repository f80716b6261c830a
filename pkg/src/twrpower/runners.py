"""Experiment runners: single solves, Monte Carlo sweeps, oracle suites.

All heavy work happens here; the service wraps these functions and the CLI
writes their outputs to CSV.  Per-trial channel seeds are derived from the
master seed and a per-cell trial index, so results do not depend on worker
count or execution order.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channels import generate_channels
from .config import RunConfig
from .errors import InvalidSpecError, TwrError
from .netopt import Limits, NetSolution, Workspace, network_optimize
from .verify import compare_to_oracle, scalar_oracle

SUBCASE_KEYS = ("I1", "I2", "II1", "II2", "II3", "II4")


def _subcase_key(label: str) -> str:
    return label.replace("-", "")


def _channel(cfg: RunConfig, trial: int):
    return generate_channels(
        cfg.n1,
        cfg.n2,
        cfg.nr,
        v1=cfg.v1,
        v2=cfg.v2,
        reciprocal=cfg.reciprocal,
        seed=cfg.seed,
        trial=trial,
        sigma2_r=cfg.sigma2_r,
        sigma2_1=cfg.sigma2_1,
        sigma2_2=cfg.sigma2_2,
    )


def _limits(cfg: RunConfig) -> Limits:
    return Limits(cfg.p1max, cfg.p2max, cfg.prmax)


@dataclass
class SingleResult:
    solution: NetSolution
    summary: dict
    trace_rows: list[dict]


def run_single(cfg: RunConfig, trial: int = 0) -> SingleResult:
    """Solve one seeded instance and collect its iteration trace."""
    cfg.validate()
    ch = _channel(cfg, trial)
    sol = network_optimize(ch, _limits(cfg), eps=cfg.eps)
    rows = [
        {
            "iter": r.iteration,
            "R_obj": r.R_obj,
            "R_ma": r.R_ma,
            "R_bc_sum": r.R_bc_sum,
            "R_tw": r.R_tw,
            "P1": r.P1,
            "P2": r.P2,
            "Pr": r.Pr,
        }
        for r in sol.trace
    ]
    summary = {
        "status": sol.status,
        "subcase": sol.subcase.label,
        "pair_i": sol.subcase.i if sol.subcase.i is not None else 0,
        "pair_j": sol.subcase.j if sol.subcase.j is not None else 0,
        "iterations": sol.iterations,
        "R_tw": sol.rates.R_tw,
        "R_ma": sol.rates.R_ma,
        "Rhat_r1": sol.rates.Rhat_r1,
        "Rhat_r2": sol.rates.Rhat_r2,
        "Rbar_1r": sol.rates.Rbar_1r,
        "Rbar_2r": sol.rates.Rbar_2r,
        "P1": sol.powers["P1"],
        "P2": sol.powers["P2"],
        "Pr": sol.powers["Pr"],
        "inv_lambda1": sol.relay.inv_lambda1,
        "inv_lambda2": sol.relay.inv_lambda2,
        "inv_mu1": sol.levels.inv_mu1,
        "inv_mu2": sol.levels.inv_mu2,
        "inv_mu_ma": sol.levels.inv_mu_ma,
    }
    return SingleResult(solution=sol, summary=summary, trace_rows=rows)


@dataclass
class SweepCell:
    coords: dict
    counts: dict = field(default_factory=lambda: {k: 0 for k in SUBCASE_KEYS})
    failures: int = 0
    mean_Rtw: float = 0.0
    mean_power: float = 0.0
    trials: int = 0


def _sweep_trial(args) -> tuple[int, int, tuple]:
    """One (cell, trial) task; returns plain scalars so it pickles cheaply."""
    cfg_dict, cell_idx, trial_idx, trial_key = args
    cfg = RunConfig(**cfg_dict)
    try:
        ch = _channel(cfg, trial_key)
        sol = network_optimize(ch, _limits(cfg), eps=cfg.eps)
        if sol.status != "OPTIMAL":
            return cell_idx, trial_idx, ("FAIL", 0.0, 0.0)
        total = sol.powers["P1"] + sol.powers["P2"] + sol.powers["Pr"]
        return cell_idx, trial_idx, (sol.subcase.label, sol.rates.R_tw, total)
    except TwrError:
        return cell_idx, trial_idx, ("FAIL", 0.0, 0.0)
    except np.linalg.LinAlgError:
        return cell_idx, trial_idx, ("FAIL", 0.0, 0.0)


def run_sweep(cfg: RunConfig, progress=None) -> list[SweepCell]:
    """Monte Carlo sweep over the configured axes.

    Per-trial failures are counted in the cell's failure column and never
    abort the sweep.  Results are independent of ``jobs``.
    """
    cfg.validate(sweep=True)
    cells = cfg.cells()
    tasks = []
    for ci, coords in enumerate(cells):
        sub = cfg.with_cell(coords)
        sub_dict = dict(sub.__dict__)
        for ti in range(cfg.trials):
            tasks.append((sub_dict, ci, ti, ci * cfg.trials + ti))
    results: dict[tuple[int, int], tuple] = {}
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            for ci, ti, payload in pool.map(_sweep_trial, tasks, chunksize=4):
                results[(ci, ti)] = payload
                if progress:
                    progress(len(results), len(tasks))
    else:
        for task in tasks:
            ci, ti, payload = _sweep_trial(task)
            results[(ci, ti)] = payload
            if progress:
                progress(len(results), len(tasks))
    out = []
    for ci, coords in enumerate(cells):
        cell = SweepCell(coords=coords, trials=cfg.trials)
        rtw_sum = 0.0
        pw_sum = 0.0
        done = 0
        for ti in range(cfg.trials):
            label, rtw, power = results[(ci, ti)]
            if label == "FAIL":
                cell.failures += 1
                continue
            cell.counts[_subcase_key(label)] += 1
            rtw_sum += rtw
            pw_sum += power
            done += 1
        if done:
            cell.mean_Rtw = rtw_sum / done
            cell.mean_power = pw_sum / done
        out.append(cell)
    return out


@dataclass
class OracleRow:
    trial: int
    seed: int
    Rtw_alg: float
    Rtw_oracle: float
    dP: float
    passed: bool


def run_oracle_suite(cfg: RunConfig) -> tuple[list[OracleRow], float]:
    """Solver-versus-grid-oracle comparison over scalar instances."""
    cfg.validate()
    if not (cfg.n1 == cfg.n2 == cfg.nr == 1):
        raise InvalidSpecError("oracle suite requires n1 = n2 = nr = 1")
    rows: list[OracleRow] = []
    npass = 0
    for t in range(cfg.trials):
        ch = _channel(cfg, t)
        sol = network_optimize(ch, _limits(cfg), eps=cfg.eps)
        orc = scalar_oracle(ch, _limits(cfg), steps=cfg.steps)
        cmpres = compare_to_oracle(sol, orc)
        rows.append(
            OracleRow(
                trial=t,
                seed=cfg.seed,
                Rtw_alg=sol.rates.R_tw,
                Rtw_oracle=orc.R_tw,
                dP=cmpres.power_delta,
                passed=cmpres.passed,
            )
        )
        npass += int(cmpres.passed)
    rate = npass / len(rows) if rows else 1.0
    return rows, rate
