"""Command-line client for the solver service.

Subcommands ``solve``, ``sweep`` and ``oracle`` read a config file, send the
request to a twrpower service and write the results as CSV.  Without
``--server`` the service runs in-process, so no separate daemon is needed;
``serve`` starts a standalone instance.

All floats are written with 12 significant digits and rows in a fixed
order, so identical configs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import RunConfig, load_config
from .errors import TwrError

CSV_VERSION = "twrpower-csv v1"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGED = 3


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _write_csv(path: str, kind: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# {CSV_VERSION} {kind}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _client(server: str | None):
    if server:
        import httpx

        return httpx.Client(base_url=server, timeout=None)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service.app import app

    return TestClient(app)


def _post(client, path: str, payload: dict) -> dict:
    resp = client.post(path, json=payload)
    if resp.status_code != 200:
        raise TwrError(f"service returned {resp.status_code}: {resp.text}")
    return resp.json()


def _system_payload(cfg: RunConfig) -> dict:
    return {
        "n1": cfg.n1,
        "n2": cfg.n2,
        "nr": cfg.nr,
        "v1": cfg.v1,
        "v2": cfg.v2,
        "sigma2_r": cfg.sigma2_r,
        "sigma2_1": cfg.sigma2_1,
        "sigma2_2": cfg.sigma2_2,
        "reciprocal": cfg.reciprocal,
    }


def _power_payload(cfg: RunConfig) -> dict:
    return {"p1max": cfg.p1max, "p2max": cfg.p2max, "prmax": cfg.prmax}


def _out_dir(args) -> str:
    out = args.out or os.environ.get("TWRPOWER_OUT") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _load(args) -> RunConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.eps is not None:
        cfg.eps = args.eps
    if getattr(args, "jobs", None) is not None:
        cfg.jobs = args.jobs
    return cfg


def cmd_solve(args) -> int:
    cfg = _load(args)
    cfg.validate()
    out = _out_dir(args)
    payload = {
        "system": _system_payload(cfg),
        "power": _power_payload(cfg),
        "seed": cfg.seed,
        "trial": args.trial,
        "eps": cfg.eps,
    }
    with _client(args.server) as client:
        data = _post(client, "/solve", payload)
    header = ["iter", "R_obj", "R_ma", "R_bc_sum", "R_tw", "P1", "P2", "Pr"]
    rows = [[r[h] for h in header] for r in data["trace"]]
    _write_csv(os.path.join(out, "trace.csv"), "trace", header, rows)
    with open(os.path.join(out, "summary.txt"), "w", encoding="utf-8") as fh:
        for key in sorted(data["summary"]):
            fh.write(f"{key} = {_fmt(data['summary'][key])}\n")
    print(f"{data['subcase']} {data['status']} R_tw = {_fmt(data['rates']['R_tw'])}")
    return EXIT_OK if data["status"] == "OPTIMAL" else EXIT_NONCONVERGED


def cmd_sweep(args) -> int:
    cfg = _load(args)
    cfg.validate(sweep=True)
    out = _out_dir(args)
    payload = {
        "system": _system_payload(cfg),
        "power": _power_payload(cfg),
        "seed": cfg.seed,
        "trials": cfg.trials,
        "eps": cfg.eps,
        "jobs": cfg.jobs,
        "pairing": cfg.pairing,
        "axes": {k: [float(v) for v in vs] for k, vs in cfg.sweep_axes.items()},
    }
    with _client(args.server) as client:
        data = _post(client, "/sweep", payload)
    axis_names = sorted(cfg.sweep_axes)
    header = axis_names + [
        "count_I1", "count_I2", "count_II1", "count_II2", "count_II3", "count_II4",
        "failures", "mean_Rtw", "mean_power", "trials",
    ]
    rows = []
    for cell in data["cells"]:
        rows.append(
            [cell["coords"][k] for k in axis_names]
            + [cell["counts"][k] for k in ("I1", "I2", "II1", "II2", "II3", "II4")]
            + [cell["failures"], cell["mean_Rtw"], cell["mean_power"], cell["trials"]]
        )
    _write_csv(os.path.join(out, "sweep.csv"), "sweep", header, rows)
    print(f"{len(rows)} cells x {cfg.trials} trials written to sweep.csv")
    return EXIT_OK


def cmd_oracle(args) -> int:
    cfg = _load(args)
    cfg.validate()
    out = _out_dir(args)
    payload = {
        "system": _system_payload(cfg),
        "power": _power_payload(cfg),
        "seed": cfg.seed,
        "trials": cfg.trials,
        "eps": cfg.eps,
        "steps": cfg.steps,
    }
    with _client(args.server) as client:
        data = _post(client, "/oracle", payload)
    header = ["trial", "seed", "Rtw_alg", "Rtw_oracle", "dP", "pass"]
    rows = [
        [r["trial"], r["seed"], r["Rtw_alg"], r["Rtw_oracle"], r["dP"], r["passed"]]
        for r in data["rows"]
    ]
    _write_csv(os.path.join(out, "oracle.csv"), "oracle", header, rows)
    print(f"pass rate {_fmt(data['pass_rate'])} over {len(rows)} trials")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("twrpower.service.app:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twrpower", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="path to a run config file")
        sp.add_argument("--out", default=None, help="output directory (default: . or $TWRPOWER_OUT)")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--eps", type=float, default=None, help="override the bisection tolerance")
        sp.add_argument("--server", default=None, help="remote service URL (default: in-process)")

    sp = sub.add_parser("solve", help="solve one seeded instance, write trace.csv + summary.txt")
    common(sp)
    sp.add_argument("--trial", type=int, default=0, help="trial index within the seed stream")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("sweep", help="Monte Carlo sweep over config axes, write sweep.csv")
    common(sp)
    sp.add_argument("--jobs", type=int, default=None, help="worker processes")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("oracle", help="scalar solver-vs-oracle suite, write oracle.csv")
    common(sp)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("serve", help="run a standalone service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8000)
    sp.set_defaults(func=cmd_serve)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (TwrError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
