"""Run configuration: a line-oriented ``key = value`` file with sections.

Example::

    [system]
    n1 = 4
    n2 = 4
    nr = 8
    v1 = 1.0
    v2 = 1.0
    reciprocal = false

    [power]
    p1max = 2.0
    p2max = 2.5
    prmax = 3.0

    [run]
    seed = 42
    trials = 200
    eps = 1e-6
    jobs = 1
    steps = 200

    [sweep]
    pairing = zip
    p1max = 0.2, 1.0, 1.8
    p2max = 1.8, 1.0, 0.2

Lists (comma-separated values) are only meaningful in the [sweep] section,
where each listed field becomes a sweep axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InvalidSpecError

_INT_KEYS = {"n1", "n2", "nr", "seed", "trials", "jobs", "steps"}
_FLOAT_KEYS = {
    "v1", "v2", "sigma2_r", "sigma2_1", "sigma2_2",
    "p1max", "p2max", "prmax", "eps",
}
_BOOL_KEYS = {"reciprocal"}
SWEEPABLE = ("p1max", "p2max", "prmax", "n1", "n2", "nr", "v1", "v2")


@dataclass
class RunConfig:
    n1: int = 2
    n2: int = 2
    nr: int = 4
    v1: float = 1.0
    v2: float = 1.0
    sigma2_r: float = 1.0
    sigma2_1: float = 1.0
    sigma2_2: float = 1.0
    reciprocal: bool = False
    p1max: float = 1.0
    p2max: float = 1.0
    prmax: float = 1.0
    seed: int = 0
    trials: int = 100
    eps: float = 1e-6
    jobs: int = 1
    steps: int = 200
    pairing: str = "product"
    sweep_axes: dict = field(default_factory=dict)

    def validate(self, sweep: bool = False) -> None:
        for name in ("n1", "n2", "nr"):
            v = getattr(self, name)
            if v < 1:
                raise InvalidSpecError(f"{name} must be >= 1, got {v}")
        for name in ("v1", "v2", "sigma2_r", "sigma2_1", "sigma2_2", "eps"):
            v = getattr(self, name)
            if not (v > 0):
                raise InvalidSpecError(f"{name} must be positive, got {v}")
        for name in ("p1max", "p2max", "prmax"):
            v = getattr(self, name)
            if v < 0:
                raise InvalidSpecError(f"{name} must be nonnegative, got {v}")
        if self.trials < 0 or self.jobs < 1:
            raise InvalidSpecError("trials must be >= 0 and jobs >= 1")
        if self.pairing not in ("product", "zip"):
            raise InvalidSpecError(f"pairing must be product or zip, got {self.pairing}")
        if sweep:
            if not self.sweep_axes:
                raise InvalidSpecError("sweep mode needs at least one sweep axis")
            for k, vals in self.sweep_axes.items():
                if k not in SWEEPABLE:
                    raise InvalidSpecError(f"{k} is not sweepable")
                if not vals:
                    raise InvalidSpecError(f"sweep axis {k} is empty")
            if self.pairing == "zip":
                sizes = {len(v) for v in self.sweep_axes.values()}
                if len(sizes) > 1:
                    raise InvalidSpecError("zip pairing needs equal-length axes")

    def cells(self) -> list[dict]:
        """Axis coordinates of every sweep cell, in a fixed deterministic order."""
        names = sorted(self.sweep_axes)
        if not names:
            return [{}]
        if self.pairing == "zip":
            length = len(self.sweep_axes[names[0]])
            return [{k: self.sweep_axes[k][i] for k in names} for i in range(length)]
        out: list[dict] = [{}]
        for k in names:
            out = [{**c, k: v} for c in out for v in self.sweep_axes[k]]
        return out

    def with_cell(self, coords: dict) -> "RunConfig":
        cfg = RunConfig(**{**self.__dict__, "sweep_axes": {}})
        for k, v in coords.items():
            setattr(cfg, k, int(v) if k in _INT_KEYS else float(v))
        return cfg


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key in _BOOL_KEYS:
        low = raw.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise InvalidSpecError(f"bad boolean for {key}: {raw!r}")
    if key == "pairing":
        return raw.lower()
    if key in _INT_KEYS:
        return int(raw)
    if key in _FLOAT_KEYS:
        return float(raw)
    raise InvalidSpecError(f"unknown config key: {key!r}")


def parse_config(text: str) -> RunConfig:
    cfg = RunConfig()
    section = None
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if body.startswith("[") and body.endswith("]"):
            section = body[1:-1].strip().lower()
            if section not in ("system", "power", "run", "sweep"):
                raise InvalidSpecError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in body:
            raise InvalidSpecError(f"line {lineno}: expected key = value, got {body!r}")
        key, raw = (s.strip() for s in body.split("=", 1))
        key = key.lower()
        if section == "sweep":
            if key == "pairing":
                cfg.pairing = _parse_value(key, raw)
                continue
            if key not in SWEEPABLE:
                raise InvalidSpecError(f"line {lineno}: {key!r} is not sweepable")
            vals = [v.strip() for v in raw.split(",") if v.strip()]
            conv = int if key in _INT_KEYS else float
            cfg.sweep_axes[key] = [conv(v) for v in vals]
            continue
        if "," in raw:
            raise InvalidSpecError(f"line {lineno}: lists are only allowed in [sweep]")
        setattr(cfg, key, _parse_value(key, raw))
    return cfg


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
