import pytest

from twrpower.config import RunConfig, parse_config
from twrpower.errors import InvalidSpecError

SAMPLE = """
# comment line
[system]
n1 = 4
n2 = 2
nr = 8
v1 = 1.5
reciprocal = true

[power]
p1max = 2.0
p2max = 2.5
prmax = 3.0

[run]
seed = 42
trials = 10
eps = 1e-7
jobs = 2

[sweep]
pairing = zip
p1max = 0.2, 1.0, 1.8
p2max = 1.8, 1.0, 0.2
"""


class TestParse:
    def test_round_trip(self):
        cfg = parse_config(SAMPLE)
        assert (cfg.n1, cfg.n2, cfg.nr) == (4, 2, 8)
        assert cfg.v1 == 1.5 and cfg.reciprocal is True
        assert cfg.p2max == 2.5 and cfg.seed == 42 and cfg.eps == 1e-7
        assert cfg.pairing == "zip"
        assert cfg.sweep_axes == {"p1max": [0.2, 1.0, 1.8], "p2max": [1.8, 1.0, 0.2]}
        cfg.validate(sweep=True)

    def test_unknown_key(self):
        with pytest.raises(InvalidSpecError):
            parse_config("[system]\nfoo = 1\n")

    def test_unknown_section(self):
        with pytest.raises(InvalidSpecError):
            parse_config("[bogus]\nn1 = 1\n")

    def test_list_outside_sweep(self):
        with pytest.raises(InvalidSpecError):
            parse_config("[power]\np1max = 1, 2\n")

    def test_zip_length_mismatch(self):
        cfg = parse_config("[sweep]\npairing = zip\np1max = 1, 2\np2max = 1\n")
        with pytest.raises(InvalidSpecError):
            cfg.validate(sweep=True)

    def test_sweep_mode_needs_axes(self):
        cfg = RunConfig()
        with pytest.raises(InvalidSpecError):
            cfg.validate(sweep=True)


class TestCells:
    def test_product_order(self):
        cfg = RunConfig(sweep_axes={"p1max": [1.0, 2.0], "v1": [0.5, 1.5]})
        cells = cfg.cells()
        assert len(cells) == 4
        assert cells[0] == {"p1max": 1.0, "v1": 0.5}
        assert cells[-1] == {"p1max": 2.0, "v1": 1.5}

    def test_zip_order(self):
        cfg = RunConfig(pairing="zip", sweep_axes={"p1max": [0.2, 1.8], "p2max": [1.8, 0.2]})
        cells = cfg.cells()
        assert cells == [{"p1max": 0.2, "p2max": 1.8}, {"p1max": 1.8, "p2max": 0.2}]

    def test_with_cell_casts_ints(self):
        cfg = RunConfig(sweep_axes={"n1": [2, 3]})
        sub = cfg.with_cell({"n1": 3})
        assert sub.n1 == 3 and isinstance(sub.n1, int)
        assert sub.sweep_axes == {}
