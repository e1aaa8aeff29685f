import pytest

from itoar.config import KEYS, RunConfig
from itoar.core import BREAKDOWN_TOL, DEFLATION_TOL
from itoar.errors import ConfigError, IoError


def test_defaults():
    cfg = RunConfig()
    assert cfg["k"] == 10 and cfg["variant"] == "itoar-mgs" and cfg["sweep.scale"] == "hertz"
    assert cfg["deflation_tol"] == DEFLATION_TOL and cfg["breakdown_tol"] == BREAKDOWN_TOL
    assert cfg["matrix.M"] is None and not cfg.given("k")
    assert cfg.shift == 0.0


def test_every_spec_key_documented():
    for key in ["matrix.M", "matrix.D", "matrix.K", "matrix.A", "matrix.B", "vector.f", "vector.c",
                "vector.r0", "vector.rm1", "shift.re", "shift.im", "k", "variant", "ortho.first",
                "ortho.second", "deflation_tol", "breakdown_tol", "sweep.fmin", "sweep.fmax",
                "sweep.points", "sweep.scale", "seed", "out.prefix"]:
        assert key in KEYS


def test_parse():
    cfg = RunConfig.parse("# comment\nk = 12\nvariant = toar  # trailing\n\nshift.im = 2\northo.first=off\n")
    assert cfg["k"] == 12 and cfg["variant"] == "toar" and cfg.shift == 2j
    assert cfg.given("k")
    opts = cfg.options()
    assert not opts.first_reorth and opts.second_reorth


@pytest.mark.parametrize(
    "text",
    ["bogus = 1", "k = two", "variant = lanczos", "k = 0", "sweep.fmin = 2\nsweep.fmax = 1",
     "just words", "deflation_tol = -1", "out.prefix = ", "sweep.scale = rpm"],
)
def test_rejects(text):
    with pytest.raises(ConfigError):
        RunConfig.parse(text)


def test_unknown_key_named():
    with pytest.raises(ConfigError, match="matrix.Z"):
        RunConfig({"matrix.Z": "x"})


def test_merge_overrides(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("k = 5\nseed = 3\n")
    cfg = RunConfig.load(p).merged({"k": "7", "seed": None})
    assert cfg["k"] == 7 and cfg["seed"] == 3


def test_load_missing(tmp_path):
    with pytest.raises(IoError):
        RunConfig.load(tmp_path / "none.cfg")


def test_unknown_lookup():
    with pytest.raises(KeyError):
        RunConfig()["nope"]
