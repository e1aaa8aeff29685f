"""Run configuration: documented keys, defaults, parsing and validation.

A configuration file holds ``key = value`` lines; ``#`` starts a comment.
Unknown keys are rejected before any numerical work.
"""

from dataclasses import dataclass

from .core import BREAKDOWN_TOL, DEFLATION_TOL
from .errors import ConfigError, IoError

VARIANTS = ("itoar-mgs", "itoar-proc1", "itoar-proc2", "toar")
ON_OFF = ("on", "off")
SCALES = ("hertz", "angular")


@dataclass(frozen=True)
class Key:
    name: str
    kind: str  # path, float, int, choice, str
    default: object = None
    choices: tuple = ()
    help: str = ""


KEYS = {
    k.name: k
    for k in [
        Key("matrix.M", "path", help="mass matrix"),
        Key("matrix.D", "path", help="damping matrix"),
        Key("matrix.K", "path", help="stiffness matrix"),
        Key("matrix.A", "path", help="recurrence matrix A"),
        Key("matrix.B", "path", help="recurrence matrix B"),
        Key("vector.f", "path", help="input vector"),
        Key("vector.c", "path", help="output vector"),
        Key("vector.r0", "path", help="starting vector r_0"),
        Key("vector.rm1", "path", help="starting vector r_-1 (default zero)"),
        Key("shift.re", "float", 0.0, help="real part of the expansion shift"),
        Key("shift.im", "float", 0.0, help="imaginary part of the expansion shift"),
        Key("k", "int", 10, help="number of basis vectors"),
        Key("variant", "choice", "itoar-mgs", VARIANTS),
        Key("ortho.first", "choice", "on", ON_OFF, "first-level reorthogonalization"),
        Key("ortho.second", "choice", "on", ON_OFF, "second-level reorthogonalization"),
        Key("deflation_tol", "float", DEFLATION_TOL, help="relative deflation threshold"),
        Key("breakdown_tol", "float", BREAKDOWN_TOL, help="relative breakdown threshold"),
        Key("sweep.fmin", "float", 0.0),
        Key("sweep.fmax", "float", 1.0),
        Key("sweep.points", "int", 200),
        Key("sweep.scale", "choice", "hertz", SCALES),
        Key("seed", "int", 0, help="seed of the random instance generator"),
        Key("out.prefix", "str", "out", help="prefix of output files"),
        Key("n", "int", 30, help="dimension of generated instances"),
        Key("synth.alpha", "float", 0.0, help="mass-proportional damping of the chain"),
        Key("synth.beta", "float", 1e-7, help="stiffness-proportional damping of the chain"),
        Key("synth.kappa", "float", 1e3, help="spring constant of the chain"),
    ]
}


def _convert(key, raw):
    spec = KEYS[key]
    raw = str(raw).strip()
    try:
        if spec.kind == "float":
            return float(raw)
        if spec.kind == "int":
            return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {spec.kind}") from None
    if spec.kind == "choice" and raw not in spec.choices:
        raise ConfigError(f"{key}: {raw!r} is not one of {', '.join(spec.choices)}")
    if not raw:
        raise ConfigError(f"{key}: empty value")
    return raw


class RunConfig:
    """Validated mapping of configuration keys; missing keys take their defaults."""

    def __init__(self, values=None):
        values = dict(values or {})
        unknown = sorted(set(values) - set(KEYS))
        if unknown:
            raise ConfigError(f"unknown configuration key(s): {', '.join(unknown)}")
        self._values = {k: _convert(k, v) for k, v in values.items() if v is not None}
        self._check()

    def _check(self):
        if self["k"] < 1:
            raise ConfigError("k must be at least 1")
        if self["n"] < 1:
            raise ConfigError("n must be at least 1")
        if self["sweep.points"] < 0:
            raise ConfigError("sweep.points must be nonnegative")
        if not 0 <= self["sweep.fmin"] <= self["sweep.fmax"]:
            raise ConfigError("need 0 <= sweep.fmin <= sweep.fmax")
        for key in ("deflation_tol", "breakdown_tol"):
            if self[key] < 0:
                raise ConfigError(f"{key} must be nonnegative")

    def __getitem__(self, key):
        if key not in KEYS:
            raise KeyError(key)
        return self._values.get(key, KEYS[key].default)

    def given(self, key):
        return key in self._values

    def merged(self, overrides):
        vals = dict(self._values)
        vals.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig(vals)

    @property
    def shift(self):
        re, im = self["shift.re"], self["shift.im"]
        return complex(re, im) if im else re

    def options(self):
        from .core import Options

        return Options(
            first_reorth=self["ortho.first"] == "on",
            second_reorth=self["ortho.second"] == "on",
            deflation_tol=self["deflation_tol"],
            breakdown_tol=self["breakdown_tol"],
        )

    @classmethod
    def parse(cls, text, source="<config>"):
        values = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
            values[key.strip()] = value.strip()
        return cls(values)

    @classmethod
    def load(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise IoError(f"cannot read config {path}: {exc}") from None
        return cls.parse(text, str(path))
