"""Command-line interface.

Subcommands: ``build``, ``diagnose``, ``reduce``, ``sweep``, ``synth`` and
``oracle``.  Every configuration key is also a flag (``--key value``); a
``--config FILE`` supplies defaults that flags override.

Exit status: 0 on success (a breakdown is a success, reported in the output),
1 on usage or input errors, 2 on numerical failure.
"""

import argparse
import logging
import sys
import warnings

import numpy as np

from . import diagnostics as dg
from . import io as mmio
from . import mor
from .config import KEYS, RunConfig
from .core import OperatorPair
from .errors import ConfigError, InvalidInput, IoError, ItoarError, ParseError, PseudoInverseUnstable
from .improved import itoar_run
from .rng import random_instance
from .toar import toar_run

COMMANDS = {
    "build": "run the chosen variant; write the factorization and its structure report",
    "diagnose": "full diagnostics report including backward error (dense inputs)",
    "reduce": "shift, build, project; write the reduced operators",
    "sweep": "frequency sweep of the full and reduced transfer functions (CSV)",
    "synth": "write the synthetic spring-mass chain to Matrix Market files",
    "oracle": "compare the run against the brute-force and linearized oracles",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser():
    parser = _Parser(prog="itoar", description="Second-order Krylov bases (TOAR / I-TOAR) and model reduction.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    for name, text in COMMANDS.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("--config", metavar="FILE", help="file of 'key = value' lines")
        for key, spec in KEYS.items():
            default = "" if spec.default is None else f" (default: {spec.default})"
            p.add_argument(f"--{key}", dest=key, metavar=spec.kind.upper(), default=None, help=spec.help + default)
    return parser


def _config(args):
    base = RunConfig.load(args.config) if args.config else RunConfig()
    return base.merged({k: getattr(args, k) for k in KEYS})


def _read_vector(path):
    return mmio.read_matrix_market(path).reshape(-1)


class Problem:
    """Operators and starting vectors resolved from the configuration.

    Sources, in order of precedence: a second-order system (``matrix.K``), an
    explicit pair (``matrix.A``/``matrix.B``), or a seeded random instance.
    """

    def __init__(self, cfg, need_system=False):
        self.cfg = cfg
        self.system = None
        if cfg.given("matrix.K") or cfg.given("matrix.M"):
            self.system = load_system(cfg)
            self.ops, self.r_m1, self.r_0 = mor.shifted_operators(self.system, cfg.shift)
            self._dense = None
        elif need_system:
            raise ConfigError("this command needs a second-order system (matrix.M, matrix.K, vector.f)")
        elif cfg.given("matrix.A") or cfg.given("matrix.B"):
            if not (cfg.given("matrix.A") and cfg.given("matrix.B") and cfg.given("vector.r0")):
                raise ConfigError("matrix.A, matrix.B and vector.r0 must be given together")
            A = mmio.read_matrix_market(cfg["matrix.A"])
            B = mmio.read_matrix_market(cfg["matrix.B"])
            self.r_0 = _read_vector(cfg["vector.r0"])
            self.r_m1 = _read_vector(cfg["vector.rm1"]) if cfg.given("vector.rm1") else np.zeros_like(self.r_0)
            self.ops = OperatorPair.from_dense(A, B)
        else:
            A, B, self.r_m1, self.r_0 = random_instance(cfg["n"], cfg["seed"])
            self.ops = OperatorPair.from_dense(A, B)

    def dense(self):
        if self.ops.has_dense:
            return self.ops.dense_A, self.ops.dense_B
        A, B = mor.dense_shifted_operators(self.system, self.cfg.shift)
        self.ops.dense_A, self.ops.dense_B = A, B
        return A, B

    def run(self):
        cfg = self.cfg
        variant = cfg["variant"]
        opts = cfg.options()
        if variant == "toar":
            return toar_run(self.ops, self.r_m1, self.r_0, cfg["k"], opts)
        return itoar_run(self.ops, self.r_m1, self.r_0, cfg["k"], opts, variant.split("-", 1)[1])


def load_system(cfg):
    for key in ("matrix.M", "matrix.K", "vector.f"):
        if not cfg.given(key):
            raise ConfigError(f"second-order system input needs {key}")
    M = mmio.read_matrix_market(cfg["matrix.M"])
    K = mmio.read_matrix_market(cfg["matrix.K"])
    D = mmio.read_matrix_market(cfg["matrix.D"]) if cfg.given("matrix.D") else np.zeros_like(M)
    f = _read_vector(cfg["vector.f"])
    c = _read_vector(cfg["vector.c"]) if cfg.given("vector.c") else np.zeros_like(f)
    return mor.SecondOrderSystem(M, D, K, f, c)


def _summary(fact):
    return f"status = {fact.status.value}\nk = {fact.k}\neta = {fact.eta}\n"


def cmd_build(cfg, out):
    prob = Problem(cfg)
    fact = prob.run()
    prefix = cfg["out.prefix"]
    mmio.write_text(f"{prefix}.fact.txt", fact.to_text())
    mmio.write_text(f"{prefix}.structure.txt", dg.structure_report(fact).to_text())
    out.write(_summary(fact))


def cmd_diagnose(cfg, out):
    prob = Problem(cfg)
    fact = prob.run()
    A, B = prob.dense()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", PseudoInverseUnstable)
        report = dg.backward_error(None, fact, A, B)
    for w in caught:
        logging.getLogger("itoar").warning("%s", w.message)
    text = report.to_text()
    mmio.write_text(f"{cfg['out.prefix']}.diagnostics.txt", text)
    out.write(_summary(fact) + text)


def cmd_reduce(cfg, out):
    prob = Problem(cfg, need_system=True)
    fact = prob.run()
    model = mor.reduce(prob.system, fact.Q)
    if np.iscomplexobj(model.Mk):
        raise ConfigError("reduced operators are complex for a complex shift; only real output is supported")
    prefix = cfg["out.prefix"]
    for name in ("Mk", "Dk", "Kk", "fk", "ck"):
        mmio.write_matrix_market(f"{prefix}_{name}.mtx", getattr(model, name), fmt="array")
    out.write(_summary(fact) + f"reduced_dimension = {model.eta}\n")


def cmd_sweep(cfg, out):
    prob = Problem(cfg, need_system=True)
    fact = prob.run()
    model = mor.reduce(prob.system, fact.Q)
    freqs = np.linspace(cfg["sweep.fmin"], cfg["sweep.fmax"], cfg["sweep.points"])
    table = mor.sweep(prob.system, model, freqs, cfg["sweep.scale"])
    path = f"{cfg['out.prefix']}.sweep.csv"
    mmio.write_sweep_csv(table, path)
    finite = table.rel_err[np.isfinite(table.rel_err)]
    median = float(np.median(finite)) if finite.size else float("nan")
    out.write(_summary(fact) + f"points = {len(table)}\nmedian_rel_err = {median:.16e}\ncsv = {path}\n")


def cmd_synth(cfg, out):
    system = mor.synth_system(cfg["n"], cfg["synth.alpha"], cfg["synth.beta"], cfg["synth.kappa"])
    prefix = cfg["out.prefix"]
    for name in ("M", "D", "K"):
        mmio.write_matrix_market(f"{prefix}_{name}.mtx", getattr(system, name), symmetric=True)
    for name in ("f", "c"):
        mmio.write_matrix_market(f"{prefix}_{name}.mtx", getattr(system, name), fmt="array")
    out.write(f"n = {system.n}\nprefix = {prefix}\n")


def cmd_oracle(cfg, out):
    prob = Problem(cfg)
    fact = prob.run()
    A, B = prob.dense()
    prob.ops.dense_A, prob.ops.dense_B = A, B
    hdiff, angle = dg.oracle_comparison(prob.ops, prob.r_m1, prob.r_0, fact)
    out.write(
        _summary(fact)
        + f"h_maxabs_discrepancy = {hdiff:.16e}\n"
        + f"span_angle = {angle:.16e}\n"
        + f"arnoldi_residual = {dg.residual_check(fact, A, B):.16e}\n"
    )


HANDLERS = {
    "build": cmd_build,
    "diagnose": cmd_diagnose,
    "reduce": cmd_reduce,
    "sweep": cmd_sweep,
    "synth": cmd_synth,
    "oracle": cmd_oracle,
}


def main(argv=None, out=None):
    out = out or sys.stdout
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("itoar: missing command\n" + parser.format_usage())
        cfg = _config(args)
        HANDLERS[args.command](cfg, out)
    except (UsageError, ConfigError, ParseError, IoError, InvalidInput) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ItoarError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
