import logging

import numpy as np
import pytest

from itoar import kernels
from itoar.core import OperatorPair
from itoar.mor import dense_shifted_operators, shifted_operators, synth_system
from itoar.rng import random_instance


@pytest.fixture(params=kernels.available())
def kernel_module(request):
    return kernels.load(request.param)


@pytest.fixture(params=kernels.available())
def backend(request, monkeypatch):
    """Swap the active kernel backend for the duration of a test."""
    impl = kernels.load(request.param)
    for name in ("mgs_pass", "weighted_mgs_pass", "lu_factor", "lu_solve"):
        monkeypatch.setattr(kernels, name, getattr(impl, name))
    return request.param


@pytest.fixture(scope="session")
def random30():
    A, B, r_m1, r_0 = random_instance(30, seed=0)
    return OperatorPair.from_dense(A, B), r_m1, r_0


@pytest.fixture(scope="session")
def chain400():
    system = synth_system(400, alpha=0.0, beta=1e-7, kappa=1e3)
    ops, r_m1, r_0 = shifted_operators(system, 1.0)
    A, B = dense_shifted_operators(system, 1.0)
    return system, ops, r_m1, r_0, A, B


@pytest.fixture
def quiet_fallback(caplog):
    caplog.set_level(logging.WARNING, logger="itoar.improved")
    return caplog


def rand(rng, *shape, complex_=False):
    x = rng.standard_normal(shape)
    if complex_:
        x = x + 1j * rng.standard_normal(shape)
    return x


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """``criterion(label, ok, detail)`` logs one PASS/FAIL line and asserts ``ok``."""

    def record(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
