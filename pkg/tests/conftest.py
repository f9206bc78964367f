import time

import numpy as np
import pytest

from cpo_biphoton.correlations import Mode, default_tau_grid, g2
from cpo_biphoton.params import SystemParams
from cpo_biphoton.susceptibility import build_grid

_ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance_log():
    def record(label: str, passed: bool, detail: str):
        line = f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


@pytest.fixture(scope="session")
def canonical():
    """kappa = 1, gamma_ca = 1e-4, Omega = 0, L_tilde = 1e-3."""
    return SystemParams(kappa=1.0)


@pytest.fixture(scope="session")
def detuned():
    return SystemParams(kappa=1.0, Omega=10.0)


class _Curves:
    """Lazily computed and cached correlation curves keyed by (Omega, mode)."""

    def __init__(self):
        self._cache = {}
        self.runtime = {}

    def get(self, Omega: float, mode: Mode):
        key = (Omega, mode)
        if key not in self._cache:
            p = SystemParams(kappa=1.0, Omega=Omega)
            start = time.perf_counter()
            grid = None if mode is Mode.CLOSED else build_grid(p)
            r = g2(p, default_tau_grid(p), mode, grid=grid)
            self.runtime[key] = time.perf_counter() - start
            self._cache[key] = r
        return self._cache[key]


@pytest.fixture(scope="session")
def curves():
    return _Curves()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
