import time

import pytest

from delone6 import GeneratorSpec, analyze, generate
from helpers import ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def _sample(kind, extent, **params):
    return generate(GeneratorSpec(kind, extent, {k: str(v) for k, v in params.items()}))


@pytest.fixture(scope="session")
def cubic20():
    return _sample("cubic", 20)


@pytest.fixture(scope="session")
def cubic20_analysis(cubic20):
    t0 = time.perf_counter()
    an = analyze(cubic20.pset, 1e-3)
    an.elapsed = time.perf_counter() - t0
    return an


@pytest.fixture(scope="session")
def cubic12():
    return _sample("cubic", 12, margin=3)


@pytest.fixture(scope="session")
def cubic12_analysis(cubic12):
    return analyze(cubic12.pset)


@pytest.fixture(scope="session")
def hexagonal():
    return _sample("hexagonal", 12, margin=3)


@pytest.fixture(scope="session")
def bcc():
    return _sample("bcc", 9, margin=2.5)


@pytest.fixture(scope="session")
def fcc():
    return _sample("fcc", 8, margin=2.5)


@pytest.fixture(scope="session")
def perturbed():
    return _sample("perturbed", 12, base="cubic", delta=0.05, seed=7, margin=3)


@pytest.fixture(scope="session")
def quasicrystal():
    return _sample("cut_project_icosahedral", 12, window_radius=0.85, margin=2.8)


@pytest.fixture(scope="session")
def heptagonal():
    return _sample("heptagonal_column", 16)


@pytest.fixture(scope="session")
def heptagonal_wide():
    # Wide enough for the chain-safe window (15.4R + 2R on every side).
    return _sample("heptagonal_column", 36)


@pytest.fixture(scope="session")
def analyses(cubic20_analysis, hexagonal, bcc, fcc, perturbed, quasicrystal):
    """Analyses of every shipped fixture, keyed by name."""
    return {
        "cubic": cubic20_analysis,
        "hexagonal": analyze(hexagonal.pset),
        "bcc": analyze(bcc.pset),
        "fcc": analyze(fcc.pset),
        "perturbed": analyze(perturbed.pset),
        "quasicrystal": analyze(quasicrystal.pset),
    }
