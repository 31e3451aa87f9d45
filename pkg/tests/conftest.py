import numpy as np
import pytest

from holosec.channel import build_lattice, spectral_model
from holosec.geometry import ArrayGeometry


def riemann_variances(geom: ArrayGeometry, n: int = 2000) -> np.ndarray:
    """Brute-force cell powers: midpoint sum over the hemisphere in (polar, azimuth).

    In these coordinates the power density is sin(polar), so no singularity is
    left and the only error comes from cell-edge quantization.
    """
    lx, ly = geom.aperture
    lat = build_lattice(geom)
    h1 = (np.pi / 2) / n
    h2 = 2 * np.pi / n
    polar = (np.arange(n) + 0.5) * h1
    azim = (np.arange(n) + 0.5) * h2
    P, T = np.meshgrid(polar, azim, indexing="ij")
    x = np.sin(P) * np.cos(T)
    y = np.sin(P) * np.sin(T)
    w = np.sin(P) * h1 * h2 / (4 * np.pi)
    ix = np.floor(x * lx).astype(int) + lat.m_x
    iy = np.floor(y * ly).astype(int) + lat.m_y
    out = np.zeros((2 * lat.m_y, 2 * lat.m_x))
    np.add.at(out, (iy.ravel(), ix.ravel()), w.ravel())
    return out.ravel()


@pytest.fixture(scope="session")
def default_models():
    alice = spectral_model(ArrayGeometry(20, 20, 0.25))
    bob = spectral_model(ArrayGeometry(10, 10, 0.25))
    eve = spectral_model(ArrayGeometry(10, 10, 0.25))
    return alice, bob, eve


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record():
    """Log one PASS/FAIL line per acceptance criterion; shown in the terminal summary."""

    def _record(label: str, passed: bool, detail: str) -> bool:
        line = f"{'PASS' if passed else 'FAIL'}  {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
