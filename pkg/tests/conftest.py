import numpy as np
import pytest


def random_hpd(rng, n, cond=None, size=None):
    """Random HPD matrix (or stack) with eigenvalues log-uniform in [1, cond]."""
    shape = () if size is None else tuple(np.atleast_1d(size))
    Z = rng.standard_normal(shape + (n, n)) + 1j * rng.standard_normal(shape + (n, n))
    Q, _ = np.linalg.qr(Z)
    if cond is None:
        cond = 10.0
    lam = np.exp(rng.uniform(0, np.log(cond), size=shape + (n,)))
    A = (Q * lam[..., None, :]) @ np.conj(np.swapaxes(Q, -1, -2))
    return (A + np.conj(np.swapaxes(A, -1, -2))) / 2


def random_hermitian(rng, n):
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (Z + Z.conj().T) / 2


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_REPORT = []


@pytest.fixture(scope="session")
def acceptance_report():
    """Collects one summary line per acceptance criterion."""
    return _REPORT


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_REPORT, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
