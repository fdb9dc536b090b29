import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_hermitian(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return a + a.conj().T


def random_lags(rng, n, m):
    """Lag array with the Hermitian symmetry u[-p, -q] = conj(u[p, q])."""
    from sparseisar.toeplitz import ToeplitzParam

    raw = rng.standard_normal((2 * n - 1, 2 * m - 1)) + 1j * rng.standard_normal((2 * n - 1, 2 * m - 1))
    return ToeplitzParam(0.5 * (raw + raw[::-1, ::-1].conj()))


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE = {}


def record(number, passed, detail):
    ACCEPTANCE[number] = (passed, detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} ({detail})")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} ({detail})")
