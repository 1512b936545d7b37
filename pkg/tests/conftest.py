import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("wco", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("wco")


def ball_points(rng, n, N, radius=0.9):
    z = rng.normal(size=(n, N)) + 1j * rng.normal(size=(n, N))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return z * radius * rng.uniform(0, 1, size=(n, 1)) ** (1.0 / (2 * N))


def random_unitary(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
