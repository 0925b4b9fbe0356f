import math

import numpy as np
import pytest

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (passed, detail)
    print(f"ACCEPTANCE criterion {criterion}: {'PASS' if passed else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if passed else 'FAIL'} - {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_stable(rng, d=2, scale=1.0):
    """Random complex matrix with all eigenvalues in the right half plane."""
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    shift = -np.linalg.eigvals(a).real.min() + rng.uniform(0.05, 1.0)
    return scale * (a + shift * np.eye(d))


TWO_PI = 2 * math.pi
