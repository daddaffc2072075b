import numpy as np
import pytest

from sepcrit import numerics

# (criterion, passed, detail) rows filled in by test_acceptance.py
ACCEPTANCE_LINES: list[tuple[str, bool, str]] = []


def record_acceptance(name: str, passed: bool, detail: str) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append((name, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    n_pass = sum(p for _, p, _ in ACCEPTANCE_LINES)
    terminalreporter.write_line(f"{n_pass}/{len(ACCEPTANCE_LINES)} criteria met")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def _available_backends():
    out = ["python"]
    try:
        from sepcrit import _kernels  # noqa: F401
        out.insert(0, "compiled")
    except ImportError:
        pass
    return out


BACKENDS = _available_backends()


@pytest.fixture(params=BACKENDS)
def backend(request):
    previous = numerics.use_backend(request.param)
    yield request.param
    numerics.use_backend(previous)


def random_complex(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)
