import numpy as np
import pytest

from eigensens import _backend, sdmodel

BACKENDS = [("python", _backend.python_kernels)]
if _backend.compiled_kernels is not None:
    BACKENDS.append(("cython", _backend.compiled_kernels))


@pytest.fixture(params=BACKENDS, ids=[name for name, _ in BACKENDS])
def kernels(request, monkeypatch):
    """Run a test once per available kernel backend."""
    name, mod = request.param
    from eigensens import grid, kde

    monkeypatch.setattr(kde, "kernels", mod)
    monkeypatch.setattr(grid, "kernels", mod)
    return mod


@pytest.fixture(scope="session")
def model_dataset():
    return sdmodel.generate_dataset(12000, 42)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# --- acceptance verdict lines --------------------------------------------

_VERDICTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_VERDICTS] = []


@pytest.fixture
def verdict(request, capsys):
    """Record and print one ``PASS``/``FAIL`` line for an acceptance check."""

    def emit(label: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {label:<38} {detail}"
        request.config.stash[_VERDICTS].append(line)
        with capsys.disabled():
            print("\n    " + line, end="")
        return ok

    return emit


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
