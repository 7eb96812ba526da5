import pytest


@pytest.fixture
def report(capsys):
    """Print an acceptance verdict line straight to the terminal, bypassing capture."""

    def emit(label: str, ok: bool, detail: str = ""):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {label}: {detail}")
        return ok

    return emit
