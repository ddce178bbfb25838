import pathlib

import pytest

_ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def criterion_line():
    """Record one pass/fail line, echoed after the test summary."""
    return _ACCEPTANCE_LINES.append


@pytest.fixture(scope="session")
def repo_root():
    return pathlib.Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def configs_dir(repo_root):
    return repo_root / "configs"


@pytest.fixture
def run_cli(capsys):
    """Invoke the CLI entry point in-process; returns (exit, stdout, stderr)."""
    from metriplectic.cli import main

    def run(*argv):
        try:
            code = main(list(argv))
        except SystemExit as exc:  # argparse usage errors
            code = exc.code
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return run
