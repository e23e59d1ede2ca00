import json
from pathlib import Path

import pytest

from regenclust import cli
from regenclust.validation import standard_models

ROOT = Path(__file__).resolve().parent.parent

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number n")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    crit = getattr(report, "criterion", None)
    if crit is None:
        return
    ok = report.outcome == "passed"
    _CRITERIA[crit] = _CRITERIA.get(crit, True) and ok


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        report.criterion = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        terminalreporter.write_line(f"criterion {n}: {'PASS' if _CRITERIA[n] else 'FAIL'}")


@pytest.fixture(scope="session")
def models():
    return standard_models()


@pytest.fixture(scope="session")
def validation_run(tmp_path_factory):
    """One run of the shipped validation config through the CLI."""
    out = tmp_path_factory.mktemp("validate") / "report.json"
    code = cli.main(["validate", str(ROOT / "configs" / "validate.cfg"), "--out", str(out)])
    return code, json.loads(out.read_text()), out
