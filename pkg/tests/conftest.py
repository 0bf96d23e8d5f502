import pytest

# criterion number -> (passed, description)
ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Declare which acceptance criterion a test decides, for the summary."""
    declared = []
    yield lambda number, description: declared.append((number, description))
    rep = getattr(request.node, "rep_call", None)
    for number, description in declared:
        ACCEPTANCE[number] = (rep is not None and rep.passed, description)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, description = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {description}")
