import re

import pytest

from qdcascade import build_elementary_ops, build_generator, build_kernel, default_params
from qdcascade.operators import HilbertLayout


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # one verdict line per numbered acceptance check, whatever pytest captured
    verdicts = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", "call") != "call" and outcome != "error":
                continue
            m = re.search(r"test_criterion_(\d+)", getattr(rep, "nodeid", ""))
            if m:
                n = int(m.group(1))
                verdicts[n] = verdicts.get(n, True) and outcome == "passed"
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for n in sorted(verdicts):
            word = "PASS" if verdicts[n] else "FAIL"
            terminalreporter.write_line(f"criterion {n}: {word}")


@pytest.fixture(scope="session")
def defaults():
    return default_params()


@pytest.fixture(scope="session")
def kernel4(defaults):
    # 4 K phonon kernel at default coupling; shared because tabulation is slow
    return build_kernel(defaults)


@pytest.fixture(scope="session")
def ops2():
    return build_elementary_ops(HilbertLayout(2))


@pytest.fixture(scope="session")
def gen4(defaults, kernel4, ops2):
    return build_generator(defaults, kernel4, ops=ops2)
