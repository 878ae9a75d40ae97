import numpy as np
import pytest

from bsmix.model import build_dataset


@pytest.fixture
def tiny_dataset():
    X = np.column_stack([np.ones(5), [0.1, 0.4, 0.5, 0.8, 0.9]])
    return build_dataset([1.0, 0.7, 1.8, 3.5, 1.0], 1.0, X, X, x1_names=("const", "x"), x2_names=("const", "x"))


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE

    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
