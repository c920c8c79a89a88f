import numpy as np
import pytest

from synthaudit.table import Table


def gaussian_table(n=400, p=3, seed=0, classes=("A", "B"), shift=0.0, label="label"):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, len(classes), size=n)
    x = rng.normal(size=(n, p)) + shift * y[:, None]
    return Table.from_arrays(x, [f"x{i}" for i in range(p)], np.array(classes)[y],
                             label_name=label, categories=list(classes))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_table():
    return Table.from_columns({"dur": [1.0, 2.0, 3.0], "proto": ["tcp", "udp", "tcp"],
                               "label": ["BENIGN", "DDoS", "BENIGN"]}, label="label")


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][2:])):
            terminalreporter.write_line(line)
