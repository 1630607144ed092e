import re

import numpy as np
import pytest

from stshape.model import ALPHABET, ChannelMatrix, CodeVector


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_hpd(rng, n, floor=0.1):
    x = crandn(rng, n, n)
    return x @ x.conj().T + floor * np.eye(n)


def random_code(rng, l):
    return CodeVector(ALPHABET[rng.integers(0, 4, l)] / np.sqrt(l))


def random_channel(rng, m, n):
    return ChannelMatrix(crandn(rng, m, n))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ---- acceptance reporting -------------------------------------------------

_CRITERION = re.compile(r'test_acceptance\.py::test_criterion_(\d+)')
ACCEPTANCE = {}


def note(number, text):
    """Attach a measured value to an acceptance criterion's summary line."""
    ACCEPTANCE.setdefault(number, {'outcome': 'not run', 'notes': []})['notes'].append(text)


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    entry = ACCEPTANCE.setdefault(int(m.group(1)), {'outcome': 'not run', 'notes': []})
    if report.failed:
        entry['outcome'] = 'FAIL'
    elif report.skipped:
        entry['outcome'] = 'SKIP'
    elif report.when == 'call' and entry['outcome'] != 'FAIL':
        entry['outcome'] = 'PASS'


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section('acceptance criteria')
    for number in sorted(ACCEPTANCE):
        entry = ACCEPTANCE[number]
        detail = '; '.join(entry['notes'])
        terminalreporter.write_line(
            f"criterion {number:2d}: {entry['outcome']}" + (f"  ({detail})" if detail else ''))
