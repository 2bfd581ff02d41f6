from __future__ import annotations

import numpy as np
import pytest

from ipd_lab.game import CONVENTIONAL, normalize

F = normalize(CONVENTIONAL)

_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_acceptance(number: int, ok: bool, detail: str) -> None:
    _ACCEPTANCE[number] = (bool(ok), detail)


@pytest.fixture
def F_params():
    return F


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_params(rng, n=None):
    """Random valid raw payoffs ``T > R > P > S`` with ``2R > T + S``."""
    size = n if n is not None else ()
    S = rng.uniform(-5, 5, size)
    P = S + rng.uniform(0.01, 5, size)
    R = P + rng.uniform(0.01, 5, size)
    T = R + rng.uniform(0.01, 0.99, size) * (R - S)
    return np.stack([T, R, P, S], axis=-1)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
