import numpy as np
import pytest
from hypothesis import settings

from benjamin_lab.spectral import Grid1D

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def grid():
    return Grid1D(256, 40.0)


def random_field(grid, rng, decay=True):
    """Smooth random field: a few Gaussian bumps (decaying) or a random mode sum."""
    x = grid.x
    if decay:
        out = np.zeros_like(x)
        for _ in range(4):
            c, a, w = rng.uniform(-6, 6), rng.normal(), rng.uniform(0.8, 2.0)
            out += a * np.exp(-((x - c) / w) ** 2)
        return grid.field(out)
    spec = np.fft.fft(rng.normal(size=grid.n)) * np.exp(-0.05 * np.abs(grid.wavenumbers))
    spec[grid.n // 2] = 0.0  # no content in the unpaired Nyquist mode
    return grid.field(np.fft.ifft(spec).real)


# one summary line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][1:])):
            terminalreporter.write_line(line)
