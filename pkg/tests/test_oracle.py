import math

import numpy as np
import pytest

from benjamin_lab.oracle import gaussian_derivative_spectrum, linear_flow_point, periodized_linear_flow
from benjamin_lab.spectral import Grid1D, forward_transform, inverse_transform, linear_group


def test_datum_recovered_at_time_zero():
    for A, a in ((1.0, 1.0), (4.0, 2.0)):
        sp = gaussian_derivative_spectrum(A, a)
        for x in (-1.1, 0.0, 0.7, 3.0):
            exact = -2 * A * (x / a) * math.exp(-((x / a) ** 2))
            assert linear_flow_point(x, 0.0, sp, dps=15) == pytest.approx(exact, abs=1e-12)


def test_spectrum_matches_fft():
    g = Grid1D(1024, 80.0)
    F = forward_transform(g.sample(lambda x: -2 * 3 * (x / 2) * np.exp(-((x / 2) ** 2)))).coefficients
    sp = gaussian_derivative_spectrum(3.0, 2.0)
    for k in (1, 7, 20):
        assert complex(sp(g.frequencies[k])) == pytest.approx(F[k], abs=1e-10)


def test_periodized_flow_matches_spectral_solution():
    g = Grid1D(4096, 200.0)
    u = g.sample(lambda x: -2 * x * np.exp(-x**2))
    t = 1.0
    v = inverse_transform(linear_group(forward_transform(u), t)).samples
    tail = -12 * t * (-math.sqrt(math.pi)) / (2 * math.pi)
    i = 2048 + 300
    o = periodized_linear_flow(g.x[i], t, g.length, gaussian_derivative_spectrum(1.0, 1.0), tail)
    assert abs(o - v[i]) < 1e-6 * abs(v[i])
