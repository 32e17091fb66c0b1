import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from mpacsync.metrics import (
    COHERENT_GAIN_ETA_DEG,
    check_convergence,
    deg2rad,
    interval_phase,
    rad2deg,
    sigma_phi,
    total_phase_error,
)

finite = st.floats(-1e6, 1e6, allow_nan=False)


def two_pass_sd(v):
    n = len(v)
    mean = sum(v) / n
    return math.sqrt(sum((x - mean) ** 2 for x in v) / (n - 1))


def test_total_phase_error_terms():
    assert total_phase_error(0, 0, 0, 0, 1e-4) == 0
    # 2*pi*df*T - pi*T*df = pi*T*df
    assert total_phase_error(70.711, 0, 0, 0, 1e-4) == pytest.approx(0.0222145158127987870, rel=1e-12)
    assert total_phase_error(0, 0, 0, 2e-3, 1e-4) == pytest.approx(2e-3)
    assert total_phase_error(0, 10.0, 0, 0, 1e-4) == pytest.approx(2 * math.pi * 1e-3)
    assert total_phase_error(0, 0, 0.5, 0, 1e-4) == 0.5
    v = total_phase_error(np.ones(3), np.zeros(3), np.zeros(3), np.zeros(3), 1e-4)
    assert v.shape == (3,)


def test_sigma_phi_examples():
    assert sigma_phi([3.0, 3.0, 3.0]) == 0.0
    assert sigma_phi([0.0, 2.0]) == pytest.approx(math.sqrt(2), rel=1e-15)
    with pytest.raises(ValueError):
        sigma_phi([1.0])


@given(arrays(float, st.integers(2, 50), elements=finite), finite, st.floats(-100, 100))
def test_sigma_phi_properties(v, shift, scale):
    s = sigma_phi(v)
    assert s >= 0
    assert s == pytest.approx(two_pass_sd(list(v)), rel=1e-9, abs=1e-6)
    assert sigma_phi(v + shift) == pytest.approx(s, rel=1e-6, abs=1e-6)
    assert sigma_phi(scale * v) == pytest.approx(abs(scale) * s, rel=1e-9, abs=1e-6)


def test_convergence_examples():
    assert check_convergence(np.full(5, 1.3), deg2rad(1.0)).converged
    rep = check_convergence(deg2rad(np.array([0.0, 2.0])), deg2rad(1.0))
    assert not rep.converged
    assert rep.sigma_phi_deg == pytest.approx(math.sqrt(2), rel=1e-12)
    assert rep.eta_deg == pytest.approx(1.0)
    assert rep.mean_phase == pytest.approx(deg2rad(1.0))
    assert check_convergence(deg2rad(np.array([0.0, 2.0])), deg2rad(COHERENT_GAIN_ETA_DEG)).converged


@given(arrays(float, st.integers(2, 20), elements=finite), st.floats(1e-6, 1e3))
def test_report_invariant(v, eta):
    rep = check_convergence(v, eta)
    assert rep.converged == (rep.sigma_phi <= eta)
    assert rep.sigma_phi >= 0


@given(st.floats(-1e6, 1e6))
def test_degree_round_trip(x):
    assert rad2deg(deg2rad(x)) == pytest.approx(x, rel=1e-12, abs=1e-300)


def test_interval_phase_offset_cancels():
    f = np.array([10.0, 20.0, 35.0])
    t = np.array([0.1, 0.2, 0.3])
    a = sigma_phi(interval_phase(f, t, 1e-4))
    b = sigma_phi(interval_phase(f + 1e9, t, 1e-4))
    assert a == pytest.approx(b, rel=1e-6)
