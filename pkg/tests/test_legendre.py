"""Lagrangian to Hamiltonian transform: envelope identities and inversion."""

import numpy as np
import pytest

from metriplectic import LagrangianSide, to_hamiltonian
from metriplectic.errors import LegendreInversionFailure
from metriplectic.legendre import momentum
from metriplectic.prng import SplitMix64


def quadratic_lagrangian(m=2.0, k=3.0):
    # L = m qdot^2 / 2 - k q^2 / 2 - T0 S with d = 1
    return LagrangianSide(
        L=lambda q, qdot, S: 0.5 * m * qdot[0] ** 2 - 0.5 * k * q[0] ** 2 - S,
        dL_dq=lambda q, qdot, S: np.array([-k * q[0]]),
        dL_dqdot=lambda q, qdot, S: np.array([m * qdot[0]]),
        dL_dS=lambda q, qdot, S: -1.0,
        kinetic_form=np.array([[m]]))


def test_quadratic_transform_is_exact():
    m, k = 2.0, 3.0
    ham = to_hamiltonian(quadratic_lagrangian(m, k))
    q = np.array([1.5])
    p = np.array([-4.0])
    S = 0.7
    # H = p^2/(2m) + k q^2/2 + S
    assert ham.H(q, p, S) == pytest.approx(p[0] ** 2 / (2 * m)
                                           + 0.5 * k * q[0] ** 2 + S, abs=1e-15)
    assert np.allclose(ham.dH_dp(q, p, S), p / m, atol=1e-15)
    assert np.allclose(ham.dH_dq(q, p, S), k * q, atol=1e-15)
    assert ham.dH_dS(q, p, S) == pytest.approx(1.0, abs=1e-15)


def test_momentum_matches_velocity_derivative():
    lag = quadratic_lagrangian(m=2.0)
    p = momentum(lag, np.array([0.0]), np.array([3.0]), 0.0)
    assert np.array_equal(p, np.array([6.0]))


def test_envelope_identities_hold_off_the_quadratic_case():
    """A stiffened kinetic term forces the Newton branch of the inversion."""
    # L = qdot^2/2 + qdot^4/4 so p = qdot + qdot^3, strictly monotone
    lag = LagrangianSide(
        L=lambda q, qdot, S: 0.5 * qdot[0] ** 2 + 0.25 * qdot[0] ** 4
            - q[0] * S,
        dL_dq=lambda q, qdot, S: np.array([-S]),
        dL_dqdot=lambda q, qdot, S: np.array([qdot[0] + qdot[0] ** 3]),
        dL_dS=lambda q, qdot, S: -q[0])
    ham = to_hamiltonian(lag)
    rng = SplitMix64(21)
    for _ in range(10):
        q = np.array([rng.uniform(-1, 1)])
        p = np.array([rng.uniform(0.5, 3.0)])
        S = rng.uniform(-1, 1)
        qdot = np.asarray(ham.dH_dp(q, p, S))
        # the recovered velocity solves the momentum relation
        assert abs(qdot[0] + qdot[0] ** 3 - p[0]) < 1e-9
        # H = p qdot* - L(qdot*)
        expect = (p[0] * qdot[0] - 0.5 * qdot[0] ** 2
                  - 0.25 * qdot[0] ** 4 + q[0] * S)
        assert abs(ham.H(q, p, S) - expect) < 1e-12
        assert abs(ham.dH_dq(q, p, S)[0] - S) < 1e-12
        assert abs(float(ham.dH_dS(q, p, S)) - q[0]) < 1e-12


def test_unreachable_momentum_raises():
    # dL/dqdot = sin(qdot) is bounded, so p = 3 has no preimage
    lag = LagrangianSide(
        L=lambda q, qdot, S: -np.cos(qdot[0]),
        dL_dq=lambda q, qdot, S: np.array([0.0]),
        dL_dqdot=lambda q, qdot, S: np.array([np.sin(qdot[0])]),
        dL_dS=lambda q, qdot, S: 0.0)
    ham = to_hamiltonian(lag)
    with pytest.raises(LegendreInversionFailure):
        ham.H(np.array([0.0]), np.array([3.0]), 0.0)


def test_callable_kinetic_form_inverts_linearly():
    # M(q) = diag(1 + q0^2, 2): position-dependent mass, still a linear solve
    def mform(q, S):
        return np.diag([1.0 + q[0] ** 2, 2.0])

    lag = LagrangianSide(
        L=lambda q, qdot, S: 0.5 * float(qdot @ (mform(q, S) @ qdot)),
        dL_dq=lambda q, qdot, S: np.array([q[0] * qdot[0] ** 2, 0.0]),
        dL_dqdot=lambda q, qdot, S: mform(q, S) @ qdot,
        dL_dS=lambda q, qdot, S: 0.0,
        kinetic_form=mform)
    ham = to_hamiltonian(lag)
    q = np.array([2.0, 0.0])
    p = np.array([10.0, 3.0])
    qdot = np.asarray(ham.dH_dp(q, p, 0.0))
    assert np.allclose(qdot, [10.0 / 5.0, 1.5], atol=1e-12)
