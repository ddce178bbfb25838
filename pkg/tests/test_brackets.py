"""Bracket algebra against hand-computed values.

Every expected number below is worked out in a comment from the defining
formula; none are transcribed from program output.
"""

import numpy as np
import pytest

from metriplectic import (DegenerateK, IdealGasEnergy, LinearEntropyEnergy,
                          Observable, StateDiscrete, StateLie, StateSimple,
                          TwoPistonGeometry, builtin_chemical, builtin_piston,
                          builtin_rigid_body_thermo, builtin_two_pistons,
                          kn_product, lie_poisson, metric4_discrete_friction,
                          metric4_ep, metric4_first_form,
                          metric4_no_symplectic, metric4_symmetric_form,
                          metric4_transfer, poisson_canonical, reduce_to_2)
from metriplectic.brackets import SymTensor2Field
from metriplectic.prng import SplitMix64
from metriplectic.states import GradientTable
from metriplectic.verify import random_observable


def obs_simple(value, gradient, name=""):
    return Observable(arity=StateSimple, value=value,
                      gradient=gradient, name=name)


# ---------------------------------------------------------------------------
# canonical Poisson bracket


def test_canonical_bracket_of_conjugate_pair():
    # {q, p} = 1 at any state
    q_obs = obs_simple(lambda x: x.q[0], lambda x: np.array([1.0, 0.0, 0.0]))
    p_obs = obs_simple(lambda x: x.p[0], lambda x: np.array([0.0, 1.0, 0.0]))
    x = StateSimple([0.3], [-1.7], 0.9)
    assert poisson_canonical(q_obs, p_obs, x) == 1.0
    assert poisson_canonical(p_obs, q_obs, x) == -1.0


def test_canonical_bracket_hand_value():
    # F = 3q, G = -p: {F, G} = dF/dq * dG/dp - dF/dp * dG/dq = 3 * (-1) = -3
    F = obs_simple(lambda x: 3.0 * x.q[0], lambda x: np.array([3.0, 0.0, 0.0]))
    G = obs_simple(lambda x: -x.p[0], lambda x: np.array([0.0, -1.0, 0.0]))
    x = StateSimple([2.0], [5.0], 0.0)
    assert poisson_canonical(F, G, x) == -3.0


def test_canonical_bracket_ignores_entropy_slot():
    # S enters no symplectic pairing, so {F, S} = 0 for every F
    S_obs = obs_simple(lambda x: x.S, lambda x: np.array([0.0, 0.0, 1.0]))
    rng = SplitMix64(13)
    x = StateSimple([0.5], [1.5], -0.2)
    for _ in range(5):
        F = random_observable(rng, x)
        assert poisson_canonical(F, S_obs, x) == 0.0
        assert poisson_canonical(S_obs, F, x) == 0.0


def test_canonical_antisymmetry_is_bitwise():
    rng = SplitMix64(17)
    x = StateSimple([0.4, -1.0], [2.0, 0.3], 0.6)
    for _ in range(10):
        F = random_observable(rng, x)
        G = random_observable(rng, x)
        table = GradientTable(x)
        assert poisson_canonical(F, G, x, table) == \
            -poisson_canonical(G, F, x, table)


# ---------------------------------------------------------------------------
# Kulkarni-Nomizu assembly


def stub_tensor(values, name):
    """Symmetric lookup-table kernel over observable names."""
    def ev(F, G, x, table):
        return values[frozenset((F.name, G.name))]
    return SymTensor2Field(ev, name=name)


def test_kn_product_hand_expansion():
    x = StateSimple([0.0], [0.0], 0.0)
    F, G, M, N = (obs_simple(lambda s: 0.0, lambda s: np.zeros(3), name=c)
                  for c in "FGMN")
    a = stub_tensor({frozenset("FM"): 1.0, frozenset("FN"): 0.0,
                     frozenset("GM"): 0.0, frozenset("GN"): 2.0,
                     frozenset("FG"): 5.0, frozenset("MN"): 5.0}, "a")
    b = stub_tensor({frozenset("FM"): 1.0, frozenset("FN"): 3.0,
                     frozenset("GM"): 0.0, frozenset("GN"): 1.0,
                     frozenset("FG"): 5.0, frozenset("MN"): 5.0}, "b")
    # (F,G;M,N) = a(F,M)b(G,N) - a(F,N)b(G,M) + a(G,N)b(F,M) - a(G,M)b(F,N)
    #           = 1*1        - 0*0        + 2*1        - 0*3        = 3
    bracket = kn_product(a, b)
    assert bracket(F, G, M, N, x) == 3.0


def test_kn_product_symmetries_are_bitwise():
    """Slot antisymmetries and pair exchange hold exactly, not to rounding."""
    piston = builtin_piston(eos=IdealGasEnergy(U0=2.0))
    b4 = metric4_symmetric_form(piston)
    rng = SplitMix64(23)
    x = StateSimple([1.1], [0.7], 0.2)
    quad = [random_observable(rng, x) for _ in range(4)]
    F, G, M, N = quad
    table = GradientTable(x)
    v = b4(F, G, M, N, x, table)
    assert b4(G, F, M, N, x, table) == -v
    assert b4(F, G, N, M, x, table) == -v
    assert b4(M, N, F, G, x, table) == v


# ---------------------------------------------------------------------------
# piston friction brackets


def standard_piston():
    return builtin_piston(mass=1.0, lam=1.0, eos=IdealGasEnergy(U0=2.0))


def standard_piston_state():
    # q = 1: U = 2, T = U / (n c_v) = 2; p = 3: qdot = 3, K = lam qdot^2 = 9
    return StateSimple([1.0], [3.0], 0.0)


def test_piston_entropy_production_exact():
    spec = standard_piston()
    x = standard_piston_state()
    S = spec.entropy_observable
    H = spec.hamiltonian_observable
    sym = metric4_symmetric_form(spec)
    first = metric4_first_form(spec)
    # dS/dt = (S, H; S, H) = K / T = 9 / 2
    assert sym(S, H, S, H, x) == 4.5
    assert first(S, H, S, H, x) == 4.5
    assert spec.friction_power(x) == 9.0


def test_first_form_degenerates_at_rest():
    spec = standard_piston()
    x = StateSimple([1.0], [0.0], 0.0)
    S = spec.entropy_observable
    H = spec.hamiltonian_observable
    assert metric4_symmetric_form(spec)(S, H, S, H, x) == 0.0
    with pytest.raises(DegenerateK):
        metric4_first_form(spec)(S, H, S, H, x)


def test_first_and_symmetric_forms_agree_at_the_energy():
    """Once H sits in the paired slots the rank-one form collapses onto the
    kernel form; away from it the two brackets are allowed to differ."""
    spec = standard_piston()
    sym = metric4_symmetric_form(spec)
    first = metric4_first_form(spec)
    H = spec.hamiltonian_observable
    S = spec.entropy_observable
    rng = SplitMix64(31)
    for _ in range(20):
        x = spec.sample_state(rng)
        if abs(spec.friction_power(x)) < 1e-6:
            continue
        table = GradientTable(x)
        for F in (S, random_observable(rng, x)):
            a = first(F, H, S, H, x, table)
            b = sym(F, H, S, H, x, table)
            assert abs(a - b) <= 1e-12 * max(1.0, abs(b))


def test_frictionless_piston_produces_no_entropy():
    spec = builtin_piston(lam=0.0, eos=IdealGasEnergy(U0=2.0))
    x = standard_piston_state()
    S = spec.entropy_observable
    H = spec.hamiltonian_observable
    assert metric4_symmetric_form(spec)(S, H, S, H, x) == 0.0


# ---------------------------------------------------------------------------
# coupled pistons: per-subsystem friction plus heat transfer


def standard_pair():
    # at x = 1 with length 2: U1 = 1 so T1 = 1, U2 = 2 so T2 = 2
    return builtin_two_pistons(kappa12=3.0,
                               eoses=(IdealGasEnergy(U0=1.0),
                                      IdealGasEnergy(U0=2.0)),
                               geometry=TwoPistonGeometry(length=2.0))


def test_transfer_bracket_total_entropy_rate():
    spec = standard_pair()
    x = StateDiscrete([1.0], [0.0], [0.0, 0.0])
    S = spec.entropy_observable
    H = spec.hamiltonian_observable
    # kappa (T1 - T2)^2 / (T1 T2) = 3 * 1 / 2
    assert metric4_transfer(spec)(S, H, S, H, x) == 1.5
    # piston at rest: the friction bracket contributes nothing
    assert metric4_discrete_friction(spec)(S, H, S, H, x) == 0.0


def test_transfer_bracket_vanishes_at_equal_temperatures():
    spec = builtin_two_pistons(kappa12=3.0,
                               eoses=(IdealGasEnergy(U0=1.0),
                                      IdealGasEnergy(U0=1.0)),
                               geometry=TwoPistonGeometry(length=2.0))
    x = StateDiscrete([1.0], [0.5], [0.0, 0.0])
    S = spec.entropy_observable
    H = spec.hamiltonian_observable
    assert metric4_transfer(spec)(S, H, S, H, x) == 0.0


# ---------------------------------------------------------------------------
# relaxational bracket (no symplectic part)


def test_relaxational_bracket_hand_value():
    spec = builtin_chemical(Q=[[1.0]], psi_star=[0.0], lam=[[2.0]],
                            entropy_energy=LinearEntropyEnergy(1.0))
    x = spec.make_state([4.0], 0.0)
    S = spec.entropy_observable
    H = spec.hamiltonian_observable
    # g = Q (psi - psi*) = 4, Gamma = 1/2, T = 1:
    # (S, H; S, H) = g Gamma g / T = 8
    assert metric4_no_symplectic(spec)(S, H, S, H, x) == 8.0
    # (H, H; ., .) dies by antisymmetry
    assert metric4_no_symplectic(spec)(H, H, S, H, x) == 0.0


# ---------------------------------------------------------------------------
# reduced rigid body with internal heat


def test_ep_bracket_entropy_rate():
    spec = builtin_rigid_body_thermo(inertia=np.diag([1.0, 2.0, 3.0]),
                                     lam=np.eye(3),
                                     entropy_energy=LinearEntropyEnergy(1.0))
    x = StateLie([0.0, 1.0, 1.0], s=0.0)
    S = spec.entropy_observable
    H = spec.hamiltonian_observable
    # xi = I^-1 mu = (0, 1/2, 1/3); dS/dt = xi . Lam xi / T = 1/4 + 1/9 = 13/36
    got = metric4_ep(spec)(S, H, S, H, x)
    assert abs(got - 13.0 / 36.0) < 1e-15


def test_lie_poisson_so3_convention():
    spec = builtin_rigid_body_thermo()
    bracket = lie_poisson(spec)
    mu1 = Observable(arity=StateLie, value=lambda x: x.mu[0],
                     gradient=lambda x: np.array([1.0, 0.0, 0.0, 0.0]))
    mu2 = Observable(arity=StateLie, value=lambda x: x.mu[1],
                     gradient=lambda x: np.array([0.0, 1.0, 0.0, 0.0]))
    x = StateLie([0.2, -0.5, 1.25], s=0.1)
    # {f, g} = <mu, [dg, df]>: for coordinates this gives {mu_1, mu_2} = -mu_3
    assert bracket(mu1, mu2, x) == -1.25
    assert bracket(mu2, mu1, x) == 1.25


# ---------------------------------------------------------------------------
# pinning the energy slots


def test_reduce_to_2_is_partial_evaluation():
    spec = standard_piston()
    b4 = metric4_symmetric_form(spec)
    H = spec.hamiltonian_observable
    S = spec.entropy_observable
    b2 = reduce_to_2(b4, H)
    rng = SplitMix64(37)
    for _ in range(5):
        x = spec.sample_state(rng)
        F = random_observable(rng, x)
        table = GradientTable(x)
        assert b2(F, S, x, table) == b4(F, H, S, H, x, table)
        # the induced 2-bracket is symmetric on (F, S) up to rounding
        assert abs(b2(F, S, x, table) - b2(S, F, x, table)) < 1e-14


def test_brackets_reject_nonpositive_temperature():
    from metriplectic.errors import NonpositiveTemperature

    class ColdSpec:
        # minimal duck-typed system whose temperature has gone unphysical
        name = "cold"

        def temperature(self, x):
            return -1.0

        def friction_matrix(self, x):
            return np.eye(1)

    b4 = metric4_symmetric_form(ColdSpec())
    x = StateSimple([1.0], [1.0], 0.0)
    quad = [obs_simple(lambda s: s.S, lambda s: np.array([0.0, 0.0, 1.0]))
            for _ in range(4)]
    with pytest.raises(NonpositiveTemperature):
        b4(*quad, x)
