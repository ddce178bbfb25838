"""Verification harness: reproducibility, case generation, and honesty."""

import math

import numpy as np
import pytest

from metriplectic import (IdealGasEnergy, StateSimple, UnsupportedSuite,
                          builtin_chemical, builtin_piston,
                          builtin_rigid_body_thermo, builtin_two_pistons,
                          run_suite)
from metriplectic.prng import SplitMix64
from metriplectic.verify import TOLERANCES, fd_variant, random_observable

# ---------------------------------------------------------------------------
# the deterministic generator, checked against a from-scratch reimplementation


class ReferenceSplitMix:
    """Independent transcription of the documented update/finalize steps."""

    MASK = (1 << 64) - 1

    def __init__(self, seed):
        self.x = seed & self.MASK

    def next_u64(self):
        self.x = (self.x + 0x9E3779B97F4B7C15) & self.MASK
        z = self.x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return z ^ (z >> 31)

    def next_unit(self):
        return (self.next_u64() >> 11) * 2.0 ** -53


def test_prng_matches_reference_reimplementation():
    ours = SplitMix64(0xDEADBEEF)
    ref = ReferenceSplitMix(0xDEADBEEF)
    for _ in range(100):
        assert ours.u64() == ref.next_u64()


def test_prng_uniform_uses_top_53_bits():
    ours = SplitMix64(42)
    ref = ReferenceSplitMix(42)
    for _ in range(50):
        lo, hi = -1.5, 2.5
        assert ours.uniform(lo, hi) == lo + (hi - lo) * ref.next_unit()


def test_prng_normal_is_box_muller():
    ours = SplitMix64(7)
    ref = ReferenceSplitMix(7)
    for _ in range(20):
        u1 = 1.0 - ref.next_unit()
        u2 = ref.next_unit()
        expect = math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
        assert ours.normal() == expect


def test_random_observable_follows_documented_draw_order():
    """Coefficients are drawn constant first, then degree blocks in
    lexicographic variable order; reconstruct the degree-2 polynomial on a
    (q, p, S) state from raw reference draws and compare values."""
    like = StateSimple([0.0], [0.0], 0.0)
    obs = random_observable(7, like, degree=2)

    ref = ReferenceSplitMix(7)
    coeffs = [(-2.0 + 4.0 * ref.next_unit()) for _ in range(10)]

    def value(q, p, S):
        mono = [1.0, q, p, S, q * q, q * p, q * S, p * p, p * S, S * S]
        return sum(c * m for c, m in zip(coeffs, mono))

    rng = SplitMix64(123)
    for _ in range(10):
        q, p, S = (rng.uniform(-2, 2) for _ in range(3))
        x = StateSimple([q], [p], S)
        got = obs.value(x)
        assert abs(got - value(q, p, S)) < 1e-12


def test_random_observable_gradient_is_analytic_and_correct():
    like = StateSimple([0.0, 0.0], [0.0, 0.0], 0.0)
    rng = SplitMix64(19)
    obs = random_observable(rng, like, degree=3)
    fd = fd_variant(obs)
    assert obs.gradient is not None
    x = StateSimple([0.4, -0.7], [1.1, 0.2], 0.3)
    from metriplectic import grad_observable
    ga = grad_observable(obs, x)
    gf = grad_observable(fd, x)
    assert np.max(np.abs(ga - gf)) < 1e-7


# ---------------------------------------------------------------------------
# reports


def test_reports_are_byte_stable():
    spec = builtin_piston()
    a = run_suite("symmetry", spec, seed=5, cases=10)
    b = run_suite("symmetry", spec, seed=5, cases=10)
    assert a.to_json() == b.to_json()
    c = run_suite("symmetry", spec, seed=6, cases=10)
    assert c.to_json() != a.to_json()


def test_jobs_do_not_change_the_report():
    spec = builtin_chemical()
    solo = run_suite("equivalence", spec, seed=2, cases=12, jobs=1)
    threaded = run_suite("equivalence", spec, seed=2, cases=12, jobs=3)
    assert solo.to_json() == threaded.to_json()


def test_wall_time_not_serialized():
    spec = builtin_piston()
    rep = run_suite("kn_agreement", spec, seed=1, cases=5)
    assert rep.wall_time > 0.0
    assert "wall_time" not in rep.to_json()


def test_suite_applicability_is_enforced():
    fluid_free = builtin_rigid_body_thermo()
    with pytest.raises(UnsupportedSuite):
        run_suite("jacobi", fluid_free, cases=3)
    with pytest.raises(UnsupportedSuite):
        run_suite("kn_agreement", builtin_two_pistons(), cases=3)
    with pytest.raises(UnsupportedSuite):
        run_suite("no_such_suite", builtin_piston(), cases=3)


# ---------------------------------------------------------------------------
# the harness must catch planted violations


def test_planted_negative_friction_fails_conservation():
    spoiled = builtin_piston(lam=-0.5, dissipative=False,
                             eos=IdealGasEnergy(U0=2.0))
    rep = run_suite("conservation", spoiled, seed=0, cases=10)
    assert not rep.passed
    # the failure shows up exactly where it should: entropy floors break
    # while energy accounting stays intact
    assert rep.violations["entropy_rate_floor"] > TOLERANCES["entropy_rate_floor"]
    assert rep.violations["energy_rate"] <= TOLERANCES["energy_rate"]


def test_clean_builtins_pass_their_suites():
    for spec, suites in (
            (builtin_piston(), ("symmetry", "equivalence", "conservation",
                                "jacobi", "kn_agreement")),
            (builtin_two_pistons(), ("symmetry", "equivalence")),
            (builtin_chemical(), ("equivalence", "conservation")),
            (builtin_rigid_body_thermo(), ("symmetry", "equivalence"))):
        for suite in suites:
            rep = run_suite(suite, spec, seed=4, cases=8)
            assert rep.passed, (spec.name, suite, rep.violations)
