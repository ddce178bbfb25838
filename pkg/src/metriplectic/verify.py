"""Seeded property suites over the bracket and dynamics layers.

Five suites: ``symmetry`` replays the 4-bracket pair/exchange identities and
2-bracket antisymmetry on random polynomial observables; ``equivalence``
compares the two tangent assemblies state by state; ``conservation`` checks
entropy-production signs, the energy rate along the bracket flow, and a short
integrated trajectory; ``jacobi`` runs the nested finite-difference cyclic sum
for the canonical bracket; ``kn_agreement`` pits the kernel-composed simple
bracket against a literally expanded formula.

All randomness comes from SplitMix64 streams derived from (seed, case index),
so a report is a pure function of (suite, spec, seed, cases) and serializes
byte-identically across runs and across ``jobs`` settings: per-case seeds are
drawn up front and the per-invariant maxima are order-independent reductions.
"""

import itertools
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .brackets import (metric4_discrete_friction, metric4_ep,
                       metric4_first_form, metric4_no_symplectic,
                       metric4_symmetric_form, metric4_transfer,
                       lie_poisson, poisson_canonical)
from .dynamics import EngineKind, integrate, rhs_bracket, rhs_euler_lagrange
from .errors import ConfigError, UnsupportedSuite
from .prng import SplitMix64
from .states import FD_STEP_SCALE, GradientTable, Observable, StateField1D

#: invariant name -> largest acceptable violation.  Every suite reads from
#: this one table; nothing else in the module carries a tolerance literal.
TOLERANCES = {
    "identities": 1e-12,
    "identities_fd": 1e-8,
    "poisson_antisymmetry": 1e-12,
    "entropy_bracket_zero": 1e-12,
    "first_vs_symmetric": 1e-10,
    "transfer_nonnegative": 1e-12,
    "engines": 1e-10,
    "engines_fluid": 1e-8,
    "bracket_forms": 1e-10,
    "entropy_rate_floor": 1e-12,
    "bracket_entropy_floor": 1e-12,
    "energy_rate": 1e-10,
    "mass_rate": 1e-12,
    "trajectory_entropy_floor": 1e-12,
    "trajectory_energy_drift": 1e-8,
    "jacobi_cyclic_sum": 1e-5,
    "kn_vs_direct": 1e-12,
}

#: states evaluated per symmetry case (one case = one observable quadruple).
SYMMETRY_STATES = 20

#: the rank-one bracket and its comparisons only run where |K| exceeds this.
K_FILTER = 1e-6


@dataclass(frozen=True)
class VerifyReport:
    """Outcome of one suite run.  ``violations`` maps invariant name to the
    maximum observed violation; ``passed`` is the AND over the tolerance
    table.  ``wall_time`` is informational and excluded from ``to_json`` so
    the serialized report stays byte-stable."""

    suite: str
    seed: int
    cases: int
    violations: dict
    passed: bool
    wall_time: float

    def to_json(self, indent=2):
        payload = {
            "suite": self.suite,
            "seed": self.seed,
            "cases": self.cases,
            "violations": {k: float(v) for k, v in self.violations.items()},
            "pass": bool(self.passed),
        }
        return json.dumps(payload, indent=indent)


# ---------------------------------------------------------------------------
# random polynomial observables


def _monomial_exponents(nvars, degree):
    """Exponent matrix of all monomials in ``nvars`` variables with total
    degree 0..degree: the constant row first, then each degree block in
    lexicographic variable order.  Coefficient draws follow this order."""
    rows = [np.zeros(nvars, dtype=np.int64)]
    for deg in range(1, degree + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), deg):
            e = np.zeros(nvars, dtype=np.int64)
            for j in combo:
                e[j] += 1
            rows.append(e)
    return np.array(rows)


def _basis_builder(nvars, degree):
    """(exponent matrix, build) where build(rows) evaluates every monomial
    at each row by multiplying one variable onto the previous degree block;
    columns follow the _monomial_exponents order."""
    E = _monomial_exponents(nvars, degree)
    steps = []
    prev_pos = {(): 0}
    for deg in range(1, degree + 1):
        combos = list(itertools.combinations_with_replacement(range(nvars), deg))
        steps.append((np.array([prev_pos[c[:-1]] for c in combos], dtype=np.intp),
                      np.array([c[-1] for c in combos], dtype=np.intp)))
        prev_pos = {c: i for i, c in enumerate(combos)}

    def build(rows):
        cols = [np.ones((rows.shape[0], 1))]
        block = cols[0]
        for prev_index, last_var in steps:
            block = block[:, prev_index] * rows[:, last_var]
            cols.append(block)
        return np.concatenate(cols, axis=1)

    return E, build


def _derivative_matrix(E, coeff):
    """D with gradient(x) = D @ basis(x): row j sums coeff_r e_rj over the
    monomials, landing on the index of the once-reduced exponent."""
    index_of = {tuple(int(v) for v in row): i for i, row in enumerate(E)}
    nvars = E.shape[1]
    D = np.zeros((nvars, E.shape[0]))
    for r in range(E.shape[0]):
        e = E[r]
        for j in range(nvars):
            if e[j] > 0:
                t = e.copy()
                t[j] -= 1
                D[j, index_of[tuple(int(v) for v in t)]] += coeff[r] * e[j]
    return D


def _dense_polynomial(rng, arity, ncoords, degree, name):
    E, basis = _basis_builder(ncoords, degree)
    coeff = np.array([rng.uniform(-2.0, 2.0) for _ in range(E.shape[0])])
    dmat = _derivative_matrix(E, coeff)

    def value(x):
        return float(basis(x.coords()[None, :])[0] @ coeff)

    def gradient(x):
        return dmat @ basis(x.coords()[None, :])[0]

    def value_batch(rows):
        return basis(rows) @ coeff

    obs = Observable(arity=arity, value=value, gradient=gradient, name=name)
    object.__setattr__(obs, "batch_value", value_batch)
    return obs


def _cellwise_polynomial(rng, ncells, degree, name):
    """Grid functional sum_i phi(m_i, rho_i, s_i) with one random cubic phi
    shared by all cells; the analytic gradient is phi' slot by slot."""
    E, basis = _basis_builder(3, degree)
    coeff = np.array([rng.uniform(-2.0, 2.0) for _ in range(E.shape[0])])
    dmat = _derivative_matrix(E, coeff)
    n = ncells

    def cells_of(x):
        return np.stack([x.m, x.rho, x.s], axis=1)

    def value(x):
        return float(np.sum(basis(cells_of(x)) @ coeff))

    def gradient(x):
        slots = basis(cells_of(x)) @ dmat.T
        return slots.T.reshape(3 * n)

    def value_batch(rows):
        m = rows.shape[0]
        cells = rows.reshape(m, 3, n).transpose(0, 2, 1).reshape(m * n, 3)
        return (basis(cells) @ coeff).reshape(m, n).sum(axis=1)

    obs = Observable(arity=StateField1D, value=value, gradient=gradient,
                     name=name)
    object.__setattr__(obs, "batch_value", value_batch)
    return obs


def random_observable(seed, like, degree=3):
    """Random polynomial observable on the state class of ``like``.

    ``seed`` is an integer or a live SplitMix64 stream; coefficients are
    uniform in [-2, 2], drawn in the documented monomial enumeration order,
    so any faithful reimplementation of the generator reproduces the same
    polynomial.  Field states get a shared per-cell polynomial instead of a
    dense one (3n coordinates would need ~(3n)^3 monomials).
    """
    if not 0 <= degree <= 3:
        raise ConfigError("observable degree must be between 0 and 3")
    rng = seed if isinstance(seed, SplitMix64) else SplitMix64(seed)
    if isinstance(like, StateField1D):
        return _cellwise_polynomial(rng, like.n, degree, "cellpoly%d" % degree)
    return _dense_polynomial(rng, type(like), like.ncoords, degree,
                             "poly%d" % degree)


def fd_variant(obs):
    """The same observable with its analytic gradient replaced by central
    finite differences (step eps^(1/3) max(1, |x_i|)), batched through the
    polynomial's vectorized evaluator when it has one."""
    batch = getattr(obs, "batch_value", None)
    name = obs.name + "~fd"
    if batch is None:
        return Observable(arity=obs.arity, value=obs.value, gradient=None,
                          name=name)

    def grad(x):
        flat = x.coords()
        c = flat.size
        h = FD_STEP_SCALE * np.maximum(1.0, np.abs(flat))
        rows = np.repeat(flat[None, :], 2 * c, axis=0)
        idx = np.arange(c)
        rows[idx, idx] += h
        rows[c + idx, idx] -= h
        vals = batch(rows)
        return (vals[:c] - vals[c:]) / (2.0 * h)

    return Observable(arity=obs.arity, value=obs.value, gradient=grad,
                      name=name)


# ---------------------------------------------------------------------------
# per-spec plumbing


def _spec_cache(spec, key, build):
    store = getattr(spec, key, None)
    if store is None:
        store = build()
        object.__setattr__(spec, key, store)
    return store


def _metric_brackets(spec):
    """Labeled dissipative 4-brackets applicable to the spec."""
    def build():
        kind = spec.kind
        if kind == "simple":
            return (("symmetric", metric4_symmetric_form(spec)),)
        if kind == "discrete":
            return (("friction", metric4_discrete_friction(spec)),
                    ("transfer", metric4_transfer(spec)))
        if kind == "no_symplectic":
            return (("no_symplectic", metric4_no_symplectic(spec)),)
        if kind == "lie":
            return (("ep", metric4_ep(spec)),)
        if kind == "fluid":
            return (("visc", spec.visc4), ("heat", spec.heat4))
        raise UnsupportedSuite("no dissipative brackets for %r" % kind)
    return _spec_cache(spec, "_verify_metric_brackets", build)


def _poisson_for(spec):
    kind = spec.kind
    if kind in ("simple", "discrete"):
        return poisson_canonical
    if kind == "lie":
        return _spec_cache(spec, "_verify_lie_poisson", lambda: lie_poisson(spec))
    if kind == "fluid":
        return spec.poisson2
    return None


def _entropy_is_casimir(spec):
    sig = getattr(spec, "s_action", None)
    return sig is None or not np.any(np.asarray(sig) != 0.0)


def _state_with_live_friction(spec, rng, x):
    while abs(spec.friction_power(x)) <= K_FILTER:
        x = spec.sample_state(rng)
    return x


# ---------------------------------------------------------------------------
# case kernels


def _identity_violation(b4, quad, x, table):
    """Max relative violation of the three defining symmetries at one state:
    antisymmetry in the first pair, in the second pair, and pair exchange."""
    F, G, M, N = quad
    v1 = b4(F, G, M, N, x, table)
    v2 = b4(G, F, M, N, x, table)
    v3 = b4(F, G, N, M, x, table)
    v4 = b4(M, N, F, G, x, table)
    denom = 1.0 + max(abs(v1), abs(v2), abs(v3), abs(v4))
    return max(abs(v1 + v2), abs(v1 + v3), abs(v1 - v4)) / denom


def _antisym_violation(b2, F, G, x, table):
    u = b2(F, G, x, table)
    w = b2(G, F, x, table)
    return abs(u + w) / (1.0 + max(abs(u), abs(w)))


def _case_symmetry(spec, case_seed):
    rng = SplitMix64(case_seed)
    template = spec.sample_state(rng)
    quad = tuple(random_observable(rng, template) for _ in range(4))
    quad_fd = tuple(fd_variant(o) for o in quad)
    states = [template] + [spec.sample_state(rng)
                           for _ in range(SYMMETRY_STATES - 1)]
    brackets = _metric_brackets(spec)
    poisson = _poisson_for(spec)
    H = spec.hamiltonian_observable
    S = spec.entropy_observable
    kind = spec.kind

    out = {"identities": 0.0, "identities_fd": 0.0}
    if poisson is not None:
        out["poisson_antisymmetry"] = 0.0
        if _entropy_is_casimir(spec):
            out["entropy_bracket_zero"] = 0.0
    if kind == "simple":
        out["first_vs_symmetric"] = 0.0
        first = _spec_cache(spec, "_verify_first_form",
                            lambda: metric4_first_form(spec))
    else:
        first = None
    if kind == "discrete":
        out["transfer_nonnegative"] = 0.0
        transfer = dict(brackets)["transfer"]

    for x in states:
        table = GradientTable(x)
        for _label, b4 in brackets:
            out["identities"] = max(
                out["identities"], _identity_violation(b4, quad, x, table))
            out["identities_fd"] = max(
                out["identities_fd"], _identity_violation(b4, quad_fd, x, table))
        if poisson is not None:
            out["poisson_antisymmetry"] = max(
                out["poisson_antisymmetry"],
                _antisym_violation(poisson, quad[0], quad[1], x, table),
                _antisym_violation(poisson, quad[2], quad[3], x, table))
            if "entropy_bracket_zero" in out:
                for X in quad:
                    v = poisson(X, S, x, table)
                    out["entropy_bracket_zero"] = max(
                        out["entropy_bracket_zero"], abs(v) / (1.0 + abs(v)))
        if kind == "discrete":
            v = transfer(S, H, S, H, x, table)
            out["transfer_nonnegative"] = max(
                out["transfer_nonnegative"], max(0.0, -v))
        if first is not None:
            xk = _state_with_live_friction(spec, rng, x)
            tk = table if xk is x else GradientTable(xk)
            out["identities"] = max(
                out["identities"], _identity_violation(first, quad, xk, tk))
            out["identities_fd"] = max(
                out["identities_fd"], _identity_violation(first, quad_fd, xk, tk))
            sym = brackets[0][1]
            for X in quad:
                vf = first(X, H, S, H, xk, tk)
                vs = sym(X, H, S, H, xk, tk)
                out["first_vs_symmetric"] = max(
                    out["first_vs_symmetric"],
                    abs(vf - vs) / (1.0 + max(abs(vf), abs(vs))))
    return out


def _case_equivalence(spec, case_seed):
    rng = SplitMix64(case_seed)
    x = spec.sample_state(rng)
    el = rhs_euler_lagrange(spec, x)
    br = rhs_bracket(spec, x)
    key = "engines_fluid" if spec.kind == "fluid" else "engines"
    out = {key: float(np.max(np.abs(br - el))) / (1.0 + float(np.max(np.abs(el))))}
    if spec.kind == "simple":
        xk = _state_with_live_friction(spec, rng, x)
        bs = rhs_bracket(spec, xk, "symmetric")
        bf = rhs_bracket(spec, xk, "first")
        out["bracket_forms"] = (float(np.max(np.abs(bf - bs)))
                                / (1.0 + float(np.max(np.abs(bs)))))
    return out


def _case_conservation(spec, case_seed):
    rng = SplitMix64(case_seed)
    x = spec.sample_state(rng)
    table = GradientTable(x)
    out = {"entropy_rate_floor": max(0.0, -float(spec.entropy_rate(x)))}
    H = spec.hamiltonian_observable
    S = spec.entropy_observable
    prod = 0.0
    for _label, b4 in _metric_brackets(spec):
        prod += b4(S, H, S, H, x, table)
    out["bracket_entropy_floor"] = max(0.0, -float(prod))
    br = rhs_bracket(spec, x)
    gh = table.gradient(H)
    out["energy_rate"] = (abs(float(gh @ br))
                          / (1.0 + abs(spec.hamiltonian_value(x))))
    if spec.kind == "fluid":
        n = spec.grid.n
        out["mass_rate"] = (abs(spec.grid.dx * float(np.sum(br[n:2 * n])))
                            / (1.0 + abs(spec.total_mass(x))))
    return out


def _finalize_conservation(spec, rng):
    """One short bracket-engine run: entropy monotone, energy drift bounded."""
    x0 = spec.sample_state(rng)
    dt = 1e-4 if spec.kind == "fluid" else 1e-3
    steps = 50
    traj = integrate(spec, x0, dt, dt * steps, engine=EngineKind.bracket)
    S = traj.diagnostics["S_total"]
    H = traj.diagnostics["H"]
    drop = float(np.max(S[:-1] - S[1:]))
    return {
        "trajectory_entropy_floor":
            max(0.0, drop) / (1.0 + float(np.max(np.abs(S)))),
        "trajectory_energy_drift":
            float(np.max(np.abs(H - H[0]))) / (1.0 + abs(float(H[0]))),
    }


def _case_jacobi(spec, case_seed):
    rng = SplitMix64(case_seed)
    x = spec.sample_state(rng)
    F, G, Hb = (random_observable(rng, x, degree=2) for _ in range(3))

    def nested(A, B, C):
        inner = Observable(arity=type(x),
                           value=lambda y: poisson_canonical(B, C, y),
                           name="{%s,%s}" % (B.name, C.name))
        return poisson_canonical(A, inner, x)

    total = (nested(F, G, Hb) + nested(G, Hb, F) + nested(Hb, F, G))
    return {"jacobi_cyclic_sum": abs(float(total))}


def _direct_symmetric_expansion(sys, quad, x, table):
    # written out term by term on purpose: this is the comparison target for
    # the kernel-composed bracket, so it must share no helper with it
    F, G, M, N = quad
    T = float(sys.temperature(x))
    lam = np.asarray(sys.friction_matrix(x), dtype=float)
    pf, pg, pm, pn = (table.parts(o) for o in quad)

    def w(aa, bb):
        return float(aa.p @ (lam @ bb.p))

    return (w(pf, pm) * float(pg.S) * float(pn.S)
            - w(pf, pn) * float(pg.S) * float(pm.S)
            + w(pg, pn) * float(pf.S) * float(pm.S)
            - w(pg, pm) * float(pf.S) * float(pn.S)) / T


def _case_kn(spec, case_seed):
    rng = SplitMix64(case_seed)
    x = spec.sample_state(rng)
    quad = tuple(random_observable(rng, x) for _ in range(4))
    table = GradientTable(x)
    b4 = _metric_brackets(spec)[0][1]
    v_kn = b4(quad[0], quad[1], quad[2], quad[3], x, table)
    v_direct = _direct_symmetric_expansion(spec, quad, x, table)
    return {"kn_vs_direct": abs(v_kn - v_direct)
            / (1.0 + max(abs(v_kn), abs(v_direct)))}


# ---------------------------------------------------------------------------
# suite driver

_CASE_RUNNERS = {
    "symmetry": _case_symmetry,
    "equivalence": _case_equivalence,
    "conservation": _case_conservation,
    "jacobi": _case_jacobi,
    "kn_agreement": _case_kn,
}

_FINALIZERS = {
    "conservation": _finalize_conservation,
}

_SUPPORTED = {
    "symmetry": ("simple", "discrete", "no_symplectic", "lie", "fluid"),
    "equivalence": ("simple", "discrete", "no_symplectic", "lie", "fluid"),
    "conservation": ("simple", "discrete", "no_symplectic", "lie", "fluid"),
    "jacobi": ("simple", "discrete"),
    "kn_agreement": ("simple",),
}

SUITES = tuple(_SUPPORTED)


def run_suite(suite, spec, seed=0, cases=100, jobs=1):
    """Run one property suite against ``spec`` and return a VerifyReport.

    ``cases`` independent case streams are derived from ``seed`` up front;
    ``jobs`` > 1 shards them across threads without changing the report.
    """
    t0 = time.perf_counter()
    if suite not in _SUPPORTED:
        raise UnsupportedSuite("unknown suite %r (choose from %s)"
                               % (suite, ", ".join(SUITES)))
    kind = getattr(spec, "kind", None)
    if kind not in _SUPPORTED[suite]:
        raise UnsupportedSuite("suite %r does not apply to %r systems"
                               % (suite, kind))
    if cases < 1:
        raise ConfigError("cases must be at least 1")
    runner = _CASE_RUNNERS[suite]
    master = SplitMix64(seed)
    case_seeds = [master.u64() for _ in range(cases)]
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=int(jobs)) as pool:
            results = list(pool.map(lambda s: runner(spec, s), case_seeds))
    else:
        results = [runner(spec, s) for s in case_seeds]

    violations = {}
    for result in results:
        for k, v in result.items():
            violations[k] = max(violations.get(k, 0.0), float(v))
    finalize = _FINALIZERS.get(suite)
    if finalize is not None:
        for k, v in finalize(spec, SplitMix64(master.u64())).items():
            violations[k] = max(violations.get(k, 0.0), float(v))

    passed = all(v <= TOLERANCES[k] for k, v in violations.items())
    return VerifyReport(suite=suite, seed=int(seed), cases=int(cases),
                        violations=violations, passed=passed,
                        wall_time=time.perf_counter() - t0)
