"""Built-in thermodynamic systems and their registration contracts.

A system spec bundles the Lagrangian data (with entropy slots), the derived
Hamiltonian side, friction, and any entropy-coupling structure.  Registration
validates the algebraic preconditions once, up front: friction symmetric (and
positive semidefinite when the spec is marked dissipative), kinetic forms
positive definite, coupling matrices admissible, structure constants honestly
antisymmetric with the Jacobi identity.  Dynamics and bracket code then trust
the spec.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import legendre
from .errors import NonpositiveTemperature, SingularFrictionMatrix, SpecError
from .legendre import LagrangianSide, to_hamiltonian
from .prng import SplitMix64
from .states import Observable, StateDiscrete, StateLie, StateSimple

SYMMETRY_RTOL = 1e-12
PSD_RTOL = 1e-12
FRICTION_COND_MAX = 1e12
_REGISTRATION_SEED = 0x5EED

# ---------------------------------------------------------------------------
# energy models


@dataclass(frozen=True)
class IdealGasEnergy:
    """Internal energy of an ideal gas column behind a piston at position x.

    U(x, S) = U0 * (V0 / (A x))**(R/c_v) * exp((S - S0) / (n c_v)) with
    V = A x.  Then T = dU/dS = U / (n c_v) and p = -dU/dV = R U / (c_v A x),
    so p V = n R T holds exactly.
    """

    n_moles: float = 1.0
    c_v: float = 1.0
    gas_const: float = 1.0
    area: float = 1.0
    V0: float = 1.0
    S0: float = 0.0
    U0: float = 1.0

    def U(self, x, S):
        if x <= 0.0:
            raise ValueError("piston position must be positive, got %r" % x)
        expo = self.gas_const / self.c_v
        heat = self.n_moles * self.c_v
        return self.U0 * (self.V0 / (self.area * x)) ** expo \
            * math.exp((S - self.S0) / heat)

    def dU_dx(self, x, S):
        return -(self.gas_const / (self.c_v * x)) * self.U(x, S)

    def temperature(self, x, S):
        return self.U(x, S) / (self.n_moles * self.c_v)

    def pressure(self, x, S):
        return self.gas_const * self.U(x, S) / (self.c_v * self.area * x)


@dataclass(frozen=True)
class ExpEntropyEnergy:
    """Entropy energy e(s) = e0 exp(s / c0); temperature e(s)/c0 > 0 always."""

    e0: float = 1.0
    c0: float = 1.0

    def value(self, s):
        return self.e0 * math.exp(s / self.c0)

    def slope(self, s):
        return (self.e0 / self.c0) * math.exp(s / self.c0)


@dataclass(frozen=True)
class LinearEntropyEnergy:
    """Entropy energy e(s) = T0 s with constant temperature T0 > 0."""

    T0: float = 1.0

    def __post_init__(self):
        if not self.T0 > 0.0:
            raise SpecError("constant temperature must be positive")

    def value(self, s):
        return self.T0 * s

    def slope(self, s):
        return self.T0


# ---------------------------------------------------------------------------
# validation helpers


def _norm(mat):
    return float(np.linalg.norm(mat))


def _check_symmetric(mat, what):
    scale = max(1.0, _norm(mat))
    if _norm(mat - mat.T) > SYMMETRY_RTOL * scale:
        raise SpecError("%s is not symmetric" % what)


def _check_psd(mat, what):
    scale = max(1.0, _norm(mat))
    lo = float(np.min(np.linalg.eigvalsh(0.5 * (mat + mat.T))))
    if lo < -PSD_RTOL * scale:
        raise SpecError("%s has a negative eigenvalue %.3e" % (what, lo))


def _check_spd(mat, what):
    _check_symmetric(mat, what)
    try:
        np.linalg.cholesky(np.asarray(mat, dtype=float))
    except np.linalg.LinAlgError:
        raise SpecError("%s is not positive definite" % what)


def _constant_matrix(value, shape, what):
    mat = np.asarray(value, dtype=float)
    if mat.shape != shape:
        raise SpecError("%s must have shape %s, got %s" % (what, shape, mat.shape))
    mat = mat.copy()
    mat.setflags(write=False)
    return mat


def _as_friction_callable(lam, d, what):
    """Normalize a friction input (scalar, matrix, or callable) to a callable
    (q, qdot, S) -> (d, d) array; constants are shared read-only arrays."""
    if callable(lam):
        return lam
    mat = np.asarray(lam, dtype=float)
    if mat.ndim == 0:
        mat = mat.reshape(1, 1)
    if mat.shape != (d, d):
        raise SpecError("%s must be %dx%d, got %s" % (what, d, d, mat.shape))
    mat = mat.copy()
    mat.setflags(write=False)
    return lambda q, qdot, S: mat


# ---------------------------------------------------------------------------
# simple systems (q, p, S)


@dataclass(frozen=True, eq=False)
class SimpleSystemSpec:
    """Mechanical system with one entropy and friction force -Lam(q, qdot, S) qdot."""

    name: str
    d: int
    lagrangian: LagrangianSide
    Lambda: object
    is_admissible: object
    sample_state: object
    dissipative: bool = True
    hamiltonian: object = field(default=None)

    kind = "simple"
    state_class = StateSimple

    def __post_init__(self):
        if self.hamiltonian is None:
            object.__setattr__(self, "hamiltonian", to_hamiltonian(self.lagrangian))
        object.__setattr__(self, "Lambda",
                           _as_friction_callable(self.Lambda, self.d,
                                                 "%s friction" % self.name))
        form = self.lagrangian.kinetic_form
        if form is not None and not callable(form):
            _check_spd(np.asarray(form, dtype=float),
                       "%s kinetic form" % self.name)
        rng = SplitMix64(_REGISTRATION_SEED)
        for _ in range(10):
            x = self.sample_state(rng)
            qdot = np.array([rng.uniform(-2.0, 2.0) for _ in range(self.d)])
            lam = np.asarray(self.Lambda(x.q, qdot, x.S), dtype=float)
            _check_symmetric(lam, "%s friction" % self.name)
            if self.dissipative:
                _check_psd(lam, "%s friction" % self.name)
        ham = self.hamiltonian
        object.__setattr__(self, "hamiltonian_observable", Observable(
            arity=StateSimple,
            value=lambda x: ham.H(x.q, x.p, x.S),
            gradient=lambda x: np.concatenate([
                np.atleast_1d(ham.dH_dq(x.q, x.p, x.S)),
                np.atleast_1d(ham.dH_dp(x.q, x.p, x.S)),
                [ham.dH_dS(x.q, x.p, x.S)]]),
            name="H"))
        object.__setattr__(self, "entropy_observable", Observable(
            arity=StateSimple,
            value=lambda x: x.S,
            gradient=lambda x: np.concatenate([np.zeros(2 * x.d), [1.0]]),
            name="S"))

    def velocity(self, x):
        return self.hamiltonian.dH_dp(x.q, x.p, x.S)

    def temperature(self, x):
        return float(self.hamiltonian.dH_dS(x.q, x.p, x.S))

    def friction_matrix(self, x):
        return np.asarray(self.Lambda(x.q, self.velocity(x), x.S), dtype=float)

    def friction_force(self, x):
        return -(self.friction_matrix(x) @ self.velocity(x))

    def friction_power(self, x):
        """K = qdot' Lam qdot = -<F^fr, dH/dp>, the dissipated power."""
        qdot = self.velocity(x)
        return float(qdot @ (self.friction_matrix(x) @ qdot))

    def hamiltonian_value(self, x):
        return float(self.hamiltonian.H(x.q, x.p, x.S))

    def total_entropy(self, x):
        return float(x.S)

    def temperature_vector(self, x):
        return np.array([self.temperature(x)])

    def entropy_rate(self, x):
        T = self.temperature(x)
        if not T > 0.0:
            raise NonpositiveTemperature("%s: T = %r" % (self.name, T))
        return self.friction_power(x) / T


def builtin_piston(mass=1.0, lam=1.0, eos=None, dissipative=True):
    """Damped piston on a gas column: L = m qdot^2 / 2 - U(q, S), friction
    coefficient lam (a number or a callable lam(x, S) >= 0)."""
    if eos is None:
        eos = IdealGasEnergy()
    if not mass > 0.0:
        raise SpecError("piston mass must be positive")
    lam_fn = lam if callable(lam) else (lambda x, S, _l=float(lam): _l)
    if not callable(lam) and dissipative and lam < 0.0:
        raise SpecError("piston friction must be nonnegative")

    lagr = LagrangianSide(
        L=lambda q, qdot, S: 0.5 * mass * qdot[0] ** 2 - eos.U(q[0], S),
        dL_dq=lambda q, qdot, S: np.array([-eos.dU_dx(q[0], S)]),
        dL_dqdot=lambda q, qdot, S: np.array([mass * qdot[0]]),
        dL_dS=lambda q, qdot, S: -eos.temperature(q[0], S),
        kinetic_form=np.array([[mass]]))

    return SimpleSystemSpec(
        name="piston",
        d=1,
        lagrangian=lagr,
        Lambda=lambda q, qdot, S: np.array([[lam_fn(q[0], S)]]),
        is_admissible=lambda x: x.q[0] > 0.0,
        sample_state=lambda rng: StateSimple(
            [rng.uniform(0.5, 2.0)], [rng.uniform(-2.0, 2.0)],
            rng.uniform(-0.5, 0.5)),
        dissipative=dissipative)


# ---------------------------------------------------------------------------
# discrete collections (q, p, S_1..S_N)


@dataclass(frozen=True, eq=False)
class DiscreteSystemSpec:
    """Mechanical system coupled to N entropies: per-subsystem friction
    Lam_i(q, qdot, S) plus internal heat exchange kappa_ij >= 0."""

    name: str
    d: int
    N: int
    lagrangian: LagrangianSide
    Lambdas: object
    kappa: object
    is_admissible: object
    sample_state: object
    dissipative: bool = True
    hamiltonian: object = field(default=None)

    kind = "discrete"
    state_class = StateDiscrete

    def __post_init__(self):
        if self.hamiltonian is None:
            object.__setattr__(self, "hamiltonian", to_hamiltonian(self.lagrangian))
        lams = [_as_friction_callable(l, self.d, "%s friction %d" % (self.name, i + 1))
                for i, l in enumerate(self.Lambdas)]
        if len(lams) != self.N:
            raise SpecError("%s needs %d friction matrices, got %d"
                            % (self.name, self.N, len(lams)))
        object.__setattr__(self, "Lambdas", tuple(lams))
        kap = _constant_matrix(self.kappa, (self.N, self.N),
                               "%s heat coupling" % self.name)
        _check_symmetric(kap, "%s heat coupling" % self.name)
        if np.any(np.abs(np.diag(kap)) > 0.0):
            raise SpecError("%s heat coupling must have zero diagonal" % self.name)
        if np.any(kap < 0.0):
            raise SpecError("%s heat coupling must be nonnegative" % self.name)
        object.__setattr__(self, "kappa", kap)
        form = self.lagrangian.kinetic_form
        if form is not None and not callable(form):
            _check_spd(np.asarray(form, dtype=float), "%s kinetic form" % self.name)
        rng = SplitMix64(_REGISTRATION_SEED)
        for _ in range(10):
            x = self.sample_state(rng)
            qdot = np.array([rng.uniform(-2.0, 2.0) for _ in range(self.d)])
            for i, lam_fn in enumerate(self.Lambdas):
                lam = np.asarray(lam_fn(x.q, qdot, x.S), dtype=float)
                _check_symmetric(lam, "%s friction %d" % (self.name, i + 1))
                if self.dissipative:
                    _check_psd(lam, "%s friction %d" % (self.name, i + 1))
        ham = self.hamiltonian
        object.__setattr__(self, "hamiltonian_observable", Observable(
            arity=StateDiscrete,
            value=lambda x: ham.H(x.q, x.p, x.S),
            gradient=lambda x: np.concatenate([
                np.atleast_1d(ham.dH_dq(x.q, x.p, x.S)),
                np.atleast_1d(ham.dH_dp(x.q, x.p, x.S)),
                np.atleast_1d(ham.dH_dS(x.q, x.p, x.S))]),
            name="H"))
        object.__setattr__(self, "entropy_observable", Observable(
            arity=StateDiscrete,
            value=lambda x: float(np.sum(x.S)),
            gradient=lambda x: np.concatenate([np.zeros(2 * x.d), np.ones(x.N)]),
            name="S_total"))

    def velocity(self, x):
        return self.hamiltonian.dH_dp(x.q, x.p, x.S)

    def temperatures(self, x):
        return np.asarray(self.hamiltonian.dH_dS(x.q, x.p, x.S), dtype=float)

    def friction_matrices(self, x):
        qdot = self.velocity(x)
        return [np.asarray(l(x.q, qdot, x.S), dtype=float) for l in self.Lambdas]

    def friction_force(self, x):
        qdot = self.velocity(x)
        out = np.zeros(self.d)
        for lam in self.friction_matrices(x):
            out -= lam @ qdot
        return out

    def hamiltonian_value(self, x):
        return float(self.hamiltonian.H(x.q, x.p, x.S))

    def total_entropy(self, x):
        return float(np.sum(x.S))

    def temperature_vector(self, x):
        return self.temperatures(x)

    def entropy_rates(self, x):
        """dS_i/dt: friction deposit (1/T_i) qdot' Lam_i qdot plus heat
        exchange (1/T_i) sum_j kappa_ij (T_j - T_i)."""
        Ts = self.temperatures(x)
        if not np.all(Ts > 0.0):
            raise NonpositiveTemperature("%s: temperatures %r" % (self.name, Ts))
        qdot = self.velocity(x)
        out = np.empty(self.N)
        for i, lam in enumerate(self.friction_matrices(x)):
            out[i] = float(qdot @ (lam @ qdot)) / Ts[i]
        for i in range(self.N):
            acc = 0.0
            for j in range(self.N):
                if j != i:
                    acc += self.kappa[i, j] * (Ts[j] - Ts[i])
            out[i] += acc / Ts[i]
        return out

    def entropy_rate(self, x):
        return float(np.sum(self.entropy_rates(x)))


def heat_flux_matrix(spec_or_kappa):
    """Onsager-style exchange matrix J with J_ij = -kappa_ij off the diagonal
    and J_ii = sum_k kappa_ik, so each row sums to zero."""
    kap = np.asarray(getattr(spec_or_kappa, "kappa", spec_or_kappa), dtype=float)
    return -kap + np.diag(kap.sum(axis=1))


@dataclass(frozen=True)
class TwoPistonGeometry:
    """Shared shaft of length ``length``; cylinder i has cross-section area_i.
    The left gas column has height x, the right one length - x."""

    length: float = 2.0
    area1: float = 1.0
    area2: float = 1.0

    def __post_init__(self):
        if not self.length > 0.0:
            raise SpecError("shaft length must be positive")


def builtin_two_pistons(mass=1.0, lams=(1.0, 1.0), kappa12=1.0,
                        eoses=None, geometry=None):
    """Two gas columns sharing one piston shaft, each with its own entropy,
    friction depositing heat on both sides and direct heat exchange kappa12."""
    if geometry is None:
        geometry = TwoPistonGeometry()
    if eoses is None:
        eoses = (IdealGasEnergy(area=geometry.area1),
                 IdealGasEnergy(area=geometry.area2))
    eos1, eos2 = eoses
    if eos1.area != geometry.area1 or eos2.area != geometry.area2:
        raise SpecError("equation-of-state areas disagree with the geometry")
    if not mass > 0.0:
        raise SpecError("piston mass must be positive")
    if kappa12 < 0.0:
        raise SpecError("heat coupling must be nonnegative")
    ell = geometry.length

    def _u1x(x, S1):
        return eos1.dU_dx(x, S1)

    def _u2x(x, S2):
        # d/dx of U2(ell - x, S2)
        return -eos2.dU_dx(ell - x, S2)

    lagr = LagrangianSide(
        L=lambda q, qdot, S: 0.5 * mass * qdot[0] ** 2
            - eos1.U(q[0], S[0]) - eos2.U(ell - q[0], S[1]),
        dL_dq=lambda q, qdot, S: np.array([-(_u1x(q[0], S[0]) + _u2x(q[0], S[1]))]),
        dL_dqdot=lambda q, qdot, S: np.array([mass * qdot[0]]),
        dL_dS=lambda q, qdot, S: np.array([
            -eos1.temperature(q[0], S[0]),
            -eos2.temperature(ell - q[0], S[1])]),
        kinetic_form=np.array([[mass]]))

    kap = np.array([[0.0, float(kappa12)], [float(kappa12), 0.0]])

    spec = DiscreteSystemSpec(
        name="two_pistons",
        d=1,
        N=2,
        lagrangian=lagr,
        Lambdas=(np.array([[float(lams[0])]]), np.array([[float(lams[1])]])),
        kappa=kap,
        is_admissible=lambda x: 0.0 < x.q[0] < ell,
        sample_state=lambda rng: StateDiscrete(
            [rng.uniform(0.3 * ell, 0.7 * ell)], [rng.uniform(-2.0, 2.0)],
            [rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)]),
        dissipative=all(float(l) >= 0.0 for l in lams))

    # scalar closed-form kernels for the long-relaxation workloads; the
    # bracket engine cross-checks them state by state, so they carry no
    # physics of their own
    inv_mass = 1.0 / mass
    l1, l2 = float(lams[0]), float(lams[1])
    k12 = float(kappa12)
    rc1, rc2 = eos1.gas_const / eos1.c_v, eos2.gas_const / eos2.c_v
    ncv1, ncv2 = eos1.n_moles * eos1.c_v, eos2.n_moles * eos2.c_v

    def _scalar_core(x):
        q = x.q[0]
        p = x.p[0]
        qdot = p * inv_mass
        u1 = eos1.U0 * (eos1.V0 / (eos1.area * q)) ** rc1 \
            * math.exp((x.S[0] - eos1.S0) / ncv1)
        h2 = ell - q
        u2 = eos2.U0 * (eos2.V0 / (eos2.area * h2)) ** rc2 \
            * math.exp((x.S[1] - eos2.S0) / ncv2)
        T1 = u1 / ncv1
        T2 = u2 / ncv2
        if not (T1 > 0.0 and T2 > 0.0):
            raise NonpositiveTemperature(
                "two_pistons: temperatures (%r, %r)" % (T1, T2))
        f1 = l1 * qdot
        f2 = l2 * qdot
        s1dot = (qdot * f1 + k12 * (T2 - T1)) / T1
        s2dot = (qdot * f2 + k12 * (T1 - T2)) / T2
        return q, p, qdot, u1, u2, T1, T2, f1, f2, s1dot, s2dot

    def fast_el_rhs(x):
        q, p, qdot, u1, u2, T1, T2, f1, f2, s1dot, s2dot = _scalar_core(x)
        du1 = -(rc1 / q) * u1
        du2 = (rc2 / (ell - q)) * u2
        pdot = -(du1 + du2) - (f1 + f2)
        return np.array([qdot, pdot, s1dot, s2dot])

    def fast_observe(x):
        q, p, qdot, u1, u2, T1, T2, f1, f2, s1dot, s2dot = _scalar_core(x)
        H = 0.5 * p * qdot + u1 + u2
        return H, x.S[0] + x.S[1], s1dot + s2dot, (T1, T2)

    object.__setattr__(spec, "fast_el_rhs", fast_el_rhs)
    object.__setattr__(spec, "fast_observe", fast_observe)
    return spec


# ---------------------------------------------------------------------------
# purely relaxational systems (no symplectic part)


@dataclass(frozen=True, eq=False)
class NoSympSystemSpec:
    """Variational system with L = L(q, S) only: H = -L, relaxation
    qdot = -Gamma dH/dq with Gamma the inverse friction matrix.

    States reuse StateSimple with the momentum block pinned at zero.
    """

    name: str
    r: int
    L: object
    dL_dq: object
    dL_dS: object
    Lambda: object
    is_admissible: object
    sample_state: object
    dissipative: bool = True

    kind = "no_symplectic"
    state_class = StateSimple

    def __post_init__(self):
        lam = _constant_matrix(self.Lambda, (self.r, self.r),
                               "%s friction" % self.name)
        _check_symmetric(lam, "%s friction" % self.name)
        if self.dissipative:
            _check_psd(lam, "%s friction" % self.name)
        cond = float(np.linalg.cond(lam))
        if not cond < FRICTION_COND_MAX:
            raise SingularFrictionMatrix(
                "%s friction has condition number %.3e" % (self.name, cond))
        gamma = np.linalg.inv(lam)
        gamma = 0.5 * (gamma + gamma.T)
        gamma.setflags(write=False)
        object.__setattr__(self, "Lambda", lam)
        object.__setattr__(self, "Gamma", gamma)
        object.__setattr__(self, "hamiltonian_observable", Observable(
            arity=StateSimple,
            value=lambda x: -float(self.L(x.q, x.S)),
            gradient=lambda x: np.concatenate([
                -np.atleast_1d(self.dL_dq(x.q, x.S)),
                np.zeros(x.d),
                [-float(self.dL_dS(x.q, x.S))]]),
            name="H"))
        object.__setattr__(self, "entropy_observable", Observable(
            arity=StateSimple,
            value=lambda x: x.S,
            gradient=lambda x: np.concatenate([np.zeros(2 * x.d), [1.0]]),
            name="S"))

    def make_state(self, q, S):
        return StateSimple(q, np.zeros(self.r), S)

    def energy_value(self, x):
        return -float(self.L(x.q, x.S))

    def energy_dq(self, x):
        return -np.atleast_1d(np.asarray(self.dL_dq(x.q, x.S), dtype=float))

    def temperature(self, x):
        return -float(self.dL_dS(x.q, x.S))

    def hamiltonian_value(self, x):
        return self.energy_value(x)

    def total_entropy(self, x):
        return float(x.S)

    def temperature_vector(self, x):
        return np.array([self.temperature(x)])

    def entropy_rate(self, x):
        T = self.temperature(x)
        if not T > 0.0:
            raise NonpositiveTemperature("%s: T = %r" % (self.name, T))
        g = self.energy_dq(x)
        return float(g @ (self.Gamma @ g)) / T


def builtin_chemical(Q=None, psi_star=None, lam=None, entropy_energy=None):
    """Relaxing mixture: U = (psi - psi*)' Q (psi - psi*) / 2 + f(S) with
    Q symmetric positive definite, friction lam, and f' = T > 0."""
    if psi_star is None:
        psi_star = np.array([1.0, -1.0])
    psi_star = np.asarray(psi_star, dtype=float)
    r = psi_star.size
    if Q is None:
        Q = np.eye(r)
    Q = np.asarray(Q, dtype=float)
    _check_spd(Q, "chemical stiffness")
    if lam is None:
        lam = np.eye(r)
    if entropy_energy is None:
        entropy_energy = LinearEntropyEnergy(1.0)
    f = entropy_energy

    return NoSympSystemSpec(
        name="chemical",
        r=r,
        L=lambda q, S: -(0.5 * float((q - psi_star) @ (Q @ (q - psi_star)))
                         + f.value(S)),
        dL_dq=lambda q, S: -(Q @ (q - psi_star)),
        dL_dS=lambda q, S: -f.slope(S),
        Lambda=lam,
        is_admissible=lambda x: f.slope(x.S) > 0.0,
        sample_state=lambda rng: StateSimple(
            [psi_star[i] + rng.uniform(-1.0, 1.0) for i in range(r)],
            np.zeros(r), rng.uniform(-0.5, 0.5)))


# ---------------------------------------------------------------------------
# reduced systems on a Lie algebra (mu, a, s)


def so3_structure():
    """Structure constants of so(3): [a, b] = a x b."""
    c = np.zeros((3, 3, 3))
    for (i, j, k, sgn) in ((0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0),
                           (1, 0, 2, -1.0), (2, 1, 0, -1.0), (0, 2, 1, -1.0)):
        c[k, i, j] = sgn
    return c


@dataclass(frozen=True, eq=False)
class LieSystemSpec:
    """Reduced system on a Lie algebra with advected parameters and entropy.

    ``structure`` holds c[k, i, j] with [u, v]^k = sum c[k, i, j] u_i v_j;
    it is antisymmetrized exactly at registration and must satisfy the Jacobi
    identity.  ``rep``(n, k, k) gives the action on the advected vector,
    ``s_action`` the scalar weights on entropy.  Friction acts on the algebra:
    F^fr = -Lam xi.
    """

    name: str
    n: int
    k: int
    structure: object
    l: object
    dl_dxi: object
    dl_da: object
    dl_ds: object
    Lambda: object
    is_admissible: object
    sample_state: object
    kinetic_form: object = None
    rep: object = None
    s_action: object = None
    dissipative: bool = True

    kind = "lie"
    state_class = StateLie

    def __post_init__(self):
        c = np.asarray(self.structure, dtype=float)
        if c.shape != (self.n, self.n, self.n):
            raise SpecError("%s structure constants must be (n, n, n)" % self.name)
        skew = np.max(np.abs(c + np.swapaxes(c, 1, 2)))
        if skew > SYMMETRY_RTOL * max(1.0, float(np.max(np.abs(c)))):
            raise SpecError("%s structure constants must be antisymmetric in "
                            "the lower indices" % self.name)
        c = 0.5 * (c - np.swapaxes(c, 1, 2))
        jac = (np.einsum("mij,lmk->lijk", c, c)
               + np.einsum("mjk,lmi->lijk", c, c)
               + np.einsum("mki,lmj->lijk", c, c))
        if np.max(np.abs(jac)) > 1e-12 * max(1.0, float(np.max(np.abs(c))) ** 2):
            raise SpecError("%s structure constants fail the Jacobi identity"
                            % self.name)
        c.setflags(write=False)
        object.__setattr__(self, "structure", c)
        if self.rep is not None:
            rep = np.asarray(self.rep, dtype=float)
            if rep.shape != (self.n, self.k, self.k):
                raise SpecError("%s representation must be (n, k, k)" % self.name)
            rep.setflags(write=False)
            object.__setattr__(self, "rep", rep)
        sig = np.zeros(self.n) if self.s_action is None \
            else np.asarray(self.s_action, dtype=float)
        if sig.shape != (self.n,):
            raise SpecError("%s entropy action must be length n" % self.name)
        sig.setflags(write=False)
        object.__setattr__(self, "s_action", sig)
        object.__setattr__(self, "Lambda",
                           _as_friction_callable(self.Lambda, self.n,
                                                 "%s friction" % self.name))
        if self.kinetic_form is not None and not callable(self.kinetic_form):
            form = _constant_matrix(self.kinetic_form, (self.n, self.n),
                                    "%s kinetic form" % self.name)
            _check_spd(form, "%s kinetic form" % self.name)
            object.__setattr__(self, "kinetic_form", form)
            object.__setattr__(self, "_kinetic_inv", np.linalg.inv(form))
        else:
            object.__setattr__(self, "_kinetic_inv", None)
        rng = SplitMix64(_REGISTRATION_SEED)
        for _ in range(10):
            x = self.sample_state(rng)
            lam = np.asarray(self.Lambda(x.mu, self.velocity(x), x.s), dtype=float)
            _check_symmetric(lam, "%s friction" % self.name)
            if self.dissipative:
                _check_psd(lam, "%s friction" % self.name)
        object.__setattr__(self, "hamiltonian_observable", Observable(
            arity=StateLie,
            value=lambda x: self.hamiltonian_value(x),
            gradient=lambda x: self._h_gradient(x),
            name="h"))
        object.__setattr__(self, "entropy_observable", Observable(
            arity=StateLie,
            value=lambda x: x.s,
            gradient=lambda x: np.concatenate([np.zeros(x.n + x.k), [1.0]]),
            name="s"))

    def velocity(self, x):
        """xi = dh/dmu, the velocity conjugate to mu."""
        if self._kinetic_inv is not None:
            return self._kinetic_inv @ x.mu
        if self.kinetic_form is not None:
            return np.linalg.solve(
                np.asarray(self.kinetic_form(x.a, x.s), dtype=float), x.mu)
        return legendre.invert_momentum(
            lambda v: np.atleast_1d(np.asarray(
                self.dl_dxi(v, x.a, x.s), dtype=float)) - x.mu, x.mu)

    def hamiltonian_value(self, x):
        xi = self.velocity(x)
        return float(x.mu @ xi) - float(self.l(xi, x.a, x.s))

    def _h_gradient(self, x):
        xi = self.velocity(x)
        da = np.zeros(0) if x.k == 0 \
            else -np.atleast_1d(np.asarray(self.dl_da(xi, x.a, x.s), dtype=float))
        return np.concatenate([xi, da, [-float(self.dl_ds(xi, x.a, x.s))]])

    def temperature(self, x):
        return -float(self.dl_ds(self.velocity(x), x.a, x.s))

    def friction_matrix(self, x):
        return np.asarray(self.Lambda(x.mu, self.velocity(x), x.s), dtype=float)

    def hamiltonian_observable_gradient(self, x):
        return self._h_gradient(x)

    def total_entropy(self, x):
        return float(x.s)

    def temperature_vector(self, x):
        return np.array([self.temperature(x)])

    def entropy_rate(self, x):
        T = self.temperature(x)
        if not T > 0.0:
            raise NonpositiveTemperature("%s: T = %r" % (self.name, T))
        xi = self.velocity(x)
        return float(xi @ (self.friction_matrix(x) @ xi)) / T


def builtin_rigid_body_thermo(inertia=None, lam=None, entropy_energy=None):
    """Rigid body with internal heating: l = xi' I xi / 2 - e(s), friction
    torque -Lam xi pumping kinetic energy into entropy at temperature e'(s)."""
    if inertia is None:
        inertia = np.diag([1.0, 2.0, 3.0])
    inertia = np.asarray(inertia, dtype=float)
    if lam is None:
        lam = np.eye(3)
    if entropy_energy is None:
        entropy_energy = ExpEntropyEnergy()
    e = entropy_energy

    return LieSystemSpec(
        name="rigid_body",
        n=3,
        k=0,
        structure=so3_structure(),
        l=lambda xi, a, s: 0.5 * float(xi @ (inertia @ xi)) - e.value(s),
        dl_dxi=lambda xi, a, s: inertia @ xi,
        dl_da=lambda xi, a, s: np.zeros(0),
        dl_ds=lambda xi, a, s: -e.slope(s),
        Lambda=lam,
        kinetic_form=inertia,
        is_admissible=lambda x: e.slope(x.s) > 0.0,
        sample_state=lambda rng: StateLie(
            [rng.uniform(-1.0, 1.0) for _ in range(3)],
            np.zeros(0), rng.uniform(-0.5, 0.5)))
