"""Time evolution through two independent routes, plus the integrators.

``rhs_euler_lagrange`` evaluates the variational equations of motion directly
from the spec callbacks (friction force, temperatures, energy partials).
``rhs_bracket`` assembles the same tangent from brackets of the coordinate
observables against the energy and entropy generators.  The two routes share
nothing but the spec itself, which is what makes their agreement a check.

Integration is fixed-step rk4 or euler.  Every accepted step (and every rk4
stage) is tested against the spec's admissible set; a violation aborts with
DomainViolation carrying the step index, never with silent clamping.
"""

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from .brackets import (metric4_discrete_friction, metric4_ep,
                       metric4_first_form, metric4_no_symplectic,
                       metric4_symmetric_form, metric4_transfer,
                       lie_poisson, poisson_canonical)
from .errors import ConfigError, NonpositiveTemperature, DomainViolation, SpecError
from .fluid1d import FluidSystem1D
from .prng import SplitMix64
from .states import GradientTable, Observable, unsafe_with_coords
from .systems import (DiscreteSystemSpec, LieSystemSpec, NoSympSystemSpec,
                      SimpleSystemSpec)

log = logging.getLogger("metriplectic.dynamics")


class EngineKind(enum.Enum):
    euler_lagrange = "euler_lagrange"
    bracket = "bracket"


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Fixed-step trajectory with per-step diagnostics.

    ``diagnostics`` maps name -> array over steps: H, S_total, dSdt, T
    (one column per temperature), plus K for simple systems and mass for the
    fluid.  ``states`` holds every accepted state including the initial one.
    """

    spec_name: str
    engine: EngineKind
    method: str
    dt: float
    times: np.ndarray
    states: list
    diagnostics: dict = field(default_factory=dict)

    @property
    def nsteps(self):
        return len(self.states) - 1


def _coordinate_observables(spec):
    cached = getattr(spec, "_coordinate_observables", None)
    if cached is not None:
        return cached
    if isinstance(spec, FluidSystem1D):
        obs = spec.coordinate_observables()
    else:
        template = spec.sample_state(_template_rng(spec))
        ncoords = template.ncoords
        names = _coordinate_names(spec, template)
        obs = []
        for j in range(ncoords):
            def val(x, _j=j):
                return float(x.coords()[_j])

            def grd(x, _j=j):
                g = np.zeros(x.ncoords)
                g[_j] = 1.0
                return g

            obs.append(Observable(arity=spec.state_class, value=val,
                                  gradient=grd, name=names[j]))
        obs = tuple(obs)
    object.__setattr__(spec, "_coordinate_observables", obs)
    return obs


def _template_rng(spec):
    return SplitMix64(0xC0FFEE)


def _coordinate_names(spec, template):
    names = []
    if isinstance(spec, (SimpleSystemSpec, NoSympSystemSpec)):
        d = template.d
        names += ["q_%d" % (i + 1) for i in range(d)]
        names += ["p_%d" % (i + 1) for i in range(d)]
        names += ["S"]
    elif isinstance(spec, DiscreteSystemSpec):
        d, N = template.d, template.N
        names += ["q_%d" % (i + 1) for i in range(d)]
        names += ["p_%d" % (i + 1) for i in range(d)]
        names += ["S_%d" % (i + 1) for i in range(N)]
    elif isinstance(spec, LieSystemSpec):
        names += ["mu_%d" % (i + 1) for i in range(template.n)]
        names += ["a_%d" % (i + 1) for i in range(template.k)]
        names += ["s"]
    else:
        names = ["x_%d" % (j + 1) for j in range(template.ncoords)]
    return names


def coordinate_names(spec):
    """Flat coordinate names, in the order ``coords()`` uses."""
    if isinstance(spec, FluidSystem1D):
        n = spec.grid.n
        return (["m_%d" % (i + 1) for i in range(n)]
                + ["rho_%d" % (i + 1) for i in range(n)]
                + ["s_%d" % (i + 1) for i in range(n)])
    template = spec.sample_state(_template_rng(spec))
    return _coordinate_names(spec, template)


# ---------------------------------------------------------------------------
# Euler-Lagrange route


def rhs_euler_lagrange(spec, x):
    """Tangent vector of the variational equations at state ``x``."""
    if isinstance(spec, SimpleSystemSpec):
        qdot = np.asarray(spec.velocity(x), dtype=float)
        T = spec.temperature(x)
        if not T > 0.0:
            raise NonpositiveTemperature("%s: T = %r" % (spec.name, T))
        lam = np.asarray(spec.Lambda(x.q, qdot, x.S), dtype=float)
        fr = lam @ qdot
        pdot = -np.atleast_1d(spec.hamiltonian.dH_dq(x.q, x.p, x.S)) - fr
        out = np.empty(x.ncoords)
        d = x.d
        out[:d] = qdot
        out[d:2 * d] = pdot
        out[2 * d] = float(qdot @ fr) / T
        return out
    if isinstance(spec, DiscreteSystemSpec):
        fast = getattr(spec, "fast_el_rhs", None)
        if fast is not None:
            return fast(x)
        qdot = np.asarray(spec.velocity(x), dtype=float)
        Ts = spec.temperatures(x)
        if not np.all(Ts > 0.0):
            raise NonpositiveTemperature("%s: temperatures %r" % (spec.name, Ts))
        lams = [np.asarray(l(x.q, qdot, x.S), dtype=float) for l in spec.Lambdas]
        out = np.empty(x.ncoords)
        d, N = x.d, x.N
        out[:d] = qdot
        pdot = -np.atleast_1d(spec.hamiltonian.dH_dq(x.q, x.p, x.S))
        kap = spec.kappa
        for i in range(N):
            li_qdot = lams[i] @ qdot
            pdot = pdot - li_qdot
            acc = float(qdot @ li_qdot)
            for j in range(N):
                if j != i:
                    acc += kap[i, j] * (Ts[j] - Ts[i])
            out[2 * d + i] = acc / Ts[i]
        out[d:2 * d] = pdot
        return out
    if isinstance(spec, NoSympSystemSpec):
        g = spec.energy_dq(x)
        T = spec.temperature(x)
        if not T > 0.0:
            raise NonpositiveTemperature("%s: T = %r" % (spec.name, T))
        gam_g = spec.Gamma @ g
        out = np.zeros(x.ncoords)
        r = x.d
        out[:r] = -gam_g
        out[2 * r] = float(g @ gam_g) / T
        return out
    if isinstance(spec, LieSystemSpec):
        xi = np.asarray(spec.velocity(x), dtype=float)
        T = spec.temperature(x)
        if not T > 0.0:
            raise NonpositiveTemperature("%s: T = %r" % (spec.name, T))
        lam_xi = np.asarray(spec.friction_matrix(x), dtype=float) @ xi
        c = spec.structure
        mudot = np.einsum("kji,j,k->i", c, xi, x.mu) - lam_xi
        sig = spec.s_action
        out = np.empty(x.ncoords)
        n, k = x.n, x.k
        if k:
            dh_da = -np.atleast_1d(np.asarray(
                spec.dl_da(xi, x.a, x.s), dtype=float))
            mudot = mudot + np.einsum("iab,b,a->i", spec.rep, x.a, dh_da)
            out[n:n + k] = -np.einsum("iab,i,b->a", spec.rep, xi, x.a)
        if np.any(sig != 0.0):
            mudot = mudot + T * (sig * x.s)
        out[:n] = mudot
        out[n + k] = -float(xi @ sig) * x.s + float(xi @ lam_xi) / T
        return out
    if isinstance(spec, FluidSystem1D):
        return spec.rhs_weak_form(x)
    raise SpecError("no Euler-Lagrange route for %r" % type(spec).__name__)


# ---------------------------------------------------------------------------
# bracket route


def _bracket_set(spec, bracket_form):
    """(poisson or None, list of 4-brackets) for the spec, cached per form."""
    key = "_brackets_" + bracket_form
    cached = getattr(spec, key, None)
    if cached is not None:
        return cached
    if isinstance(spec, SimpleSystemSpec):
        if bracket_form == "symmetric":
            b4s = [metric4_symmetric_form(spec)]
        elif bracket_form == "first":
            b4s = [metric4_first_form(spec)]
        else:
            raise ConfigError("unknown bracket form %r" % bracket_form)
        out = (poisson_canonical, b4s)
    elif isinstance(spec, DiscreteSystemSpec):
        out = (poisson_canonical,
               [metric4_discrete_friction(spec), metric4_transfer(spec)])
    elif isinstance(spec, NoSympSystemSpec):
        out = (None, [metric4_no_symplectic(spec)])
    elif isinstance(spec, LieSystemSpec):
        lp = lie_poisson(spec)
        out = (lambda F, G, x, table: lp(F, G, x, table), [metric4_ep(spec)])
    else:
        raise SpecError("no bracket route for %r" % type(spec).__name__)
    object.__setattr__(spec, key, out)
    return out


def rhs_bracket(spec, x, bracket_form="symmetric"):
    """Tangent vector assembled from brackets: for each coordinate observable
    F_j, dx_j/dt = {F_j, H} + sum (F_j, H; S, H) over the dissipative
    brackets of the system class."""
    if isinstance(spec, FluidSystem1D):
        return spec.rhs_bracket_closed(x)
    poisson, b4s = _bracket_set(spec, bracket_form)
    H = spec.hamiltonian_observable
    S = spec.entropy_observable
    table = GradientTable(x)
    out = np.empty(x.ncoords)
    for j, obs in enumerate(_coordinate_observables(spec)):
        v = poisson(obs, H, x, table) if poisson is not None else 0.0
        for b4 in b4s:
            v += b4(obs, H, S, H, x, table)
        out[j] = v
    return out


# ---------------------------------------------------------------------------
# integration


def _make_rhs(spec, engine, bracket_form):
    if engine is EngineKind.euler_lagrange:
        return lambda state: rhs_euler_lagrange(spec, state)
    if engine is EngineKind.bracket:
        return lambda state: rhs_bracket(spec, state, bracket_form)
    raise ConfigError("unknown engine %r" % engine)


def _diagnostic_slots(spec):
    slots = ["H", "S_total", "dSdt"]
    if isinstance(spec, SimpleSystemSpec):
        slots.append("K")
    if isinstance(spec, FluidSystem1D):
        slots.append("mass")
    return slots


def _collect_diagnostics(spec, x, diag, i):
    fast = getattr(spec, "fast_observe", None)
    if fast is not None and "K" not in diag and "mass" not in diag:
        H, S_tot, dSdt, T = fast(x)
        diag["H"][i] = H
        diag["S_total"][i] = S_tot
        diag["dSdt"][i] = dSdt
        diag["T"][i] = T
        return
    diag["H"][i] = spec.hamiltonian_value(x)
    diag["S_total"][i] = spec.total_entropy(x)
    diag["dSdt"][i] = spec.entropy_rate(x)
    diag["T"][i] = spec.temperature_vector(x)
    if "K" in diag:
        diag["K"][i] = spec.friction_power(x)
    if "mass" in diag:
        diag["mass"][i] = spec.total_mass(x)


def integrate(spec, x0, dt, t_final, engine=EngineKind.euler_lagrange,
              method="rk4", bracket_form="symmetric"):
    """Evolve ``x0`` for t_final at fixed step dt; returns a Trajectory.

    t_final must be an integer number of steps.  Raises DomainViolation (with
    the step index) the moment an accepted state or an rk4 stage leaves the
    admissible set.
    """
    if not dt > 0.0:
        raise ConfigError("dt must be positive")
    if not t_final > 0.0:
        raise ConfigError("t_final must be positive")
    nsteps = int(round(t_final / dt))
    if nsteps < 1 or abs(nsteps * dt - t_final) > 1e-6 * max(dt, t_final):
        raise ConfigError("t_final=%g is not an integer multiple of dt=%g"
                          % (t_final, dt))
    if not isinstance(x0, spec.state_class):
        raise SpecError("%s expects %s states, got %s"
                        % (spec.name, spec.state_class.__name__,
                           type(x0).__name__))
    if not spec.is_admissible(x0):
        raise DomainViolation("initial state is outside the admissible set",
                              step=0, time=0.0)
    if method not in ("rk4", "euler"):
        raise ConfigError("unknown method %r" % method)
    engine = EngineKind(engine)
    rhs = _make_rhs(spec, engine, bracket_form)

    def rhs_flat(flat, step, t):
        stage = unsafe_with_coords(x0, flat)
        if not spec.is_admissible(stage):
            raise DomainViolation(
                "%s left the admissible set during step %d (t=%.6g)"
                % (spec.name, step, t), step=step, time=t)
        return rhs(stage)

    times = np.arange(nsteps + 1) * dt
    states = [x0]
    diag = {name: np.empty(nsteps + 1) for name in _diagnostic_slots(spec)}
    diag["T"] = np.empty((nsteps + 1, len(spec.temperature_vector(x0))))
    _collect_diagnostics(spec, x0, diag, 0)

    flat = x0.coords()
    half = 0.5 * dt
    sixth = dt / 6.0
    log.info("integrate %s: engine=%s method=%s dt=%g steps=%d",
             spec.name, engine.value, method, dt, nsteps)
    def partial_trajectory():
        count = len(states)
        return Trajectory(spec_name=spec.name, engine=engine, method=method,
                          dt=dt, times=times[:count], states=list(states),
                          diagnostics={k: v[:count] for k, v in diag.items()})

    for i in range(nsteps):
        t = times[i]
        try:
            if method == "rk4":
                k1 = rhs_flat(flat, i + 1, t)
                k2 = rhs_flat(flat + half * k1, i + 1, t)
                k3 = rhs_flat(flat + half * k2, i + 1, t)
                k4 = rhs_flat(flat + dt * k3, i + 1, t)
                flat = flat + sixth * (k1 + 2.0 * (k2 + k3) + k4)
            else:
                flat = flat + dt * rhs_flat(flat, i + 1, t)
            x = x0.with_coords(flat)
        except ValueError as exc:
            # non-finite coordinates are outside every admissible set
            err = DomainViolation(
                "%s produced non-finite coordinates at step %d (t=%.6g): %s"
                % (spec.name, i + 1, times[i + 1], exc), step=i + 1,
                time=float(times[i + 1]))
            err.partial = partial_trajectory()
            raise err from exc
        except (DomainViolation, NonpositiveTemperature) as exc:
            exc.partial = partial_trajectory()
            raise
        if not spec.is_admissible(x):
            err = DomainViolation(
                "%s left the admissible set at step %d (t=%.6g)"
                % (spec.name, i + 1, times[i + 1]), step=i + 1,
                time=float(times[i + 1]))
            err.partial = partial_trajectory()
            raise err
        states.append(x)
        _collect_diagnostics(spec, x, diag, i + 1)
    return Trajectory(spec_name=spec.name, engine=engine, method=method,
                      dt=dt, times=times, states=states, diagnostics=diag)
