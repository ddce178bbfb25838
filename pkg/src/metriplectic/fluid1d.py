"""Compressible 1-d fluid on a periodic grid, in (m, rho, s) variables.

Spatial derivative D is the central difference on n cells; D obeys exact
summation by parts, sum_i a_i (D b)_i = -sum_i (D a)_i b_i, which is what makes
the semi-discrete energy and mass budgets close.  Functional derivatives are
partial derivatives divided by the cell width, so a functional f = dx * sum phi
has delta f / delta w_i = (1/dx) df/dw_i.

The Poisson bracket advects all three fields; the two dissipative 4-brackets
are Kulkarni-Nomizu pairings, per cell, of a velocity-gradient kernel
(mu/T) Dx_m Dy_m and a temperature-gradient kernel (kappa/T^2) Dx_s Dy_s with
the entropy-slot product, integrated over the grid.  Their partial evaluation
at the Hamiltonian generates viscous heating and heat conduction with total
energy conserved exactly at the semi-discrete level.
"""

from dataclasses import dataclass

import numpy as np

from .brackets import Bracket2, Bracket4
from .errors import NonpositiveTemperature, SpecError
from .states import Observable, StateField1D, table_for


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid: n cells on a circle of circumference length."""

    n: int
    length: float = 1.0

    def __post_init__(self):
        if self.n < 4:
            raise SpecError("grid needs at least 4 cells")
        if not self.length > 0.0:
            raise SpecError("grid length must be positive")

    @property
    def dx(self):
        return self.length / self.n

    def cell_centers(self):
        return (np.arange(self.n) + 0.5) * self.dx


def d_central(w, dx):
    """Periodic central difference (w_{i+1} - w_{i-1}) / (2 dx)."""
    # sliced assembly of roll(w,-1) - roll(w,1); same floats, less dispatch
    out = np.empty_like(w)
    out[:-1] = w[1:]
    out[-1] = w[0]
    out[0] -= w[-1]
    out[1:] -= w[:-1]
    out /= 2.0 * dx
    return out


@dataclass(frozen=True)
class PolytropicEOS:
    """Internal energy density e(rho, s) = c rho**gamma exp(s / (c_v rho)).

    T = de/ds = e / (c_v rho) and the pressure reduces to p = (gamma - 1) e.
    """

    gamma: float = 1.4
    c_v: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if not (self.gamma > 1.0 and self.c_v > 0.0 and self.c > 0.0):
            raise SpecError("polytropic EOS needs gamma > 1, c_v > 0, c > 0")

    def e(self, rho, s):
        return self.c * rho ** self.gamma * np.exp(s / (self.c_v * rho))

    def de_drho(self, rho, s):
        return self.e(rho, s) * (self.gamma / rho - s / (self.c_v * rho * rho))

    def temperature(self, rho, s):
        return self.e(rho, s) / (self.c_v * rho)

    def pressure(self, rho, s):
        return (self.gamma - 1.0) * self.e(rho, s)


@dataclass(frozen=True)
class FluidParams:
    """Viscosity mu >= 0, heat conductivity kappa >= 0, and the EOS."""

    mu: float = 0.0
    kappa: float = 0.0
    eos: PolytropicEOS = PolytropicEOS()

    def __post_init__(self):
        if self.mu < 0.0 or self.kappa < 0.0:
            raise SpecError("transport coefficients must be nonnegative")


def functional_gradient(f, x, grid):
    """Functional derivatives (delta f/delta m, delta f/delta rho,
    delta f/delta s) of an observable over StateField1D."""
    from .states import grad_observable
    return x.split(grad_observable(f, x) / grid.dx)


def _fgrad(f, x, grid, table):
    def thunk():
        return x.split(table.gradient(f) / grid.dx)
    return table.memo(("fgrad", id(f), grid.dx), thunk)


def _temperature_field(x, params, table):
    def thunk():
        T = params.eos.temperature(x.rho, x.s)
        if not np.all(T > 0.0):
            bad = int(np.flatnonzero(~(T > 0.0))[0])
            raise NonpositiveTemperature("fluid1d: T_%d = %r" % (bad + 1, T[bad]))
        return T
    return table.memo(("T_field", id(params)), thunk)


def _advection_terms(X, x, grid, table):
    """(slot gradients, D x_m, D(rho x_m), D(s x_m)), memoized per state."""
    def thunk():
        p = _fgrad(X, x, grid, table)
        dx = grid.dx
        return (p, d_central(p.m, dx), d_central(x.rho * p.m, dx),
                d_central(x.s * p.m, dx))
    return table.memo(("adv_terms", id(X), grid.dx), thunk)


def lie_poisson_fluid(F, G, x, grid, table=None):
    """Advection Poisson bracket on (m, rho, s):

        {f, g} = dx sum_i [ m (g_m D f_m - f_m D g_m)
                          + g_rho D(rho f_m) - f_rho D(rho g_m)
                          + g_s   D(s   f_m) - f_s   D(s   g_m) ]
    """
    t = table_for(x, table)
    dx = grid.dx
    pf, dfm, drfm, dsfm = _advection_terms(F, x, grid, t)
    pg, dgm, drgm, dsgm = _advection_terms(G, x, grid, t)
    adv = x.m * (pg.m * dfm - pf.m * dgm)
    rho_t = pg.rho * drfm - pf.rho * drgm
    s_t = pg.s * dsfm - pf.s * dsgm
    return dx * float(np.sum(adv + rho_t + s_t))


def _kn_cells(a, b, F, G, M, N):
    t1 = a(F, M) * b(G, N)
    t2 = a(F, N) * b(G, M)
    t3 = a(G, N) * b(F, M)
    t4 = a(G, M) * b(F, N)
    return (t1 + t3) - (t2 + t4)


def visc_bracket4(F, G, M, N, x, grid, params, table=None):
    """Viscous 4-bracket: per cell, (mu/T) (D x_m)(D y_m) paired with entropy
    products, integrated with weight dx."""
    t = table_for(x, table)
    dx = grid.dx
    T = _temperature_field(x, params, t)
    w = t.memo(("visc_w", id(params)), lambda: params.mu / T)

    def dm(X):
        return t.memo(("Dm", id(X), dx),
                      lambda: d_central(_fgrad(X, x, grid, t).m, dx))

    def a(X, Y):
        return t.memo(("visc_a", id(params), id(X), id(Y)),
                      lambda: w * (dm(X) * dm(Y)))

    def b(X, Y):
        return t.memo(("fs_b", id(X), id(Y)),
                      lambda: _fgrad(X, x, grid, t).s * _fgrad(Y, x, grid, t).s)

    return dx * float(np.sum(_kn_cells(a, b, F, G, M, N)))


def heat_bracket4(F, G, M, N, x, grid, params, table=None):
    """Heat-conduction 4-bracket: per cell, (kappa/T^2) (D x_s)(D y_s) paired
    with entropy products, integrated with weight dx."""
    t = table_for(x, table)
    dx = grid.dx
    T = _temperature_field(x, params, t)
    w = t.memo(("heat_w", id(params)), lambda: params.kappa / (T * T))

    def ds(X):
        return t.memo(("Ds", id(X), dx),
                      lambda: d_central(_fgrad(X, x, grid, t).s, dx))

    def a(X, Y):
        return t.memo(("heat_a", id(params), id(X), id(Y)),
                      lambda: w * (ds(X) * ds(Y)))

    def b(X, Y):
        return t.memo(("fs_b", id(X), id(Y)),
                      lambda: _fgrad(X, x, grid, t).s * _fgrad(Y, x, grid, t).s)

    return dx * float(np.sum(_kn_cells(a, b, F, G, M, N)))


def reduced_2brackets(grid, params):
    """The symmetric 2-brackets the two 4-brackets induce at the Hamiltonian,
    in per-cell factored form:

        visc2(f, g) = dx sum_i mu T [D f_m - (D u) f_s / T] [same for g]
        heat2(f, g) = dx sum_i kappa [D f_s - (D T) f_s / T] [same for g]

    Each equals reduce_to_2 of the corresponding 4-bracket with the fluid
    Hamiltonian pinned, cell by cell.
    """
    def factors_visc(X, x, t):
        dx = grid.dx
        p = _fgrad(X, x, grid, t)
        T = _temperature_field(x, params, t)
        Du = t.memo(("Du", id(params)),
                    lambda: d_central(x.m / x.rho, dx))
        return d_central(p.m, dx) - Du * (p.s / T)

    def ev_visc(F, G, x, t):
        T = _temperature_field(x, params, t)
        return grid.dx * float(np.sum(
            (params.mu * T) * (factors_visc(F, x, t) * factors_visc(G, x, t))))

    def factors_heat(X, x, t):
        dx = grid.dx
        p = _fgrad(X, x, grid, t)
        T = _temperature_field(x, params, t)
        DT = t.memo(("DT", id(params)), lambda: d_central(T, dx))
        return d_central(p.s, dx) - DT * (p.s / T)

    def ev_heat(F, G, x, t):
        return grid.dx * float(np.sum(
            params.kappa * (factors_heat(F, x, t) * factors_heat(G, x, t))))

    return (Bracket2(ev_visc, kind="metric", name="visc2"),
            Bracket2(ev_heat, kind="metric", name="heat2"))


class FluidSystem1D:
    """Grid, transport parameters, and EOS bundled behind the same interface
    the other system specs expose (energy, entropy, temperatures, sampling)."""

    kind = "fluid"
    state_class = StateField1D
    name = "fluid1d"

    def __init__(self, grid=None, params=None):
        self.grid = grid if grid is not None else Grid1D(n=32, length=1.0)
        self.params = params if params is not None else FluidParams(mu=0.01, kappa=0.01)
        self.dissipative = True
        eos = self.params.eos
        dx = self.grid.dx

        def h_value(x):
            return dx * float(np.sum(0.5 * x.m * x.m / x.rho + eos.e(x.rho, x.s)))

        def h_gradient(x):
            u = x.m / x.rho
            return dx * np.concatenate([
                u,
                -0.5 * u * u + eos.de_drho(x.rho, x.s),
                eos.temperature(x.rho, x.s)])

        self.hamiltonian_observable = Observable(
            arity=StateField1D, value=h_value, gradient=h_gradient, name="h")
        self.entropy_observable = Observable(
            arity=StateField1D,
            value=lambda x: dx * float(np.sum(x.s)),
            gradient=lambda x: np.concatenate(
                [np.zeros(2 * x.n), np.full(x.n, dx)]),
            name="s_total")
        grid_, params_ = self.grid, self.params
        self.poisson2 = Bracket2(
            lambda F, G, x, t: lie_poisson_fluid(F, G, x, grid_, t),
            kind="symplectic", name="lie_poisson_fluid")
        self.visc4 = Bracket4(
            lambda F, G, M, N, x, t: visc_bracket4(F, G, M, N, x, grid_, params_, t),
            name="visc4")
        self.heat4 = Bracket4(
            lambda F, G, M, N, x, t: heat_bracket4(F, G, M, N, x, grid_, params_, t),
            name="heat4")
        self._coords = None

    def is_admissible(self, x):
        return bool(np.all(x.rho > 0.0)) and bool(np.all(np.isfinite(x.m))) \
            and bool(np.all(np.isfinite(x.rho))) and bool(np.all(np.isfinite(x.s)))

    def sample_state(self, rng):
        """Smooth low-mode random fields with rho bounded away from zero."""
        xg = self.grid.cell_centers()
        two_pi = 2.0 * np.pi / self.grid.length

        def modes(base, amp):
            out = np.full(self.grid.n, base)
            for k in (1, 2):
                out = out + amp * rng.uniform(0.3, 1.0) * np.sin(
                    two_pi * k * xg + rng.uniform(0.0, 2.0 * np.pi))
            return out

        return StateField1D(m=modes(0.0, 0.08), rho=modes(1.0, 0.12),
                            s=modes(0.1, 0.08))

    def hamiltonian_value(self, x):
        return float(self.hamiltonian_observable.value(x))

    def total_entropy(self, x):
        return self.grid.dx * float(np.sum(x.s))

    def total_mass(self, x):
        return self.grid.dx * float(np.sum(x.rho))

    def temperature_vector(self, x):
        T = self.params.eos.temperature(x.rho, x.s)
        if not np.all(T > 0.0):
            bad = int(np.flatnonzero(~(T > 0.0))[0])
            raise NonpositiveTemperature("fluid1d: T_%d = %r" % (bad + 1, T[bad]))
        return T

    def entropy_rate(self, x):
        """dS_total/dt = dx sum (mu/T)(Du)^2 + (kappa/T^2)(DT)^2 >= 0."""
        dx = self.grid.dx
        T = self.temperature_vector(x)
        Du = d_central(x.m / x.rho, dx)
        DT = d_central(T, dx)
        return dx * float(np.sum(self.params.mu * Du * Du / T
                                 + self.params.kappa * DT * DT / (T * T)))

    def coordinate_observables(self):
        """Unit-gradient observables m_i, rho_i, s_i in flat order."""
        if self._coords is None:
            n = self.grid.n
            obs = []
            for field_ix, field in enumerate(("m", "rho", "s")):
                for i in range(n):
                    def val(x, _f=field, _i=i):
                        return float(getattr(x, _f)[_i])

                    def grd(x, _j=field_ix * n + i):
                        g = np.zeros(3 * x.n)
                        g[_j] = 1.0
                        return g

                    obs.append(Observable(arity=StateField1D, value=val,
                                          gradient=grd,
                                          name="%s_%d" % (field, i)))
            self._coords = tuple(obs)
        return self._coords

    def rhs_weak_form(self, x):
        """Evolution in the weak form of the variational equations: test
        functions are eliminated analytically against the periodic central
        difference, with Fourier heat flux j_s = -kappa (D T)/T.

            dm   = -D(m u) - m Du - rho D(dh/drho) - s DT + D(mu Du)
            drho = -D(rho u)
            ds   = -D(s u) + (mu (Du)^2 - j_s DT)/T - D(j_s)
        """
        grid, params = self.grid, self.params
        dx = grid.dx
        eos = params.eos
        m, rho, s = x.m, x.rho, x.s
        u = m / rho
        T = eos.temperature(rho, s)
        h_rho = -0.5 * u * u + eos.de_drho(rho, s)
        Du = d_central(u, dx)
        DT = d_central(T, dx)
        j_s = -(params.kappa * DT) / T
        dm = -(d_central(m * u, dx) + m * Du + rho * d_central(h_rho, dx)
               + s * DT) + d_central(params.mu * Du, dx)
        drho = -d_central(rho * u, dx)
        ds = -d_central(s * u, dx) + (params.mu * Du * Du - j_s * DT) / T \
            - d_central(j_s, dx)
        return np.concatenate([dm, drho, ds])

    def rhs_bracket_closed(self, x):
        """Coordinate-observable brackets collapsed in closed form: the
        advection bracket against h plus the two dissipative brackets against
        (h, s_total); cell-exact, so it matches rhs_bracket_literal to
        rounding at any n."""
        grid, params = self.grid, self.params
        dx = grid.dx
        eos = params.eos
        m, rho, s = x.m, x.rho, x.s
        u = m / rho
        T = eos.temperature(rho, s)
        h_rho = -0.5 * u * u + eos.de_drho(rho, s)
        Du = d_central(u, dx)
        DT = d_central(T, dx)
        dm = -(d_central(m * u, dx) + m * Du + rho * d_central(h_rho, dx)
               + s * DT) + d_central(params.mu * Du, dx)
        drho = -d_central(rho * u, dx)
        ds = -d_central(s * u, dx) + params.mu * Du * Du / T \
            + d_central(params.kappa * DT / T, dx) + params.kappa * DT * DT / (T * T)
        return np.concatenate([dm, drho, ds])

    def rhs_bracket_literal(self, x):
        """Same tangent assembled by literally evaluating the generic brackets
        on every coordinate observable (slow; testing and small grids)."""
        table = table_for(x)
        h = self.hamiltonian_observable
        stot = self.entropy_observable
        out = np.empty(x.ncoords)
        for j, obs in enumerate(self.coordinate_observables()):
            v = lie_poisson_fluid(obs, h, x, self.grid, table)
            v += visc_bracket4(obs, h, stot, h, x, self.grid, self.params, table)
            v += heat_bracket4(obs, h, stot, h, x, self.grid, self.params, table)
            out[j] = v
        return out
