"""Poisson 2-brackets and dissipative 4-brackets over observables.

The dissipative brackets are built, wherever their algebra allows it, as a
Kulkarni-Nomizu product of two symmetric 2-tensor fields a and b:

    (F, G; M, N) = a(F,M) b(G,N) - a(F,N) b(G,M)
                 + a(G,N) b(F,M) - a(G,M) b(F,N)

which is antisymmetric inside each argument pair and symmetric under exchange
of the pairs.  Kernels are evaluated in bitwise-symmetric form (plain products,
or 0.5*(u + v) for matrix contractions) and the four terms are combined as
(t1 + t3) - (t2 + t4); IEEE commutativity of + and * then makes all three
symmetry identities hold exactly, not merely to rounding.

Evaluators take observables, not gradients; gradients are computed once per
observable per state through a shared GradientTable.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateK, NonpositiveTemperature
from .states import table_for

DEFAULT_K_MIN = 1e-10


@dataclass(frozen=True, eq=False)
class Bracket2:
    """Binary bracket; ``kind`` is "symplectic" or "metric"."""

    evaluator: object
    kind: str
    name: str = ""

    def __call__(self, F, G, x, table=None):
        return self.evaluator(F, G, x, table_for(x, table))


@dataclass(frozen=True, eq=False)
class Bracket4:
    """Quaternary dissipative bracket (F, G; M, N)."""

    evaluator: object
    name: str = ""

    def __call__(self, F, G, M, N, x, table=None):
        return self.evaluator(F, G, M, N, x, table_for(x, table))


@dataclass(frozen=True, eq=False)
class SymTensor2Field:
    """Symmetric 2-tensor field acting on observable pairs at a state.

    Values are memoized per (tensor, F, G) in the state's gradient table,
    keyed on the ordered pair so the two argument orders stay independent
    evaluations.
    """

    evaluator: object
    name: str = ""

    def __call__(self, F, G, x, table=None):
        t = table_for(x, table)
        # self in the key pins it alive so the id-keyed pair cannot go stale
        return t.memo(("tensor2", self, id(F), id(G)),
                      lambda: self.evaluator(F, G, x, t))


def poisson_canonical(F, G, x, table=None):
    """Canonical bracket <dF/dq, dG/dp> - <dF/dp, dG/dq>.

    Works on StateSimple and StateDiscrete; entropy slots do not enter, so
    {F, S_i} = 0 identically.
    """
    t = table_for(x, table)
    pf = t.parts(F)
    pg = t.parts(G)
    u = float(pf.q @ pg.p)
    w = float(pf.p @ pg.q)
    return u - w


def canonical_bracket2():
    """The canonical bracket packaged as a Bracket2."""
    return Bracket2(evaluator=lambda F, G, x, t: poisson_canonical(F, G, x, t),
                    kind="symplectic", name="canonical")


def kn_product(a, b):
    """Kulkarni-Nomizu product of two symmetric 2-tensor fields.

    The returned Bracket4 satisfies the pairwise antisymmetries and the pair
    exchange identity exactly (bitwise) whenever the kernels do.
    """
    def ev(F, G, M, N, x, table):
        t1 = a(F, M, x, table) * b(G, N, x, table)
        t2 = a(F, N, x, table) * b(G, M, x, table)
        t3 = a(G, N, x, table) * b(F, M, x, table)
        t4 = a(G, M, x, table) * b(F, N, x, table)
        return (t1 + t3) - (t2 + t4)

    return Bracket4(ev, name="kn(%s,%s)" % (a.name, b.name))


def _checked_temperature(sys, x, table):
    def thunk():
        T = float(sys.temperature(x))
        if not T > 0.0:
            raise NonpositiveTemperature(
                "%s: T = %r at the requested state" % (sys.name, T))
        return T
    return table.memo(("T", id(sys)), thunk)


def _checked_temperatures(sys, x, table):
    def thunk():
        Ts = np.asarray(sys.temperatures(x), dtype=float)
        if not np.all(Ts > 0.0):
            bad = int(np.flatnonzero(~(Ts > 0.0))[0])
            raise NonpositiveTemperature(
                "%s: T_%d = %r at the requested state" % (sys.name, bad + 1, Ts[bad]))
        return Ts
    return table.memo(("Ts", id(sys)), thunk)


def _entropy_product(slot):
    """Kernel x_S * y_S on the named scalar slot (bitwise symmetric)."""
    def ev(F, G, x, table):
        return float(getattr(table.parts(F), slot)) * float(getattr(table.parts(G), slot))
    return SymTensor2Field(ev, name="b_" + slot)


def _matrix_kernel(slot, matrix_memo):
    """Kernel 0.5 (u + v), u = <x_slot, A y_slot>, with A memoized per state."""
    def ev(F, G, x, table):
        A = matrix_memo(x, table)
        gf = getattr(table.parts(F), slot)
        gg = getattr(table.parts(G), slot)
        u = float(gf @ (A @ gg))
        v = float(gg @ (A @ gf))
        return 0.5 * (u + v)
    return SymTensor2Field(ev, name="a_" + slot)


def metric4_symmetric_form(sys):
    """Dissipative 4-bracket of a simple system with friction F^fr = -Lam qdot:
    momentum-slot kernel <x_p, (Lam/T) y_p> paired with entropy products."""
    def lam_over_T(x, table):
        def thunk():
            T = _checked_temperature(sys, x, table)
            return np.asarray(sys.friction_matrix(x), dtype=float) / T
        return table.memo(("lam/T", id(sys)), thunk)

    return kn_product(_matrix_kernel("p", lam_over_T), _entropy_product("S"))


def metric4_first_form(sys, k_min=DEFAULT_K_MIN):
    """Rank-one dissipative 4-bracket built from the friction force itself.

    (F, G; M, N) = A(F,G) A(M,N) / (T K) with
    A(X, Y) = <F^fr, dX/dp> Y_S - <F^fr, dY/dp> X_S and
    K = -<F^fr, dH/dp>.  Raises DegenerateK when |K| <= k_min.

    Needs no flux assumption beyond a friction force; under F^fr = -Lam qdot
    its partial evaluation (., H; S, H) coincides with the symmetric form's.
    """
    def ev(F, G, M, N, x, table):
        T = _checked_temperature(sys, x, table)
        ffr = table.memo(("ffr", id(sys)),
                         lambda: np.asarray(sys.friction_force(x), dtype=float))
        qdot = table.memo(("qdot", id(sys)),
                          lambda: np.asarray(sys.velocity(x), dtype=float))
        K = -float(ffr @ qdot)
        if abs(K) <= k_min:
            raise DegenerateK(
                "%s: |K| = %.3e <= %.3e; the 1/(T K) bracket is undefined here"
                % (sys.name, abs(K), k_min))

        def pair(X, Y):
            def thunk():
                px = table.parts(X)
                py = table.parts(Y)
                wx = float(ffr @ px.p)
                wy = float(ffr @ py.p)
                return wx * float(py.S) - wy * float(px.S)
            return table.memo(("ff_pair", id(sys), id(X), id(Y)), thunk)

        return (pair(F, G) * pair(M, N)) / (T * K)

    return Bracket4(ev, name="first_form")


def metric4_discrete_friction(sys):
    """Sum over subsystems i of the friction 4-bracket with kernel
    <x_p, (Lam_i / T_i) y_p> paired with products of the S_i slots."""
    def ev(F, G, M, N, x, table):
        Ts = _checked_temperatures(sys, x, table)
        kernels = table.memo(
            ("lam/T_list", id(sys)),
            lambda: [A / Ts[i] for i, A in
                     enumerate(table.memo(("lams", id(sys)),
                                          lambda: sys.friction_matrices(x)))])

        def a_vec(X, Y):
            def thunk():
                px = table.parts(X).p
                py = table.parts(Y).p
                out = np.empty(Ts.size)
                for i, Ai in enumerate(kernels):
                    u = float(px @ (Ai @ py))
                    v = float(py @ (Ai @ px))
                    out[i] = 0.5 * (u + v)
                return out
            return table.memo(("dfr_a", id(sys), id(X), id(Y)), thunk)

        def b_vec(X, Y):
            return table.memo(
                ("dfr_b", id(X), id(Y)),
                lambda: table.parts(X).S * table.parts(Y).S)

        aFM, aFN, aGN, aGM = a_vec(F, M), a_vec(F, N), a_vec(G, N), a_vec(G, M)
        bFM, bFN, bGN, bGM = b_vec(F, M), b_vec(F, N), b_vec(G, N), b_vec(G, M)
        total = 0.0
        for i in range(Ts.size):
            t1 = aFM[i] * bGN[i]
            t2 = aFN[i] * bGM[i]
            t3 = aGN[i] * bFM[i]
            t4 = aGM[i] * bFN[i]
            total += (t1 + t3) - (t2 + t4)
        return total

    return Bracket4(ev, name="discrete_friction")


def metric4_transfer(sys):
    """Entropy-exchange 4-bracket: for each coupled pair i < j,

        kappa_ij / (T_i T_j) * Phi_FG^ij * Phi_MN^ij,

    Phi_XY^ij = X_Si Y_Sj - X_Sj Y_Si.  Generates internal heat conduction
    kappa_ij (T_j - T_i) with no momentum involvement.
    """
    kap = np.asarray(sys.kappa, dtype=float)

    def ev(F, G, M, N, x, table):
        Ts = _checked_temperatures(sys, x, table)

        def phi(X, Y):
            def thunk():
                outer = np.outer(table.parts(X).S, table.parts(Y).S)
                return outer - outer.T
            return table.memo(("phi", id(sys), id(X), id(Y)), thunk)

        p1 = phi(F, G)
        p2 = phi(M, N)
        total = 0.0
        for i in range(Ts.size - 1):
            for j in range(i + 1, Ts.size):
                k = kap[i, j]
                if k == 0.0:
                    continue
                coeff = k / (Ts[i] * Ts[j])
                total += coeff * (p1[i, j] * p2[i, j])
        return total

    return Bracket4(ev, name="transfer")


def _half_commutator(c, u, v):
    # [u, v]^k for exactly antisymmetrized structure constants c[k, i, j];
    # outer-difference form keeps the result bitwise odd under u <-> v.
    d = np.outer(u, v)
    d = d - d.T
    return 0.5 * np.einsum("kij,ij->k", c, d)


def lie_poisson(sys):
    """Poisson bracket on (mu, a, s) for a reduced system on a Lie algebra:

        {f, g} = <mu, [dg/dmu, df/dmu]>
               + <dg/da, (df/dmu).a> - <df/da, (dg/dmu).a>
               + dg/ds (df/dmu).s    - df/ds (dg/dmu).s

    where v.a acts through the representation matrices and v.s through the
    scalar weights sigma.
    """
    c = np.asarray(sys.structure, dtype=float)
    rep = None if sys.rep is None else np.asarray(sys.rep, dtype=float)
    sig = np.asarray(sys.s_action, dtype=float)

    def ev(F, G, x, table):
        pf = table.parts(F)
        pg = table.parts(G)
        out = float(x.mu @ _half_commutator(c, pg.mu, pf.mu))
        if x.a.size:
            Ra = table.memo(("rep_a", id(sys)),
                            lambda: np.einsum("iab,b->ia", rep, x.a))
            u = float(pg.a @ (pf.mu @ Ra))
            w = float(pf.a @ (pg.mu @ Ra))
            out = out + (u - w)
        if np.any(sig != 0.0):
            sa = sig * float(x.s)
            u = float(pg.s) * float(pf.mu @ sa)
            w = float(pf.s) * float(pg.mu @ sa)
            out = out + (u - w)
        return out

    return Bracket2(ev, kind="symplectic", name="lie_poisson")


def metric4_ep(sys):
    """Dissipative 4-bracket for reduced systems: algebra-slot kernel
    <x_mu, (Lam/T) y_mu> paired with entropy-slot products."""
    def lam_over_T(x, table):
        def thunk():
            T = _checked_temperature(sys, x, table)
            return np.asarray(sys.friction_matrix(x), dtype=float) / T
        return table.memo(("lam/T", id(sys)), thunk)

    return kn_product(_matrix_kernel("mu", lam_over_T), _entropy_product("s"))


def metric4_no_symplectic(sys):
    """Dissipative 4-bracket for purely relaxational systems: configuration
    kernel <x_q, (Gamma/T) y_q> paired with entropy products, Gamma = Lam^-1."""
    gamma = np.asarray(sys.Gamma, dtype=float)

    def gamma_over_T(x, table):
        def thunk():
            return gamma / _checked_temperature(sys, x, table)
        return table.memo(("gam/T", id(sys)), thunk)

    return kn_product(_matrix_kernel("q", gamma_over_T), _entropy_product("S"))


def reduce_to_2(b4, H):
    """Partial evaluation (F, G) -> (F, H; G, H): the symmetric 2-bracket a
    4-bracket induces once the energy is pinned in its second slots."""
    def ev(F, G, x, table):
        return b4(F, H, G, H, x, table)

    return Bracket2(ev, kind="metric", name="reduced(%s)" % b4.name)
