"""Legendre transform between the Lagrangian and Hamiltonian descriptions.

p = dL/dqdot defines the momentum.  H(q, p, S) = <p, qdot*> - L(q, qdot*, S)
with qdot* the velocity solving the momentum relation.  Partials follow from
the envelope identities at qdot*:

    dH/dq = -dL/dq,   dH/dS = -dL/dS,   dH/dp = qdot*.

The entropy slot S may be a scalar or a vector; it is passed through opaquely.
Temperature is T = dH/dS, the single accessor the brackets reuse.
"""

from dataclasses import dataclass

import numpy as np

from .errors import LegendreInversionFailure
from .states import FD_STEP_SCALE

NEWTON_TOL = 1e-12
NEWTON_MAXITER = 50


@dataclass(frozen=True, eq=False)
class LagrangianSide:
    """Lagrangian L(q, qdot, S) with its partial derivatives.

    ``kinetic_form``, when given, is the constant matrix M (or a callable
    M(q, S)) with L quadratic in qdot, so the momentum relation p = M qdot
    inverts by a linear solve.  Without it, inversion is Newton iteration.
    """

    L: object
    dL_dq: object
    dL_dqdot: object
    dL_dS: object
    kinetic_form: object = None


@dataclass(frozen=True, eq=False)
class HamiltonianSide:
    """Hamiltonian H(q, p, S) with partials and the velocity map."""

    H: object
    dH_dq: object
    dH_dp: object
    dH_dS: object
    inverse_legendre: object


def momentum(lag, q, qdot, S):
    """Momentum p = dL/dqdot at (q, qdot, S)."""
    return np.asarray(lag.dL_dqdot(q, qdot, S), dtype=float)


def invert_momentum(residual_fn, p, guess=None):
    """Solve residual_fn(v) = dL/dqdot(v) - p = 0 for the velocity v.

    Newton iteration with a finite-difference Jacobian; tolerance
    ||r|| <= 1e-12 (1 + ||p||).  Raises LegendreInversionFailure with the
    final residual when 50 iterations do not suffice.
    """
    p = np.atleast_1d(np.asarray(p, dtype=float))
    v = np.zeros_like(p) if guess is None else np.array(guess, dtype=float)
    tol = NEWTON_TOL * (1.0 + float(np.linalg.norm(p)))
    r = residual_fn(v)
    for _ in range(NEWTON_MAXITER):
        if np.linalg.norm(r) <= tol:
            return v
        jac = np.empty((p.size, p.size))
        for j in range(p.size):
            h = FD_STEP_SCALE * max(1.0, abs(v[j]))
            up = v.copy()
            up[j] += h
            dn = v.copy()
            dn[j] -= h
            jac[:, j] = (residual_fn(up) - residual_fn(dn)) / (2.0 * h)
        try:
            step = np.linalg.solve(jac, r)
        except np.linalg.LinAlgError as exc:
            raise LegendreInversionFailure(
                "singular velocity Jacobian: %s" % exc,
                residual=float(np.linalg.norm(r)))
        v = v - step
        r = residual_fn(v)
    res = float(np.linalg.norm(r))
    if res <= tol:
        return v
    raise LegendreInversionFailure(
        "velocity Newton stalled at residual %.3e (tol %.3e)" % (res, tol),
        residual=res)


def to_hamiltonian(lag):
    """Hamiltonian side of ``lag`` via the Legendre transform.

    With a constant kinetic_form matrix the velocity map is a cached linear
    solve; with a callable form it is solved pointwise; otherwise Newton.
    """
    form = lag.kinetic_form
    if form is not None and not callable(form):
        minv = np.linalg.inv(np.asarray(form, dtype=float))

        def inverse(q, p, S):
            return minv @ p
    elif form is not None:

        def inverse(q, p, S):
            return np.linalg.solve(np.asarray(form(q, S), dtype=float), p)
    else:

        def inverse(q, p, S):
            return invert_momentum(
                lambda v: np.atleast_1d(np.asarray(lag.dL_dqdot(q, v, S),
                                                   dtype=float)) - p, p)

    def H(q, p, S):
        v = inverse(q, p, S)
        return float(p @ v) - float(lag.L(q, v, S))

    def dH_dq(q, p, S):
        v = inverse(q, p, S)
        return -np.asarray(lag.dL_dq(q, v, S), dtype=float)

    def dH_dp(q, p, S):
        return inverse(q, p, S)

    def dH_dS(q, p, S):
        v = inverse(q, p, S)
        out = np.asarray(lag.dL_dS(q, v, S), dtype=float)
        return -float(out) if out.ndim == 0 else -out

    return HamiltonianSide(H=H, dH_dq=dH_dq, dH_dp=dH_dp, dH_dS=dH_dS,
                           inverse_legendre=inverse)


def temperature(ham, x):
    """T = dH/dS at a StateSimple (scalar entropy)."""
    return float(ham.dH_dS(x.q, x.p, x.S))


def temperatures(ham, x):
    """Per-subsystem T_i = dH/dS_i at a StateDiscrete (vector entropy)."""
    return np.asarray(ham.dH_dS(x.q, x.p, x.S), dtype=float)
