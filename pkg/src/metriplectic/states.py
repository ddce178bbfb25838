"""State containers for every supported system class, plus scalar observables.

A state is a small immutable bundle of float64 numpy arrays.  Every class
exposes the same flat-coordinate protocol: ``coords()`` returns a copy of the
coordinates in the documented layout, ``with_coords(flat)`` rebuilds a state of
the same shape, and ``split(flat)`` cuts a flat vector (typically a gradient)
into the named blocks.  Layouts::

    StateSimple    (q, p, S)           length 2d + 1
    StateDiscrete  (q, p, S_1..S_N)    length 2d + N
    StateLie       (mu, a, s)          length n + k + 1
    StateField1D   (m, rho, s)         length 3n

An Observable is a scalar function of one state class with an optional analytic
gradient in the flat layout.  ``grad`` falls back to central differences with
per-coordinate step h = eps**(1/3) * max(1, |x_i|).
"""

from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np

from .errors import ArityMismatch, NonFiniteGradient

FD_STEP_SCALE = float(np.finfo(float).eps) ** (1.0 / 3.0)

SimpleParts = namedtuple("SimpleParts", ["q", "p", "S"])
DiscreteParts = namedtuple("DiscreteParts", ["q", "p", "S"])
LieParts = namedtuple("LieParts", ["mu", "a", "s"])
FieldParts = namedtuple("FieldParts", ["m", "rho", "s"])


def _vector(v, name):
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValueError("%s must be one-dimensional" % name)
    if not np.all(np.isfinite(arr)):
        raise ValueError("%s has non-finite entries" % name)
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


def _scalar(v, name):
    out = float(v)
    if not np.isfinite(out):
        raise ValueError("%s must be finite" % name)
    return out


def _set(obj, **kv):
    for k, v in kv.items():
        object.__setattr__(obj, k, v)


@dataclass(frozen=True, eq=False)
class StateSimple:
    """Point (q, p, S) of a mechanical phase space with one entropy."""

    q: np.ndarray
    p: np.ndarray
    S: float

    def __post_init__(self):
        _set(self, q=_vector(self.q, "q"), p=_vector(self.p, "p"),
             S=_scalar(self.S, "S"))
        if self.q.shape != self.p.shape:
            raise ValueError("q and p must have equal length")

    @property
    def d(self):
        return self.q.size

    @property
    def ncoords(self):
        return 2 * self.q.size + 1

    def coords(self):
        return np.concatenate([self.q, self.p, [self.S]])

    def with_coords(self, flat):
        d = self.q.size
        return StateSimple(flat[:d], flat[d:2 * d], flat[2 * d])

    def split(self, flat):
        d = self.q.size
        return SimpleParts(flat[:d], flat[d:2 * d], flat[2 * d])


@dataclass(frozen=True, eq=False)
class StateDiscrete:
    """Point (q, p, S_1..S_N) for N coupled entropy-carrying subsystems."""

    q: np.ndarray
    p: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        _set(self, q=_vector(self.q, "q"), p=_vector(self.p, "p"),
             S=_vector(self.S, "S"))
        if self.q.shape != self.p.shape:
            raise ValueError("q and p must have equal length")
        if self.S.size < 1:
            raise ValueError("at least one entropy is required")

    @property
    def d(self):
        return self.q.size

    @property
    def N(self):
        return self.S.size

    @property
    def ncoords(self):
        return 2 * self.q.size + self.S.size

    def coords(self):
        return np.concatenate([self.q, self.p, self.S])

    def with_coords(self, flat):
        d = self.q.size
        return StateDiscrete(flat[:d], flat[d:2 * d], flat[2 * d:])

    def split(self, flat):
        d = self.q.size
        return DiscreteParts(flat[:d], flat[d:2 * d], flat[2 * d:])


@dataclass(frozen=True, eq=False)
class StateLie:
    """Point (mu, a, s): dual algebra coordinates, advected vector, entropy."""

    mu: np.ndarray
    a: np.ndarray = field(default_factory=lambda: np.zeros(0))
    s: float = 0.0

    def __post_init__(self):
        _set(self, mu=_vector(self.mu, "mu"),
             a=np.zeros(0) if np.size(self.a) == 0 else _vector(self.a, "a"),
             s=_scalar(self.s, "s"))

    @property
    def n(self):
        return self.mu.size

    @property
    def k(self):
        return self.a.size

    @property
    def ncoords(self):
        return self.mu.size + self.a.size + 1

    def coords(self):
        return np.concatenate([self.mu, self.a, [self.s]])

    def with_coords(self, flat):
        n, k = self.mu.size, self.a.size
        return StateLie(flat[:n], flat[n:n + k], flat[n + k])

    def split(self, flat):
        n, k = self.mu.size, self.a.size
        return LieParts(flat[:n], flat[n:n + k], flat[n + k])


@dataclass(frozen=True, eq=False)
class StateField1D:
    """Periodic 1-d fluid fields (m, rho, s) sampled on n cells."""

    m: np.ndarray
    rho: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        _set(self, m=_vector(self.m, "m"), rho=_vector(self.rho, "rho"),
             s=_vector(self.s, "s"))
        n = self.m.size
        if self.rho.size != n or self.s.size != n:
            raise ValueError("m, rho, s must share one length")
        if n < 4:
            raise ValueError("need at least 4 cells")
        if np.any(self.rho <= 0.0):
            raise ValueError("rho must be positive everywhere")

    @property
    def n(self):
        return self.m.size

    @property
    def ncoords(self):
        return 3 * self.m.size

    def coords(self):
        return np.concatenate([self.m, self.rho, self.s])

    def with_coords(self, flat):
        n = self.m.size
        return StateField1D(flat[:n], flat[n:2 * n], flat[2 * n:])

    def split(self, flat):
        n = self.m.size
        return FieldParts(flat[:n], flat[n:2 * n], flat[2 * n:])


def unsafe_with_coords(template, flat):
    """Rebuild a state like ``template`` from flat coordinates, skipping
    validation.  Integrator-internal; callers own the admissibility check."""
    cls = type(template)
    out = object.__new__(cls)
    if cls is StateSimple:
        d = template.q.size
        _set(out, q=flat[:d], p=flat[d:2 * d], S=flat[2 * d])
    elif cls is StateDiscrete:
        d = template.q.size
        _set(out, q=flat[:d], p=flat[d:2 * d], S=flat[2 * d:])
    elif cls is StateLie:
        n, k = template.mu.size, template.a.size
        _set(out, mu=flat[:n], a=flat[n:n + k], s=flat[n + k])
    elif cls is StateField1D:
        n = template.m.size
        _set(out, m=flat[:n], rho=flat[n:2 * n], s=flat[2 * n:])
    else:
        raise TypeError("unknown state class %r" % cls)
    return out


@dataclass(frozen=True, eq=False)
class Observable:
    """Scalar function of one state class.

    ``value`` maps a state to a float.  ``gradient``, when given, maps a state
    to the flat partial-derivative vector in the class layout; otherwise
    central differences are used.  Instances are immutable and shareable.
    """

    arity: type
    value: object
    gradient: object = None
    name: str = ""


def eval_observable(obs, x):
    """Evaluate ``obs`` at state ``x`` (arity-checked)."""
    if not isinstance(x, obs.arity):
        raise ArityMismatch("observable %r reads %s, got %s"
                            % (obs.name or obs, obs.arity.__name__,
                               type(x).__name__))
    return float(obs.value(x))


def _fd_gradient(obs, x):
    flat = x.coords()
    g = np.empty(flat.size)
    for i in range(flat.size):
        h = FD_STEP_SCALE * max(1.0, abs(flat[i]))
        up = flat.copy()
        up[i] += h
        dn = flat.copy()
        dn[i] -= h
        g[i] = (obs.value(x.with_coords(up)) - obs.value(x.with_coords(dn))) / (2.0 * h)
    return g


def grad_observable(obs, x):
    """Flat gradient of ``obs`` at ``x``: analytic if declared, else central
    differences.  Raises NonFiniteGradient naming the first bad coordinate."""
    if not isinstance(x, obs.arity):
        raise ArityMismatch("observable %r reads %s, got %s"
                            % (obs.name or obs, obs.arity.__name__,
                               type(x).__name__))
    if obs.gradient is not None:
        g = np.asarray(obs.gradient(x), dtype=float)
        if g.shape != (x.ncoords,):
            raise ValueError("gradient of %r has shape %s, expected (%d,)"
                             % (obs.name or obs, g.shape, x.ncoords))
    else:
        g = _fd_gradient(obs, x)
    bad = np.flatnonzero(~np.isfinite(g))
    if bad.size:
        raise NonFiniteGradient("gradient of %r is non-finite at coordinate %d"
                                % (obs.name or obs, int(bad[0])))
    return g


class GradientTable:
    """Per-state cache of observable gradients plus memoized scratch values.

    Keys observables by identity (a reference is kept so ids stay unique).
    Used by bracket evaluators so each gradient is computed once per state.
    """

    def __init__(self, x):
        self.state = x
        self._grads = {}
        self._memo = {}

    def gradient(self, obs):
        entry = self._grads.get(id(obs))
        if entry is None:
            entry = (obs, grad_observable(obs, self.state))
            self._grads[id(obs)] = entry
        return entry[1]

    def parts(self, obs):
        key = ("parts", id(obs))
        out = self._memo.get(key)
        if out is None:
            out = self.state.split(self.gradient(obs))
            self._memo[key] = out
        return out

    def memo(self, key, thunk):
        if key not in self._memo:
            self._memo[key] = thunk()
        return self._memo[key]


def table_for(x, table=None):
    """Return ``table`` if it caches state ``x``, else a fresh GradientTable."""
    if table is not None and table.state is x:
        return table
    return GradientTable(x)
