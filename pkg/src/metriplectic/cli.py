"""Command-line front end.

Three subcommands: ``simulate`` integrates one scenario and writes a CSV
trajectory plus a JSON run summary; ``verify`` runs a property suite and
prints its JSON report; ``compare`` integrates the same scenario through both
tangent assemblies and reports the pointwise divergence.

Scenarios are TOML files (see the README for the key schema).  Every
parameter is validated before anything is written, so a bad config never
leaves files behind.  CSV numbers are printed with 17 significant digits and
``\n`` line endings, making reruns byte-identical.

Exit codes: simulate 0 ok / 1 config error / 2 domain violation (the partial
CSV survives, closed with a ``#``-prefixed truncation marker row); verify 0
pass / 1 fail / 2 configuration problem; compare 0 within tolerance / 1
diverged / 1 config error / 2 domain violation.  Logging verbosity comes from
METRIPLECTIC_LOG={error|info|debug}.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # stdlib from 3.11 on
    import tomli as tomllib

from .dynamics import EngineKind, coordinate_names, integrate
from .errors import (ConfigError, DomainViolation, NonpositiveTemperature,
                     SpecError, UnsupportedSuite)
from .fluid1d import FluidParams, FluidSystem1D, Grid1D, PolytropicEOS
from .prng import SplitMix64
from .states import StateDiscrete, StateLie, StateSimple, StateField1D
from .systems import (ExpEntropyEnergy, IdealGasEnergy, LinearEntropyEnergy,
                      TwoPistonGeometry, builtin_chemical, builtin_piston,
                      builtin_rigid_body_thermo, builtin_two_pistons)
from .verify import SUITES, run_suite

log = logging.getLogger("metriplectic.cli")

SYSTEM_NAMES = ("piston", "two_pistons", "chemical", "rigid_body", "fluid1d")

#: compare passes when max |state_el - state_bracket| over the run stays
#: below this per-step budget times the step count, times a size scale.
COMPARE_TOL_PER_STEP = 1e-13


def _fmt(v):
    return "%.17g" % float(v)


def _fail_line(kind, message):
    sys.stderr.write("metriplectic: %s: %s\n" % (kind, message))


def _setup_logging():
    name = os.environ.get("METRIPLECTIC_LOG", "error").strip().lower()
    levels = {"error": logging.ERROR, "info": logging.INFO,
              "debug": logging.DEBUG}
    if name not in levels:
        raise ConfigError("METRIPLECTIC_LOG must be one of error, info, debug"
                          " (got %r)" % name)
    logging.basicConfig(level=levels[name],
                        format="%(levelname)s %(name)s: %(message)s")


# ---------------------------------------------------------------------------
# config parsing


def load_config(path):
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError("config file %r does not exist" % path)
    except OSError as exc:
        raise ConfigError("cannot read config file %r: %s" % (path, exc))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config file %r is not valid TOML: %s" % (path, exc))


def _kwargs(table, defaults, what):
    """Fill ``defaults`` from ``table``, rejecting unknown keys."""
    if not isinstance(table, dict):
        raise ConfigError("%s must be a table" % what)
    out = dict(defaults)
    for key, value in table.items():
        if key not in out:
            raise ConfigError("unknown key %r in %s (allowed: %s)"
                              % (key, what, ", ".join(sorted(out))))
        out[key] = value
    return out


def _matrix(value, size, what):
    """Scalar -> scalar * identity; nested lists -> dense matrix."""
    if isinstance(value, (int, float)):
        return float(value) * np.eye(size)
    arr = np.asarray(value, dtype=float)
    if arr.shape != (size, size):
        raise ConfigError("%s must be a scalar or a %dx%d matrix"
                          % (what, size, size))
    return arr


def _ideal_gas(table, what, default_area=1.0):
    kw = _kwargs(table, {"n_moles": 1.0, "c_v": 1.0, "gas_const": 1.0,
                         "area": default_area, "V0": 1.0, "S0": 0.0,
                         "U0": 1.0}, what)
    return IdealGasEnergy(**{k: float(v) for k, v in kw.items()})


def _entropy_energy(table, what, default_kind="linear"):
    kind = table.get("kind", default_kind)
    if kind == "linear":
        kw = _kwargs(table, {"kind": "linear", "T0": 1.0}, what)
        return LinearEntropyEnergy(T0=float(kw["T0"]))
    if kind == "exp":
        kw = _kwargs(table, {"kind": "exp", "e0": 1.0, "c0": 1.0}, what)
        return ExpEntropyEnergy(e0=float(kw["e0"]), c0=float(kw["c0"]))
    raise ConfigError("%s.kind must be 'linear' or 'exp'" % what)


def _build_piston(cfg):
    kw = _kwargs(cfg, {"kind": "piston", "mass": 1.0, "lambda": 1.0,
                       "dissipative": True, "eos": {}}, "[system]")
    return builtin_piston(mass=float(kw["mass"]), lam=float(kw["lambda"]),
                          eos=_ideal_gas(kw["eos"], "[system.eos]"),
                          dissipative=bool(kw["dissipative"]))


def _build_two_pistons(cfg):
    kw = _kwargs(cfg, {"kind": "two_pistons", "mass": 1.0, "lambda1": 1.0,
                       "lambda2": 1.0, "kappa": 1.0, "geometry": {},
                       "eos1": {}, "eos2": {}}, "[system]")
    geo_kw = _kwargs(kw["geometry"], {"length": 2.0, "area1": 1.0,
                                      "area2": 1.0}, "[system.geometry]")
    geometry = TwoPistonGeometry(**{k: float(v) for k, v in geo_kw.items()})
    eos1 = _ideal_gas(kw["eos1"], "[system.eos1]", geometry.area1)
    eos2 = _ideal_gas(kw["eos2"], "[system.eos2]", geometry.area2)
    return builtin_two_pistons(mass=float(kw["mass"]),
                               lams=(float(kw["lambda1"]), float(kw["lambda2"])),
                               kappa12=float(kw["kappa"]),
                               eoses=(eos1, eos2), geometry=geometry)


def _build_chemical(cfg):
    kw = _kwargs(cfg, {"kind": "chemical", "psi_star": [1.0, -1.0],
                       "Q": None, "lambda": 1.0, "entropy_energy": {}},
                 "[system]")
    psi_star = np.asarray(kw["psi_star"], dtype=float)
    if psi_star.ndim != 1 or psi_star.size < 1:
        raise ConfigError("[system].psi_star must be a nonempty list")
    r = psi_star.size
    q_mat = np.eye(r) if kw["Q"] is None else _matrix(kw["Q"], r, "[system].Q")
    lam = _matrix(kw["lambda"], r, "[system].lambda")
    return builtin_chemical(Q=q_mat, psi_star=psi_star, lam=lam,
                            entropy_energy=_entropy_energy(
                                kw["entropy_energy"],
                                "[system.entropy_energy]"))


def _build_rigid_body(cfg):
    kw = _kwargs(cfg, {"kind": "rigid_body", "inertia": [1.0, 2.0, 3.0],
                       "Lambda": 1.0, "entropy_energy": {}}, "[system]")
    inertia = np.asarray(kw["inertia"], dtype=float)
    if inertia.shape == (3,):
        inertia = np.diag(inertia)
    elif inertia.shape != (3, 3):
        raise ConfigError("[system].inertia must be a 3-list or a 3x3 matrix")
    return builtin_rigid_body_thermo(
        inertia=inertia, lam=_matrix(kw["Lambda"], 3, "[system].Lambda"),
        entropy_energy=_entropy_energy(kw["entropy_energy"],
                                       "[system.entropy_energy]",
                                       default_kind="exp"))


def _build_fluid(cfg):
    kw = _kwargs(cfg, {"kind": "fluid1d", "n": 32, "length": 1.0,
                       "mu": 0.01, "kappa": 0.01, "eos": {}}, "[system]")
    eos_kw = _kwargs(kw["eos"], {"gamma": 1.4, "c_v": 1.0, "c": 1.0},
                     "[system.eos]")
    eos = PolytropicEOS(**{k: float(v) for k, v in eos_kw.items()})
    grid = Grid1D(n=int(kw["n"]), length=float(kw["length"]))
    params = FluidParams(mu=float(kw["mu"]), kappa=float(kw["kappa"]), eos=eos)
    return FluidSystem1D(grid=grid, params=params)


_SYSTEM_BUILDERS = {
    "piston": _build_piston,
    "two_pistons": _build_two_pistons,
    "chemical": _build_chemical,
    "rigid_body": _build_rigid_body,
    "fluid1d": _build_fluid,
}


def build_system(sys_cfg):
    """Construct a system spec from a [system] config table."""
    if not isinstance(sys_cfg, dict) or "kind" not in sys_cfg:
        raise ConfigError("the [system] table needs a 'kind' key")
    kind = sys_cfg["kind"]
    builder = _SYSTEM_BUILDERS.get(kind)
    if builder is None:
        raise ConfigError("unknown system kind %r (choose from %s)"
                          % (kind, ", ".join(SYSTEM_NAMES)))
    try:
        return builder(sys_cfg)
    except SpecError as exc:
        raise ConfigError("invalid %s parameters: %s" % (kind, exc))


def default_system(name):
    builder = _SYSTEM_BUILDERS.get(name)
    if builder is None:
        raise ConfigError("unknown system %r (choose from %s)"
                          % (name, ", ".join(SYSTEM_NAMES)))
    return builder({"kind": name})


def _vector_key(table, key, what):
    if key not in table:
        raise ConfigError("missing %r in %s" % (key, what))
    arr = np.asarray(table[key], dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    return arr


def build_state(spec, state_cfg):
    """Construct and admissibility-check the initial state."""
    if not isinstance(state_cfg, dict):
        raise ConfigError("the [state] table is required")
    what = "[state]"
    try:
        if isinstance(spec, FluidSystem1D):
            if "profile_seed" in state_cfg:
                kw = _kwargs(state_cfg, {"profile_seed": 0}, what)
                x0 = spec.sample_state(SplitMix64(int(kw["profile_seed"])))
            else:
                kw = _kwargs(state_cfg, {"m": None, "rho": None, "s": None},
                             what)
                if any(kw[k] is None for k in ("m", "rho", "s")):
                    raise ConfigError("fluid states need m, rho, s arrays or "
                                      "a profile_seed")
                x0 = StateField1D(m=_vector_key(kw, "m", what),
                                  rho=_vector_key(kw, "rho", what),
                                  s=_vector_key(kw, "s", what))
                if x0.n != spec.grid.n:
                    raise ConfigError("state arrays have %d cells, grid has %d"
                                      % (x0.n, spec.grid.n))
        elif spec.kind == "no_symplectic":
            kw = _kwargs(state_cfg, {"q": None, "S": 0.0}, what)
            x0 = spec.make_state(_vector_key(kw, "q", what), float(kw["S"]))
        elif spec.kind == "simple":
            kw = _kwargs(state_cfg, {"q": None, "p": None, "S": 0.0}, what)
            x0 = StateSimple(q=_vector_key(kw, "q", what),
                             p=_vector_key(kw, "p", what), S=float(kw["S"]))
        elif spec.kind == "discrete":
            kw = _kwargs(state_cfg, {"q": None, "p": None, "S": None}, what)
            x0 = StateDiscrete(q=_vector_key(kw, "q", what),
                               p=_vector_key(kw, "p", what),
                               S=_vector_key(kw, "S", what))
        elif spec.kind == "lie":
            kw = _kwargs(state_cfg, {"mu": None, "a": [], "s": 0.0}, what)
            x0 = StateLie(mu=_vector_key(kw, "mu", what),
                          a=np.asarray(kw["a"], dtype=float),
                          s=float(kw["s"]))
        else:
            raise ConfigError("no state builder for system kind %r" % spec.kind)
    except ValueError as exc:
        raise ConfigError("invalid [state]: %s" % exc)
    if not isinstance(x0, spec.state_class):
        raise ConfigError("state does not match system %r" % spec.name)
    if not spec.is_admissible(x0):
        raise ConfigError("initial state is outside the admissible domain of "
                          "%s" % spec.name)
    return x0


@dataclass(frozen=True)
class IntegratorConfig:
    method: str
    dt: float
    t_final: float
    engine: EngineKind
    bracket_form: str


def build_integrator(spec, integ_cfg):
    kw = _kwargs(integ_cfg, {"method": "rk4", "dt": None, "t_final": None,
                             "engine": "euler_lagrange",
                             "bracket_form": None}, "[integrator]")
    if kw["dt"] is None or kw["t_final"] is None:
        raise ConfigError("[integrator] needs dt and t_final")
    if kw["method"] not in ("rk4", "euler"):
        raise ConfigError("[integrator].method must be rk4 or euler")
    try:
        engine = EngineKind(kw["engine"])
    except ValueError:
        raise ConfigError("[integrator].engine must be euler_lagrange or "
                          "bracket")
    form = kw["bracket_form"]
    if form is None:
        form = "symmetric"
    elif spec.kind != "simple":
        raise ConfigError("bracket_form only applies to simple systems")
    elif form not in ("symmetric", "first"):
        raise ConfigError("[integrator].bracket_form must be symmetric or "
                          "first")
    dt = float(kw["dt"])
    t_final = float(kw["t_final"])
    if not dt > 0.0 or not t_final > 0.0:
        raise ConfigError("[integrator] dt and t_final must be positive")
    nsteps = int(round(t_final / dt))
    if nsteps < 1 or abs(nsteps * dt - t_final) > 1e-6 * max(dt, t_final):
        raise ConfigError("t_final=%g is not an integer multiple of dt=%g"
                          % (t_final, dt))
    return IntegratorConfig(method=kw["method"], dt=dt, t_final=t_final,
                            engine=engine, bracket_form=form)


@dataclass(frozen=True)
class OutputConfig:
    directory: str
    prefix: str


def build_output(cfg, args_out, default_prefix):
    kw = _kwargs(cfg, {"dir": ".", "prefix": default_prefix}, "[output]")
    directory = args_out if args_out else str(kw["dir"])
    return OutputConfig(directory=directory, prefix=str(kw["prefix"]))


def _prepare_scenario(path, args_out):
    cfg = load_config(path)
    allowed = {"system": None, "state": None, "integrator": None,
               "output": {}}
    top = _kwargs(cfg, allowed, "scenario config")
    if top["system"] is None:
        raise ConfigError("the [system] table is required")
    if top["integrator"] is None:
        raise ConfigError("the [integrator] table is required")
    spec = build_system(top["system"])
    x0 = build_state(spec, top["state"])
    integ = build_integrator(spec, top["integrator"])
    out = build_output(top["output"], args_out, spec.name)
    return spec, x0, integ, out


# ---------------------------------------------------------------------------
# output writers


def _temperature_headers(traj):
    ncols = traj.diagnostics["T"].shape[1]
    if ncols == 1:
        return ["T"]
    return ["T_%d" % (i + 1) for i in range(ncols)]


def write_trajectory_csv(path, spec, traj, truncation=None):
    names = coordinate_names(spec)
    diag = traj.diagnostics
    header = ["t"] + names + ["H", "S_total", "dSdt"] + _temperature_headers(traj)
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for i, x in enumerate(traj.states):
            row = ([traj.times[i]] + list(x.coords())
                   + [diag["H"][i], diag["S_total"][i], diag["dSdt"][i]]
                   + list(diag["T"][i]))
            fh.write(",".join(_fmt(v) for v in row) + "\n")
        if truncation is not None:
            fh.write("# truncated at step %d: %s\n"
                     % (truncation[0], truncation[1]))


def _empty_trajectory_csv(path, message):
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write("t\n")
        fh.write("# truncated at step 0: %s\n" % message)


def write_summary_json(path, payload):
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(json.dumps(payload, indent=2) + "\n")


def _summary(spec, integ, traj, csv_name, status, message=None):
    payload = {
        "system": spec.name,
        "engine": integ.engine.value,
        "method": integ.method,
        "dt": integ.dt,
        "t_final": integ.t_final,
        "steps": traj.nsteps if traj is not None else 0,
        "status": status,
        "csv": csv_name,
    }
    if traj is not None and traj.states:
        last = len(traj.states) - 1
        payload["final"] = {
            "t": float(traj.times[last]),
            "H": float(traj.diagnostics["H"][last]),
            "S_total": float(traj.diagnostics["S_total"][last]),
        }
    if message is not None:
        payload["message"] = message
    return payload


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args):
    try:
        spec, x0, integ, out = _prepare_scenario(args.config, args.out)
    except ConfigError as exc:
        _fail_line("config error", str(exc))
        return 1
    os.makedirs(out.directory, exist_ok=True)
    csv_name = out.prefix + ".csv"
    csv_path = os.path.join(out.directory, csv_name)
    summary_path = os.path.join(out.directory, out.prefix + "_summary.json")
    try:
        traj = integrate(spec, x0, integ.dt, integ.t_final,
                         engine=integ.engine, method=integ.method,
                         bracket_form=integ.bracket_form)
    except (DomainViolation, NonpositiveTemperature) as exc:
        partial = getattr(exc, "partial", None)
        step = getattr(exc, "step", None)
        if step is None:
            step = len(partial.states) if partial is not None else 0
        if partial is not None:
            write_trajectory_csv(csv_path, spec, partial,
                                 truncation=(step, str(exc)))
        else:
            _empty_trajectory_csv(csv_path, str(exc))
        write_summary_json(summary_path,
                           _summary(spec, integ, partial, csv_name,
                                    "truncated", str(exc)))
        _fail_line("domain violation", str(exc))
        return 2
    write_trajectory_csv(csv_path, spec, traj)
    write_summary_json(summary_path, _summary(spec, integ, traj, csv_name, "ok"))
    return 0


def cmd_verify(args):
    try:
        if args.spec:
            cfg = load_config(args.spec)
            if "system" not in cfg:
                raise ConfigError("%r has no [system] table" % args.spec)
            spec = build_system(cfg["system"])
        elif args.system:
            spec = default_system(args.system)
        else:
            raise ConfigError("verify needs --system NAME or --spec PATH")
        if args.n < 1:
            raise ConfigError("-n must be at least 1")
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        report = run_suite(args.suite, spec, seed=args.seed, cases=args.n,
                           jobs=args.jobs)
    except (ConfigError, UnsupportedSuite) as exc:
        _fail_line("config error", str(exc))
        return 2
    sys.stdout.write(report.to_json() + "\n")
    return 0 if report.passed else 1


def cmd_compare(args):
    try:
        spec, x0, integ, out = _prepare_scenario(args.config, args.out)
    except ConfigError as exc:
        _fail_line("config error", str(exc))
        return 1
    os.makedirs(out.directory, exist_ok=True)
    trajectories = {}
    for engine in (EngineKind.euler_lagrange, EngineKind.bracket):
        name = out.prefix + "_" + engine.value + ".csv"
        path = os.path.join(out.directory, name)
        try:
            traj = integrate(spec, x0, integ.dt, integ.t_final, engine=engine,
                             method=integ.method,
                             bracket_form=integ.bracket_form)
        except (DomainViolation, NonpositiveTemperature) as exc:
            partial = getattr(exc, "partial", None)
            step = getattr(exc, "step", None)
            if step is None:
                step = len(partial.states) if partial is not None else 0
            if partial is not None:
                write_trajectory_csv(path, spec, partial,
                                     truncation=(step, str(exc)))
            else:
                _empty_trajectory_csv(path, str(exc))
            _fail_line("domain violation",
                       "%s engine: %s" % (engine.value, exc))
            return 2
        write_trajectory_csv(path, spec, traj)
        trajectories[engine] = traj

    t_el = trajectories[EngineKind.euler_lagrange]
    t_br = trajectories[EngineKind.bracket]
    divergence = 0.0
    scale = 0.0
    for a, b in zip(t_el.states, t_br.states):
        ca = a.coords()
        cb = b.coords()
        divergence = max(divergence, float(np.max(np.abs(ca - cb))))
        scale = max(scale, float(np.max(np.abs(ca))), float(np.max(np.abs(cb))))
    tolerance = COMPARE_TOL_PER_STEP * t_el.nsteps * (1.0 + scale)
    passed = divergence <= tolerance
    payload = {
        "system": spec.name,
        "method": integ.method,
        "dt": integ.dt,
        "t_final": integ.t_final,
        "steps": t_el.nsteps,
        "max_divergence": divergence,
        "tolerance": tolerance,
        "pass": passed,
    }
    report_path = os.path.join(out.directory, out.prefix + "_divergence.json")
    write_summary_json(report_path, payload)
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    return 0 if passed else 1


# ---------------------------------------------------------------------------
# entry point


def build_parser():
    parser = argparse.ArgumentParser(
        prog="metriplectic",
        description="Simulate dissipative mechanical systems through two "
                    "independent routes and verify their bracket structure.")
    sub = parser.add_subparsers(dest="cmd", required=True)

    sim = sub.add_parser("simulate", help="integrate one scenario to CSV")
    sim.add_argument("--config", required=True, metavar="PATH",
                     help="TOML scenario file")
    sim.add_argument("--out", metavar="DIR",
                     help="output directory (overrides [output].dir)")
    sim.set_defaults(func=cmd_simulate)

    ver = sub.add_parser("verify", help="run a property suite, print JSON")
    ver.add_argument("--system", choices=SYSTEM_NAMES,
                     help="built-in system with default parameters")
    ver.add_argument("--spec", metavar="PATH",
                     help="TOML file whose [system] table defines the system "
                          "(overrides --system)")
    ver.add_argument("--suite", required=True, choices=SUITES)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("-n", dest="n", type=int, default=100, metavar="CASES",
                     help="number of random cases (default 100)")
    ver.add_argument("--jobs", type=int, default=1,
                     help="shard cases across this many threads")
    ver.set_defaults(func=cmd_verify)

    cmp_ = sub.add_parser("compare",
                          help="run both engines, report their divergence")
    cmp_.add_argument("--config", required=True, metavar="PATH")
    cmp_.add_argument("--out", metavar="DIR")
    cmp_.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _setup_logging()
    except ConfigError as exc:
        _fail_line("config error", str(exc))
        return 2 if args.cmd == "verify" else 1
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
