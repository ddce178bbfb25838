"""Dissipative mechanics through paired generating brackets.

The package integrates a family of built-in thermodynamic systems along two
independent routes, a direct force-balance formulation and a bracket
formulation built from an antisymmetric 2-bracket plus a fully symmetric
4-bracket, and ships property suites checking that the two routes agree and
that the algebraic identities behind the construction hold.
"""

from .brackets import (Bracket2, Bracket4, SymTensor2Field, canonical_bracket2,
                       kn_product, lie_poisson, metric4_discrete_friction,
                       metric4_ep, metric4_first_form, metric4_no_symplectic,
                       metric4_symmetric_form, metric4_transfer,
                       poisson_canonical, reduce_to_2)
from .dynamics import (EngineKind, Trajectory, coordinate_names, integrate,
                       rhs_bracket, rhs_euler_lagrange)
from .errors import (ArityMismatch, ConfigError, DegenerateK, DomainViolation,
                     LegendreInversionFailure, MetriplecticError,
                     NonFiniteGradient, NonpositiveTemperature,
                     SingularFrictionMatrix, SpecError, UnsupportedSuite)
from .fluid1d import (FluidParams, FluidSystem1D, Grid1D, PolytropicEOS,
                      d_central, functional_gradient, heat_bracket4,
                      lie_poisson_fluid, reduced_2brackets, visc_bracket4)
from .legendre import (HamiltonianSide, LagrangianSide, invert_momentum,
                       momentum, temperature, temperatures, to_hamiltonian)
from .prng import SplitMix64
from .states import (GradientTable, Observable, StateDiscrete, StateField1D,
                     StateLie, StateSimple, eval_observable, grad_observable,
                     table_for, unsafe_with_coords)
from .systems import (DiscreteSystemSpec, ExpEntropyEnergy, IdealGasEnergy,
                      LieSystemSpec, LinearEntropyEnergy, NoSympSystemSpec,
                      SimpleSystemSpec, TwoPistonGeometry, builtin_chemical,
                      builtin_piston, builtin_rigid_body_thermo,
                      builtin_two_pistons, heat_flux_matrix, so3_structure)
from .verify import (SUITES, TOLERANCES, VerifyReport, fd_variant,
                     random_observable, run_suite)

__version__ = "0.1.0"

__all__ = [
    "ArityMismatch",
    "Bracket2",
    "Bracket4",
    "ConfigError",
    "DegenerateK",
    "DiscreteSystemSpec",
    "DomainViolation",
    "EngineKind",
    "ExpEntropyEnergy",
    "FluidParams",
    "FluidSystem1D",
    "GradientTable",
    "Grid1D",
    "HamiltonianSide",
    "IdealGasEnergy",
    "LagrangianSide",
    "LegendreInversionFailure",
    "LieSystemSpec",
    "LinearEntropyEnergy",
    "MetriplecticError",
    "NoSympSystemSpec",
    "NonFiniteGradient",
    "NonpositiveTemperature",
    "Observable",
    "PolytropicEOS",
    "SUITES",
    "SimpleSystemSpec",
    "SingularFrictionMatrix",
    "SpecError",
    "SplitMix64",
    "StateDiscrete",
    "StateField1D",
    "StateLie",
    "StateSimple",
    "SymTensor2Field",
    "TOLERANCES",
    "Trajectory",
    "TwoPistonGeometry",
    "UnsupportedSuite",
    "VerifyReport",
    "builtin_chemical",
    "builtin_piston",
    "builtin_rigid_body_thermo",
    "builtin_two_pistons",
    "canonical_bracket2",
    "coordinate_names",
    "d_central",
    "eval_observable",
    "fd_variant",
    "functional_gradient",
    "grad_observable",
    "heat_bracket4",
    "heat_flux_matrix",
    "integrate",
    "invert_momentum",
    "kn_product",
    "lie_poisson",
    "lie_poisson_fluid",
    "metric4_discrete_friction",
    "metric4_ep",
    "metric4_first_form",
    "metric4_no_symplectic",
    "metric4_symmetric_form",
    "metric4_transfer",
    "momentum",
    "poisson_canonical",
    "random_observable",
    "reduce_to_2",
    "reduced_2brackets",
    "rhs_bracket",
    "rhs_euler_lagrange",
    "run_suite",
    "so3_structure",
    "table_for",
    "temperature",
    "temperatures",
    "to_hamiltonian",
    "unsafe_with_coords",
    "visc_bracket4",
]
