"""1D elastic bar with unilateral contact at x = 0: weighted P1 mass
redistribution, time integrators, energy diagnostics and an exact benchmark."""

from .assembly import (
    AssembledSystem,
    InvalidModeError,
    Mesh1D,
    Mode,
    WeightProfile,
    assemble_load,
    assemble_mass,
    assemble_stiffness,
    assemble_system,
    build_weights,
    custom_weights,
    reduce_system,
)
from .banded import LDLT, NotSPDError, SymTridiag
from .contact import (
    ComplementarityError,
    EnergyLedger,
    Layout,
    State,
    discrete_energy,
    energy_increment,
    rhs_G,
    solve_contact_step,
)
from .experiments import ScenarioConfig, compare_mods, run_scenario
from .integrators import (
    ConfigurationError,
    DegenerateBranchError,
    Scheme,
    SchemeParams,
    initial_state,
    integrate,
)

__version__ = "0.1.0"
