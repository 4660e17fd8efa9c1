"""Purification of ballistically generated Raussendorf cluster lattices.

The package samples faulty 3D cluster lattices under a probabilistic fusion
model, renormalizes them box by box into a smaller below-threshold lattice,
and reproduces the quantitative error-rate, path-length and scaling
behavior of that pipeline.
"""

from .analysis import (
    ADAPTIVE_LOSS_THRESHOLD,
    STATIC_LOSS_THRESHOLD,
    ErrorModelParams,
    SweepReport,
    node_error_rate,
    path_error_rate,
    path_length_histogram,
    required_fidelity,
    sweep_box_size,
    sweep_input_error,
    timing_scaling,
)
from .errors import (
    AddressingError,
    ConfigError,
    ContractViolation,
    ParseError,
    RaussimError,
    StatsError,
)
from .graphstate import (
    Basis,
    GraphState,
    MeasurementPlan,
    NodeId,
    contract_path,
    measure_y,
    measure_z,
    reduce_by_plan,
)
from .lattice import (
    FaultyInstance,
    GenModel,
    LatticeGeometry,
    ModelKind,
    build_perfect_lattice,
    generate_faulty,
    spanning_check,
    translate_faults_to_loss,
)
from .renormalize import (
    BondStatus,
    BoxGrid,
    PathRecord,
    PurifiedLattice,
    Structure,
    enumerate_structures,
    find_path,
    output_error_rate,
    renormalize,
    select_structure,
)

__version__ = "0.1.0"

__all__ = [
    "ADAPTIVE_LOSS_THRESHOLD",
    "STATIC_LOSS_THRESHOLD",
    "AddressingError",
    "Basis",
    "BondStatus",
    "BoxGrid",
    "ConfigError",
    "ContractViolation",
    "ErrorModelParams",
    "FaultyInstance",
    "GenModel",
    "GraphState",
    "LatticeGeometry",
    "MeasurementPlan",
    "ModelKind",
    "NodeId",
    "ParseError",
    "PathRecord",
    "PurifiedLattice",
    "RaussimError",
    "StatsError",
    "Structure",
    "SweepReport",
    "build_perfect_lattice",
    "contract_path",
    "enumerate_structures",
    "find_path",
    "generate_faulty",
    "measure_y",
    "measure_z",
    "node_error_rate",
    "output_error_rate",
    "path_error_rate",
    "path_length_histogram",
    "reduce_by_plan",
    "renormalize",
    "required_fidelity",
    "select_structure",
    "spanning_check",
    "sweep_box_size",
    "sweep_input_error",
    "timing_scaling",
    "translate_faults_to_loss",
]
