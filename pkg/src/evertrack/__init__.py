"""Quasi-static simulator for a track-everting, chamber-inflating capsule
robot navigating rigid and deformable lumens.

The layers, bottom up: `transmission` (worm drive force budget),
`membrane` (inflatable chamber cross-section equilibria), `lumen`
(environment geometry and wall models), `contact` (robot-in-lumen force
balance, traction, tilt), `navigation` (quasi-static stepping),
`calibration`/`scenario` (YAML documents to model objects), `cli` (batch
runs and the bench-experiment suite), `service` (live teleoperation
backend).  The CLI and service are not imported here so the physics core
stays importable without the web stack.
"""

from .calibration import Calibration, load_calibration
from .contact import (
    ContactState,
    RobotGeometry,
    TiltResult,
    TrackSet,
    TractionResult,
    equilibrium_contact,
    tilt_angle,
    traction,
)
from .errors import (
    ConvergenceError,
    MembraneError,
    OverInflationError,
    ScenarioError,
    SimulationError,
    StepError,
    StiffnessError,
)
from .lumen import (
    Elbow,
    ElasticWall,
    LumenModel,
    LumenSegment,
    RigidWall,
    Straight,
    Waviness,
    paper_fixtures,
)
from .membrane import (
    ChamberModel,
    ChamberProfile,
    ChamberShape,
    OgdenMaterial,
    SolverOptions,
)
from .navigation import (
    Command,
    ResistanceModel,
    RobotModel,
    RobotState,
    SimConfig,
    SimTrace,
    TetherModel,
    TimedCommand,
    TraceRow,
    matched_inflation_kPa,
    run,
    run_scenario,
    stall_pressure_kPa,
    traction_sweep,
)
from .scenario import ScenarioSpec, load_scenario, packaged_scenarios
from .transmission import (
    GearheadParams,
    TransmissionForces,
    WormGearParams,
    drivetrain_forces,
    robot_speed,
)

__version__ = "0.1.0"

__all__ = [
    "Calibration",
    "ChamberModel",
    "ChamberProfile",
    "ChamberShape",
    "Command",
    "ContactState",
    "ConvergenceError",
    "Elbow",
    "ElasticWall",
    "GearheadParams",
    "LumenModel",
    "LumenSegment",
    "MembraneError",
    "OgdenMaterial",
    "OverInflationError",
    "ResistanceModel",
    "RigidWall",
    "RobotGeometry",
    "RobotModel",
    "RobotState",
    "ScenarioError",
    "ScenarioSpec",
    "SimConfig",
    "SimTrace",
    "SimulationError",
    "SolverOptions",
    "StepError",
    "StiffnessError",
    "Straight",
    "TetherModel",
    "TiltResult",
    "TimedCommand",
    "TraceRow",
    "TrackSet",
    "TractionResult",
    "TransmissionForces",
    "Waviness",
    "WormGearParams",
    "drivetrain_forces",
    "equilibrium_contact",
    "load_calibration",
    "load_scenario",
    "matched_inflation_kPa",
    "packaged_scenarios",
    "paper_fixtures",
    "robot_speed",
    "run",
    "run_scenario",
    "stall_pressure_kPa",
    "tilt_angle",
    "traction",
    "traction_sweep",
    "__version__",
]
