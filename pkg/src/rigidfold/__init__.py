"""Loop-closure kinematics of multi-sheet rigid foldable structures."""
from .errors import RigidFoldError
from .model import RFSModel, Sheet, Connection, parse_model, loads_model, dumps_model, import_fold
from .validation import validate_model, ValidationReport
from .graph import build_graph
from .cycles import minimum_cycle_basis
from .pipeline import Mechanism
from .solver import SolverConfig, simulate
from .geometry import fold_geometry, export_frame

__all__ = ["RigidFoldError", "RFSModel", "Sheet", "Connection", "parse_model", "loads_model",
           "dumps_model", "import_fold", "validate_model", "ValidationReport", "build_graph",
           "minimum_cycle_basis", "Mechanism", "SolverConfig", "simulate", "fold_geometry",
           "export_frame"]
__version__ = "0.1.0"
