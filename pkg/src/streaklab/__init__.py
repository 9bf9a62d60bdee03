"""Monte Carlo streak-camera simulator and fringe analysis for two-laser interference."""
from .analysis import estimate_fringes, folded_visibility, subset_uncertainty, which_path
from .budget import BudgetInput, compute_budget
from .config import ExperimentConfig, emit_config, load_config, parse_config
from .detector import DetectorConfig, Interferogram, SourceState, expected_image, simulate_shot
from .physics import BeamGeometry, FieldPair
from .sources import GateEnvelope, LaserNoiseModel

__version__ = "0.1.0"
