"""Joint DFBS beamforming and STAR-RIS coefficient design for ISAC."""

from .errors import (ConfigError, DegenerateFilter, InfeasibleScenario, InvalidInput,
                     NumericalFailure, RecoveryFailure)
from .scenario import SystemConfig, generate_channels, load_config, scenario
from .metrics import BeamformerSet, StarCoefficients, audit
from .optimizer import alternating_optimize

__version__ = "0.1.0"
