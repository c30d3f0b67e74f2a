from abc import ABC, abstractmethod
from typing import Any, Dict, Optional, Tuple
import logging
import sys

import numpy as np
import pandas as pd

from KahlerDuality.core.duality import candidate_lambda, origin_gradient
from KahlerDuality.core.potentials import (
    Potential,
    PolarizedPotential,
    RadialPotential,
    catalog,
)
from KahlerDuality.core.verify import DEFAULT_COUNT, DEFAULT_RADIUS_FRACTION, DEFAULT_SEED, GridSpec

# Catalog parameters each entry accepts, keyed by the run-config attribute that carries them
CATALOG_PARAMETERS = {
    "flat": {"c": "c"},
    "scaled_hyperbolic": {"mu": "mu"},
    "taubnut": {"m": "m"},
    "hartogs": {"F": "F", "n": "dim"},
}


class BaseAgent(ABC):
    """Base class for the command agents"""

    agent_name = "base"
    agent_description = ""

    def __init__(self, config: Dict[str, Any] = None):
        self.config = config or {}
        self.logger = logging.getLogger(self.__class__.__name__)

    def setup_logging(self):
        """Configure logging for the agent - records go to stderr so report output stays clean"""
        logging.basicConfig(
            level=self.get_config("log_level", "WARNING"),
            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            stream=sys.stderr,
        )

    @abstractmethod
    def process(self, input_data: Any) -> Dict[str, Any]:
        """Run the command and return a result dict with a status"""
        pass

    def validate(self, data: Any) -> bool:
        """Validate the run configuration"""
        if not getattr(data, "potential", None):
            return False
        lam = getattr(data, "lam", "auto")
        return lam == "auto" or (isinstance(lam, float) and lam > 0.0)

    def log_error(self, error: Exception, context: str = ""):
        """Log errors with context"""
        self.logger.error(f"{context}: {str(error)}")

    def get_config(self, key: str, default: Any = None) -> Any:
        """Get configuration value with default fallback"""
        return self.config.get(key, default)

    def update_config(self, key: str, value: Any):
        """Update configuration value"""
        self.config[key] = value

    # Shared helpers for the commands

    def build_potential(self, run) -> Potential:
        """Catalog lookup with the parameters the entry understands"""
        params = {}
        for param, attribute in CATALOG_PARAMETERS.get(run.potential, {}).items():
            value = getattr(run, attribute, None)
            if value is not None:
                params[param] = value
        if run.potential == "parabola_rotation":
            params["lam"] = 1.0 if run.lam == "auto" else run.lam
        potential = catalog(run.potential, **params)
        self.logger.info(f"Built potential {potential.name} with {params}")
        return potential

    def resolve_lambda(self, potential: Potential, run) -> Tuple[float, Dict[str, Any]]:
        """Explicit lambda, or the candidate 1/f'(0) with its provenance"""
        if run.lam != "auto":
            return float(run.lam), {"lambda_source": "explicit"}
        lam = candidate_lambda(potential)
        gradient = origin_gradient(potential).tolist()
        if lam is None:
            raise ValueError(f"no admissible lambda: gradient at the origin is {gradient}")
        self.logger.info(f"Derived lambda={lam!r} from gradient {gradient} at the origin")
        return lam, {"lambda_source": "auto", "gradient_at_origin": gradient}

    def dimension(self, potential: Potential, run) -> int:
        if isinstance(potential, RadialPotential):
            return run.dim or 1
        return potential.n

    def radius(self, potential: Potential, run, default: Optional[float] = None) -> float:
        if run.radius is not None:
            return run.radius
        if default is not None:
            return default
        return DEFAULT_RADIUS_FRACTION * potential.radius

    def grid(self, potential: Potential, run, n: int) -> GridSpec:
        return GridSpec(
            n=n,
            radius=self.radius(potential, run),
            count=run.count or self.get_config("count", DEFAULT_COUNT),
            scheme="seeded-random",
            seed=self.get_config("seed", DEFAULT_SEED) if run.seed is None else run.seed,
        )

    def radial_samples(self, potential: Potential, run) -> np.ndarray:
        """Uniform x grid on [0, radius²]"""
        count = run.count or self.get_config("count", DEFAULT_COUNT)
        return np.linspace(0.0, self.radius(potential, run) ** 2, count)

    @staticmethod
    def require_not_polarized(potential: Potential, command: str):
        if isinstance(potential, PolarizedPotential):
            raise ValueError(f"{command} needs a radial or rotation-invariant potential, "
                             f"{potential.name} is polarized")

    @staticmethod
    def result(status: str, message: str, header: Dict[str, Any], table: Optional[pd.DataFrame] = None,
               reports: Optional[list] = None) -> Dict[str, Any]:
        return {
            'status': status,
            'message': message,
            'header': header,
            'table': table,
            'reports': reports,
        }
