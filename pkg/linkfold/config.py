import os
import json
from typing import Optional, Tuple
from pydantic import BaseModel
from pydantic_settings import BaseSettings, SettingsConfigDict


class FoldDefaults(BaseModel):
    """Default triple-fold bar lengths (l_a, l_b, l_c)."""
    la: float = 2.0
    lb: float = 1.0
    lc: float = 2.0

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.la, self.lb, self.lc)


class Settings(BaseSettings):
    # Tolerances
    LENGTH_TOL: float = 1e-9        # relative bar-length residual (tau_len)
    ABS_TOL: float = 1e-12          # coincidence / degeneracy
    CLASSIFY_EPS: float = 1e-9      # contact distance for classification

    # Sampling and certificates
    SAMPLES: int = 720
    SEED: int = 7
    GRID: int = 16
    OFF_AXIS_T: float = 0.25
    CLOSURE_TRIALS: int = 1000
    CLOSURE_DELTA: float = 1e-3
    CLOSURE_ACCEPT_FACTOR: float = 3.0

    # Projection onto the length constraints
    PROJECTION_TOL: float = 1e-12
    PROJECTION_MAX_ITER: int = 50
    PROJECTION_MAX_INITIAL: float = 0.2

    # Layout construction
    LAYOUT_MAX_ATTEMPTS: int = 40
    LAYOUT_GROWTH: float = 1.25
    REGION_ARC_SEGMENTS: int = 32
    FOLD: FoldDefaults = FoldDefaults()

    # Persistence
    SIMPLEX_BUDGET: int = 5_000_000
    BETTI_POINTS: int = 120
    BETTI_SPACING: str = "arc"     # arc | uniform
    ARC_RESOLUTION: int = 4096
    SCALE_FRACTION: float = 0.8
    SIGNIFICANCE_RATIO: float = 5.0

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "json"   # json | plain
    LOG_FILE: Optional[str] = None

    # Optional JSON file with overrides, same keys as above
    CONFIG_FILE: Optional[str] = None

    model_config = SettingsConfigDict(env_prefix="LINKFOLD_", env_file=".env", extra="ignore")

    def load_overrides(self, path: Optional[str] = None) -> None:
        """Applies values from a JSON file (default CONFIG_FILE) in place."""
        path = path or self.CONFIG_FILE
        if not path or not os.path.exists(path):
            return

        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)

        for key, value in data.items():
            if key not in type(self).model_fields:
                raise KeyError(f"Unknown setting: {key}")
            if key == "FOLD":
                value = FoldDefaults(**value)
            setattr(self, key, value)


settings = Settings()
