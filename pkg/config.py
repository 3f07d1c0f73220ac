"""
Runtime settings
Read lazily from the environment (.env supported through main.py)
"""

import os
from typing import Optional

from pydantic import BaseModel, Field

# Settings (lazy initialization)
_settings = None


class Settings(BaseModel):
    seed: int = 42
    parallelism: int = Field(default=1, ge=1)
    tolerance: float = Field(default=1e-9, gt=0)
    output_dir: str = "artifacts"
    grid_points: int = Field(default=512, ge=16)
    grid_low: float = Field(default=1e-8, gt=0)
    grid_high: float = Field(default=1e8, gt=0)
    trace_project: Optional[str] = None


def get_settings() -> Settings:
    """Get or create the process-wide settings"""
    global _settings
    if _settings is None:
        _settings = Settings(
            seed=int(os.getenv("WPI_SEED", "42")),
            parallelism=int(os.getenv("WPI_PARALLELISM", "1")),
            tolerance=float(os.getenv("WPI_TOL", "1e-9")),
            output_dir=os.getenv("WPI_OUTPUT_DIR", "artifacts"),
            grid_points=int(os.getenv("WPI_GRID_POINTS", "512")),
            trace_project=os.getenv("OPIK_PROJECT_NAME"),
        )
    return _settings


def override_settings(**changes) -> Settings:
    """Apply CLI overrides on top of the environment values"""
    global _settings
    current = get_settings()
    updates = {key: value for key, value in changes.items() if value is not None}
    _settings = current.model_copy(update=updates)
    return _settings


def reset_settings():
    """Drop cached settings (tests)"""
    global _settings
    _settings = None
