"""File with environment variables and general configuration logic.

`ENVIRONMENT`, `GEOMETRY_EPSILON` etc. map to env variables with the same names.

Pydantic priority ordering:

1. (Most important, will overwrite everything) - environment variables
2. `.env` file in root folder of project
3. Default values

For project name, version, description we use pyproject.toml
For the rest, we use file `.env` (gitignored), see `.env.example`

Tolerances and budgets below are read by every numerical kernel of the service layer,
so a run can be made coarser or stricter without touching code.

See https://pydantic-docs.helpmanual.io/usage/settings/
"""

import pathlib
from typing import Literal

from dotenv import load_dotenv
from pydantic_settings import BaseSettings

load_dotenv(dotenv_path=pathlib.Path(__file__).parent.parent / ".env")


class Settings(BaseSettings):
    """Represents the configuration settings for the application."""

    # CORE SETTINGS
    ENVIRONMENT: Literal["DEV", "PYTEST", "PREPROD", "PROD"] = "DEV"
    APP_LOG_FILE_PATH: str = "logs/app.log"
    PROJECT_NAME: str = "flatsurf-intersect"
    PROJECT_DESCRIPTION: str = "Intersection numbers and flow experiments on flat surfaces"

    # GEOMETRY
    ## Predicate tolerance in developed coordinates and angle tolerance in radians
    GEOMETRY_EPSILON: float = 1e-9
    ANGLE_EPSILON: float = 1e-9
    ## Upper bound on the number of triangles any single ray may cross
    TRACE_STEP_BUDGET: int = 2_000_000

    # SADDLE CONNECTIONS
    ENUMERATION_NODE_BUDGET: int = 10_000_000
    ## Decimals used to identify outgoing directions at a cone point
    GERM_ROUND_DECIMALS: int = 7

    # GEODESICS
    TIGHTEN_MAX_ROUNDS: int = 256
    TIGHTEN_MIN_STEP: float = 1e-12
    ## Number of periods of the lifted word developed before pulling it taut
    TIGHTEN_PERIODS: int = 7

    # FITTED CONSTANTS
    ESTIMATE_CONSTANT: float = 64.0
    RECT_CONSTANT: float = 16.0
    MULTIPLICITY_CONSTANT: float = 8.0

    # QUADRATURE
    ## Grid step is ell_min / QUADRATURE_DIVISOR
    QUADRATURE_DIVISOR: int = 512
    QUADRATURE_MAX_POINTS: int = 40_000_000

    # EXPERIMENTS
    ORBIT_TIME_STEP: float = 0.01
    DEFAULT_SEED: int = 0
    BATCH_WORKERS: int = 4

    class Config:
        """Configuration for the settings class."""

        env_file = ".env"
        case_sensitive = True


settings: Settings = Settings()  # type: ignore
