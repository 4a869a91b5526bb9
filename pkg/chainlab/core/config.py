from typing import Optional
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Configuración de ChainLab"""

    # ==================== APP CONFIG ====================
    PROJECT_NAME: str = "ChainLab"
    VERSION: str = "0.1.0"
    DEBUG: bool = False
    RESULT_SCHEMA_VERSION: int = 1

    # ==================== LOGGING ====================
    LOG_LEVEL: str = Field(default="INFO", description="Root log level")
    LOG_JSON: bool = Field(default=True, description="Emit one JSON object per log record")

    # ==================== METRIC VALIDATION ====================
    METRIC_ABS_TOL: float = Field(default=1e-12, ge=0.0, description="Absolute slack in triangle checks")
    METRIC_REL_TOL: float = Field(default=1e-9, ge=0.0, description="Relative slack in triangle checks")
    EPS_REL_TOL: float = Field(
        default=1e-12,
        ge=0.0,
        description="Relative slack on the closed step threshold d <= eps"
    )
    TRIANGLE_EXHAUSTIVE_MAX_N: int = Field(default=300, gt=0, description="Check every triple up to this size")
    TRIANGLE_SAMPLE_SIZE: int = Field(default=1_000_000, gt=0, description="Random triples above the exhaustive size")

    # ==================== SOLVERS ====================
    FEAS_TOL: float = Field(default=1e-9, gt=0.0, description="Feasibility tolerance for linear programs")
    KKT_TOL: float = Field(default=1e-7, gt=0.0, description="KKT residual tolerance for p > 1 programs")
    VERIFY_REL_TOL: float = Field(default=1e-9, ge=0.0, description="Relative slack in upper gradient checks")
    SEPARATION_TOL: float = Field(default=1e-7, gt=0.0, description="Admissibility slack in the cutting-plane loop")
    MODULUS_ZERO_TOL: float = Field(default=1e-9, ge=0.0, description="Modulus below this counts as zero")
    MAX_CUTTING_PLANE_ITERATIONS: int = Field(default=500, gt=0, description="Cutting-plane iteration budget")
    CUT_PURGE_INTERVAL: int = Field(default=50, gt=0, description="Drop slack cuts every this many iterations")
    CONVEX_SOLVER: str = Field(default="CLARABEL", description="cvxpy solver used for p > 1")

    # ==================== SEARCH ====================
    PATH_ENUMERATION_MAX_N: int = Field(default=8, gt=0, description="Exhaustive simple-path enumeration size")
    RANDOM_WALK_SAMPLES: int = Field(default=2000, gt=0, description="Random walks when enumeration is too large")
    LABEL_TIME_BUDGET_MS: Optional[int] = Field(default=None, gt=0, description="Pareto label-setting budget")

    # ==================== OUTPUT ====================
    DEFAULT_SEED: int = 0
    FLOAT_SIGNIFICANT_DIGITS: int = Field(default=17, ge=1, le=17, description="Digits for floats in result files")

    model_config = SettingsConfigDict(
        env_prefix="CHAINLAB_",
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )


settings = Settings()
