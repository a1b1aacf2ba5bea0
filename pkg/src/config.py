"""Configuration management for the quasi-proper equilibrium solver suite."""

from typing import List, Optional
from fractions import Fraction

from pydantic import ByteSize, Field
from pydantic_settings import BaseSettings, SettingsConfigDict
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


class Settings(BaseSettings):
    """Application configuration settings."""

    # Perturbed polytope construction
    facet_threshold: int = Field(default=8, ge=1)
    eps_degree_cap: int = Field(default=64, ge=1)

    # Pivoting limits
    lemke_max_pivots: int = Field(default=100000, ge=1)
    simplex_max_pivots: int = Field(default=100000, ge=1)

    # Verification samples for symbolic solutions (comma separated rationals)
    check_eps: str = Field(default="1/100,1/10000")

    # Multiplayer fixed-point search
    damping: float = Field(default=0.5, gt=0, le=1)
    max_iters: int = Field(default=1000, ge=1)
    tolerance: float = Field(default=1e-8, gt=0)
    restarts: int = Field(default=8, ge=0)
    seed: int = Field(default=0)

    # Logging Configuration
    log_level: str = Field(default="WARNING")
    log_file: Optional[str] = Field(default=None)
    log_max_size: ByteSize = Field(default=10 * 1024 * 1024)  # accepts "10MB", "512KiB", ...
    log_backup_count: int = Field(default=5)

    model_config = SettingsConfigDict(
        env_prefix="QPE_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",  # tolerate unrelated .env keys
    )

    @property
    def check_eps_values(self) -> List[Fraction]:
        """Return the default verification samples as exact rationals."""
        return parse_rational_list(self.check_eps)


def parse_rational_list(text: str) -> List[Fraction]:
    """Parse '1/100,1/10000' into a list of Fractions."""
    return [Fraction(part.strip()) for part in text.split(",") if part.strip()]


# Global settings instance
settings = Settings()


def get_settings() -> Settings:
    """Get application settings instance."""
    return settings
