from typing import Literal

from pydantic_settings import BaseSettings, SettingsConfigDict

from subtree_distance.exceptions import ConfigurationError
from subtree_distance.schemas.matrix import Tolerance

MatrixFormat = Literal["csv", "tsv", "phylip-square"]


def parse_tolerance(text: str) -> Tolerance:
    """
    Parse a tolerance string of the form ``REL`` or ``REL:ABS``.

    Args:
        text: e.g. "1e-9", "1e-9:1e-12" or "0:0" for exact comparisons

    Returns:
        Tolerance with the given relative epsilon and absolute floor
    """
    parts = text.strip().split(":")
    if len(parts) not in (1, 2) or not parts[0]:
        raise ConfigurationError(f"Invalid tolerance {text!r}, expected REL or REL:ABS")
    try:
        rel_eps = float(parts[0])
        abs_floor = float(parts[1]) if len(parts) == 2 else Tolerance().abs_floor
    except ValueError:
        raise ConfigurationError(f"Invalid tolerance {text!r}, expected REL or REL:ABS") from None
    if rel_eps < 0 or abs_floor < 0:
        raise ConfigurationError(f"Tolerance parameters must be nonnegative: {text!r}")
    return Tolerance(rel_eps=rel_eps, abs_floor=abs_floor)


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="SUBTREE_", env_file=".env", extra="ignore")

    tol: str | None = None
    log_level: str = "WARNING"
    default_format: MatrixFormat = "csv"
    bench_sizes: list[int] = [500, 1000, 2000]
    bench_seeds: int = 3
    bench_nonleaf_fraction: float = 0.2

    def tolerance(self, override: str | None = None) -> Tolerance:
        """Resolve the tolerance: explicit override, then SUBTREE_TOL, then defaults."""
        text = override if override is not None else self.tol
        if text is None:
            return Tolerance()
        return parse_tolerance(text)


settings = Settings()
