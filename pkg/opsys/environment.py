import os
from pathlib import Path

from dotenv import load_dotenv

import opsys.config as config
from opsys.errors import ConfigError


def load_environment(dotenv_path: str | None = None) -> None:
    if dotenv_path:
        env_file = Path(dotenv_path)
        if not env_file.exists():
            raise ConfigError(f".env file not found at: {dotenv_path}")
        load_dotenv(env_file)
    else:
        load_dotenv()


def load_seed(seed: int | None = None) -> int:
    """Resolve the seed: explicit value, then OPSYS_SEED, then the default."""
    if seed is not None:
        return seed

    raw = os.getenv(config.SEED_ENV_VAR)
    if raw is None or not raw.strip():
        return config.DEFAULT_SEED

    try:
        return int(raw.strip())
    except ValueError as e:
        raise ConfigError(
            f"Invalid value for environment variable {config.SEED_ENV_VAR}: {raw!r}"
        ) from e
