from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Type, TypeVar

from dotenv import dotenv_values
from pydantic import BaseModel, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.core.errors import InvalidInputError

ModelT = TypeVar("ModelT", bound=BaseModel)


class Settings(BaseSettings):
    out_dir: str = "out"
    jobs: int = 1
    log_level: str = "INFO"
    seed: int = 0
    log_json: bool = False
    cors_allow_origins: List[str] = ["*"]

    model_config = SettingsConfigDict(env_prefix="QGAN_", env_file=".env", extra="ignore")


settings = Settings()


def load_config_file(path: Optional[str]) -> Dict[str, str]:
    """Read a plain-text key=value file. Keys are lower-cased."""
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise InvalidInputError(f"config file not found: {path}")
    values = dotenv_values(p)
    return {k.strip().lower(): v for k, v in values.items() if v is not None}


def layered(
    model: Type[ModelT],
    file_values: Mapping[str, Any],
    overrides: Mapping[str, Any],
) -> ModelT:
    """Build `model` from defaults < config file < explicit overrides (None means unset)."""
    fields = model.model_fields
    unknown = [k for k in file_values if k not in fields]
    if unknown:
        raise InvalidInputError(f"unknown config keys for {model.__name__}: {', '.join(sorted(unknown))}")
    merged: Dict[str, Any] = dict(file_values)
    merged.update({k: v for k, v in overrides.items() if v is not None and k in fields})
    try:
        return model(**merged)
    except ValidationError as e:
        raise InvalidInputError(f"invalid {model.__name__}: {e}") from e


def check_keys(file_values: Mapping[str, Any], *models: Type[BaseModel]) -> None:
    known = set().union(*(m.model_fields for m in models))
    unknown = sorted(k for k in file_values if k not in known)
    if unknown:
        raise InvalidInputError(f"unknown config keys: {', '.join(unknown)}")


def pick(model: Type[BaseModel], values: Mapping[str, Any]) -> Dict[str, Any]:
    """The subset of `values` that names fields of `model`."""
    return {k: v for k, v in values.items() if k in model.model_fields}
