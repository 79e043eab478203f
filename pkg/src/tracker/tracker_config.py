"""Tracker configuration model and the ``key = value`` config file format."""
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from src import config
from src.errors import InvalidArgumentError, ParseError

logger = logging.getLogger(__name__)

_UNSET_WORDS = {"", "none", "all"}


class TrackerConfig(BaseModel):
    """All knobs of one tracker instance. Distances and confidences live in [0, 1]."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    gamma: float = Field(config.FACT_GAMMA, gt=0)
    d_et: int = Field(config.FACT_D_ET, ge=1)
    seed: int = Field(config.FACT_SEED, ge=0)
    tau_aff: float = Field(config.FACT_TAU_AFF, ge=0, le=1)
    tau_cos: float = Field(config.FACT_TAU_COS, ge=0, le=1)
    tau_iou: float = Field(config.FACT_TAU_IOU, ge=0, le=1)
    tau_new: float = Field(config.FACT_TAU_NEW, ge=0, le=1)
    n_init: int = Field(config.FACT_N_INIT, ge=1)
    ema_alpha: float = Field(config.FACT_EMA_ALPHA, ge=0, le=1)
    max_lost_frames: int = Field(config.FACT_MAX_LOST_FRAMES, ge=1)
    min_box_confidence: float = Field(config.FACT_MIN_BOX_CONFIDENCE, ge=0, le=1)
    confirm_hits: int = Field(config.FACT_CONFIRM_HITS, ge=1)
    gate_threshold: float = Field(config.FACT_GATE_THRESHOLD, gt=0)
    use_fac: bool = True
    use_cosine: bool = True
    use_cmc: bool = True
    memory_length: Optional[int] = Field(None, ge=1)

    @field_validator("memory_length", mode="before")
    @classmethod
    def _unset_memory(cls, value):
        if isinstance(value, str) and value.strip().lower() in _UNSET_WORDS:
            return None
        return value


def make_tracker_config(**values: Any) -> TrackerConfig:
    """Build a TrackerConfig, turning pydantic validation errors into InvalidArgumentError."""
    try:
        return TrackerConfig(**values)
    except ValidationError as e:
        raise InvalidArgumentError(f"invalid tracker configuration: {e}") from e


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, str]:
    """
    Parse ``key = value`` lines. Blank lines and ``#`` comments are skipped.

    Raises:
        ParseError: On malformed lines, unknown keys or duplicate keys
    """
    values: Dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw!r}", path=source, line=line_no)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in TrackerConfig.model_fields:
            raise ParseError(f"unknown config key '{key}'", path=source, line=line_no)
        if key in values:
            raise ParseError(f"duplicate config key '{key}'", path=source, line=line_no)
        values[key] = value
    return values


def load_tracker_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> TrackerConfig:
    """
    Load a config file and apply overrides on top of it.

    Args:
        path: Config file path; None uses defaults only
        overrides: Field values that take precedence over the file (None values are ignored)
    """
    values: Dict[str, Any] = {}
    if path is not None:
        logger.info(f"Loading tracker config from {path}")
        values.update(parse_config_text(Path(path).read_text(encoding="utf-8"), source=str(path)))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return make_tracker_config(**values)


def dump_tracker_config(cfg: TrackerConfig) -> str:
    """Render a config in the ``key = value`` file format."""
    lines = []
    for key, value in cfg.model_dump().items():
        if value is None:
            value = "all"
        elif isinstance(value, bool):
            value = str(value).lower()
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
