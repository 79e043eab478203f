"""Synthetic scenario configuration."""
from typing import List, Literal, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.errors import InvalidArgumentError


class OcclusionWindow(BaseModel):
    """Frames [start, end) during which ``target`` (a 1-based gt id) is occluded."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    target: int = Field(ge=1)
    start: int = Field(ge=0)
    end: int = Field(ge=1)
    mode: Literal["dropout", "contaminate"] = "dropout"

    def covers(self, target: int, frame: int) -> bool:
        return self.target == target and self.start <= frame < self.end


class Turn(BaseModel):
    """At ``frame`` target ``target`` (a 1-based gt id) turns around.

    Its heading reverses and it shows its other side from that frame on.
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    target: int = Field(ge=1)
    frame: int = Field(ge=1)


class ScenarioConfig(BaseModel):
    """Everything needed to regenerate one synthetic sequence bit-for-bit."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    seed: int = Field(ge=0)
    n_targets: int = Field(ge=1)
    n_frames: int = Field(ge=1)
    d_reid: int = Field(64, ge=2)
    arena: Tuple[float, float] = (1920.0, 1080.0)
    velocity_range: Tuple[float, float] = (0.5, 3.0)
    box_width_range: Tuple[float, float] = (30.0, 60.0)
    aspect: float = Field(2.5, gt=0)
    box_noise: float = Field(1.0, ge=0)
    confidence_range: Tuple[float, float] = (0.7, 1.0)
    embedding_std: float = Field(0.04, ge=0)
    drift_rate: float = Field(0.0, ge=0)
    min_centroid_angle: float = Field(20.0, ge=0, lt=90)  # degrees
    occlusions: List[OcclusionWindow] = Field(default_factory=list)
    contamination_mix: float = Field(0.5, ge=0, le=1)
    turns: List[Turn] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_ranges(self) -> "ScenarioConfig":
        for name in ("velocity_range", "box_width_range", "confidence_range"):
            lo, hi = getattr(self, name)
            if lo > hi or lo < 0:
                raise ValueError(f"{name} must satisfy 0 <= low <= high, got ({lo}, {hi})")
        if self.confidence_range[1] > 1:
            raise ValueError("confidence_range must lie in [0, 1]")
        if self.box_width_range[0] <= 0:
            raise ValueError("box widths must be positive")
        width, height = self.arena
        if width <= self.box_width_range[1] or height <= self.box_width_range[1] * self.aspect:
            raise ValueError("arena is smaller than the largest box")
        for w in self.occlusions:
            if w.target > self.n_targets:
                raise ValueError(f"occlusion target {w.target} exceeds n_targets={self.n_targets}")
            if not w.start < w.end <= self.n_frames:
                raise ValueError(f"occlusion window [{w.start}, {w.end}) outside [0, {self.n_frames})")
        for t in self.turns:
            if t.target > self.n_targets:
                raise ValueError(f"turn target {t.target} exceeds n_targets={self.n_targets}")
            if t.frame > self.n_frames:
                raise ValueError(f"turn at frame {t.frame} after the last frame {self.n_frames}")
        return self


def make_scenario_config(**values) -> ScenarioConfig:
    """Build a ScenarioConfig, raising InvalidArgumentError on invalid input."""
    try:
        return ScenarioConfig(**values)
    except ValidationError as e:
        raise InvalidArgumentError(f"invalid scenario: {e}") from e
