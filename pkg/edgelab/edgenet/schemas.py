"""
Pydantic schemas for EdgeNet configuration and training records.
"""
import os
from typing import Literal, Optional

from pydantic import BaseModel, Field, field_validator

from filters import FilterClass


class EdgeNetConfig(BaseModel):
    """Architecture of one EdgeNet."""
    layers: int = Field(default=1, ge=1)
    features: int = Field(default=8, ge=1)
    order: int = Field(default=3, ge=0)
    in_features: int = Field(default=1, ge=1)
    outputs: int = Field(default=1, ge=1)
    class_tag: FilterClass = Field(
        default_factory=lambda: FilterClass.parse(os.getenv("EDGELAB_PARAMETERIZATION", "convolutional"))
    )
    nonlinearity: str = Field(default_factory=lambda: os.getenv("EDGELAB_NONLINEARITY", "relu"))
    # flatten: fully connected over all node features; pool: mean over nodes;
    # node: shared per-node linear map, read at target_node when set
    readout: Literal["flatten", "pool", "node"] = "flatten"
    target_node: Optional[int] = None
    seed: int = 0
    init_scale: float = Field(default=1.0, gt=0)

    @field_validator("class_tag", mode="before")
    @classmethod
    def parse_class_tag(cls, value):
        return FilterClass.parse(value)


class EpochMetrics(BaseModel):
    """Loss and metric after one training epoch."""
    epoch: int
    train_loss: float
    validation_loss: Optional[float] = None
    validation_metric: Optional[float] = None


class TrainingConfig(BaseModel):
    lr: float = Field(default=1e-3, ge=0)
    beta1: float = Field(default=0.9, ge=0, lt=1)
    beta2: float = Field(default=0.999, ge=0, lt=1)
    epochs: int = Field(default=40, ge=0)
    batch_size: int = Field(default=64, ge=1)
    seed: int = 0
    task: Literal["classification", "regression"] = "classification"
    progress: bool = False
