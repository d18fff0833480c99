from enum import Enum
from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


class Variant(str, Enum):
    GCN = "gcn"
    GAT = "gat"
    ADRGCN = "adrgcn"


class GnnConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    variant: Variant = Variant.GCN
    layers: int = Field(2, ge=1)
    hidden_dim: int = Field(300, ge=1)
    gat_heads: Tuple[int, ...] = (4, 4)
    self_loop_weight: float = Field(1.0, ge=0)
    # ReLU after the last message-passing layer too
    final_activation: bool = True
    leaky_slope: float = Field(0.2, ge=0)
    seed: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _heads(self):
        if self.variant is Variant.GAT:
            if len(self.gat_heads) != self.layers:
                raise ValueError(f"gat_heads needs {self.layers} entries, got {len(self.gat_heads)}")
            if any(h < 1 for h in self.gat_heads):
                raise ValueError("gat_heads entries must be >= 1")
            for h in self.gat_heads[:-1]:
                if self.hidden_dim % h:
                    raise ValueError(f"hidden_dim {self.hidden_dim} is not divisible by {h} concatenated heads")
        return self
