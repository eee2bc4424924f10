"""Hyperparameter block for the template prioritizer."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    fp_bits: int = 4096
    fp_radius: int = 2
    d_assoc: int = 512
    d_mol: int | None = None       # defaults to d_assoc
    d_temp: int | None = None      # defaults to d_assoc
    mol_layers: int = 1
    temp_layers: int = 2
    hopfield_layers: int = 1
    beta: float = 0.035
    dropout: float = 0.01
    lr: float = 1e-4
    weight_decay: float = 1e-4
    epochs: int = 11
    batch_size: int = 32
    concat_rand_template_threshold: int = 3
    association_activation: str = "tanh"   # "tanh" | "identity"
    input_norm: bool = False
    assoc_norm: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.beta <= 0:
            raise ConfigError("beta must be > 0")
        if not 0 <= self.dropout < 1:
            raise ConfigError("dropout must be in [0, 1)")
        if self.d_assoc < 1:
            raise ConfigError("d_assoc must be >= 1")
        if self.fp_bits < 2 or self.fp_bits & (self.fp_bits - 1):
            raise ConfigError("fp_bits must be a power of two >= 2")
        if self.fp_radius < 0:
            raise ConfigError("fp_radius must be >= 0")
        if self.mol_layers < 1 or self.temp_layers < 1 or self.hopfield_layers < 1:
            raise ConfigError("layer counts must be >= 1")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.lr < 0 or self.weight_decay < 0:
            raise ConfigError("lr and weight_decay must be >= 0")
        if self.concat_rand_template_threshold < 0:
            raise ConfigError("concat_rand_template_threshold must be >= 0")
        if self.association_activation not in ("tanh", "identity"):
            raise ConfigError("association_activation must be 'tanh' or 'identity'")

    @property
    def mol_dim(self) -> int:
        return self.d_mol if self.d_mol is not None else self.d_assoc

    @property
    def temp_dim(self) -> int:
        return self.d_temp if self.d_temp is not None else self.d_assoc

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        return cls(**data)
