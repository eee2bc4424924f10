from .config import ModelConfig, ConfigError
from .model import PrioritizerModel, ShapeError, IdOutOfRange, init_model
from .train import EmptyDataset, TrainHistory, load_training_set, save_history, train
from .ensemble import Ensemble, rank_templates, substructure_screen
from .serialize import ChecksumError, CorruptFile, VersionError, load_model, save_model

__all__ = [
    "ChecksumError",
    "ConfigError",
    "CorruptFile",
    "EmptyDataset",
    "Ensemble",
    "IdOutOfRange",
    "ModelConfig",
    "PrioritizerModel",
    "ShapeError",
    "TrainHistory",
    "VersionError",
    "init_model",
    "load_model",
    "load_training_set",
    "rank_templates",
    "save_history",
    "save_model",
    "substructure_screen",
    "train",
]
