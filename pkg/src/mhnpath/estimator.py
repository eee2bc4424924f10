"""Scikit-learn style front door for the template prioritizer, so it drops
into pipelines and grid searches without adapters."""

from __future__ import annotations

import inspect

import numpy as np

from .fingerprint import fingerprint
from .mhn.config import ModelConfig
from .mhn.model import init_model
from .mhn.train import train
from .molecule import Molecule
from .smiles import parse_smiles
from .templates import TemplateLibrary


def validate_molecules(X) -> list[Molecule]:
    """Accept SMILES strings or Molecule objects; reject anything else."""
    mols = []
    for i, item in enumerate(X):
        if isinstance(item, Molecule):
            mols.append(item)
        elif isinstance(item, str):
            mols.append(parse_smiles(item))
        else:
            raise TypeError(f"X[{i}] must be a SMILES string or Molecule, "
                            f"got {type(item).__name__}")
    if not mols:
        raise ValueError("X must be non-empty")
    return mols


def validate_template_ids(y, n_templates: int) -> np.ndarray:
    ids = np.asarray(y, dtype=np.int64)
    if ids.ndim != 1:
        raise ValueError("y must be one-dimensional")
    if len(ids) and (ids.min() < 0 or ids.max() >= n_templates):
        raise ValueError(f"template ids must lie in [0, {n_templates})")
    return ids


class TemplateRanker:
    """fit/predict wrapper around the prioritizer.

    Parameters mirror ModelConfig; `library` is the TemplateLibrary the
    class ids refer to. After fit(), `model_` holds the trained prioritizer
    and `history_` its per-epoch metrics.
    """

    def __init__(self, library=None, fp_bits=4096, fp_radius=2, d_assoc=512,
                 mol_layers=1, temp_layers=2, hopfield_layers=1, beta=0.035,
                 dropout=0.01, lr=1e-4, weight_decay=1e-4, epochs=11,
                 batch_size=32, concat_rand_template_threshold=3,
                 association_activation="tanh", input_norm=False,
                 assoc_norm=True, seed=0):
        self.library = library
        self.fp_bits = fp_bits
        self.fp_radius = fp_radius
        self.d_assoc = d_assoc
        self.mol_layers = mol_layers
        self.temp_layers = temp_layers
        self.hopfield_layers = hopfield_layers
        self.beta = beta
        self.dropout = dropout
        self.lr = lr
        self.weight_decay = weight_decay
        self.epochs = epochs
        self.batch_size = batch_size
        self.concat_rand_template_threshold = concat_rand_template_threshold
        self.association_activation = association_activation
        self.input_norm = input_norm
        self.assoc_norm = assoc_norm
        self.seed = seed

    # sklearn-compatible parameter plumbing
    @classmethod
    def _param_names(cls) -> list[str]:
        sig = inspect.signature(cls.__init__)
        return [p for p in sig.parameters if p != "self"]

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params) -> "TemplateRanker":
        valid = set(self._param_names())
        for key, value in params.items():
            if key not in valid:
                raise ValueError(f"invalid parameter {key!r} for TemplateRanker")
            setattr(self, key, value)
        return self

    def _config(self) -> ModelConfig:
        params = self.get_params()
        params.pop("library")
        return ModelConfig(**params)

    def fit(self, X, y) -> "TemplateRanker":
        if not isinstance(self.library, TemplateLibrary):
            raise ValueError("library must be a TemplateLibrary before fit()")
        mols = validate_molecules(X)
        ids = validate_template_ids(y, len(self.library))
        if len(mols) != len(ids):
            raise ValueError(f"X and y length mismatch: {len(mols)} vs {len(ids)}")
        cfg = self._config()
        self.model_ = init_model(cfg, self.library)
        _, self.history_ = train(self.model_, self.library, list(zip(mols, ids)))
        return self

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise RuntimeError("call fit() before predicting")

    def predict_proba(self, X) -> np.ndarray:
        self._check_fitted()
        mols = validate_molecules(X)
        fps = np.stack([
            fingerprint(m, self.fp_radius, self.fp_bits).to_array() for m in mols
        ])
        return self.model_.forward_batch(fps)

    def predict(self, X) -> np.ndarray:
        return self.predict_proba(X).argmax(axis=1)

    def rank(self, X, n: int = 10) -> list[list[tuple[int, float]]]:
        """Per input: top-n (template_id, probability), descending."""
        probs = self.predict_proba(X)
        out = []
        for row in probs:
            order = sorted(range(len(row)), key=lambda t: (-row[t], t))[:n]
            out.append([(t, float(row[t])) for t in order])
        return out

    def score(self, X, y) -> float:
        """Top-1 accuracy."""
        ids = validate_template_ids(y, len(self.library))
        return float(np.mean(self.predict(X) == ids))
