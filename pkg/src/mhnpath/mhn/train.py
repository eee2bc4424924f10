"""Training loop: AdamW with decoupled weight decay, dropout, and
noise-augmented copies of rare-template examples."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..fingerprint import fingerprint
from ..molecule import Molecule
from ..smiles import parse_smiles
from ..templates import TemplateLibrary
from .model import PrioritizerModel

_AUG_NOISE_SIGMA = 0.1


class EmptyDataset(ValueError):
    pass


@dataclass
class TrainHistory:
    rows: list = field(default_factory=list)
    train_indices: list = field(default_factory=list)
    val_indices: list = field(default_factory=list)
    heldout_indices: list = field(default_factory=list)

    def add(self, epoch: int, train_loss: float, val_loss: float,
            val_top1: float, val_top100: float):
        self.rows.append({
            "epoch": epoch, "train_loss": train_loss, "val_loss": val_loss,
            "val_top1": val_top1, "val_top100": val_top100,
        })

    @property
    def final(self) -> dict:
        return self.rows[-1] if self.rows else {}


def save_history(history: TrainHistory, path) -> None:
    lines = ["epoch,train_loss,val_loss,val_top1,val_top100"]
    for row in history.rows:
        lines.append(
            f"{row['epoch']},{row['train_loss']!r},{row['val_loss']!r},"
            f"{row['val_top1']!r},{row['val_top100']!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


class AdamW:
    def __init__(self, params: dict, lr: float, weight_decay: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.weight_decay = weight_decay
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for name, w in params.items():
            g = grads[name]
            self.m[name] = b1 * self.m[name] + (1 - b1) * g
            self.v[name] = b2 * self.v[name] + (1 - b2) * g * g
            m_hat = self.m[name] / (1 - b1 ** self.t)
            v_hat = self.v[name] / (1 - b2 ** self.t)
            w -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
            if self.weight_decay:
                w -= self.lr * self.weight_decay * w


def load_training_set(path) -> list[tuple[Molecule, int]]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].split("\t") != ["product_smiles", "template_id"]:
        raise ValueError(f"{path}: expected header 'product_smiles\\ttemplate_id'")
    out = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ValueError(f"{path} line {lineno}: expected 2 columns")
        out.append((parse_smiles(fields[0]), int(fields[1])))
    return out


def train(model: PrioritizerModel, lib: TemplateLibrary, dataset,
          log=None) -> tuple[PrioritizerModel, TrainHistory]:
    """Train in place; returns the model and its per-epoch history.

    The dataset is split 80:10:10 (train/val/held-out) by cfg.seed; the final
    tenth is left untouched for downstream evaluation.
    """
    cfg = model.cfg
    dataset = list(dataset)
    if not dataset:
        raise EmptyDataset("no training examples")
    model.bind_library(lib)

    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    fps = np.stack([
        fingerprint(mol, cfg.fp_radius, cfg.fp_bits).to_array()
        for mol, _ in dataset
    ])
    tids = np.array([tid for _, tid in dataset], dtype=np.int64)

    n = len(dataset)
    perm = rng.permutation(n)
    n_train = max(1, int(round(n * 0.8)))
    n_val = int(round(n * 0.1))
    train_idx = perm[:n_train]
    val_idx = perm[n_train : n_train + n_val]

    support = Counter(int(tids[i]) for i in train_idx)
    rare = [i for i in train_idx
            if support[int(tids[i])] < cfg.concat_rand_template_threshold]

    optimizer = AdamW(model.params, lr=cfg.lr, weight_decay=cfg.weight_decay)
    history = TrainHistory(
        train_indices=[int(i) for i in train_idx],
        val_indices=[int(i) for i in val_idx],
        heldout_indices=[int(i) for i in perm[n_train + n_val :]],
    )

    for epoch in range(1, cfg.epochs + 1):
        epoch_fps = fps[train_idx]
        epoch_tids = tids[train_idx]
        if rare:
            noisy = fps[rare] + rng.normal(0.0, _AUG_NOISE_SIGMA,
                                           size=(len(rare), cfg.fp_bits))
            epoch_fps = np.concatenate([epoch_fps, noisy])
            epoch_tids = np.concatenate([epoch_tids, tids[rare]])

        order = rng.permutation(len(epoch_fps))
        total_loss = 0.0
        for start in range(0, len(order), cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            loss, grads = model.loss_and_gradients(
                epoch_fps[batch], epoch_tids[batch],
                dropout_rng=rng, batch_stats=cfg.input_norm)
            optimizer.step(model.params, grads)
            total_loss += loss * len(batch)
        train_loss = total_loss / len(order)

        model.template_matrix_cache = None  # weights moved; rebuild lazily
        if len(val_idx):
            val_loss, top1, top100 = evaluate(model, fps[val_idx], tids[val_idx])
        else:
            val_loss = top1 = top100 = float("nan")
        history.add(epoch, train_loss, val_loss, top1, top100)
        if log:
            log(f"epoch {epoch}: train_loss={train_loss:.4f} "
                f"val_loss={val_loss:.4f} val_top1={top1:.3f} val_top100={top100:.3f}")

    model.build_template_cache()
    return model, history


def evaluate(model: PrioritizerModel, fps: np.ndarray, tids: np.ndarray):
    """NLL, top-1 and top-100 accuracy of the current weights on (fps, tids)."""
    model.template_matrix_cache = None
    probs = model.forward_batch(fps)
    picked = probs[np.arange(len(tids)), tids]
    nll = float(-np.mean(np.log(np.maximum(picked, 1e-300))))
    ranking = np.argsort(-probs, axis=1, kind="stable")
    top1 = float(np.mean(ranking[:, 0] == tids))
    k = min(100, probs.shape[1])
    top100 = float(np.mean([
        tids[i] in ranking[i, :k] for i in range(len(tids))
    ]))
    return nll, top1, top100
