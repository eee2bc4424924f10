"""Hopfield-attention template prioritizer.

A molecule encoder and a template encoder project fingerprints into a shared
associative space; template scores are the attention distribution
p = softmax(beta * X^T xi) over the stored template patterns X. All math is
float64 and backpropagation is written out by hand so gradients can be
checked against finite differences.
"""

from __future__ import annotations

import numpy as np

from ..fingerprint import Fingerprint
from ..templates import TemplateLibrary, template_fingerprint
from .config import ConfigError, ModelConfig

_EPS_NORM = 1e-8


class ShapeError(ValueError):
    pass


class IdOutOfRange(IndexError):
    pass


def init_model(cfg: ModelConfig, lib: TemplateLibrary) -> "PrioritizerModel":
    """Xavier-uniform weights, zero biases, seeded from cfg.seed."""
    model = PrioritizerModel(cfg)
    model.bind_library(lib)
    return model


def _xavier(rng, out_dim: int, in_dim: int) -> np.ndarray:
    bound = np.sqrt(6.0 / (in_dim + out_dim))
    return rng.uniform(-bound, bound, size=(out_dim, in_dim))


def _layer_dims(in_dim: int, hidden: int, layers: int) -> list[tuple[int, int]]:
    dims = [(hidden, in_dim)]
    dims.extend((hidden, hidden) for _ in range(layers - 1))
    return dims


class PrioritizerModel:
    VERSION = 1

    def __init__(self, cfg: ModelConfig, params: dict | None = None,
                 buffers: dict | None = None):
        self.cfg = cfg
        self.params = params if params is not None else self._init_params()
        self.buffers = buffers if buffers is not None else {
            "input_norm.mean": np.zeros(cfg.fp_bits),
            "input_norm.var": np.ones(cfg.fp_bits),
        }
        self.library_checksum: bytes | None = None
        self.n_templates: int | None = None
        self._tfp: np.ndarray | None = None      # (K, fp_bits) template fingerprints
        self.template_matrix_cache: dict | None = None  # {"T_h": ..., "X": ...}
        for name, tensor in self.params.items():
            if not np.all(np.isfinite(tensor)):
                raise ConfigError(f"non-finite weights in {name}")

    # -- construction --------------------------------------------------------

    def _init_params(self) -> dict:
        cfg = self.cfg
        rng = np.random.Generator(np.random.PCG64(cfg.seed))
        params: dict[str, np.ndarray] = {}
        for l, (out_d, in_d) in enumerate(
                _layer_dims(cfg.fp_bits, cfg.mol_dim, cfg.mol_layers)):
            params[f"mol.{l}.W"] = _xavier(rng, out_d, in_d)
            params[f"mol.{l}.b"] = np.zeros(out_d)
        for l, (out_d, in_d) in enumerate(
                _layer_dims(cfg.fp_bits, cfg.temp_dim, cfg.temp_layers)):
            params[f"temp.{l}.W"] = _xavier(rng, out_d, in_d)
            params[f"temp.{l}.b"] = np.zeros(out_d)
        params["proj_xi.W"] = _xavier(rng, cfg.d_assoc, cfg.mol_dim)
        params["proj_xi.b"] = np.zeros(cfg.d_assoc)
        params["proj_x.W"] = _xavier(rng, cfg.d_assoc, cfg.temp_dim)
        params["proj_x.b"] = np.zeros(cfg.d_assoc)
        return params

    def bind_library(self, lib: TemplateLibrary) -> None:
        from .serialize import ChecksumError

        checksum = lib.checksum()
        if self.library_checksum is not None and checksum != self.library_checksum:
            raise ChecksumError("model was trained against a different template library")
        self.library_checksum = checksum
        self.n_templates = len(lib)
        self._tfp = np.stack([
            template_fingerprint(t, n_bits=self.cfg.fp_bits).to_array() for t in lib
        ]) if len(lib) else np.zeros((0, self.cfg.fp_bits))
        self.template_matrix_cache = None

    @property
    def template_fp_matrix(self) -> np.ndarray:
        if self._tfp is None:
            raise ShapeError("no template library bound")
        return self._tfp

    def build_template_cache(self) -> None:
        tfp = self.template_fp_matrix
        t_h = self._encode(tfp, "temp")
        x = self._associate(t_h, "proj_x")
        self.template_matrix_cache = {"T_h": t_h, "X": x}

    # -- inference ------------------------------------------------------------

    def forward(self, mol_fp) -> np.ndarray:
        """Probability vector over the K bound templates (inference mode)."""
        vec = self._as_input(mol_fp)
        return self.forward_batch(vec[None, :])[0]

    def forward_batch(self, fps: np.ndarray) -> np.ndarray:
        if self.template_matrix_cache is None:
            if self._tfp is None:
                raise ShapeError("no template library bound")
            self.build_template_cache()
        if fps.shape[1] != self.cfg.fp_bits:
            raise ShapeError(
                f"fingerprint width {fps.shape[1]} != fp_bits {self.cfg.fp_bits}")
        x = self.template_matrix_cache["X"]
        f = self._input_normalized(fps, train=False)
        m = self._encode(f, "mol")
        state = self._associate(m, "proj_xi")
        probs = None
        for _ in range(self.cfg.hopfield_layers):
            probs = _softmax_rows(self.cfg.beta * (state @ x.T))
            state = probs @ x
        return probs

    def _as_input(self, mol_fp) -> np.ndarray:
        if isinstance(mol_fp, Fingerprint):
            if mol_fp.n_bits != self.cfg.fp_bits:
                raise ShapeError(
                    f"fingerprint width {mol_fp.n_bits} != fp_bits {self.cfg.fp_bits}")
            return mol_fp.to_array()
        arr = np.asarray(mol_fp, dtype=np.float64)
        if arr.shape != (self.cfg.fp_bits,):
            raise ShapeError(f"expected shape ({self.cfg.fp_bits},), got {arr.shape}")
        return arr

    # -- shared building blocks ------------------------------------------------

    def _input_normalized(self, fps: np.ndarray, train: bool) -> np.ndarray:
        if not self.cfg.input_norm:
            return fps
        mean = self.buffers["input_norm.mean"]
        var = self.buffers["input_norm.var"]
        return (fps - mean) / np.sqrt(var + _EPS_NORM)

    def _encode(self, data: np.ndarray, prefix: str) -> np.ndarray:
        layers = self.cfg.mol_layers if prefix == "mol" else self.cfg.temp_layers
        h = data
        for l in range(layers):
            w, b = self.params[f"{prefix}.{l}.W"], self.params[f"{prefix}.{l}.b"]
            h = h @ w.T + b
            if l < layers - 1:
                h = np.tanh(h)
        return h

    def _associate(self, encoded: np.ndarray, proj: str) -> np.ndarray:
        w, b = self.params[f"{proj}.W"], self.params[f"{proj}.b"]
        raw = encoded @ w.T + b
        act = np.tanh(raw) if self.cfg.association_activation == "tanh" else raw
        return _rownorm(act) if self.cfg.assoc_norm else act

    # -- training-mode forward/backward ----------------------------------------

    def loss_and_gradients(self, fps: np.ndarray, targets: np.ndarray,
                           dropout_rng: np.random.Generator | None = None,
                           batch_stats: bool = False):
        """Mean negative log-likelihood and exact gradients for every parameter.

        dropout_rng enables dropout on encoder hidden layers (training mode);
        None keeps the pass deterministic. The L2 penalty is not part of the
        loss: weight decay is applied decoupled in the optimizer step.
        """
        cfg = self.cfg
        if fps.ndim != 2 or fps.shape[1] != cfg.fp_bits:
            raise ShapeError(f"batch fingerprints must be (B, {cfg.fp_bits})")
        if len(fps) == 0:
            raise ShapeError("empty batch")
        k = self.n_templates
        if k is None:
            raise ShapeError("no template library bound")
        targets = np.asarray(targets)
        if (targets < 0).any() or (targets >= k).any():
            raise IdOutOfRange(f"template id outside [0, {k})")

        f_in, _ = self._input_forward(fps, batch_stats)
        m, mol_tape = self._encode_forward(f_in, "mol", dropout_rng)
        xi0, xi_tape = self._associate_forward(m, "proj_xi")
        t_h, temp_tape = self._encode_forward(self.template_fp_matrix, "temp", dropout_rng)
        x, x_tape = self._associate_forward(t_h, "proj_x")

        b_size = len(fps)
        xi = xi0
        hop: list[dict] = []
        for _ in range(cfg.hopfield_layers):
            s = xi @ x.T
            p = _softmax_rows(cfg.beta * s)
            hop.append({"xi": xi, "s": s, "p": p})
            xi = p @ x

        p_out = hop[-1]["p"]
        picked = p_out[np.arange(b_size), targets]
        loss = float(-np.mean(np.log(np.maximum(picked, 1e-300))))

        grads = {name: np.zeros_like(t) for name, t in self.params.items()}

        onehot = np.zeros_like(p_out)
        onehot[np.arange(b_size), targets] = 1.0
        d_s = cfg.beta * (p_out - onehot) / b_size
        d_xi = d_s @ x
        d_x = d_s.T @ hop[-1]["xi"]
        for step in reversed(hop[:-1]):
            # xi_next = p @ x fed the later layer; d_xi currently holds dL/dxi_next
            d_p = d_xi @ x.T
            d_x += step["p"].T @ d_xi
            d_s = cfg.beta * step["p"] * (d_p - np.sum(d_p * step["p"], axis=1, keepdims=True))
            d_xi = d_s @ x
            d_x += d_s.T @ step["xi"]

        d_m = self._associate_backward(d_xi, xi_tape, "proj_xi", grads)
        self._encode_backward(d_m, mol_tape, "mol", grads)  # input grads unused
        d_th = self._associate_backward(d_x, x_tape, "proj_x", grads)
        self._encode_backward(d_th, temp_tape, "temp", grads)
        return loss, grads

    def _input_forward(self, fps: np.ndarray, batch_stats: bool):
        if not self.cfg.input_norm:
            return fps, None
        if batch_stats:
            mean = fps.mean(axis=0)
            var = fps.var(axis=0)
            momentum = 0.9
            self.buffers["input_norm.mean"] = (
                momentum * self.buffers["input_norm.mean"] + (1 - momentum) * mean)
            self.buffers["input_norm.var"] = (
                momentum * self.buffers["input_norm.var"] + (1 - momentum) * var)
        else:
            mean = self.buffers["input_norm.mean"]
            var = self.buffers["input_norm.var"]
        return (fps - mean) / np.sqrt(var + _EPS_NORM), None

    def _encode_forward(self, data: np.ndarray, prefix: str,
                        dropout_rng: np.random.Generator | None):
        layers = self.cfg.mol_layers if prefix == "mol" else self.cfg.temp_layers
        tape = {"inputs": [], "masks": [], "pre": []}
        h = data
        for l in range(layers):
            w, b = self.params[f"{prefix}.{l}.W"], self.params[f"{prefix}.{l}.b"]
            tape["inputs"].append(h)
            z = h @ w.T + b
            if l < layers - 1:
                tape["pre"].append(z)
                h = np.tanh(z)
                if dropout_rng is not None and self.cfg.dropout > 0:
                    keep = 1.0 - self.cfg.dropout
                    mask = (dropout_rng.random(h.shape) < keep) / keep
                    h = h * mask
                    tape["masks"].append(mask)
                else:
                    tape["masks"].append(None)
            else:
                h = z
        return h, tape

    def _encode_backward(self, d_out: np.ndarray, tape: dict, prefix: str,
                         grads: dict) -> np.ndarray:
        layers = self.cfg.mol_layers if prefix == "mol" else self.cfg.temp_layers
        d_h = d_out
        for l in reversed(range(layers)):
            w = self.params[f"{prefix}.{l}.W"]
            if l < layers - 1:
                mask = tape["masks"][l]
                if mask is not None:
                    d_h = d_h * mask
                d_h = d_h * (1.0 - np.tanh(tape["pre"][l]) ** 2)
            grads[f"{prefix}.{l}.W"] += d_h.T @ tape["inputs"][l]
            grads[f"{prefix}.{l}.b"] += d_h.sum(axis=0)
            d_h = d_h @ w
        return d_h

    def _associate_forward(self, encoded: np.ndarray, proj: str):
        w, b = self.params[f"{proj}.W"], self.params[f"{proj}.b"]
        raw = encoded @ w.T + b
        if self.cfg.association_activation == "tanh":
            act = np.tanh(raw)
        else:
            act = raw
        tape = {"input": encoded, "raw": raw, "act": act}
        if self.cfg.assoc_norm:
            normed, norm_cache = _rownorm_forward(act)
            tape["norm"] = norm_cache
            return normed, tape
        return act, tape

    def _associate_backward(self, d_out: np.ndarray, tape: dict, proj: str,
                            grads: dict) -> np.ndarray:
        if self.cfg.assoc_norm:
            d_act = _rownorm_backward(d_out, tape["norm"])
        else:
            d_act = d_out
        if self.cfg.association_activation == "tanh":
            d_raw = d_act * (1.0 - tape["act"] ** 2)
        else:
            d_raw = d_act
        grads[f"{proj}.W"] += d_raw.T @ tape["input"]
        grads[f"{proj}.b"] += d_raw.sum(axis=0)
        return d_raw @ self.params[f"{proj}.W"]


def forward(model: PrioritizerModel, mol_fp) -> np.ndarray:
    """Probability vector over the model's K templates."""
    return model.forward(mol_fp)


def loss_and_gradients(model: PrioritizerModel, batch):
    """Mean NLL and exact gradients for a batch of (fingerprint, template id)."""
    if not batch:
        raise ShapeError("empty batch")
    fps = np.stack([model._as_input(fp) for fp, _ in batch])
    tids = np.array([tid for _, tid in batch], dtype=np.int64)
    return model.loss_and_gradients(fps, tids)


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def _rownorm(x: np.ndarray) -> np.ndarray:
    mean = x.mean(axis=1, keepdims=True)
    var = x.var(axis=1, keepdims=True)
    return (x - mean) / np.sqrt(var + _EPS_NORM)


def _rownorm_forward(x: np.ndarray):
    mean = x.mean(axis=1, keepdims=True)
    var = x.var(axis=1, keepdims=True)
    inv = 1.0 / np.sqrt(var + _EPS_NORM)
    y = (x - mean) * inv
    return y, {"y": y, "inv": inv, "n": x.shape[1]}


def _rownorm_backward(d_y: np.ndarray, cache: dict) -> np.ndarray:
    y, inv, n = cache["y"], cache["inv"], cache["n"]
    row_mean = d_y.mean(axis=1, keepdims=True)
    proj = (d_y * y).mean(axis=1, keepdims=True)
    return inv * (d_y - row_mean - y * proj)
