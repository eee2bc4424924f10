"""Versioned binary model container.

Layout (little-endian): magic "MHNP", u32 version, u32 config-JSON length,
config JSON, u8 checksum flag, 32-byte library checksum, u32 template count,
u32 tensor count, then per tensor: u16 name length, name, u8 kind
(0 parameter / 1 buffer), u8 ndim, u32 dims, float64 data.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..templates import TemplateLibrary
from .config import ModelConfig
from .model import PrioritizerModel

MAGIC = b"MHNP"
VERSION = 1


class CorruptFile(ValueError):
    pass


class VersionError(ValueError):
    pass


class ChecksumError(ValueError):
    pass


def save_model(model: PrioritizerModel, path) -> None:
    if model.library_checksum is None:
        raise ValueError("model must be bound to a library before saving")
    config_blob = json.dumps(model.cfg.to_dict(), sort_keys=True).encode("utf-8")
    chunks = [MAGIC, struct.pack("<I", VERSION),
              struct.pack("<I", len(config_blob)), config_blob,
              struct.pack("<B", 1), model.library_checksum,
              struct.pack("<I", model.n_templates or 0)]
    tensors = [(name, 0, arr) for name, arr in sorted(model.params.items())]
    tensors += [(name, 1, arr) for name, arr in sorted(model.buffers.items())]
    chunks.append(struct.pack("<I", len(tensors)))
    for name, kind, arr in tensors:
        encoded = name.encode("utf-8")
        arr = np.ascontiguousarray(arr, dtype=np.float64)
        chunks.append(struct.pack("<H", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<BB", kind, arr.ndim))
        chunks.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        chunks.append(arr.astype("<f8").tobytes())
    Path(path).write_bytes(b"".join(chunks))


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def take(self, count: int) -> bytes:
        if self.pos + count > len(self.blob):
            raise CorruptFile("unexpected end of model file")
        out = self.blob[self.pos : self.pos + count]
        self.pos += count
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load_model(path, lib: TemplateLibrary | None = None) -> PrioritizerModel:
    """Load a model; verifying against lib raises ChecksumError on mismatch."""
    reader = _Reader(Path(path).read_bytes())
    if reader.take(4) != MAGIC:
        raise CorruptFile(f"{path}: not a model file (bad magic)")
    (version,) = reader.unpack("<I")
    if version != VERSION:
        raise VersionError(f"{path}: unsupported model version {version}")
    (config_len,) = reader.unpack("<I")
    try:
        cfg = ModelConfig.from_dict(json.loads(reader.take(config_len)))
    except (json.JSONDecodeError, TypeError) as exc:
        raise CorruptFile(f"{path}: bad config block: {exc}") from exc
    (has_checksum,) = reader.unpack("<B")
    checksum = reader.take(32) if has_checksum else None
    (n_templates,) = reader.unpack("<I")
    (n_tensors,) = reader.unpack("<I")

    params: dict[str, np.ndarray] = {}
    buffers: dict[str, np.ndarray] = {}
    for _ in range(n_tensors):
        (name_len,) = reader.unpack("<H")
        name = reader.take(name_len).decode("utf-8")
        kind, ndim = reader.unpack("<BB")
        shape = reader.unpack(f"<{ndim}I") if ndim else ()
        count = int(np.prod(shape)) if shape else 1
        data = np.frombuffer(reader.take(count * 8), dtype="<f8").reshape(shape)
        (buffers if kind else params)[name] = data.copy()
    if reader.pos != len(reader.blob):
        raise CorruptFile(f"{path}: trailing bytes after tensor data")

    model = PrioritizerModel(cfg, params=params, buffers=buffers)
    model.library_checksum = checksum
    model.n_templates = n_templates
    if lib is not None:
        if checksum is not None and lib.checksum() != checksum:
            raise ChecksumError(
                f"{path}: model was trained against a different template library")
        model.bind_library(lib)
        model.build_template_cache()
    return model
