"""Pipeline manifests: inputs, outputs, per-stage row counts. Written last,
atomically, so a manifest's presence certifies its outputs are complete."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path


def write_manifest(path, *, inputs: list, output_dir: str, source: str,
                   stage_counts: dict, radius: int | None = None) -> None:
    counts = [v for v in _flatten_counts(stage_counts)]
    if any(b > a for a, b in zip(counts, counts[1:])):
        raise ValueError(f"stage counts must be non-increasing: {counts}")
    payload = {
        "inputs": [str(p) for p in inputs],
        "output_dir": str(output_dir),
        "source": source,
        "stage_counts": stage_counts,
    }
    if radius is not None:
        payload["radius"] = radius
    path = Path(path)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=".manifest-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def _flatten_counts(stage_counts: dict):
    for key in ("raw", "parsed", "balanced", "unique"):
        if key in stage_counts:
            yield stage_counts[key]
