"""Template library construction: delegates the chemistry to the engine's
`extract` command so rule texts are exactly what the engine itself derives."""

from __future__ import annotations

import subprocess
import sys
from pathlib import Path


class EngineError(RuntimeError):
    pass


def engine_command() -> list[str]:
    return [sys.executable, "-m", "mhnpath"]


def build_template_library(cleaned_tsv, out_tsv, radius: int = 1,
                           rejects_path=None) -> dict:
    """Run the engine's extractor on a cleaned reaction TSV.

    Returns counts {"reactions": n_in, "templates": n_out, "rejected": n_rej}.
    Rows outside the engine's rule subset end up in the rejects file.
    """
    cleaned_tsv = Path(cleaned_tsv)
    out_tsv = Path(out_tsv)
    if rejects_path is None:
        rejects_path = out_tsv.with_suffix(".rejects.txt")
    command = engine_command() + [
        "extract", "--reactions", str(cleaned_tsv), "--out", str(out_tsv),
        "--radius", str(radius), "--rejects", str(rejects_path),
    ]
    proc = subprocess.run(command, capture_output=True, text=True)
    if proc.returncode != 0:
        raise EngineError(
            f"engine extract failed ({proc.returncode}): {proc.stderr.strip()}")

    n_in = max(0, len(cleaned_tsv.read_text(encoding="utf-8").splitlines()) - 1)
    n_out = max(0, len(out_tsv.read_text(encoding="utf-8").splitlines()) - 1)
    reject_lines = Path(rejects_path).read_text(encoding="utf-8").splitlines()
    return {"reactions": n_in, "templates": n_out, "rejected": len(reject_lines)}
