"""Reaction condition prediction: a deterministic table-backed predictor plus
a wire protocol for plugging in external predictors."""

from __future__ import annotations

import json
import socket
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

from .canon import write_canonical_smiles
from .smiles import parse_smiles, parse_smiles_set

DEFAULT_TEMPERATURE_C = 25.0


class EmptyCandidates(ValueError):
    pass


class PredictorProtocolError(RuntimeError):
    pass


@dataclass(frozen=True)
class ReactionConditions:
    temperature_c: float
    solvents: tuple[str, ...] = ()
    reagents: tuple[str, ...] = ()
    provenance: str = "default"


def canonical_reaction_key(reaction_smiles: str) -> str:
    """Order-independent key: canonical precursors >> canonical product."""
    left, sep, right = reaction_smiles.partition(">>")
    if not sep:
        raise ValueError(f"reaction needs '>>': {reaction_smiles!r}")
    precursors = parse_smiles_set(left)
    product = parse_smiles(right)
    return f"{precursors.canonical_key}>>{write_canonical_smiles(product)}"


def aggregate_temperature(candidates, k: int = 10) -> float:
    """Weighted mean temperature of the first min(k, len) ranked candidates."""
    candidates = list(candidates)
    if not candidates:
        raise EmptyCandidates("no condition candidates")
    used = candidates[: min(k, len(candidates))]
    total_weight = sum(w for _, w in used)
    return sum(c.temperature_c * w for c, w in used) / total_weight


@dataclass
class TablePredictor:
    """CSV-backed conditions; unknown reactions get the configured default row."""

    table: dict = field(default_factory=dict)
    default: ReactionConditions = ReactionConditions(
        temperature_c=DEFAULT_TEMPERATURE_C, provenance="default")

    def predict(self, reaction_smiles: str) -> list[tuple[ReactionConditions, float]]:
        key = canonical_reaction_key(reaction_smiles)
        rows = self.table.get(key)
        if not rows:
            return [(self.default, 1.0)]
        return [(conditions, weight) for _, conditions, weight in sorted(rows)]


def load_conditions_table(path) -> TablePredictor:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = "reaction_key,rank,weight,temperature_c,solvents,reagents"
    if not lines or lines[0] != header:
        raise ValueError(f"{path}: expected header {header!r}")
    table: dict[str, list] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != 6:
            raise ValueError(f"{path} line {lineno}: expected 6 columns")
        raw_key, rank, weight, temp, solvents, reagents = fields
        key = canonical_reaction_key(raw_key)
        conditions = ReactionConditions(
            temperature_c=float(temp),
            solvents=tuple(
                write_canonical_smiles(parse_smiles(s))
                for s in solvents.split(";") if s),
            reagents=tuple(
                write_canonical_smiles(parse_smiles(s))
                for s in reagents.split(";") if s),
            provenance="table",
        )
        table.setdefault(key, []).append((int(rank), conditions, float(weight)))
    return TablePredictor(table=table)


def _conditions_from_json(payload: dict) -> list[tuple[ReactionConditions, float]]:
    out = []
    for cand in payload.get("candidates", []):
        conditions = ReactionConditions(
            temperature_c=float(cand["temperature_c"]),
            solvents=tuple(cand.get("solvents", [])),
            reagents=tuple(cand.get("reagents", [])),
            provenance="external",
        )
        weight = float(cand["weight"])
        if weight <= 0:
            raise PredictorProtocolError("candidate weights must be positive")
        out.append((conditions, weight))
    if not out:
        raise PredictorProtocolError("external predictor returned no candidates")
    return out


class PipePredictor:
    """Newline-delimited JSON over a child process's stdin/stdout."""

    def __init__(self, command: list[str]):
        self.proc = subprocess.Popen(
            command, stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True)

    def predict(self, reaction_smiles: str):
        request = json.dumps({"reaction": reaction_smiles})
        self.proc.stdin.write(request + "\n")
        self.proc.stdin.flush()
        line = self.proc.stdout.readline()
        if not line:
            raise PredictorProtocolError("external predictor closed the pipe")
        return _conditions_from_json(json.loads(line))

    def close(self):
        if self.proc.stdin:
            self.proc.stdin.close()
        self.proc.wait(timeout=5)


class SocketPredictor:
    """Newline-delimited JSON over a local (UNIX) socket."""

    def __init__(self, socket_path: str, timeout: float = 10.0):
        self.socket_path = socket_path
        self.timeout = timeout

    def predict(self, reaction_smiles: str):
        with socket.socket(socket.AF_UNIX, socket.SOCK_STREAM) as sock:
            sock.settimeout(self.timeout)
            sock.connect(self.socket_path)
            sock.sendall((json.dumps({"reaction": reaction_smiles}) + "\n").encode())
            buf = b""
            while not buf.endswith(b"\n"):
                chunk = sock.recv(65536)
                if not chunk:
                    break
                buf += chunk
        if not buf:
            raise PredictorProtocolError("external predictor sent no response")
        return _conditions_from_json(json.loads(buf))
