"""Circular (neighborhood-hashing) fingerprints over molecular graphs."""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from .molecule import Molecule

# Baked into the file-format version: fingerprints must be identical across
# runs and platforms, so the combiner is keyed with a fixed constant.
_HASH_KEY = b"mhnpath-fp-v1"


def hash64(*values: int) -> int:
    """Stable 64-bit hash of an integer tuple (values taken mod 2**64)."""
    payload = struct.pack(
        f"<{len(values)}Q", *(v & 0xFFFFFFFFFFFFFFFF for v in values)
    )
    digest = hashlib.blake2b(payload, digest_size=8, key=_HASH_KEY).digest()
    return struct.unpack("<Q", digest)[0]


def atom_environment_id(element: int, charge: int, degree: int,
                        hydrogens: int, aromatic: bool) -> int:
    """Radius-0 environment identifier; shared with the substructure screen."""
    return hash64(1, element, charge, degree, hydrogens, int(aromatic))


@dataclass(frozen=True)
class Fingerprint:
    bits: frozenset
    radius: int
    n_bits: int

    def __post_init__(self):
        if self.n_bits <= 0 or self.n_bits & (self.n_bits - 1):
            raise ValueError("n_bits must be a power of two")

    def to_array(self) -> np.ndarray:
        arr = np.zeros(self.n_bits, dtype=np.float64)
        if self.bits:
            arr[sorted(self.bits)] = 1.0
        return arr

    def contains(self, other_bits) -> bool:
        return set(other_bits) <= self.bits

    def __len__(self):
        return len(self.bits)


def fingerprint(mol: Molecule, radius: int = 2, n_bits: int = 4096) -> Fingerprint:
    """Iterative neighborhood hashing; every (atom, r <= radius) id sets a bit."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    identifiers = environment_identifiers(mol, radius)
    bits = frozenset(i % n_bits for i in identifiers)
    return Fingerprint(bits=bits, radius=radius, n_bits=n_bits)


def environment_identifiers(mol: Molecule, radius: int) -> set[int]:
    current = [
        atom_environment_id(a.element, a.charge, mol.degree(i), a.hydrogens, a.aromatic)
        for i, a in enumerate(mol.atoms)
    ]
    collected = set(current)
    for _ in range(radius):
        fresh = []
        for i in range(mol.num_atoms):
            nbrs = mol.neighbors[i]
            if not nbrs:
                fresh.append(current[i])
                continue
            around = sorted(
                (int(mol.bond_between(i, j).order), current[j]) for j in nbrs
            )
            flat = [2, current[i]]
            for order, ident in around:
                flat.extend((order, ident))
            fresh.append(hash64(*flat))
        current = fresh
        collected.update(current)
    return collected
