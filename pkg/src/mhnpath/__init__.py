"""Retrosynthesis planning engine with Hopfield-attention template ranking.

Submodules: fingerprint and scaffold utilities, reaction templates
(templates), the prioritizer model (mhn), condition/pricing/toxicity services
(conditions, pricing, scoring), the greedy tree search (search), ranking
metrics (evalharness), a scikit-learn style wrapper (estimator), and the
command-line interface (cli).
"""

__version__ = "0.1.0"

from .molecule import (
    Atom,
    Bond,
    BondOrder,
    Molecule,
    MoleculeError,
    RingError,
    SmilesSyntaxError,
    ValenceError,
)
from .smiles import MoleculeSet, parse_smiles, parse_smiles_set
from .canon import write_canonical_smiles
from .fingerprint import Fingerprint, fingerprint
from .scaffold import murcko_scaffold, scaffold_split

__all__ = [
    "Atom",
    "Bond",
    "BondOrder",
    "Fingerprint",
    "Molecule",
    "MoleculeError",
    "MoleculeSet",
    "RingError",
    "SmilesSyntaxError",
    "ValenceError",
    "__version__",
    "fingerprint",
    "murcko_scaffold",
    "parse_smiles",
    "parse_smiles_set",
    "scaffold_split",
    "write_canonical_smiles",
]
