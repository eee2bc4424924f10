"""Price catalog, buyability policy, and the mock-able vendor quote client."""

from __future__ import annotations

import json
import logging
import os
import time
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path

from .canon import write_canonical_smiles
from .molecule import Molecule
from .smiles import parse_smiles

logger = logging.getLogger(__name__)

VENDOR_KEY_ENV = "MHNPATH_VENDOR_KEY"


class AuthError(RuntimeError):
    pass


class RateLimited(RuntimeError):
    def __init__(self, retry_after: float):
        self.retry_after = retry_after
        super().__init__(f"rate limited; retry after {retry_after}s")


@dataclass(frozen=True)
class BuyabilityPolicy:
    buyable_threshold: float = 100.0
    nonbuyable_cap: float = 500.0

    def __post_init__(self):
        if not (0 < self.buyable_threshold <= self.nonbuyable_cap):
            raise ValueError("need 0 < buyable_threshold <= nonbuyable_cap")


@dataclass
class PriceCatalog:
    # canonical SMILES -> list of (usd_per_g, source, retrieved_at)
    entries: dict = field(default_factory=dict)

    def add(self, smiles_key: str, usd_per_g: float, source: str,
            retrieved_at: str = "") -> None:
        if not (usd_per_g >= 0 and usd_per_g == usd_per_g and usd_per_g != float("inf")):
            raise ValueError(f"price must be finite and >= 0: {usd_per_g}")
        key = write_canonical_smiles(parse_smiles(smiles_key))
        self.entries.setdefault(key, []).append((usd_per_g, source, retrieved_at))

    def __len__(self):
        return len(self.entries)


def lookup_price(catalog: PriceCatalog, mol: Molecule | str) -> float | None:
    """Minimum price across sources, or None when the molecule is not listed."""
    key = mol if isinstance(mol, str) else write_canonical_smiles(mol)
    rows = catalog.entries.get(key)
    if not rows:
        return None
    return min(price for price, _, _ in rows)


def is_buyable(price: float | None, policy: BuyabilityPolicy) -> bool:
    return price is not None and price < policy.buyable_threshold


def effective_cost(price: float | None, policy: BuyabilityPolicy) -> float:
    """Price clamped to the non-buyable cap; unlisted molecules cost the cap."""
    if price is None:
        return policy.nonbuyable_cap
    return min(price, policy.nonbuyable_cap)


# -- catalog file ------------------------------------------------------------

_CATALOG_HEADER = "canonical_smiles,usd_per_g,source,retrieved_at"


def load_catalog(path) -> PriceCatalog:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != _CATALOG_HEADER:
        raise ValueError(f"{path}: expected header {_CATALOG_HEADER!r}")
    catalog = PriceCatalog()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != 4:
            raise ValueError(f"{path} line {lineno}: expected 4 columns")
        smiles, price, source, retrieved_at = fields
        catalog.add(smiles, float(price), source, retrieved_at)
    return catalog


def save_catalog(catalog: PriceCatalog, path) -> None:
    lines = [_CATALOG_HEADER]
    for key in sorted(catalog.entries):
        for price, source, retrieved_at in catalog.entries[key]:
            lines.append(f"{key},{price!r},{source},{retrieved_at}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- vendor quotes -------------------------------------------------------------

@dataclass
class VendorClient:
    endpoint: str
    api_key: str | None = None
    timeout_s: float = 10.0
    max_retries: int = 2

    def __post_init__(self):
        if self.api_key is None:
            self.api_key = os.environ.get(VENDOR_KEY_ENV, "")


def fetch_quotes(client: VendorClient, mol: Molecule) -> list[tuple[str, float]]:
    """GET {endpoint}/price?smiles=<canonical>; returns [(source, usd_per_g)].

    Honors Retry-After on 429 up to client.max_retries, raises AuthError on
    401 and TimeoutError when the endpoint cannot be reached in time.
    """
    smiles = urllib.parse.quote(write_canonical_smiles(mol))
    url = f"{client.endpoint.rstrip('/')}/price?smiles={smiles}"
    request = urllib.request.Request(url, headers={"X-Api-Key": client.api_key or ""})
    attempts = 0
    while True:
        try:
            with urllib.request.urlopen(request, timeout=client.timeout_s) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
            return [(q["source"], float(q["usd_per_g"]))
                    for q in payload.get("quotes", [])]
        except urllib.error.HTTPError as exc:
            if exc.code == 401:
                raise AuthError("vendor rejected the API key (401)") from exc
            if exc.code == 429:
                retry_after = float(exc.headers.get("Retry-After", "1"))
                if attempts >= client.max_retries:
                    raise RateLimited(retry_after) from exc
                attempts += 1
                time.sleep(retry_after)
                continue
            raise
        except urllib.error.URLError as exc:
            raise TimeoutError(f"vendor endpoint unreachable: {exc.reason}") from exc
        except TimeoutError:
            raise


def sync_quotes(catalog: PriceCatalog, client: VendorClient, molecules,
                merge: bool = False, retrieved_at: str = "") -> list[tuple[str, str, float]]:
    """Fetch quotes for molecules; merge into the catalog only when asked.

    Network failures degrade to catalog-only operation with a warning.
    """
    fetched = []
    for mol in molecules:
        key = write_canonical_smiles(mol)
        try:
            quotes = fetch_quotes(client, mol)
        except (TimeoutError, RateLimited) as exc:
            logger.warning("quote fetch failed for %s: %s; continuing with catalog",
                           key, exc)
            continue
        for source, price in quotes:
            fetched.append((key, source, price))
            if merge:
                catalog.add(key, price, source, retrieved_at)
    return fetched
