"""Category text-embedding store, the 256-dim remapping, and nearest-
category habit retrieval for unseen categories.

Raw embedding vectors are ingested from a JSON file (a synthetic set
ships with the corpus; real LLM-description embeddings plug in the same
way). The remapping to 256 dims is the projection trained jointly with
the VQ-VAE; retrieval compares remapped vectors by Euclidean distance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from habitmotion.errors import SchemaError, UnknownCategoryError

FORMAT_VERSION = 1


@dataclass
class EmbeddingEntry:
    label: str
    raw: np.ndarray
    source: str
    observed: bool
    projected: np.ndarray | None = None  # 256-dim g_c once a projection is attached


class EmbeddingStore:
    def __init__(self, dim: int, entries: dict):
        self.dim = int(dim)
        self.entries = entries

    def labels(self):
        return sorted(self.entries)

    def observed_labels(self):
        return sorted(label for label, e in self.entries.items() if e.observed)

    def raw_vector(self, label: str) -> np.ndarray:
        if label not in self.entries:
            raise UnknownCategoryError(label)
        return self.entries[label].raw

    def projected_vector(self, label: str) -> np.ndarray:
        if label not in self.entries:
            raise UnknownCategoryError(label)
        e = self.entries[label]
        if e.projected is None:
            raise SchemaError(
                f"no projection attached to the store (category {label!r}); "
                "call attach_projection first"
            )
        return e.projected

    def attach_projection(self, project_fn) -> "EmbeddingStore":
        """Compute g_c = project_fn(raw) for every entry; the same map is
        applied to observed and unseen categories."""
        for e in self.entries.values():
            e.projected = np.asarray(project_fn(e.raw), dtype=np.float64)
        return self


def load_embeddings(path) -> EmbeddingStore:
    """Load and validate the embedding JSON (duplicate labels, dimension
    mismatches and empty stores are rejected)."""
    with open(path, "r", encoding="utf-8") as f:
        try:
            doc = json.load(f, object_pairs_hook=_no_duplicate_keys)
        except json.JSONDecodeError as e:
            raise SchemaError(f"{path}: invalid JSON: {e}") from e
    for key in ("format_version", "dim", "entries"):
        if key not in doc:
            raise SchemaError(f"{path}: missing key {key!r}")
    if doc["format_version"] != FORMAT_VERSION:
        raise SchemaError(f"{path}: unsupported format_version {doc['format_version']}")
    dim = int(doc["dim"])
    raw_entries = doc["entries"]
    if not raw_entries:
        raise SchemaError(f"{path}: empty embedding store")
    entries = {}
    for label, item in raw_entries.items():
        vec = np.asarray(item.get("vector"), dtype=np.float64)
        if vec.shape != (dim,):
            raise SchemaError(
                f"{path}: entry {label!r} has dimension {vec.shape}, expected ({dim},)"
            )
        if not np.all(np.isfinite(vec)):
            raise SchemaError(f"{path}: entry {label!r} has non-finite components")
        entries[label] = EmbeddingEntry(
            label=label,
            raw=vec,
            source=str(item.get("source", "unknown")),
            observed=bool(item.get("observed", True)),
        )
    return EmbeddingStore(dim, entries)


def _no_duplicate_keys(pairs):
    out = {}
    for key, value in pairs:
        if key in out:
            raise SchemaError(f"duplicate label {key!r}")
        out[key] = value
    return out


def save_embeddings(store: EmbeddingStore, path) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "dim": store.dim,
        "entries": {
            label: {
                "vector": [float(v) for v in e.raw],
                "source": e.source,
                "observed": e.observed,
            }
            for label, e in sorted(store.entries.items())
        },
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=1, sort_keys=True)
        f.write("\n")


def project(store: EmbeddingStore, raw, project_fn) -> np.ndarray:
    """Apply the trained remapping to a raw vector of the store's
    dimension; deterministic linear map."""
    raw = np.asarray(raw, dtype=np.float64)
    if raw.shape != (store.dim,):
        raise SchemaError(f"raw vector has dimension {raw.shape}, store expects ({store.dim},)")
    return np.asarray(project_fn(raw), dtype=np.float64)


def retrieve_habit(g_c, store: EmbeddingStore, habit_models: dict, mode="deterministic", seed=0):
    """Nearest observed category by Euclidean distance in the remapped
    embedding space (ties break to the lexicographically smallest label);
    returns (category, habit latent from that category's model, distance)."""
    g_c = np.asarray(g_c, dtype=np.float64)
    observed = [c for c in store.observed_labels() if c in habit_models]
    if not observed:
        raise UnknownCategoryError("<no observed categories with trained habit models>")
    best, best_d = None, np.inf
    for c in observed:  # sorted, so strict < keeps the smallest label on ties
        dist = float(np.linalg.norm(g_c - store.projected_vector(c)))
        if dist < best_d:
            best, best_d = c, dist
    z = habit_models[best].sample_habit(mode=mode, seed=seed)
    return best, z, best_d


def get_condition(label: str, store: EmbeddingStore, habit_models: dict,
                  mode="deterministic", seed=0):
    """Conditioning pair (z_c, g_c) for a category label.

    Observed categories use their own trained habit model directly;
    unseen ones retrieve the nearest observed category's habit latent but
    keep their own text embedding. Returns (z_c, g_c, source_category)."""
    if label not in store.entries:
        raise UnknownCategoryError(label)
    g_c = store.projected_vector(label)
    if store.entries[label].observed and label in habit_models:
        z = habit_models[label].sample_habit(mode=mode, seed=seed)
        return z, g_c, label
    source, z, _ = retrieve_habit(g_c, store, habit_models, mode=mode, seed=seed)
    return z, g_c, source
