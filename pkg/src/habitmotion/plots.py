"""Static SVG scatter of category embeddings (PCA to 2D).

Hand-rolled SVG output so identical inputs give byte-identical files.
"""

from __future__ import annotations

import numpy as np

from habitmotion.embeddings import EmbeddingStore
from habitmotion.errors import ConfigError

_PALETTE = (
    "#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377",
    "#bbbbbb", "#332288", "#117733", "#882255", "#44aa99", "#999933",
)


def pca_2d(rows: np.ndarray) -> np.ndarray:
    """Project rows onto their two leading principal components with a
    deterministic sign convention (largest-|loading| coordinate positive)."""
    centered = rows - rows.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    comps = vt[:2]
    for i in range(comps.shape[0]):
        j = int(np.argmax(np.abs(comps[i])))
        if comps[i, j] < 0:
            comps[i] = -comps[i]
    out = centered @ comps.T
    if out.shape[1] < 2:  # degenerate 1-D input
        out = np.column_stack([out[:, 0], np.zeros(out.shape[0])])
    return out


def embedding_scatter_svg(store: EmbeddingStore, width=640, height=480) -> str:
    labels = store.labels()
    if len(labels) < 3:
        raise ConfigError(f"need at least 3 categories to plot, got {len(labels)}")
    rows = np.stack([store.raw_vector(c) for c in labels])
    xy = pca_2d(rows)
    span = max(float(np.abs(xy).max()), 1e-9)
    margin = 50.0
    scale = (min(width, height) / 2.0 - margin) / span
    cx, cy = width / 2.0, height / 2.0
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{cx:.1f}" y="24" text-anchor="middle" font-family="sans-serif" '
        'font-size="14">category embeddings (PCA)</text>',
    ]
    for i, label in enumerate(labels):
        x = cx + xy[i, 0] * scale
        y = cy - xy[i, 1] * scale
        color = _PALETTE[i % len(_PALETTE)]
        observed = store.entries[label].observed
        fill = color if observed else "white"
        parts.append(
            f'<circle cx="{x:.2f}" cy="{y:.2f}" r="5" fill="{fill}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{x + 8:.2f}" y="{y + 4:.2f}" font-family="sans-serif" '
            f'font-size="11" fill="#222222">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
