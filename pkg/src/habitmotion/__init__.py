"""habitmotion: habit-preserved cross-category quadruped motion transfer.

A motion VQ-VAE conditioned on per-category habit latents (learned with
normalizing-flow priors) and category text embeddings, plus retrieval for
unseen categories, a synthetic quadruped corpus, and the full evaluation
metric suite. See README.md for the CLI walkthrough.
"""

from habitmotion.kernels import BACKEND  # noqa: F401

__version__ = "0.1.0"
