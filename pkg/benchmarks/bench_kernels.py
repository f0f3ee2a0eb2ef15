#!/usr/bin/env python3
"""Benchmark the compiled kernel backend against the pure-numpy fallback.

Covers the hot kernels (conv1d forward/backward, pairwise squared
distances, batched FK) on training-shaped inputs, plus an end-to-end
timing of a short VQ-VAE training run under each backend (subprocesses,
since the backend is chosen at import).

Usage: python benchmarks/bench_kernels.py [--e2e-iterations N]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np


def _timeit(fn, *args, repeat=200):
    fn(*args)  # warm up
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat * 1e3  # ms


def bench_kernels():
    from habitmotion.kernels import _ckern, pykern  # noqa: PLC0415
    from habitmotion.nk.layers import resolve_same_padding

    rng = np.random.default_rng(0)
    rows = []

    conv_cases = [
        ("conv fwd 147ch k3", (32, 147, 10), (64, 147, 3), 1, 1),
        ("conv fwd 64ch k4 s2", (32, 64, 10), (64, 64, 4), 2, 1),
        ("conv fwd 64ch k3 d3", (32, 64, 10), (64, 64, 3), 1, 3),
    ]
    for name, xs, ws, stride, dil in conv_cases:
        x = rng.standard_normal(xs)
        w = rng.standard_normal(ws)
        b = rng.standard_normal(ws[0])
        pl, pr = resolve_same_padding(xs[2], ws[2], stride, dil)
        args = (x, w, b, stride, dil, pl, pr)
        rows.append((name, _timeit(_ckern.conv1d_forward, *args),
                     _timeit(pykern.conv1d_forward, *args)))
        gy = rng.standard_normal(_ckern.conv1d_forward(*args).shape)
        bargs = (x, w, gy, stride, dil, pl, pr)
        rows.append((name.replace("fwd", "bwd"),
                     _timeit(_ckern.conv1d_backward, *bargs),
                     _timeit(pykern.conv1d_backward, *bargs)))

    a = np.ascontiguousarray(rng.standard_normal((96, 64)))
    codes = np.ascontiguousarray(rng.standard_normal((64, 64)))
    rows.append(("sqdist 96x64 codes", _timeit(_ckern.sqdist, a, codes),
                 _timeit(pykern.sqdist, a, codes)))
    u = np.ascontiguousarray(rng.standard_normal((600, 256)))
    rows.append(("sqdist 600x600 d256", _timeit(_ckern.sqdist, u, u, repeat=20),
                 _timeit(pykern.sqdist, u, u, repeat=20)))

    parents = np.array([-1] + list(range(20)), dtype=np.int64)
    offsets = rng.standard_normal((21, 3))
    q = rng.standard_normal((200, 21, 4))
    q /= np.linalg.norm(q, axis=-1, keepdims=True)
    roots = rng.standard_normal((200, 3))
    rows.append(("fk 200 frames x 21 joints",
                 _timeit(_ckern.fk_positions, parents, offsets, q, roots),
                 _timeit(pykern.fk_positions, parents, offsets, q, roots)))
    return rows


_E2E_SNIPPET = """
import time
from habitmotion.motion import build_corpus, load_corpus
from habitmotion.embeddings import load_embeddings
from habitmotion.habit import HabitConfig, train_habit
from habitmotion.vqvae import desk_config, train_vqvae
import habitmotion, tempfile, os
d = tempfile.mkdtemp()
build_corpus('3cat', d, seed=0)
corpus = load_corpus(d)
store = load_embeddings(os.path.join(d, 'embeddings.json'))
hcfg = HabitConfig(latent_dim=16, post_layers=2, post_hidden=64, post_heads=4,
                   iterations=20, batch_size=16, crop_frames=24)
hm = {c: train_habit([it.motion for it in items], hcfg, seed=0)
      for c, items in corpus.by_category('train').items()}
mc, tc = desk_config()
tc.iterations = N_ITERS
t0 = time.time()
train_vqvae(mc, tc, corpus, hm, store)
print(f"{habitmotion.BACKEND} backend: {time.time()-t0:.2f}s for N_ITERS iterations")
"""


def bench_e2e(iterations):
    sys.stdout.flush()  # keep parent/child output ordered under redirection
    for backend in ("compiled", "python"):
        env = dict(os.environ, HABITMOTION_BACKEND=backend)
        code = _E2E_SNIPPET.replace("N_ITERS", str(iterations))
        subprocess.run([sys.executable, "-c", code], env=env, check=True)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--e2e-iterations", type=int, default=300,
                        help="VQ-VAE iterations for the end-to-end comparison (0 skips)")
    args = parser.parse_args()

    print(f"{'kernel':<28} {'compiled ms':>12} {'python ms':>12} {'speedup':>8}")
    for name, tc, tp in bench_kernels():
        print(f"{name:<28} {tc:>12.4f} {tp:>12.4f} {tp / tc:>7.2f}x")

    if args.e2e_iterations > 0:
        print("\nend-to-end VQ-VAE training:")
        bench_e2e(args.e2e_iterations)


if __name__ == "__main__":
    main()
