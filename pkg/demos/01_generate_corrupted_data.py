#!/usr/bin/env python3
# Generating a corrupted sparse-regression instance.
#
# The generative model is y = X^T beta* + u + eps:
#   - X is a p x n standard-normal design stored features-as-rows,
#     materialized lazily so huge feature pools never sit in memory;
#   - beta* is unit-norm with mu nonzero weights;
#   - u is adversarial corruption on a random subset of samples, uniform
#     on +-5 * max|y*| (unbounded relative to the noise scale);
#   - eps is small dense Gaussian noise on every sample.

import numpy as np

from roofs import GenConfig, make_instance
from roofs.streamio import write_stream

cfg = GenConfig(p=200, n=150, mu=40, corruption_ratio=0.2, sigma=0.1, seed=7)
design, y, truth = make_instance(cfg)

print(f"instance: p={cfg.p} features, n={cfg.n} samples, support size {cfg.mu}")
print(f"true coefficient norm: {truth.beta_star.norm():.6f} (unit by construction)")
print(f"uncorrupted samples:   {len(truth.s_star)} of {cfg.n}")

# The corruption dwarfs the dense noise: compare magnitudes.
corrupted = truth.s_star.complement()
print(f"max |corruption|:      {np.abs(truth.u).max():.2f}")
print(f"dense noise sigma:     {cfg.sigma}")

# Rows are addressable by feature id and reproducible: the same id always
# yields the same row, so a batch may legally be re-delivered later.
row = design.row(17)
print(f"row 17 checksum-ish:   {row[:3].round(3).tolist()} ... (len {row.size})")

# Export the instance as a file-backed stream: batch files + response +
# separate ground-truth file + manifest with checksums.
manifest = write_stream(design, y, truth, batch_size=64, out_dir="demo_stream")
print(f"wrote {len(manifest.batch_files)} batch files to demo_stream/:")
for name, digest in zip(manifest.batch_files, manifest.checksums):
    print(f"  {name}  sha256:{digest[:12]}...")
