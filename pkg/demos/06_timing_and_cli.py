"""Where the sketch wins time, and how to run the full studies.

One gaussian-sketch orthogonalization costs O(m n r) plus an r x n SVD,
against the O(m n min(m, n)) full SVD (or five full-matrix Newton-Schulz
products).  This demo times all methods single-threaded at a few sizes,
then shows the `bench` command-line entry points that run the complete
studies and write CSV + SVG artifacts.

Run:  python3 demos/06_timing_and_cli.py
"""

import numpy as np

from sketchsign.experiments import timing
from sketchsign.experiments.config import RunConfig

cfg = RunConfig(
    experiment="timing",
    dims=(128, 256, 512),
    reps=5,
    warmup=1,
    rank_frac=0.1,
    seeds=(0,),
)
record = timing.timing_record(cfg)

medians = {}
for n, method, phase, median_ns, _ in record.rows:
    if phase == "total":
        medians[(n, method)] = median_ns / 1e6

methods = [m for m in dict.fromkeys(k[1] for k in medians)]
print("median wall time (ms), single BLAS thread, sketch rank = n/10\n")
print("  method          " + "".join(f"{f'n={n}':>10s}" for n in cfg.dims))
for method in methods:
    row = "".join(f"{medians[(n, method)]:10.1f}" for n in cfg.dims)
    print(f"  {method:15s} {row}")

ratio = medians[(512, "exact-svd")] / medians[(512, "gaussian-sketch")]
print(f"\nAt n = 512 the sketch is already {ratio:.0f}x faster than the exact")
print("sign, and the gap widens with n (the acceptance suite checks n = 2048).")

print(
    """
The same studies at full scale, from the command line:

  bench timing      --dims 256,512,1024,2048 --output_dir bench-results
  bench robustness  --dims 500 --noise_vars 0.1,1,10
  bench regression  --n 200 --p 20 --iters 2000 --methods lr-muon,muon,sgdm,adamw
  bench invariants              # 25 runtime-checkable properties, exit 1 on failure

Each run writes <experiment>.csv plus .svg plots into the output directory
(default bench-results/, or set BENCH_OUTPUT_DIR)."""
)
