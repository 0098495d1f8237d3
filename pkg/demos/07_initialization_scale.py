"""How the initialization scale affects speed (experiment 2).

On instances with a dense planted solution, starting closer to the origin
consistently slows convergence; the sweep writes one cumulative-minimum
column per scale and prints when each crosses a small threshold.
"""

from pathlib import Path

import numpy as np

from entmd import ExperimentConfig, InstanceSpec, run_experiment2

cfg = ExperimentConfig(
    InstanceSpec(m=30, n=50, sparsity=None, seed=11),
    iters=20_000,
    inits=[1e-2, 1e-4, 1e-8, 1e-16, 1e-32],
    out_path=Path("out") / "initialization_scale",
)
cummin_path, meta_path = run_experiment2(cfg)
print(f"wrote {cummin_path}\nwrote {meta_path}\n")

lines = cummin_path.read_text().splitlines()
labels = lines[0].split(",")[1:]
data = np.array([[float(v) for v in line.split(",")[1:]] for line in lines[1:]])

threshold = 1e-10
print(f"iterations until the cumulative-min objective reaches {threshold:g}:")
for j, label in enumerate(labels):
    hit = np.nonzero(data[:, j] <= threshold)[0]
    when = str(int(hit[0])) if hit.size else f"not within {data.shape[0]}"
    print(f"  {label:10s} {when}")
