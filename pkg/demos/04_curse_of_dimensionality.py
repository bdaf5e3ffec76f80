"""
Watching the small ball collapse
================================

Draw a million Gaussian sequences, weight coordinate j by j^{-2}, and count
how many fall within radius ``h`` of the origin. After removing the
polynomial factor, ``log phi`` is linear in ``h^{-2/3}`` with slope close to
``-C**``. Dependent coordinates steepen the slope by ``C_A^{2/3}``.
"""

import numpy as np

from seqnw.experiments import preset, run_experiment

common = dict(tau=60, n_mc=1_000_000, replicates=2, h_grid=tuple(np.geomspace(0.1, 0.35, 6)))

iid = run_experiment(preset("smallball", experiment="demo-iid", **common)).summary
ma = run_experiment(preset("smallball", experiment="demo-ma", process="gaussian_ma", ma_ratio=0.5, **common)).summary

for name, s in (("independent", iid), ("MA(0.5^j)", ma)):
    print(f"{name:>12}: fitted slope {s['mean_slope']:.4f}, predicted {s['predicted_slope']:.4f}")

print("slope ratio", ma["mean_slope"] / iid["mean_slope"], "vs C_A^(2/3) =", ma["constants"]["C_A"] ** (2 / 3))
