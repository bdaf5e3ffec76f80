"""
Pointwise consistency under serial dependence
=============================================

Regressors are windows of a Gaussian moving average with coefficients
``0.5^j``; the regression function is ``sum_j exp(-j) x_j``. At the origin
the Nadaraya-Watson error shrinks as the sample grows, slowly, as the
logarithmic rates predict.
"""

from seqnw.experiments import preset, run_experiment

cfg = preset("consistency", replicates=100)
res = run_experiment(cfg)

for row in res.summary["by_n"]:
    pt = row["points"][0]
    print(f"n={row['n']:5d}  h={row['h']:.3f}  window share={pt['mean_phi_hat']:.4f}  "
          f"median |error|={pt['median_abs_error']:.4f}")

# %%
# Shrinking the rule by a constant starves the window: for these sample
# sizes the expected count n*phi then decreases with n, and empty windows
# appear.
small = preset("consistency", replicates=50, scale=0.7, n_grid=(200, 2000, 20000), experiment="starved")
for row in run_experiment(small).summary["by_n"]:
    pt = row["points"][0]
    print(f"n={row['n']:6d}  n*phi={row['n'] * pt['mean_phi_hat']:7.2f}  empty={pt['empty_rate']:.2f}")
