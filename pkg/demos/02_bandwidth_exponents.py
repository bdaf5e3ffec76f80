"""
How fast may the bandwidth shrink?
==================================

With ``h = (log n)^a`` the squared bias and the variance balance at an
exponent ``a`` given through the Lambert W function. The exponent creeps
down towards ``-(2p-1)/2`` but gets there only on astronomically large
samples; the sup-norm version starts higher and closes the gap slowly.
"""

from seqnw.bandwidth import a_limit, a_opt_pointwise, a_opt_uniform, balance_residual, h_opt

p, beta = 2.0, 1.0
print("limit:", a_limit(p))

print(f"{'n':>8} {'a_pointwise':>12} {'a_uniform':>10} {'h_pointwise':>12} {'residual':>9}")
for e in (3, 4, 6, 9, 12, 20, 50, 100, 300):
    n = 10.0**e
    a = a_opt_pointwise(n, beta, p)
    print(f"{'1e%d' % e:>8} {a:12.5f} {a_opt_uniform(n, beta, p):10.5f} {h_opt(n, a):12.3e} "
          f"{balance_residual(a, n, beta, p):9.1e}")

# %%
# The balance treats the small-ball constant as one. A design whose constant
# is larger needs the rule scaled up, or the expected window count n*phi
# falls as n grows; see the consistency demo.
