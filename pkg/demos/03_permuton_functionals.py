"""Exact limits of LIS_k/n, shapes and the lambda~ function for the built-in permutons."""
from fractions import Fraction as F

from permuton_rs.permuton import (BUILTINS, builtin, decompose, lambda_tilde, lis_tilde_discretized,
                                  lis_tilde_exact, sample_permutation, sh_tilde)

for key in BUILTINS:
    sp = builtin(key)
    lis = [lis_tilde_exact(sp, k) for k in range(1, 5)]
    print(f"{key:13s} LIS~_1..4 = {[str(v) for v in lis]}")

sh = sh_tilde(builtin("thoma-fig4"), 4)
print("thoma-fig4 alpha", [str(a) for a in sh.alpha], "beta", [str(b) for b in sh.beta[:2]])
print("decomposition masses", [str(p.mass) for p in decompose(builtin("thoma-fig4"))])

# the atomic oracle agrees within its bound
est = lis_tilde_discretized(builtin("fig6-mu1"), 1, m=200)
print("fig6-mu1 discretized", est.value, "+-", est.bound)

lam = lambda_tilde(builtin("two-diag"), 2)
for x, y in [(1, 1), (F(3, 5), 1), (1, F(2, 5)), (F(4, 5), F(4, 5))]:
    print(f"lambda~({x}, {y}) = {[str(v) for v in lam.rows(x, y)]}")

print("a sample from two-diag:", sample_permutation(builtin("two-diag"), 12, seed=1))
