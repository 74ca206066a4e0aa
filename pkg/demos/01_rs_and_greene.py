"""Insertion tableaux, Greene invariants and the lambda grid of a small permutation."""
from permuton_rs.rs_core import greene_bruteforce, greene_invariants, lambda_grid, rs_correspondence

sigma = (4, 2, 7, 6, 1, 3, 5)
pair = rs_correspondence(sigma)
print("sigma", sigma)
print("P rows", pair.p_rows())
print("Q rows", pair.q_rows())
print("shape", pair.shape)

# increments of LIS_k give the rows, increments of LDS_k the columns
lis, lds = greene_invariants(sigma, 3)
print("LIS_k", lis, "LDS_k", lds)
print("brute force LIS_2", greene_bruteforce(sigma, 2))

# every sub-rectangle [0,i] x [0,j] has its own shape
grid = lambda_grid(sigma)
for j in range(7, -1, -1):
    print(" ".join(f"{sum(grid.partition(i, j)):>2}" for i in range(8)))
print("shape at (7, 4):", grid.partition(7, 4))
