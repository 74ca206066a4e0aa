"""Small versions of the seeded experiments; the CLI runs the full-size ones."""
from permuton_rs import lab

rep = lab.convergence_experiment("fig6-mu1", k=1, ns=(250, 1000, 4000), reps=10, seed=1, tol=0.03)
for row in rep.rows:
    print(f"n={row['n']:5d}  LIS/n={row['estimate']:.4f}  se={row['se']:.4f}")

rep = lab.upper_tail_experiment("two-diag", alpha=0.8, ns_exact=range(2, 10), ns_mc=range(10, 21, 2),
                                reps=50_000, seed=1)
print("limit rate", round(rep.references["rate"]["value"], 4))
for row in rep.rows:
    print(f"n={row['n']:3d} {row['method']:11s} P={row['probability']:.5f}  rate={row['rate']:.4f}")

rep = lab.lower_tail_comparison("fig6-mu1", "fig6-mu2", beta=0.55, ns=range(2, 15))
for row in rep.rows:
    print(f"n={row['n']:3d}  P1={row['p_a']:.5f}  P2={row['p_b']:.5f}")

rep = lab.derivative_check("two-diag", 1, 1, 1, 1)
print("derivative vs phi:", [(r["extrapolated"], r["phi"]) for r in rep.rows], rep.status)
