import json
import math
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from permuton_rs import lab
from permuton_rs.permuton import builtin, increasing_embedding, spec
from permuton_rs.rs_core import first_rows


def test_legendre_values():
    assert lab.legendre_bernoulli(0.5, 0.5) == 0
    assert lab.legendre_bernoulli(0.6, 0.8) == pytest.approx(0.0915162, abs=1e-6)
    assert lab.legendre_bernoulli(0.6, 1.0) == pytest.approx(-math.log(0.6))
    assert lab.legendre_bernoulli(1.0, 0.5) == math.inf
    with pytest.raises(ValueError):
        lab.legendre_bernoulli(1.5, 0.5)


@given(st.floats(0.01, 0.99), st.floats(0, 1))
def test_legendre_nonnegative(p, q):
    v = lab.legendre_bernoulli(p, q)
    assert v >= -1e-12
    # Chernoff: P(Bin(n,p) >= qn) <= exp(-n Lambda*) for q >= p
    if q > p:
        n = 40
        assert lab.binomial_upper(n, p, math.ceil(q * n)) <= math.exp(-n * v) + 1e-12


def test_resolve_seed(monkeypatch):
    monkeypatch.delenv(lab.SEED_ENV, raising=False)
    assert lab.resolve_seed(None) == lab.DEFAULT_SEED
    monkeypatch.setenv(lab.SEED_ENV, "17")
    assert lab.resolve_seed(None) == 17
    assert lab.resolve_seed(5) == 5


def test_block_rng_streams():
    a = lab.block_rng(1, "x", 10, 0).random(3)
    b = lab.block_rng(1, "x", 10, 0).random(3)
    c = lab.block_rng(1, "x", 10, 1).random(3)
    d = lab.block_rng(1, "y", 10, 0).random(3)
    assert (a == b).all() and not (a == c).all() and not (a == d).all()


def test_run_tally_independent_of_workers_and_blocks():
    sp = builtin("two-diag")
    one = lab.run_tally(sp, "t", 3, 12, 900, kmax=2, ge_threshold=8, lt_threshold=6, workers=1, block_size=200)
    two = lab.run_tally(sp, "t", 3, 12, 900, kmax=2, ge_threshold=8, lt_threshold=6, workers=2, block_size=200)
    assert one == two
    assert one["count"] == 900


def test_rigid_detection():
    assert lab.is_rigid(builtin("two-diag"))
    assert lab.is_rigid(builtin("fig6-mu1"))
    assert not lab.is_rigid(builtin("thoma-fig4"))
    assert lab.is_rigid(increasing_embedding((2, 3, 1)))


def test_rigid_permutation():
    sp = builtin("two-diag")
    # D1 sits above D2 and to its left
    assert lab.rigid_permutation(sp, (2, 3)) == (4, 5, 1, 2, 3)
    anti = spec(("decr", (0, 1, 1, 0), 1))
    assert lab.rigid_permutation(anti, (3,)) == (3, 2, 1)


def test_exact_law_total_and_against_monte_carlo():
    sp = builtin("two-diag")
    n = 6
    law = lab.exact_law(sp, n, lambda s: first_rows(s, 1)[0])
    assert sum(law.values()) == 1
    # LIS = max(count in D1, count in D2)
    assert law[6] == F(3, 5) ** 6 + F(2, 5) ** 6
    rng = lab.block_rng(0, "law", n, 0)
    from permuton_rs.permuton import sample_permutations
    perms = sample_permutations(sp, n, 40000, rng)
    from permuton_rs._kernels import rows_both
    lis, _ = rows_both(perms, 1)
    for v, w in law.items():
        freq = float((lis[:, 0] == v).mean())
        se = math.sqrt(float(w) * (1 - float(w)) / 40000)
        assert abs(freq - float(w)) <= 5 * se + 1e-9
    with pytest.raises(ValueError):
        lab.exact_law(builtin("thoma-fig4"), 3, len)


def test_report_formats():
    r = lab.ExperimentReport("demo", "spec", 1, {"n": [1, 2], "x": F(1, 2)})
    r.rows.append({"n": 1, "value": 0.5})
    r.rows.append({"n": 2, "value": math.inf, "extra": [1, 2]})
    r.check("a", 1, 1, 0, True)
    assert r.status == "pass"
    r.check("b", 1, 2, 0, False, inconclusive=True)
    assert r.status == "inconclusive"
    r.check("c", 1, 2, 0, False)
    assert r.status == "fail" and not r.passed
    doc = json.loads(r.dumps())
    assert doc["params"]["x"] == 0.5
    assert [c["status"] for c in doc["checks"]] == ["pass", "inconclusive", "fail"]
    text = r.to_csv().splitlines()
    assert text[0] == "n,value,extra"
    assert len(text) == 3


def test_convergence_small():
    rep = lab.convergence_experiment("fig6-mu1", k=1, ns=(500,), reps=10, seed=1, tol=0.06)
    assert rep.passed, rep.dumps()
    assert rep.rows[0]["replicates"] == 10


def test_lambda_convergence_small():
    rep = lab.lambda_convergence_experiment("two-diag", n=800, lattice=6, seed=2, tol=0.1)
    assert rep.passed


def test_derivative_identity():
    rep = lab.derivative_check("identity", x=F(3, 10), y=F(7, 10), t=1, s=0)
    assert rep.passed
    assert rep.rows[0]["phi"] == 1


def test_derivative_two_diag():
    rep = lab.derivative_check("two-diag", 1, 1, 1, 1)
    assert rep.passed
    assert rep.references["alpha"] == [0, 1] and rep.references["beta"] == [1, 0]
    assert [row["phi"] for row in rep.rows] == [1, 1]


def test_derivative_bad_point():
    with pytest.raises(ValueError):
        lab.derivative_check("two-diag", F(1, 100), 1, 1, 1)


def test_lower_tail_bound_rate():
    rate, j = lab.lower_tail_bound_rate(builtin("two-diag"), 0.5)
    assert j == 1 and rate == pytest.approx(lab.legendre_bernoulli(0.6, 0.5))
    rate, j = lab.lower_tail_bound_rate(builtin("fig6-mu1"), 0.55)
    assert j == 1


def test_lower_tail_comparison_exact():
    rep = lab.lower_tail_comparison("fig6-mu1", "fig6-mu2", beta=0.55, ns=range(2, 12))
    assert rep.passed
    assert all(row["method"] == "exact" for row in rep.rows)


def test_lower_tail_report_forced():
    rep = lab.lower_tail_report("fig6-mu1", beta=0.5, ns=(10,), reps=2000, seed=4)
    assert rep.passed
    assert rep.rows[0]["min_lis"] >= 5


def test_upper_tail_small():
    rep = lab.upper_tail_experiment("two-diag", k=1, alpha=0.8, ns_exact=range(2, 8), ns_mc=range(8, 14),
                                    reps=20000, seed=5)
    exact_rows = [r for r in rep.rows if r["method"] == "exact"]
    assert len(exact_rows) == 6
    for r in exact_rows:
        assert r["probability"] >= r["anchor"] - 1e-12
    names = [c.name for c in rep.checks]
    assert any("anchor" in nm for nm in names)


def test_identity_small():
    rep = lab.identity_probability_experiment("two-diag", ns=range(3, 6), reps=20000, seed=6, tol=0.15)
    for row in rep.rows:
        assert abs(row["probability"] - row["exact_probability"]) <= 5 * row["se"] + 1e-9
    assert rep.passed


def test_richardson_exact_on_quadratic():
    f = lambda e: 3 + 2 * e + 5 * e * e  # noqa: E731
    approx, _, _ = lab.richardson(f(F(1, 4)), f(F(1, 8)), f(F(1, 16)))
    assert approx == 3


def test_invariants_on_random_batches():
    for n in (5, 30):
        t = lab._tally_block((builtin("thoma-fig4").to_json(), "inv", 0, n, 0, 500, 2, None, None))
        assert t["es_violations"] == t["sum_violations"] == t["shape_violations"] == 0


def test_lower_tail_positive_just_above_half():
    # two-diag forces LIS >= n/2; at beta = 0.55 and n = 10 the event is LIS = 5
    sp = builtin("two-diag")
    t = lab.run_tally(sp, "below", 1, 10, 40000, lt_threshold=5.5)
    law = lab.exact_law(sp, 10, lambda s: first_rows(s, 1)[0])
    p = float(law[5])
    assert p == pytest.approx(252 * 0.24 ** 5)
    freq = t["lt_hits"] / t["count"]
    assert freq > 0 and abs(freq - p) <= 5 * math.sqrt(p * (1 - p) / 40000)


def test_upper_tail_rate_at_ten():
    sp = builtin("two-diag")
    t = lab.run_tally(sp, "upper-tail", lab.DEFAULT_SEED, 10, 1_000_000, ge_threshold=8)
    rate = -math.log(t["ge_hits"][0] / t["count"]) / 10
    assert abs(rate - lab.legendre_bernoulli(0.6, 0.8)) <= 0.15


def test_identity_trend_full_size():
    rep = lab.identity_probability_experiment("two-diag", ns=range(4, 11), reps=10_000_000, seed=lab.DEFAULT_SEED)
    assert rep.passed, rep.dumps()
    roots = [row["root"] for row in rep.rows]
    assert all(abs(r - 0.6) <= 0.1 for r in roots[-3:])
