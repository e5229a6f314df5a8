"""Smoke test for the pyzerosum extension module.

Build and install it first:

    pip install --no-build-isolation -e crates/py
    python python/smoke_test.py
"""

import itertools

import pyzerosum as zs


def brute_counts(seq):
    """Zero-sum counts by length over all index subsets."""
    items = [tuple(g) for g, m in seq.entries() for _ in range(m)]
    factors = seq.group.factors
    counts = [0] * (len(items) + 1)
    for mask in itertools.product((0, 1), repeat=len(items)):
        total = [0] * len(factors)
        for bit, g in zip(mask, items):
            if bit:
                total = [(x + y) % n for x, y, n in zip(total, g, factors)]
        if not any(total):
            counts[sum(mask)] += 1
    return counts


def main():
    g = zs.Group("3^1^3")
    assert (g.order, g.rank, g.exponent, g.davenport_star()) == (27, 3, 3, 7)

    s = zs.Sequence.random(g, 10, seed=1)
    assert len(s) == 10
    assert zs.count_table(s) == brute_counts(s)
    assert zs.Sequence.parse(s.to_text()) == s

    seq, spectrum, claim = zs.construct("thm6", p=3, n=1)
    assert len(seq) == 9 and spectrum == [5, 6], claim
    assert zs.zero_sum_spectrum(seq) == [5, 6]
    w = zs.find_zero_sum(seq, 6)
    assert w is not None and w.is_zero_sum() and len(w) == 6
    assert zs.find_zero_sum(seq, 4) is None

    d = zs.compute_s_l("3^1^3")
    assert d["value"] == 7 and d["exact"]
    assert zs.compute_s_l(g, "1..5")["value"] == 9
    assert zs.verify_upper_bound(g, "3", 19)["verdict"] == "confirmed"
    try:
        zs.compute_s_l("5^1^3", budget_nodes=100)
    except zs.BudgetError:
        raise AssertionError("budget exhaustion is a lower bound, not an error")

    big = zs.Sequence.random("3^2^3", 55, seed=2)
    witness, depth = zs.find_2x(big)
    assert len(witness) == 18 and witness.is_zero_sum() and depth == 1
    assert len(big.remove(witness)) == 37

    report = zs.olson_alternating(zs.Sequence.random(g, 9, seed=3), 3)
    assert report["holds"] and report["hypothesis_met"]
    assert zs.lucas_binomial(10, 3, 3) == 120 % 3
    assert zs.lemma6_matrix_det(5, 2)["holds"]
    assert zs.theorem3_rank_argument(5, 1, 3, 2)["certified"]

    try:
        zs.Group("3^x")
    except ValueError:
        pass
    else:
        raise AssertionError("bad group spec accepted")

    print("pyzerosum smoke test passed")


if __name__ == "__main__":
    main()
