"""Smoke test for the pathcol extension module.

Build and run:

    cargo build --release -p pathcol-py --features extension-module
    cp target/release/libpathcol_py.so python/pathcol.so
    python3 python/smoke_test.py
"""

import itertools
import math

import pathcol


def brute_count(g, l, left=None, right=None):
    total = 0
    for s in itertools.product(range(g.q), repeat=l):
        if left is not None and not g.adjacent(left, s[0]):
            continue
        if right is not None and not g.adjacent(s[-1], right):
            continue
        if all(g.adjacent(a, b) for a, b in zip(s, s[1:])):
            total += 1
    return total


def main():
    k3 = pathcol.Graph.builtin("clique", 3)
    ind = pathcol.Graph.builtin("independent_set")
    assert k3.q == 3 and k3.max_degree == 2
    assert pathcol.Graph.builtin("beach").two_path_witness() == (0, 3)

    for l in range(1, 7):
        for left, right in [(None, None), (0, None), (0, 0), (1, 2)]:
            assert pathcol.count_segment(k3, l, left, right) == brute_count(k3, l, left, right)
    assert pathcol.count_segment(k3, 200) == 3 * 2**199

    p = pathcol.Params(ind, "rnd")
    assert (p.l1, p.s, p.beta, p.gamma, p.w) == (8, 9, 5120, 1025, 9225)
    assert pathcol.Params(k3, "fixedorder", u=3).overrides == ["u"]

    fill = pathcol.sample_fill(k3, 5, 0, 0, seed=3)
    assert len(fill) == 5 and all(k3.adjacent(a, b) for a, b in zip([0] + fill, fill + [0]))

    states = pathcol.enumerate_states(k3, 6)
    assert len(states) == 3 * 2**5

    anyorder = pathcol.Params(k3, "anyorder")
    a = pathcol.run_chain(k3, anyorder, 12, 20, seed=7)
    b = pathcol.run_chain(k3, anyorder, 12, 20, seed=7)
    assert a == b and all(k3.adjacent(x, y) for x, y in zip(a, a[1:]))

    curve = pathcol.tv_curve(k3, pathcol.Params(k3, "anyorder", l1=3), [0, 1] * 4, 30)
    tvs = [tv for _, tv in curve]
    assert all(x >= y - 1e-12 for x, y in zip(tvs, tvs[1:])) and tvs[-1] < 0.01

    prof = pathcol.disagreement_profile(k3, 10, 0, 1, 2)
    assert all(pj <= 0.75**j + 1e-12 for j, pj in enumerate(prof, start=1))

    assert abs(pathcol.dobrushin_alpha(k3, 8) - (0.75 + 0.75**7)) < 1e-12
    assert pathcol.mixing_bound(k3, "anyorder", 12, 0.01) == math.ceil(20 * math.log(1200))
    assert pathcol.tv_distance([0.5, 0.5], [1.0, 0.0]) == 0.5

    status, table = pathcol.verify("identities", ind)
    assert status == "pass", table

    try:
        pathcol.Graph.builtin("nope")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown builtin accepted")

    print(f"pathcol {pathcol.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
