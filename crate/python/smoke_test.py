"""Smoke test for the Python bindings.

Build and install first:  maturin develop -m crates/python/Cargo.toml
"""

import math

import modal_barrier as mb


def barbell(bridge=0.01):
    tri = [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]
    edges = tri + [(a + 3, b + 3, w) for a, b, w in tri] + [(2, 3, bridge)]
    return mb.Graph(6, edges)


def main():
    k2 = mb.Graph(2, [(0, 1, 1.0)])
    lam = mb.spectrum(k2)
    assert abs(lam[0]) < 1e-12 and abs(lam[1] - 2.0) < 1e-12, lam
    assert abs(mb.resistance(k2, "exact", q=2)[0] - 2.0) < 1e-12
    assert abs(mb.resistance(k2, "approx-i", epsilon=0.1)[0] - 0.0952380952) < 1e-9
    assert abs(mb.resistance(k2, "approx-ii", epsilon=0.1, p=0)[0] - 0.1818181818) < 1e-9

    g = barbell()
    assert (g.n, g.m) == (6, 7) and g.is_connected()
    assert mb.detect_q(g) == 2
    bridge = g.edges().index((2, 3, 0.01))
    r = mb.resistance(g, "exact", q=2)
    assert max(range(g.m), key=r.__getitem__) == bridge

    # The distributed simulation reproduces the centralized sum exactly.
    assert mb.resistance(g, "distributed", p=4) == mb.resistance(g, "approx-ii", p=4)

    w = mb.barrier_weights(r)
    assert min(range(g.m), key=w.__getitem__) == bridge
    s = mb.shuffle_weights(w, seed=7)
    assert sorted(s) == sorted(w) and s == mb.shuffle_weights(w, seed=7)

    assignment = [0, 0, 0, 1, 1, 1]
    a = mb.avg_relative_outgoing_weight(g, assignment)
    alpha = mb.alpha_star(a, lam_q := mb.spectrum(g)[2], 2)
    assert alpha > 0 and math.isfinite(lam_q)
    assert 0 <= mb.modal_distance(g, assignment) < 0.1

    unit = [1.0] * g.m
    t_unit = mb.crossing_time(g, unit, 0, 5)
    t_barrier = mb.crossing_time(g, w, 0, 5, kappa=0.05)
    assert t_unit is not None and t_barrier is not None and t_barrier > t_unit

    curve = mb.epidemic_curve(g, unit, days=30, runs=50, seed=1)
    assert len(curve) == 31 and curve[0] == 1.0
    assert curve == mb.epidemic_curve(g, unit, days=30, runs=50, seed=1)

    try:
        mb.resistance(g, "approx-i", epsilon=-1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative epsilon accepted")

    print(f"modal_barrier {mb.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
