"""Smoke test for the lz78_source_py extension module.

Build and stage the module next to this script, then run it:

    cargo build --release -p lz78-source-py
    cp target/release/liblz78_source_py.so python/lz78_source_py.so
    python3 python/smoke_test.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import lz78_source_py as lz  # noqa: E402


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def main():
    jeffreys = lz.Prior("dirichlet(0.5, 0.5)")
    assert jeffreys == lz.Prior.jeffreys()
    assert str(jeffreys) == "dirichlet(0.5,0.5)"
    assert jeffreys.alphabet_size == 2
    close(jeffreys.expected_entropy(), 0.557305, 1e-6)
    close(jeffreys.jensen_gap(), 1.0 - 0.557305, 1e-6)

    mix = lz.Prior.dirac_dirichlet(2.0, 0.05, 0.05)
    close(mix.expected_entropy(), 0.314156, 1e-6)

    x = lz.generate(jeffreys, 100_000, 78)
    assert isinstance(x, bytes) and len(x) == 100_000
    assert set(x) <= {0, 1}
    assert lz.generate(jeffreys, 100_000, 78) == x

    cps = lz.log_spaced_checkpoints(len(x), 10)
    curve = lz.score(jeffreys, x, cps)
    assert curve[-1][0] == len(x)
    close(curve[-1][1], -lz.log2_probability(jeffreys, x) / len(x), 1e-9)

    trace = lz.generate_trace(jeffreys, 100_000, 78, cps)
    assert trace.symbols == x and len(trace) == len(x)
    close(trace.log_loss[-1][1], curve[-1][1], 1e-9)
    assert len(trace.node_ids) == len(x)
    theta = trace.theta(trace.node_ids[-1])
    close(sum(theta), 1.0, 1e-12)
    (m,) = trace.box_measure(["box(0:0..0.5)"], [len(x)])
    assert 0.0 <= m[-1][1] <= 1.0
    assert 0.0 <= trace.event_measure("event(0,1|box(),box())", [len(x)])[-1][1] <= 1.0

    mu = lz.mu_k(x, 5, 2, [len(x)])[-1][1]
    assert 0.0 <= mu <= 1.0
    cr = lz.compression_ratio(x, 2, [len(x)])[-1][1]
    stats = lz.phrase_stats(x, 2)
    t = stats["root_visits"]
    close(cr, t * math.log2(t) / len(x), 1e-12)
    assert sum(stats["phrase_lengths"]) + stats["partial_phrase_len"] == len(x)

    rep = lz.limits(jeffreys)
    close(rep["entropy_rate"], 0.557305, 1e-6)
    close(lz.relative_entropy_limit(jeffreys, "iid(0.5,0.5)"), 0.442695, 1e-6)
    assert lz.relative_entropy_limit(jeffreys, "iid(1,0)") == math.inf
    assert lz.markov_law_score("iid(0.5,0.5)", x, [len(x)])[-1][1] == 1.0

    ctw = lz.CtwModel(3)
    total = sum(ctw.update(s) for s in x[:2000])
    close(total * math.log(2), ctw.ln_weighted_probability(), 1e-9)
    close(sum(ctw.predict()), 1.0, 1e-12)
    close(lz.spa_log_loss("ctw(3)", 2, x[:2000], [2000])[-1][1], -total / 2000, 1e-9)

    spa = lz.Lz78Spa(jeffreys)
    total = sum(spa.update(s) for s in x[:5000])
    close(-total / 5000, lz.score(jeffreys, x[:5000], [5000])[-1][1], 1e-9)
    assert spa.phrases() > 0

    try:
        lz.Prior("dirichlet(0.5)x")
    except ValueError:
        pass
    else:
        raise AssertionError("bad descriptor accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
