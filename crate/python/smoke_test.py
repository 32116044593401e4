"""Smoke test for the lcmsync_py extension.

Build and install first:
    cd crates/python && maturin build --release -o dist && pip install dist/*.whl
"""

import json

import lcmsync_py as m


def main():
    assert "greedy-lemma" in m.builtin_names()

    # halt never moves anyone
    sc = m.Scenario([(0.0, 0.0), (0.5, 0.0), (3.0, 1.0)])
    tr = m.simulate(sc, m.Schedule.fsync(5, 3), "halt", seed=1)
    for start, fp in zip(sc.positions, tr.footprints()):
        assert all(p == start for p in fp)
    report = tr.check()
    assert report["schema"] == 1
    assert report["stationary"]["status"] == "pass"

    # greedy counterexample
    r = m.repro("greedy-lemma")
    assert r["pass"], r
    assert [(c["robot"], c["j"]) for c in r["witness"]["cycles"]] == [(0, 1), (3, 1)]
    x0, y0 = m.simulate_builtin("greedy-lemma").position_at(0, 1.5)
    x3, y3 = m.simulate_builtin("greedy-lemma").position_at(3, 1.5)
    assert abs((x0 - x3) ** 2 + (y0 - y3) ** 2 - 25 / 16) < 1e-9
    assert m.repro("colorbased-theorem", machine="greedy")["j0"] == 1

    # synchronizer on a vicinity scenario
    sc, lam = m.Scenario.random_vicinity(4)
    sched = m.Schedule.random_async(4, sc.num_robots, 60.0)
    lum = m.simulate(sc, sched, f"hull:{lam}", seed=4, machine="svp")
    assert lum.is_luminous
    assert min(lum.acceptance_counts()) >= 1
    core = lum.core()
    plan, replay, similar = m.synthesize(core)
    assert similar
    assert replay.num_cycles == core.num_cycles
    assert m.candidate_search(core)["verdict"] == "similar_ssync_found"

    # round trip through JSON re-verifies the trace
    again = m.Trace.from_json(core.to_json())
    assert again.to_json() == core.to_json()

    # the consistency template cannot be serialized
    bad = m.simulate_builtin("consistency", seed=3)
    assert m.synthesize(bad) is None
    assert m.candidate_search(bad)["verdict"] == "none_among_candidates"

    n = m.necessity("stationarity", list(range(50)), 10_000)
    assert n["found_when_materialized"] == 0

    assert m.svp_step("Bk", ["R"]) == ("W", False)
    assert m.svp_step("G", ["R"]) == ("G", False)
    try:
        m.Scenario([(0.0, 0.0), (1.0, 0.0)])
    except ValueError:
        pass
    else:
        raise AssertionError("unit distance must be rejected")

    print(json.dumps({"ok": True, "vicinity_robots": sc.num_robots, "core_cycles": core.num_cycles}))


if __name__ == "__main__":
    main()
