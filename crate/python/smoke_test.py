"""Smoke test for the tfg_slam_py extension.

Build and install first, e.g. `maturin develop -m crates/python/Cargo.toml`
or `pip install crates/python`, then run `python python/smoke_test.py`.
"""

import math
import pathlib

import tfg_slam_py as ts

ROOT = pathlib.Path(__file__).resolve().parent.parent


def check_pose():
    a = ts.Pose2(1.0, 2.0, 0.5)
    b = ts.Pose2(-0.5, 0.3, -1.2)
    ab = a.compose(b)
    back = a.between(ab)
    assert all(math.isclose(u, v, abs_tol=1e-12) for u, v in zip(back.to_tuple(), b.to_tuple()))
    ident = a.compose(a.inverse())
    assert max(abs(v) for v in ident.to_tuple()) < 1e-12


def check_graph():
    truth = [ts.Pose2(0.0, 0.0, 0.0), ts.Pose2(1.0, 0.0, 0.3)]
    landmarks = {0: (2.0, 1.0), 1: (2.0, -1.0), 2: (3.0, 0.5)}
    g = ts.FactorGraph()
    for i, x in enumerate(truth):
        g.add_pose(i, ts.Pose2(x.x + 0.05, x.y - 0.05, x.theta))
    g.add_pose_prior(0, truth[0], 0.01)
    g.add_odometry(0, 1, truth[0].between(truth[1]), 0.05)
    for lid, (lx, ly) in landmarks.items():
        g.add_landmark(lid, lx + 0.2, ly - 0.1)
        for i, x in enumerate(truth):
            zx, zy = x.point_in_frame(lx, ly)
            g.add_measurement(i, lid, zx, zy, 0.05)
    g.solve()
    for lid, (lx, ly) in landmarks.items():
        ex, ey = g.landmark(lid)
        assert math.hypot(ex - lx, ey - ly) < 1e-6, (lid, ex, ey)
    h = g.landmark_entropy()
    assert math.isfinite(h)

    again = ts.FactorGraph.load(g.dump())
    assert again.landmark_ids() == [0, 1, 2]

    tfg = ts.TopologicalFeatureGraph.from_graph(g, [(0, 1)])
    assert tfg.has_edge(1, 0)
    tfg.learn_edges([(0, 1), (0, 2)])
    assert tfg.edges() == [(0, 1), (1, 2)]
    fr = tfg.frontiers(ts.Pose2(1.0, 0.0, 0.0), 10.0)
    assert all(f["arc_length"] >= 0.0 for f in fr)
    dh_o, dh_u = ts.delta_h(tfg, ts.Pose2(1.5, 0.0, 0.0), 4.0, 0.05, 4.0, 1.0)
    assert dh_o >= 0.0 and dh_u >= 0.0
    p = tfg.collision_chance(1.5, 0.0, [[0.01, 0.0], [0.0, 0.01]], 0.2)
    assert 0.0 <= p <= 1.0
    assert ts.TopologicalFeatureGraph.load(tfg.dump()).edges() == tfg.edges()


def check_harness():
    rows = ts.infomap(str(ROOT / "scenarios" / "infomap_demo.toml"), 0.5, "high")
    best = max((r for r in rows if r[5]), key=lambda r: r[4])
    assert abs(best[0] - 8.0) <= 4.0, best
    log = ts.run(str(ROOT / "scenarios" / "room.toml"), 1, "nearest_frontier")
    assert log.startswith("# run log") and "STAGE 0 " in log


if __name__ == "__main__":
    check_pose()
    check_graph()
    check_harness()
    print("smoke test passed")
