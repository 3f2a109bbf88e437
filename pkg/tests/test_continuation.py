import numpy as np
import pytest

from thinfilm import continuation as ct
from thinfilm import field as fld
from thinfilm import lattice as lt
from thinfilm import localbif as lb
from thinfilm import stationary as st


@pytest.fixture(scope="module")
def square_branch():
    lat = lt.make_lattice("square", 1.0, 32)
    info = lb.locate_bifurcation(lat, 1.0, 1)
    cfg = ct.ContinuationConfig(ds=0.02, max_steps=25, spectrum_stride=5)
    seed = ct.seed_branch(info, +1, cfg)
    branch = ct.Branch(origin=info, direction=+1, g=1.0, points=[seed], config=cfg)
    return ct.extend_branch(branch, cfg)


def test_trivial_scan_finds_onset():
    lat = lt.make_lattice("square", 0.5, 32)
    events = ct.scan_trivial_branch(lat, 1.0, 7.9, 8.1, 0.03)
    assert len(events) == 1
    assert abs(events[0]["M"] - 8.0) <= 1e-3


def test_seed_directions():
    sq = lt.make_lattice("square", 0.5, 32)
    info = lb.locate_bifurcation(sq, 1.0, 2)
    cfg = ct.ContinuationConfig()
    seed = ct.seed_branch(info, +1, cfg)
    assert seed.state.M < 8.0  # subcritical side

    hx = lt.make_lattice("hexagon", 1.0, 32)
    infoh = lb.locate_bifurcation(hx, 1.0, 1)
    up = ct.seed_branch(infoh, +1, cfg)
    down = ct.seed_branch(infoh, -1, cfg)
    assert up.state.M > 8.0
    assert down.state.M < 8.0


def test_branch_invariants(square_branch):
    branch = square_branch
    lat = branch.points[0].state.v.lat
    W = lat.l2_weights
    # arclength gaps in (0, ds_max]
    gaps = np.diff([p.s for p in branch.points])
    assert np.all(gaps > 0)
    assert np.all(gaps <= branch.config.ds_max + 1e-12)
    # tangent continuity
    for a, b in zip(branch.points, branch.points[1:]):
        dot = a.tangent_v @ (W * b.tangent_v) + a.tangent_m * b.tangent_m
        assert dot > 0
    # every point converged, mean-zero, admissible
    for p in branch.points[::4]:
        assert fld.norm_L2(st.residual(p.state.v, p.state.M, 1.0)) <= branch.config.newton_tol * 10
        assert p.state.v.mean() == 0.0
        assert p.diagnostics.min_v > -1.0
        assert p.state.lambda_k == pytest.approx(
            p.state.M * st.constraint_K(p.state.v), abs=1e-8
        )


def test_diagnostics_recompute(square_branch):
    p = square_branch.points[10]
    fresh = ct.compute_diagnostics(p.state, 1.0, with_spectrum=False)
    for name in ("min_v", "max_v", "l2_norm", "x_norm", "k_value", "log_l2"):
        assert getattr(fresh, name) == pytest.approx(getattr(p.diagnostics, name), abs=1e-10)


def test_resolve_from_stored_point(square_branch):
    p = square_branch.points[12]
    again = st.newton_solve(p.state.v, p.state.M, 1.0)
    assert np.abs(again.v.coeffs - p.state.v.coeffs).max() <= 1e-8


def test_subcritical_square(square_branch):
    ms = [p.state.M for p in square_branch.points]
    assert all(m < 8.0 for m in ms[0:])
    assert ms[-1] < ms[2]


def test_nodal_check_basics():
    lat = lt.make_lattice("square", 1.0, 32)
    khat = lb.kernel_element(lat, 1)
    up = ct.nodal_check((khat * 0.05), 1.0)
    assert up.all_ok()
    down = ct.nodal_check((khat * -0.05), 1.0)
    assert not down.max_at_origin
    flat = ct.nodal_check(fld.zeros(lat), 1.0)
    assert flat.all_ok()  # degenerate: everything within tolerance

    hx = lt.make_lattice("hexagon", 1.0, 32)
    psi = lb.kernel_element(hx, 1)
    assert ct.nodal_check(psi * 0.05, 1.0).all_ok()
    assert not ct.nodal_check(psi * -0.05, 1.0).max_at_origin


def test_nodal_along_branch(square_branch):
    for p in square_branch.points[::5]:
        assert ct.nodal_check(p.state.v, 1.0).all_ok()


def test_regularity_ratio_bounded(square_branch):
    lat = square_branch.points[0].state.v.lat
    bound = st.regularity_constant(lat, 1.0)
    ratios = ct.branch_regularity_ratios(square_branch)
    assert np.all(ratios <= bound)


def test_switch_at_trivial_event_matches_seed():
    lat = lt.make_lattice("square", 1.0, 32)
    events = ct.scan_trivial_branch(lat, 1.0, 7.9, 8.1, 0.03)
    info = lb.locate_bifurcation(lat, 1.0, 1)
    cfg = ct.ContinuationConfig()
    trivial = ct.Branch(origin=info, direction=+1, g=1.0, points=[], config=cfg)
    switched = ct.branch_switch(trivial, events[0], cfg)
    direct = ct.seed_branch(info, switched.direction, cfg)
    assert switched.points[0].state.M == pytest.approx(direct.state.M, abs=1e-8)
    dv = switched.points[0].state.v - direct.state.v
    assert fld.norm_L2(dv) < 1e-7


def test_switch_requires_candidate_event(square_branch):
    with pytest.raises(ValueError):
        ct.branch_switch(square_branch, {"type": "fold", "M": 7.0})


def test_detect_events_post_pass(square_branch):
    again = ct.detect_events(square_branch)
    folds = [e for e in again.events if e["type"] == "fold"]
    assert folds == []  # subcritical branch this short has no fold


def test_csv_json_round_trip(tmp_path, square_branch):
    csv_path = tmp_path / "branch.csv"
    ct.write_branch_csv(square_branch, csv_path)
    data = ct.read_branch_csv(csv_path)
    assert len(data["s"]) == len(square_branch.points)
    assert data["M"][3] == pytest.approx(square_branch.points[3].state.M, rel=1e-12)
    assert data["n_unstable"][0] == square_branch.points[0].diagnostics.n_unstable

    json_path = tmp_path / "branch.json"
    ct.write_branch_json(square_branch, json_path)
    import json

    blob = json.loads(json_path.read_text())
    assert blob["termination"] == square_branch.termination.value
    assert blob["n_points"] == len(square_branch.points)
    assert blob["config_hash"] == square_branch.config.hash()

    # byte determinism of repeated writes
    second = tmp_path / "branch2.csv"
    ct.write_branch_csv(square_branch, second)
    assert second.read_bytes() == csv_path.read_bytes()


def test_snapshot_stride(tmp_path, square_branch):
    files = ct.write_branch_snapshots(square_branch, tmp_path, stride=10)
    names = sorted(f.split("/")[-1] for f in files)
    n = len(square_branch.points)
    assert f"point_{n - 1:04d}.snap" in names
    v, header = fld.read_snapshot(files[0])
    assert header["g"] == 1.0
