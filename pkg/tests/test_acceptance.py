"""Acceptance criteria, one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as
the criteria complete.  The two branch-replication criteria continue to
film rupture at N = 64 and dominate the runtime.
"""

import time

import numpy as np
import pytest

from thinfilm import continuation as ct
from thinfilm import evolve as ev
from thinfilm import field as fld
from thinfilm import lattice as lt
from thinfilm import linstab as ls
from thinfilm import localbif as lb
from thinfilm import stationary as st
from conftest import random_symmetric_field, small_branch_state


def _report(number, name, detail=""):
    print(f"\nACCEPTANCE {number} PASS  {name}" + (f"  [{detail}]" if detail else ""))


# -- shared expensive runs -----------------------------------------------------


@pytest.fixture(scope="module")
def square_replication():
    """Square patterns on the two-periods-per-dimension cell (g=1, k0=1/2)."""
    t0 = time.time()
    lat = lt.make_lattice("square", 0.5, 64)
    detected = ct.scan_trivial_branch(lat, 1.0, 7.9, 8.1, 0.03)
    info = lb.locate_bifurcation(lat, 1.0, 2)
    cfg = ct.ContinuationConfig(ds=0.01, max_steps=900, spectrum_stride=1)
    seed = ct.seed_branch(info, +1, cfg)
    branch = ct.Branch(origin=info, direction=+1, g=1.0, points=[seed], config=cfg)
    branch = ct.extend_branch(branch, cfg)
    return {"branch": branch, "detected": detected, "elapsed": time.time() - t0,
            "lat": lat, "info": info, "config": cfg}


@pytest.fixture(scope="module")
def hexagon_replication():
    """Up- and down-hexagon branches at g = 1, k0 = 1."""
    t0 = time.time()
    lat = lt.make_lattice("hexagon", 1.0, 64)
    detected = ct.scan_trivial_branch(lat, 1.0, 7.9, 8.1, 0.03)
    info = lb.locate_bifurcation(lat, 1.0, 1)
    cfg = ct.ContinuationConfig(ds=0.01, max_steps=900, spectrum_stride=1)
    branches = {}
    for d in (+1, -1):
        seed = ct.seed_branch(info, d, cfg)
        branch = ct.Branch(origin=info, direction=d, g=1.0, points=[seed], config=cfg)
        branches[d] = ct.extend_branch(branch, cfg)
    return {"branches": branches, "detected": detected,
            "elapsed": time.time() - t0, "lat": lat, "info": info, "config": cfg}


@pytest.fixture(scope="module")
def onset_states():
    return {
        "square": small_branch_state("square", +1, 8),
        "up": small_branch_state("hexagon", +1, 8),
        "down": small_branch_state("hexagon", -1, 8),
    }


# -- criterion 1 ----------------------------------------------------------------


def test_criterion_1_dispersion_exactness():
    t0 = time.time()
    rng = np.random.default_rng(1)
    n = 0
    for _ in range(1000):
        k = rng.uniform(0, 3, size=2)
        M = rng.uniform(0, 16)
        g = rng.uniform(0.2, 4)
        ksq = k @ k
        expect = -(ksq ** 2) - (g - M / 4) * ksq
        assert abs(ls.dispersion(k, M, g) - expect) <= 1e-12
        n += 1
    # root structure at M* = 4g and M*(k0) = 4g + 4 k0^2
    for g in (0.5, 1.0, 2.0):
        ks = np.linspace(1e-4, 2.5, 400)
        below = np.array([ls.dispersion(k, 4 * g, g) for k in ks])
        assert np.all(below < 0)
        assert ls.dispersion(0.0, 4 * g, g) == 0.0
        for k0 in (0.5, 1.0):
            vals = np.array([ls.dispersion(k, 4 * g + 4 * k0 ** 2, g) for k in ks])
            assert np.all(vals[ks < k0 - 1e-9] > 0)
            assert np.all(vals[ks > k0 + 1e-9] < 0)
    elapsed = time.time() - t0
    assert elapsed < 1.0
    _report(1, "dispersion exactness", f"{n} samples, {elapsed:.2f} s")


# -- criterion 2 ----------------------------------------------------------------


def test_criterion_2_closed_form_expansions():
    t0 = time.time()
    worst = 0.0
    for kind in ("square", "hexagon"):
        for g in (0.5, 1.0, 2.0):
            for k0 in (0.5, 1.0, 2.0):
                lat = lt.make_lattice(kind, k0, 64)
                num = lb.expansion_coefficients(lat, g, 1)
                ref = lb.closed_form_coefficients(kind, g, k0)
                a, b = (num[1], ref[1]) if kind == "square" else (num[0], ref[0])
                rel = abs(a - b) / abs(b)
                worst = max(worst, rel)
                assert rel <= 1e-6
    mddot = lb.closed_form_coefficients("square", 1.0, 1.0)[1]
    mdot = lb.closed_form_coefficients("hexagon", 1.0, 1.0)[0]
    assert mddot == pytest.approx(-614.0 / (72.0 * np.pi ** 2), rel=1e-12)
    assert mdot == pytest.approx(4.0 / (3.0 ** 0.75 * np.pi), rel=1e-12)
    elapsed = time.time() - t0
    assert elapsed < 30.0
    _report(
        2, "closed-form expansion match",
        f"max rel err {worst:.2e}; Mddot0(sq,1,1)={mddot:+.6f}, "
        f"Mdot0(hex,1,1)={mdot:+.6f}; {elapsed:.1f} s",
    )


# -- criterion 3 ----------------------------------------------------------------


def test_criterion_3_jacobian_correctness():
    t0 = time.time()
    worst = 0.0
    count = 0
    for kind in ("square", "hexagon"):
        for seed in range(10):
            rng = np.random.default_rng(100 + seed)
            lat = lt.make_lattice(kind, 1.0, 32)
            v = random_symmetric_field(lat, rng, amplitude=1.0)
            v = v * (0.3 / np.abs(fld.synthesize(v, 2)).max())
            w = random_symmetric_field(lat, rng, amplitude=0.7)
            M, g = float(rng.uniform(4, 10)), float(rng.uniform(0.5, 2))
            eps = 1e-6
            fd = (
                st.residual(v + w * eps, M, g).coeffs
                - st.residual(v - w * eps, M, g).coeffs
            ) / (2 * eps)
            lin = st.jacobian_apply(v, M, g, w).coeffs
            rel = np.abs(lin - fd).max() / np.abs(fd).max()
            worst = max(worst, rel)
            count += 1
            assert rel <= 1e-6
    elapsed = time.time() - t0
    assert count == 20
    assert elapsed < 10.0
    _report(3, "jacobian correctness", f"20 states, max rel err {worst:.2e}, {elapsed:.1f} s")


# -- criterion 4 ----------------------------------------------------------------


def test_criterion_4_square_replication(square_replication):
    run = square_replication
    branch = run["branch"]
    # bifurcation detected at M = 8 +- 1e-3 on the trivial branch
    assert run["detected"], "no trivial-branch candidate found"
    m_detected = min(run["detected"], key=lambda e: abs(e["M"] - 8.0))["M"]
    assert abs(m_detected - 8.0) <= 1e-3
    # subcritical: strictly below 8 from the first accepted point on
    ms = np.array([p.state.M for p in branch.points])
    assert np.all(ms < 8.0)
    assert ms.max() < 8.0
    # termination at the rupture guard, deep enough
    assert branch.termination == ct.Termination.RUPTURE_GUARD
    final_min = branch.points[-1].diagnostics.min_v
    assert final_min <= -0.98
    # nodal property at every accepted point (pattern wave number 2*k0 = 1)
    for p in branch.points:
        assert ct.nodal_check(p.state.v, 1.0).all_ok()
    assert run["elapsed"] < 600.0
    _report(
        4, "square replication (two periods per cell)",
        f"onset {m_detected:.6f}, {len(branch.points)} points, "
        f"min v {final_min:.4f}, sup M {ms.max():.6f}, {run['elapsed']:.0f} s",
    )


# -- criterion 5 ----------------------------------------------------------------


def test_criterion_5_hexagon_replication(hexagon_replication):
    run = hexagon_replication
    m_detected = min(run["detected"], key=lambda e: abs(e["M"] - 8.0))["M"]
    assert abs(m_detected - 8.0) <= 1e-3
    up, down = run["branches"][+1], run["branches"][-1]
    # transcritical split
    assert up.points[0].state.M > 8.0
    assert down.points[0].state.M < 8.0
    # exactly one fold on the up branch, none on the down branch
    up_folds = [e for e in up.events if e["type"] == "fold"]
    down_folds = [e for e in down.events if e["type"] == "fold"]
    assert len(up_folds) == 1
    assert len(down_folds) == 0
    # both reach rupture
    for branch, floor in ((up, -0.97), (down, -0.97)):
        assert branch.termination == ct.Termination.RUPTURE_GUARD
        assert branch.points[-1].diagnostics.min_v <= floor
    sup_up = max(p.state.M for p in up.points)
    sup_down = max(p.state.M for p in down.points)
    assert np.isfinite(sup_up) and np.isfinite(sup_down)
    assert sup_up < 2 * 8.0 and sup_down < 2 * 8.0
    assert run["elapsed"] < 900.0
    _report(
        5, "hexagon replication (up/down)",
        f"onset {m_detected:.6f}, fold at M={up_folds[0]['M']:.4f}, "
        f"min v up {up.points[-1].diagnostics.min_v:.4f} / "
        f"down {down.points[-1].diagnostics.min_v:.4f}, "
        f"sup M {sup_up:.4f}/{sup_down:.4f}, {run['elapsed']:.0f} s",
    )


# -- criterion 6 ----------------------------------------------------------------


def test_criterion_6_stability_signs(onset_states):
    t0 = time.time()
    expect_co = {"square": 1, "up": 0, "down": 1}
    tol = ls.STABILITY_TOL
    for name, state in onset_states.items():
        co = ls.evolution_linearization_spectrum(state, 1.0, ls.COPERIODIC, True)
        assert np.abs(co.eigenvalues).max() > 10 * tol
        assert co.n_unstable == expect_co[name], name
        sup = ls.evolution_linearization_spectrum(
            state, 1.0, ls.PerturbationClass("superharmonic", 2), True
        )
        assert sup.n_unstable == 0, name
        sub = ls.evolution_linearization_spectrum(
            state, 1.0, ls.PerturbationClass("subharmonic", 2), True
        )
        assert sub.n_unstable >= 1, name
    elapsed = time.time() - t0
    assert elapsed < 300.0
    _report(6, "stability signs near onset",
            f"co-periodic 1/0/1, superharmonic 0, subharmonic >=1; {elapsed:.1f} s")


# -- criterion 7 ----------------------------------------------------------------


def test_criterion_7_evolution_cross_checks(onset_states):
    t0 = time.time()
    # mass conservation over 1e3 steps
    lat = lt.make_lattice("square", 1.0, 16)
    rng = np.random.default_rng(7)
    v0 = random_symmetric_field(lat, rng, amplitude=1.0, mean_zero=False)
    v0 = v0 * (0.2 / np.abs(fld.synthesize(v0, 2)).max())
    state = ev.EvolutionState(v0, 0.0, st.ProblemParams(1.0, 8.5), 1e-4)
    m0 = state.v.mean()
    for _ in range(1000):
        state = ev.step(state)
    drift = abs(state.v.mean() - m0)
    assert drift <= 1e-10

    # flat-state growth at the dispersion rate
    xi = fld.from_orbit(lat, (1, 0), 1e-6)
    gstate = ev.EvolutionState(xi, 0.0, st.ProblemParams(1.0, 8.5), 1e-3)
    oid = lat.orbit_table[1, 0]
    for _ in range(2000):
        gstate = ev.step(gstate)
    rate = np.log(gstate.v.coeffs[oid] / 1e-6) / gstate.t
    lam = ls.dispersion(1.0, 8.5, 1.0)
    assert abs(rate - lam) / lam < 0.01

    # stationary states of the reduced problem are stationary for the flow
    for state0 in onset_states.values():
        assert fld.norm_L2(ev.rhs(state0.v, state0.M, 1.0)) <= 1e-6

    # nonlinear confirmation of the co-periodic sign table
    expected = {"square": "grows", "up": "decays", "down": "grows"}
    for name, state0 in onset_states.items():
        verdict = ev.classify_nonlinear_stability(state0, 1.0, T=400.0, dt=5e-3)
        assert verdict == expected[name], name
    elapsed = time.time() - t0
    assert elapsed < 300.0
    _report(
        7, "evolution cross-checks",
        f"mass drift {drift:.1e}, growth err {abs(rate - lam) / lam:.2e}, "
        f"signs grows/decays/grows; {elapsed:.0f} s",
    )


# -- criterion 8 (soft) -----------------------------------------------------------


def test_criterion_8_secondary_bifurcation(square_replication):
    branch = square_replication["branch"]
    cfg = square_replication["config"]
    candidates = [e for e in branch.events if e["type"] == "bifurcation_candidate"]
    diagnostic = {"candidates": [round(e["M"], 6) for e in candidates]}
    try:
        assert candidates, "no admissible bifurcation candidate detected"
        switched = None
        for cand in candidates:
            try:
                switched = ct.branch_switch(branch, cand, cfg)
            except ct.InadmissibleKernel:
                continue
            switched = ct.extend_branch(switched, cfg)
            break
        assert switched is not None, "no candidate admitted a switched branch"
        cls = ct.classify_switched_period(branch, switched)
        diagnostic.update(cls)
        diagnostic["switched_min_v"] = switched.points[-1].diagnostics.min_v
        assert cls["label"] == "period_doubled"
        assert switched.points[-1].diagnostics.min_v <= -0.95
    except AssertionError as err:
        print(f"\nACCEPTANCE 8 SOFT-FAIL  secondary bifurcation: {err}")
        print(f"  diagnostic report: {diagnostic}")
        return
    _report(
        8, "secondary bifurcation (soft)",
        f"candidates {diagnostic['candidates']}, "
        f"off-sublattice energy {diagnostic['off_sublattice_energy_fraction']:.2f}, "
        f"switched min v {diagnostic['switched_min_v']:.4f}",
    )


# -- criterion 9 ----------------------------------------------------------------


def test_criterion_9_property_suites(square_replication, tmp_path):
    t0 = time.time()
    rng = np.random.default_rng(9)
    for kind in ("square", "hexagon"):
        lat = lt.make_lattice(kind, 1.0, 32)
        # field round trip
        f = random_symmetric_field(lat, rng, amplitude=1.0, mean_zero=False)
        back = fld.analyze(fld.synthesize(f), lat)
        assert np.abs(back.coeffs - f.coeffs).max() < 1e-12
        # Parseval
        grid = fld.synthesize(f)
        assert fld.inner_product_L2(f, f) == pytest.approx(
            lat.cell_area * np.mean(grid ** 2), rel=1e-10
        )
        # orbit closure
        for pair in [(1, 0), (2, 1), (3, -2)]:
            orbit = lt.symmetry_orbit(lat, pair)
            assert all(lt.symmetry_orbit(lat, q) == orbit for q in orbit)
        # residual mean-zero and jacobian self-adjointness
        v = random_symmetric_field(lat, rng, amplitude=1.0)
        v = v * (0.25 / np.abs(fld.synthesize(v, 2)).max())
        assert st.residual(v, 7.0, 1.0).coeffs[lat.mean_orbit] == 0.0
        w1 = random_symmetric_field(lat, rng)
        w2 = random_symmetric_field(lat, rng)
        a = fld.inner_product_L2(st.jacobian_apply(v, 7.0, 1.0, w1), w2)
        b = fld.inner_product_L2(w1, st.jacobian_apply(v, 7.0, 1.0, w2))
        assert abs(a - b) <= 1e-9 * max(1.0, abs(a))

    # tangent continuity along the replication branch
    branch = square_replication["branch"]
    W = branch.points[0].state.v.lat.l2_weights
    for p, q in zip(branch.points, branch.points[1:]):
        assert p.tangent_v @ (W * q.tangent_v) + p.tangent_m * q.tangent_m > 0

    # CSV determinism
    a_path, b_path = tmp_path / "a.csv", tmp_path / "b.csv"
    ct.write_branch_csv(branch, a_path)
    ct.write_branch_csv(branch, b_path)
    assert a_path.read_bytes() == b_path.read_bytes()
    elapsed = time.time() - t0
    assert elapsed < 30.0
    _report(9, "property suites", f"{elapsed:.1f} s")
