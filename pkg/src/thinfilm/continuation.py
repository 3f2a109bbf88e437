"""Pseudo-arclength continuation of stationary pattern branches.

Branches are parametrised by arclength in the metric
``||dv||_L2^2 + |dM|^2`` and advanced by a tangent predictor followed by
a bordered Newton corrector whose unknowns are the orbit coefficients,
the mass multiplier, and M.  Each accepted point carries diagnostics
(extrema, norms, the constraint value, the L2 norm of log(1+v), the
number of unstable co-periodic eigenvalues) and event flags.

Event detection:

* Fold: sign change of the M component of consecutive unit tangents,
  refined by bisection on re-solved intermediate points.
* BifurcationCandidate: sign change of the smallest-magnitude eigenvalue
  of the Jacobian on the symmetric mean-zero subspace, excluding fold
  crossings, refined the same way; the critical eigenvector is stored
  for branch switching.
* RuptureStop: min(1+v) reached the rupture guard.  Continuation also
  terminates as a rupture when step halving is exhausted deep in the
  rupture regime, since the vector field degenerates at v = -1 and no
  admissible corrector exists past the guard.

Branches write a CSV (one row per accepted point), a JSON sidecar with
provenance and events, and optional field snapshots.  All outputs are
byte-deterministic for a fixed configuration.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field as dc_field, asdict
from enum import Enum

import numpy as np
import scipy.linalg

from . import field as fld
from . import linstab
from .field import SymmetricField
from .lattice import LatticeKind, LatticeSpec
from .localbif import BifurcationPointInfo
from .stationary import (
    DomainViolation,
    NoConvergence,
    StationaryState,
    bordered_newton,
    constraint_K,
    jacobian_core_matrix,
    regularity_ratio,
)

__all__ = [
    "ContinuationConfig",
    "BranchPoint",
    "Branch",
    "Termination",
    "InadmissibleKernel",
    "NodalReport",
    "seed_branch",
    "extend_branch",
    "detect_events",
    "branch_switch",
    "nodal_check",
    "scan_trivial_branch",
    "classify_switched_period",
    "write_branch_csv",
    "write_branch_json",
    "read_branch_csv",
]


class Termination(str, Enum):
    RUPTURE_GUARD = "RuptureGuard"
    MAX_STEPS = "MaxSteps"
    NO_CONVERGENCE = "NoConvergence"
    USER_STOP = "UserStop"


class InadmissibleKernel(RuntimeError):
    """No symmetric critical direction yields an admissible switched branch."""


@dataclass
class ContinuationConfig:
    ds: float = 0.01
    ds_trivial: float = 0.03
    ds_min: float = 1e-7
    ds_max: float | None = None  # defaults to ds
    max_steps: int = 500
    s0: float = 0.01
    newton_tol: float = 1e-10
    newton_max_iter: int = 25
    guard: float = 1e-3                # admissibility guard for iterates
    rupture_stop: float = 1e-2         # stop once min_v <= -1 + rupture_stop
    rupture_classify: float = 0.1      # exhaustion counts as rupture if min_v <= -1 + this
    grow_factor: float = 1.4
    spectrum_stride: int = 1           # co-periodic n_unstable every k-th point
    refine_iters: int = 12
    max_arclength: float | None = None

    def __post_init__(self):
        if self.ds_max is None:
            self.ds_max = self.ds

    def hash(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


@dataclass
class Diagnostics:
    min_v: float
    max_v: float
    l2_norm: float
    x_norm: float
    k_value: float
    log_l2: float
    n_unstable: int | None


@dataclass
class BranchPoint:
    state: StationaryState
    s: float
    tangent_v: np.ndarray
    tangent_m: float
    diagnostics: Diagnostics
    jac_min_eig: float
    events: list = dc_field(default_factory=list)


@dataclass
class Branch:
    origin: BifurcationPointInfo
    direction: int
    g: float
    points: list
    termination: Termination | None = None
    events: list = dc_field(default_factory=list)
    config: ContinuationConfig | None = None


# -- diagnostics --------------------------------------------------------------

def _metric_weights(lat: LatticeSpec) -> np.ndarray:
    return lat.l2_weights


def compute_diagnostics(state: StationaryState, g: float, with_spectrum: bool = True) -> Diagnostics:
    v = state.v
    grid = fld.synthesize(v, 2)
    cell = v.lat.cell_area
    n_unstable = None
    if with_spectrum:
        rep = linstab.evolution_linearization_spectrum(state, g, linstab.COPERIODIC, True)
        n_unstable = rep.n_unstable
    return Diagnostics(
        min_v=float(grid.min()),
        max_v=float(grid.max()),
        l2_norm=fld.norm_L2(v),
        x_norm=fld.norm_X(v),
        k_value=constraint_K(v),
        log_l2=float(np.sqrt(cell * np.mean(np.log(1.0 + grid) ** 2))),
        n_unstable=n_unstable,
    )


def _jacobian_min_eig(state: StationaryState, g: float) -> tuple[float, np.ndarray]:
    """Smallest-magnitude eigenvalue (signed) of the mean-zero Jacobian.

    Also returns the corresponding eigenvector as full orbit coefficients
    (zero mean), for branch switching.
    """
    lat = state.v.lat
    A = jacobian_core_matrix(state.v, state.M, g)[1:, 1:]
    w = np.sqrt(lat.l2_weights[1:])
    sym = A * (w[:, None] / w[None, :])
    sym = 0.5 * (sym + sym.T)
    eigval, eigvec = scipy.linalg.eigh(sym)
    i = int(np.argmin(np.abs(eigval)))
    coeffs = np.zeros(lat.n_orbits)
    coeffs[1:] = eigvec[:, i] / w
    return float(eigval[i]), coeffs


# -- tangents ------------------------------------------------------------------

def _tangent(state: StationaryState, g: float, prev_v: np.ndarray, prev_m: float):
    """Unit tangent of the solution curve, oriented along the previous one."""
    lat = state.v.lat
    n = lat.n_orbits
    J = jacobian_core_matrix(state.v, state.M, g)
    nl = _nl_coeffs(state.v)
    e0 = np.zeros(n)
    e0[lat.mean_orbit] = 1.0
    W = _metric_weights(lat)

    mat = np.zeros((n + 2, n + 2))
    mat[:n, :n] = J
    mat[:n, n] = -e0
    mat[:n, n + 1] = nl
    mat[n, :n] = e0
    mat[n + 1, :n] = W * prev_v
    mat[n + 1, n + 1] = prev_m
    rhs = np.zeros(n + 2)
    rhs[n + 1] = 1.0
    try:
        t = np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError as err:
        raise NoConvergence(f"singular tangent system: {err}") from err
    tv, tm = t[:n], t[n + 1]
    nrm = np.sqrt(tv @ (W * tv) + tm * tm)
    return tv / nrm, tm / nrm


def _nl_coeffs(v: SymmetricField) -> np.ndarray:
    from .stationary import _potential_coeffs

    return _potential_coeffs(v)


# -- seeding -------------------------------------------------------------------

def seed_branch(
    info: BifurcationPointInfo,
    direction: int,
    config: ContinuationConfig | None = None,
    s0: float | None = None,
) -> BranchPoint:
    """First nontrivial point, at kernel amplitude ``direction * s0``.

    The predictor follows the local expansion of the branch; the corrector
    solves with M free under the phase condition
    ``<v, kernel>_L2 = direction * s0 * <kernel, kernel>_L2``.
    """
    config = config or ContinuationConfig()
    s0 = config.s0 if s0 is None else s0
    if direction not in (+1, -1):
        raise ValueError("direction must be +1 or -1")
    lat = info.lat
    khat = info.kernel
    W = _metric_weights(lat)
    delta = direction * s0

    m_pred = info.M_crit + info.Mdot0 * delta
    if info.Mddot0 is not None:
        m_pred += 0.5 * info.Mddot0 * delta ** 2
    v_pred = khat * delta

    kk = khat.coeffs @ (W * khat.coeffs)

    def phase_row(a, M):
        value = khat.coeffs @ (W * a) - delta * kk
        return W * khat.coeffs, 0.0, value

    state, _ = bordered_newton(
        v_pred, m_pred, info.g,
        free_m=True, extra_row=phase_row,
        tol=config.newton_tol, max_iter=config.newton_max_iter, guard=config.guard,
    )
    tv, tm = _tangent(state, info.g, direction * khat.coeffs, 0.0)
    jmin, _ = _jacobian_min_eig(state, info.g)
    diag = compute_diagnostics(state, info.g, with_spectrum=True)
    return BranchPoint(state, s0, tv, tm, diag, jmin)


# -- stepping ------------------------------------------------------------------

def _arclength_step(point: BranchPoint, g: float, ds: float, config: ContinuationConfig):
    lat = point.state.v.lat
    W = _metric_weights(lat)
    a0 = point.state.v.coeffs
    m0 = point.state.M
    tv, tm = point.tangent_v, point.tangent_m

    def arc_row(a, M):
        value = tv @ (W * (a - a0)) + tm * (M - m0) - ds
        return W * tv, tm, value

    v_pred = SymmetricField(lat, a0 + ds * tv)
    m_pred = m0 + ds * tm
    state, _ = bordered_newton(
        v_pred, m_pred, g,
        free_m=True, extra_row=arc_row,
        tol=config.newton_tol, max_iter=config.newton_max_iter, guard=config.guard,
    )
    tv2, tm2 = _tangent(state, g, tv, tm)
    return state, tv2, tm2


def extend_branch(branch: Branch, config: ContinuationConfig | None = None) -> Branch:
    """Advance a seeded branch until rupture, exhaustion, or max steps."""
    config = config or branch.config or ContinuationConfig()
    branch.config = config
    g = branch.g
    if not branch.points:
        raise ValueError("branch must contain a seed point")

    ds = config.ds
    point = branch.points[-1]
    while len(branch.points) < config.max_steps:
        if config.max_arclength is not None and point.s >= config.max_arclength:
            branch.termination = Termination.USER_STOP
            break
        try:
            state, tv, tm = _arclength_step(point, g, ds, config)
        except (NoConvergence, DomainViolation):
            ds *= 0.5
            if ds >= config.ds_min:
                continue
            deep = point.diagnostics.min_v <= -1.0 + config.rupture_classify
            branch.termination = (
                Termination.RUPTURE_GUARD if deep else Termination.NO_CONVERGENCE
            )
            if deep:
                point.events.append("RuptureStop")
                branch.events.append(
                    {"type": "rupture_stop", "s": point.s, "M": point.state.M,
                     "min_v": point.diagnostics.min_v}
                )
            break

        spectrum = (len(branch.points) % config.spectrum_stride) == 0
        diag = compute_diagnostics(state, g, with_spectrum=spectrum)
        if diag.min_v < -1.0 + 0.5 * config.rupture_stop and ds > config.ds_min:
            # final bisection refinement: land the terminal point just past
            # the rupture threshold instead of deep inside the guard zone
            ds *= 0.5
            continue
        jmin, _ = _jacobian_min_eig(state, g)
        new = BranchPoint(state, point.s + ds, tv, tm, diag, jmin)
        _flag_events(branch, point, new, g, config)
        branch.points.append(new)
        point = new
        ds = min(ds * config.grow_factor, config.ds_max)

        if diag.min_v <= -1.0 + config.rupture_stop:
            point.events.append("RuptureStop")
            branch.events.append(
                {"type": "rupture_stop", "s": point.s, "M": state.M, "min_v": diag.min_v}
            )
            branch.termination = Termination.RUPTURE_GUARD
            break
    else:
        branch.termination = Termination.MAX_STEPS
    return branch


def _flag_events(branch, prev: BranchPoint, new: BranchPoint, g, config):
    fold = np.sign(prev.tangent_m) != np.sign(new.tangent_m) and prev.tangent_m != 0.0
    if fold:
        new.events.append("Fold")
        refined = _refine_fold(prev, g, new.s - prev.s, config)
        branch.events.append(
            {"type": "fold", "s_bracket": [prev.s, new.s], "M": refined}
        )
    if np.sign(prev.jac_min_eig) != np.sign(new.jac_min_eig) and not fold:
        new.events.append("BifurcationCandidate")
        ev = _refine_candidate(prev, g, new.s - prev.s, config)
        ev["s_bracket"] = [prev.s, new.s]
        branch.events.append(ev)


def _resolve_fraction(point: BranchPoint, g, ds_total, frac, config):
    return _arclength_step(point, g, frac * ds_total, config)


def _refine_fold(point: BranchPoint, g, ds_total, config) -> float:
    """Bisection on the tangent M component; returns the extremal M."""
    lo, hi = 0.0, 1.0
    sign0 = np.sign(point.tangent_m)
    m_best = point.state.M
    for _ in range(config.refine_iters):
        mid = 0.5 * (lo + hi)
        try:
            state, _, tm = _resolve_fraction(point, g, ds_total, mid, config)
        except (NoConvergence, DomainViolation):
            hi = mid
            continue
        m_best = state.M
        if np.sign(tm) == sign0:
            lo = mid
        else:
            hi = mid
    return float(m_best)


def _refine_candidate(point: BranchPoint, g, ds_total, config) -> dict:
    """Bisection on the smallest-magnitude Jacobian eigenvalue sign."""
    lo, hi = 0.0, 1.0
    sign0 = np.sign(point.jac_min_eig)
    best_state, best_vec = point.state, None
    for _ in range(config.refine_iters):
        mid = 0.5 * (lo + hi)
        try:
            state, _, _ = _resolve_fraction(point, g, ds_total, mid, config)
        except (NoConvergence, DomainViolation):
            hi = mid
            continue
        jmin, vec = _jacobian_min_eig(state, g)
        best_state, best_vec = state, vec
        if np.sign(jmin) == sign0:
            lo = mid
        else:
            hi = mid
    if best_vec is None:
        _, best_vec = _jacobian_min_eig(best_state, g)
    return {
        "type": "bifurcation_candidate",
        "M": float(best_state.M),
        "state": best_state,
        "eigvec": best_vec,
    }


def detect_events(branch: Branch, config: ContinuationConfig | None = None) -> Branch:
    """Post-pass event sweep over stored points (folds, candidates).

    Extension flags events online; this recomputes them from the stored
    tangents and eigenvalue track, for branches loaded or assembled by
    other means.
    """
    config = config or branch.config or ContinuationConfig()
    branch.events = [e for e in branch.events if e["type"] == "rupture_stop"]
    for prev, new in zip(branch.points, branch.points[1:]):
        new.events = [e for e in new.events if e == "RuptureStop"]
        _flag_events(branch, prev, new, branch.g, config)
    return branch


# -- branch switching ----------------------------------------------------------

def branch_switch(
    branch: Branch,
    event: dict,
    config: ContinuationConfig | None = None,
    direction: int = +1,
    s0: float | None = None,
) -> Branch:
    """Seed a new branch along the critical eigenvector of a candidate event."""
    config = config or branch.config or ContinuationConfig()
    s0 = config.s0 if s0 is None else s0
    if event.get("type") != "bifurcation_candidate":
        raise ValueError("branch_switch needs a bifurcation_candidate event")
    state_c: StationaryState = event["state"]
    lat = state_c.v.lat
    vec = np.asarray(event["eigvec"], dtype=float)
    kf = SymmetricField(lat, vec.copy())
    nrm = fld.norm_X(kf)
    if nrm == 0:
        raise InadmissibleKernel("candidate eigenvector vanishes")
    kf = kf * (1.0 / nrm)
    W = _metric_weights(lat)
    kk = kf.coeffs @ (W * kf.coeffs)
    a_c = state_c.v.coeffs

    last_err: Exception | None = None
    for sign in (direction, -direction):
        delta = sign * s0

        def phase_row(a, M, delta=delta):
            value = kf.coeffs @ (W * (a - a_c)) - delta * kk
            return W * kf.coeffs, 0.0, value

        try:
            v_pred = SymmetricField(lat, a_c + delta * kf.coeffs)
            state, _ = bordered_newton(
                v_pred, state_c.M, branch.g,
                free_m=True, extra_row=phase_row,
                tol=config.newton_tol, max_iter=config.newton_max_iter,
                guard=config.guard,
            )
        except (NoConvergence, DomainViolation) as err:
            last_err = err
            continue
        tv, tm = _tangent(state, branch.g, sign * kf.coeffs, 0.0)
        jmin, _ = _jacobian_min_eig(state, branch.g)
        diag = compute_diagnostics(state, branch.g)
        seed = BranchPoint(state, s0, tv, tm, diag, jmin)
        origin = BifurcationPointInfo(
            lat=lat, g=branch.g, harmonic=0, M_crit=float(state_c.M),
            kernel=kf, Mdot0=0.0, Mddot0=None,
        )
        return Branch(origin=origin, direction=sign, g=branch.g,
                      points=[seed], config=config)
    raise InadmissibleKernel(
        f"no admissible branch along the critical direction: {last_err}"
    )


# -- trivial branch scan ---------------------------------------------------------

def scan_trivial_branch(
    lat: LatticeSpec, g: float, m_lo: float, m_hi: float,
    ds: float = 0.03, refine_tol: float = 1e-10,
) -> list[dict]:
    """Walk the flat branch in M and locate symmetric-subspace crossings.

    Returns one candidate event per crossing, with the refined M value and
    the critical eigenvector, ready for :func:`branch_switch` style seeding.
    """
    zero = fld.zeros(lat)

    def jmin_at(M):
        st = StationaryState(zero, M, M * constraint_K(zero))
        return _jacobian_min_eig(st, g)

    ms = list(np.arange(m_lo, m_hi, ds)) + [m_hi]
    vals = [jmin_at(M) for M in ms]
    events = []
    for (m0, (j0, _)), (m1, (j1, _)) in zip(zip(ms, vals), zip(ms[1:], vals[1:])):
        if np.sign(j0) == np.sign(j1):
            continue
        lo, hi, jlo = m0, m1, j0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            jm, vec = jmin_at(mid)
            if abs(jm) <= refine_tol or hi - lo <= refine_tol:
                break
            if np.sign(jm) == np.sign(jlo):
                lo, jlo = mid, jm
            else:
                hi = mid
        st = StationaryState(zero, mid, mid * constraint_K(zero))
        events.append(
            {"type": "bifurcation_candidate", "M": float(mid),
             "state": st, "eigvec": vec}
        )
    return events


# -- nodal and cone diagnostics ---------------------------------------------------

@dataclass(frozen=True)
class NodalReport:
    max_at_origin: bool
    min_at_corners: bool
    cone_monotone: bool

    def all_ok(self) -> bool:
        return self.max_at_origin and self.min_at_corners and self.cone_monotone


def nodal_check(state_v: SymmetricField, pattern_k0: float, tol: float = 1e-9,
                samples: int = 24) -> NodalReport:
    """Extremum placement and cone monotonicity on the fundamental wedge.

    For squares the wedge is (-pi/k, 0)^2 with gradient conditions
    ``dv/dx >= 0`` and ``dv/dy >= 0``; for hexagons it is the angular
    sector ``pi < theta < 7*pi/6`` of the hexagonal cell with conditions
    ``dv/dx >= 0`` and ``sqrt(3)*dv/dx + dv/dy >= 0``.  ``pattern_k0`` is
    the absolute wave number of the pattern itself (harmonic times the
    lattice k0).
    """
    lat = state_v.lat
    kp = pattern_k0
    grid = fld.synthesize(state_v, 2)
    scale = max(np.abs(grid).max(), 1.0)
    v_origin = float(fld.evaluate_at(state_v, np.array([[0.0, 0.0]]))[0])
    max_at_origin = v_origin >= grid.max() - tol * scale

    if lat.kind is LatticeKind.SQUARE:
        corners = np.array([[np.pi / kp, np.pi / kp]])
        xs = np.linspace(-np.pi / kp, 0.0, samples + 2)[1:-1]
        pts = np.array([[x, y] for x in xs for y in xs])
        gr = fld.gradient_at(state_v, pts)
        cone = bool((gr[:, 0] >= -tol * scale).all() and (gr[:, 1] >= -tol * scale).all())
    else:
        vert_r = 4.0 * np.pi / (3.0 * kp)
        corners = np.array(
            [[vert_r * np.cos(th), vert_r * np.sin(th)]
             for th in np.arange(6) * np.pi / 3.0]
        )
        inradius = 2.0 * np.pi / (np.sqrt(3.0) * kp)
        thetas = np.linspace(np.pi, 7.0 * np.pi / 6.0, samples + 2)[1:-1]
        pts = []
        for th in thetas:
            rmax = inradius / np.cos(th - 7.0 * np.pi / 6.0)
            for r in np.linspace(0.0, rmax, samples + 2)[1:-1]:
                pts.append([r * np.cos(th), r * np.sin(th)])
        pts = np.array(pts)
        gr = fld.gradient_at(state_v, pts)
        cone = bool(
            (gr[:, 0] >= -tol * scale).all()
            and (np.sqrt(3.0) * gr[:, 0] + gr[:, 1] >= -tol * scale).all()
        )

    v_corners = fld.evaluate_at(state_v, corners)
    min_at_corners = bool(v_corners.min() <= grid.min() + tol * scale)
    return NodalReport(bool(max_at_origin), min_at_corners, cone)


# -- period classification --------------------------------------------------------

def _orbit_energy(v: SymmetricField) -> np.ndarray:
    return v.lat.l2_weights * v.coeffs ** 2


def dominant_orbit_radius(v: SymmetricField) -> float:
    e = _orbit_energy(v)
    e[v.lat.mean_orbit] = 0.0
    return float(np.sqrt(v.lat.orbit_ksq[int(np.argmax(e))]))


def classify_switched_period(primary: Branch, switched: Branch) -> dict:
    """Compare fundamental periodicity of a switched branch to its parent.

    The parent's modes live on a sublattice of index divisor d; the
    switched branch is period-doubled when either its dominant-energy
    orbit sits at half the parent's dominant radius or more than half of
    its spectral energy leaves the parent's sublattice.
    """
    vp = primary.points[-1].state.v
    vs = switched.points[-1].state.v
    lat = vp.lat
    ep = _orbit_energy(vp)
    active = ep > 1e-24 * ep.max()
    active[lat.mean_orbit] = False
    reps = lat.orbit_reps[active]
    divisor = int(np.gcd.reduce(np.abs(reps).ravel())) if reps.size else 1

    es = _orbit_energy(vs)
    es[lat.mean_orbit] = 0.0
    if divisor > 1:
        off = (lat.orbit_reps % divisor != 0).any(axis=1)
        off_fraction = float(es[off].sum() / es.sum()) if es.sum() > 0 else 0.0
    else:
        off_fraction = 0.0

    rp = dominant_orbit_radius(vp)
    rs = dominant_orbit_radius(vs)
    doubled = bool(abs(rs - rp / 2.0) <= 1e-9 * rp or off_fraction > 0.5)
    return {
        "label": "period_doubled" if doubled else "same_period",
        "primary_dominant_radius": rp,
        "switched_dominant_radius": rs,
        "off_sublattice_energy_fraction": off_fraction,
        "primary_index_divisor": divisor,
    }


# -- persistence -------------------------------------------------------------------

CSV_HEADER = "s,M,K_value,min_v,max_v,l2_norm,x_norm,log_l2,n_unstable,event"


def write_branch_csv(branch: Branch, path) -> None:
    lines = [CSV_HEADER]
    for p in branch.points:
        d = p.diagnostics
        n_uns = "" if d.n_unstable is None else str(d.n_unstable)
        ev = "|".join(sorted(p.events))
        lines.append(
            f"{p.s:.12e},{p.state.M:.12e},{d.k_value:.12e},{d.min_v:.12e},"
            f"{d.max_v:.12e},{d.l2_norm:.12e},{d.x_norm:.12e},{d.log_l2:.12e},"
            f"{n_uns},{ev}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_branch_csv(path) -> dict:
    """Columns of a branch CSV as arrays (events as a list of strings)."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    out = {}
    for j, name in enumerate(header):
        col = [r[j] for r in rows]
        if name == "event":
            out[name] = col
        elif name == "n_unstable":
            out[name] = [int(x) if x else None for x in col]
        else:
            out[name] = np.array([float(x) for x in col])
    return out


def _event_public(ev: dict) -> dict:
    return {k: v for k, v in ev.items() if k not in ("state", "eigvec")}


def write_branch_json(branch: Branch, path, extra: dict | None = None) -> None:
    config = branch.config or ContinuationConfig()
    m_values = [p.state.M for p in branch.points]
    data = {
        "origin": json.loads(branch.origin.to_json()),
        "direction": branch.direction,
        "g": branch.g,
        "termination": branch.termination.value if branch.termination else None,
        "n_points": len(branch.points),
        "sup_M": max(m_values) if m_values else None,
        "final_min_v": branch.points[-1].diagnostics.min_v if branch.points else None,
        "events": [_event_public(e) for e in branch.events],
        "config": asdict(config),
        "config_hash": config.hash(),
    }
    if extra:
        data.update(extra)
    with open(path, "w") as fh:
        json.dump(data, fh, sort_keys=True, indent=1)
        fh.write("\n")


def write_branch_snapshots(branch: Branch, directory, stride: int = 25) -> list:
    """Field snapshots every ``stride`` points plus the final point."""
    import os

    written = []
    n = len(branch.points)
    for i, p in enumerate(branch.points):
        if i % stride and i != n - 1:
            continue
        name = os.path.join(directory, f"point_{i:04d}.snap")
        fld.write_snapshot(name, p.state.v, branch.g, p.state.M, p.s)
        written.append(name)
    return written


def branch_regularity_ratios(branch: Branch) -> np.ndarray:
    """Regularity-bound ratio at every stored point (diagnostic)."""
    return np.array(
        [regularity_ratio(p.state.v, p.state.M, branch.g) for p in branch.points]
    )
