"""The nonlocal second-order stationary problem and its Newton solver.

Stationary film profiles h = 1 + v with prescribed mean solve

    lap(v) - g*v + M*(1/(2+v) + log((1+v)/(2+v))) = M*K(v),

where the constant K(v) is the cell average of the left-hand nonlinearity,
chosen so that mean-zero solutions exist.  The discretisation keeps the
mean of v as an unknown together with a scalar multiplier that stands in
for M*K(v); the resulting bordered system is square and the multiplier is
directly comparable to the constraint parameter of continuation runs.

The Jacobian of the residual in the reduced orbit basis is

    diag(-|gamma|^2 - g) + M * conv(q),    q = 1/((1+v)(2+v)^2),

with the nonlocal mean correction carried by the border.  conv(q) is
assembled from the Fourier table of q via gather tables, which agrees to
machine precision with the pseudo-spectral product pipeline used by the
residual (factor-2 oversampling is alias-free for these read-backs).

Dense factorisation is used up to a configurable size; above it the
solver switches to MINRES on the weighted-symmetric core block with a
diagonal spectral preconditioner, bordered by a Schur complement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from . import field as fld
from .field import DomainViolation, SymmetricField
from .lattice import LatticeSpec

__all__ = [
    "ProblemParams",
    "StationaryState",
    "NoConvergence",
    "DomainViolation",
    "potential",
    "potential_deriv",
    "admissibility_margin",
    "constraint_K",
    "residual",
    "jacobian_apply",
    "multiplication_matrix",
    "jacobian_core_matrix",
    "jacobian_spectrum",
    "newton_solve",
    "bordered_newton",
    "regularity_constant",
    "regularity_ratio",
]

GUARD_DEFAULT = 1e-3
DENSE_LIMIT = 4000


class NoConvergence(RuntimeError):
    """Newton iteration failed to converge."""


@dataclass(frozen=True)
class ProblemParams:
    """Gravitational constant and Marangoni number."""

    g: float
    M: float

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError(f"g must be positive, got {self.g}")

    @property
    def m_star(self) -> float:
        """Onset of the long-wave instability of the flat film."""
        return 4.0 * self.g


@dataclass(frozen=True, eq=False)
class StationaryState:
    """One converged stationary profile with its multiplier."""

    v: SymmetricField
    M: float
    lambda_k: float  # multiplier standing in for M*K(v)


def potential(v: np.ndarray) -> np.ndarray:
    """Reduced Marangoni flux potential 1/(2+v) + log((1+v)/(2+v))."""
    return 1.0 / (2.0 + v) + np.log((1.0 + v) / (2.0 + v))


def potential_deriv(v: np.ndarray) -> np.ndarray:
    """Derivative of :func:`potential`, 1/((1+v)(2+v)^2)."""
    return 1.0 / ((1.0 + v) * (2.0 + v) ** 2)


def admissibility_margin(v: SymmetricField, oversample: int = 2) -> float:
    """min(1 + v) on the oversampled grid; positive means admissible."""
    return float(1.0 + synth_min(v, oversample))


def synth_min(v: SymmetricField, oversample: int = 2) -> float:
    return float(fld.synthesize(v, oversample).min())


def _admissible_grid(v: SymmetricField, oversample: int = 2) -> np.ndarray:
    grid = fld.synthesize(v, oversample)
    if 1.0 + grid.min() <= 0.0:
        raise DomainViolation(
            f"film height reaches {1.0 + grid.min():.3e} <= 0 on the grid"
        )
    return grid


def constraint_K(v: SymmetricField, oversample: int = 2) -> float:
    """Cell average of the flux potential over the oversampled grid."""
    grid = _admissible_grid(v, oversample)
    return float(potential(grid).mean())


def _potential_coeffs(v: SymmetricField, oversample: int = 2) -> np.ndarray:
    """Orbit coefficients of potential(v); entry 0 is the cell average K(v)."""
    grid = _admissible_grid(v, oversample)
    return fld.analyze(potential(grid), v.lat).coeffs


def residual(v: SymmetricField, M: float, g: float) -> SymmetricField:
    """Mean-zero residual of the stationary problem at (v, M)."""
    lat = v.lat
    nl = _potential_coeffs(v)
    c = -lat.orbit_ksq * v.coeffs - g * v.coeffs + M * nl
    c[lat.mean_orbit] = 0.0
    return SymmetricField(lat, c)


def jacobian_apply(v: SymmetricField, M: float, g: float, w: SymmetricField) -> SymmetricField:
    """Action of the residual Jacobian on a mean-zero direction w.

    lap(w) + (M*q - g)*w - avg(M*q*w) with q = potential'(v); the output
    mean is zeroed exactly.
    """
    lat = v.lat
    grid_q = potential_deriv(_admissible_grid(v))
    prod = grid_q * fld.synthesize(w, 2)
    t = fld.analyze(prod, lat).coeffs
    c = -lat.orbit_ksq * w.coeffs - g * w.coeffs + M * t
    c[lat.mean_orbit] = 0.0
    return SymmetricField(lat, c)


# -- matrix assembly ---------------------------------------------------------

def multiplication_matrix(lat: LatticeSpec, grid2: np.ndarray) -> np.ndarray:
    """Dense orbit-basis matrix of pointwise multiplication by a symmetric field.

    ``grid2`` is the multiplier sampled on the 2x oversampled grid.  Entry
    (o, o') is the coefficient at the representative of orbit o of the
    product of the multiplier with the orbit-o' basis field, read off the
    multiplier's Fourier table by index differences.
    """
    size = grid2.shape[0]
    qhat = np.fft.fft2(grid2) / (size * size)
    rows = np.real(qhat.flat[lat.diff_positions(size // lat.N)])
    return np.add.reduceat(rows, lat.orbit_starts, axis=1)


def jacobian_core_matrix(v: SymmetricField, M: float, g: float) -> np.ndarray:
    """diag(-|gamma|^2 - g) + M*conv(q) on all orbits including the mean."""
    lat = v.lat
    grid_q = potential_deriv(_admissible_grid(v))
    A = M * multiplication_matrix(lat, grid_q)
    A[np.diag_indices_from(A)] += -lat.orbit_ksq - g
    return A


def jacobian_spectrum(v: SymmetricField, M: float, g: float) -> np.ndarray:
    """Eigenvalues of the Jacobian on the mean-zero symmetric subspace.

    The operator is self-adjoint there; the reduced matrix is symmetrised
    with the orbit-size weights before calling the symmetric eigensolver.
    Sorted ascending.
    """
    lat = v.lat
    A = jacobian_core_matrix(v, M, g)
    core = A[1:, 1:]
    w = np.sqrt(lat.l2_weights[1:])
    sym = core * (w[:, None] / w[None, :])
    sym = 0.5 * (sym + sym.T)
    return scipy.linalg.eigvalsh(sym)


# -- Newton -------------------------------------------------------------------

def _field_l2(lat: LatticeSpec, coeffs: np.ndarray) -> float:
    return float(np.sqrt(np.dot(lat.l2_weights, coeffs ** 2)))


def _system_rows(lat, a, lam, M, g):
    """Residual rows (field, mean) of the bordered stationary system."""
    v = SymmetricField(lat, a)
    nl = _potential_coeffs(v)
    R = -lat.orbit_ksq * a - g * a + M * nl
    R[lat.mean_orbit] -= lam
    return R, a[lat.mean_orbit], nl


def bordered_newton(
    v_guess: SymmetricField,
    M: float,
    g: float,
    *,
    free_m: bool = False,
    extra_row=None,
    tol: float = 1e-10,
    max_iter: int = 25,
    guard: float = GUARD_DEFAULT,
    max_halvings: int = 30,
    dense_limit: int = DENSE_LIMIT,
):
    """Damped Newton on the bordered system (field eq, mean constraint).

    Unknowns are the orbit coefficients (mean included), the multiplier,
    and optionally M.  ``extra_row`` closes the system when M is free; it
    is a callable ``(a, M) -> (row_a, row_m, value)`` whose equation
    ``value = 0`` is appended.  Iterates are kept admissible
    (min(1+v) >= guard on the oversampled grid) by step halving.

    Returns ``(state, n_iter)`` or raises :class:`NoConvergence` /
    :class:`DomainViolation`.
    """
    lat = v_guess.lat
    n = lat.n_orbits
    a = v_guess.coeffs.copy()
    if admissibility_margin(SymmetricField(lat, a)) < guard:
        raise DomainViolation("initial guess violates the admissibility guard")
    lam = M * constraint_K(SymmetricField(lat, a))
    M = float(M)

    def total_norm(R, mean_val, extra_val):
        t = _field_l2(lat, R) + abs(mean_val)
        if extra_val is not None:
            t += abs(extra_val)
        return t

    R, mean_val, nl = _system_rows(lat, a, lam, M, g)
    extra = extra_row(a, M) if extra_row is not None else None
    cur = total_norm(R, mean_val, extra[2] if extra else None)

    for it in range(max_iter):
        if (
            _field_l2(lat, R) <= tol
            and abs(mean_val) <= tol
            and (extra is None or abs(extra[2]) <= tol * max(1.0, abs(M)))
        ):
            a = a.copy()
            a[lat.mean_orbit] = 0.0
            return StationaryState(SymmetricField(lat, a), M, lam), it

        v = SymmetricField(lat, a)
        J = jacobian_core_matrix(v, M, g)
        rows = [R, np.array([mean_val])]
        e0 = np.zeros(n)
        e0[lat.mean_orbit] = 1.0
        if free_m:
            row_a, row_m, extra_val = extra
            mat = np.zeros((n + 2, n + 2))
            mat[:n, :n] = J
            mat[:n, n] = -e0
            mat[:n, n + 1] = nl
            mat[n, :n] = e0
            mat[n + 1, :n] = row_a
            mat[n + 1, n + 1] = row_m
            rhs = -np.concatenate([R, [mean_val], [extra_val]])
        else:
            mat = np.zeros((n + 1, n + 1))
            mat[:n, :n] = J
            mat[:n, n] = -e0
            mat[n, :n] = e0
            rhs = -np.concatenate([R, [mean_val]])

        if n <= dense_limit:
            try:
                delta = np.linalg.solve(mat, rhs)
            except np.linalg.LinAlgError as err:
                raise NoConvergence(f"singular Newton system: {err}") from err
        else:
            delta = _schur_minres(lat, mat, rhs, n)

        # damping: keep iterates admissible and the residual decreasing
        alpha = 1.0
        for _ in range(max_halvings + 1):
            a_try = a + alpha * delta[:n]
            lam_try = lam + alpha * delta[n]
            M_try = M + alpha * delta[n + 1] if free_m else M
            v_try = SymmetricField(lat, a_try)
            if admissibility_margin(v_try) < guard:
                alpha *= 0.5
                continue
            R_try, mean_try, nl_try = _system_rows(lat, a_try, lam_try, M_try, g)
            extra_try = extra_row(a_try, M_try) if extra_row is not None else None
            new = total_norm(R_try, mean_try, extra_try[2] if extra_try else None)
            if new <= cur * (1.0 - 1e-4 * alpha) or new <= tol:
                break
            alpha *= 0.5
        else:
            raise NoConvergence("step damping exhausted without residual decrease")

        a, lam, M = a_try, lam_try, M_try
        R, mean_val, nl = R_try, mean_try, nl_try
        extra, cur = extra_try, new

    raise NoConvergence(f"no convergence after {max_iter} iterations (residual {cur:.3e})")


def _schur_minres(lat: LatticeSpec, mat: np.ndarray, rhs: np.ndarray, n: int) -> np.ndarray:
    """Bordered solve via MINRES on the weighted-symmetric core block.

    The core block is self-adjoint under the orbit L2 weights; the border
    columns and rows (multiplier, optional M, constraints) are eliminated
    through a small Schur complement.
    """
    k = mat.shape[0] - n
    core = mat[:n, :n]
    B = mat[:n, n:]
    C = mat[n:, :n]
    D = mat[n:, n:]
    w = np.sqrt(lat.l2_weights)
    diag = np.diag(core).copy()
    precond = 1.0 / np.maximum(np.abs(diag), 1e-2)

    def matvec(y):
        return w * (core @ (y / w))

    op = scipy.sparse.linalg.LinearOperator((n, n), matvec=matvec)
    pre = scipy.sparse.linalg.LinearOperator((n, n), matvec=lambda y: precond * y)

    def core_solve(b):
        y, info = scipy.sparse.linalg.minres(op, w * b, M=pre, rtol=1e-12, maxiter=20 * n)
        if info != 0:
            raise NoConvergence(f"MINRES failed with info={info}")
        return y / w

    X = np.column_stack([core_solve(B[:, j]) for j in range(k)])
    y0 = core_solve(rhs[:n])
    S = D - C @ X
    zb = np.linalg.solve(S, rhs[n:] - C @ y0)
    za = y0 - X @ zb
    return np.concatenate([za, zb])


def newton_solve(
    v_guess: SymmetricField,
    M: float,
    g: float,
    tol: float = 1e-10,
    max_iter: int = 25,
    guard: float = GUARD_DEFAULT,
) -> StationaryState:
    """Solve the stationary problem at fixed M from an admissible guess."""
    state, _ = bordered_newton(
        v_guess, M, g, free_m=False, tol=tol, max_iter=max_iter, guard=guard
    )
    return state


def regularity_constant(lat: LatticeSpec, g: float) -> float:
    """A-priori constant C with ||v||_X <= C * regularity denominator.

    Chains the spectral norm equivalence
    ``||v||_X <= sqrt(3/2) * (||v||_L2 + ||lap v||_L2)`` (the weight ratio
    (1+q+q^2)/(1+q^2) peaks at 3/2) with the stationary equation bound
    ``||lap v|| <= g||v|| + 2M(sqrt(|cell|) + ||log(1+v)|| + ||1+v||)``
    using 1/(2+v) < 1 and log(2+v) <= 1+v for v > -1.  Fixed once per
    problem, never re-tuned.
    """
    return float(np.sqrt(1.5) * (1.0 / g + 2.0 * max(1.0, np.sqrt(lat.cell_area))))


def regularity_ratio(v: SymmetricField, M: float, g: float) -> float:
    """Ratio ||v||_X / (g*||v||_L2 + M*(1 + ||log(1+v)||_L2 + ||1+v||_L2)).

    Bounded along branches by :func:`regularity_constant`; blow-up of the
    X norm therefore requires blow-up of the L2 data.
    """
    grid = _admissible_grid(v)
    cell = v.lat.cell_area
    log_l2 = float(np.sqrt(cell * np.mean(np.log(1.0 + grid) ** 2)))
    h_l2 = float(np.sqrt(cell * np.mean((1.0 + grid) ** 2)))
    denom = g * fld.norm_L2(v) + M * (1.0 + log_l2 + h_l2)
    return fld.norm_X(v) / denom
