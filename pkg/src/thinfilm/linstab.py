"""Dispersion relation and spectral stability of stationary film states.

The flat film linearisation has the dispersion relation

    lambda(k) = -|k|^4 - (g - M/4)*|k|^2,

non-positive for M <= 4g and positive exactly on 0 < |k| < k0 when
M = 4g + 4*k0^2.  About a nontrivial stationary state h = 1 + v the
evolution operator linearises to

    L w = -div( a grad lap w + b grad w + c w ),
    a = h^3,
    b = -g h^3 + M h^2/(1+h)^2,
    c = 3 h^2 (grad lap h - g grad h) + 2 M h/(1+h)^3 grad h,

obtained by exact differentiation of the divergence-form vector field
(both mobilities linearised).  The operator is assembled as a dense
matrix on a selected mode set:

* co-periodic: the state's own lattice;
* superharmonic N: the sub-set of modes with indices divisible by N
  (a Galerkin compression onto the coarser dual lattice N*Gamma);
* subharmonic N: the state embedded in an N-times larger periodicity
  cell, i.e. the refined dual lattice Gamma/N.

The mean mode is always removed (mass conservation makes it neutral);
``symmetric=True`` restricts to the dihedral-symmetric subspace, which is
invariant because the state is symmetric.  At stationary states the
operator factors as -div(h^3 grad(.)) composed with a self-adjoint
operator, so its spectrum is real; eigenvalues are reported as sorted
real parts with the largest imaginary residue recorded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import field as fld
from .field import SymmetricField
from .lattice import LatticeSpec, make_lattice
from .stationary import DomainViolation, StationaryState

__all__ = [
    "PerturbationClass",
    "SpectrumReport",
    "dispersion",
    "critical_marangoni",
    "linearization_matrix",
    "evolution_linearization_spectrum",
    "classify_stability",
    "leading_coperiodic_mode",
    "STABILITY_TOL",
]

STABILITY_TOL = 1e-8


@dataclass(frozen=True)
class PerturbationClass:
    """Co-periodic, superharmonic(N), or subharmonic(N) perturbations."""

    kind: str  # "coperiodic" | "superharmonic" | "subharmonic"
    factor: int = 1

    def __post_init__(self):
        if self.kind not in ("coperiodic", "superharmonic", "subharmonic"):
            raise ValueError(f"unknown perturbation class {self.kind!r}")
        if self.kind != "coperiodic" and self.factor < 2:
            raise ValueError("super/subharmonic classes need factor >= 2")

    def __str__(self) -> str:
        if self.kind == "coperiodic":
            return "coperiodic"
        return f"{self.kind}{self.factor}"


COPERIODIC = PerturbationClass("coperiodic")


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    perturbation_class: str
    eigenvalues: np.ndarray  # sorted descending (real parts)
    n_unstable: int
    symmetric_restriction: bool
    max_imag: float
    stability_tol: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "class": self.perturbation_class,
                "eigenvalues": [float(x) for x in self.eigenvalues],
                "n_unstable": self.n_unstable,
                "symmetric_restriction": self.symmetric_restriction,
                "max_imag": self.max_imag,
                "stability_tol": self.stability_tol,
            },
            sort_keys=True,
        )


def dispersion(kvec, M: float, g: float) -> float:
    """Growth rate of the flat film at wave vector k (or |k| as scalar)."""
    k = np.asarray(kvec, dtype=float)
    ksq = float(k ** 2) if k.ndim == 0 else float(k @ k)
    return -ksq * ksq - (g - M / 4.0) * ksq


def critical_marangoni(g: float, k0: float) -> float:
    """Onset value 4g + 4 k0^2 for patterns with absolute wave number k0."""
    if g <= 0 or k0 < 0:
        raise ValueError("need g > 0 and k0 >= 0")
    return 4.0 * g + 4.0 * k0 ** 2


# -- operator assembly --------------------------------------------------------


def _embed_subharmonic(v: SymmetricField, factor: int) -> SymmetricField:
    """The same Cartesian function on the factor-times larger cell."""
    lat = v.lat
    big = make_lattice(lat.kind, lat.k0 / factor, lat.N * factor)
    coeffs = np.zeros(big.n_orbits)
    reps = lat.orbit_reps * factor
    tgt = big.orbit_table[reps[:, 0] % big.N, reps[:, 1] % big.N]
    coeffs[tgt] = v.coeffs
    return SymmetricField(big, coeffs)


def _coefficient_tables(v: SymmetricField, M: float, g: float):
    """Fourier tables of the linearisation coefficients a, b, cx, cy."""
    lat = v.lat
    amp = v.coeffs[lat.support_orbit].astype(complex)
    kx = lat.support_kvec[:, 0]
    ky = lat.support_kvec[:, 1]
    ksq = kx * kx + ky * ky

    v2 = fld.synthesize_modal(lat, amp, 2)
    if 1.0 + v2.min() <= 0.0:
        raise DomainViolation("state is inadmissible: film height reaches zero")
    gx = fld.synthesize_modal(lat, 1j * kx * amp, 2)
    gy = fld.synthesize_modal(lat, 1j * ky * amp, 2)
    gxl = fld.synthesize_modal(lat, -1j * kx * ksq * amp, 2)
    gyl = fld.synthesize_modal(lat, -1j * ky * ksq * amp, 2)

    h = 1.0 + v2
    a = h ** 3
    b = -g * h ** 3 + M * h ** 2 / (1.0 + h) ** 2
    pref = 3.0 * h ** 2
    marg = 2.0 * M * h / (1.0 + h) ** 3
    cx = pref * (gxl - g * gx) + marg * gx
    cy = pref * (gyl - g * gy) + marg * gy

    size = 2 * lat.N
    scale = 1.0 / (size * size)
    return (
        np.fft.fft2(a) * scale,
        np.fft.fft2(b) * scale,
        np.fft.fft2(cx) * scale,
        np.fft.fft2(cy) * scale,
    )


def _selection(lat: LatticeSpec, divisor: int):
    """Support/orbit selection for modes with indices divisible by divisor."""
    if divisor == 1:
        orbit_sel = np.arange(1, lat.n_orbits)
    else:
        reps = lat.orbit_reps
        div = (reps % divisor == 0).all(axis=1)
        div[lat.mean_orbit] = False
        orbit_sel = np.nonzero(div)[0]
    col_mask = np.isin(lat.support_orbit, orbit_sel)
    return orbit_sel, col_mask


def linearization_matrix(
    v: SymmetricField,
    M: float,
    g: float,
    cls: PerturbationClass = COPERIODIC,
    symmetric: bool = True,
):
    """Dense matrix of the evolution linearisation on the selected modes.

    Returns ``(matrix, basis_lat, basis_ids)`` where ``basis_ids`` are
    orbit ids (symmetric) or support-mode indices (non-symmetric) of the
    basis lattice.  The mean mode is excluded.
    """
    if cls.kind == "subharmonic":
        v = _embed_subharmonic(v, cls.factor)
        divisor = 1
    else:
        divisor = cls.factor if cls.kind == "superharmonic" else 1
    lat = v.lat
    ahat, bhat, cxhat, cyhat = _coefficient_tables(v, M, g)
    size = 2 * lat.N

    orbit_sel, col_mask = _selection(lat, divisor)
    cols = np.nonzero(col_mask)[0]
    kvec_c = lat.support_kvec[cols]
    ksq_c = np.einsum("ij,ij->i", kvec_c, kvec_c)

    if symmetric:
        row_pairs = lat.orbit_reps[orbit_sel]
        row_kvec = lat.rep_kvec[orbit_sel]
    else:
        row_pairs = lat.support_pairs[cols]
        row_kvec = kvec_c

    diff = row_pairs[:, None, :] - lat.support_pairs[cols][None, :, :]
    pos = (diff[..., 0] % size) * size + (diff[..., 1] % size)

    dots = row_kvec @ kvec_c.T
    entries = dots * (-ksq_c)[None, :] * ahat.flat[pos]
    entries += dots * bhat.flat[pos]
    entries += -1j * (
        row_kvec[:, 0][:, None] * cxhat.flat[pos]
        + row_kvec[:, 1][:, None] * cyhat.flat[pos]
    )

    if symmetric:
        # fold columns over orbits; the masked support stays grouped by
        # orbit, so reduceat boundaries come from the group changes
        group = lat.support_orbit[cols]
        bounds = np.concatenate([[0], np.nonzero(np.diff(group))[0] + 1])
        mat = np.add.reduceat(entries, bounds, axis=1)
        return np.real(mat), lat, orbit_sel
    return entries, lat, cols


def evolution_linearization_spectrum(
    state: StationaryState,
    g: float,
    cls: PerturbationClass = COPERIODIC,
    symmetric: bool = True,
    stability_tol: float = STABILITY_TOL,
) -> SpectrumReport:
    """Eigenvalues of the evolution linearisation about a stationary state."""
    mat, _, _ = linearization_matrix(state.v, state.M, g, cls, symmetric)
    eig = scipy.linalg.eigvals(mat)
    order = np.lexsort((eig.imag, -eig.real))
    eig = eig[order]
    real = eig.real
    return SpectrumReport(
        perturbation_class=str(cls),
        eigenvalues=real,
        n_unstable=int(np.sum(real > stability_tol)),
        symmetric_restriction=symmetric,
        max_imag=float(np.abs(eig.imag).max(initial=0.0)),
        stability_tol=stability_tol,
    )


def classify_stability(
    state: StationaryState, g: float, stability_tol: float = STABILITY_TOL
) -> dict[str, str]:
    """Stable/unstable/marginal per perturbation class (symmetric subspace)."""
    out = {}
    for cls in (
        COPERIODIC,
        PerturbationClass("superharmonic", 2),
        PerturbationClass("subharmonic", 2),
    ):
        rep = evolution_linearization_spectrum(state, g, cls, True, stability_tol)
        if rep.n_unstable > 0:
            verdict = "unstable"
        elif rep.eigenvalues.max(initial=-np.inf) > -stability_tol:
            verdict = "marginal"
        else:
            verdict = "stable"
        out[str(cls)] = verdict
    return out


def leading_coperiodic_mode(
    state: StationaryState, g: float
) -> tuple[float, SymmetricField]:
    """Largest co-periodic symmetric eigenvalue and its eigenfield."""
    mat, lat, orbit_sel = linearization_matrix(state.v, state.M, g, COPERIODIC, True)
    eigval, eigvec = scipy.linalg.eig(mat)
    i = int(np.argmax(eigval.real))
    coeffs = np.zeros(lat.n_orbits)
    coeffs[orbit_sel] = np.real(eigvec[:, i])
    mode = SymmetricField(lat, coeffs)
    nrm = fld.norm_L2(mode)
    if nrm > 0:
        mode = mode * (1.0 / nrm)
    return float(eigval[i].real), mode
