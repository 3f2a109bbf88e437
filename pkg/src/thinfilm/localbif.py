"""Kernel elements, transversality, and local branch expansion coefficients.

At M = 4g + 4(n*k0)^2 the linearisation about the flat film has a
one-dimensional kernel in the symmetric mean-zero space, spanned by the
unit-amplitude field on the critical orbit.  The branch of nontrivial
solutions through that point expands as

    v(s) = s * khat + O(s^2),
    M(s) = M_crit + Mdot0 * s + (Mddot0 / 2) * s^2 + ...

with khat normalised in the X norm.  Mdot0 and Mddot0 are the genuine
first and second derivatives of M(s) at s = 0.  They are computed here by
a numerical Lyapunov-Schmidt reduction built from the exact Taylor
tensors of the scalar nonlinearity at v = 0,

    phi(v) = 1/(2+v) + log((1+v)/(2+v)),
    phi'(0) = 1/4,   phi''(0) = -1/2,   phi'''(0) = 11/8,

so the only numerical operations are exact low-degree spectral products
and a diagonal resolvent solve.  Closed forms are provided as the
independent oracle:

    square:   Mdot0 = 0,
              Mddot0 = -(g+k0^2)(104*g+203*k0^2) / (24*pi^2*(1+k0^2+k0^4)),
    hexagon:  Mdot0 = 2*(g+k0^2) / (3^(1/4)*pi*sqrt(k0^2+1+1/k0^2)).

The hexagonal branch is transcritical (Mdot0 > 0, driven by the resonant
triad); the square branch is a subcritical pitchfork (Mddot0 < 0).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import field as fld
from .field import SymmetricField
from .lattice import LatticeKind, LatticeSpec, make_lattice

__all__ = [
    "BifurcationPointInfo",
    "SingularProjection",
    "kernel_element",
    "transversality_check",
    "expansion_coefficients",
    "closed_form_coefficients",
    "locate_bifurcation",
]

PHI1 = 0.25      # phi'(0)
PHI2 = -0.5      # phi''(0)
PHI3 = 11.0 / 8  # phi'''(0)


class SingularProjection(RuntimeError):
    """The range-restricted resolvent is numerically singular."""


@dataclass(frozen=True, eq=False)
class BifurcationPointInfo:
    """Everything needed to seed a branch from a trivial-state bifurcation."""

    lat: LatticeSpec
    g: float
    harmonic: int
    M_crit: float
    kernel: SymmetricField  # X-normalised, positive amplitude
    Mdot0: float
    Mddot0: float | None

    def to_json(self) -> str:
        data = {
            "lattice": self.lat.header(),
            "g": self.g,
            "harmonic": self.harmonic,
            "M_crit": self.M_crit,
            "Mdot0": self.Mdot0,
            "Mddot0": self.Mddot0,
        }
        return json.dumps(data, sort_keys=True)


def kernel_element(lat: LatticeSpec, n: int = 1) -> SymmetricField:
    """X-normalised symmetric field on the critical orbit at radius n*k0."""
    if n < 1:
        raise ValueError(f"harmonic must be >= 1, got {n}")
    raw = fld.from_orbit(lat, (n, 0), 1.0)
    return raw * (1.0 / fld.norm_X(raw))


def _unit_kernel(lat: LatticeSpec, n: int) -> SymmetricField:
    return fld.from_orbit(lat, (n, 0), 1.0)


def transversality_check(lat: LatticeSpec, g: float, n: int = 1) -> float:
    """Kernel component of the mixed derivative d^2_{v,M} F applied to it.

    Evaluates to phi'(0) = 1/4 on both lattices, independently of g.
    Computed from the actual product pipeline rather than the constant, so
    it doubles as a consistency check of the transforms.
    """
    xi = _unit_kernel(lat, n)
    # derivative of the residual in M at v = 0 applied to xi:
    # phi'(0)*xi minus its mean, projected back onto xi
    grid = fld.synthesize(xi, 2)
    mixed = fld.analyze(potential_deriv_at_zero() * grid, lat)
    mixed.coeffs[lat.mean_orbit] = 0.0
    return fld.inner_product_L2(mixed, xi) / fld.inner_product_L2(xi, xi)


def potential_deriv_at_zero() -> float:
    return PHI1


def _critical_orbits(lat: LatticeSpec, n: int) -> np.ndarray:
    """All orbit ids whose integer radius equals n^2 (exact arithmetic)."""
    return np.nonzero(lat.orbit_nsq == n * n)[0]


def expansion_coefficients(
    lat: LatticeSpec, g: float, n: int = 1, zero_tol: float = 1e-9
) -> tuple[float, float | None]:
    """Numerical Lyapunov-Schmidt expansion coefficients (Mdot0, Mddot0).

    Mddot0 is computed only when the first derivative vanishes (square
    lattices); it is None otherwise.  Requires the truncation to resolve
    the quadratic and cubic interactions of the critical orbit
    (N >= 8n is ample).
    """
    k0 = lat.k0
    r2 = (n * k0) ** 2
    m_crit = 4.0 * g + 4.0 * r2
    khat = kernel_element(lat, n)
    crit = _critical_orbits(lat, n)

    # quadratic tensor applied to (khat, khat): -(M/2) * P(khat^2)
    k2 = fld.multiply(khat, khat)
    B = k2 * (m_crit * PHI2)
    B.coeffs[lat.mean_orbit] = 0.0

    denom = PHI1 * fld.inner_product_L2(khat, khat)
    mdot = -0.5 * fld.inner_product_L2(B, khat) / denom

    if abs(mdot) > zero_tol * max(1.0, m_crit):
        return float(mdot), None

    # range-restricted corrector A = L^{-1} (I - Q) B, diagonal in orbits
    resolvent = r2 - lat.orbit_ksq
    c = B.coeffs.copy()
    c[crit] = 0.0
    safe = np.abs(resolvent) > 1e-8 * max(r2, 1.0)
    bad = (~safe) & (np.abs(c) > 0)
    bad[crit] = False
    if np.any(bad):
        raise SingularProjection(
            "near-resonant non-kernel orbit in the range-restricted solve"
        )
    corr = np.zeros_like(c)
    corr[safe] = c[safe] / resolvent[safe]
    A = SymmetricField(lat, corr)

    k3 = fld.multiply(k2, khat)
    T1 = m_crit * PHI3 * fld.inner_product_L2(k3, khat)
    kA = fld.multiply(khat, A)
    T2 = m_crit * PHI2 * fld.inner_product_L2(kA, khat)
    mddot = -(T1 - 3.0 * T2) / (3.0 * denom)
    return float(mdot), float(mddot)


def closed_form_coefficients(
    kind: LatticeKind | str, g: float, k0: float
) -> tuple[float, float | None]:
    """Closed-form (Mdot0, Mddot0) for the primary branch at radius k0."""
    kind = LatticeKind(kind)
    if kind is LatticeKind.SQUARE:
        mddot = -(g + k0 ** 2) * (104.0 * g + 203.0 * k0 ** 2) / (
            24.0 * np.pi ** 2 * (1.0 + k0 ** 2 + k0 ** 4)
        )
        return 0.0, mddot
    mdot = 2.0 * (g + k0 ** 2) / (
        3.0 ** 0.25 * np.pi * np.sqrt(k0 ** 2 + 1.0 + 1.0 / k0 ** 2)
    )
    return mdot, None


def locate_bifurcation(lat: LatticeSpec, g: float, n: int = 1) -> BifurcationPointInfo:
    """Bundle critical value, kernel, and expansion coefficients."""
    m_crit = 4.0 * g + 4.0 * (n * lat.k0) ** 2
    kernel = kernel_element(lat, n)
    mdot, mddot = expansion_coefficients(lat, g, n)
    return BifurcationPointInfo(
        lat=lat, g=g, harmonic=n, M_crit=m_crit, kernel=kernel,
        Mdot0=mdot, Mddot0=mddot,
    )
