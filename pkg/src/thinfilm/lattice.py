"""Square and hexagonal Fourier lattices with dihedral symmetry bookkeeping.

A doubly periodic pattern has a Fourier series supported on the dual
lattice generated by two wave vectors k1, k2 of equal length k0.  Fields
that are invariant under the dihedral group of the lattice (D4 for the
square, D6 for the hexagon) and real-valued carry one real coefficient
per group orbit of index pairs (n1, n2).  This module owns all index
bookkeeping: which pairs are retained at a given truncation, how the
dihedral group acts on them, how orbits are enumerated and canonicalised,
and the gather tables used to assemble multiplication operators in the
reduced orbit basis.

Grid synthesis uses the basis (q1, q2) dual to (k1, k2), i.e.
k_i . q_j = 2*pi*delta_ij, so a plain 2D FFT maps index space to the
grid ``x(j1, j2) = (j1*q1 + j2*q2)/N``.  For the square lattice q_i
coincides with the periodicity vectors p_i; for the hexagon (q1, q2) is
a unimodular re-basis of (p1, p2) spanning the same real-space lattice,
so the synthesis parallelogram is a valid periodicity cell.

All objects are immutable after construction and safe to share between
threads.
"""

from __future__ import annotations

from enum import Enum
from functools import cached_property

import numpy as np

__all__ = [
    "LatticeKind",
    "LatticeSpec",
    "make_lattice",
    "dual_wavevector",
    "symmetry_orbit",
    "critical_wave_indices",
]


class LatticeKind(str, Enum):
    SQUARE = "square"
    HEXAGON = "hexagon"


# Dihedral generators as integer matrices acting on index pairs (n1, n2).
# Square: rotation by 90 degrees and the x-axis mirror.
# Hexagon: rotation by 60 degrees and the x-axis mirror, expressed in the
# oblique (k1, k2) coordinates.
_GENERATORS = {
    LatticeKind.SQUARE: (
        np.array([[0, -1], [1, 0]]),
        np.array([[1, 0], [0, -1]]),
    ),
    LatticeKind.HEXAGON: (
        np.array([[1, -1], [1, 0]]),
        np.array([[1, -1], [0, -1]]),
    ),
}


def _close_group(generators: tuple[np.ndarray, ...]) -> list[np.ndarray]:
    """All products of the generators, as a list of 2x2 integer matrices."""
    elems = {(1, 0, 0, 1): np.eye(2, dtype=int)}
    frontier = list(elems.values())
    while frontier:
        new = []
        for a in frontier:
            for gmat in generators:
                b = gmat @ a
                key = tuple(int(x) for x in b.ravel())
                if key not in elems:
                    elems[key] = b
                    new.append(b)
        frontier = new
    return sorted(elems.values(), key=lambda m: tuple(m.ravel()))


class LatticeSpec:
    """Geometry and spectral index tables for one periodic cell.

    Attributes
    ----------
    kind : LatticeKind
    k0 : float
        Absolute wave number of the dual generators.
    N : int
        Spectral truncation per lattice direction (even).  Retained index
        pairs satisfy ``|n_i| <= N//2 - 1`` (and ``|n1 - n2| <= N//2 - 1``
        on the hexagon, so the retained set is closed under D6).
    k1, k2 : ndarray, shape (2,)
        Dual-lattice generators, ``|k1| = |k2| = k0``.
    p1, p2 : ndarray, shape (2,)
        Real-space periodicity vectors.
    q1, q2 : ndarray, shape (2,)
        Grid basis dual to (k1, k2); spans the same real-space lattice
        as (p1, p2).
    cell_area : float
        Area of the periodicity cell, ``|det(p1, p2)|``.
    """

    def __init__(self, kind: LatticeKind, k0: float, N: int):
        kind = LatticeKind(kind)
        if not k0 > 0:
            raise ValueError(f"k0 must be positive, got {k0}")
        if N % 2 != 0 or N < 8:
            raise ValueError(f"N must be even and >= 8, got {N}")
        self.kind = kind
        self.k0 = float(k0)
        self.N = int(N)

        e1 = np.array([1.0, 0.0])
        e2 = np.array([0.0, 1.0])
        if kind is LatticeKind.SQUARE:
            self.k1 = k0 * e1
            self.k2 = k0 * e2
            self.p1 = (2 * np.pi / k0) * e1
            self.p2 = (2 * np.pi / k0) * e2
        else:
            self.k1 = k0 * e1
            self.k2 = (k0 / 2) * np.array([-1.0, np.sqrt(3.0)])
            self.p1 = (4 * np.pi / (np.sqrt(3.0) * k0)) * e2
            self.p2 = (2 * np.pi / (np.sqrt(3.0) * k0)) * np.array([np.sqrt(3.0), -1.0])
        self.cell_area = float(abs(self.p1[0] * self.p2[1] - self.p1[1] * self.p2[0]))

        # grid basis: k_i . q_j = 2 pi delta_ij
        kmat = np.vstack([self.k1, self.k2])
        qmat = 2 * np.pi * np.linalg.inv(kmat)
        self.q1 = qmat[:, 0].copy()
        self.q2 = qmat[:, 1].copy()

        self.group = _close_group(_GENERATORS[kind])
        self._build_index_tables()

    # -- construction ---------------------------------------------------

    def _nsq(self, n1, n2):
        """Integer |gamma|^2 / k0^2 for index pairs (vectorised)."""
        if self.kind is LatticeKind.SQUARE:
            return n1 * n1 + n2 * n2
        return n1 * n1 + n2 * n2 - n1 * n2

    def _in_support(self, n1: int, n2: int) -> bool:
        m = self.N // 2 - 1
        if abs(n1) > m or abs(n2) > m:
            return False
        if self.kind is LatticeKind.HEXAGON and abs(n1 - n2) > m:
            return False
        return True

    def _build_index_tables(self) -> None:
        N = self.N
        m = N // 2 - 1
        pairs = []
        for n1 in range(-m, m + 1):
            for n2 in range(-m, m + 1):
                if self._in_support(n1, n2):
                    pairs.append((n1, n2))

        orbit_of: dict[tuple[int, int], int] = {}
        orbits: list[list[tuple[int, int]]] = []
        for pair in pairs:
            if pair in orbit_of:
                continue
            vec = np.array(pair)
            members = sorted({tuple(int(x) for x in (gmat @ vec)) for gmat in self.group})
            oid = len(orbits)
            orbits.append(members)
            for mem in members:
                orbit_of[mem] = oid

        # canonical order: by integer radius, then by lexicographically
        # smallest member; the mean orbit (0, 0) comes first
        order = sorted(
            range(len(orbits)),
            key=lambda i: (self._nsq(*orbits[i][0]), orbits[i][0]),
        )
        remap = {old: new for new, old in enumerate(order)}
        orbits = [orbits[i] for i in order]

        self.n_orbits = len(orbits)
        self.orbit_reps = np.array([orb[0] for orb in orbits], dtype=np.int64)
        self.orbit_sizes = np.array([len(orb) for orb in orbits], dtype=np.int64)
        self.orbit_nsq = self._nsq(self.orbit_reps[:, 0], self.orbit_reps[:, 1])
        self.orbit_ksq = self.k0 ** 2 * self.orbit_nsq.astype(float)

        # support arrays grouped by orbit (used by transforms and gathers)
        support = []
        support_orbit = []
        for oid, orb in enumerate(orbits):
            for mem in orb:
                support.append(mem)
                support_orbit.append(oid)
        self.support_pairs = np.array(support, dtype=np.int64)
        self.support_orbit = np.array(support_orbit, dtype=np.int64)
        self.n_support = len(support)
        counts = self.orbit_sizes
        self.orbit_starts = np.concatenate([[0], np.cumsum(counts)[:-1]])

        # flat positions of the support pairs in the FFT-ordered N x N table
        self.support_positions = self._positions(self.support_pairs, N)

        # orbit id table in FFT layout, -1 outside the retained support
        table = -np.ones((N, N), dtype=np.int64)
        table.flat[self.support_positions] = self.support_orbit
        self.orbit_table = table

        kmat = np.vstack([self.k1, self.k2])
        self.support_kvec = self.support_pairs @ kmat
        self.rep_kvec = self.orbit_reps @ kmat
        self._diff_cache: dict[tuple[int, str], np.ndarray] = {}

    @staticmethod
    def _positions(pairs: np.ndarray, size: int) -> np.ndarray:
        """Flat positions of signed index pairs in an FFT-ordered table."""
        return (pairs[:, 0] % size) * size + (pairs[:, 1] % size)

    # -- cached gather tables --------------------------------------------

    def padded_positions(self, oversample: int) -> np.ndarray:
        """Flat positions of the support pairs in the (o*N)^2 FFT table."""
        key = (oversample, "pad")
        if key not in self._diff_cache:
            self._diff_cache[key] = self._positions(self.support_pairs, oversample * self.N)
        return self._diff_cache[key]

    def diff_positions(self, oversample: int = 2) -> np.ndarray:
        """Gather table ``rep_o - support_j`` as flat (o*N)^2 positions.

        Row o, column j holds the position of the index difference between
        the representative of orbit o and the j-th support mode.  Used to
        read convolution entries of a multiplication operator from the
        Fourier table of the multiplier.
        """
        key = (oversample, "diff")
        if key not in self._diff_cache:
            diff = self.orbit_reps[:, None, :] - self.support_pairs[None, :, :]
            size = oversample * self.N
            pos = (diff[..., 0] % size) * size + (diff[..., 1] % size)
            self._diff_cache[key] = pos.astype(np.int64)
        return self._diff_cache[key]

    @cached_property
    def mean_orbit(self) -> int:
        oid = int(self.orbit_table[0, 0])
        assert oid == 0
        return oid

    @cached_property
    def l2_weights(self) -> np.ndarray:
        """Weights w_o with <f, g>_L2 = sum_o w_o a_o b_o."""
        return self.cell_area * self.orbit_sizes.astype(float)

    # -- public api -------------------------------------------------------

    def header(self) -> dict:
        """JSON-serialisable descriptor reused by all file formats."""
        return {"kind": self.kind.value, "k0": self.k0, "N": self.N}

    @staticmethod
    def from_header(header: dict) -> "LatticeSpec":
        return make_lattice(header["kind"], header["k0"], header["N"])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LatticeSpec)
            and self.kind == other.kind
            and self.k0 == other.k0
            and self.N == other.N
        )

    def __hash__(self) -> int:
        return hash((self.kind, self.k0, self.N))

    def __repr__(self) -> str:
        return f"LatticeSpec({self.kind.value}, k0={self.k0}, N={self.N})"


def make_lattice(kind: LatticeKind | str, k0: float, N: int) -> LatticeSpec:
    """Build a lattice descriptor; rejects k0 <= 0 and odd or tiny N."""
    return LatticeSpec(LatticeKind(kind), k0, N)


def dual_wavevector(lat: LatticeSpec, n1: int, n2: int) -> np.ndarray:
    """Cartesian wave vector ``n1*k1 + n2*k2``."""
    return n1 * lat.k1 + n2 * lat.k2


def symmetry_orbit(lat: LatticeSpec, pair: tuple[int, int]) -> frozenset[tuple[int, int]]:
    """Orbit of an index pair under the dihedral group and negation.

    The retained dihedral groups contain -identity, so closure under
    gamma -> -gamma is automatic.
    """
    n1, n2 = int(pair[0]), int(pair[1])
    if not lat._in_support(n1, n2):
        raise ValueError(f"index pair {(n1, n2)} outside truncation of {lat}")
    vec = np.array([n1, n2])
    return frozenset(tuple(int(x) for x in (gmat @ vec)) for gmat in lat.group)


def critical_wave_indices(lat: LatticeSpec) -> frozenset[tuple[int, int]]:
    """Index pairs whose dual wave vector has length exactly k0.

    Four pairs on the square lattice, six on the hexagon (the resonant
    triad together with its negatives).
    """
    return symmetry_orbit(lat, (1, 0))
