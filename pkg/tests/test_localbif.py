import numpy as np
import pytest

from thinfilm import field as fld
from thinfilm import lattice as lt
from thinfilm import localbif as lb
from thinfilm import stationary as st


def test_kernel_element_square():
    lat = lt.make_lattice("square", 1.0, 32)
    khat = lb.kernel_element(lat, 1)
    assert fld.norm_X(khat) == pytest.approx(1.0, abs=1e-12)
    grid = fld.synthesize(khat)
    x = 2 * np.pi * np.arange(32) / 32
    ref = (2 * np.cos(x)[:, None] + 2 * np.cos(x)[None, :]) / (4 * np.pi * np.sqrt(3))
    assert np.abs(grid - ref).max() < 1e-12

    k2 = lb.kernel_element(lat, 2)
    active = np.nonzero(k2.coeffs)[0]
    assert len(active) == 1
    assert tuple(lat.orbit_reps[active[0]]) in {(-2, 0), (0, -2), (0, 2), (2, 0)}


def test_kernel_element_hexagon_origin_value():
    lat = lt.make_lattice("hexagon", 1.0, 32)
    khat = lb.kernel_element(lat, 1)
    norm = 4 * 3 ** 0.25 * np.pi * np.sqrt(3)
    assert fld.synthesize(khat)[0, 0] == pytest.approx(6.0 / norm, abs=1e-12)


def test_kernel_in_jacobian_nullspace(lat32):
    info = lb.locate_bifurcation(lat32, 1.5, 1)
    out = st.jacobian_apply(fld.zeros(lat32), info.M_crit, 1.5, info.kernel)
    assert fld.norm_L2(out) < 1e-10
    assert fld.norm_X(info.kernel) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("kind", ["square", "hexagon"])
def test_transversality(kind):
    lat = lt.make_lattice(kind, 1.0, 32)
    for g in (0.5, 1.0, 3.0):
        assert lb.transversality_check(lat, g, 1) == pytest.approx(0.25, abs=1e-12)


@pytest.mark.parametrize("kind", ["square", "hexagon"])
@pytest.mark.parametrize("g", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("k0", [0.5, 1.0, 2.0])
def test_expansion_matches_closed_form(kind, g, k0):
    lat = lt.make_lattice(kind, k0, 64)
    num = lb.expansion_coefficients(lat, g, 1)
    closed = lb.closed_form_coefficients(kind, g, k0)
    if kind == "square":
        assert num[0] == pytest.approx(0.0, abs=1e-12)
        assert num[1] == pytest.approx(closed[1], rel=1e-6)
        assert num[1] < 0  # subcritical pitchfork
    else:
        assert num[1] is None
        assert num[0] == pytest.approx(closed[0], rel=1e-6)
        assert num[0] > 0  # transcritical


def test_named_closed_form_values():
    _, mddot = lb.closed_form_coefficients("square", 1.0, 1.0)
    assert mddot == pytest.approx(-614.0 / (72.0 * np.pi ** 2), rel=1e-12)
    mdot, none = lb.closed_form_coefficients("hexagon", 1.0, 1.0)
    assert none is None
    assert mdot == pytest.approx(4.0 / (3.0 ** 0.75 * np.pi), rel=1e-12)


def test_harmonic_two_scaling():
    # a two-periods-per-cell branch has the one-period coefficients of the
    # doubled wave number, rescaled by the change of kernel normalisation
    lat = lt.make_lattice("square", 0.5, 64)
    num = lb.expansion_coefficients(lat, 1.0, 2)
    _, closed = lb.closed_form_coefficients("square", 1.0, 1.0)
    assert num[1] == pytest.approx(closed / 4.0, rel=1e-6)


# -- independent oracle: full-grid Newton continuation ------------------------

def brute_force_m_of_s(kind, g, k0, svals, N=16):
    """Solve F(v, M) = 0 with a kernel-amplitude phase condition on the
    plain (non-symmetric) grid and return M(s).  Independent of the
    package's reduced-orbit machinery: real-space unknowns, explicit
    dense Jacobian, least squares for the one redundant mean row.
    """
    n = np.fft.fftfreq(N, 1.0 / N)
    N1, N2 = np.meshgrid(n, n, indexing="ij")
    if kind == "square":
        ksq = k0 ** 2 * (N1 ** 2 + N2 ** 2)
        cell = (2 * np.pi / k0) ** 2
        pairs = [(1, 0), (-1, 0), (0, 1), (0, -1)]
        xnorm = (4 * np.pi / k0) * np.sqrt(1 + k0 ** 2 + k0 ** 4)
    else:
        ksq = k0 ** 2 * (N1 ** 2 + N2 ** 2 - N1 * N2)
        cell = 8 * np.pi ** 2 / (np.sqrt(3) * k0 ** 2)
        pairs = [(1, 0), (0, 1), (1, 1), (-1, 0), (0, -1), (-1, -1)]
        xnorm = 4 * 3 ** 0.25 * np.pi * np.sqrt(k0 ** 2 + 1 + 1 / k0 ** 2)

    tab = np.zeros((N, N), dtype=complex)
    for p in pairs:
        tab[p[0] % N, p[1] % N] = 1.0
    khat = np.real(np.fft.ifft2(tab)) * N * N / xnorm

    npts = N * N
    eye = np.eye(npts).reshape(npts, N, N)
    lap_mat = np.real(np.fft.ifft2(-ksq[None] * np.fft.fft2(eye))).reshape(npts, npts).T
    mstar = 4 * g + 4 * k0 ** 2

    def phi(v):
        return 1 / (2 + v) + np.log((1 + v) / (2 + v))

    def phi_p(v):
        return 1 / ((1 + v) * (2 + v) ** 2)

    out = {}
    for s in svals:
        v = s * khat.copy()
        M = mstar
        for _ in range(40):
            pv = phi(v)
            F = (
                np.real(np.fft.ifft2(-ksq * np.fft.fft2(v)))
                - g * v + M * (pv - pv.mean())
            )
            qnorm = (khat * khat).sum() / npts * cell
            phase = (v * khat).sum() / npts * cell - s * qnorm
            rows = np.concatenate([F.ravel(), [v.mean()], [phase]])
            if np.max(np.abs(rows)) < 1e-12:
                break
            q = phi_p(v).ravel()
            Jv = (
                lap_mat - g * np.eye(npts)
                + M * (np.diag(q) - np.outer(np.ones(npts) / npts, q))
            )
            A = np.vstack(
                [
                    np.concatenate([Jv, (pv - pv.mean()).reshape(-1, 1)], axis=1),
                    np.concatenate([np.ones(npts) / npts, [0.0]]),
                    np.concatenate([khat.ravel() * cell / npts, [0.0]]),
                ]
            )
            delta, *_ = np.linalg.lstsq(A, -rows, rcond=None)
            v = v + delta[:npts].reshape(N, N)
            M = M + delta[npts]
        out[s] = M
    return mstar, out


def test_square_curvature_against_brute_force():
    # pins the g-dependence of the closed form at g != 1
    g, k0 = 2.0, 1.0
    mstar, ms = brute_force_m_of_s("square", g, k0, [0.02, 0.01])
    c_fit = [(ms[s] - mstar) / s ** 2 for s in (0.02, 0.01)]
    c2 = 2 * c_fit[1] - c_fit[0]  # Richardson in s
    _, mddot = lb.closed_form_coefficients("square", g, k0)
    assert c2 == pytest.approx(mddot / 2.0, rel=1e-3)


def test_hexagon_slope_against_brute_force():
    g, k0 = 2.0, 1.0
    mstar, ms = brute_force_m_of_s("hexagon", g, k0, [0.01, -0.01, 0.005, -0.005])
    slope_1 = (ms[0.01] - ms[-0.01]) / 0.02
    slope_2 = (ms[0.005] - ms[-0.005]) / 0.01
    slope = (4 * slope_2 - slope_1) / 3
    mdot, _ = lb.closed_form_coefficients("hexagon", g, k0)
    assert slope == pytest.approx(mdot, rel=1e-5)


def test_locate_bifurcation_bundle():
    lat = lt.make_lattice("hexagon", 1.0, 32)
    info = lb.locate_bifurcation(lat, 1.0, 1)
    assert info.M_crit == pytest.approx(8.0)
    assert info.Mdot0 == pytest.approx(0.5585591590298035, rel=1e-10)
    assert info.Mddot0 is None
    payload = info.to_json()
    assert '"M_crit"' in payload
