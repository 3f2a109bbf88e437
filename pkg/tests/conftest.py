import numpy as np
import pytest

from thinfilm import continuation as ct
from thinfilm import field as fld
from thinfilm import lattice as lt
from thinfilm import localbif as lb


def random_symmetric_field(lat, rng, amplitude=0.05, decay=0.5, mean_zero=True):
    """Random admissible-scale field with spectrally decaying coefficients."""
    c = amplitude * rng.standard_normal(lat.n_orbits)
    c *= np.exp(-decay * np.sqrt(lat.orbit_nsq))
    if mean_zero:
        c[lat.mean_orbit] = 0.0
    return fld.from_coeffs(lat, c)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture(scope="session", params=["square", "hexagon"])
def lat32(request):
    return lt.make_lattice(request.param, 1.0, 32)


def small_branch_state(kind, direction, n_steps, N=32, ds=0.02, g=1.0):
    """Converged branch state a few arclength steps from onset."""
    lat = lt.make_lattice(kind, 1.0, N)
    info = lb.locate_bifurcation(lat, g, 1)
    cfg = ct.ContinuationConfig(ds=ds, max_steps=n_steps, spectrum_stride=10 ** 6)
    seed = ct.seed_branch(info, direction, cfg)
    branch = ct.Branch(origin=info, direction=direction, g=g, points=[seed], config=cfg)
    branch = ct.extend_branch(branch, cfg)
    return branch.points[-1].state


@pytest.fixture(scope="session")
def square_state():
    return small_branch_state("square", +1, 8)


@pytest.fixture(scope="session")
def up_hexagon_state():
    return small_branch_state("hexagon", +1, 8)


@pytest.fixture(scope="session")
def down_hexagon_state():
    return small_branch_state("hexagon", -1, 8)
