import numpy as np
import pytest

import rqtraj as rq


@pytest.fixture
def electron2():
    """Electron with E - U0 = 2 MeV above a vanishing constant potential."""
    return rq.PhysicalSetup(E=2.0, m0c2=0.511)


@pytest.fixture
def const_pot():
    return rq.ConstantPotential(0.0)


@pytest.fixture
def evanescent03():
    """Electron with E - U0 = 0.3 MeV < m0c2: classically forbidden."""
    return rq.PhysicalSetup(E=0.3, m0c2=0.511)


def oscillatory_wavenumber(setup, u0=0.0):
    """Independent oracle for k: direct formula evaluation."""
    ev = setup.E - u0
    return np.sqrt(ev * ev - setup.m0c2**2) / setup.hbar_c


@pytest.fixture
def const_basis(electron2):
    """Analytic basis over ~3.2 wavelengths at step 1/(100 k)."""
    k = oscillatory_wavenumber(electron2)
    h = 1.0 / (100 * k)
    n = int(round(3.2 * 2 * np.pi / k / h))
    return rq.solve_constant(electron2, 0.0, np.arange(n) * h)
