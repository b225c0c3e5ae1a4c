import numpy as np
import pytest

from vm_landau import equilibrium as eqm

# High-precision values (30-digit mpmath quadrature of the velocity-space and
# u-space definitions, computed independently of this package).
MAXWELLIAN_N1 = {
    "tau0_sq": 0.451510268827105100684372243492,
    "tau1_sq": 0.202877814245131189249901000994,
    "kappa0_sq": 1.01438907122565594624950500497,
    "q0_sq": 0.564890847245658219285576151994,
}
POWERLAW_M4_N1 = {
    "c0": 0.810569469138702171551035705678,  # = 8/pi^2
    "tau0_sq": 0.689839837994077561173913116163,
    "tau1_sq": 0.188138137634748425774703577135,
    "kappa0_sq": 1.03475975699111634176086967424,
    "q0_sq": 0.776069817743337256320652255683,
}


@pytest.fixture(scope="session")
def maxw():
    return eqm.maxwellian()


@pytest.fixture(scope="session")
def plaw():
    return eqm.powerlaw(4.0)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)
