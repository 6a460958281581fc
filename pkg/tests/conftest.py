import numpy as np
import pytest

from czdomain import geometry, whitney


@pytest.fixture(scope="session")
def disk():
    return geometry.make_disk(1.0)


@pytest.fixture(scope="session")
def square():
    return geometry.unit_square()


@pytest.fixture(scope="session")
def disk_oc(disk):
    cov = whitney.build_covering(disk, min_side=2.0**-6, C_W=1.125)
    return whitney.orient(cov)


@pytest.fixture(scope="session")
def square_oc(square):
    cov = whitney.build_covering(square, min_side=2.0**-6, C_W=1.125)
    return whitney.orient(cov)


@pytest.fixture(scope="session")
def halfspace():
    return geometry.GraphDomain(d=2)


@pytest.fixture(scope="session")
def halfspace_oc(halfspace):
    cov = whitney.build_covering(halfspace, min_side=2.0**-8, C_W=1.125)
    return whitney.orient(cov)


@pytest.fixture(scope="session")
def zigzag05():
    return geometry.zigzag_graph_domain(np.random.default_rng(3), 0.5)


@pytest.fixture(scope="session")
def zigzag05_oc(zigzag05):
    cov = whitney.build_covering(zigzag05, min_side=2.0**-7, C_W=1.125)
    return whitney.orient(cov)
