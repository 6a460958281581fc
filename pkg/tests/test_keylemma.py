import math

import numpy as np
import pytest

from czdomain import czop, fields, geometry, keylemma, whitney


@pytest.fixture(scope="module")
def kernel():
    return czop.beurling_kernel()


def test_domain_quadrature_areas(disk, square, halfspace):
    pts, w = keylemma.domain_quadrature(disk)
    assert np.sum(w) == pytest.approx(math.pi, rel=1e-12)
    pts, w = keylemma.domain_quadrature(square)
    assert np.sum(w) == pytest.approx(1.0, rel=1e-12)
    pts, w = keylemma.domain_quadrature(halfspace)
    assert np.sum(w) == pytest.approx(halfspace.area(), rel=1e-6)


def test_sobolev_norm_disk_constant(disk):
    r = keylemma.sobolev_norm(disk, fields.constant(1.0), 1, 2.0)
    assert r["full"] == pytest.approx(math.sqrt(math.pi), rel=1e-12)
    assert r["reduced"] == pytest.approx(math.sqrt(math.pi), rel=1e-12)


def test_sobolev_norm_square_linear(square):
    r = keylemma.sobolev_norm(square, fields.coordinate(0), 1, 2.0)
    # ||x1||_2 = 1/sqrt(3), ||grad||_2 = 1: closed forms
    assert r["terms"][str((0, 0))] == pytest.approx(1 / math.sqrt(3), rel=1e-12)
    assert r["terms"][str((1, 0))] == pytest.approx(1.0, rel=1e-12)
    assert r["full"] == pytest.approx(1 / math.sqrt(3) + 1.0, rel=1e-12)


def test_sobolev_norm_monotone_in_order(square):
    f = fields.sin_product([math.pi, math.pi])
    n1 = keylemma.sobolev_norm(square, f, 1, 2.0)["full"]
    n2 = keylemma.sobolev_norm(square, f, 2, 2.0)["full"]
    assert n2 >= n1


def test_norm_equivalence_full_vs_reduced(disk, square):
    worst = 0.0
    for dom in (disk, square):
        for f in keylemma.default_suite():
            r = keylemma.sobolev_norm(dom, f, 2, 2.0)
            worst = max(worst, r["full"] / r["reduced"])
            assert r["reduced"] <= r["full"] + 1e-12
    assert worst < 100.0


def test_keylemma_sum_zero_field(disk_oc, kernel):
    zero = fields.constant(0.0)
    assert keylemma.keylemma_sum(disk_oc, kernel, zero, 1, 2.0)["sum"] == 0.0


def test_keylemma_sum_disk_vanishes(disk_oc, kernel):
    for f in (fields.sin_product([1.0, 1.0]), fields.exp_coordinate(0)):
        for n in (1, 2):
            rep = keylemma.keylemma_sum(disk_oc, kernel, f, n, 2.0)
            assert rep["sum"] < 1e-10 * rep["n_cubes"]


def test_keylemma_sum_homogeneity(square_oc, kernel):
    f = fields.sin_product([1.0, 0.7])
    tf = fields.SumField([(3.0, f)])
    s1 = keylemma.keylemma_sum(square_oc, kernel, f, 1, 2.0)["sum"]
    s3 = keylemma.keylemma_sum(square_oc, kernel, tf, 1, 2.0)["sum"]
    assert s3 == pytest.approx(3.0**2.0 * s1, rel=1e-9)


def test_averaging_constant_and_linear(disk_oc):
    av = keylemma.averaging(disk_oc, fields.constant(2.5))
    assert max(abs(v - 2.5) for v in av.values()) < 1e-12
    # mean of a linear function over a symmetric box is its center value
    f = fields.coordinate(0)
    av = keylemma.averaging(disk_oc, f)
    centers = disk_oc.cov.centers
    for i in range(0, len(centers), 97):
        assert av[i] == pytest.approx(centers[i][0], abs=1e-12)


def test_averaging_lp_bound(disk_oc):
    rep = keylemma.averaging_lp_report(disk_oc, fields.sin_product([2.0, 1.0]), 2.0)
    assert rep["constant"] < 4.0  # overlap-controlled averaging bound


def test_averaging_reproduces_polynomial_means(disk_oc):
    from czdomain.poly import Poly

    q = Poly(np.zeros(2), {(0, 0): 0.5, (1, 0): 1.0, (0, 1): -2.0})
    av = keylemma.averaging(disk_oc, q.as_field())
    c = disk_oc.cov.centers[5]
    assert av[5] == pytest.approx(0.5 + c[0] - 2 * c[1], abs=1e-12)


def test_boundedness_probe_disk(disk_oc, kernel):
    rep = keylemma.boundedness_probe(disk_oc, kernel, 1, 2.0)
    assert rep["sup_ratio"] < 1e-10


def test_boundedness_probe_square_dichotomy_direction(square, kernel):
    """p = 2.5 ratios grow monotonically with depth; p = 1.5 growth rates
    shrink toward stability (corner divergence vs convergence)."""
    sups = {1.5: [], 2.5: []}
    for dexp in (5, 6, 7):
        cov = whitney.build_covering(square, 2.0**-dexp, C_W=1.125)
        oc = whitney.orient(cov)
        for p in sups:
            sups[p].append(keylemma.boundedness_probe(oc, kernel, 1, p)["sup_ratio"])
    for p in sups:
        assert all(b > a for a, b in zip(sups[p], sups[p][1:]))
    r15 = [b / a for a, b in zip(sups[1.5], sups[1.5][1:])]
    r25 = [b / a for a, b in zip(sups[2.5], sups[2.5][1:])]
    assert r15[-1] < r15[0]  # converging
    assert r25[-1] > r15[-1] + 0.15  # divergent exponent clearly separated
