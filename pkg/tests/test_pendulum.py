import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from flapinv.errors import DomainError
from flapinv.pendulum import (
    FlapGeometry,
    W,
    affine_equivalent,
    critical_points,
    critical_values,
    cusp_actions,
    cusp_point,
    cusps_csv,
    diagram_csv,
    diagram_svg,
    diverges_monotonically,
    edge_actions,
    endpoint_second_differences,
    flap_csv,
    flap_geometry,
    flap_svg,
    hyperbolic_level,
    quarter_exponent_fit,
    reduced_action,
    reduced_hamiltonian,
    reduced_orbit,
    reduction_check,
    separatrix_actions,
    wells,
)

JC = 0.3930036206175399
ZC = 0.66104980290069926
HC = 0.36122835721177793


@pytest.fixture(scope="module")
def diagram():
    return critical_values(np.linspace(-0.6, 0.6, 25))


@pytest.fixture(scope="module")
def flap(diagram):
    return flap_geometry(diagram, resolution=17)


def numeric_count(j):
    # independent oracle: sign changes of (1 - 2z)(1 - z^2)^2 + j^2 z on a fine grid
    z = np.linspace(-1 + 1e-12, 1 - 1e-12, 400001)
    n = (1 - 2 * z) * (1 - z * z) ** 2 + j * j * z
    return int(np.sum(np.signbit(n[1:]) != np.signbit(n[:-1])))


def test_critical_points_examples():
    pts = critical_points(0.0)
    assert len(pts) == 1 and pts[0][0] == pytest.approx(0.5, abs=1e-14)
    assert pts[0][1] == pytest.approx(0.25, abs=1e-14) and pts[0][2] == "max"
    assert [p[2] for p in critical_points(0.2)] == ["min", "max", "min"]
    assert [p[2] for p in critical_points(1.0)] == ["min"]
    for j in (0.1, 0.3, 0.5, 0.8):
        assert len(critical_points(j)) == numeric_count(j)


def test_cusp_location():
    jc, zc, hc = cusp_point()
    assert (jc, zc, hc) == pytest.approx((JC, ZC, HC), abs=1e-14)
    assert 8 * zc**3 - 3 * zc**2 - 1 == pytest.approx(0, abs=1e-14)
    # scan oracle: the count drops from three to one between jc - d and jc + d
    assert numeric_count(jc - 1e-6) == 3 and numeric_count(jc + 1e-6) == 1
    assert W(jc, zc) == pytest.approx(hc, abs=1e-14)


def test_diagram_has_one_flap(diagram):
    assert len(diagram.cusps) == 2
    assert [c[0] for c in diagram.cusps] == pytest.approx([-JC, JC], abs=1e-14)
    assert [v[2] for v in diagram.flap_vertices] == ["north pole"]
    assert diagram.has_flap
    assert set(diagram.counts) == {1, 3}
    far = critical_values(np.linspace(0.5, 1.0, 6))
    assert not far.has_flap and far.cusps == []


def test_reduction_and_energy():
    assert reduction_check(500, seed=1) <= 1e-9
    t, z, pz = reduced_orbit(0.3, 0.2, 0.1, 20.0)
    E = reduced_hamiltonian(0.3, z, pz)
    assert np.max(np.abs(E - E[0])) <= 1e-10


def test_additivity_across_hyperbolic_level():
    for j in (0.0, 0.2, -0.3):
        zs, hs = hyperbolic_level(j)
        below = reduced_action(j, hs - 1e-11, "flap-lower") + reduced_action(j, hs - 1e-11, "flap-upper")
        above = reduced_action(j, hs + 1e-11, "outer")
        assert above == pytest.approx(below, abs=1e-7)
        s, n, o = separatrix_actions(j)
        assert s + n == pytest.approx(o, abs=1e-14)
        assert s == pytest.approx(reduced_action(j, hs - 1e-11, "flap-lower"), abs=1e-7)


def test_action_vanishes_at_minimum_and_increases():
    zmin, hmin, _ = critical_points(1.0)[0]
    assert reduced_action(1.0, hmin + 1e-8, "outer") <= 1e-7
    hs = np.linspace(hmin + 0.01, hmin + 0.5, 6)
    vals = [reduced_action(1.0, h, "outer") for h in hs]
    assert np.all(np.diff(vals) > 0)
    with pytest.raises(DomainError):
        reduced_action(1.0, hmin + 0.1, "flap-upper")
    with pytest.raises(DomainError):
        reduced_action(1.0, 0.0, "inner")


def test_wells_are_labelled():
    zs, hs = hyperbolic_level(0.2)
    kinds = [w[0] for w in wells(0.2, hs - 0.01)]
    assert kinds == ["flap-lower", "flap-upper"]
    assert [w[0] for w in wells(0.2, hs + 0.01)] == ["outer"]


def test_closed_forms():
    s1, s2 = edge_actions(0.0)
    assert s1 == pytest.approx(math.sqrt(2) * (1 / 3 + math.sqrt(3) / (2 * math.pi)), abs=1e-12)
    s, n, o = cusp_actions(1)
    assert s == pytest.approx(1 / math.sqrt(2), abs=1e-12) and n == 0.0


def test_edge_relations_at_the_ends(flap):
    lam, S1, S2 = flap.arrays()
    assert S1[0] == pytest.approx(S2[0], abs=1e-10)
    assert flap.lam2 + S1[-1] == pytest.approx(S2[-1], abs=1e-10)
    assert np.all(S2 - S1 >= -1e-12)


def test_flap_image_grid_oracle(flap):
    lo, hi = flap.flap_image()
    for i in (3, 8, 12):
        l = flap.lam[i]
        zs, hs = hyperbolic_level(l)
        oracle = reduced_action(l, hs - 1e-10, "flap-upper") + max(0.0, l)
        assert hi[i] == pytest.approx(oracle, abs=1e-6)
        assert lo[i] == max(0.0, l)


def test_second_differences_diverge():
    seq = endpoint_second_differences(1, 1, steps=8)
    assert diverges_monotonically(seq)
    ratios = [b / a for (_, a), (_, b) in zip(seq[-4:], seq[-3:])]
    assert all(r == pytest.approx(2**0.75, abs=0.05) for r in ratios)


def test_quarter_exponent():
    a, a1, p = quarter_exponent_fit(lambda l: edge_actions(l)[0], -JC, 1.0, np.logspace(-6, -3, 8))
    assert p == pytest.approx(0.25, abs=0.02)


def test_affine_identity_and_planted_witness(flap):
    dec = affine_equivalent(flap, flap)
    assert dec.equivalent and dec.witness[:2] == (1, 0) and abs(dec.witness[2]) <= 1e-12
    moved = flap.transformed(1, 2, 5.0)
    dec = affine_equivalent(flap, moved)
    assert dec.equivalent and dec.witness[:2] == (1, 2) and dec.witness[2] == pytest.approx(5.0, abs=1e-12)
    flipped = flap.transformed(-1, 3, 0.25)
    assert affine_equivalent(flap, flipped).witness[:2] == (-1, 3)


def test_affine_rejects_scaled_height(flap):
    lam, S1, S2 = flap.arrays()
    other = FlapGeometry(flap.lam, flap.S1, tuple(S1 + 1.1 * (S2 - S1)), flap.lam1, flap.lam2)
    dec = affine_equivalent(flap, other)
    assert not dec.equivalent and dec.separating_feature["kind"] == "height-profile"
    short = FlapGeometry(flap.lam[:5], flap.S1[:5], flap.S2[:5], flap.lam1, flap.lam2)
    with pytest.raises(DomainError):
        affine_equivalent(flap, short)


def test_exports(diagram, flap):
    text = diagram_csv(diagram)
    assert text.splitlines()[0] == "branch,j,h" and text.endswith("\n")
    assert len(cusps_csv(diagram).splitlines()) == 3
    assert flap_csv(flap).count("\n") == len(flap.lam) + 1
    for svg in (diagram_svg(diagram, "stamp-1"), flap_svg(flap, "stamp-1")):
        root = ET.fromstring(svg)
        assert root.tag.endswith("svg")
        assert "stamp-1" in svg
