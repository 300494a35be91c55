import math

import numpy as np
import pytest

from helpers import clifford_sets, nonminimal_clifford_set
from mwlab.ddvv import ddvv_report
from mwlab.geometry import fundamental_forms
from mwlab.immersions import (
    GALLERY,
    CliffordParams,
    GalleryError,
    LorentzMatrix,
    PoleError,
    apply_moebius,
    clifford,
    clifford_conditions,
    cone,
    gallery_get,
    hopf_veronese,
    inverse_stereo_point,
    lorentz_metric,
    moebius_image,
    random_moebius,
    stereo_point,
    stereographic,
    veronese_sphere,
)

SPHERE_MEMBERS = [
    ("veronese_s4", {}),
    ("veronese_s2k", {"k": 3}),
    ("clifford", {"m": 3}),
    ("clifford", {"r": "0.6,0.8", "theta": "0,1"}),
    ("hopf_veronese", {"n": 2}),
    ("hopf_veronese", {"n": 3}),
]


@pytest.mark.parametrize("name,params", SPHERE_MEMBERS)
def test_sphere_members_have_unit_norm(name, params):
    imm = gallery_get(name, params)
    assert imm.sphere
    vals = np.array([imm.value(u) for u in imm.sample(1000, 5)])
    assert np.max(np.abs(np.linalg.norm(vals, axis=1) - 1.0)) < 1e-10


def test_every_gallery_name_builds():
    for name in GALLERY:
        imm = gallery_get(name)
        assert imm.jet(imm.sample(1, 0)[0]).value.shape == (imm.embed_dim,)


def test_clifford_at_origin():
    r = 1 / math.sqrt(2)
    imm = clifford(CliffordParams((r, r), (0.0, math.pi / 2)))
    np.testing.assert_allclose(imm.value([0.0, 0.0]), [r, 0.0, r, 0.0], atol=1e-15)


def test_clifford_parameter_validation():
    with pytest.raises(GalleryError):
        CliffordParams((0.6, 0.8), (0.0, 0.0))
    with pytest.raises(GalleryError):
        CliffordParams((0.6, 0.8), (0.0, math.pi))
    with pytest.raises(GalleryError):
        CliffordParams((-0.6, 0.8), (0.0, 1.0))
    with pytest.raises(GalleryError):
        CliffordParams((0.6, 0.9), (0.0, 1.0))
    p = CliffordParams((0.6, 0.8 + 1e-8), (0.0, 1.0))  # normalized, not rejected
    assert abs(sum(x * x for x in p.radii) - 1.0) < 1e-12


def test_clifford_conditions_examples():
    third = 1 / math.sqrt(3)
    c = clifford_conditions([third] * 3, [0, math.pi / 3, 2 * math.pi / 3])
    assert max(c.values()) < 1e-15
    half = 1 / math.sqrt(2)
    c = clifford_conditions([half, half], [0, math.pi / 2])
    assert c["unit_sum"] < 1e-15 and c["minimal_defect"] < 1e-15
    assert c["wintgen_defect"] == pytest.approx(1.0)


def test_minimal_defect_matches_computed_mean_curvature():
    rng = np.random.default_rng(9)
    minimal = clifford_sets(9, 10)
    other = [nonminimal_clifford_set(rng) for _ in range(10)]
    for p in minimal + other:
        imm = clifford(p)
        H = max(np.linalg.norm(fundamental_forms(imm, u).H) for u in imm.sample(5, 1))
        is_min = clifford_conditions(p.radii, p.angles)["minimal_defect"] < 1e-9
        assert (H < 1e-7) == is_min


def test_veronese_s4_is_minimal_with_constant_curvature():
    imm = veronese_sphere(2)
    curv = []
    for u in imm.sample(100, 2):
        ff = fundamental_forms(imm, u)
        assert np.linalg.norm(ff.H) < 1e-8
        h = ff.h
        curv.append(1.0 + float(np.sum(h[:, 0, 0] * h[:, 1, 1] - h[:, 0, 1] ** 2)))
    assert np.ptp(curv) < 1e-6
    assert curv[0] == pytest.approx(1 / 3)


def test_veronese_s6_unit_norm_and_minimal():
    imm = gallery_get("veronese_s2k", {"k": 3})
    assert imm.embed_dim == 7
    for u in imm.sample(20, 4):
        assert abs(np.linalg.norm(imm.value(u)) - 1.0) < 1e-8
        assert np.linalg.norm(fundamental_forms(imm, u).H) < 1e-7


def test_hopf_veronese_origin():
    np.testing.assert_allclose(hopf_veronese(2).value([0.0, 0.0, 0.0]), [1, 0, 0, 0, 0, 0], atol=1e-15)


def test_cone_at_unit_height_and_its_metric():
    base = gallery_get("clifford", {"m": 3})
    c = cone(base, 1)
    assert (c.chart_dim, c.embed_dim, c.ambient) == (4, 7, "euclidean")
    w = np.array([0.4, 1.1])
    np.testing.assert_allclose(c.value([1.0, 0.3, *w]), [0.3, *base.value(w)], atol=1e-15)
    t = 1.7
    I = fundamental_forms(c, [t, 0.3, *w]).metric
    Ib = fundamental_forms(base, w).metric
    want = np.zeros((4, 4))
    want[0, 0] = want[1, 1] = 1.0
    want[2:, 2:] = t * t * Ib
    np.testing.assert_allclose(I, want, atol=1e-13)


def test_cone_rejects_euclidean_base():
    with pytest.raises(GalleryError):
        cone(gallery_get("plane"))


def test_gallery_parameter_errors():
    for name, params in [
        ("nope", {}),
        ("veronese_s2k", {"k": 1}),
        ("hopf_veronese", {"n": 1}),
        ("clifford", {"r": "-1,1", "theta": "0,1"}),
        ("veronese_s4", {"bogus": 1}),
        ("cone_of", {"base": "plane"}),
    ]:
        with pytest.raises(GalleryError):
            gallery_get(name, params)


def test_stereographic_projection_points():
    south = np.zeros(5)
    south[-1] = -1.0
    np.testing.assert_allclose(stereo_point(south), np.zeros(4), atol=1e-16)
    rng = np.random.default_rng(1)
    for y in rng.normal(size=(100, 4)):
        np.testing.assert_allclose(stereo_point(inverse_stereo_point(y)), y, atol=1e-12 * (1 + y @ y))
    north = -south
    with pytest.raises(PoleError):
        stereo_point(north)


def test_reambienting_preserves_wintgen_equality():
    imm = gallery_get("veronese_s4")
    flat = stereographic(imm)
    back = stereographic(flat, "euclid_to_sphere")
    for u in imm.sample(20, 8):
        g0 = ddvv_report(fundamental_forms(imm, u).h, 1.0).gap
        ff = fundamental_forms(flat, u)
        g1 = ddvv_report(ff.h, 0.0).gap
        g2 = ddvv_report(fundamental_forms(back, u).h, 1.0).gap
        assert abs(g0) < 1e-8 and abs(g1) < 1e-8 and abs(g2) < 1e-8
        np.testing.assert_allclose(back.value(u), imm.value(u), atol=1e-12)


def test_lorentz_group_elements():
    eta = lorentz_metric(4)
    for seed in range(20):
        T = random_moebius(4, seed).T
        assert np.max(np.abs(T.T @ eta @ T - eta)) < 1e-10 * max(1.0, np.max(np.abs(T)) ** 2)
    with pytest.raises(ValueError):
        LorentzMatrix(np.diag([1.0, 2.0, 1.0]))
    with pytest.raises(ValueError):
        LorentzMatrix(np.diag([-1.0, 1.0, 1.0]))


def test_basic_moebius_maps():
    rng = np.random.default_rng(2)
    n = 3
    ident, dil, inv = LorentzMatrix.identity(n), LorentzMatrix.dilation(n, 2.5), LorentzMatrix.inversion(n)
    c = rng.normal(size=n)
    tr = LorentzMatrix.translation(c)
    for x in rng.normal(size=(20, n)):
        np.testing.assert_allclose(apply_moebius(ident, x), x, atol=1e-12)
        np.testing.assert_allclose(apply_moebius(dil, x), 2.5 * x, atol=1e-12)
        np.testing.assert_allclose(apply_moebius(inv, x), x / (x @ x), atol=1e-12)
        np.testing.assert_allclose(apply_moebius(tr, x), x + c, atol=1e-12)
    with pytest.raises(PoleError):
        apply_moebius(inv, np.zeros(n))


def test_moebius_image_composes_pointwise():
    imm = gallery_get("hopf_veronese")
    T = random_moebius(imm.embed_dim, 4)
    img = moebius_image(imm, T)
    for u in imm.sample(10, 0):
        np.testing.assert_allclose(img.value(u), apply_moebius(T, imm.value(u)), atol=1e-10)
