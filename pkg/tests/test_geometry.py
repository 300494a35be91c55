import math

import numpy as np
import pytest

from mwlab import jets
from mwlab.ddvv import ddvv_report, planted_instance
from mwlab.geometry import (
    FundamentalForms,
    NotAnImmersion,
    frames,
    fundamental_forms,
    gauss_curvature_tensor,
    intrinsic_curvature_fd,
    shape_operators,
)
from mwlab.immersions import Immersion, gallery_get


def round_sphere(ambient):
    def f(u):
        t, p = u
        return [jets.sin(t) * jets.cos(p), jets.sin(t) * jets.sin(p), jets.cos(t)]

    return Immersion("S2", 2, 3, ambient, f, (0.3, 0.0), (2.8, 6.0))


def test_plane_frames_and_forms():
    imm = gallery_get("plane")
    fr = frames(imm, [0.1, 0.2, 0.3])
    np.testing.assert_allclose(fr.tangents, np.eye(5)[:3], atol=1e-15)
    np.testing.assert_allclose(np.abs(fr.normals @ np.eye(5)[3:].T), np.eye(2), atol=1e-15)
    ff = fundamental_forms(imm, [0.1, 0.2, 0.3])
    assert np.all(ff.h == 0) and np.all(ff.H == 0)


def test_sphere_as_hypersurface_of_itself_has_no_normals():
    with pytest.raises(NotAnImmersion):
        frames(round_sphere("sphere"), [1.0, 1.0])


def test_round_sphere_in_euclidean_space():
    imm = round_sphere("euclidean")
    u = [1.0, 2.0]
    fr = frames(imm, u)
    assert fr.codim == 1
    np.testing.assert_allclose(np.abs(fr.normals[0] @ imm.value(u)), 1.0, atol=1e-14)
    ff = fundamental_forms(imm, u)
    sign = np.sign(ff.H[0])
    np.testing.assert_allclose(ff.h[0], sign * np.eye(2), atol=1e-13)
    assert abs(np.linalg.norm(ff.H) - 1.0) < 1e-13


def test_degenerate_chart_is_rejected():
    imm = Immersion("fold", 2, 3, "euclidean", lambda u: [u[0] ** 2, u[0] ** 3, u[1]], (-1, -1), (1, 1))
    with pytest.raises(NotAnImmersion):
        frames(imm, [0.0, 0.5])


def test_frame_gram_conditions_on_clifford():
    imm = gallery_get("clifford", {"m": 3})
    for u in imm.sample(100, 3):
        fr = frames(imm, u)
        assert fr.tangents.shape == (2, 6) and fr.normals.shape == (3, 6)
        f = imm.value(u)
        np.testing.assert_allclose(fr.tangents @ fr.tangents.T, np.eye(2), atol=1e-10)
        np.testing.assert_allclose(fr.normals @ fr.normals.T, np.eye(3), atol=1e-10)
        assert np.max(np.abs(fr.tangents @ fr.normals.T)) < 1e-10
        assert np.max(np.abs(fr.normals @ f)) < 1e-10


def test_clifford_torus_principal_curvatures_against_hand_oracle():
    # f = r (cos x, sin x, cos y, sin y), r = 1/sqrt2; the unit normal in S^3 is
    # r (cos x, sin x, -cos y, -sin y) and f_xx . n = -r^2, f_yy . n = r^2
    imm = gallery_get("clifford", {"r": [1 / math.sqrt(2)] * 2, "theta": [0.0, math.pi / 2]})
    x, y = 0.7, 2.1
    r = 1 / math.sqrt(2)
    n = r * np.array([math.cos(x), math.sin(x), -math.cos(y), -math.sin(y)])
    fxx = -r * np.array([math.cos(x), math.sin(x), 0, 0])
    fyy = -r * np.array([0, 0, math.cos(y), math.sin(y)])
    want = np.diag([fxx @ n, fyy @ n]) / (r * r)
    ff = fundamental_forms(imm, [x, y])
    assert ff.h.shape == (1, 2, 2)
    np.testing.assert_allclose(np.abs(ff.h[0]), np.abs(want), atol=1e-13)
    np.testing.assert_allclose(sorted(np.linalg.eigvalsh(ff.h[0])), [-1.0, 1.0], atol=1e-13)
    assert abs(ff.H[0]) < 1e-14


def test_mean_curvature_is_trace_over_m():
    imm = gallery_get("hopf_veronese")
    for u in imm.sample(20, 1):
        ff = fundamental_forms(imm, u)
        np.testing.assert_allclose(ff.H, np.trace(ff.h, axis1=1, axis2=2) / 3, atol=1e-12)
        assert np.all(ff.h == np.swapaxes(ff.h, 1, 2))


def test_shape_operators_symmetric_on_many_points():
    imm = gallery_get("cone_of", {"base": "clifford", "base.m": 3})
    for u in imm.sample(1000, 4):
        for A in shape_operators(fundamental_forms(imm, u)):
            assert np.array_equal(A, A.T)


def test_shape_operators_round_trip_planted_data():
    h = planted_instance(3, 4, 0.4, [0.1, -0.2, 0.3, 0.0])
    ff = FundamentalForms(np.eye(3), h, np.trace(h, axis1=1, axis2=2) / 3, 0.0, None, None)
    for a, b in zip(shape_operators(ff), h):
        assert np.array_equal(a, b)
    zero = shape_operators(FundamentalForms(np.eye(2), np.zeros((2, 2, 2)), np.zeros(2), 0.0, None, None))
    assert not any(A.any() for A in zero)


@pytest.mark.parametrize("name,params", [("veronese_s4", {}), ("hopf_veronese", {}), ("clifford", {"m": 4})])
def test_chart_reparametrization_leaves_scalars_invariant(name, params):
    imm = gallery_get(name, params)
    rng = np.random.default_rng(5)
    m = imm.chart_dim
    M = rng.normal(size=(m, m)) + 2 * np.eye(m)
    Minv = np.linalg.inv(M)

    def g(v):
        return imm.func([sum(M[i, j] * v[j] for j in range(m)) for i in range(m)])

    other = Immersion("re", m, imm.embed_dim, imm.ambient, g)
    for u in imm.sample(10, 6):
        a, b = fundamental_forms(imm, u), fundamental_forms(other, Minv @ u)
        for q in (
            lambda ff: float(ff.H @ ff.H),
            lambda ff: float(np.sum(ff.h**2)) - m * float(ff.H @ ff.H),
        ):
            assert abs(q(a) - q(b)) < 1e-9
        ra, rb = ddvv_report(a.h, a.c), ddvv_report(b.h, b.c)
        for key in ("rho", "rho_perp", "h2", "gap"):
            assert abs(getattr(ra, key) - getattr(rb, key)) < 1e-9


@pytest.mark.parametrize(
    "name,params",
    [("veronese_s4", {}), ("hopf_veronese", {}), ("cone_of", {"base": "clifford", "base.m": 3}), ("clifford", {"m": 2})],
)
def test_intrinsic_curvature_matches_gauss_equation(name, params):
    imm = gallery_get(name, params)
    for u in imm.sample(3, 2):
        R_fd = intrinsic_curvature_fd(imm, u)
        R_gauss = gauss_curvature_tensor(fundamental_forms(imm, u))
        assert np.max(np.abs(R_fd - R_gauss)) < 1e-4
