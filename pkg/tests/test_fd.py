import math

import numpy as np
import pytest

from mwlab.immersions import gallery_get
from mwlab.jets import FieldDerivativeSpec, StencilError, field_derivative
from mwlab.jets.fd import CachedSampler, field_gradient, field_hessian
from mwlab.moebius import conformal_factor


def test_first_derivative_of_square():
    d = field_derivative(lambda u: u[0] ** 2, [1.0], (0,), FieldDerivativeSpec(step=1e-3))
    assert abs(d - 2.0) < 1e-8


def test_second_derivative_of_sine_at_zero():
    d = field_derivative(lambda u: math.sin(u[0]), [0.0], (0, 0))
    assert abs(d) < 1e-6


def test_mixed_and_directional_derivatives():
    f = lambda u: math.exp(u[0]) * math.sin(u[1])  # noqa: E731
    x = [0.3, 0.7]
    assert field_derivative(f, x, (0, 1)) == pytest.approx(math.exp(0.3) * math.cos(0.7), abs=1e-9)
    d = np.array([0.6, 0.8])
    want = 0.6 * math.exp(0.3) * math.sin(0.7) + 0.8 * math.exp(0.3) * math.cos(0.7)
    assert field_derivative(f, x, direction=d) == pytest.approx(want, abs=1e-10)


def test_vector_fields_and_hessian():
    f = lambda u: np.array([u[0] * u[1] ** 2, math.cos(u[0])])  # noqa: E731
    H = field_hessian(f, [1.0, 2.0])
    np.testing.assert_allclose(H[..., 0], [[0.0, 4.0], [4.0, 2.0]], atol=1e-7)
    np.testing.assert_allclose(H[0, 0, 1], -math.cos(1.0), atol=1e-8)
    g = field_gradient(f, [1.0, 2.0])
    np.testing.assert_allclose(g[:, 0], [4.0, 4.0], atol=1e-9)


@pytest.mark.parametrize("scheme", [2, 4])
@pytest.mark.parametrize("index", [(0,), (0, 0)])
@pytest.mark.parametrize("field", ["exp", "sin"])
def test_observed_order_matches_scheme(scheme, index, field):
    fn = getattr(math, field)
    x0 = 0.4
    exact = {("exp", 1): math.exp(x0), ("exp", 2): math.exp(x0), ("sin", 1): math.cos(x0), ("sin", 2): -math.sin(x0)}
    want = exact[(field, len(index))]
    errs = [
        abs(field_derivative(lambda u: fn(u[0]), [x0], index, FieldDerivativeSpec(h, 1, scheme)) - want)
        for h in (0.2, 0.1)
    ]
    order = math.log2(errs[0] / errs[1])
    assert abs(order - scheme) < 0.3


def test_richardson_improves_accuracy():
    f = lambda u: math.exp(u[0])  # noqa: E731
    e1 = abs(field_derivative(f, [0.0], (0,), FieldDerivativeSpec(0.1, 1, 2)) - 1.0)
    e2 = abs(field_derivative(f, [0.0], (0,), FieldDerivativeSpec(0.1, 2, 2)) - 1.0)
    e3 = abs(field_derivative(f, [0.0], (0,), FieldDerivativeSpec(0.1, 3, 2)) - 1.0)
    assert e3 < e2 < e1


def test_stencil_outside_domain_names_the_point():
    with pytest.raises(StencilError) as info:
        field_derivative(lambda u: u[0], [0.0], (0,), domain=([0.0], [1.0]))
    assert "-0.002" in str(info.value)


def test_sampler_failure_becomes_stencil_error():
    with pytest.raises(StencilError):
        field_derivative(lambda u: math.log(u[0]), [0.001], (0,), FieldDerivativeSpec(step=1e-3))


@pytest.mark.parametrize("kwargs", [{"step": 0.0}, {"richardson_levels": 4}, {"scheme": 3}])
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        FieldDerivativeSpec(**kwargs)


def test_cached_sampler_reuses_points():
    calls = []
    s = CachedSampler(lambda x: calls.append(1) or float(x[0] ** 2))
    field_hessian(s, [0.5])
    field_gradient(s, [0.5])
    assert len(calls) == len(s.cache)


def test_rho_field_of_veronese_is_constant():
    imm = gallery_get("veronese_s4")
    pts = imm.sample(50, 3)
    vals = [conformal_factor(imm, u) for u in pts]
    assert np.ptp(vals) < 1e-10
    for u in pts[:5]:
        g = field_gradient(lambda x: conformal_factor(imm, x), u)
        assert np.max(np.abs(g)) < 1e-6
