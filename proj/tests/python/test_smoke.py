"""Smoke tests for the python bindings."""

import math

import numpy as np
import pytest

import splinegrad as sg


def test_fit_kpiecewise_exact_split():
    fit = sg.fit_kpiecewise([1.0, 2.0, 8.0, 9.0, 10.0], 2, 0)
    assert fit.cost == pytest.approx(2.5)
    assert list(fit.partition.cuts) == [2]
    assert fit.fitted == pytest.approx([1.5, 1.5, 9.0, 9.0, 9.0])


def test_vjp_block_average():
    fit = sg.fit_kpiecewise([4.0, 6.0], 1, 0)
    out = sg.vjp(sg.jacobian(fit), [1.0, 3.0])
    assert out == pytest.approx([2.0, 2.0])


def test_connected_components_and_means():
    image = np.array([[1.0, 0.0], [0.0, 1.0]])
    labels = sg.connected_components(image, 0.5)
    assert labels.component_count() == 4
    out = sg.pcw2d_forward(image, labels)
    np.testing.assert_allclose(out, image)


def test_pcw2d_idempotent():
    rng = np.random.default_rng(0)
    image = rng.uniform(size=(6, 6))
    labels = sg.connected_components(image, 0.5)
    once = sg.pcw2d_forward(image, labels)
    twice = sg.pcw2d_forward(once, labels)
    assert (once == twice).all()


def test_quarter_circle():
    curve = sg.NurbsCurve()
    curve.knots = sg.KnotVector(2, [0, 0, 0, 1, 1, 1])
    curve.ctrl = [(1, 0, 0), (1, 1, 0), (0, 1, 0)]
    curve.weights = [1.0, math.sqrt(2) / 2, 1.0]
    for u in np.linspace(0, 1, 25):
        x, y, _ = sg.eval_curve(curve, float(u))
        assert math.hypot(x, y) == pytest.approx(1.0, abs=1e-12)


def test_surface_eval_and_backward():
    surface = sg.NurbsSurface()
    surface.knots_u = sg.KnotVector.uniform_clamped(1, 2)
    surface.knots_v = sg.KnotVector.uniform_clamped(1, 2)
    surface.ctrl = [[(0, 0, 0), (0, 1, 0)], [(1, 0, 0), (1, 1, 1)]]
    surface.weights = [[1.0, 1.0], [1.0, 1.0]]
    pts, cache = sg.eval_surface_grid_with_cache(surface, 3, 3)
    assert pts.shape == (3, 3, 3)
    np.testing.assert_allclose(pts[1, 1], [0.5, 0.5, 0.25])

    upstream = np.zeros((3, 3, 3))
    upstream[1, 1] = [0.0, 0.0, 1.0]
    grads = sg.backward_surface(surface, cache, upstream)
    d_ctrl = np.asarray(grads.d_ctrl)
    assert d_ctrl.shape == (2, 2, 3)
    assert d_ctrl[:, :, 2] == pytest.approx(np.full((2, 2), 0.25))


def test_fit_surface_reduces_loss():
    target = sg.bukin_target(16, 16)
    cfg = sg.FitConfig()
    cfg.iterations = 100
    cfg.learning_rate = 0.5
    cfg.seed = 0
    init = sg.random_surface_for_target(target, 5, 5, 3, cfg.seed)
    report = sg.fit_surface(target, init, cfg)
    assert len(report.loss_history) == cfg.iterations + 1
    assert report.final_mse < report.loss_history[0]


def test_chamfer_matches_brute_force():
    rng = np.random.default_rng(1)
    p = rng.normal(size=(10, 3))
    q = rng.normal(size=(7, 3))
    d = sg.chamfer_distance(p, q)
    brute = sum(np.linalg.norm(q - a, axis=1).min() for a in p) + sum(
        np.linalg.norm(p - b, axis=1).min() for b in q
    )
    assert d == pytest.approx(brute, abs=1e-12)
    assert sg.chamfer_distance(p, p) == 0.0


def test_poisson_manufactured_solution():
    mesh = sg.StructuredMesh(16, 16, degree=1)
    coeffs, iterations, gmax = sg.solve_poisson(mesh, tol=1e-10)
    assert coeffs.shape == (17, 17)
    assert gmax <= 1e-10
    assert sg.l2_error_vs_exact(mesh, coeffs) <= 5e-3
    # Boundary is exactly zero.
    assert np.all(coeffs[0, :] == 0.0)
    assert np.all(coeffs[:, -1] == 0.0)


def test_diffusivity_and_quadrature():
    assert sg.diffusivity_field((0, 0, 0, 0), 0.3, 0.7) == pytest.approx(1.0)
    pts, wts = sg.gauss_quadrature(2)
    assert pts == pytest.approx([-1 / math.sqrt(3), 1 / math.sqrt(3)])
    assert wts == pytest.approx([1.0, 1.0])
    with pytest.raises(ValueError):
        sg.gauss_quadrature(9)


def test_infeasible_fit_raises():
    with pytest.raises(ValueError):
        sg.fit_kpiecewise([1.0, 2.0], 5, 0)
