import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from irsvlc.approx import (LN2, build_approx, delta_const, lemma1_coeffs, linearized_rate,
                           los_sinr_term, tangent_lambda, user_tangents, weights)
from irsvlc.channel import GainSet, gain_set
from irsvlc.config import reference_config
from irsvlc.rate import E_OVER_2PI, empty_assignment, secrecy_rate
from irsvlc.scene import Scene, build_scene

from conftest import random_scene, setup


def test_tangent_bound_fixed_points():
    assert lemma1_coeffs(1.0) == (0.5, 1.0)
    eta, xi = lemma1_coeffs(3.0)
    assert eta == 0.75
    assert eta * math.log2(3.0) + xi == pytest.approx(2.0, abs=1e-15)


def test_tangent_bound_is_tangent():
    for x0 in (0.01, 0.7, 5.0, 1e4):
        eta, xi = lemma1_coeffs(x0)
        h = x0 * 1e-6
        slope = (eta * math.log2(x0 + h) - eta * math.log2(x0 - h)) / (2 * h)
        assert slope == pytest.approx(1 / ((1 + x0) * LN2), rel=1e-6)


def test_tangent_bound_rejects_nonpositive():
    for bad in (0.0, -1.0, float("nan")):
        with pytest.raises(ValueError):
            lemma1_coeffs(bad)
    with pytest.raises(ValueError):
        lemma1_coeffs(np.array([1.0, 0.0]))


def test_tangent_bound_vectorized():
    eta, xi = lemma1_coeffs(np.array([1.0, 3.0]))
    np.testing.assert_allclose(eta, [0.5, 0.75])


@settings(max_examples=300)
@given(x=st.floats(1e-6, 1e8), x0=st.floats(1e-6, 1e8))
def test_tangent_bound_lower_bound(x, x0):
    eta, xi = lemma1_coeffs(x0)
    assert eta * math.log2(x) + xi <= math.log2(1 + x) + 1e-9


def test_lambda_and_delta_zero_without_units():
    scene, g, _ = setup(build_scene(reference_config(n_units=0)))
    assert tangent_lambda(g, 0) == 0.0
    assert delta_const(g) == 0.0


def test_lambda_and_delta_linear_in_reflectance():
    a = gain_set(build_scene(reference_config(n_units=8, reflectance=0.3)))
    b = gain_set(build_scene(reference_config(n_units=8, reflectance=0.6)))
    for k in range(4):
        assert tangent_lambda(b, k) == pytest.approx(2 * tangent_lambda(a, k), rel=1e-12)
    assert delta_const(b) == pytest.approx(2 * delta_const(a), rel=1e-12)


def test_lambda_by_hand(ref8):
    _, g, _ = ref8
    k = 1
    expected = g.h2[k].sum() / (4 * g.h1[k].sum())
    assert tangent_lambda(g, k) == pytest.approx(expected, rel=1e-12)
    lam = [tangent_lambda(g, k) for k in range(4)]
    assert max(lam) < 0.15
    assert delta_const(g) == pytest.approx(g.h2[4].sum() / 16, rel=1e-12)


def _base(setup_tuple):
    scene, g, svc = setup_tuple
    rep = secrecy_rate(g, scene, svc, empty_assignment(scene.n_units, scene.n_leds))
    return scene, g, svc, rep


def test_weights_vanish_without_reflection():
    scene, g, svc = setup(build_scene(reference_config(n_units=8, reflectance=0.0)))
    rep = secrecy_rate(g, scene, svc, empty_assignment(8, 4))
    st_ = build_approx(g, scene, svc, rep)
    assert np.all(st_.weights == 0)


def test_jamming_column_depends_only_on_eve(ref8):
    scene, g, svc, rep = _base(ref8)
    w = build_approx(g, scene, svc, rep).weights
    h2 = g.h2.copy()
    h2[:4] *= 3.0                       # perturb the users only
    w2 = weights(GainSet(h1=g.h1, h2=h2), scene, svc,
                 *[getattr(build_approx(g, scene, svc, rep), a) for a in ("eta_user", "eta_eve")],
                 delta_const(g))
    np.testing.assert_allclose(w2[:, 0], w[:, 0], rtol=1e-12)
    np.testing.assert_allclose(w2[:, 1:], 3 * w[:, 1:], rtol=1e-12)


def test_weights_one_user_one_led_by_hand():
    scene = Scene(room=(8, 8, 3), led_pos=[(2, 2, 3)], led_power=[2.0], user_pos=[(3, 2.5, 0.5)],
                  eve_pos=(6, 6, 0.5), target=0, unit_pos=[(3, 0, 2.0), (5, 0, 2.5)])
    scene, g, svc = setup(scene)
    eta = 0.4
    w = weights(g, scene, svc, eta, 0.9, 0.0)
    np.testing.assert_array_equal(w[:, 0], 0.0)
    expected = eta * 20e6 * g.h2[0, :, 0] / (g.h1[0, 0] * LN2)
    np.testing.assert_allclose(w[:, 1], expected, rtol=1e-12)
    lam = np.array([0.25])
    strict = weights(g, scene, svc, eta, 0.9, 0.0, lambda_user=lam)
    np.testing.assert_allclose(strict[:, 1], expected / 1.25, rtol=1e-12)


def test_bias_equals_exact_rate_without_units():
    scene, g, svc, rep = _base(setup(build_scene(reference_config(n_units=0))))
    st_ = build_approx(g, scene, svc, rep)
    assert st_.bias == pytest.approx(rep.secrecy, rel=1e-12)
    assert linearized_rate(st_.weights, st_.bias, empty_assignment(0, 4)) == st_.bias


def test_bias_independent_of_assignment(ref8):
    scene, g, svc, rep = _base(ref8)
    st_ = build_approx(g, scene, svc, rep)
    G1 = np.zeros((8, 5), dtype=int); G1[:, 0] = 1
    G2 = np.zeros((8, 5), dtype=int); G2[np.arange(8), np.arange(8) % 5] = 1
    for G in (G1, G2):
        assert linearized_rate(st_.weights, st_.bias, G) == pytest.approx(
            (st_.weights * G).sum() + st_.bias, rel=1e-12)
    # the bias only sees the gains and tangent points, never G
    rep2 = secrecy_rate(g, scene, svc, G2)
    a = build_approx(g, scene, svc, rep2)
    b = build_approx(g, scene, svc, rep2)
    assert a.bias == b.bias


def test_surrogate_tight_at_small_n(ref8):
    scene, g, svc, rep = _base(ref8)
    st_ = build_approx(g, scene, svc, rep)
    G = np.zeros((8, 5), dtype=int); G[np.arange(8), np.arange(8) % 5] = 1
    exact = secrecy_rate(g, scene, svc, G).secrecy
    approx = linearized_rate(st_.weights, st_.bias, G)
    assert abs(approx - exact) / abs(exact) < 0.05


def test_linearized_shape_mismatch():
    with pytest.raises(ValueError):
        linearized_rate(np.zeros((3, 3)), 0.0, np.zeros((3, 2)))


def test_los_term_and_tangent_modes(ref8):
    scene, g, svc, rep = _base(ref8)
    gamma = los_sinr_term(g, scene)
    np.testing.assert_allclose(gamma[:4], E_OVER_2PI * rep.sinr, rtol=1e-12)
    user = user_tangents(rep, svc, "user")
    assert np.all(user == user[:, :1])
    with pytest.raises(ValueError):
        user_tangents(rep, svc, "bogus")
    st_u = build_approx(g, scene, svc, rep, tangent="user")
    assert st_u.weights.shape == (8, 5)


def test_eve_factor_changes_only_jamming(ref8):
    scene, g, svc, rep = _base(ref8)
    a = build_approx(g, scene, svc, rep)
    b = build_approx(g, scene, svc, rep, eve_factor=4.0)
    np.testing.assert_array_equal(a.weights[:, 1:], b.weights[:, 1:])
    assert np.all(b.weights[:, 0] >= a.weights[:, 0])


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(0, 9))
def test_weights_nonnegative(seed, n):
    scene, g, svc = setup(random_scene(np.random.default_rng(seed), n))
    rep = secrecy_rate(g, scene, svc, empty_assignment(n, 2))
    st_ = build_approx(g, scene, svc, rep)
    assert np.all(st_.weights >= 0)
    assert np.isfinite(st_.bias)
