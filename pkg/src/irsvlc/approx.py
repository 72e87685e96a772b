"""Linear surrogate of the secrecy rate in the assignment variables.

Each log2(1 + x) capacity term is replaced by its tangent lower bound
eta*log2(x) + xi, the NLoS ratio inside the user terms is expanded to first
order around ``lambda_k`` and the jamming term around zero.  The result is
``C_hat(G) = sum(w * G) + Q``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from irsvlc.channel import GainSet
from irsvlc.rate import E_OVER_2PI, RateReport, interference_matrix
from irsvlc.scene import Scene, ServiceModel

LN2 = math.log(2.0)


@dataclass(frozen=True)
class ApproxState:
    """Surrogate coefficients.  Tangent coefficients are stored per link:
    ``eta_user[k, l]`` for user ``k`` served by LED ``l`` and ``eta_eve[l]``
    for Eve while LED ``l`` serves her target."""

    eta_user: np.ndarray    # (K, L)
    xi_user: np.ndarray     # (K, L)
    eta_eve: np.ndarray     # (L,)
    xi_eve: np.ndarray      # (L,)
    lambda_user: np.ndarray  # (K,)
    gamma_los: np.ndarray   # (K + 1, L), Eve last
    delta_const: float
    weights: np.ndarray     # (N, L + 1)
    bias: float             # bit/s


def lemma1_coeffs(tangent):
    """Coefficients of the tangent bound eta*log2(x) + xi <= log2(1 + x).

    Equality holds at ``x == tangent``.  Accepts scalars or arrays.
    """
    x = np.asarray(tangent, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("tangent point must be strictly positive")
    eta = x / (1.0 + x)
    xi = np.log2(1.0 + x) - eta * np.log2(x)
    if eta.ndim == 0:
        return float(eta), float(xi)
    return eta, xi


def tangent_lambda(gains: GainSet, k: int) -> float:
    L = gains.h1.shape[1]
    los = gains.h1[k].sum()
    if not los > 0:
        raise ValueError(f"receiver {k} sees no LoS gain")
    return float(gains.h2[k].sum() / (L * los))


def delta_const(gains: GainSet) -> float:
    L = gains.h1.shape[1]
    return float(gains.h2[gains.eve].sum() / L ** 2)


def los_sinr_term(gains: GainSet, scene: Scene, interference=None) -> np.ndarray:
    """``Gamma[r, l] = e rho^2 h1^2 P^2 / (2 pi I)`` for all receivers."""
    if interference is None:
        interference = interference_matrix(gains, scene)
    rho2 = scene.responsivity[:, None] ** 2
    return E_OVER_2PI * rho2 * gains.h1 ** 2 * scene.led_power ** 2 / interference


TANGENT_MODES = ("link", "user")


def user_tangents(report: RateReport, svc: ServiceModel, mode: str = "link") -> np.ndarray:
    """Tangent points (arguments of log2(1 + x)) for the user terms, shape (K, L).

    ``"link"`` expands every (k, l) term at its own SINR; ``"user"`` shares
    one point per user, the service-weighted mean SINR.
    """
    x = E_OVER_2PI * report.sinr
    if mode == "link":
        return x
    if mode != "user":
        raise ValueError(f"unknown tangent mode {mode!r}")
    f = svc.f                                           # (L, K)
    mean = (f.T * x).sum(axis=1) / f.sum(axis=0)
    return np.repeat(mean[:, None], x.shape[1], axis=1)


def eve_tangents(report: RateReport, svc: ServiceModel, target: int, mode: str = "link") -> np.ndarray:
    x = E_OVER_2PI * report.sinr_eve
    if mode == "link":
        return x
    if mode != "user":
        raise ValueError(f"unknown tangent mode {mode!r}")
    f = svc.f[:, target]
    return np.full(x.shape, (f @ x) / f.sum())


def weights(gains: GainSet, scene: Scene, svc: ServiceModel, eta_user, eta_eve,
            delta: float, lambda_user=None, interference=None) -> np.ndarray:
    """Per-unit, per-target gains of the linear surrogate, shape (N, L + 1).

    Passing ``lambda_user`` divides the user columns by ``1 + lambda_k``
    as the first-order expansion strictly requires.
    """
    K, L, N = scene.n_users, scene.n_leds, scene.n_units
    W = scene.consts.bandwidth
    eta_user = np.broadcast_to(np.asarray(eta_user, dtype=float), (K, L))
    eta_eve = np.broadcast_to(np.asarray(eta_eve, dtype=float), (L,))
    f = svc.f
    h1 = gains.h1[:K]
    if np.any((h1 <= 0) & (f.T > 0)):
        raise ValueError("zero LoS gain on a link with nonzero service probability")
    with np.errstate(divide="ignore", invalid="ignore"):
        coef = np.where(f.T > 0, eta_user * W * f.T / (h1 * LN2), 0.0)  # (K, L)
    if lambda_user is not None:
        coef = coef / (1.0 + np.asarray(lambda_user, dtype=float))[:, None]
    w = np.zeros((N, L + 1))
    w[:, 1:] = np.einsum("kl,knl->nl", coef, gains.h2[:K])

    if interference is None:
        interference = interference_matrix(gains, scene)
    E = gains.eve
    rho2 = scene.responsivity[E] ** 2
    f_t = f[:, scene.target]
    for i, ic in enumerate(svc.l_c):
        if ic < 0:
            continue
        scale = (eta_eve[i] * f_t[i] * W * rho2 * scene.led_power[ic] ** 2 * delta
                 / (2 * interference[E, i] * LN2))
        w[:, 0] += scale * gains.h2[E, :, ic]
    return w


def bias_q(gains: GainSet, scene: Scene, svc: ServiceModel, eta_user, xi_user, eta_eve,
           xi_eve, lambda_user, gamma_los=None) -> float:
    """Assignment-independent part of the surrogate, in bit/s."""
    K, L = scene.n_users, scene.n_leds
    W = scene.consts.bandwidth
    if gamma_los is None:
        gamma_los = los_sinr_term(gains, scene)
    if np.any(gamma_los <= 0):
        raise ValueError("LoS SINR term must be strictly positive")
    eta_user = np.broadcast_to(np.asarray(eta_user, dtype=float), (K, L))
    xi_user = np.broadcast_to(np.asarray(xi_user, dtype=float), (K, L))
    lam = np.asarray(lambda_user, dtype=float)[:, None]
    taylor = W * eta_user * (-lam / ((1 + lam) * LN2) + np.log2(1 + lam))
    los = 0.5 * W * (xi_user + eta_user * np.log2(gamma_los[:K]))
    users = float((svc.f.T * (taylor + los)).sum())
    f_t = svc.f[:, scene.target]
    eve = float(f_t @ (0.5 * W * (xi_eve + eta_eve * np.log2(gamma_los[gains.eve]))))
    return users - eve


def linearized_rate(w: np.ndarray, q: float, g: np.ndarray) -> float:
    w = np.asarray(w)
    g = np.asarray(g)
    if w.shape != g.shape:
        raise ValueError(f"weights {w.shape} and assignment {g.shape} disagree")
    return float((w * g).sum() + q)


def build_approx(gains: GainSet, scene: Scene, svc: ServiceModel, report: RateReport,
                 eve_factor: float | None = None, strict_weights: bool = False,
                 tangent: str = "link") -> ApproxState:
    """Surrogate coefficients with tangent points taken from the rates in ``report``.

    ``eve_factor`` scales Eve's tangent points away from her true SINR.
    """
    K = scene.n_users
    interference = interference_matrix(gains, scene)
    eta_u, xi_u = lemma1_coeffs(user_tangents(report, svc, tangent))
    x_e = eve_tangents(report, svc, scene.target, tangent)
    if eve_factor is not None:
        x_e = eve_factor * x_e
    eta_e, xi_e = lemma1_coeffs(x_e)
    lam = np.array([tangent_lambda(gains, k) for k in range(K)])
    gamma = los_sinr_term(gains, scene, interference)
    delta = delta_const(gains)
    w = weights(gains, scene, svc, eta_u, eta_e, delta,
                lambda_user=lam if strict_weights else None, interference=interference)
    q = bias_q(gains, scene, svc, eta_u, xi_u, eta_e, xi_e, lam, gamma)
    return ApproxState(eta_user=eta_u, xi_user=xi_u, eta_eve=eta_e, xi_eve=xi_e,
                       lambda_user=lam, gamma_los=gamma, delta_const=delta,
                       weights=w, bias=q)
