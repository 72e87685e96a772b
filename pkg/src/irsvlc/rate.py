"""SINRs, capacities and the overall secrecy rate for an IRS assignment.

An assignment is an ``(N, L + 1)`` 0/1 integer array.  Column 0 collects the
units reflecting jamming light toward Eve; column ``l + 1`` the units
reinforcing LED ``l``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from irsvlc.channel import GainSet
from irsvlc.scene import Scene, ServiceModel

E_OVER_2PI = math.e / (2 * math.pi)


class InfeasibleAssignment(ValueError):
    pass


@dataclass(frozen=True)
class RateReport:
    sinr: np.ndarray        # (K, L)
    cap_user: np.ndarray    # (K, L) bit/s
    sinr_eve: np.ndarray    # (L,) Eve's SINR while LED l serves her target
    cap_eve: float          # bit/s
    secrecy: float          # bit/s, may be negative


def empty_assignment(n_units: int, n_leds: int) -> np.ndarray:
    return np.zeros((n_units, n_leds + 1), dtype=int)


def fairness_quota(n_units: int, n_leds: int) -> int:
    return n_units // (n_leds + 1)


def check_assignment(g: np.ndarray, n_units: int, n_leds: int) -> None:
    """Raise unless ``g`` is binary, one-hot per row and meets the column quota."""
    g = np.asarray(g)
    if g.shape != (n_units, n_leds + 1):
        raise InfeasibleAssignment(f"expected shape {(n_units, n_leds + 1)}, got {g.shape}")
    if not np.isin(g, (0, 1)).all():
        raise InfeasibleAssignment("entries must be 0 or 1")
    if n_units and not (g.sum(axis=1) == 1).all():
        raise InfeasibleAssignment("every unit must have exactly one target")
    quota = fairness_quota(n_units, n_leds)
    if (g.sum(axis=0) < quota).any():
        raise InfeasibleAssignment(f"every column needs at least {quota} units")


def is_feasible(g: np.ndarray, n_units: int, n_leds: int) -> bool:
    try:
        check_assignment(g, n_units, n_leds)
    except InfeasibleAssignment:
        return False
    return True


def interference_matrix(gains: GainSet, scene: Scene) -> np.ndarray:
    """``I[r, l]``: noise plus LoS power of every LED except ``l`` at receiver ``r``."""
    rho2 = scene.responsivity ** 2
    sq = (gains.h1 * scene.led_power) ** 2                 # (R, L)
    L = scene.n_leds
    others = sq @ (1.0 - np.eye(L))
    return scene.noise_var[:, None] + rho2[:, None] * others


def interference_plus_noise(gains: GainSet, scene: Scene, receiver: int, l: int) -> float:
    rho = scene.responsivity[receiver]
    total = scene.noise_var[receiver]
    for i in range(scene.n_leds):
        if i != l:
            total += rho ** 2 * (gains.h1[receiver, i] * scene.led_power[i]) ** 2
    return float(total)


def nlos_aggregate(gains: GainSet, g: np.ndarray) -> np.ndarray:
    """``s[r, l] = h2[r, :, l] . g[:, l + 1]`` for every receiver."""
    return np.einsum("rnl,nl->rl", gains.h2, np.asarray(g, dtype=float)[:, 1:])


def jamming_aggregate(gains: GainSet, svc: ServiceModel, g: np.ndarray) -> np.ndarray:
    """Reflected interference amplitude at Eve for each serving LED ``l``."""
    g0 = np.asarray(g, dtype=float)[:, 0]
    out = np.zeros(svc.l_c.shape[0])
    for l, lc in enumerate(svc.l_c):
        if lc >= 0:
            out[l] = gains.h2[gains.eve, :, lc] @ g0
    return out


def sinr_matrix(gains: GainSet, scene: Scene, g: np.ndarray, interference=None) -> np.ndarray:
    K = scene.n_users
    if interference is None:
        interference = interference_matrix(gains, scene)
    rho2 = scene.responsivity[:K, None] ** 2
    amp = gains.h1[:K] + nlos_aggregate(gains, g)[:K]
    return rho2 * amp ** 2 * scene.led_power ** 2 / interference[:K]


def sinr(gains: GainSet, scene: Scene, g: np.ndarray, k: int, l: int) -> float:
    rho = scene.responsivity[k]
    amp = gains.h1[k, l] + gains.h2[k, :, l] @ np.asarray(g, dtype=float)[:, l + 1]
    return float(rho ** 2 * amp ** 2 * scene.led_power[l] ** 2
                 / interference_plus_noise(gains, scene, k, l))


def capacity_user(sinr, bandwidth: float):
    """Dimmable-channel lower bound, (W/2) log2(1 + e/(2 pi) * sinr)."""
    val = 0.5 * bandwidth * np.log2(1.0 + E_OVER_2PI * np.asarray(sinr, dtype=float))
    return float(val) if np.ndim(val) == 0 else val


def sinr_eve(gains: GainSet, scene: Scene, svc: ServiceModel, g: np.ndarray, interference=None) -> np.ndarray:
    if interference is None:
        interference = interference_matrix(gains, scene)
    E = gains.eve
    rho2 = scene.responsivity[E] ** 2
    P = scene.led_power
    P_c = np.where(svc.l_c >= 0, P[np.maximum(svc.l_c, 0)], 0.0)
    jam = rho2 * P_c ** 2 * jamming_aggregate(gains, svc, g) ** 2
    return rho2 * gains.h1[E] ** 2 * P ** 2 / (interference[E] + jam)


def capacity_eve(gains: GainSet, scene: Scene, svc: ServiceModel, g: np.ndarray) -> float:
    f_target = svc.f[:, scene.target]
    cap = capacity_user(sinr_eve(gains, scene, svc, g), scene.consts.bandwidth)
    return float(f_target @ cap)


def secrecy_rate(gains: GainSet, scene: Scene, svc: ServiceModel, g: np.ndarray) -> RateReport:
    g = np.asarray(g)
    interference = interference_matrix(gains, scene)
    s = sinr_matrix(gains, scene, g, interference)
    cu = capacity_user(s, scene.consts.bandwidth)
    se = sinr_eve(gains, scene, svc, g, interference)
    ce = float(svc.f[:, scene.target] @ capacity_user(se, scene.consts.bandwidth))
    legit = float((svc.f.T * cu).sum())
    return RateReport(sinr=s, cap_user=cu, sinr_eve=se, cap_eve=ce, secrecy=legit - ce)
