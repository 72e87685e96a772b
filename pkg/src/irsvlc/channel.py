"""Lambertian LoS gains and specular IRS (NLoS) gains."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from irsvlc.scene import LED_NORMAL, PD_NORMAL, PhysConsts, Scene


@dataclass(frozen=True)
class GainSet:
    """``h1[r, l]`` LoS and ``h2[r, n, l]`` NLoS gains; row ``r == K`` is Eve."""

    h1: np.ndarray
    h2: np.ndarray

    @property
    def eve(self) -> int:
        return self.h1.shape[0] - 1

    def to_csv(self, path) -> None:
        """Dump every gain as (receiver, unit, led, gain); unit is empty for LoS."""
        with open(Path(path), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["receiver", "unit", "led", "gain"])
            for r, l in np.ndindex(*self.h1.shape):
                writer.writerow([r, "", l, repr(float(self.h1[r, l]))])
            for r, n, l in np.ndindex(*self.h2.shape):
                writer.writerow([r, n, l, repr(float(self.h2[r, n, l]))])


def lambertian(dist, cos_irr, cos_inc, consts: PhysConsts):
    """Point-source Lambertian gain for path length ``dist``.

    Zero when either cosine is nonpositive or the incidence angle exceeds
    the field of view.
    """
    dist = np.asarray(dist, dtype=float)
    cos_irr = np.asarray(cos_irr, dtype=float)
    cos_inc = np.asarray(cos_inc, dtype=float)
    m = consts.lambertian_order
    visible = (cos_irr > 0) & (cos_inc > 0) & (cos_inc >= math.cos(consts.fov))
    c_irr = np.where(visible, cos_irr, 0.0)
    c_inc = np.where(visible, cos_inc, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = (consts.pd_area * (m + 1) / (2 * math.pi * dist ** 2)
             * c_irr ** m * consts.filter_gain * c_inc * consts.concentrator_gain)
    return np.where(visible, g, 0.0)


def los_gain(led, pd, consts: PhysConsts, led_normal=LED_NORMAL, pd_normal=PD_NORMAL) -> float:
    """Direct-path gain from an LED to a photodetector."""
    v = np.asarray(pd, dtype=float) - np.asarray(led, dtype=float)
    d = float(np.linalg.norm(v))
    if d == 0:
        raise ValueError("LED and photodetector coincide")
    cos_irr = float(np.dot(led_normal, v)) / d
    cos_inc = float(np.dot(pd_normal, -v)) / d
    return float(lambertian(d, cos_irr, cos_inc, consts))


def nlos_gain(led, unit, pd, consts: PhysConsts, led_normal=LED_NORMAL, pd_normal=PD_NORMAL) -> float:
    """Gain of the path LED -> IRS unit -> photodetector.

    The irradiance angle is taken at the LED toward the unit and the
    incidence angle at the PD from the unit, with the unfolded path length
    ``d(led, unit) + d(unit, pd)``.
    """
    led, unit, pd = (np.asarray(p, dtype=float) for p in (led, unit, pd))
    a, b = unit - led, pd - unit
    d1, d2 = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if d1 == 0 or d2 == 0 or np.allclose(led, pd, rtol=0, atol=0):
        raise ValueError("NLoS path has a zero-length segment")
    cos_irr = float(np.dot(led_normal, a)) / d1
    cos_inc = float(np.dot(pd_normal, -b)) / d2
    return consts.reflectance * float(lambertian(d1 + d2, cos_irr, cos_inc, consts))


def gain_set(scene: Scene) -> GainSet:
    """All LoS and NLoS gains of ``scene``, batched with numpy."""
    c = scene.consts
    rx = scene.receivers                                  # (R, 3)
    leds = scene.led_pos                                  # (L, 3)
    units = scene.unit_pos                                # (N, 3)

    v = rx[:, None, :] - leds[None, :, :]                 # (R, L, 3)
    d = np.linalg.norm(v, axis=-1)
    if np.any(d == 0):
        raise ValueError("LED and photodetector coincide")
    h1 = lambertian(d, v @ LED_NORMAL / d, -(v @ PD_NORMAL) / d, c)

    a = units[:, None, :] - leds[None, :, :]              # (N, L, 3) LED -> unit
    b = rx[:, None, :] - units[None, :, :]                # (R, N, 3) unit -> PD
    d1 = np.linalg.norm(a, axis=-1)
    d2 = np.linalg.norm(b, axis=-1)
    if np.any(d1 == 0) or np.any(d2 == 0):
        raise ValueError("NLoS path has a zero-length segment")
    cos_irr = (a @ LED_NORMAL) / d1 if units.size else np.empty((0, leds.shape[0]))
    cos_inc = -(b @ PD_NORMAL) / d2 if units.size else np.empty((rx.shape[0], 0))
    dist = d1[None, :, :] + d2[:, :, None]               # (R, N, L)
    h2 = c.reflectance * lambertian(dist, cos_irr[None, :, :], cos_inc[:, :, None], c)
    h2 = h2.reshape(rx.shape[0], units.shape[0], leds.shape[0])
    return GainSet(h1=h1, h2=h2)
