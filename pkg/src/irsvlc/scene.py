"""Room geometry, physical constants and the LED service model."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

ArrayLike = Union[float, Sequence[float], np.ndarray]

# LEDs face the floor, photodetectors face the ceiling.
LED_NORMAL = np.array([0.0, 0.0, -1.0])
PD_NORMAL = np.array([0.0, 0.0, 1.0])


class SceneError(ValueError):
    """Raised for geometrically or physically invalid scenarios."""


def _readonly(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


def dbw_to_watt(p_dbw: ArrayLike) -> np.ndarray:
    return 10.0 ** (np.asarray(p_dbw, dtype=float) / 10.0)


@dataclass(frozen=True)
class PhysConsts:
    """Optical front-end and link constants (SI units, angles in radians).

    ``responsivity`` and ``noise_var`` may be scalars shared by every
    receiver or sequences with one entry per receiver, users first and the
    eavesdropper last.
    """

    pd_area: float = 4e-4
    lambertian_order: float = 1.0
    filter_gain: float = 1.0
    fov: float = math.radians(80.0)
    refractive_index: float = 1.5
    reflectance: float = 0.5
    responsivity: ArrayLike = 0.5
    noise_var: ArrayLike = 1e-10
    bandwidth: float = 20e6
    unit_area: float = 1e-2

    def __post_init__(self):
        for name in ("pd_area", "lambertian_order", "filter_gain", "fov",
                     "refractive_index", "bandwidth", "unit_area"):
            if not getattr(self, name) > 0:
                raise SceneError(f"{name} must be strictly positive")
        if not 0.0 <= self.reflectance <= 1.0:
            raise SceneError("reflectance must lie in [0, 1]")
        if self.fov > math.pi / 2 + 1e-12:
            raise SceneError("FoV semi-angle must not exceed pi/2")
        for name in ("responsivity", "noise_var"):
            val = np.asarray(getattr(self, name), dtype=float)
            if np.any(val <= 0):
                raise SceneError(f"{name} must be strictly positive")
            object.__setattr__(self, name, float(val) if val.ndim == 0 else tuple(val.tolist()))

    @property
    def concentrator_gain(self) -> float:
        """Lens gain inside the field of view, u^2 / sin^2(FoV)."""
        return self.refractive_index ** 2 / math.sin(self.fov) ** 2

    def per_receiver(self, name: str, n_receivers: int) -> np.ndarray:
        val = np.asarray(getattr(self, name), dtype=float)
        if val.ndim == 0:
            return np.full(n_receivers, float(val))
        if val.shape != (n_receivers,):
            raise SceneError(f"{name} needs {n_receivers} entries, got {val.size}")
        return val.copy()


@dataclass(frozen=True)
class WallGrid:
    """Planar IRS on the y=0 wall, units on a regular grid.

    Rows run along x, filled left to right, and successive rows are stacked
    in ``fill`` order (``"bottom-up"`` from the lower margin, ``"top-down"``
    from the upper one).
    """

    spacing: float = 0.2
    margin_h: float = 1.0
    margin_v: float = 0.3
    fill: str = "top-down"

    def slots(self, room: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
        width, height = room[0], room[2]
        xs = _grid_axis(self.margin_h, width - self.margin_h, self.spacing)
        zs = _grid_axis(self.margin_v, height - self.margin_v, self.spacing)
        if self.fill == "top-down":
            zs = zs[::-1]
        elif self.fill != "bottom-up":
            raise SceneError(f"unknown fill order {self.fill!r}")
        return xs, zs

    def capacity(self, room: Sequence[float]) -> int:
        xs, zs = self.slots(room)
        return xs.size * zs.size

    def layout(self, n_units: int, room: Sequence[float]) -> np.ndarray:
        if n_units < 0:
            raise SceneError("number of IRS units must be nonnegative")
        xs, zs = self.slots(room)
        cap = xs.size * zs.size
        if n_units > cap:
            raise SceneError(f"{n_units} IRS units exceed wall capacity of {cap}")
        idx = np.arange(n_units)
        row, col = np.divmod(idx, xs.size)
        return np.column_stack([xs[col], np.zeros(n_units), zs[row]])


def _grid_axis(lo: float, hi: float, step: float) -> np.ndarray:
    if step <= 0:
        raise SceneError("IRS spacing must be positive")
    if hi < lo:
        return np.empty(0)
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


@dataclass(frozen=True)
class Scene:
    """Immutable snapshot of the room: LEDs, users, Eve and IRS units.

    ``target`` is the 0-based index of the user Eve listens to.
    """

    room: np.ndarray
    led_pos: np.ndarray
    led_power: np.ndarray
    user_pos: np.ndarray
    eve_pos: np.ndarray
    target: int
    unit_pos: np.ndarray
    consts: PhysConsts = field(default_factory=PhysConsts)

    def __post_init__(self):
        object.__setattr__(self, "room", _readonly(self.room))
        object.__setattr__(self, "led_pos", _readonly(self.led_pos).reshape(-1, 3))
        object.__setattr__(self, "led_power", _readonly(self.led_power).reshape(-1))
        object.__setattr__(self, "user_pos", _readonly(self.user_pos).reshape(-1, 3))
        object.__setattr__(self, "eve_pos", _readonly(self.eve_pos).reshape(3))
        object.__setattr__(self, "unit_pos", _readonly(self.unit_pos).reshape(-1, 3))
        L, K = self.led_pos.shape[0], self.user_pos.shape[0]
        if L < 1:
            raise SceneError("at least one LED is required")
        if K < 1:
            raise SceneError("at least one user is required")
        if self.led_power.shape != (L,):
            raise SceneError("one emission power per LED is required")
        if np.any(self.led_power < 0):
            raise SceneError("emission powers must be nonnegative")
        if not 0 <= self.target < K:
            raise SceneError(f"eavesdropper target {self.target} is not a user index")
        pts = np.vstack([self.led_pos, self.user_pos, self.eve_pos[None], self.unit_pos])
        tol = 1e-9
        if np.any(pts < -tol) or np.any(pts > self.room + tol):
            raise SceneError("all positions must lie inside the room")
        if np.unique(np.round(pts, 9), axis=0).shape[0] != pts.shape[0]:
            raise SceneError("duplicate positions in scene")
        self.consts.per_receiver("responsivity", K + 1)
        self.consts.per_receiver("noise_var", K + 1)

    @property
    def n_leds(self) -> int:
        return self.led_pos.shape[0]

    @property
    def n_users(self) -> int:
        return self.user_pos.shape[0]

    @property
    def n_units(self) -> int:
        return self.unit_pos.shape[0]

    @property
    def receivers(self) -> np.ndarray:
        """Photodetector positions, users first and the eavesdropper last."""
        return np.vstack([self.user_pos, self.eve_pos[None]])

    @property
    def responsivity(self) -> np.ndarray:
        return self.consts.per_receiver("responsivity", self.n_users + 1)

    @property
    def noise_var(self) -> np.ndarray:
        return self.consts.per_receiver("noise_var", self.n_users + 1)


@dataclass(frozen=True)
class ServiceModel:
    """``f[l, k]``: probability LED ``l`` serves user ``k``.

    ``l_c[l]`` is the LED whose light is reflected onto Eve while ``l``
    serves her target; -1 when the scene has a single LED and no jamming
    source exists.
    """

    f: np.ndarray
    l_c: np.ndarray


def service_probabilities(scene: Scene) -> np.ndarray:
    d2 = ((scene.led_pos[:, None, :] - scene.user_pos[None, :, :]) ** 2).sum(-1)
    if np.any(d2 <= 0):
        raise SceneError("an LED coincides with a user position")
    inv = 1.0 / d2
    return inv / inv.sum(axis=1, keepdims=True)


def complementary_led(scene: Scene, l: int) -> int:
    """LED nearest to Eve, skipping ``l`` itself."""
    if scene.n_leds < 2:
        raise SceneError("a complementary LED needs at least two LEDs")
    if not 0 <= l < scene.n_leds:
        raise IndexError(l)
    d2 = ((scene.led_pos - scene.eve_pos) ** 2).sum(-1)
    order = np.argsort(d2, kind="stable")
    return int(order[0] if order[0] != l else order[1])


def service_model(scene: Scene) -> ServiceModel:
    f = service_probabilities(scene)
    if scene.n_leds == 1:
        l_c = np.array([-1])
    else:
        l_c = np.array([complementary_led(scene, l) for l in range(scene.n_leds)])
    return ServiceModel(f=_readonly(f), l_c=_readonly(l_c, dtype=int))


def build_scene(config) -> Scene:
    """Scene from a validated :class:`irsvlc.config.ScenarioConfig`.

    Converts the file units (dBW, degrees) to watts and radians and lays
    the IRS units out on the wall grid.
    """
    c = config.consts
    consts = PhysConsts(
        pd_area=c.pd_area,
        lambertian_order=c.lambertian_order,
        filter_gain=c.filter_gain,
        fov=math.radians(c.fov_deg),
        refractive_index=c.refractive_index,
        reflectance=config.irs.reflectance,
        responsivity=c.responsivity,
        noise_var=c.noise_var,
        bandwidth=c.bandwidth,
        unit_area=c.unit_area,
    )
    irs = config.irs
    grid = WallGrid(spacing=irs.spacing, margin_h=irs.margin_h, margin_v=irs.margin_v, fill=irs.fill)
    room = tuple(config.room)
    return Scene(
        room=room,
        led_pos=[led.position for led in config.leds],
        led_power=dbw_to_watt([led.power_dbw for led in config.leds]),
        user_pos=list(config.users),
        eve_pos=config.eavesdropper.position,
        target=config.eavesdropper.target - 1,
        unit_pos=grid.layout(irs.n_units, room),
        consts=consts,
    )
