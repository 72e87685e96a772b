"""YAML scenario files.

Lengths are meters, powers dBW, angles degrees.  Anything not given falls
back to the reference room: an 8 x 8 x 3 m office, four ceiling LEDs and
the default optical front end in :class:`irsvlc.scene.PhysConsts`.

Example::

    name: reference
    leds:
      - {position: [1, 1, 3], power_dbw: 10}
    users:
      - [3.6, 2.7, 0.5]
    eavesdropper: {position: [2.1, 1.5, 0.5], target: 1}
    irs: {n_units: 64, reflectance: 0.5}
    sweep:
      variable: power_dbw
      values: [0, 5, 10]
      algorithms: [proposed, random, no-irs]
"""

from __future__ import annotations

from pathlib import Path
from typing import List, Literal, NamedTuple, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from irsvlc.scene import Scene, SceneError, build_scene

Point = Tuple[float, float, float]

ALGORITHMS = ("proposed", "proposed-no-eve-sinr", "random", "no-irs", "oracle")
SWEEP_VARS = ("power_dbw", "n_units", "reflectance")
Algorithm = Literal["proposed", "proposed-no-eve-sinr", "random", "no-irs", "oracle"]


class ConfigError(ValueError):
    pass


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class LedSpec(_Block):
    position: Point
    power_dbw: float = 10.0


class EveSpec(_Block):
    position: Point
    target: int = Field(1, ge=1, description="1-based index of the user Eve listens to")


class IrsSpec(_Block):
    wall: Literal["y=0"] = "y=0"
    n_units: int = Field(64, ge=0)
    spacing: float = Field(0.2, gt=0)
    margin_h: float = Field(1.0, ge=0)
    margin_v: float = Field(0.3, ge=0)
    reflectance: float = Field(0.5, ge=0, le=1)
    fill: Literal["top-down", "bottom-up"] = "top-down"


class ConstsSpec(_Block):
    pd_area: float = Field(4e-4, gt=0)
    lambertian_order: float = Field(1.0, gt=0)
    filter_gain: float = Field(1.0, gt=0)
    fov_deg: float = Field(80.0, gt=0, le=90)
    refractive_index: float = Field(1.5, gt=0)
    responsivity: Union[float, List[float]] = 0.5
    noise_var: Union[float, List[float]] = 1e-10
    bandwidth: float = Field(20e6, gt=0)
    unit_area: float = Field(1e-2, gt=0)


class SweepBlock(_Block):
    variable: Literal["power_dbw", "n_units", "reflectance"]
    values: List[float] = Field(min_length=1)
    algorithms: List[Algorithm] = Field(default_factory=lambda: ["proposed", "random", "no-irs"],
                                        min_length=1)
    trials: int = Field(200, ge=1)
    seed: int = 0
    strict_eq14_weights: bool = False


class ScenarioConfig(_Block):
    name: str = "scenario"
    room: Point = (8.0, 8.0, 3.0)
    leds: List[LedSpec] = Field(min_length=1)
    users: List[Point] = Field(min_length=1)
    eavesdropper: EveSpec
    irs: IrsSpec = Field(default_factory=IrsSpec)
    consts: ConstsSpec = Field(default_factory=ConstsSpec)
    sweep: Optional[SweepBlock] = None


REFERENCE = {
    "name": "reference",
    "room": [8, 8, 3],
    "leds": [{"position": p, "power_dbw": 10.0} for p in ([1, 1, 3], [1, 7, 3], [7, 1, 3], [7, 7, 3])],
    "users": [[3.6, 2.7, 0.5], [1.0, 3.3, 0.5], [3.0, 4.5, 0.5], [6.4, 2.2, 0.5]],
    "eavesdropper": {"position": [2.1, 1.5, 0.5], "target": 1},
    "irs": {"n_units": 64, "reflectance": 0.5},
}


def reference_config(**irs) -> ScenarioConfig:
    """The four-LED, four-user room with Eve listening to user 1."""
    cfg = ScenarioConfig.model_validate(REFERENCE)
    if irs:
        cfg = cfg.model_copy(update={"irs": cfg.irs.model_copy(update=irs)})
    return cfg


class Loaded(NamedTuple):
    config: ScenarioConfig
    scene: Scene
    sweep: Optional[SweepBlock]


def _line_index(text: str) -> dict[tuple, int]:
    """Map every key path in a YAML document to its 1-based line."""
    lines: dict[tuple, int] = {}
    root = yaml.compose(text, Loader=yaml.SafeLoader)

    def walk(node, path):
        lines[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for key, value in node.value:
                walk(value, path + (key.value,))
                lines[path + (key.value,)] = key.start_mark.line + 1
        elif isinstance(node, yaml.SequenceNode):
            for i, item in enumerate(node.value):
                walk(item, path + (i,))

    if root is not None:
        walk(root, ())
    return lines


def _format_errors(exc: ValidationError, lines: dict[tuple, int]) -> str:
    out = []
    for err in exc.errors():
        loc = tuple(err["loc"])
        line = None
        for cut in range(len(loc), -1, -1):
            if loc[:cut] in lines:
                line = lines[loc[:cut]]
                break
        where = ".".join(str(p) for p in loc) or "<root>"
        prefix = f"line {line}: " if line else ""
        out.append(f"{prefix}{where}: {err['msg']}")
    return "\n".join(out)


def parse_config(text: str) -> ScenarioConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("scenario file must be a mapping")
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc, _line_index(text))) from None


def load_config(path) -> Loaded:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    cfg = parse_config(text)
    try:
        scene = build_scene(cfg)
    except SceneError as exc:
        raise ConfigError(str(exc)) from exc
    return Loaded(config=cfg, scene=scene, sweep=cfg.sweep)


def dump_config(cfg: ScenarioConfig) -> str:
    return yaml.safe_dump(cfg.model_dump(mode="json"), sort_keys=False)
