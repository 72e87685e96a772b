import numpy as np
import pytest

from irsvlc.channel import gain_set
from irsvlc.config import reference_config
from irsvlc.scene import PhysConsts, Scene, WallGrid, build_scene, service_model

ROOM = (8.0, 8.0, 3.0)


def random_scene(rng, n_units, n_leds=2, n_users=2, reflectance=0.5, power=10.0):
    """LEDs on the ceiling, receivers on the 0.5 m plane, units on random wall slots."""
    leds = np.column_stack([rng.uniform(0.5, 7.5, (n_leds, 2)), np.full(n_leds, 3.0)])
    rx = np.column_stack([rng.uniform(0.5, 7.5, (n_users + 1, 2)), np.full(n_users + 1, 0.5)])
    xs, zs = WallGrid().slots(ROOM)
    slots = np.array([(x, 0.0, z) for z in zs for x in xs])
    units = slots[rng.choice(len(slots), n_units, replace=False)] if n_units else np.empty((0, 3))
    return Scene(room=ROOM, led_pos=leds, led_power=np.full(n_leds, power), user_pos=rx[:-1],
                 eve_pos=rx[-1], target=0, unit_pos=units,
                 consts=PhysConsts(reflectance=reflectance))


def setup(scene):
    return scene, gain_set(scene), service_model(scene)


@pytest.fixture
def ref8():
    return setup(build_scene(reference_config(n_units=8)))


@pytest.fixture
def ref64():
    return setup(build_scene(reference_config(n_units=64)))


# (criterion, passed, detail) tuples appended by the acceptance suite
ACCEPTANCE: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
