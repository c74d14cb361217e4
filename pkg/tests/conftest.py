import math

import pytest

import arcscan


@pytest.fixture
def ring30():
    """Full digital circle r=30 centered on a 121x121 canvas."""
    return arcscan.BinaryImage.from_pixels(
        121, 121, arcscan.midpoint_circle((60, 60), 30))


@pytest.fixture
def clean_circle_scene():
    """Single clean circle r=30 at (60, 60) plus its ground truth."""
    spec = {"size": [121, 121],
            "circles": [{"center": [60, 60], "radius": 30, "span": None}],
            "lines": [], "noise": 0.0}
    return arcscan.synth_scene(spec, 3)


@pytest.fixture
def mixed_scene():
    """Two circles, one semicircle, two crossing lines, no noise."""
    spec = {"size": [400, 400],
            "circles": [{"center": [100, 100], "radius": 40, "span": None},
                        {"center": [280, 100], "radius": 55, "span": None},
                        {"center": [200, 300], "radius": 50, "span": [0.0, math.pi]}],
            "lines": [[[20, 380], [380, 360]], [[10, 200], [120, 390]]],
            "noise": 0.0}
    return arcscan.synth_scene(spec, 0)
