"""Shared fixtures: small deterministic buildings and datasets."""

from __future__ import annotations

import numpy as np
import pytest

from brickline import domain, preprocess, synth


def make_meta(sensor_id="s0", brick_class="Zone_Air_Temperature_Sensor",
              unit="degC", building_id="bldg-test"):
    return domain.SensorMeta(sensor_id=sensor_id, brick_class=brick_class,
                             unit=unit, building_id=building_id)


def make_regular(values, mask=None, start=0, **meta_kw):
    values = np.asarray(values, dtype=np.float64)
    if mask is None:
        mask = np.isfinite(values)
    else:
        mask = np.asarray(mask, dtype=bool)
    safe = np.where(mask, values, 0.0)
    return domain.RegularSeries(meta=make_meta(**meta_kw), start=start,
                                values=safe, mask=mask)


@pytest.fixture(scope="session")
def rng():
    return np.random.Generator(np.random.PCG64(20240101))


@pytest.fixture(scope="session")
def demo_series():
    """Twelve days, three channels, no gaps."""
    return synth.make_building("bldg-demo", n_days=12, n_channels=3, seed=11)


@pytest.fixture(scope="session")
def demo_dataset(demo_series):
    return preprocess.run_pipeline(demo_series, preprocess.PreprocessConfig())


# Re-exported so test modules can import helpers from conftest directly.
__all__ = ["make_meta", "make_regular"]
