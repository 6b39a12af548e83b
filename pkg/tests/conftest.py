import numpy as np
import pytest
from dataclasses import replace

import mfsampling as mf


@pytest.fixture(scope="session")
def unit_ball():
    return mf.Ball(center=(0.0, 0.0, 0.0), radius=1.0)


@pytest.fixture(scope="session")
def ball_scenario(unit_ball):
    """Clean single-sensor unit-ball scenario on a coarse rule (fast)."""
    return mf.Scenario(
        support=unit_ball,
        h=0.2,
        measurement=mf.MeasurementSet.near_points([(3.0, 0.0, 0.0)]),
        frequencies=mf.FrequencyGrid(k_max=11.0, count=11),
        noise_level=0.0,
        seed=1,
        sampling=mf.SamplingGrid.cube(3.0, 16),
        label="ball_test",
    )


@pytest.fixture(scope="session")
def ball_dataset(ball_scenario):
    return mf.generate_dataset(ball_scenario)


@pytest.fixture(scope="session")
def far_ball_scenario(unit_ball):
    """Clean far-field scenario: unit ball, one direction pair."""
    return mf.Scenario(
        support=unit_ball,
        h=0.2,
        measurement=mf.MeasurementSet.far_directions([(1.0, 0.0, 0.0)]),
        frequencies=mf.FrequencyGrid(k_max=11.0, count=11),
        noise_level=0.0,
        seed=1,
        sampling=mf.SamplingGrid.cube(3.0, 16),
        label="far_ball_test",
    )


@pytest.fixture(scope="session")
def far_ball_dataset(far_ball_scenario):
    return mf.generate_dataset(far_ball_scenario)


def clean(scenario):
    return replace(scenario, noise_level=0.0)


def radial_profile_deviation(field, x, bin_width):
    """Worst deviation of a field from its own interpolated radial profile about x.

    The profile is the per-bin mean of the field over distance bins of the
    given width; a field that depends on position only through |x - z| has
    deviation bounded by the interpolation error alone.
    """
    centers = field.grid.centers()
    d = np.linalg.norm(centers - np.asarray(x, dtype=float), axis=1)
    bins = np.floor((d - d.min()) / bin_width).astype(int)
    nb = int(bins.max()) + 1
    sums = np.bincount(bins, weights=field.values, minlength=nb)
    cnts = np.bincount(bins, minlength=nb)
    centers_d = d.min() + (np.arange(nb) + 0.5) * bin_width
    valid = cnts > 0
    profile = np.interp(d, centers_d[valid], sums[valid] / cnts[valid])
    return float(np.abs(field.values - profile).max())
