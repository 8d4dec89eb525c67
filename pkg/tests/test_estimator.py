"""Scikit-learn estimator wrapper."""

import numpy as np
import pytest
from sklearn.base import clone

from ampflow.estimator import WienerPC
from ampflow.model import simulate


def test_fit_recovers_chain_skeleton(chain_model):
    ts = simulate(chain_model, 300_000, seed=3)
    est = WienerPC(fs_hz=ts.fs_hz, channel_names=ts.channels)
    est.fit(ts.values)
    assert est.n_features_in_ == 3
    assert est.channels_ == ("v1", "v2", "v3")
    assert est.graph_.skeleton_pairs() == frozenset(
        {frozenset(("v1", "v2")), frozenset(("v2", "v3"))}
    )
    assert est.sepsets_.get("v1", "v3") == ("v2",)
    assert len(est.result_.queries) > 0


def test_fit_accepts_time_series_set(chain_model):
    ts = simulate(chain_model, 300_000, seed=4)
    res = WienerPC().fit_reconstruct(ts)
    assert res.graph.skeleton_pairs() == frozenset(
        {frozenset(("v1", "v2")), frozenset(("v2", "v3"))}
    )


def test_default_channel_names():
    rng = np.random.default_rng(1)
    est = WienerPC(segment=256).fit(rng.normal(0, 1, (100_000, 2)))
    assert est.channels_ == ("x0", "x1")
    assert est.graph_.skeleton_pairs() == frozenset()


def test_get_params_set_params_clone():
    est = WienerPC(rho=0.03, segment=2048, meek=True)
    params = est.get_params()
    assert params["rho"] == 0.03
    assert params["segment"] == 2048
    dup = clone(est)
    assert dup.get_params() == params
    dup.set_params(rho=0.1)
    assert dup.rho == 0.1
    assert est.rho == 0.03


def test_input_validation():
    est = WienerPC()
    with pytest.raises(ValueError):
        est.fit(np.full((100_000, 2), np.nan))
    with pytest.raises(ValueError):
        est.fit(np.zeros((100, 2)))  # too short for the segment length
    with pytest.raises(ValueError):
        WienerPC(channel_names=["a"]).fit(np.random.default_rng(0).normal(0, 1, (200_000, 2)))
