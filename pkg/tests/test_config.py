import json

import pytest

from skelscore.config import RunConfig


def test_defaults():
    c = RunConfig()
    assert (c.beta_threshold, c.c_threshold, c.curve_c_threshold) == (0.75, 0.75, 0.75)
    assert c.d_threshold == 0.02 and c.target_diagonal == 1.6 and c.n_samples == 500


@pytest.mark.parametrize("change", [
    {"beta_threshold": 0.0}, {"c_threshold": 1.5}, {"d_threshold": 2.0}, {"k": 1}, {"m": 0},
    {"alpha": 1.0}, {"coverage_method": "mercator"}, {"bounded_rule": "gt"}, {"p": 0},
    {"noise_fraction": -0.1}, {"k": 2.5},
])
def test_validation(change):
    with pytest.raises(ValueError):
        RunConfig(**change)


def test_overrides():
    c = RunConfig().with_overrides(["k=12", "alpha=0.25", "normalize=false", "coverage-method=spherical"])
    assert c.k == 12 and c.alpha == 0.25 and c.normalize is False and c.coverage_method == "spherical"


@pytest.mark.parametrize("item", ["nokey", "bogus=1", "normalize=maybe"])
def test_bad_overrides(item):
    with pytest.raises(ValueError):
        RunConfig().with_overrides([item])


def test_json_round_trip(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"k": 10, "seed": 7}))
    c = RunConfig.from_json(path)
    assert c.k == 10 and c.seed == 7
    assert RunConfig.from_dict(c.to_dict()) == c


def test_unknown_key(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"kk": 1}))
    with pytest.raises(ValueError, match="unknown"):
        RunConfig.from_json(path)
