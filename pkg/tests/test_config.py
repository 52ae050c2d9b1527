import json

import pytest

from nudec import config
from nudec.config import ConfigError


def minimal_neg():
    return {"kind": "neg-bc", "n": [8],
            "source": {"dims": [1, 1, 1, 2], "probs": [0.5, 0.5]},
            "channel": {"in_dims": [2], "out_dims": [2, 1, 1], "probs": [[1, 0], [0, 1]]},
            "rates": {"R0": 0.25}}


def write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return p


def issues(tmp_path, obj):
    with pytest.raises(ConfigError) as e:
        config.load_config(write(tmp_path, obj))
    return e.value.issues


def test_minimal_config_gets_defaults(tmp_path):
    cfg = config.load_config(write(tmp_path, minimal_neg()))
    assert cfg.eps == 0.12 and cfg.kind == "neg-bc"
    assert cfg.rates.R0 == 0.25 and cfg.rates.T2 == 0.0
    assert cfg.bins == {"draws": 500, "delta": 0.1}
    assert cfg.region["keep_sat_sum"] is True
    assert cfg.neg_config(8).sizes["R0"] == 4


def test_pmf_not_summing_to_one(tmp_path):
    obj = minimal_neg()
    obj["source"]["probs"] = [0.5, 0.4]
    (issue,) = issues(tmp_path, obj)
    assert issue.path == "$.source.probs" and "0.9" in issue.message


def test_channel_row_error_names_the_row(tmp_path):
    obj = minimal_neg()
    obj["channel"]["probs"] = [[1, 0], [0.3, 0.3]]
    (issue,) = issues(tmp_path, obj)
    assert issue.path == "$.channel.probs[1]"


def test_schema_violations_carry_paths(tmp_path):
    obj = minimal_neg()
    obj["rates"]["R9"] = 1
    obj["eps"] = -1
    paths = {i.path for i in issues(tmp_path, obj)}
    assert paths == {"$.rates", "$.eps"}
    assert issues(tmp_path, {"kind": "other"})[0].path == "$.kind"


def test_invalid_split_and_channel_size(tmp_path):
    obj = minimal_neg()
    obj["rates"] = {"S2": 0.5, "T2": 0.25}
    assert issues(tmp_path, obj)[0].path == "$.rates"
    obj = minimal_neg()
    obj["channel"]["in_dims"] = [3]
    assert "$.channel.in_dims" in {i.path for i in issues(tmp_path, obj)}


def test_parse_error(tmp_path):
    (issue,) = issues(tmp_path, "{not json")
    assert issue.path == "$" and "line 1" in issue.message


def test_det_ic_non_injective_output_table(tmp_path):
    obj = json.loads(config.scenario_path("xor_ic").read_text())
    obj["spec"]["f"][0] = [[0, 1], [0, 1]]
    (issue,) = issues(tmp_path, obj)
    assert issue.path == "$.spec.f[0]"
    assert "collision" in issue.message and "[0, 0]" in issue.message and "[1, 0]" in issue.message


def test_shipped_scenarios_load():
    names = config.shipped_scenarios()
    assert {"toy_inside", "toy_outside", "toy_sweep", "cloud", "bins", "noisy", "xor_ic"} <= set(names)
    for name in names:
        cfg = config.load_config(config.scenario_path(name))
        for n in cfg.n:
            (cfg.neg_config(n) if cfg.kind == "neg-bc" else cfg.ic_config(n))


def test_overrides_and_lookup():
    cfg = config.load_config(config.scenario_path("toy_inside"))
    c2 = cfg.with_overrides(seed=5, trials=3)
    assert (c2.seed, c2.trials) == (5, 3) and (cfg.seed, cfg.trials) == (11, 2000)
    with pytest.raises(FileNotFoundError):
        config.scenario_path("no_such_scenario")
