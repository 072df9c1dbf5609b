import json

import numpy as np
import pytest

from gpfstab.config import (
    SpecInvariantError,
    SpecParseError,
    SpecSchemaError,
    load_spec,
    parse_spec,
    spec_to_dict,
)
from gpfstab.history import ConstantHistory, TanhHistory


def base_doc():
    return {
        "schema": 1,
        "alpha": 0.5,
        "mu": 0.8,
        "tau": 0.25,
        "T": 1.0,
        "A": [[-0.1]],
        "B": [[0.2]],
        "phi": {"kind": "constant", "value": [0.5]},
        "box": {"c1": 1.0, "c2": 2.0},
    }


def test_bundled_example1():
    spec = load_spec("example1")
    s = spec.system
    assert (s.alpha, s.mu, s.tau, s.T) == (0.2, 0.8, 0.2, 5.0)
    np.testing.assert_array_equal(s.A, [[0.1, 0.0], [0.0, -0.2]])
    np.testing.assert_array_equal(s.B, [[-0.3, 0.0], [0.0, -0.2]])
    assert s.f.is_zero
    assert isinstance(spec.phi, ConstantHistory)
    np.testing.assert_array_equal(spec.phi.value, [0.7, 0.7])
    assert (spec.box.c1, spec.box.c2, spec.box.T) == (1.0, 8.0, 5.0)


def test_bundled_example2():
    spec = load_spec("example2")
    s = spec.system
    assert (s.alpha, s.mu, s.tau, s.T) == (0.4, 0.5, 0.3, 3.0)
    assert s.f.kind == "scaled-tanh" and s.lipschitz == 0.02
    assert isinstance(spec.phi, TanhHistory)
    assert (spec.box.c1, spec.box.c2, spec.box.T) == (0.4, 4.0, 3.0)


def test_round_trip(tmp_path):
    for name in ("example1", "example2"):
        spec = load_spec(name)
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(spec_to_dict(spec)))
        again = load_spec(path)
        assert again.system.digest() == spec.system.digest()
        assert spec_to_dict(again) == spec_to_dict(spec)


def test_c1_above_c2_is_invariant_error():
    doc = base_doc()
    doc["box"] = {"c1": 3.0, "c2": 2.0}
    with pytest.raises(SpecInvariantError, match="finite-time stability box"):
        parse_spec(doc)


@pytest.mark.parametrize("mu", [0.0, 1.5, -0.2])
def test_mu_domain(mu):
    doc = base_doc()
    doc["mu"] = mu
    with pytest.raises(SpecInvariantError, match="mu"):
        parse_spec(doc)


def test_schema_errors_name_the_field():
    doc = base_doc()
    doc["A"] = [["x"]]
    with pytest.raises(SpecSchemaError, match=r"\$\.A\[0\]\[0\]"):
        parse_spec(doc)
    doc = base_doc()
    del doc["tau"]
    with pytest.raises(SpecSchemaError, match="tau"):
        parse_spec(doc)
    doc = base_doc()
    doc["schema"] = 2
    with pytest.raises(SpecSchemaError, match=r"\$\.schema"):
        parse_spec(doc)
    doc = base_doc()
    doc["f"] = {"kind": "scaled-tanh"}
    with pytest.raises(SpecSchemaError, match=r"\$\.f"):
        parse_spec(doc)


def test_parse_error_has_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "schema": 1,\n  "alpha": ,\n}')
    with pytest.raises(SpecParseError, match="line 3, column"):
        load_spec(path)
    with pytest.raises(SpecParseError, match="cannot read"):
        load_spec(tmp_path / "missing.json")


def test_error_kinds_have_distinct_text():
    texts = {str(SpecParseError("x")), str(SpecSchemaError("x")), str(SpecInvariantError("x"))}
    assert len(texts) == 3


def test_lipschitz_mismatch():
    doc = base_doc()
    doc["f"] = {"kind": "scaled-tanh", "c": 0.02, "Lf": 0.5}
    with pytest.raises(SpecInvariantError, match="Lipschitz"):
        parse_spec(doc)


def test_dimension_mismatch():
    doc = base_doc()
    doc["phi"] = {"kind": "constant", "value": [0.5, 0.5]}
    with pytest.raises(SpecInvariantError, match="dimension"):
        parse_spec(doc)


def test_box_horizon_must_match():
    doc = base_doc()
    doc["box"]["T"] = 2.0
    with pytest.raises(SpecInvariantError, match="box.T"):
        parse_spec(doc)


def test_sampled_history_spec():
    doc = base_doc()
    doc["phi"] = {"kind": "sampled", "grid": [-0.25, 0.0], "values": [0.0, 1.0]}
    spec = parse_spec(doc)
    assert spec.phi(-0.125)[0] == 0.5
    doc["phi"]["grid"] = [-0.5, 0.0]
    with pytest.raises(SpecInvariantError, match="tau"):
        parse_spec(doc)
