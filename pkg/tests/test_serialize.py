"""JSON encodings: round trips and malformed-input rejection."""

from __future__ import annotations

import numpy as np
import pytest

from schattengeo import serialize
from schattengeo.action import GroupPresentation
from schattengeo.exceptions import ValidationError
from schattengeo.norms import HilbertNorm, MaxHilbertNorm, PushforwardNorm


def test_matrix_round_trip_complex():
    m = np.array([[1.0, 2.0 + 3.0j], [2.0 - 3.0j, 4.0]])
    obj = serialize.matrix_to_json(m)
    assert "im" in obj
    back = serialize.matrix_from_json(obj)
    assert np.array_equal(back, m)


def test_matrix_omits_zero_imaginary_block():
    obj = serialize.matrix_to_json(np.diag([1.0, 2.0]))
    assert "im" not in obj
    back = serialize.matrix_from_json(obj)
    assert np.array_equal(back, np.diag([1.0, 2.0]).astype(complex))


def test_matrix_from_json_rejects_malformed():
    with pytest.raises(ValidationError):
        serialize.matrix_from_json([[1.0]])
    with pytest.raises(ValidationError):
        serialize.matrix_from_json({"re": [[1.0]]})  # missing n
    with pytest.raises(ValidationError):
        serialize.matrix_from_json({"n": 0, "re": []})
    with pytest.raises(ValidationError):
        serialize.matrix_from_json({"n": 2, "re": [[1.0, 2.0], [3.0]]})  # ragged
    with pytest.raises(ValidationError):
        serialize.matrix_from_json({"n": 2, "re": [[1.0, 2.0]]})  # wrong shape
    with pytest.raises(ValidationError):
        serialize.matrix_from_json(
            {"n": 2, "re": [[1.0, 2.0], [3.0, np.inf]]}
        )
    with pytest.raises(ValidationError):
        serialize.matrix_from_json(
            {"n": 2, "re": [[1.0, 2.0], [3.0, 4.0]], "im": [[0.0, 0.0]]}
        )


def test_matrix_to_json_rejects_non_square():
    with pytest.raises(ValidationError):
        serialize.matrix_to_json(np.zeros((2, 3)))


def test_vector_round_trip():
    v = np.array([1.0 + 2.0j, -3.0])
    back = serialize.vector_from_json(serialize.vector_to_json(v))
    assert np.array_equal(back, v)
    real = serialize.vector_to_json(np.array([1.0, 2.0]))
    assert "im" not in real
    with pytest.raises(ValidationError):
        serialize.vector_from_json({"n": 2, "re": [1.0]})
    with pytest.raises(ValidationError):
        serialize.vector_from_json({"n": 1})


def test_group_round_trip():
    grp = GroupPresentation(
        (np.array([[0.0, 2.0], [0.5, 0.0]]),), 2.5, includes_inverses=True
    )
    obj = serialize.group_to_json(grp)
    assert obj["includes_inverses"] is True
    back = serialize.group_from_json(obj)
    assert back.p == 2.5
    assert back.includes_inverses
    assert np.allclose(back.generators[0], grp.generators[0])


def test_group_from_json_rejects_malformed():
    with pytest.raises(ValidationError):
        serialize.group_from_json({"p": 2.0})
    with pytest.raises(ValidationError):
        serialize.group_from_json({"p": 2.0, "generators": []})
    with pytest.raises(ValidationError):
        serialize.group_from_json({"p": "x", "generators": [serialize.matrix_to_json(np.eye(2))]})


def test_normspec_round_trips_all_kinds():
    hil = HilbertNorm(np.diag([4.0, 1.0]))
    mx = MaxHilbertNorm((np.diag([4.0, 1.0]), np.diag([1.0, 4.0])))
    push = PushforwardNorm(np.array([[1.0, 1.0], [0.0, 1.0]]), mx)
    for spec in (hil, mx, push):
        back = serialize.normspec_from_json(serialize.normspec_to_json(spec))
        assert type(back) is type(spec)
    back = serialize.normspec_from_json(serialize.normspec_to_json(push))
    assert np.allclose(back.g, push.g)
    assert np.allclose(back.inner.forms[0], mx.forms[0])


def test_normspec_depth_cap():
    spec: dict = {"kind": "hilbert", "a": serialize.matrix_to_json(np.eye(2))}
    eye = serialize.matrix_to_json(np.eye(2))
    for _ in range(20):
        spec = {"kind": "pushforward", "g": eye, "inner": spec}
    with pytest.raises(ValidationError, match="deep"):
        serialize.normspec_from_json(spec)


def test_normspec_rejects_unknown_kind():
    with pytest.raises(ValidationError):
        serialize.normspec_from_json({"kind": "sup"})
    with pytest.raises(ValidationError):
        serialize.normspec_from_json({"kind": "max", "bs": []})
    with pytest.raises(ValidationError):
        serialize.normspec_from_json(42)


def test_cert_round_trip():
    obj = serialize.cert_to_json(np.eye(2), 2.0 * np.eye(2))
    lo, hi = serialize.cert_from_json(obj)
    assert np.array_equal(lo, np.eye(2).astype(complex))
    assert np.array_equal(hi, 2.0 * np.eye(2).astype(complex))
    with pytest.raises(ValidationError):
        serialize.cert_from_json({"lower": serialize.matrix_to_json(np.eye(2))})


def test_scenario_parsing():
    good = {
        "p": 2.0,
        "spec": serialize.normspec_to_json(HilbertNorm(np.eye(2))),
        "isometries": [serialize.matrix_to_json(np.eye(2))],
        "cert": serialize.cert_to_json(np.eye(2), np.eye(2)),
        "expected_verdict": "hilbert_rigid",
    }
    out = serialize.scenario_from_json(good)
    assert out["p"] == 2.0
    assert out["expected_verdict"] == "hilbert_rigid"
    for missing in ("p", "spec", "isometries", "cert"):
        bad = dict(good)
        del bad[missing]
        with pytest.raises(ValidationError):
            serialize.scenario_from_json(bad)
    bad = dict(good)
    bad["expected_verdict"] = 3
    with pytest.raises(ValidationError):
        serialize.scenario_from_json(bad)
    bad = dict(good)
    bad["isometries"] = []
    with pytest.raises(ValidationError):
        serialize.scenario_from_json(bad)


def test_load_json_errors(tmp_path):
    with pytest.raises(ValidationError):
        serialize.load_json(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(ValidationError):
        serialize.load_json(broken)


def test_dump_and_load_round_trip(tmp_path):
    path = tmp_path / "obj.json"
    serialize.dump_json({"a": [1, 2], "b": "x"}, path)
    assert serialize.load_json(path) == {"a": [1, 2], "b": "x"}
