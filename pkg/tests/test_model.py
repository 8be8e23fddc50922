import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from invopt import Dataset, LinearForwardModel, ParameterSpace
from invopt.errors import DimensionMismatch, TooLarge
from invopt.model import (
    Basis,
    ConvexForwardModel,
    FixedComponent,
    L1Sphere,
    LInfSphere,
    PowerTerm,
    Quadratic,
    canonicalize,
)
from invopt.model import io


def test_canonical_form_is_min_geq():
    model = LinearForwardModel(np.array([1.0, 2.0]), np.array([[1.0, 1.0], [1.0, 0.0]]), np.array([4.0, 1.0]),
                               ["<=", "="], sense="max")
    can = canonicalize(model)
    assert can.sense == "min"
    assert set(can.senses) == {">="}
    np.testing.assert_allclose(can.c, [-1.0, -2.0])
    x = np.array([1.0, 3.0])
    assert np.all(can.A @ x >= can.b - 1e-12)


def test_dimension_checks():
    with pytest.raises(DimensionMismatch):
        ParameterSpace(2, prior=[1.0, 2.0, 3.0])
    with pytest.raises(DimensionMismatch):
        ParameterSpace(2, normalization=FixedComponent(5))
    model = LinearForwardModel(np.ones(2), np.eye(2), np.zeros(2))
    with pytest.raises(DimensionMismatch):
        Dataset.shared(model, [[1.0, 2.0, 3.0]])


def test_l1_pieces_follow_sign_constraints():
    space = ParameterSpace(3, lb=[0, -np.inf, -np.inf], normalization=L1Sphere())
    assert len(space.pieces()) == 4
    assert len(ParameterSpace.simplex(3).pieces()) == 1
    assert len(ParameterSpace(2, normalization=LInfSphere()).pieces()) == 4
    with pytest.raises(TooLarge):
        ParameterSpace(20, normalization=L1Sphere()).pieces()


def test_h_value_norm_to_prior():
    space = ParameterSpace.simplex(2, prior=[0.9, 0.1])
    assert space.h_value([0.5, 0.5]) == pytest.approx(0.8)
    assert space.contains([0.5, 0.5])
    assert not space.contains([0.6, 0.6])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=2), st.lists(st.floats(-5, 5), min_size=2, max_size=2))
def test_quadratic_gradient_matches_finite_difference(x, theta):
    Phi = np.array([[2.0, 0.5], [0.5, 1.0]])
    obj = Quadratic(Phi, np.array([1.0, -1.0]), np.zeros(2))
    x, theta = np.array(x), np.array(theta)
    h = 1e-6
    fd = [(obj.value(x + h * e, theta) - obj.value(x - h * e, theta)) / (2 * h) for e in np.eye(2)]
    np.testing.assert_allclose(obj.grad(x, theta), fd, atol=1e-4)


def _roundtrip(obj, enc, dec):
    return dec(json.loads(json.dumps(enc(obj))))


def test_io_roundtrip_linear_model_and_space():
    model = LinearForwardModel(np.array([1.0, 2.0]), np.array([[1.0, 1.0]]), np.array([1.0]), ["<="],
                               integer=np.array([True, False]), sense="max")
    back = _roundtrip(model, io.model_to_dict, io.model_from_dict)
    np.testing.assert_array_equal(back.A, model.A)
    assert back.sense == "max" and back.senses == model.senses
    np.testing.assert_array_equal(back.integer, model.integer)
    space = ParameterSpace(2, lb=[0, -np.inf], normalization=FixedComponent(1, 2.0), prior=[1.0, 1.0])
    sb = _roundtrip(space, io.space_to_dict, io.space_from_dict)
    assert sb.normalization == space.normalization
    np.testing.assert_array_equal(sb.lb, space.lb)
    np.testing.assert_array_equal(sb.ub, space.ub)
    assert sb.h_value([0.0, 2.0]) == space.h_value([0.0, 2.0])


def test_io_roundtrip_convex_and_dataset():
    obj = Basis((PowerTerm(np.ones(2), 3.0, np.ones(2)),), (PowerTerm(np.ones(2), 1.0),), np.array([2.0]))
    model = ConvexForwardModel(obj, np.array([[1.0, 1.0]]), np.array([1.0]), ["="])
    back = _roundtrip(model, io.model_to_dict, io.model_from_dict)
    x = np.array([0.3, 0.7])
    assert back.objective.value(x) == pytest.approx(model.objective.value(x))
    data = Dataset.shared(LinearForwardModel(np.ones(2), np.eye(2), np.zeros(2)), [[1.0, 0.0], [0.0, 2.0]],
                          weights=[1.0, 3.0])
    db = _roundtrip(data, io.dataset_to_dict, io.dataset_from_dict)
    np.testing.assert_array_equal(db.weights, [1.0, 3.0])
    np.testing.assert_array_equal(db.observations[1].x, [0.0, 2.0])


def test_io_rejects_bad_documents(tmp_path):
    p = tmp_path / "m.json"
    p.write_text("{not json")
    with pytest.raises(io.FormatError):
        io.load("model", p)
    p.write_text(json.dumps({"type": "linear", "c": [1]}))
    with pytest.raises(io.FormatError):
        io.load("model", p)
    with pytest.raises(io.FormatError):
        io.space_from_dict({"dim": 2, "normalization": "l7"})
