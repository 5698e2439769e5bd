import numpy as np
import pytest

from inmafield import (
    ConfigurationError,
    CrossDependence,
    Deterministic,
    InmaModel,
    MultilateralOrder,
    NegBin,
    Poisson,
    model_hash,
    validate,
)


def test_valid_model():
    m = InmaModel(np.full((2, 2), 0.2), Poisson(1.0), "independence")
    assert validate(m) == []
    assert m.order == (1, 1)
    assert m.beta_dot == pytest.approx(0.8)
    m.check()


def test_spread_beta_dot_violation():
    m = InmaModel(np.full((2, 2), 0.3), Poisson(1.0), CrossDependence.SPREAD)
    problems = validate(m)
    assert len(problems) == 1 and "spread requires β• ≤ 1" in problems[0]
    with pytest.raises(ConfigurationError):
        m.check()


def test_order_zero_violation():
    problems = validate(InmaModel([[0.5]], Poisson(1.0)))
    assert any("q1+q2 ≥ 1 required" in p for p in problems)


def test_all_violations_listed():
    problems = validate(InmaModel([[1.5]], Poisson(-1.0), "spread"))
    assert len(problems) >= 4


def test_dict_round_trip_and_hash():
    m = InmaModel([[0.1, 0.2, 0.3], [0.4, 0.5, 0.6]], NegBin(2.5, 0.3), "independence")
    again = InmaModel.from_dict(m.to_dict())
    assert again == m
    assert again.hash == m.hash == model_hash(m)
    other = InmaModel([[0.1, 0.2, 0.3], [0.4, 0.5, 0.61]], NegBin(2.5, 0.3))
    assert other.hash != m.hash
    assert InmaModel(m.beta, m.innovation, "spread").hash != m.hash


@pytest.mark.parametrize("doc", [
    {"order": [1, 1], "beta": [[0.5, 0.5]], "innovation": {"family": "poisson", "mu": 1}},
    {"order": [1, 0], "beta": [[0.5, 0.5], [0.5, 0.5]], "innovation": {"family": "poisson", "mu": 1}},
    {"order": [1, 0], "beta": [[0.5], [0.5]]},
    {"order": [1, 0], "beta": [[0.5], ["x"]], "innovation": {"family": "poisson", "mu": 1}},
])
def test_from_dict_dimension_errors(doc):
    with pytest.raises(ConfigurationError):
        InmaModel.from_dict(doc)


def test_multilateral_order():
    mo = MultilateralOrder(1, 0, 1, 0, [[0.3], [0.3], [0.3]])
    assert mo.beta_at(-1, 0) == 0.3 and mo.beta_at(2, 0) == 0.0
    assert mo.beta_dot == pytest.approx(0.9)
    assert validate(mo) == []
    m = InmaModel([[0.5, 0.5]], Deterministic(1))
    assert np.array_equal(MultilateralOrder.from_model(m).values, m.beta.values)
    with pytest.raises(ConfigurationError):
        MultilateralOrder(1, 0, 1, 0, [[0.3], [0.3]])
    assert validate(MultilateralOrder(0, 0, 0, 0, [[0.5]]))
    assert validate(MultilateralOrder(0, 0, 1, 0, [[0.5], [1.2]]))
