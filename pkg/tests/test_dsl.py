import json
import math

import numpy as np
import pytest

from tlcurv.engine import DSLError, ChartError, christoffel, de_sitter_chart, load_chart_file, metric
from tlcurv.engine.dsl import evaluate, tokenize


@pytest.mark.parametrize("text, expected", [
    ("1 + 2 * 3", 7.0),
    ("2^3^2", 512.0),
    ("-x0^2", -4.0),
    ("2^-1", 0.5),
    ("(1 + x0) * x1", 9.0),
    ("cosh(0) - sqrt(x1 + 6)", -2.0),
    ("1e-1 * 10", 1.0),
    (".5 + x0 / 4", 1.0),
    ("  abs( - 3 )  ", 3.0),
])
def test_precedence_and_functions(text, expected):
    assert float(evaluate(text, np.array([2.0, 3.0]))) == pytest.approx(expected)


def test_evaluate_is_vectorized():
    x = np.array([[0.0, 1.0], [1.0, 2.0]])
    np.testing.assert_allclose(evaluate("sin(x0) + x1", x), [1.0, math.sin(1) + 2])


@pytest.mark.parametrize("text, token", [("1 +", "<end of input>"), ("x0 * * 2", "*"), ("foo(1)", "foo"), ("x0 $ 1", "$"),
                                         ("(1 + 2", "<end of input>"), ("1 2", "2")])
def test_parse_errors_name_the_token(text, token):
    with pytest.raises(DSLError) as err:
        evaluate(text, np.zeros(2))
    assert err.value.token == token
    assert err.value.line == 1 and err.value.column >= 1


def test_tokenizer_positions():
    toks = tokenize("x0 + sinh(x1)")
    assert [t.text for t in toks][:4] == ["x0", "+", "sinh", "("]


def _write(tmp_path, doc, name="chart.json"):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc, indent=1))
    return p


def test_chart_file_reproduces_de_sitter(tmp_path):
    p = _write(tmp_path, {"dim": 2, "metric": [["-1", "0"], ["0", "cosh(x0)^2"]], "convex_radius": 1.0,
                          "future_axis": 0, "domain": None})
    chart = load_chart_file(p)
    ref = de_sitter_chart(2)
    x = np.array([[0.3, 0.1], [-0.2, 0.4]])
    np.testing.assert_allclose(metric(chart, x), metric(ref, x), rtol=1e-14)
    np.testing.assert_allclose(christoffel(chart, x), christoffel(ref, x), atol=1e-6)


def test_domain_expression(tmp_path):
    p = _write(tmp_path, {"dim": 2, "metric": [["-1", "0"], ["0", "1"]], "domain": "1 - x1^2"})
    chart = load_chart_file(p)
    assert chart.inside(np.array([[0.0, 0.5], [0.0, 1.5]])).tolist() == [True, False]


def test_malformed_expression_reports_file_position(tmp_path):
    doc = '{"dim": 2,\n "metric": [["-1", "0"],\n            ["0", "cosh(x0 ^^ 2"]]}'
    with pytest.raises(DSLError) as err:
        load_chart_file(_write(tmp_path, doc))
    assert err.value.line == 3
    assert err.value.token == "^"
    assert "chart.json" in str(err.value)


def test_invalid_json(tmp_path):
    with pytest.raises(DSLError) as err:
        load_chart_file(_write(tmp_path, '{"dim": 2,\n "metric": [}'))
    assert err.value.line == 2


@pytest.mark.parametrize("doc", [
    {"metric": [["-1", "0"], ["0", "1"]]},
    {"dim": 3, "metric": [["-1", "0"], ["0", "1"]]},
    {"dim": 2, "metric": [["-1", "x0"], ["0", "1"]], "center": [0.5, 0.0]},
    {"dim": 2, "metric": [["-1", "0"], ["0", "1"]], "domain": "x0 - 1"},
])
def test_structural_errors(tmp_path, doc):
    with pytest.raises(ChartError):
        load_chart_file(_write(tmp_path, doc))


def test_unknown_identifier_out_of_range(tmp_path):
    with pytest.raises(DSLError):
        load_chart_file(_write(tmp_path, {"dim": 2, "metric": [["-1", "0"], ["0", "x2"]]}))
