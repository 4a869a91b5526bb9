import json
import math

import numpy as np
import pytest

from chainlab.core.errors import ConfigParse, InvalidParameter, MissingInput
from chainlab.utils import io
from chainlab.utils.expression import compile_expression, evaluate_on_coords


class TestExpression:
    @pytest.mark.parametrize("text,expected", [
        ("x", [0.0, 0.5, 1.0]),
        ("2*x0 + 1", [1.0, 2.0, 3.0]),
        ("-x^2", [0.0, -0.25, -1.0]),
        ("x*(1 - x)", [0.0, 0.25, 0.0]),
        ("abs(1 - 2*x)", [1.0, 0.0, 1.0]),
        ("max(x, 0.5)", [0.5, 0.5, 1.0]),
        ("3", [3.0, 3.0, 3.0]),
        ("1e-1 * x", [0.0, 0.05, 0.1]),
    ])
    def test_evaluate_on_line(self, text, expected):
        coords = np.array([[0.0], [0.5], [1.0]])
        np.testing.assert_allclose(evaluate_on_coords(text, coords), expected)

    def test_power_is_right_associative(self):
        assert compile_expression("2^3^2")(s=np.zeros(1))[0] == 512.0

    def test_second_coordinate(self):
        coords = np.array([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_allclose(evaluate_on_coords("x0 * x1", coords), [2.0, 12.0])

    def test_variable_s(self):
        f = compile_expression("s^2")
        np.testing.assert_allclose(f(s=np.array([0.5, 2.0])), [0.25, 4.0])

    @pytest.mark.parametrize("text", ["", "1 +", "foo(x)", "y + 1", "x $ 2", "(x", "x x"])
    def test_rejects_bad_expressions(self, text):
        with pytest.raises(InvalidParameter):
            compile_expression(text)

    def test_variable_not_bound(self):
        with pytest.raises(InvalidParameter):
            evaluate_on_coords("s + 1", np.zeros((2, 1)))


class TestReading:
    def test_vector_json_with_inf(self, tmp_path):
        path = tmp_path / "g.json"
        path.write_text(json.dumps({"values": [1, "inf", 0.5]}))
        values = io.read_vector(path)
        assert values.tolist() == [1.0, math.inf, 0.5]

    def test_vector_csv_header(self, tmp_path):
        path = tmp_path / "u.csv"
        path.write_text("id,u\na,1.5\nb,-2\n")
        assert io.read_vector(path).tolist() == [1.5, -2.0]

    def test_vector_json_not_a_list(self, tmp_path):
        path = tmp_path / "u.json"
        path.write_text(json.dumps({"other": 1}))
        with pytest.raises(ConfigParse):
            io.read_vector(path)

    def test_missing(self, tmp_path):
        with pytest.raises(MissingInput):
            io.read_text(tmp_path / "absent.csv")

    def test_bad_number(self, tmp_path):
        path = tmp_path / "u.csv"
        path.write_text("1\nabc\n")
        with pytest.raises(ConfigParse):
            io.read_vector(path)

    def test_digest_is_stable(self, tmp_path):
        path = tmp_path / "a.txt"
        path.write_text("same")
        assert io.file_digest(path) == io.file_digest(path)
        assert io.file_digest(path).startswith("sha256:")


class TestWriting:
    def test_dumps_floats_and_inf(self):
        text = io.dumps({"a": 0.1, "b": math.inf, "c": [1, 2.5], "d": np.float64(1 / 3)})
        data = json.loads(text)
        assert data["a"] == 0.1
        assert data["b"] == "inf"
        assert data["c"] == [1, 2.5]
        assert data["d"] == 1 / 3
        assert io.load_plain(data)["b"] == math.inf

    def test_dumps_is_deterministic(self):
        payload = {"x": np.array([0.1, 0.2]), "y": {"z": (1, 2)}}
        assert io.dumps(payload) == io.dumps(payload)

    def test_csv_rows(self):
        text = io.rows_to_csv(["id", "value"], [["a", 0.5], ["b", math.inf]])
        assert text == "id,value\na,0.5\nb,inf\n"
