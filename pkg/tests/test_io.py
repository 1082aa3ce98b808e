import json

import numpy as np
import pytest

from rcc.channel import AuxInput, AuxInputP2, AuxInputV
from rcc.errors import NegativeEntry, RowSumMismatch, SizeMismatch, ValidationError
from rcc.io import (
    channel_from_obj,
    channel_to_obj,
    csv_text,
    dumps,
    fmt,
    input_from_obj,
    input_to_obj,
    load_channel,
    parse_json,
    read_csv,
)


class TestJson:
    def test_rejects_nan(self):
        with pytest.raises(ValidationError):
            parse_json('{"a": NaN}')

    def test_rejects_duplicate_keys(self):
        with pytest.raises(ValidationError):
            parse_json('{"a": 1, "a": 2}')

    def test_syntax(self):
        with pytest.raises(ValidationError):
            parse_json("{")

    def test_dumps_is_sorted_with_newline(self):
        assert dumps({"b": 1, "a": 2}) == '{\n  "a": 2,\n  "b": 1\n}\n'

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError):
            load_channel(tmp_path / "none.json")


class TestChannelFile:
    def test_round_trip(self, flip):
        again = channel_from_obj(json.loads(dumps(channel_to_obj(flip))))
        assert np.array_equal(again.gamma, flip.gamma)

    def test_unknown_key(self, flip):
        obj = channel_to_obj(flip)
        obj["W"] = 3
        with pytest.raises(ValidationError):
            channel_from_obj(obj)

    def test_declared_size_mismatch(self, flip):
        obj = channel_to_obj(flip)
        obj["Z"] = 3
        with pytest.raises(SizeMismatch):
            channel_from_obj(obj)

    def test_ragged(self, flip):
        obj = channel_to_obj(flip)
        obj["gamma"][0][0] = [[1.0]]
        with pytest.raises(ValidationError):
            channel_from_obj(obj)

    def test_bool_size_rejected(self, flip):
        obj = channel_to_obj(flip)
        obj["X"] = True
        with pytest.raises(ValidationError):
            channel_from_obj(obj)

    def test_row_sum(self, flip):
        obj = channel_to_obj(flip)
        obj["gamma"][0][0][0][0] += 0.01
        with pytest.raises(RowSumMismatch):
            channel_from_obj(obj)


class TestInputFile:
    def test_p1(self, flip, uniform_input):
        aux = input_from_obj(input_to_obj(uniform_input), flip)
        assert isinstance(aux, AuxInput)

    def test_p2_needs_channel(self, flip):
        p = np.zeros((1, 2, 2, 2))
        p[0] = 0.25 * flip.gamma_z.transpose(1, 0, 2)
        obj = {"U": 1, "p": p.tolist()}
        with pytest.raises(ValidationError):
            input_from_obj(obj)
        assert isinstance(input_from_obj(obj, flip), AuxInputP2)

    def test_v_factorisation(self, flip):
        aux = AuxInputV(np.full((1, 2, 2), 0.25), np.array([[0.9, 0.1], [0.4, 0.6]]))
        back = input_from_obj(input_to_obj(aux), flip)
        np.testing.assert_allclose(back.p_x_given_v, aux.p_x_given_v, atol=1e-15)

    def test_v_not_factorising(self, flip):
        p = np.zeros((1, 2, 2, 2))
        p[0, 0, 0, 0] = p[0, 0, 1, 1] = 0.5  # X depends on S given V
        with pytest.raises(ValidationError):
            input_from_obj({"U": 1, "V": 2, "p": p.tolist()}, flip)

    def test_negative(self, flip):
        p = np.full((1, 2, 2, 2), 0.125)
        p[0, 0, 0, 0], p[0, 0, 0, 1] = -0.125, 0.375
        with pytest.raises(NegativeEntry):
            input_from_obj({"U": 1, "V": 2, "p": p.tolist()}, flip)

    def test_leading_size(self):
        with pytest.raises(SizeMismatch):
            input_from_obj({"U": 2, "p": np.full((1, 2, 2), 0.25).tolist()})

    def test_alphabet_mismatch(self, flip):
        with pytest.raises(SizeMismatch):
            input_from_obj({"U": 1, "p": np.full((1, 1, 2), 0.5).tolist()}, flip)


class TestCsv:
    def test_round_trip(self):
        text = csv_text(("name", "a", "b"), [("x", 0.1, None), ("y", 1e-17, 3.0)])
        assert "\r" not in text
        header, rows = read_csv(text)
        assert header == ["name", "a", "b"]
        assert rows == [["x", 0.1, None], ["y", 1e-17, 3.0]]

    def test_fmt_is_exact(self):
        x = 0.1 + 0.2
        assert float(fmt(x)) == x
        assert fmt(np.float64(2.5)) == "2.5"

    def test_empty(self):
        with pytest.raises(ValidationError):
            read_csv("")

    def test_integers_stay_integers(self):
        assert fmt(8) == "8" and fmt(np.int64(3)) == "3"
