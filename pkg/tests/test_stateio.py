import json

import numpy as np
import pytest

from sepcrit.bloch import DensityMatrix
from sepcrit.errors import ValidationError
from sepcrit.stateio import (
    PACKED_MAGIC,
    read_state,
    state_from_json_text,
    state_from_packed,
    state_to_json_dict,
    state_to_packed,
)
from sepcrit.states import random_state


@pytest.fixture
def rho():
    return random_state((2, 3), seed=11)


def test_json_roundtrip_is_exact(rho):
    back = state_from_json_text(json.dumps(state_to_json_dict(rho)))
    np.testing.assert_array_equal(back.matrix, rho.matrix)
    assert back.dims == (2, 3)


def test_json_interleaved_row_major(rho):
    data = state_to_json_dict(rho)["data"]
    assert data[1] == [rho.matrix[0, 1].real, rho.matrix[0, 1].imag]
    assert data[6] == [rho.matrix[1, 0].real, rho.matrix[1, 0].imag]


def test_split_form_accepted():
    text = json.dumps({"dims": [2], "re": [0.5, 0, 0, 0.5]})
    np.testing.assert_array_equal(state_from_json_text(text).matrix, np.eye(2) / 2)


def test_packed_roundtrip(rho, tmp_path):
    blob = state_to_packed(rho)
    assert blob.startswith(PACKED_MAGIC)
    path = tmp_path / "rho.bin"
    path.write_bytes(blob)
    np.testing.assert_array_equal(read_state(path).matrix, rho.matrix)


@pytest.mark.parametrize("doc,message", [
    ({"dims": [2], "data": [[0.5, 0], [0, 0], [0, 0]]}, "first gap at row 1, col 1"),
    ({"dims": [2], "data": [[0.5, 0], [0, 0], [0, "x"], [0.5, 0]]}, "row 1, col 0"),
    ({"dims": [2], "data": [[0.5, 0], [0, 0], [0, 0], [0.5]]}, "row 1, col 1"),
    ({"dims": [2], "re": [[0.5, 0], [0, 0.5]], "data": []}, "not both"),
    ({"dims": [2], "data": [], "colour": 1}, "unknown fields"),
    ({"dims": [0], "data": []}, "positive integer"),
    ({"dims": [2]}, "missing field"),
])
def test_json_diagnostics(doc, message):
    with pytest.raises(ValidationError, match=message):
        state_from_json_text(json.dumps(doc))


def test_invalid_json_position():
    with pytest.raises(ValidationError, match="line 2, col"):
        state_from_json_text('{"dims": [2],\n "data": [,]}')


def test_packed_non_finite(rho):
    blob = bytearray(state_to_packed(rho))
    offset = len(blob) - 16 * 36 + 16 * 7 + 8  # imaginary part of entry (1, 1)
    blob[offset:offset + 8] = np.float64(np.nan).tobytes()
    with pytest.raises(ValidationError, match="row 1, col 1"):
        state_from_packed(bytes(blob))


def test_packed_bad_magic():
    with pytest.raises(ValidationError, match="magic"):
        state_from_packed(b"NOTSTATE" + bytes(8))


def test_rejects_non_state(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"dims": [2], "data": [[1, 0], [0, 0], [0, 0], [1, 0]]}))
    with pytest.raises(ValidationError, match="trace"):
        read_state(path)
