import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quasiunits.errors import FormatError
from quasiunits.forms_iso import Form
from quasiunits.matfile import doc_to_matrix, dumps_matrix, loads_matrix, read_matrix, write_matrix


def test_real_flat():
    m = doc_to_matrix({"dim": 2, "complex": False, "data": [1, 2, 3, 4]})
    assert np.array_equal(m, [[1, 2], [3, 4]])


def test_nested_rows():
    m = doc_to_matrix({"dim": 2, "complex": False, "data": [[1, 0], [0, 2]]})
    assert np.array_equal(m, np.diag([1.0, 2.0]))


def test_complex_pairs():
    m = doc_to_matrix({"dim": 2, "complex": True, "data": [[1, 0], [0, 1], [0, -1], [2, 0]]})
    assert m[0, 1] == 1j and m[1, 0] == -1j


def test_complex_nested_rows():
    data = [[[1, 0], [0, 1]], [[0, -1], [2, 0]]]
    m = doc_to_matrix({"dim": 2, "complex": True, "data": data})
    assert m[1, 1] == 2


@pytest.mark.parametrize(
    "doc",
    [
        {"dim": 2, "complex": False, "data": [1, 2, 3]},
        {"dim": 2, "complex": False, "data": [[1, 2, 3], [4, 5, 6]]},
        {"dim": 2, "complex": True, "data": [1, 2, 3, 4]},
        {"dim": 0, "complex": False, "data": []},
        {"dim": 1, "complex": "no", "data": [1]},
        {"dim": 1, "data": [1]},
        {"dim": 1, "complex": False, "data": ["x"]},
    ],
)
def test_rejects_malformed(doc):
    with pytest.raises(FormatError):
        doc_to_matrix(doc)


def test_rejects_bad_json():
    with pytest.raises(FormatError):
        loads_matrix("{not json")


@given(st.integers(1, 5), st.integers(0, 2**31), st.booleans())
def test_round_trip(n, seed, cplx):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((n, n))
    if cplx:
        m = m + 1j * rng.standard_normal((n, n))
    back = loads_matrix(dumps_matrix(m))
    assert np.array_equal(back, m)


def test_file_io(tmp_path):
    p = tmp_path / "a.mat"
    write_matrix(p, np.eye(3), "eye")
    assert json.loads(p.read_text())["label"] == "eye"
    assert np.array_equal(read_matrix(p), np.eye(3))


def test_form_doc_round_trip():
    f = Form(np.diag([1.0, 2.0]), label="t")
    doc = f.to_doc()
    assert doc["space_dim"] == 2
    g = Form.from_doc(doc)
    assert g.label == "t" and np.allclose(g.gram.matrix, f.gram.matrix)


def test_form_doc_space_dim_must_match():
    doc = Form(np.eye(2)).to_doc()
    doc["space_dim"] = 3
    with pytest.raises(FormatError):
        Form.from_doc(doc)
