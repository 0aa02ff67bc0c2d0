"""Text file format for matrices and forms.

A matrix document is JSON with fields ``dim`` (int), ``complex`` (bool) and
``data``: the ``dim * dim`` entries in row-major order, each a real number or,
when ``complex`` is true, a ``[re, im]`` pair.  ``data`` may also be given as
a list of rows.  Form documents add ``space_dim`` (equal to ``dim``) and an
optional ``label``.

Example::

    {"dim": 2, "complex": false, "data": [1, 0, 0, 0]}
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import FormatError

__all__ = [
    "matrix_to_doc",
    "doc_to_matrix",
    "dumps_matrix",
    "loads_matrix",
    "read_matrix",
    "write_matrix",
    "form_to_doc",
    "doc_to_form_parts",
]


def _entry(value, is_complex: bool):
    if is_complex:
        if not (isinstance(value, (list, tuple)) and len(value) == 2):
            raise FormatError(f"complex entries must be [re, im] pairs, got {value!r}")
        re, im = value
        return complex(_real(re), _real(im))
    return _real(value)


def _real(value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FormatError(f"expected a real number, got {value!r}")
    return float(value)


def matrix_to_doc(m, label: str | None = None) -> dict:
    a = np.asarray(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise FormatError(f"only square matrices can be written, got shape {a.shape}")
    is_complex = bool(np.iscomplexobj(a) and np.any(a.imag != 0))
    flat = a.reshape(-1)
    if is_complex:
        data = [[float(z.real), float(z.imag)] for z in flat]
    else:
        data = [float(np.real(z)) for z in flat]
    doc = {"dim": int(a.shape[0]), "complex": is_complex, "data": data}
    if label is not None:
        doc["label"] = label
    return doc


def doc_to_matrix(doc: dict) -> np.ndarray:
    """Parse a matrix document; rejects non-square or malformed data."""
    if not isinstance(doc, dict):
        raise FormatError("matrix document must be a JSON object")
    for key in ("dim", "complex", "data"):
        if key not in doc:
            raise FormatError(f"missing field {key!r}")
    dim, is_complex, data = doc["dim"], doc["complex"], doc["data"]
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise FormatError(f"dim must be a positive integer, got {dim!r}")
    if not isinstance(is_complex, bool):
        raise FormatError("complex must be a boolean")
    if not isinstance(data, list):
        raise FormatError("data must be a list")

    nested = bool(data) and all(
        isinstance(row, list) and not (is_complex and len(row) == 2 and not isinstance(row[0], list))
        for row in data
    )
    if nested:
        if len(data) != dim or any(len(row) != dim for row in data):
            raise FormatError(f"data rows do not form a {dim}x{dim} matrix")
        entries = [e for row in data for e in row]
    else:
        entries = data
    if len(entries) != dim * dim:
        raise FormatError(f"expected {dim * dim} entries for a {dim}x{dim} matrix, got {len(entries)}")
    vals = [_entry(e, is_complex) for e in entries]
    dtype = complex if is_complex else float
    return np.array(vals, dtype=dtype).reshape(dim, dim)


def dumps_matrix(m, label: str | None = None) -> str:
    return json.dumps(matrix_to_doc(m, label))


def loads_matrix(text: str) -> np.ndarray:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not valid JSON: {exc}") from exc
    return doc_to_matrix(doc)


def read_matrix(path) -> np.ndarray:
    return loads_matrix(Path(path).read_text())


def write_matrix(path, m, label: str | None = None) -> None:
    Path(path).write_text(dumps_matrix(m, label) + "\n")


def form_to_doc(gram, label: str | None = None) -> dict:
    doc = matrix_to_doc(gram, label)
    doc["space_dim"] = doc["dim"]
    return doc


def doc_to_form_parts(doc: dict):
    """Return ``(gram, label)`` from a form document."""
    gram = doc_to_matrix(doc)
    space_dim = doc.get("space_dim", doc["dim"])
    if space_dim != doc["dim"]:
        raise FormatError(f"space_dim {space_dim!r} must equal dim {doc['dim']!r}")
    label = doc.get("label")
    if label is not None and not isinstance(label, str):
        raise FormatError("label must be a string")
    return gram, label
