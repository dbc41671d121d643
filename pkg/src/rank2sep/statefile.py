"""Reading and writing state files (format version "1").

A state file is a JSON document::

    {
      "format_version": "1",
      "kind": "pure" | "rank2" | "density",
      "dims": [N, N, ..., N],
      "data": ...
    }

Complex numbers are always ``[re, im]`` pairs.  ``data`` holds the amplitudes
in row-major multi-index order (party 0 slowest) for ``pure``; an object
``{"p": float, "e1": [...], "e2": [...]}`` for ``rank2``; and the flattened
row-major density matrix for ``density``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import StateFileError
from .multilinear import DensityMatrix, PartyShape, PureState, RankTwoState

FORMAT_VERSION = "1"
KINDS = ("pure", "rank2", "density")


@dataclass(frozen=True, eq=False)
class StateFile:
    """Parsed but not yet validated contents of a state file."""

    kind: str
    shape: PartyShape
    amplitudes: np.ndarray | None = None
    p: float | None = None
    e1: np.ndarray | None = None
    e2: np.ndarray | None = None
    matrix: np.ndarray | None = None

    def to_state(self, tol: float = 1e-9, orth_tol: float | None = None):
        """Build the library object.  Invariant violations raise :class:`InvalidState`."""
        if self.kind == "pure":
            return PureState(self.shape, self.amplitudes, tol=tol)
        if self.kind == "rank2":
            return RankTwoState(self.shape, self.p,
                                PureState(self.shape, self.e1, tol=tol),
                                PureState(self.shape, self.e2, tol=tol),
                                tol=tol if orth_tol is None else orth_tol)
        return DensityMatrix(self.shape, self.matrix, tol=tol)


def _complex_list(value, length, where):
    if not isinstance(value, list):
        raise StateFileError("expected a list of [re, im] pairs", where)
    if len(value) != length:
        raise StateFileError(f"expected {length} entries, found {len(value)}", where)
    out = np.empty(length, dtype=complex)
    for i, pair in enumerate(value):
        if (not isinstance(pair, list) or len(pair) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool)
                           for x in pair)):
            raise StateFileError("expected an [re, im] pair of numbers", f"{where}[{i}]")
        if not all(math.isfinite(x) for x in pair):
            raise StateFileError("non-finite value", f"{where}[{i}]")
        out[i] = complex(pair[0], pair[1])
    return out


def parse_state_file(text: str) -> StateFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateFileError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from None
    if not isinstance(doc, dict):
        raise StateFileError("top level must be an object", "line 1")
    for key in ("format_version", "kind", "dims", "data"):
        if key not in doc:
            raise StateFileError("missing required field", key)
    if doc["format_version"] != FORMAT_VERSION:
        raise StateFileError(f"unsupported version {doc['format_version']!r}", "format_version")
    kind = doc["kind"]
    if kind not in KINDS:
        raise StateFileError(f"unknown kind {kind!r}, expected one of {KINDS}", "kind")
    dims = doc["dims"]
    if (not isinstance(dims, list) or len(dims) < 2
            or not all(isinstance(d, int) and not isinstance(d, bool) for d in dims)):
        raise StateFileError("expected a list of at least two integers", "dims")
    if len(set(dims)) != 1:
        raise StateFileError("parties of unequal dimension are not supported", "dims")
    try:
        shape = PartyShape(len(dims), dims[0])
    except ValueError as exc:
        raise StateFileError(str(exc), "dims") from None

    data = doc["data"]
    if kind == "pure":
        return StateFile(kind, shape, amplitudes=_complex_list(data, shape.dim, "data"))
    if kind == "density":
        flat = _complex_list(data, shape.dim ** 2, "data")
        return StateFile(kind, shape, matrix=flat.reshape(shape.dim, shape.dim))
    if not isinstance(data, dict):
        raise StateFileError("rank2 data must be an object with p, e1, e2", "data")
    for key in ("p", "e1", "e2"):
        if key not in data:
            raise StateFileError("missing required field", f"data.{key}")
    p = data["p"]
    if not isinstance(p, (int, float)) or isinstance(p, bool):
        raise StateFileError("expected a number", "data.p")
    return StateFile(kind, shape, p=float(p),
                     e1=_complex_list(data["e1"], shape.dim, "data.e1"),
                     e2=_complex_list(data["e2"], shape.dim, "data.e2"))


def read_state_file(path) -> tuple[StateFile, bytes]:
    """Parse ``path``; also returns the raw bytes for digesting."""
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise StateFileError("file is not valid UTF-8", f"byte {exc.start}") from None
    return parse_state_file(text), raw


def _pairs(values, indent):
    pad = " " * indent
    lines = [f"{pad}[{json.dumps(float(v.real))}, {json.dumps(float(v.imag))}]"
             for v in np.asarray(values, dtype=complex).reshape(-1)]
    return "[\n" + ",\n".join(lines) + "\n" + " " * (indent - 2) + "]"


def format_state_file(kind: str, shape: PartyShape, *, amplitudes=None, p=None,
                      e1=None, e2=None, matrix=None) -> str:
    """Serialize with one ``[re, im]`` pair per line so parse errors point at a line."""
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    head = (f'{{\n  "format_version": "{FORMAT_VERSION}",\n  "kind": "{kind}",\n'
            f'  "dims": {json.dumps([shape.local_dim] * shape.num_parties)},\n')
    if kind == "pure":
        body = f'  "data": {_pairs(amplitudes, 4)}\n'
    elif kind == "density":
        body = f'  "data": {_pairs(matrix, 4)}\n'
    else:
        body = (f'  "data": {{\n    "p": {json.dumps(float(p))},\n'
                f'    "e1": {_pairs(e1, 6)},\n    "e2": {_pairs(e2, 6)}\n  }}\n')
    return head + body + "}\n"


def state_file_text(obj) -> str:
    """Serialize a :class:`PureState`, :class:`RankTwoState` or :class:`DensityMatrix`."""
    if isinstance(obj, PureState):
        return format_state_file("pure", obj.shape, amplitudes=obj.amplitudes)
    if isinstance(obj, RankTwoState):
        return format_state_file("rank2", obj.shape, p=obj.p,
                                 e1=obj.e1.amplitudes, e2=obj.e2.amplitudes)
    if isinstance(obj, DensityMatrix):
        return format_state_file("density", obj.shape, matrix=obj.entries)
    raise TypeError(f"cannot serialize {type(obj).__name__}")
