import json

import numpy as np
import pytest

from rank2sep import DensityMatrix, PartyShape, PureState, RankTwoState, assemble, ghz_state
from rank2sep.errors import InvalidState, StateFileError
from rank2sep.samples import random_orthogonal_to, random_pure
from rank2sep.statefile import parse_state_file, read_state_file, state_file_text

S32 = PartyShape(3, 2)


def doc(**overrides):
    base = {"format_version": "1", "kind": "pure", "dims": [2, 2, 2],
            "data": [[1, 0]] + [[0, 0]] * 7}
    base.update(overrides)
    return json.dumps(base)


def test_round_trip_pure(rng):
    state = random_pure(PartyShape(3, 3), rng)
    back = parse_state_file(state_file_text(state)).to_state()
    np.testing.assert_array_equal(back.amplitudes, state.amplitudes)


def test_round_trip_rank2(rng):
    e1 = random_pure(S32, rng)
    state = RankTwoState(S32, 0.37, e1, random_orthogonal_to(e1, rng))
    back = parse_state_file(state_file_text(state)).to_state()
    assert back.p == state.p
    np.testing.assert_array_equal(back.e1.amplitudes, state.e1.amplitudes)
    np.testing.assert_array_equal(back.e2.amplitudes, state.e2.amplitudes)


def test_round_trip_density(rng):
    e1 = random_pure(S32, rng)
    rho = assemble(0.6, e1, random_orthogonal_to(e1, rng))
    back = parse_state_file(state_file_text(rho)).to_state()
    assert isinstance(back, DensityMatrix)
    np.testing.assert_array_equal(back.entries, rho.entries)


def test_serialization_is_deterministic():
    text = state_file_text(ghz_state(S32))
    assert text == state_file_text(ghz_state(S32))
    assert text.count("\n") == 8 + 7


def test_json_syntax_error_has_position():
    text = doc().replace('"kind"', '"kind" :: ')
    with pytest.raises(StateFileError, match=r"line 1, column \d+"):
        parse_state_file(text)


def test_syntax_error_line_number():
    lines = state_file_text(ghz_state(S32)).splitlines()
    lines[6] = lines[6].replace(",", "", 1)
    with pytest.raises(StateFileError, match="line 7"):
        parse_state_file("\n".join(lines))


@pytest.mark.parametrize("overrides,where", [
    ({"format_version": "2"}, "format_version"),
    ({"kind": "mixed"}, "kind"),
    ({"dims": [2, 3, 2]}, "dims"),
    ({"dims": [2]}, "dims"),
    ({"dims": [1, 1]}, "dims"),
    ({"data": [[1, 0]] * 7}, "data"),
    ({"data": [[1, 0]] + [[0, 0]] * 6 + [[0]]}, r"data\[7\]"),
    ({"data": [[1, 0]] + [[0, 0]] * 6 + [["0", 0]]}, r"data\[7\]"),
    ({"kind": "rank2", "data": {"p": 0.5, "e1": []}}, "data.e2"),
    ({"kind": "rank2", "data": {"p": "x", "e1": [], "e2": []}}, "data.p"),
    ({"kind": "rank2", "data": {"p": 0.5, "e1": [[1, 0]] * 7, "e2": []}}, "data.e1"),
    ({"kind": "density"}, "data"),
])
def test_field_errors_name_location(overrides, where):
    with pytest.raises(StateFileError, match=where):
        parse_state_file(doc(**overrides))


def test_missing_field():
    text = json.dumps({"format_version": "1", "kind": "pure", "dims": [2, 2]})
    with pytest.raises(StateFileError, match="data"):
        parse_state_file(text)


def test_non_finite_rejected():
    text = doc().replace("[1, 0]", "[NaN, 0]", 1)
    with pytest.raises(StateFileError, match=r"data\[0\]"):
        parse_state_file(text)


def test_invariants_checked_after_parse():
    sf = parse_state_file(doc(data=[[1, 0]] * 8))
    with pytest.raises(InvalidState):
        sf.to_state()
    e = [[1, 0]] + [[0, 0]] * 7
    sf = parse_state_file(doc(kind="rank2", data={"p": 0.5, "e1": e, "e2": e}))
    with pytest.raises(InvalidState):
        sf.to_state()


def test_read_state_file_returns_raw_bytes(tmp_path):
    path = tmp_path / "ghz.json"
    path.write_text(state_file_text(ghz_state(S32)))
    sf, raw = read_state_file(path)
    assert raw == path.read_bytes()
    assert isinstance(sf.to_state(), PureState)
    path.write_bytes(b"\xff\xfe")
    with pytest.raises(StateFileError, match="byte 0"):
        read_state_file(path)
