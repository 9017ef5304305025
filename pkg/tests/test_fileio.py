import json

import numpy as np
import pytest

from copchan import channels as chn
from copchan import fileio
from copchan.discord import EXAMPLE_PAULI_R, InvalidStateError
from copchan.operator_core import haar_unitary


def round_trip(ch):
    return fileio.loads_channel(fileio.dumps_channel(ch))


def test_round_trip_zoo(rng):
    zoo = [chn.identity(3), chn.unitary(haar_unitary(2, rng)), chn.cloning(3, 0.7),
           chn.transpose_cloning(2, -0.4), chn.random_semi_classical(3, rng),
           chn.hamiltonian(np.diag([0.2, -0.2])), chn.random_channel(2, rng),
           chn.mixture(0.3, chn.identity(2), chn.amplitude_damping(0.2))]
    for ch in zoo:
        again = round_trip(ch)
        assert np.abs(again.choi - ch.choi).max() < 1e-15


def test_choi_kind(rng):
    ch = chn.random_channel(2, rng)
    text = json.dumps({"d": 2, "kind": "choi", "choi": fileio.encode_matrix(ch.choi)})
    assert np.abs(fileio.loads_channel(text).choi - ch.choi).max() == 0


def test_real_entries_accepted():
    ch = fileio.loads_channel('{"d": 2, "kind": "unitary", "U": [[0, 1], [1, 0]]}')
    assert np.abs(ch(np.diag([1.0, 0.0])) - np.diag([0.0, 1.0])).max() == 0


@pytest.mark.parametrize("literal", ["NaN", "Infinity", "-Infinity", "1e400"])
def test_non_finite_rejected_with_line(literal):
    text = '{\n "d": 3,\n "kind": "cloning",\n "c": %s\n}' % literal
    with pytest.raises(fileio.ParseError) as err:
        fileio.loads_channel(text)
    assert err.value.line == 4


def test_dimension_mismatch_located():
    text = '{\n "d": 3,\n "kind": "unitary",\n "U": [[1, 0], [0, 1]]\n}'
    with pytest.raises(fileio.ParseError) as err:
        fileio.loads_channel(text)
    assert err.value.line == 4 and "3x3" in str(err.value)


def test_nested_mixture_dimension_mismatch():
    text = json.dumps({"d": 2, "kind": "mixture", "p": 0.5, "ch1": {"d": 2, "kind": "identity"},
                       "ch2": {"d": 3, "kind": "identity"}}, indent=1)
    with pytest.raises(fileio.ParseError):
        fileio.loads_channel(text)


@pytest.mark.parametrize("text", [
    '{"d": 2, "kind": "teleport"}',
    '{"d": 2}',
    '{"d": "two", "kind": "identity"}',
    '[1, 2]',
    '{"d": 2, "kind": "identity"',
    '{"d": 2, "kind": "kraus", "kraus": []}',
])
def test_malformed(text):
    with pytest.raises(fileio.ParseError):
        fileio.loads_channel(text)


def test_truncated_json_line():
    with pytest.raises(fileio.ParseError) as err:
        fileio.loads_channel('{\n"d": 2,\n"kind": "identity",\n')
    assert err.value.line is not None and err.value.line >= 3


@pytest.mark.parametrize("text", [
    '{"d": 3, "kind": "cloning", "c": 2.0}',
    '{"d": 2, "kind": "hamiltonian", "H": [[1, 0], [0, 0]]}',
    '{"d": 2, "kind": "semi_classical", "povm": [[[1, 0], [0, 0]]], "states": [[1, 0]]}',
    '{"d": 2, "kind": "mixture", "p": 2, "ch1": {"d": 2, "kind": "identity"}, '
    '"ch2": {"d": 2, "kind": "identity"}}',
])
def test_invalid_channel_values(text):
    with pytest.raises(fileio.InputValidationError):
        fileio.loads_channel(text)


def test_states():
    st = fileio.loads_state(json.dumps({"pauli_r": EXAMPLE_PAULI_R.tolist()}))
    assert st.d_a == 2 and np.abs(st.pauli_r - EXAMPLE_PAULI_R).max() == 0
    rho = np.eye(6) / 6
    st = fileio.loads_state(json.dumps({"dA": 2, "dB": 3, "rho": fileio.encode_matrix(rho)}))
    assert np.abs(st.rho - rho).max() == 0
    back = fileio.loads_state(json.dumps(fileio.state_to_dict(st)))
    assert np.abs(back.rho - rho).max() == 0


def test_invalid_state():
    with pytest.raises(InvalidStateError):
        fileio.loads_state(json.dumps({"dA": 2, "dB": 2, "rho": np.diag([1.0, 0.5, -0.5, 0]).tolist()}))
    with pytest.raises(fileio.ParseError):
        fileio.loads_state('{"pauli_r": [[0.25]]}')
