"""JSON formats for channels and bipartite states.

Complex numbers are ``[re, im]`` pairs (a bare real number is also accepted).
Channel objects carry ``"d"`` and ``"kind"`` plus kind-specific fields::

    kraus            "kraus": [matrix, ...]
    choi             "choi": matrix (d^2 x d^2)
    identity         -
    unitary          "U": matrix
    cloning          "c": number
    transpose_cloning "c": number
    semi_classical   "povm": [matrix, ...], "states": [vector, ...]
    hamiltonian      "H": matrix
    mixture          "p": number, "ch1": channel, "ch2": channel

States are ``{"dA", "dB", "rho"}`` or, for two qubits, ``{"pauli_r": 4x4}``.
"""
from __future__ import annotations

import json
import math
import re

import numpy as np

from . import channels as chn
from .channels import QuantumChannel
from .discord import BipartiteState
from .operator_core import CopchanError, DimensionError

KINDS = ("kraus", "choi", "identity", "unitary", "cloning", "transpose_cloning",
         "semi_classical", "hamiltonian", "mixture")


class _LocatedError(CopchanError, ValueError):
    def __init__(self, message: str, line: int | None = None, path: str = ""):
        self.line = line
        self.path = path
        where = f"line {line}" if line else "unknown line"
        if path:
            where += f", field {path}"
        super().__init__(f"{where}: {message}")


class ParseError(_LocatedError):
    """Malformed or dimension-inconsistent input.  ``line`` is 1-based when known."""


class InputValidationError(_LocatedError):
    """Well-formed input describing an invalid channel (bad parameter, incomplete POVM, ...)."""


class _Locator:
    """Best-effort mapping from a JSON field path to a source line."""

    def __init__(self, text: str):
        self.text = text

    def line_of_offset(self, pos: int) -> int:
        return self.text.count("\n", 0, pos) + 1

    def line_of_path(self, path: list) -> int | None:
        pos = 0
        found = None
        for key in path:
            if not isinstance(key, str):
                continue
            m = re.compile(r'"%s"\s*:' % re.escape(key)).search(self.text, pos)
            if m is None:
                break
            pos = found = m.start()
        return None if found is None else self.line_of_offset(found)

    def line_of_literal(self, literal: str) -> int | None:
        m = re.search(r"(?<![\w.])%s(?![\w.])" % re.escape(literal), self.text)
        return None if m is None else self.line_of_offset(m.start())


def _fmt_path(path: list) -> str:
    out = "$"
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def _loads(text: str):
    loc = _Locator(text)

    def bad_constant(name):
        raise ParseError(f"non-finite number {name} is not allowed", loc.line_of_literal(name))

    def check_float(s):
        x = float(s)
        if not math.isfinite(x):
            raise ParseError(f"number {s} overflows to infinity", loc.line_of_literal(s))
        return x

    try:
        data = json.loads(text, parse_constant=bad_constant, parse_float=check_float)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from exc
    return data, loc


class _Reader:
    def __init__(self, loc: _Locator):
        self.loc = loc

    def fail(self, msg: str, path: list):
        raise ParseError(msg, self.loc.line_of_path(path), _fmt_path(path))

    def field(self, obj: dict, key: str, path: list):
        if not isinstance(obj, dict):
            self.fail("expected an object", path)
        if key not in obj:
            self.fail(f"missing field {key!r}", path)
        return obj[key]

    def number(self, x, path: list) -> float:
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            self.fail(f"expected a number, got {type(x).__name__}", path)
        return float(x)

    def integer(self, x, path: list) -> int:
        if isinstance(x, bool) or not isinstance(x, int):
            self.fail(f"expected an integer, got {x!r}", path)
        return x

    def scalar(self, x, path: list) -> complex:
        if isinstance(x, list):
            if len(x) != 2:
                self.fail("complex entries must be [re, im] pairs", path)
            return complex(self.number(x[0], path), self.number(x[1], path))
        return complex(self.number(x, path))

    def vector(self, x, n: int, path: list) -> np.ndarray:
        if not isinstance(x, list) or len(x) != n:
            self.fail(f"expected a vector of length {n}", path)
        return np.array([self.scalar(v, path) for v in x])

    def matrix(self, x, n: int, path: list) -> np.ndarray:
        if not isinstance(x, list) or len(x) != n:
            got = len(x) if isinstance(x, list) else type(x).__name__
            self.fail(f"expected a {n}x{n} matrix, got {got} rows", path)
        rows = []
        for i, row in enumerate(x):
            if not isinstance(row, list) or len(row) != n:
                self.fail(f"row {i} must have {n} entries", path)
            rows.append([self.scalar(v, path) for v in row])
        return np.array(rows)

    def matrices(self, x, n: int, path: list) -> list[np.ndarray]:
        if not isinstance(x, list) or not x:
            self.fail("expected a non-empty list of matrices", path)
        return [self.matrix(m, n, path) for m in x]

    def channel(self, obj, path: list) -> QuantumChannel:
        if not isinstance(obj, dict):
            self.fail("channel must be a JSON object", path)
        d = self.integer(self.field(obj, "d", path), path + ["d"])
        if d < 1:
            self.fail(f"dimension must be positive, got {d}", path + ["d"])
        kind = self.field(obj, "kind", path)
        if kind not in KINDS:
            self.fail(f"unknown channel kind {kind!r}", path + ["kind"])
        try:
            ch = self._build(kind, obj, d, path)
        except _LocatedError:
            raise
        except DimensionError as exc:
            self.fail(str(exc), path)
        except CopchanError as exc:
            raise InputValidationError(str(exc), self.loc.line_of_path(path), _fmt_path(path)) from exc
        if ch.d != d:
            self.fail(f"channel has dimension {ch.d}, declared {d}", path + ["d"])
        return ch

    def _build(self, kind: str, obj: dict, d: int, path: list) -> QuantumChannel:
        get = lambda k: self.field(obj, k, path)  # noqa: E731
        if kind == "identity":
            return chn.identity(d)
        if kind == "kraus":
            return chn.from_kraus(self.matrices(get("kraus"), d, path + ["kraus"]))
        if kind == "choi":
            return chn.from_choi(self.matrix(get("choi"), d * d, path + ["choi"]))
        if kind == "unitary":
            return chn.unitary(self.matrix(get("U"), d, path + ["U"]))
        if kind in ("cloning", "transpose_cloning"):
            c = self.number(get("c"), path + ["c"])
            return getattr(chn, kind)(d, c)
        if kind == "semi_classical":
            povm = self.matrices(get("povm"), d, path + ["povm"])
            raw = get("states")
            if not isinstance(raw, list):
                self.fail("expected a list of vectors", path + ["states"])
            states = [self.vector(v, d, path + ["states"]) for v in raw]
            return chn.semi_classical(povm, states)
        if kind == "hamiltonian":
            return chn.hamiltonian(self.matrix(get("H"), d, path + ["H"]))
        p = self.number(get("p"), path + ["p"])
        ch1 = self.channel(get("ch1"), path + ["ch1"])
        ch2 = self.channel(get("ch2"), path + ["ch2"])
        return chn.mixture(p, ch1, ch2)

    def state(self, obj) -> BipartiteState:
        if not isinstance(obj, dict):
            self.fail("state must be a JSON object", [])
        if "pauli_r" in obj:
            raw = obj["pauli_r"]
            if not isinstance(raw, list) or len(raw) != 4:
                self.fail("pauli_r must be a 4x4 real array", ["pauli_r"])
            rows = []
            for row in raw:
                if not isinstance(row, list) or len(row) != 4:
                    self.fail("pauli_r rows must have 4 entries", ["pauli_r"])
                rows.append([self.number(v, ["pauli_r"]) for v in row])
            return BipartiteState.from_pauli(np.array(rows))
        d_a = self.integer(self.field(obj, "dA", []), ["dA"])
        d_b = self.integer(self.field(obj, "dB", []), ["dB"])
        if d_a < 1 or d_b < 1:
            self.fail("dimensions must be positive", ["dA"])
        rho = self.matrix(self.field(obj, "rho", []), d_a * d_b, ["rho"])
        return BipartiteState(d_a, d_b, rho)


def loads_channel(text: str) -> QuantumChannel:
    data, loc = _loads(text)
    return _Reader(loc).channel(data, [])


def loads_state(text: str) -> BipartiteState:
    """Parse a state; an invalid density matrix raises ``InvalidStateError``."""
    data, loc = _loads(text)
    return _Reader(loc).state(data)


def load_channel(path) -> QuantumChannel:
    with open(path, encoding="utf-8") as fh:
        return loads_channel(fh.read())


def load_state(path) -> BipartiteState:
    with open(path, encoding="utf-8") as fh:
        return loads_state(fh.read())


# ---------------------------------------------------------------------------
# Writing
# ---------------------------------------------------------------------------

def encode_matrix(m) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def encode_vector(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def channel_to_dict(ch: QuantumChannel) -> dict:
    """Serializable form; zoo channels keep their kind, others become Choi."""
    p = ch.params
    out = {"d": ch.d, "kind": ch.name}
    if ch.name == "identity":
        pass
    elif ch.name == "unitary":
        out["U"] = encode_matrix(p["U"])
    elif ch.name in ("cloning", "transpose_cloning"):
        out["c"] = float(p["c"])
    elif ch.name == "semi_classical":
        out["povm"] = [encode_matrix(m) for m in p["povm"]]
        out["states"] = [encode_vector(v) for v in p["states"]]
    elif ch.name == "hamiltonian":
        out["H"] = encode_matrix(p["H"])
    elif ch.name == "mixture":
        out.update(p=float(p["p"]), ch1=channel_to_dict(p["ch1"]), ch2=channel_to_dict(p["ch2"]))
    elif ch.kraus is not None:
        out = {"d": ch.d, "kind": "kraus", "kraus": [encode_matrix(k) for k in ch.kraus]}
    else:
        out = {"d": ch.d, "kind": "choi", "choi": encode_matrix(ch.choi)}
    return out


def dumps_channel(ch: QuantumChannel) -> str:
    return json.dumps(channel_to_dict(ch), indent=1)


def state_to_dict(st: BipartiteState) -> dict:
    if st.pauli_r is not None:
        return {"pauli_r": st.pauli_r.tolist()}
    return {"dA": st.d_a, "dB": st.d_b, "rho": encode_matrix(st.rho)}
