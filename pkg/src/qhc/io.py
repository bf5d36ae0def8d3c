"""JSON file formats for Hamiltonians, MPS, circuits and Quantum 2-SAT instances.

Complex arrays are stored as ``{"re": [...], "im": [...]}`` nested row-major
lists.  Floats go through :func:`json.dumps`, which writes the shortest repr
that parses back to the same double, so every round trip is bit-exact.
Malformed files raise :class:`FormatError` naming the offending line or field.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import SCHEMA_VERSION
from .hamiltonian import LocalHamiltonian, LocalTerm
from .qsat2 import QsatInstance
from .tensornet.mps import MPS


class FormatError(ValueError):
    """Malformed input file; the message names the location."""


# ---------------------------------------------------------------------------
# low level


def complex_to_json(a):
    a = np.asarray(a, dtype=complex)
    return {"re": a.real.tolist(), "im": a.imag.tolist()}


def complex_from_json(obj, where, shape=None):
    if not isinstance(obj, dict) or "re" not in obj:
        raise FormatError(f"{where}: expected an object with 're' (and optional 'im') arrays")
    try:
        re = np.array(obj["re"], dtype=float)
        im = np.array(obj.get("im", np.zeros_like(re)), dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{where}: non-numeric or ragged entries ({exc})") from None
    if re.shape != im.shape:
        raise FormatError(f"{where}: 're' shape {re.shape} differs from 'im' shape {im.shape}")
    if shape is not None and re.shape != tuple(shape):
        raise FormatError(f"{where}: shape {re.shape}, expected {tuple(shape)}")
    out = np.empty(re.shape, dtype=complex)
    out.real, out.imag = re, im
    return out


def _field(obj, key, where, kind=None):
    if not isinstance(obj, dict):
        raise FormatError(f"{where}: expected an object")
    if key not in obj:
        raise FormatError(f"{where}: missing field '{key}'")
    val = obj[key]
    bad = kind is not None and (not isinstance(val, kind) or (kind is int and isinstance(val, bool)))
    if bad:
        raise FormatError(f"{where}.{key}: expected {getattr(kind, '__name__', kind)}, got {type(val).__name__}")
    return val


def loads(text, what="input"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{what}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def read_json(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror}") from None
    return loads(text, str(path))


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=1) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Hamiltonian


def hamiltonian_to_json(H: LocalHamiltonian):
    return {
        "schema": SCHEMA_VERSION,
        "n": H.n,
        "dims": list(H.dims),
        "terms": [{"support": list(t.support), "matrix": complex_to_json(t.matrix)} for t in H.terms],
        "metadata": H.metadata,
    }


def hamiltonian_from_json(obj) -> LocalHamiltonian:
    n = _field(obj, "n", "hamiltonian", int)
    dims = _field(obj, "dims", "hamiltonian", list)
    if len(dims) != n or not all(isinstance(d, int) and d >= 1 for d in dims):
        raise FormatError("hamiltonian.dims: expected n positive integers")
    terms = []
    for k, t in enumerate(_field(obj, "terms", "hamiltonian", list)):
        where = f"terms[{k}]"
        sup = _field(t, "support", where, list)
        if not sup or not all(isinstance(s, int) and 0 <= s < n for s in sup):
            raise FormatError(f"{where}.support: expected site indices in [0, {n})")
        dd = int(np.prod([dims[s] for s in sup]))
        mat = complex_from_json(_field(t, "matrix", where), f"{where}.matrix", (dd, dd))
        try:
            terms.append(LocalTerm(tuple(sup), mat))
        except ValueError as exc:
            raise FormatError(f"{where}: {exc}") from None
    meta = obj.get("metadata", {})
    if not isinstance(meta, dict):
        raise FormatError("hamiltonian.metadata: expected an object")
    return LocalHamiltonian(n, dims, terms, meta)


def save_hamiltonian(H, path):
    write_json(path, hamiltonian_to_json(H))


def load_hamiltonian(path) -> LocalHamiltonian:
    return hamiltonian_from_json(read_json(path))


# ---------------------------------------------------------------------------
# MPS


def mps_to_json(m: MPS):
    return {
        "schema": SCHEMA_VERSION,
        "n": m.n,
        "d": m.d,
        "bond_dims": m.bond_dims,
        "canonical_form": m.canonical_form,
        "center": m.center,
        "tensors": [complex_to_json(A) for A in m.tensors],
    }


def mps_from_json(obj) -> MPS:
    n = _field(obj, "n", "mps", int)
    d = _field(obj, "d", "mps", int)
    bd = _field(obj, "bond_dims", "mps", list)
    if len(bd) != n + 1:
        raise FormatError(f"mps.bond_dims: expected {n + 1} entries")
    ts = _field(obj, "tensors", "mps", list)
    if len(ts) != n:
        raise FormatError(f"mps.tensors: expected {n} tensors, got {len(ts)}")
    tensors = [complex_from_json(t, f"tensors[{i}]", (bd[i], d, bd[i + 1])) for i, t in enumerate(ts)]
    try:
        return MPS(tensors, obj.get("canonical_form", "none"), obj.get("center", -1))
    except ValueError as exc:
        raise FormatError(f"mps: {exc}") from None


def mps_equal(a: MPS, b: MPS):
    return (
        a.n == b.n
        and a.canonical_form == b.canonical_form
        and a.center == b.center
        and all(np.array_equal(x, y) for x, y in zip(a.tensors, b.tensors))
    )


# ---------------------------------------------------------------------------
# circuits


def circuit_to_json(circ):
    return {
        "schema": SCHEMA_VERSION,
        "N": circ.N,
        "m": circ.m,
        "gates": [{"targets": list(t), "matrix": complex_to_json(U)} for t, U in circ.gates],
    }


def circuit_from_json(obj):
    from .clock import QuantumCircuit

    N = _field(obj, "N", "circuit", int)
    m = _field(obj, "m", "circuit", int)
    gates = []
    for k, g in enumerate(_field(obj, "gates", "circuit", list)):
        where = f"gates[{k}]"
        tg = _field(g, "targets", where, list)
        if not tg or not all(isinstance(s, int) for s in tg):
            raise FormatError(f"{where}.targets: expected a list of qubit indices")
        U = complex_from_json(_field(g, "matrix", where), f"{where}.matrix", (2 ** len(tg),) * 2)
        gates.append((tuple(tg), U))
    try:
        return QuantumCircuit(N, m, gates)
    except ValueError as exc:
        raise FormatError(f"circuit: {exc}") from None


# ---------------------------------------------------------------------------
# Quantum 2-SAT instances


def qsat_to_json(inst: QsatInstance):
    if inst.source is not None:
        items = inst.source
    else:
        # forbidden vectors spanning each projector's range
        items = []
        for (i, j), P in inst.clauses.items():
            w, v = np.linalg.eigh(P)
            items.append(((i, j), [v[:, k] for k in range(4) if w[k] > 0.5]))
    return {
        "schema": SCHEMA_VERSION,
        "n": inst.n,
        "clauses": [{"i": i, "j": j, "vectors": [complex_to_json(v) for v in vs]} for (i, j), vs in items],
    }


def qsat_from_json(obj) -> QsatInstance:
    n = _field(obj, "n", "qsat", int)
    items = []
    for k, c in enumerate(_field(obj, "clauses", "qsat", list)):
        where = f"clauses[{k}]"
        i = _field(c, "i", where, int)
        j = _field(c, "j", where, int)
        if i == j or not (0 <= i < n and 0 <= j < n):
            raise FormatError(f"{where}: qubits ({i}, {j}) must be distinct and in [0, {n})")
        vs = [complex_from_json(v, f"{where}.vectors[{t}]", (4,)) for t, v in enumerate(_field(c, "vectors", where, list))]
        items.append(((i, j), vs))
    return QsatInstance.from_vectors(n, items)


def qsat_equal(a: QsatInstance, b: QsatInstance):
    if a.n != b.n or a.clauses.keys() != b.clauses.keys():
        return False
    if not all(np.array_equal(a.clauses[k], b.clauses[k]) for k in a.clauses):
        return False
    if (a.source is None) != (b.source is None):
        return False
    if a.source is not None:
        if len(a.source) != len(b.source):
            return False
        for (pa, va), (pb, vb) in zip(a.source, b.source):
            if pa != pb or len(va) != len(vb) or not all(np.array_equal(x, y) for x, y in zip(va, vb)):
                return False
    return True


def qsat_resolution_to_json(res, n):
    out = {"verdict": res.verdict, "witness": res.witness, "merges": len(res.log)}
    if res.verdict == "SAT":
        out["assignment"] = [{"qubits": list(b), "state": complex_to_json(v)} for b, v in res.assignment]
    return out


__all__ = [
    "FormatError",
    "complex_to_json",
    "complex_from_json",
    "loads",
    "read_json",
    "write_json",
    "hamiltonian_to_json",
    "hamiltonian_from_json",
    "save_hamiltonian",
    "load_hamiltonian",
    "mps_to_json",
    "mps_from_json",
    "mps_equal",
    "circuit_to_json",
    "circuit_from_json",
    "qsat_to_json",
    "qsat_from_json",
    "qsat_equal",
    "qsat_resolution_to_json",
]
