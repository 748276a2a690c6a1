"""JSON formats for channels, states and list codes.

Message ids in code files are 1-based; decoder maps are indexed by the
output word's mixed-radix index with the last letter least significant.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .codes import ClassicalListDecoder, Encoder, ListCode, QuantumListDecoder
from .core import Channel, DensityMatrix, ProbDist, State, channel_to_json, validate_channel
from .errors import InvalidCode


def _complex(obj) -> np.ndarray:
    re = np.array(obj["re"], dtype=float)
    im = np.array(obj.get("im", np.zeros_like(re)), dtype=float)
    return re + 1j * im


def _split(m: np.ndarray) -> dict:
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


def read_channel(path) -> Channel:
    return validate_channel(load_json(path))


def write_channel(W: Channel, path) -> None:
    dump_json(channel_to_json(W), path)


def state_from_json(raw: dict) -> State:
    """``{"kind": "classical", "probs": [...]}`` or ``{"kind": "cq", "re": ..., "im": ...}``."""
    if raw.get("kind") == "classical":
        return ProbDist(raw["probs"])
    if raw.get("kind") == "cq":
        return DensityMatrix(_complex(raw))
    raise ValueError(f"unknown state kind {raw.get('kind')!r}")


def state_to_json(sigma: State) -> dict:
    if isinstance(sigma, ProbDist):
        return {"kind": "classical", "probs": sigma.probs.tolist()}
    return {"kind": "cq", **_split(sigma.entries)}


def code_from_json(raw: dict) -> ListCode:
    encoder = Encoder(raw["encoder"])
    dec = raw["decoder"]
    if dec["kind"] == "classical":
        decoder = ClassicalListDecoder(np.array(dec["map"], dtype=np.int64) - 1)
    elif dec["kind"] == "quantum":
        decoder = QuantumListDecoder(tuple(
            (tuple(int(i) - 1 for i in el["subset"]), _complex(el)) for el in dec["elements"]
        ))
    else:
        raise InvalidCode(f"unknown decoder kind {dec['kind']!r}")
    code = ListCode(encoder, decoder)
    for field, value in (("n", code.n), ("N", code.N), ("L", code.L)):
        if field in raw and int(raw[field]) != value:
            raise InvalidCode(f"header {field}={raw[field]} disagrees with tables ({value})")
    return code


def code_to_json(code: ListCode) -> dict:
    if code.is_quantum:
        dec = {"kind": "quantum", "elements": [
            {"subset": [i + 1 for i in subset], **_split(m)} for subset, m in code.decoder.elements
        ]}
    else:
        dec = {"kind": "classical", "map": (code.decoder.table + 1).tolist()}
    return {
        "n": code.n,
        "N": code.N,
        "L": code.L,
        "encoder": code.encoder.table.tolist(),
        "decoder": dec,
    }


def read_code(path) -> ListCode:
    return code_from_json(load_json(path))


def write_code(code: ListCode, path) -> None:
    dump_json(code_to_json(code), path)
