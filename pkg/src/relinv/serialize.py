"""JSON artifacts with base64 little-endian payloads for bases and states.

Arrays are stored as ``{"dtype", "shape", "data"}``; ``data`` is the
base64 encoding of the C-ordered raw bytes.
"""

from __future__ import annotations

import base64
import json
from fractions import Fraction

import numpy as np

from .schur import Irrep, SchurBasis, label_str, parse_label

SCHEMA = 1


def pack_array(a) -> dict:
    a = np.asarray(a)
    dtype = "complex128" if np.iscomplexobj(a) else ("int64" if a.dtype.kind in "iu" else "float64")
    raw = np.ascontiguousarray(a, dtype=np.dtype(dtype).newbyteorder("<"))
    return {"dtype": dtype, "shape": list(a.shape), "data": base64.b64encode(raw.tobytes()).decode("ascii")}


def unpack_array(d: dict) -> np.ndarray:
    dt = np.dtype(d["dtype"]).newbyteorder("<")
    return np.frombuffer(base64.b64decode(d["data"]), dtype=dt).reshape(d["shape"]).astype(d["dtype"])


def basis_to_dict(basis: SchurBasis) -> dict:
    d = {
        "schema": SCHEMA,
        "type": "SchurBasis",
        "group": basis.group,
        "n_sites": basis.n_sites,
        "site_dim": basis.site_dim,
        "irreps": [
            {"label": label_str(ir.label), "D_L": ir.dim_irrep, "D_V": ir.multiplicity, "offset": ir.offset}
            for ir in basis.irreps
        ],
    }
    if basis.permutation is not None:
        d["permutation"] = pack_array(basis.permutation)
    else:
        d["matrix"] = pack_array(basis.matrix)
    return d


def basis_from_dict(d: dict) -> SchurBasis:
    if d.get("schema") != SCHEMA or d.get("type") != "SchurBasis":
        raise ValueError("not a schema-1 SchurBasis artifact")
    irreps = [Irrep(parse_label(x["label"]), x["D_L"], x["D_V"], x["offset"]) for x in d["irreps"]]
    kw = {"permutation": unpack_array(d["permutation"])} if "permutation" in d else {"matrix": unpack_array(d["matrix"])}
    return SchurBasis(d["group"], d["n_sites"], irreps, site_dim=d["site_dim"], **kw)


def _label_key(k) -> str:
    return label_str(k) if isinstance(k, (Fraction, int)) else str(k)


def state_to_dict(state) -> dict:
    """Sectors, decoded blocks and the assembled matrix of an encoded state."""
    kin = {}
    for key, val in state.kinematics.items():
        if hasattr(val, "to_list"):
            kin[key] = val.to_list()
        elif isinstance(val, (int, float, str)):
            kin[key] = val
        elif isinstance(val, Fraction):
            kin[key] = label_str(val)
    return {
        "schema": SCHEMA,
        "type": "InvariantState",
        "scheme": state.scheme,
        "kinematics": kin,
        "sectors": [
            {
                "name": s.name,
                "protected": s.protected,
                "basis": basis_to_dict(s.basis),
                "blocks": {_label_key(k): pack_array(v) for k, v in s.blocks.items()},
                "matrix": pack_array(s.matrix),
            }
            for s in state.sectors
        ],
    }


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def save(obj: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps(obj) + "\n")


def load(path) -> dict:
    with open(path, encoding="utf-8") as f:
        return json.load(f)
