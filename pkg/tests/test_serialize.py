import json

import numpy as np

from relinv.encode import build_dyon_cell, encode_dyon_qubit, encode_dyon_state
from relinv.schur import build_schur_basis_su2, build_schur_basis_u1
from relinv.serialize import basis_from_dict, basis_to_dict, dumps, pack_array, state_to_dict, unpack_array


def test_array_roundtrip(rng):
    for a in (rng.normal(size=(3, 4)), rng.normal(size=5) + 1j * rng.normal(size=5), np.arange(6)):
        back = unpack_array(json.loads(json.dumps(pack_array(a))))
        assert back.dtype == np.asarray(a).dtype or back.dtype.kind == a.dtype.kind
        assert np.array_equal(back, a)


def test_basis_roundtrip():
    for b in (build_schur_basis_su2(3), build_schur_basis_u1(4)):
        back = basis_from_dict(json.loads(dumps(basis_to_dict(b))))
        assert np.array_equal(back.matrix, b.matrix)
        assert back.irreps == b.irreps and back.group == b.group


def test_state_export():
    st_ = encode_dyon_state(encode_dyon_qubit(build_dyon_cell(1), build_dyon_cell(0), 0.6, 0.8))
    d = json.loads(dumps(state_to_dict(st_)))
    assert d["schema"] == 1 and len(d["sectors"]) == 3
    assert np.allclose(unpack_array(d["sectors"][2]["matrix"]), st_.sectors[2].matrix)
