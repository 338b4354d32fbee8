import itertools
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st
from sympy.physics.quantum.cg import CG

from relinv.errors import DimensionMismatchError
from relinv.little_group import spin_matrix
from relinv.schur import (all_pi_operators, build_charge_basis, build_irrep_basis, build_schur_basis_su2,
                          build_schur_basis_u1, coupling_paths, decompose_collective_unitary, dimension_table,
                          inter_irrep_coherence, pi_full, pi_irrep, pi_multiplicity, su2_irrep_image,
                          su2_multiplicity, tensor_permutation_operator, u1_multiplicity)

HALF = Fraction(1, 2)


def sym(x):
    return sympy.Rational(x.numerator, x.denominator)


def sympy_coupled_vectors(n):
    """Iterated coupling with sympy Clebsch-Gordan coefficients: {path: {m: vector}}."""
    vecs = {(HALF,): {HALF: np.array([1.0, 0]), -HALF: np.array([0, 1.0])}}
    site = {HALF: np.array([1.0, 0]), -HALF: np.array([0, 1.0])}
    for _ in range(n - 1):
        nxt = {}
        for path, states in vecs.items():
            j1 = path[-1]
            for j in (j1 + HALF, j1 - HALF):
                if j < 0:
                    continue
                out = {}
                for k in range(int(2 * j) + 1):
                    m = j - k
                    v = 0
                    for m2 in (HALF, -HALF):
                        m1 = m - m2
                        if abs(m1) <= j1:
                            c = float(CG(sym(j1), sym(m1), sympy.Rational(1, 2), sym(m2), sym(j), sym(m)).doit())
                            v = v + c * np.kron(states[m1], site[m2])
                    out[m] = v
                nxt[path + (j,)] = out
        vecs = nxt
    return vecs


@pytest.mark.parametrize("n", [2, 3, 4])
def test_su2_basis_matches_sympy_cg(n):
    basis = build_schur_basis_su2(n)
    vecs = sympy_coupled_vectors(n)
    for ir in basis.irreps:
        paths = sorted(p for p in vecs if p[-1] == ir.label)
        for r in range(ir.dim_irrep):
            m = ir.label - r
            for mu, path in enumerate(paths):
                col = basis.matrix[:, ir.offset + r * ir.multiplicity + mu]
                assert np.allclose(col, vecs[path][m], atol=1e-12)


def brute_multiplicities(n):
    sig = [np.array([[0, 1], [1, 0]]) / 2, np.array([[0, -1j], [1j, 0]]) / 2, np.diag([0.5, -0.5])]
    j2 = 0
    for s in sig:
        tot = sum(np.kron(np.kron(np.eye(2 ** k), s), np.eye(2 ** (n - k - 1))) for k in range(n))
        j2 = j2 + tot @ tot
    ev = np.linalg.eigvalsh(j2)
    js = np.round((-1 + np.sqrt(1 + 4 * ev)) / 2 * 2) / 2
    out = {}
    for j in np.unique(js):
        out[Fraction(j).limit_denominator(2)] = int(np.sum(js == j)) // int(2 * j + 1)
    return out


@pytest.mark.parametrize("n", range(1, 7))
def test_su2_multiplicities_vs_casimir(n):
    brute = brute_multiplicities(n)
    basis = build_schur_basis_su2(n)
    assert {ir.label: ir.multiplicity for ir in basis.irreps} == brute
    assert all(su2_multiplicity(n, j) == d for j, d in brute.items())


def test_massless_dimensions_are_binomials():
    from math import comb
    for n in range(1, 13):
        basis = build_schur_basis_u1(n)
        for h in range(-n, n + 1, 2):
            d = comb(n, (n + h) // 2)
            assert basis.irrep(h).multiplicity == d == u1_multiplicity(n, h)
    assert build_schur_basis_u1(4).irrep(0).multiplicity == 6


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_basis_unitary_and_block_sizes(n):
    for b in (build_schur_basis_su2(n), build_schur_basis_u1(n)):
        m = b.matrix
        assert np.allclose(m.conj().T @ m, np.eye(b.dim), atol=1e-12)
        assert sum(ir.size for ir in b.irreps) == 2 ** n


@pytest.mark.parametrize("builder", [build_schur_basis_su2, build_schur_basis_u1])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_pi_algebra(builder, n):
    b = builder(n)
    irr, mult = all_pi_operators(b)
    irr_p = [p.in_product_basis(b) for p in irr]
    mult_p = [p.in_product_basis(b) for p in mult]
    worst = 0.0
    for a in mult_p:
        for c in irr_p:
            worst = max(worst, np.max(np.abs(a @ c - c @ a)))
    assert worst < 1e-12
    total = sum(pi_multiplicity(b, ir.label, mu, mu).in_product_basis(b)
                for ir in b.irreps for mu in range(ir.multiplicity))
    assert np.max(np.abs(total - np.eye(b.dim))) < 1e-12


def test_pi_products_and_dagger():
    b = build_schur_basis_su2(3)
    a = pi_multiplicity(b, HALF, 0, 1).matrix
    c = pi_multiplicity(b, HALF, 1, 0).matrix
    assert np.allclose(a @ c, pi_multiplicity(b, HALF, 0, 0).matrix)
    assert np.allclose(pi_multiplicity(b, HALF, 0, 1).dagger.matrix, c)
    r = pi_irrep(b, Fraction(3, 2), 0, 3).matrix
    assert np.allclose(r @ r, 0)
    with pytest.raises(IndexError):
        pi_multiplicity(b, Fraction(3, 2), 0, 1)
    full = pi_full(b, HALF, 0, 0, Fraction(3, 2), 1, 0)
    assert abs(inter_irrep_coherence(b.from_schur(full), b) - 1.0) < 1e-12


def random_su2(rng):
    return np.exp(1j * rng.uniform(0, 2 * np.pi)) * spin_matrix("1/2", rng.normal(size=3))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(1, 5))
def test_collective_unitary_block_form(seed, n):
    rng = np.random.default_rng(seed)
    b = build_schur_basis_su2(n)
    u = random_su2(rng)
    blocks = decompose_collective_unitary(b, u)
    for j, x in blocks.items():
        assert np.allclose(x, su2_irrep_image(j, u, n), atol=1e-10)


def test_permutations_act_on_multiplicity_only(rng):
    n = 4
    b = build_schur_basis_su2(n)
    irr, _ = all_pi_operators(b)
    for perm in itertools.permutations(range(n)):
        p = b.to_schur(tensor_permutation_operator(n, 2, perm))
        assert b.off_block_mass(p) < 1e-12
        for op in irr:
            assert np.max(np.abs(p @ op.matrix - op.matrix @ p)) < 1e-12


def test_permutation_operator_moves_factors(rng):
    a, c, d = (rng.normal(size=(2, 2)) for _ in range(3))
    p = tensor_permutation_operator(3, 2, [1, 2, 0])
    # factor 0 -> position 1, factor 1 -> position 2, factor 2 -> position 0
    assert np.allclose(p @ np.kron(np.kron(a, c), d) @ p.T, np.kron(np.kron(d, a), c))
    with pytest.raises(ValueError):
        tensor_permutation_operator(3, 2, [0, 0, 1])


def test_coupling_paths_sorted():
    paths = coupling_paths(3)
    assert paths == sorted(paths)
    assert [p for p in paths if p[-1] == HALF] == [(HALF, 0, HALF), (HALF, 1, HALF)]


def test_charge_and_irrep_bases():
    b = build_charge_basis([2, -2, 2])
    assert [(ir.label, ir.multiplicity) for ir in b.irreps] == [(-2, 1), (2, 2)]
    t = build_irrep_basis(1, 2)
    assert t.dim == 6 and t.irreps[0].dim_irrep == 3


def test_decompose_rejects_wrong_size():
    with pytest.raises(DimensionMismatchError):
        decompose_collective_unitary(build_schur_basis_su2(2), np.eye(3))


def test_dimension_table_rows():
    rows = dimension_table("massive", [3])
    assert [(r["irrep"], r["D_L"], r["D_V"]) for r in rows] == [(HALF, 2, 2), (Fraction(3, 2), 4, 1)]
    rows = dimension_table("massless", [4])
    assert {(r["irrep"], r["D_L"], r["D_V"]) for r in rows} >= {(0, 1, 6)}
    with pytest.raises(ValueError):
        dimension_table("massive", [11])
